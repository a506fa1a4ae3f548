"""
Independent reference implementations used as test oracles.

Nothing here imports the solver internals: each routine is a direct
transcription of the update equations written out by hand, so agreement with
``padpd.solve`` is a real cross-check.
"""

import numpy as np
from scipy.optimize import minimize_scalar


def two_block_literal(A, B, c, prox_f, prox_g, eta, rho, start, steps):
    """
    Two-block parallel primal-dual updates, written variable by variable.

    ``start = (x0, z0, y0, x_prev, z_prev, y_prev)``.  Returns the list of
    stacked ``(x, z, y)`` iterates for k = 0..steps.
    """
    x, z, y, xp, zp, yp = (np.array(v, dtype=float) for v in start)
    out = [np.concatenate([x, z, y])]
    for _ in range(steps):
        xhat = (x - 2 * eta * A.T @ y - 2 * eta * rho * A.T @ A @ x
                - 2 * eta * rho * A.T @ B @ z + eta * A.T @ yp
                + eta * rho * A.T @ A @ xp + eta * rho * A.T @ B @ zp
                + eta * rho * A.T @ c)
        zhat = (z - 2 * eta * B.T @ y - 2 * eta * rho * B.T @ A @ x
                - 2 * eta * rho * B.T @ B @ z + eta * B.T @ yp
                + eta * rho * B.T @ A @ xp + eta * rho * B.T @ B @ zp
                + eta * rho * B.T @ c)
        x_new = prox_f(xhat, eta)
        z_new = prox_g(zhat, eta)
        y_new = y + 2 * eta * A @ x + 2 * eta * B @ z - eta * A @ xp \
            - eta * B @ zp - eta * c
        xp, zp, yp = x, z, y
        x, z, y = x_new, z_new, y_new
        out.append(np.concatenate([x, z, y]))
    return out


def two_block_lagrangian_literal(A, B, c, prox_f, prox_g, eta, start, steps):
    """The penalty-free two-block updates, written out on their own."""
    x, z, y, xp, zp, yp = (np.array(v, dtype=float) for v in start)
    out = [np.concatenate([x, z, y])]
    for _ in range(steps):
        xhat = x - 2 * eta * A.T @ y + eta * A.T @ yp
        zhat = z - 2 * eta * B.T @ y + eta * B.T @ yp
        x_new = prox_f(xhat, eta)
        z_new = prox_g(zhat, eta)
        y_new = y + 2 * eta * A @ x + 2 * eta * B @ z - eta * A @ xp \
            - eta * B @ zp - eta * c
        xp, zp, yp = x, z, y
        x, z, y = x_new, z_new, y_new
        out.append(np.concatenate([x, z, y]))
    return out


def multi_block_literal(mats, proxes, c, eta, rho, xs0, y0, xs_prev, y_prev, steps):
    """q-block updates with explicit sums over blocks."""
    q = len(mats)
    xs = [np.array(v, dtype=float) for v in xs0]
    xps = [np.array(v, dtype=float) for v in xs_prev]
    y, yp = np.array(y0, dtype=float), np.array(y_prev, dtype=float)
    out = [np.concatenate(xs + [y])]
    for _ in range(steps):
        new = []
        for i in range(q):
            Ai = mats[i]
            xhat = xs[i] - 2 * eta * Ai.T @ y + eta * Ai.T @ yp + eta * rho * Ai.T @ c
            for j in range(q):
                xhat = xhat - 2 * eta * rho * Ai.T @ mats[j] @ xs[j] \
                    + eta * rho * Ai.T @ mats[j] @ xps[j]
            new.append(proxes[i](xhat, eta))
        y_new = y - eta * c
        for j in range(q):
            y_new = y_new + 2 * eta * mats[j] @ xs[j] - eta * mats[j] @ xps[j]
        xps, yp = xs, y
        xs, y = new, y_new
        out.append(np.concatenate(xs + [y]))
    return out


def example1_hand_expanded(eta, rho, x12, x3, x4, y, x12p, x3p, x4p, yp, steps):
    """
    The three-block example with every matrix product multiplied out by hand
    (``A1^T A1 = 3 ones``, ``A1^T A2 = 4``, ``A1^T A3 = 5``, ``A2^T A2 = 6``,
    ``A2^T A3 = 7``, ``A3^T A3 = 9``).
    """
    x12, x12p = np.array(x12, float), np.array(x12p, float)
    y, yp = np.array(y, float), np.array(yp, float)
    x3, x4, x3p, x4p = float(x3), float(x4), float(x3p), float(x4p)
    ones23 = np.ones((2, 3))
    a2 = np.array([1.0, 1.0, 2.0])
    a3 = np.array([1.0, 2.0, 2.0])
    out = [np.concatenate([x12, [x3, x4], y])]
    D = np.diag([1 / (1 + eta), 1.0])
    for _ in range(steps):
        inner = (np.array([[1 - 6 * eta * rho, -6 * eta * rho],
                           [-6 * eta * rho, 1 - 6 * eta * rho]]) @ x12
                 - 2 * eta * ones23 @ y
                 - 2 * eta * rho * np.array([4.0, 4.0]) * x3
                 - 2 * eta * rho * np.array([5.0, 5.0]) * x4
                 + eta * ones23 @ yp
                 + eta * rho * np.array([[3.0, 3.0], [3.0, 3.0]]) @ x12p
                 + eta * rho * np.array([4.0, 4.0]) * x3p
                 + eta * rho * np.array([5.0, 5.0]) * x4p)
        x12_new = D @ inner
        x3_new = ((1 - 12 * eta * rho) * x3 - 2 * eta * a2 @ y
                  - 2 * eta * rho * np.array([4.0, 4.0]) @ x12 - 14 * eta * rho * x4
                  + eta * a2 @ yp + eta * rho * np.array([4.0, 4.0]) @ x12p
                  + 6 * eta * rho * x3p + 7 * eta * rho * x4p)
        x4_new = ((1 - 18 * eta * rho) * x4 - 2 * eta * a3 @ y
                  - 2 * eta * rho * np.array([5.0, 5.0]) @ x12 - 14 * eta * rho * x3
                  + eta * a3 @ yp + eta * rho * np.array([5.0, 5.0]) @ x12p
                  + 7 * eta * rho * x3p + 9 * eta * rho * x4p)
        y_new = (y + 2 * eta * np.ones((3, 2)) @ x12 + 2 * eta * a2 * x3
                 + 2 * eta * a3 * x4 - eta * np.ones((3, 2)) @ x12p
                 - eta * a2 * x3p - eta * a3 * x4p)
        x12p, x3p, x4p, yp = x12, x3, x4, y
        x12, x3, x4, y = x12_new, x3_new, x4_new, y_new
        out.append(np.concatenate([x12, [x3, x4], y]))
    return out


def qp_kkt_solution(mats, curvatures, linears, c):
    """Solve an equality-constrained diagonal QP through its KKT system."""
    A = np.hstack(mats)
    D = np.diag(np.concatenate(curvatures))
    b = np.concatenate(linears)
    N, p = A.shape[1], A.shape[0]
    K = np.block([[D, A.T], [A, np.zeros((p, p))]])
    sol = np.linalg.solve(K, np.concatenate([-b, c]))
    return sol[:N], sol[N:]


def scalar_prox_bruteforce(phi_1d, x, eta):
    """Coordinate-wise ``argmin_u eta * phi(u) + 0.5 (u - x)^2`` by bounded Brent."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    for j, xj in enumerate(x):
        lo, hi = xj - 10 - abs(xj), xj + 10 + abs(xj)
        res = minimize_scalar(lambda u: eta * phi_1d(u) + 0.5 * (u - xj) ** 2,
                              bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        out[j] = res.x
    return out
