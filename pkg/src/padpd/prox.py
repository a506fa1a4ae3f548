"""
Proximity operators.

Every solver in the package performs its backward step through
``ProxFunction.prox(x, eta)``, which returns

    argmin_u  eta * f(u) + 0.5 * ||u - x||^2 .

The closed forms live in the ``prox_*`` functions; the classes wrap them
together with ``evaluate`` so a block cost can be evaluated, proxed and
serialized by tag.  ``prox_numeric_oracle`` solves the same subproblem by
direct minimization in extended precision and exists to check the closed
forms.
"""

import numpy as np
import mpmath

from .errors import InvalidFunctionError, OracleFailure


__all__ = [
    "prox_zero", "prox_quadratic", "prox_l1", "prox_numeric_oracle",
    "ProxFunction", "ZeroFunction", "QuadraticFunction", "L1Norm",
    "CallableFunction", "FUNCTION_REGISTRY", "make_function",
]


def _as_point(x):
    return np.array(x, dtype=float, copy=True).reshape(-1)


def _check_eta(eta):
    if not eta > 0:
        raise ValueError(f"prox scale must be positive, got {eta!r}")


# ---------------------------------------------------------------------------
# closed forms

def prox_zero(x, eta):
    """Prox of the zero function: the identity."""
    _check_eta(eta)
    return _as_point(x)


def prox_quadratic(a, x, eta, linear=None):
    """
    Prox of ``f(u) = 0.5 * sum(a * u**2) + sum(linear * u)``.

    Parameters
    ----------
    a : float or array_like
        Nonnegative curvature, scalar or one entry per coordinate.
    x : array_like
        Prox centre.
    eta : float
        Positive scale.
    linear : array_like, optional
        Linear coefficient; zero when omitted.

    Returns
    -------
    ndarray
        ``(x - eta * linear) / (1 + eta * a)`` coordinate-wise.
    """
    _check_eta(eta)
    a = np.asarray(a, dtype=float)
    if np.any(a < 0):
        raise InvalidFunctionError("quadratic curvature must be nonnegative")
    x = _as_point(x)
    if linear is not None:
        x = x - eta * np.asarray(linear, dtype=float)
    return x / (1.0 + eta * a)


def prox_l1(lam, x, eta):
    """Soft thresholding at level ``eta * lam`` (prox of ``lam * ||u||_1``)."""
    _check_eta(eta)
    if lam < 0:
        raise InvalidFunctionError("l1 weight must be nonnegative")
    x = _as_point(x)
    return np.sign(x) * np.maximum(np.abs(x) - eta * lam, 0.0)


# ---------------------------------------------------------------------------
# function objects

class ProxFunction:
    """
    Closed convex function with a computable proximity operator.

    Subclasses implement ``evaluate`` and ``prox``.  ``evaluate`` may return
    ``+inf`` (indicator functions) but ``prox`` must stay finite.  Convexity
    is the caller's responsibility and is not checked.
    """

    tag = None

    def __init__(self, dimension):
        dimension = int(dimension)
        if dimension < 1:
            raise InvalidFunctionError("dimension must be a positive integer")
        self.dimension = dimension

    def __call__(self, u):
        return self.evaluate(u)

    def evaluate(self, u):
        raise NotImplementedError

    def prox(self, x, eta):
        raise NotImplementedError

    def params(self):
        """Tag-free parameters, as stored in problem files."""
        return {}

    def to_dict(self):
        return {"tag": self.tag, **self.params()}

    def __eq__(self, other):
        if type(self) is not type(other) or self.dimension != other.dimension:
            return False
        mine, theirs = self.params(), other.params()
        return mine.keys() == theirs.keys() and all(
            np.array_equal(mine[k], theirs[k]) for k in mine)

    __hash__ = None

    def __repr__(self):
        extra = "".join(f", {k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}(dimension={self.dimension}{extra})"


class ZeroFunction(ProxFunction):
    tag = "zero"

    def evaluate(self, u):
        return 0.0

    def prox(self, x, eta):
        return prox_zero(x, eta)


class QuadraticFunction(ProxFunction):
    """``f(u) = 0.5 * sum(curvature * u**2) + linear . u + constant``."""

    tag = "quadratic"

    def __init__(self, dimension, curvature=1.0, linear=None, constant=0.0):
        super().__init__(dimension)
        curvature = np.asarray(curvature, dtype=float)
        if curvature.ndim and curvature.shape != (self.dimension,):
            raise InvalidFunctionError(
                f"curvature has length {curvature.size}, expected {self.dimension}")
        curvature = np.broadcast_to(curvature, (self.dimension,)).copy()
        if np.any(curvature < 0) or not np.all(np.isfinite(curvature)):
            raise InvalidFunctionError(
                "quadratic curvature must be finite and nonnegative")
        if linear is None:
            linear = np.zeros(self.dimension)
        linear = np.asarray(linear, dtype=float).reshape(-1)
        if linear.shape != (self.dimension,):
            raise InvalidFunctionError(
                f"linear term has length {linear.size}, expected {self.dimension}")
        self.curvature = curvature
        self.linear = linear
        self.constant = float(constant)

    def evaluate(self, u):
        u = np.asarray(u).reshape(-1)
        return (0.5 * np.sum(self.curvature * u * u) + np.sum(self.linear * u)
                + self.constant)

    def prox(self, x, eta):
        return prox_quadratic(self.curvature, x, eta, self.linear)

    def params(self):
        out = {"curvature": self.curvature}
        if np.any(self.linear != 0):
            out["linear"] = self.linear
        if self.constant != 0:
            out["constant"] = self.constant
        return out


class L1Norm(ProxFunction):
    tag = "l1"

    def __init__(self, dimension, lam=1.0):
        super().__init__(dimension)
        if not lam >= 0:
            raise InvalidFunctionError("l1 weight must be nonnegative")
        self.lam = float(lam)

    def evaluate(self, u):
        return self.lam * np.sum(np.abs(np.asarray(u).reshape(-1)))

    def prox(self, x, eta):
        return prox_l1(self.lam, x, eta)

    def params(self):
        return {"lam": self.lam}


class CallableFunction(ProxFunction):
    """Wrap user-supplied ``evaluate(u)`` and ``prox(x, eta)`` callables."""

    tag = "callable"

    def __init__(self, dimension, evaluate, prox):
        super().__init__(dimension)
        self._evaluate = evaluate
        self._prox = prox

    def evaluate(self, u):
        return self._evaluate(u)

    def prox(self, x, eta):
        _check_eta(eta)
        return _as_point(self._prox(_as_point(x), eta))


FUNCTION_REGISTRY = {
    "zero": ZeroFunction,
    "quadratic": QuadraticFunction,
    "l1": L1Norm,
}


def make_function(tag, dimension, **params):
    """Build a registered function from its string tag and parameters."""
    try:
        cls = FUNCTION_REGISTRY[tag]
    except KeyError:
        raise InvalidFunctionError(
            f"unknown function tag {tag!r}; known: {sorted(FUNCTION_REGISTRY)}"
        ) from None
    return cls(dimension, **params)


# ---------------------------------------------------------------------------
# reference oracle

_INVPHI = (mpmath.sqrt(5) - 1) / 2


def _golden_min(g, t0, width):
    """Minimize a convex scalar function by bracketing then golden section."""
    h = mpmath.mpf(1)
    g0 = g(t0)
    if g(t0 + h) < g0:
        lo, mid, step = t0, t0 + h, h
    elif g(t0 - h) < g0:
        lo, mid, step = t0, t0 - h, -h
    else:
        lo, hi = t0 - h, t0 + h
        step = None
    if step is not None:
        gmid = g(mid)
        for _ in range(200):
            step *= 2
            nxt = mid + step
            gnxt = g(nxt)
            if gnxt >= gmid:
                break
            lo, mid, gmid = mid, nxt, gnxt
        else:
            raise OracleFailure("could not bracket the prox subproblem minimum")
        lo, hi = sorted((lo, mid + step))

    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    gc, gd = g(c), g(d)
    while b - a > width:
        if gc <= gd:
            b, d, gd = d, c, gc
            c = b - _INVPHI * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + _INVPHI * (b - a)
            gd = g(d)
    return (a + b) / 2


def prox_numeric_oracle(f, x, eta, tol=1e-10, max_sweeps=200, dps=40):
    """
    Solve the prox subproblem of ``f`` by direct minimization.

    Cyclic coordinate descent with golden-section line minimization, carried
    out in ``dps`` significant digits so the returned point is accurate well
    below double precision.  Exact after one sweep for separable ``f``;
    converges for smooth nonseparable ``f``.  Intended for testing only.

    Parameters
    ----------
    f : ProxFunction
        Function whose ``evaluate`` accepts an object array of mpmath numbers.
    x : array_like
        Prox centre.
    eta : float
        Positive scale.
    tol : float
        Accuracy required of each coordinate of the returned point.
    max_sweeps : int
        Coordinate sweeps allowed before ``OracleFailure`` is raised.

    Returns
    -------
    ndarray
    """
    _check_eta(eta)
    if not tol > 0:
        raise ValueError("oracle tolerance must be positive")
    x = _as_point(x)
    with mpmath.workdps(dps):
        xm = [mpmath.mpf(float(v)) for v in x]
        em = mpmath.mpf(float(eta))
        u = list(xm)
        width = mpmath.mpf(tol) * mpmath.mpf("1e-6")

        def phi(point):
            val = f.evaluate(np.array(point, dtype=object))
            return em * mpmath.mpf(val) + sum(
                (pi - xi) ** 2 for pi, xi in zip(point, xm)) / 2

        for _ in range(max_sweeps):
            moved = mpmath.mpf(0)
            for j in range(len(u)):
                def g(t, j=j):
                    trial = list(u)
                    trial[j] = t
                    return phi(trial)
                t = _golden_min(g, u[j], width)
                moved = max(moved, abs(t - u[j]))
                u[j] = t
            if moved <= width * 10:
                return np.array([float(v) for v in u])
    raise OracleFailure(
        f"prox oracle did not settle within {max_sweeps} sweeps")
