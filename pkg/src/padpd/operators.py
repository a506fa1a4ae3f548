"""
Block problems and the affine monotone operator ``H(P) = M P + V``.

For a problem ``min sum_i f_i(x_i)  s.t.  sum_i A_i x_i = c`` with penalty
``rho >= 0`` the stacked variable is ``P = (x_1, ..., x_q, y)`` and

    M = [[rho A_i^T A_j]_{ij}   [A_i^T]_i ]
        [[-A_j]_j               0_{p x p} ]

    V = (-rho A_1^T c, ..., -rho A_q^T c, c).
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ProblemShapeError
from .prox import ProxFunction


__all__ = [
    "BlockProblem", "SplittingOperator", "build_operator", "apply_H",
    "lipschitz_bound_norm_product", "lipschitz_bound_blockwise",
    "spectral_norm", "lipschitz_constant",
]


def _readonly(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


class BlockProblem:
    """
    ``min sum_i f_i(x_i)`` subject to ``sum_i A_i x_i = c``.

    Parameters
    ----------
    matrices : sequence of array_like
        The ``p x n_i`` constraint blocks.  1-D arrays are read as columns.
    functions : sequence of ProxFunction
        One cost per block, ``functions[i].dimension == n_i``.
    c : array_like
        Right-hand side of length ``p``.
    """

    def __init__(self, matrices, functions, c, name=None):
        c = np.asarray(c, dtype=float).reshape(-1)
        mats = []
        for i, A in enumerate(matrices):
            A = np.asarray(A, dtype=float)
            if A.ndim == 1:
                A = A[:, None]
            if A.ndim != 2:
                raise ProblemShapeError(f"block {i}: A must be a matrix")
            mats.append(_readonly(A))
        functions = list(functions)
        if not mats:
            raise ProblemShapeError("a block problem needs at least one block")
        if len(functions) != len(mats):
            raise ProblemShapeError(
                f"{len(mats)} matrices but {len(functions)} functions")
        p = c.size
        if p == 0:
            raise ProblemShapeError("constraint vector c is empty")
        for i, (A, f) in enumerate(zip(mats, functions)):
            if A.shape[0] != p:
                raise ProblemShapeError(
                    f"block {i}: A has {A.shape[0]} rows but c has length {p}")
            if not isinstance(f, ProxFunction):
                raise ProblemShapeError(f"block {i}: cost is not a ProxFunction")
            if f.dimension != A.shape[1]:
                raise ProblemShapeError(
                    f"block {i}: function dimension {f.dimension} does not "
                    f"match {A.shape[1]} columns of A")
        self.matrices = tuple(mats)
        self.functions = tuple(functions)
        self.c = _readonly(c)
        self.name = name

    @property
    def q(self):
        return len(self.matrices)

    @property
    def p(self):
        return self.c.size

    @property
    def block_dims(self):
        return tuple(A.shape[1] for A in self.matrices)

    @property
    def n_primal(self):
        return sum(self.block_dims)

    @property
    def size(self):
        """Length of the stacked primal-dual vector."""
        return self.n_primal + self.p

    @property
    def constraint_matrix(self):
        """``[A_1, ..., A_q]``."""
        return np.hstack(self.matrices)

    def slices(self):
        """Slices of the stacked vector: one per primal block, then the dual."""
        out, start = [], 0
        for n in self.block_dims:
            out.append(slice(start, start + n))
            start += n
        out.append(slice(start, start + self.p))
        return out

    def split(self, Pi):
        """Split a stacked vector into ``([x_1, ..., x_q], y)``."""
        Pi = np.asarray(Pi, dtype=float).reshape(-1)
        if Pi.size != self.size:
            raise ProblemShapeError(
                f"stacked point has length {Pi.size}, expected {self.size}")
        parts = [Pi[s] for s in self.slices()]
        return parts[:-1], parts[-1]

    def stack(self, xs, y):
        return np.concatenate([np.asarray(x, dtype=float).reshape(-1) for x in xs]
                              + [np.asarray(y, dtype=float).reshape(-1)])

    def residual(self, xs):
        """``sum_i A_i x_i - c``."""
        r = -self.c.copy()
        for A, x in zip(self.matrices, xs):
            r += A @ x
        return r

    def objective(self, xs):
        return float(sum(f.evaluate(x) for f, x in zip(self.functions, xs)))

    def __eq__(self, other):
        if not isinstance(other, BlockProblem):
            return NotImplemented
        return (self.q == other.q
                and np.array_equal(self.c, other.c)
                and all(a.shape == b.shape and np.array_equal(a, b)
                        for a, b in zip(self.matrices, other.matrices))
                and all(f == g for f, g in zip(self.functions, other.functions)))

    __hash__ = None

    def __repr__(self):
        return (f"BlockProblem(name={self.name!r}, q={self.q}, p={self.p}, "
                f"block_dims={self.block_dims})")


@dataclass(frozen=True)
class SplittingOperator:
    """The affine map ``H(P) = M P + V``; arrays are read-only."""

    M: np.ndarray
    V: np.ndarray
    rho: float
    block_dims: tuple
    dual_dim: int

    @property
    def size(self):
        return self.V.size

    def __call__(self, Pi):
        return apply_H(self, Pi)


def build_operator(problem, rho):
    """Assemble ``M_rho`` and ``V_rho`` for ``problem``."""
    rho = float(rho)
    if not rho >= 0:
        raise ValueError(f"penalty rho must be nonnegative, got {rho!r}")
    A = problem.constraint_matrix
    N, p = problem.n_primal, problem.p
    M = np.zeros((N + p, N + p))
    if rho != 0:
        M[:N, :N] = rho * (A.T @ A)
    M[:N, N:] = A.T
    M[N:, :N] = -A
    V = np.concatenate([-rho * (A.T @ problem.c), problem.c])
    return SplittingOperator(_readonly(M), _readonly(V), rho,
                             problem.block_dims, p)


def apply_H(op, Pi):
    """Evaluate ``M Pi + V``."""
    Pi = np.asarray(Pi, dtype=float)
    if Pi.shape != op.V.shape:
        raise ProblemShapeError(
            f"stacked point has shape {Pi.shape}, expected {op.V.shape}")
    return op.M @ Pi + op.V


def _check_square(M):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ProblemShapeError(f"expected a square matrix, got shape {M.shape}")
    return M


def lipschitz_bound_norm_product(M):
    """Upper bound ``sqrt(||M||_1 ||M||_inf)`` on the spectral norm."""
    M = _check_square(M)
    if M.size == 0:
        return 0.0
    one = np.abs(M).sum(axis=0).max()
    inf = np.abs(M).sum(axis=1).max()
    return math.sqrt(one * inf)


def lipschitz_bound_blockwise(problem, rho):
    """
    Max of the block-column 1-norms of the primal block columns and
    ``||[A_1, ..., A_q]||_inf``.

    This is the step-size heuristic built from block norms.  It is not
    guaranteed to dominate ``||M_rho||_2``; prefer ``lipschitz_constant``.
    """
    rho = float(rho)
    if not rho >= 0:
        raise ValueError(f"penalty rho must be nonnegative, got {rho!r}")
    A = problem.constraint_matrix
    candidates = []
    for Aj in problem.matrices:
        column = np.vstack([rho * (Ai.T @ Aj) for Ai in problem.matrices] + [-Aj])
        candidates.append(np.abs(column).sum(axis=0).max())
    candidates.append(np.abs(A).sum(axis=1).max())
    return float(max(candidates))


_PERTURBATIONS = 3


def spectral_norm(M, tol=1e-8, max_iter=100_000):
    """
    Largest singular value of ``M`` by power iteration on ``M^T M``.

    Starts from the normalized all-ones vector.  If that start is (nearly)
    orthogonal to the dominant subspace or stalls, the run is repeated from
    deterministic perturbed starts, so results are reproducible.

    Raises
    ------
    ConvergenceError
        If the relative change never drops below ``tol``; ``estimate``
        carries the best value seen.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ProblemShapeError("spectral_norm expects a matrix")
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    n = M.shape[1]
    if n == 0 or not np.any(M):
        return 0.0
    G = M.T @ M
    best = 0.0
    converged = []
    for attempt in range(_PERTURBATIONS + 1):
        v = np.ones(n)
        if attempt:
            v = v + np.cos(np.arange(1, n + 1) * (attempt + 0.5))
        v /= np.linalg.norm(v)
        lam_old = None
        for _ in range(max_iter):
            w = G @ v
            lam = float(v @ w)
            wn = np.linalg.norm(w)
            if wn == 0:
                break
            best = max(best, lam)
            if lam_old is not None and abs(lam - lam_old) <= tol * lam:
                converged.append(lam)
                break
            lam_old = lam
            v = w / wn
        # a second converged start guards against a start vector with no
        # component along the dominant singular vector
        if len(converged) == 2:
            break
    if converged:
        return math.sqrt(max(converged))
    raise ConvergenceError(
        f"power iteration did not reach relative tolerance {tol}",
        estimate=math.sqrt(best))


def lipschitz_constant(op_or_matrix, tol=1e-8):
    """
    Lipschitz constant of ``H``: the spectral norm of ``M``, falling back to
    the norm-product bound when power iteration fails.
    """
    M = op_or_matrix.M if isinstance(op_or_matrix, SplittingOperator) else op_or_matrix
    try:
        return spectral_norm(M, tol)
    except ConvergenceError:
        warnings.warn("power iteration failed; using the norm-product bound",
                      RuntimeWarning, stacklevel=2)
        return lipschitz_bound_norm_product(M)
