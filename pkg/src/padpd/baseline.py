"""
Direct multi-block extension of ADMM.

Each sweep minimizes the augmented Lagrangian over the blocks in order, block
``i`` seeing blocks ``< i`` at iteration ``k + 1`` and blocks ``> i`` at
iteration ``k``, then takes the dual step ``y += rho (sum_i A_i x_i - c)``.
With two blocks this is ordinary ADMM, with one it is the method of
multipliers.  For three or more blocks it need not converge; the classic
counterexample is built into ``problems.example1``.
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from .errors import ConfigError, SubproblemError
from .prox import QuadraticFunction, ZeroFunction
from .solver import IterationRecord, kkt_residual


__all__ = ["AdmmConfig", "AdmmResult", "admm_direct_multiblock"]


@dataclass
class AdmmConfig:
    rho: float = 1.0
    max_iter: int = 10_000
    tol: float = 1e-10
    divergence_threshold: float = 1e12

    def __post_init__(self):
        if not self.rho > 0:
            raise ConfigError(f"ADMM needs a positive penalty, got rho={self.rho!r}")
        if int(self.max_iter) < 0:
            raise ConfigError("max_iter must be nonnegative")
        if not self.tol >= 0:
            raise ConfigError("tol must be nonnegative")


@dataclass
class AdmmResult:
    xs: list
    y: np.ndarray
    records: List[IterationRecord]
    diverged: bool
    stop_reason: str

    @property
    def converged(self):
        return self.stop_reason == "converged"

    @property
    def iterations(self):
        return self.records[-1].k if self.records else 0


def _block_solver(A, f, rho):
    """
    Return ``solve(v)`` giving ``argmin_u f(u) + rho/2 ||A u - v||^2``.

    Quadratic and zero costs use the normal equations; any other cost is
    accepted only when ``A`` has orthonormal columns, where the subproblem
    is a plain prox.
    """
    n = A.shape[1]
    if isinstance(f, (QuadraticFunction, ZeroFunction)):
        if isinstance(f, ZeroFunction):
            curvature, linear = np.zeros(n), np.zeros(n)
        else:
            curvature, linear = f.curvature, f.linear
        K = np.diag(curvature) + rho * (A.T @ A)
        if np.linalg.matrix_rank(K) < n:
            raise SubproblemError(
                "block subproblem is singular (cost curvature plus rho A^T A)")
        return lambda v: np.linalg.solve(K, rho * (A.T @ v) - linear)
    if np.allclose(A.T @ A, np.eye(n), atol=1e-12):
        return lambda v: f.prox(A.T @ v, 1.0 / rho)
    raise SubproblemError(
        f"no closed-form subproblem for {type(f).__name__} with a "
        "non-orthonormal block matrix")


def admm_direct_multiblock(problem, config=None, init=None, access_log=None):
    """
    Gauss-Seidel ADMM on a block problem.

    Parameters
    ----------
    problem : BlockProblem
    config : AdmmConfig, optional
    init : array_like, optional
        Stacked starting point ``(x_1, ..., x_q, y)``; zeros by default.
    access_log : list, optional
        Receives ``(k, block, other_block, iteration_of_value_read)`` for every
        cross-block read inside a sweep.

    Returns
    -------
    AdmmResult
        Divergence is reported through ``diverged``, never raised.
    """
    config = AdmmConfig() if config is None else config
    rho = float(config.rho)
    solvers = [_block_solver(A, f, rho)
               for A, f in zip(problem.matrices, problem.functions)]
    Pi = np.zeros(problem.size) if init is None \
        else np.array(init, dtype=float).reshape(-1)
    xs, y = problem.split(Pi)
    xs = [x.copy() for x in xs]
    y = y.copy()
    contrib = [A @ x for A, x in zip(problem.matrices, xs)]

    def record(k):
        r = problem.residual(xs)
        primal = np.concatenate(xs)
        return IterationRecord(k, float(np.linalg.norm(primal)),
                               float(np.linalg.norm(r)), float(np.linalg.norm(y)),
                               problem.objective(xs))

    records = [record(0)]
    q = problem.q
    if kkt_residual(problem, problem.stack(xs, y)) <= config.tol:
        return AdmmResult(xs, y, records, False, "converged")
    for k in range(int(config.max_iter)):
        for i in range(q):
            if access_log is not None:
                access_log.extend((k, i, j, k + 1 if j < i else k)
                                  for j in range(q) if j != i)
            others = sum((contrib[j] for j in range(q) if j != i),
                         np.zeros(problem.p))
            target = problem.c - others - y / rho
            xs[i] = solvers[i](target)
            contrib[i] = problem.matrices[i] @ xs[i]
        y = y + rho * (sum(contrib) - problem.c)
        rec = record(k + 1)
        records.append(rec)
        if not np.isfinite(rec.error) or not np.all(np.isfinite(y)) \
                or rec.error > config.divergence_threshold:
            return AdmmResult(xs, y, records, True, "diverged")
        if kkt_residual(problem, problem.stack(xs, y)) <= config.tol:
            return AdmmResult(xs, y, records, False, "converged")
    return AdmmResult(xs, y, records, False, "max_iter")
