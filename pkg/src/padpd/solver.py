"""
Forward-reflected-backward iteration and the parallel primal-dual solver.

One step maps the snapshot ``(P_k, P_{k-1})`` to

    theta   = P_k - 2 eta H(P_k) + eta H(P_{k-1})
    x_i^+   = prox_{eta f_i}(theta_i)        for every primal block i
    y^+     = theta_y

Every block update reads only the snapshot, so the blocks can be computed in
any order (or concurrently) with identical results.  With ``rho = 0`` the
penalty terms vanish and the same code runs the Lagrangian variant.
"""

import logging
import warnings
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from .errors import ConfigError, DivergenceError
from .operators import apply_H, build_operator, lipschitz_constant


logger = logging.getLogger(__name__)

__all__ = [
    "SolverConfig", "SolverState", "IterationRecord", "SolveResult",
    "default_eta", "initial_state", "frb_step", "kkt_residual", "solve",
    "DIVERGENCE_THRESHOLD", "FULL_TRACE_LIMIT", "TRACE_STRIDE",
]

DIVERGENCE_THRESHOLD = 1e12
# every iteration is recorded up to this count, then every TRACE_STRIDE-th
FULL_TRACE_LIMIT = 100_000
TRACE_STRIDE = 10


def default_eta(L, safety=0.9):
    """Step size ``safety / (2 L)``, strictly inside ``(0, 1/(2L))``."""
    if not 0 < safety < 1:
        raise ConfigError(f"safety factor must lie in (0, 1), got {safety!r}")
    if not L > 0:
        raise ConfigError(f"Lipschitz constant must be positive, got {L!r}")
    return safety / (2.0 * L)


@dataclass
class SolverConfig:
    """
    Settings for ``solve``.

    ``eta=None`` (or ``eta_policy="auto"``) picks ``default_eta(L, safety)``
    with ``L = ||M_rho||_2``.  ``tol`` applies to ``kkt_residual``.
    """

    eta: Optional[float] = None
    rho: float = 0.0
    max_iter: int = 50_000
    tol: float = 1e-10
    eta_policy: str = "explicit"
    safety: float = 0.9

    def __post_init__(self):
        if self.eta is None:
            self.eta_policy = "auto"
        if self.eta_policy not in ("explicit", "auto"):
            raise ConfigError(f"unknown eta policy {self.eta_policy!r}")
        if self.eta_policy == "explicit" and not self.eta > 0:
            raise ConfigError(f"step size must be positive, got {self.eta!r}")
        if not self.rho >= 0:
            raise ConfigError(f"penalty rho must be nonnegative, got {self.rho!r}")
        if int(self.max_iter) < 0:
            raise ConfigError("max_iter must be nonnegative")
        if not self.tol >= 0:
            raise ConfigError("tol must be nonnegative")
        if not 0 < self.safety < 1:
            raise ConfigError("safety must lie in (0, 1)")


@dataclass
class SolverState:
    current: np.ndarray
    previous: np.ndarray
    k: int = 0
    forward_current: Optional[np.ndarray] = None
    forward_previous: Optional[np.ndarray] = None


@dataclass(frozen=True)
class IterationRecord:
    k: int
    error: float
    primal_residual: float
    dual_norm: float
    objective: float


@dataclass
class SolveResult:
    state: SolverState
    records: List[IterationRecord]
    stop_reason: str
    eta: float
    lipschitz: float
    rho: float
    kkt: float = float("nan")
    diverged: bool = False

    @property
    def converged(self):
        return self.stop_reason == "converged"

    @property
    def iterations(self):
        return self.state.k

    def primal(self, problem):
        return problem.split(self.state.current)[0]


def initial_state(op, Pi0=None, Pim1=None):
    """Build the warm-up state; only ``H(P_{-1})`` is evaluated here."""
    n = op.size
    Pi0 = np.zeros(n) if Pi0 is None else np.array(Pi0, dtype=float).reshape(-1)
    Pim1 = Pi0.copy() if Pim1 is None else np.array(Pim1, dtype=float).reshape(-1)
    return SolverState(current=Pi0, previous=Pim1, k=0,
                       forward_previous=apply_H(op, Pim1))


def _block_slices(op):
    out, start = [], 0
    for n in op.block_dims:
        out.append(slice(start, start + n))
        start += n
    return out, slice(start, start + op.dual_dim)


def frb_step(state, op, functions, eta, order=None):
    """
    One forward-reflected-backward step.

    Parameters
    ----------
    state : SolverState
    op : SplittingOperator
    functions : sequence of ProxFunction
        Block costs, used through their prox.
    eta : float
    order : sequence of int, optional
        Order in which the primal blocks are written.  Each block reads only
        the snapshot, so any permutation gives the same result.

    Returns
    -------
    SolverState
        The advanced state.  ``H`` is evaluated once per call.
    """
    forward = state.forward_current
    if forward is None:
        forward = apply_H(op, state.current)
    theta = state.current - 2.0 * eta * forward + eta * state.forward_previous
    if not np.all(np.isfinite(theta)):
        raise DivergenceError(f"non-finite forward point at k={state.k}",
                              state=state)
    primal, dual = _block_slices(op)
    nxt = np.empty_like(theta)
    for i in (range(len(primal)) if order is None else order):
        nxt[primal[i]] = functions[i].prox(theta[primal[i]], eta)
    nxt[dual] = theta[dual]
    return SolverState(current=nxt, previous=state.current, k=state.k + 1,
                       forward_current=None, forward_previous=forward)


def kkt_residual(problem, Pi, rho=0.0):
    """
    Computable optimality gap of a stacked point.

    The max of ``||sum_i A_i x_i - c||`` and, for each block, the prox
    fixed-point distance
    ``||x_i - prox_{f_i}(x_i - A_i^T y - rho A_i^T r, 1)||``.
    Zero exactly at primal-dual solutions.
    """
    xs, y = problem.split(Pi)
    r = problem.residual(xs)
    worst = float(np.linalg.norm(r))
    for A, f, x in zip(problem.matrices, problem.functions, xs):
        g = A.T @ y
        if rho:
            g = g + rho * (A.T @ r)
        worst = max(worst, float(np.linalg.norm(x - f.prox(x - g, 1.0))))
    return worst


def _record(problem, Pi, k, error_metric):
    xs, y = problem.split(Pi)
    primal = Pi[:problem.n_primal]
    error = float(np.linalg.norm(primal)) if error_metric is None \
        else float(error_metric(primal))
    objective = problem.objective(xs)
    return IterationRecord(k, error, float(np.linalg.norm(problem.residual(xs))),
                           float(np.linalg.norm(y)), float(objective))


def _keep(k, full_trace):
    return full_trace or k <= FULL_TRACE_LIMIT or k % TRACE_STRIDE == 0


def solve(problem, config=None, init=None, error_metric=None, full_trace=False,
          callback: Optional[Callable] = None):
    """
    Run the parallel primal-dual iteration on a block problem.

    Parameters
    ----------
    problem : BlockProblem
    config : SolverConfig, optional
    init : tuple of ndarray, optional
        ``(P_0, P_{-1})``; zeros when omitted.  ``P_{-1}`` may be ``None``
        to reuse ``P_0``.
    error_metric : callable, optional
        Maps the primal stack to the ``error`` column; Euclidean norm by
        default.
    full_trace : bool
        Record every iteration even past ``FULL_TRACE_LIMIT``.
    callback : callable, optional
        Called as ``callback(state)`` after each step.

    Returns
    -------
    SolveResult
        ``stop_reason`` is ``"converged"`` (kkt residual <= tol) or
        ``"max_iter"``.

    Raises
    ------
    DivergenceError
        On a non-finite iterate or an error above ``DIVERGENCE_THRESHOLD``.
    """
    config = SolverConfig() if config is None else config
    op = build_operator(problem, config.rho)
    L = lipschitz_constant(op)
    if config.eta_policy == "auto":
        eta = default_eta(L, config.safety)
    else:
        eta = float(config.eta)
        if L > 0 and eta >= 1.0 / (2.0 * L):
            warnings.warn(
                f"eta={eta:g} is outside the convergent range (0, {1/(2*L):.6g})",
                RuntimeWarning, stacklevel=2)
    logger.info("solve: rho=%g eta=%g L=%g", config.rho, eta, L)

    Pi0, Pim1 = (None, None) if init is None else init
    state = initial_state(op, Pi0, Pim1)
    functions = problem.functions
    records = [_record(problem, state.current, 0, error_metric)]

    def finish(reason, kkt):
        if records[-1].k != state.k:
            records.append(_record(problem, state.current, state.k, error_metric))
        return SolveResult(state, records, reason, eta, L, config.rho, kkt)

    kkt = kkt_residual(problem, state.current, config.rho)
    if kkt <= config.tol:
        return finish("converged", kkt)
    for _ in range(int(config.max_iter)):
        try:
            state = frb_step(state, op, functions, eta)
        except DivergenceError as exc:
            exc.records = records
            raise
        rec = _record(problem, state.current, state.k, error_metric)
        if not np.isfinite(rec.error) or rec.error > DIVERGENCE_THRESHOLD:
            records.append(rec)
            raise DivergenceError(
                f"error {rec.error:g} exceeded threshold at k={state.k}",
                state=state, records=records)
        if _keep(state.k, full_trace):
            records.append(rec)
        if callback is not None:
            callback(state)
        kkt = kkt_residual(problem, state.current, config.rho)
        if kkt <= config.tol:
            return finish("converged", kkt)
    return finish("max_iter", kkt)
