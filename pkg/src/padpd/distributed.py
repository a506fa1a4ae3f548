"""
Consensus optimization over an undirected graph.

Agents ``i = 1..m`` hold private costs ``f_i`` on a shared ``R^n`` and must
agree on a minimizer of ``sum_i f_i``.  Agreement is imposed as
``(I - W) x = 0`` with ``W = weights kron I_n``, which turns the problem into
a block problem with ``A = I - W`` and ``c = 0``.  Running the parallel
primal-dual method with ``rho = 0`` on it needs only neighbour exchanges:

    xhat_i = x_i + (eta y_i' - 2 eta y_i) - sum_j W_ij (eta y_j' - 2 eta y_j)
    x_i^+  = prox_{eta f_i}(xhat_i)
    y_i^+  = y_i + (2 eta x_i - eta x_i') - sum_j W_ij (2 eta x_j - eta x_j')

where primes mark round ``k - 1`` and ``j`` runs over ``N_i`` plus ``i``.
Since ``||I - W||_1, ||I - W||_inf <= 2`` for any admissible weights, any
``eta`` in ``(0, 1/4)`` works regardless of the graph.
"""

import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import networkx as nx
import numpy as np

from .errors import AssumptionViolation, ConfigError, DivergenceError, ProblemShapeError
from .prox import ProxFunction
from .solver import DIVERGENCE_THRESHOLD, IterationRecord


__all__ = [
    "WeightReport", "ConsensusProblem", "ConsensusResult",
    "validate_weights", "metropolis_weights", "make_graph",
    "consensus_step_interval", "solve_consensus", "GRAPH_GENERATORS",
]

_WEIGHT_TOL = 1e-10

GRAPH_GENERATORS = {
    "cycle": nx.cycle_graph,
    "path": nx.path_graph,
    "complete": nx.complete_graph,
    "star": lambda m: nx.star_graph(m - 1),
}


def make_graph(nodes, edges=None, generator=None):
    """Graph on ``range(nodes)`` from an edge list or a named generator."""
    if (edges is None) == (generator is None):
        raise ValueError("give exactly one of edges or generator")
    if generator is not None:
        try:
            G = GRAPH_GENERATORS[generator](nodes)
        except KeyError:
            raise ValueError(
                f"unknown graph generator {generator!r}; "
                f"known: {sorted(GRAPH_GENERATORS)}") from None
    else:
        G = nx.Graph()
        G.add_nodes_from(range(nodes))
        for i, j in edges:
            if not (0 <= i < nodes and 0 <= j < nodes) or i == j:
                raise ValueError(f"bad edge ({i}, {j}) for {nodes} nodes")
            G.add_edge(int(i), int(j))
    return G


@dataclass
class WeightReport:
    """Outcome of ``validate_weights``; ``violations`` is empty when valid."""

    symmetric: bool
    doubly_stochastic: bool
    nonnegative: bool
    pattern_consistent: bool
    algebraic_connectivity: float
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def __bool__(self):
        return self.ok


def validate_weights(W, graph=None):
    """
    Check a consensus weight matrix against the standing assumptions.

    Parameters
    ----------
    W : array_like
        Square ``m x m`` weight matrix.
    graph : networkx.Graph, optional
        Communication graph on nodes ``0..m-1``.  When given, nonzero
        off-diagonal weights must sit on edges.

    Returns
    -------
    WeightReport
        Each failed check adds a line naming the violated assumption.
    """
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ProblemShapeError(f"weight matrix must be square, got {W.shape}")
    m = W.shape[0]
    violations = []

    symmetric = bool(np.max(np.abs(W - W.T), initial=0.0) <= _WEIGHT_TOL)
    if not symmetric:
        violations.append("symmetry: weight matrix is not symmetric")
    rows_ok = np.all(np.abs(W.sum(axis=1) - 1.0) <= _WEIGHT_TOL)
    cols_ok = np.all(np.abs(W.sum(axis=0) - 1.0) <= _WEIGHT_TOL)
    stochastic = bool(rows_ok and cols_ok)
    if not stochastic:
        violations.append("double stochasticity: rows/columns do not sum to 1")
    nonneg = bool(np.all(W >= -_WEIGHT_TOL))
    if not nonneg:
        violations.append("nonnegativity: negative weights")

    pattern = True
    if graph is not None:
        if set(graph.nodes) != set(range(m)):
            raise ProblemShapeError(
                f"graph nodes must be 0..{m - 1} to match the weight matrix")
        for i in range(m):
            for j in range(m):
                if i != j and W[i, j] != 0 and not graph.has_edge(i, j):
                    pattern = False
        if not pattern:
            violations.append(
                "graph pattern: nonzero weight between non-neighbours")

    eig = np.linalg.eigvalsh(np.eye(m) - 0.5 * (W + W.T))
    lam2 = float(eig[1]) if m > 1 else float("inf")
    if m > 1 and not lam2 > _WEIGHT_TOL:
        violations.append(
            f"connectivity: graph not connected (lambda_2(I - W) = {lam2:.3g})")
    elif graph is not None and m > 1 and not nx.is_connected(graph):
        violations.append("connectivity: communication graph is not connected")
    return WeightReport(symmetric, stochastic, nonneg, pattern, lam2, violations)


def metropolis_weights(graph):
    """
    Metropolis-Hastings weights ``1 / (1 + max(deg_i, deg_j))`` on edges,
    with the diagonal filling each row up to 1.
    """
    m = graph.number_of_nodes()
    deg = dict(graph.degree())
    W = np.zeros((m, m))
    for i, j in graph.edges():
        if i == j:
            continue
        w = 1.0 / (1.0 + max(deg[i], deg[j]))
        W[i, j] = W[j, i] = w
    W[np.diag_indices(m)] = 1.0 - W.sum(axis=1)
    return W


def consensus_step_interval(problem=None):
    """Open interval of admissible step sizes; the same for every graph."""
    return (0.0, 0.25)


class ConsensusProblem:
    """
    ``min sum_i f_i(s)`` over ``s`` in ``R^n``, agents coupled by ``weights``.

    Parameters
    ----------
    weights : array_like
        ``m x m`` weight matrix.
    costs : sequence of ProxFunction
        One cost per agent, each of dimension ``local_dim``.
    local_dim : int
    graph : networkx.Graph, optional
        Communication graph; inferred from the weight pattern when omitted.
    """

    def __init__(self, weights, costs, local_dim=None, graph=None, name=None):
        W = np.array(weights, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ProblemShapeError(f"weight matrix must be square, got {W.shape}")
        costs = list(costs)
        m = W.shape[0]
        if len(costs) != m:
            raise ProblemShapeError(f"{m} agents but {len(costs)} costs")
        if local_dim is None:
            local_dim = costs[0].dimension
        for i, f in enumerate(costs):
            if not isinstance(f, ProxFunction) or f.dimension != local_dim:
                raise ProblemShapeError(
                    f"agent {i}: cost must be a ProxFunction of dimension {local_dim}")
        if graph is None:
            graph = nx.Graph()
            graph.add_nodes_from(range(m))
            graph.add_edges_from((i, j) for i in range(m) for j in range(i + 1, m)
                                 if W[i, j] != 0 or W[j, i] != 0)
        W.setflags(write=False)
        self.weights = W
        self.costs = tuple(costs)
        self.local_dim = int(local_dim)
        self.graph = graph
        self.name = name

    @property
    def m(self):
        return self.weights.shape[0]

    def neighbors(self, i):
        """``N_i`` plus ``i`` itself, sorted."""
        return sorted(set(self.graph.neighbors(i)) | {i})

    def validate(self):
        return validate_weights(self.weights, self.graph)

    def lifted_matrix(self):
        """``I_{mn} - kron(weights, I_n)``."""
        n = self.local_dim
        return np.eye(self.m * n) - np.kron(self.weights, np.eye(n))

    def as_block_problem(self):
        """The same problem as a single-block ``(I - W) x = 0`` program."""
        from .operators import BlockProblem
        return BlockProblem([self.lifted_matrix()], [_StackedCost(self.costs)],
                            np.zeros(self.m * self.local_dim), name=self.name)

    def objective(self, s):
        return float(sum(f.evaluate(s) for f in self.costs))

    def __eq__(self, other):
        if not isinstance(other, ConsensusProblem):
            return NotImplemented
        return (np.array_equal(self.weights, other.weights)
                and self.local_dim == other.local_dim
                and all(f == g for f, g in zip(self.costs, other.costs))
                and set(map(frozenset, self.graph.edges()))
                == set(map(frozenset, other.graph.edges())))

    __hash__ = None

    def __repr__(self):
        return (f"ConsensusProblem(name={self.name!r}, m={self.m}, "
                f"local_dim={self.local_dim})")


class _StackedCost(ProxFunction):
    """Separable sum of per-agent costs over the stacked agent variables."""

    tag = "stacked"

    def __init__(self, costs):
        self.costs = tuple(costs)
        self.n = costs[0].dimension
        super().__init__(self.n * len(costs))

    def evaluate(self, u):
        u = np.asarray(u).reshape(len(self.costs), self.n)
        return sum(f.evaluate(ui) for f, ui in zip(self.costs, u))

    def prox(self, x, eta):
        x = np.asarray(x, dtype=float).reshape(len(self.costs), self.n)
        return np.concatenate([f.prox(xi, eta) for f, xi in zip(self.costs, x)])


@dataclass
class ConsensusResult:
    x: np.ndarray
    y: np.ndarray
    records: List[IterationRecord]
    stop_reason: str
    eta: float
    history: Optional[np.ndarray] = None
    dual_history: Optional[np.ndarray] = None

    @property
    def converged(self):
        return self.stop_reason == "converged"

    @property
    def iterations(self):
        return self.records[-1].k if self.records else 0


class _Snapshot:
    """Round-``k`` and round-``k-1`` values; reads can be logged."""

    def __init__(self, x, x_prev, y, y_prev, k, log=None):
        self.x, self.x_prev, self.y, self.y_prev = x, x_prev, y, y_prev
        self.k = k
        self.log = log

    def reader(self, agent):
        def read(j):
            if self.log is not None:
                self.log.append((self.k, agent, j))
            return self.x[j], self.x_prev[j], self.y[j], self.y_prev[j]
        return read


def agent_update(i, read, neighbors, weight_row, eta, cost):
    """
    One agent's round update from values it can see.

    ``read(j)`` returns ``(x_j, x_j', y_j, y_j')`` for round ``k`` and
    ``k - 1``; only ``j`` in ``neighbors`` is ever requested.
    """
    x_i, x_ip, y_i, y_ip = read(i)
    mix_y = np.zeros_like(y_i)
    mix_x = np.zeros_like(x_i)
    for j in neighbors:
        x_j, x_jp, y_j, y_jp = (x_i, x_ip, y_i, y_ip) if j == i else read(j)
        w = weight_row[j]
        mix_y += w * (eta * y_jp - 2 * eta * y_j)
        mix_x += w * (2 * eta * x_j - eta * x_jp)
    xhat = x_i + (eta * y_ip - 2 * eta * y_i) - mix_y
    x_new = cost.prox(xhat, eta)
    y_new = y_i + (2 * eta * x_i - eta * x_ip) - mix_x
    return x_new, y_new


def _compact_round(L, x, x_prev, y, y_prev, eta, costs):
    xhat = x - 2 * eta * (L @ y) + eta * (L @ y_prev)
    m, n = len(costs), x.size // len(costs)
    xhat = xhat.reshape(m, n)
    x_new = np.concatenate([f.prox(xhat[i], eta) for i, f in enumerate(costs)])
    y_new = y + 2 * eta * (L @ x) - eta * (L @ x_prev)
    return x_new, y_new


def _consensus_kkt(problem, L, x, y):
    """Disagreement norm and per-agent prox fixed-point distance."""
    m, n = problem.m, problem.local_dim
    worst = float(np.linalg.norm(L @ x.reshape(-1)))
    g = (L @ y.reshape(-1)).reshape(m, n)
    for i, f in enumerate(problem.costs):
        worst = max(worst, float(np.linalg.norm(x[i] - f.prox(x[i] - g[i], 1.0))))
    return worst


def solve_consensus(problem, eta=0.2, max_iter=10_000, tol=1e-10, init=None,
                    mode="local", access_log=None, keep_history=False,
                    validate=True):
    """
    Synchronous distributed primal-dual iteration.

    Parameters
    ----------
    problem : ConsensusProblem
    eta : float
        Step size; any value in ``(0, 1/4)`` is admissible.
    max_iter : int
    tol : float
        Stop when the disagreement and per-agent prox residuals drop below it.
    init : tuple, optional
        ``(x_0, x_{-1}, y_0, y_{-1})`` as ``m x n`` arrays; zeros by default.
        Entries may be ``None`` (the round-``-1`` values default to round 0).
    mode : {"local", "compact"}
        ``"local"`` runs the per-agent updates with neighbour reads only;
        ``"compact"`` runs the stacked matrix form.  Both produce the same
        iterates up to rounding.
    access_log : list, optional
        In local mode, receives ``(k, reader, j)`` for every value read.
    keep_history : bool
        Keep the ``(K + 1, m, n)`` primal and dual iterates.

    Returns
    -------
    ConsensusResult
    """
    if validate:
        report = problem.validate()
        if not report.ok:
            raise AssumptionViolation("; ".join(report.violations),
                                      report.violations)
    lo, hi = consensus_step_interval(problem)
    if not eta > 0:
        raise ConfigError(f"step size must be positive, got {eta!r}")
    if not lo < eta < hi:
        warnings.warn(f"eta={eta:g} is outside the admissible interval "
                      f"({lo:g}, {hi:g})", RuntimeWarning, stacklevel=2)
    if mode not in ("local", "compact"):
        raise ConfigError(f"unknown mode {mode!r}")

    m, n = problem.m, problem.local_dim
    W = problem.weights
    L = problem.lifted_matrix()

    def _arr(v, default):
        return default.copy() if v is None else np.array(v, dtype=float).reshape(m, n)

    zeros = np.zeros((m, n))
    x0, xm1, y0, ym1 = (None,) * 4 if init is None else init
    x = _arr(x0, zeros)
    x_prev = _arr(xm1, x)
    y = _arr(y0, zeros)
    y_prev = _arr(ym1, y)

    neighbors = [problem.neighbors(i) for i in range(m)]
    hist = [x.copy()] if keep_history else None
    dhist = [y.copy()] if keep_history else None

    def record(k, x, x_prev, y):
        step = float(np.linalg.norm(x - x_prev))
        return IterationRecord(k, step, float(np.linalg.norm(L @ x.reshape(-1))),
                               float(np.linalg.norm(y)),
                               float(sum(f.evaluate(x[i])
                                         for i, f in enumerate(problem.costs))))

    records = [record(0, x, x_prev, y)]
    stop = "max_iter"
    if _consensus_kkt(problem, L, x, y) <= tol:
        stop = "converged"
    else:
        for k in range(max_iter):
            if mode == "local":
                snap = _Snapshot(x, x_prev, y, y_prev, k, access_log)
                x_new, y_new = np.empty_like(x), np.empty_like(y)
                for i in range(m):
                    x_new[i], y_new[i] = agent_update(
                        i, snap.reader(i), neighbors[i], W[i], eta,
                        problem.costs[i])
            else:
                xv, yv = _compact_round(L, x.reshape(-1), x_prev.reshape(-1),
                                        y.reshape(-1), y_prev.reshape(-1),
                                        eta, problem.costs)
                x_new, y_new = xv.reshape(m, n), yv.reshape(m, n)
            x_prev, x, y_prev, y = x, x_new, y, y_new
            rec = record(k + 1, x, x_prev, y)
            records.append(rec)
            if keep_history:
                hist.append(x.copy())
                dhist.append(y.copy())
            if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))) \
                    or np.linalg.norm(x) > DIVERGENCE_THRESHOLD:
                raise DivergenceError(f"consensus iterate diverged at k={k + 1}",
                                      records=records)
            if _consensus_kkt(problem, L, x, y) <= tol:
                stop = "converged"
                break
    return ConsensusResult(x, y, records, stop, eta,
                           np.array(hist) if keep_history else None,
                           np.array(dhist) if keep_history else None)
