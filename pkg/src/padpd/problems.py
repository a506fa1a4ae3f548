"""
Built-in problem instances and the problem-file format.

Problem files are JSON documents (``"schema": 1``).  Numbers are read as
decimals and converted once to the nearest double, so a file means the same
problem on every platform.  Two kinds exist::

    {"schema": 1, "kind": "block", "name": "...",
     "c": [...],
     "blocks": [{"A": [[...], ...], "function": {"tag": "quadratic",
                                                 "curvature": [...]}}, ...]}

    {"schema": 1, "kind": "consensus", "name": "...", "local_dim": n,
     "graph": {"nodes": m, "generator": "cycle"}        # or "edges": [[i, j], ...]
     "weights": "metropolis",                           # or an m x m array
     "costs": [{"tag": ..., ...}, ...]}

Function entries carry a registered tag (``zero``, ``quadratic``, ``l1``)
plus that function's parameters.  See ``docs/problem-file.md``.
"""

import json
import re
from decimal import Decimal
from importlib import resources
from pathlib import Path

import numpy as np

from .distributed import ConsensusProblem, make_graph, metropolis_weights
from .errors import GeneratorError, InvalidFunctionError, ProblemFileError, ProblemShapeError
from .operators import BlockProblem
from .prox import QuadraticFunction, ZeroFunction, make_function


__all__ = [
    "SCHEMA_VERSION", "example1", "random_qp", "consensus_least_squares",
    "BUILTINS", "get_builtin", "load_problem", "loads_problem",
    "dumps_problem", "save_problem", "problem_to_dict", "shipped_problem_path",
]

SCHEMA_VERSION = 1


def example1():
    """
    Three-block problem on which direct multi-block ADMM diverges.

    ``min 0.5 x1^2`` subject to ``A1 (x1, x2) + A2 x3 + A3 x4 = 0`` with
    ``A1 = ones(3, 2)``, ``A2 = (1, 1, 2)``, ``A3 = (1, 2, 2)``.  The unique
    solution is the origin.
    """
    A1 = np.ones((3, 2))
    A2 = np.array([[1.0], [1.0], [2.0]])
    A3 = np.array([[1.0], [2.0], [2.0]])
    functions = [QuadraticFunction(2, curvature=[1.0, 0.0]),
                 ZeroFunction(1), ZeroFunction(1)]
    return BlockProblem([A1, A2, A3], functions, np.zeros(3), name="example1")


def _grid(rng, size, lo, hi, step=0.25):
    """Draw from the decimal grid ``lo, lo + step, ..., hi``."""
    k = int(round((hi - lo) / step))
    return lo + step * rng.integers(0, k + 1, size=size)


def random_qp(q, p, dims, seed, min_singular=0.25, max_tries=100):
    """
    Random strongly convex QP with a known primal-dual solution.

    Every entry is a multiple of 1/4, so the data are exact both as decimals
    and as doubles.  Block ``i`` has cost
    ``0.5 sum(a_i * u^2) + b_i . u`` with ``a_i`` in ``[0.5, 2]``; ``c`` and
    ``b_i`` are chosen so that the drawn ``(x*, y*)`` is a KKT point.

    Parameters
    ----------
    q, p : int
        Number of blocks and constraint rows.
    dims : int or sequence of int
        Block sizes ``n_i``.
    seed : int
    min_singular : float
        Redraw ``[A_1, ..., A_q]`` until its smallest singular value is at
        least this, keeping the dual solution unique and the iteration
        well-conditioned.

    Returns
    -------
    problem : BlockProblem
    solution : ndarray
        The stacked KKT point ``(x_1*, ..., x_q*, y*)``.
    """
    dims = [int(dims)] * q if np.isscalar(dims) else [int(n) for n in dims]
    if q < 1 or p < 1 or len(dims) != q or min(dims) < 1:
        raise ProblemShapeError(f"bad random_qp dimensions q={q}, p={p}, dims={dims}")
    if p > sum(dims):
        raise GeneratorError(
            f"p={p} rows exceed {sum(dims)} unknowns; constraints would be "
            "generically infeasible")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        mats = [_grid(rng, (p, n), -2.0, 2.0) for n in dims]
        if np.linalg.svd(np.hstack(mats), compute_uv=False)[-1] >= min_singular:
            break
    else:
        raise GeneratorError(
            f"no well-conditioned constraint matrix in {max_tries} draws")
    curv = [_grid(rng, n, 0.5, 2.0) for n in dims]
    xstar = [_grid(rng, n, -2.0, 2.0) for n in dims]
    ystar = _grid(rng, p, -2.0, 2.0)
    c = sum(A @ x for A, x in zip(mats, xstar))
    functions = [QuadraticFunction(n, a, -a * x - A.T @ ystar)
                 for n, a, x, A in zip(dims, curv, xstar, mats)]
    problem = BlockProblem(mats, functions, c, name=f"random-qp-{seed}")
    return problem, np.concatenate(xstar + [ystar])


def consensus_least_squares(targets, generator="cycle", edges=None, name=None):
    """
    Consensus least squares: agent ``i`` holds ``0.5 ||s - b_i||^2``.

    The minimizer of the sum is the mean of the targets.
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    if targets.shape[0] == 1 and targets.shape[1] > 1:
        targets = targets.T
    m, n = targets.shape
    if edges is not None:
        graph = make_graph(m, edges=edges)
    else:
        graph = make_graph(m, generator=generator)
    costs = [QuadraticFunction(n, 1.0, -b, 0.5 * float(b @ b)) for b in targets]
    return ConsensusProblem(metropolis_weights(graph), costs, n, graph, name=name)


_LS_TARGETS = [[1.0, -2.0], [3.0, 0.5], [-1.0, 4.0], [2.0, 2.0], [0.25, -1.0]]

BUILTINS = {
    "example1": example1,
    "consensus-ls-5cycle": lambda: consensus_least_squares(
        _LS_TARGETS, "cycle", name="consensus-ls-5cycle"),
    "consensus-ls-complete5": lambda: consensus_least_squares(
        _LS_TARGETS, "complete", name="consensus-ls-complete5"),
}


def get_builtin(name, seed=0):
    """Look up a built-in problem; ``qp-<q>x<p>`` names build seeded QPs."""
    if name in BUILTINS:
        return BUILTINS[name]()
    if name.startswith("qp-"):
        try:
            q, p = (int(v) for v in name[3:].split("x"))
        except ValueError:
            raise KeyError(name) from None
        problem, _ = random_qp(q, p, 2, seed)
        problem.name = name
        return problem
    raise KeyError(name)


# ---------------------------------------------------------------------------
# file format

def shipped_problem_path(name):
    """Path of a problem file bundled with the package."""
    return resources.files("padpd") / "data" / f"{name}.json"


def _tolist(a):
    return np.asarray(a, dtype=float).tolist()


def _function_to_dict(f):
    out = {"tag": f.tag}
    for k, v in f.params().items():
        out[k] = _tolist(v) if np.ndim(v) else float(v)
    return out


def problem_to_dict(problem):
    """Serializable form of a built or loaded problem."""
    if isinstance(problem, BlockProblem):
        doc = {"schema": SCHEMA_VERSION, "kind": "block"}
        if problem.name:
            doc["name"] = problem.name
        doc["c"] = _tolist(problem.c)
        doc["blocks"] = [{"A": _tolist(A), "function": _function_to_dict(f)}
                         for A, f in zip(problem.matrices, problem.functions)]
        return doc
    if isinstance(problem, ConsensusProblem):
        doc = {"schema": SCHEMA_VERSION, "kind": "consensus"}
        if problem.name:
            doc["name"] = problem.name
        doc["local_dim"] = problem.local_dim
        doc["graph"] = {"nodes": problem.m,
                        "edges": sorted(sorted(map(int, e)) for e in problem.graph.edges())}
        doc["weights"] = _tolist(problem.weights)
        doc["costs"] = [_function_to_dict(f) for f in problem.costs]
        return doc
    raise TypeError(f"cannot serialize {type(problem).__name__}")


_FLAT_ROW = re.compile(r"\[\s*([-+0-9.eE]+(?:,\s*[-+0-9.eE]+)*)\s*\]")


def dumps_problem(problem):
    text = json.dumps(problem_to_dict(problem), indent=2)
    # numeric rows on one line each
    text = _FLAT_ROW.sub(lambda m: "[" + ", ".join(m.group(1).split()).replace(",,", ",") + "]", text)
    return text + "\n"


def save_problem(problem, path):
    Path(path).write_text(dumps_problem(problem))


class _Reader:
    """Walks a parsed document, turning failures into anchored errors."""

    def __init__(self, text, path):
        self.text = text
        self.path = path

    def line_of(self, key):
        """First line mentioning ``"key"``; a best-effort anchor."""
        needle = f'"{key}"'
        for n, line in enumerate(self.text.splitlines(), 1):
            if needle in line:
                return n
        return None

    def fail(self, message, key=None):
        raise ProblemFileError(message, line=self.line_of(key) if key else None,
                               path=self.path)

    def require(self, doc, key, where):
        if key not in doc:
            self.fail(f"{where}: missing field {key!r}")
        return doc[key]

    def array(self, value, ndim, where, key):
        try:
            a = np.array([[float(v) for v in row] for row in value], dtype=float) \
                if ndim == 2 else np.array([float(v) for v in value], dtype=float)
        except (TypeError, ValueError):
            self.fail(f"{where}: expected a {ndim}-d array of numbers", key)
        if ndim == 2 and (a.ndim != 2 or len({len(r) for r in value}) > 1):
            self.fail(f"{where}: ragged matrix", key)
        if not np.all(np.isfinite(a)):
            self.fail(f"{where}: non-finite entries", key)
        return a

    def function(self, spec, dim, where, key):
        if not isinstance(spec, dict) or "tag" not in spec:
            self.fail(f"{where}: function needs a 'tag'", key)
        params = {}
        for k, v in spec.items():
            if k == "tag":
                continue
            if isinstance(v, list):
                params[k] = self.array(v, 1, f"{where}.{k}", k)
            else:
                try:
                    params[k] = float(v)
                except (TypeError, ValueError):
                    self.fail(f"{where}.{k}: expected a number", k)
        try:
            return make_function(spec["tag"], dim, **params)
        except TypeError as exc:
            self.fail(f"{where}: bad parameters for {spec['tag']!r}: {exc}", key)
        except InvalidFunctionError as exc:
            self.fail(f"{where}: {exc}", key)


def _parse_block(doc, rd):
    c = rd.array(rd.require(doc, "c", "problem"), 1, "c", "c")
    blocks = rd.require(doc, "blocks", "problem")
    if not isinstance(blocks, list) or not blocks:
        rd.fail("blocks: expected a non-empty list", "blocks")
    mats, funcs = [], []
    for i, blk in enumerate(blocks):
        where = f"blocks[{i}]"
        A = rd.array(rd.require(blk, "A", where), 2, f"{where}.A", "A")
        if A.shape[0] != c.size:
            rd.fail(f"{where}.A: problem-shape error, {A.shape[0]} rows but "
                    f"c has length {c.size}", "A")
        mats.append(A)
        funcs.append(rd.function(rd.require(blk, "function", where), A.shape[1],
                                 f"{where}.function", "function"))
    try:
        return BlockProblem(mats, funcs, c, name=doc.get("name"))
    except ProblemShapeError as exc:
        rd.fail(f"problem-shape error: {exc}", "blocks")


def _parse_consensus(doc, rd):
    n = int(rd.require(doc, "local_dim", "problem"))
    graph_doc = rd.require(doc, "graph", "problem")
    nodes = int(rd.require(graph_doc, "nodes", "graph"))
    try:
        if "generator" in graph_doc:
            graph = make_graph(nodes, generator=graph_doc["generator"])
        else:
            edges = [(int(i), int(j)) for i, j in rd.require(graph_doc, "edges", "graph")]
            graph = make_graph(nodes, edges=edges)
    except ValueError as exc:
        rd.fail(f"graph: {exc}", "graph")
    weights = doc.get("weights", "metropolis")
    if weights == "metropolis":
        W = metropolis_weights(graph)
    else:
        W = rd.array(weights, 2, "weights", "weights")
        if W.shape != (nodes, nodes):
            rd.fail(f"weights: problem-shape error, expected {nodes}x{nodes}",
                    "weights")
    costs_doc = rd.require(doc, "costs", "problem")
    if len(costs_doc) != nodes:
        rd.fail(f"costs: {len(costs_doc)} entries for {nodes} agents", "costs")
    costs = [rd.function(f, n, f"costs[{i}]", "costs") for i, f in enumerate(costs_doc)]
    problem = ConsensusProblem(W, costs, n, graph, name=doc.get("name"))
    report = problem.validate()
    if not report.ok:
        rd.fail("assumption violation: " + "; ".join(report.violations),
                "weights" if "weights" in doc else "graph")
    return problem


def loads_problem(text, path=None):
    """Parse a problem document from a string."""
    try:
        doc = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"parse error: {exc.msg}", line=exc.lineno,
                               path=path) from None
    rd = _Reader(text, path)
    if not isinstance(doc, dict):
        rd.fail("top level must be an object")
    if doc.get("schema") != SCHEMA_VERSION:
        rd.fail(f"unsupported schema {doc.get('schema')!r}; expected "
                f"{SCHEMA_VERSION}", "schema")
    kind = doc.get("kind")
    if kind == "block":
        return _parse_block(doc, rd)
    if kind == "consensus":
        return _parse_consensus(doc, rd)
    rd.fail(f"kind must be 'block' or 'consensus', got {kind!r}", "kind")


def load_problem(path):
    """Load and validate a problem file."""
    path = Path(path) if not hasattr(path, "read_text") else path
    try:
        text = path.read_text()
    except OSError as exc:
        raise ProblemFileError(f"cannot read file: {exc}", path=path) from None
    return loads_problem(text, path=str(path))
