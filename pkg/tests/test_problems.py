import json

import numpy as np
import pytest

from padpd import (ConsensusProblem, GeneratorError, ProblemFileError,
                   ProblemShapeError, SolverConfig, example1, get_builtin,
                   kkt_residual, load_problem, random_qp, save_problem, solve)
from padpd.problems import (BUILTINS, dumps_problem, loads_problem,
                            shipped_problem_path)

from reference import qp_kkt_solution


# --- example 1 --------------------------------------------------------------

def test_example1_data():
    pb = example1()
    assert pb.q == 3 and pb.block_dims == (2, 1, 1) and pb.p == 3
    np.testing.assert_array_equal(pb.constraint_matrix,
                                  [[1, 1, 1, 1], [1, 1, 1, 2], [1, 1, 2, 2]])
    np.testing.assert_array_equal(pb.c, 0.0)
    assert pb.objective([np.array([2.0, 5.0]), [1.0], [1.0]]) == 2.0
    assert kkt_residual(pb, np.zeros(7), 1.0) == 0.0


def test_example1_row_norm():
    # largest row sum is the third row, 1 + 1 + 2 + 2
    assert np.abs(example1().constraint_matrix).sum(axis=1).max() == 6.0


# --- random QPs -------------------------------------------------------------

def test_random_qp_known_solution():
    pb, sol = random_qp(2, 3, [2, 2], 7)
    assert kkt_residual(pb, sol) < 1e-10
    assert kkt_residual(pb, sol, rho=2.0) < 1e-10
    x, y = qp_kkt_solution(pb.matrices, [f.curvature for f in pb.functions],
                           [f.linear for f in pb.functions], pb.c)
    np.testing.assert_allclose(np.concatenate([x, y]), sol, atol=1e-10)


def test_random_qp_scalar_case():
    pb, sol = random_qp(1, 1, [1], 0)
    a, b = pb.functions[0].curvature[0], pb.functions[0].linear[0]
    A, c = pb.matrices[0][0, 0], pb.c[0]
    # with one scalar unknown the constraint pins x = c / A, then a x + b + A y = 0
    x = c / A
    y = -(a * x + b) / A
    np.testing.assert_allclose(sol, [x, y], atol=1e-14)


def test_random_qp_three_blocks_solve():
    pb, sol = random_qp(3, 4, [2, 1, 2], 11)
    res = solve(pb, SolverConfig(rho=1.0, max_iter=200_000, tol=1e-10))
    assert np.max(np.abs(res.state.current[:pb.n_primal] - sol[:pb.n_primal])) <= 1e-6


def test_random_qp_deterministic_and_on_grid():
    a, sa = random_qp(3, 3, 2, 42)
    b, sb = random_qp(3, 3, 2, 42)
    assert a == b and np.array_equal(sa, sb)
    for A in a.matrices:
        assert np.array_equal(A * 4, np.round(A * 4))
    assert random_qp(3, 3, 2, 43)[0] != a


def test_random_qp_errors():
    with pytest.raises(GeneratorError):
        random_qp(1, 3, [2], 0)
    with pytest.raises(ProblemShapeError):
        random_qp(2, 1, [2], 0)
    with pytest.raises(GeneratorError):
        random_qp(2, 2, 1, 0, min_singular=100.0, max_tries=3)


# --- built-ins --------------------------------------------------------------

def test_builtin_registry():
    assert {"example1", "consensus-ls-5cycle"} <= set(BUILTINS)
    assert get_builtin("example1") == example1()
    cons = get_builtin("consensus-ls-5cycle")
    assert isinstance(cons, ConsensusProblem) and cons.m == 5
    qp = get_builtin("qp-3x2", seed=5)
    assert qp.q == 3 and qp.p == 2
    for bad in ("nope", "qp-axb"):
        with pytest.raises(KeyError):
            get_builtin(bad)


# --- files ------------------------------------------------------------------

def test_shipped_files_equal_builtins():
    assert load_problem(shipped_problem_path("example1")) == example1()
    assert load_problem(shipped_problem_path("consensus-ls-5cycle")) \
        == get_builtin("consensus-ls-5cycle")


@pytest.mark.parametrize("name", sorted(BUILTINS) + ["qp-2x3"])
def test_round_trip(name, tmp_path):
    original = get_builtin(name, seed=3)
    path = tmp_path / "p.json"
    save_problem(original, path)
    loaded = load_problem(path)
    assert loaded == original
    assert dumps_problem(loaded) == dumps_problem(original)
    assert json.loads(dumps_problem(original))["schema"] == 1


def _doc():
    return json.loads(dumps_problem(example1()))


def test_mismatched_rows_is_shape_error():
    doc = _doc()
    doc["blocks"][1]["A"] = [[1.0], [1.0]]
    with pytest.raises(ProblemFileError, match="problem-shape error"):
        loads_problem(json.dumps(doc, indent=2))


def test_dimension_mismatch_is_shape_error():
    doc = _doc()
    doc["blocks"][0]["function"]["curvature"] = [1.0, 0.0, 0.0]
    with pytest.raises(ProblemFileError, match="curvature has length 3"):
        loads_problem(json.dumps(doc))


def test_disconnected_consensus_graph():
    doc = {"schema": 1, "kind": "consensus", "local_dim": 1,
           "graph": {"nodes": 4, "edges": [[0, 1], [2, 3]]},
           "weights": "metropolis",
           "costs": [{"tag": "quadratic", "curvature": 1}] * 4}
    with pytest.raises(ProblemFileError, match="assumption violation: connectivity"):
        loads_problem(json.dumps(doc, indent=2))


def test_syntax_error_has_line():
    text = '{\n  "schema": 1,\n  "kind": "block",\n  "c": [0, 0,\n}\n'
    with pytest.raises(ProblemFileError) as info:
        loads_problem(text, path="bad.json")
    assert info.value.line == 5
    assert str(info.value).startswith("bad.json:5:")


def test_validation_error_anchored_to_key():
    doc = _doc()
    doc["blocks"][2]["function"] = {"tag": "huber"}
    text = json.dumps(doc, indent=2)
    with pytest.raises(ProblemFileError, match="unknown function tag") as info:
        loads_problem(text)
    assert info.value.line == text.splitlines().index('      "function": {') + 1


@pytest.mark.parametrize("mutate, message", [
    (lambda d: d.update(schema=2), "unsupported schema"),
    (lambda d: d.pop("schema"), "unsupported schema"),
    (lambda d: d.update(kind="graph"), "kind must be"),
    (lambda d: d.pop("c"), "missing field 'c'"),
    (lambda d: d["blocks"][0].update(A=[[1, 1], [1], [1, 1]]), "expected a 2-d array|ragged"),
    (lambda d: d["blocks"][0]["function"].update(curvature=[-1, 0]), "nonnegative"),
])
def test_invalid_documents(mutate, message):
    doc = _doc()
    mutate(doc)
    with pytest.raises(ProblemFileError, match=message):
        loads_problem(json.dumps(doc))


def test_missing_file(tmp_path):
    with pytest.raises(ProblemFileError, match="cannot read"):
        load_problem(tmp_path / "absent.json")


def test_decimal_literals_are_read_exactly():
    doc = _doc()
    doc["c"] = [0.1, 0.2, 0.3]
    text = json.dumps(doc).replace("0.1,", "0.1000000000000000000000001,")
    pb = loads_problem(text)
    assert pb.c[0] == 0.1
