"""
Command-line front end.

    padpd --problem example1 --algorithm padpd --rho 1 --eta 0.02
    padpd --problem example1 --algorithm admm-direct --rho 1
    padpd --problem example1 --compare --rho 1 --max-iter 10000

A run writes a CSV trace (``k,error,primal_residual,dual_norm,objective``)
and prints ``key=value`` summary lines.  Exit status: 0 converged, 1 usage or
file error, 2 iteration budget exhausted, 3 diverged.
"""

import argparse
import csv
import io
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .baseline import AdmmConfig, admm_direct_multiblock
from .distributed import ConsensusProblem, consensus_step_interval, solve_consensus
from .errors import DivergenceError, PadpdError
from .operators import BlockProblem
from .problems import get_builtin, load_problem
from .solver import (FULL_TRACE_LIMIT, TRACE_STRIDE, SolverConfig, default_eta,
                     kkt_residual, solve)


ALGORITHMS = ("padpd", "padpd-rho0", "admm-direct", "consensus")
TRACE_HEADER = ("k", "error", "primal_residual", "dual_norm", "objective")
TRACE_DIR_ENV = "PADPD_TRACE_DIR"

EXIT_CONVERGED, EXIT_ERROR, EXIT_MAX_ITER, EXIT_DIVERGED = 0, 1, 2, 3


@dataclass
class RunSpec:
    problem: str
    algorithm: str = "padpd"
    rho: Optional[float] = None
    eta: Optional[float] = None
    max_iter: int = 50_000
    tol: float = 1e-8
    trace_path: Optional[str] = None
    seed: int = 0
    full_trace: bool = False
    zero_init: bool = False


class UsageError(Exception):
    pass


def resolve_problem(name, seed=0):
    path = Path(name)
    if path.suffix == ".json" or path.exists():
        return load_problem(path)
    try:
        return get_builtin(name, seed)
    except KeyError:
        raise UsageError(f"no problem file or built-in named {name!r}") from None


def _trace_file(spec, default_name):
    base = Path(os.environ.get(TRACE_DIR_ENV, "."))
    target = Path(spec.trace_path) if spec.trace_path else Path(default_name)
    if not target.is_absolute():
        target = base / target
    target.parent.mkdir(parents=True, exist_ok=True)
    return target


def _keep(k, full):
    return full or k <= FULL_TRACE_LIMIT or k % TRACE_STRIDE == 0


def write_trace(records, path, full_trace=False):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for r in records:
        if _keep(r.k, full_trace):
            w.writerow([r.k, repr(r.error), repr(r.primal_residual),
                        repr(r.dual_norm), repr(r.objective)])
    Path(path).write_text(buf.getvalue())


def _random_init(size, seed):
    return np.random.default_rng(seed).standard_normal(size)


def _rho_for(spec):
    if spec.algorithm == "padpd-rho0":
        if spec.rho not in (None, 0.0):
            raise UsageError("padpd-rho0 runs with rho = 0; drop --rho")
        return 0.0
    rho = 1.0 if spec.rho is None else float(spec.rho)
    if spec.algorithm == "admm-direct" and not rho > 0:
        raise UsageError("admm-direct needs rho > 0")
    return rho


def _run_block(problem, spec, out):
    rho = _rho_for(spec)
    init = None if spec.zero_init else _random_init(problem.size, spec.seed)
    summary = {"rho": rho}
    if spec.algorithm == "admm-direct":
        res = admm_direct_multiblock(
            problem, AdmmConfig(rho=rho, max_iter=spec.max_iter, tol=spec.tol),
            init=init)
        state = problem.stack(res.xs, res.y)
        summary.update(iterations=res.iterations, stop_reason=res.stop_reason,
                       diverged=res.diverged,
                       final_residual=kkt_residual(problem, state))
        return res.records, summary
    config = SolverConfig(eta=spec.eta, rho=rho, max_iter=spec.max_iter,
                          tol=spec.tol)
    try:
        res = solve(problem, config, init=None if init is None else (init, None),
                    full_trace=spec.full_trace)
    except DivergenceError as exc:
        summary.update(iterations=exc.state.k if exc.state else "", diverged=True,
                       stop_reason="diverged", final_residual=float("nan"))
        return exc.records, summary
    if spec.eta is None:
        print(f"L={res.lipschitz!r}", file=out)
        print(f"eta_interval=(0, {1 / (2 * res.lipschitz)!r})", file=out)
    summary.update(iterations=res.iterations, stop_reason=res.stop_reason,
                   diverged=False, final_residual=res.kkt, eta=res.eta,
                   L=res.lipschitz)
    return res.records, summary


def _run_consensus(problem, spec, out):
    if spec.algorithm != "consensus":
        raise UsageError(f"{spec.algorithm} needs a block problem; "
                         "use --algorithm consensus")
    lo, hi = consensus_step_interval(problem)
    eta = spec.eta
    if eta is None:
        eta = default_eta(2.0, 0.9)
        print(f"L={2.0!r}", file=out)
        print(f"eta_interval=({lo!r}, {hi!r})", file=out)
    m, n = problem.m, problem.local_dim
    init = None
    if not spec.zero_init:
        rng = np.random.default_rng(spec.seed)
        init = (rng.standard_normal((m, n)), None, rng.standard_normal((m, n)), None)
    summary = {"rho": 0.0, "eta": eta, "L": 2.0}
    try:
        res = solve_consensus(problem, eta, spec.max_iter, spec.tol, init=init)
    except DivergenceError as exc:
        summary.update(iterations=len(exc.records) - 1, diverged=True,
                       stop_reason="diverged", final_residual=float("nan"))
        return exc.records, summary
    summary.update(iterations=res.iterations, stop_reason=res.stop_reason,
                   diverged=False, final_residual=res.records[-1].primal_residual,
                   consensus_value=" ".join(repr(float(v)) for v in res.x.mean(axis=0)))
    return res.records, summary


def cmd_run(spec, out=None):
    """Run one algorithm on one problem; return the exit status."""
    out = sys.stdout if out is None else out
    start = time.perf_counter()
    if spec.algorithm not in ALGORITHMS:
        raise UsageError(f"unknown algorithm {spec.algorithm!r}")
    problem = resolve_problem(spec.problem, spec.seed)
    if isinstance(problem, ConsensusProblem):
        if spec.algorithm in ("padpd", "padpd-rho0"):
            problem = problem.as_block_problem()
            records, summary = _run_block(problem, spec, out)
        else:
            records, summary = _run_consensus(problem, spec, out)
    else:
        if spec.algorithm == "consensus":
            raise UsageError("consensus needs a consensus problem")
        records, summary = _run_block(problem, spec, out)

    name = getattr(problem, "name", None) or Path(spec.problem).stem
    trace = _trace_file(spec, f"{name}_{spec.algorithm}.csv")
    write_trace(records, trace, spec.full_trace)

    status = {"converged": EXIT_CONVERGED, "max_iter": EXIT_MAX_ITER,
              "diverged": EXIT_DIVERGED}[summary["stop_reason"]]
    lines = {"problem": name, "algorithm": spec.algorithm,
             "final_error": repr(records[-1].error) if records else "nan",
             **summary, "wall_time": f"{time.perf_counter() - start:.3f}",
             "trace": str(trace)}
    for k, v in lines.items():
        if isinstance(v, bool):
            v = str(v).lower()
        print(f"{k}={v}", file=out)
    return status


def _status_word(result):
    return {"converged": "converged", "max_iter": "not converged",
            "diverged": "diverged"}[result]


def cmd_compare(problem_name, rho=1.0, budget=10_000, seed=0, tol=1e-8,
                eta=None, trace_path=None, zero_init=False, out=None):
    """Run padpd and admm-direct from the same start; print a verdict."""
    out = sys.stdout if out is None else out
    problem = resolve_problem(problem_name, seed)
    if isinstance(problem, ConsensusProblem):
        problem = problem.as_block_problem()
    if not isinstance(problem, BlockProblem):
        raise UsageError("compare needs a block problem")
    rho = float(rho)
    init = None if zero_init else _random_init(problem.size, seed)

    padpd_records, padpd_status, padpd_x = [], "diverged", None
    try:
        res = solve(problem, SolverConfig(eta=eta, rho=rho, max_iter=budget, tol=tol),
                    init=None if init is None else (init, None), full_trace=True)
        padpd_records, padpd_status = res.records, res.stop_reason
        padpd_x = res.state.current[:problem.n_primal]
    except DivergenceError as exc:
        padpd_records = exc.records

    admm_records, admm_word, admm_x = [], None, None
    if rho > 0:
        ares = admm_direct_multiblock(
            problem, AdmmConfig(rho=rho, max_iter=budget, tol=tol), init=init)
        admm_records = ares.records
        admm_word = _status_word(ares.stop_reason)
        admm_x = np.concatenate(ares.xs)
    else:
        admm_word = "rejected (rho must be > 0)"

    name = problem.name or Path(problem_name).stem
    spec = RunSpec(problem_name, trace_path=trace_path)
    path = _trace_file(spec, f"{name}_compare.csv")
    pad = {r.k: r.error for r in padpd_records}
    adm = {r.k: r.error for r in admm_records}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "padpd", "admm-direct"])
    for k in range(max(list(pad) + list(adm) + [0]) + 1):
        if k in pad or k in adm:
            w.writerow([k, repr(pad[k]) if k in pad else "",
                        repr(adm[k]) if k in adm else ""])
    path.write_text(buf.getvalue())

    verdict = f"padpd: {_status_word(padpd_status)}; admm-direct: {admm_word}"
    print(f"problem={name}", file=out)
    print(f"rho={rho!r}", file=out)
    print(f"budget={budget}", file=out)
    if padpd_x is not None and admm_x is not None \
            and padpd_status == "converged" and admm_word == "converged":
        print(f"primal_gap={float(np.max(np.abs(padpd_x - admm_x)))!r}", file=out)
    print(f"trace={path}", file=out)
    print(f"verdict={verdict}", file=out)
    return verdict


def build_parser():
    p = argparse.ArgumentParser(
        prog="padpd",
        description="Parallel primal-dual splitting solvers and an ADMM baseline.")
    p.add_argument("--problem", required=True,
                   help="problem file (.json) or built-in name "
                        "(example1, consensus-ls-5cycle, consensus-ls-complete5, "
                        "qp-<q>x<p>)")
    p.add_argument("--algorithm", choices=ALGORITHMS, default="padpd")
    p.add_argument("--rho", type=float, default=None,
                   help="penalty parameter (default 1; 0 for padpd-rho0)")
    p.add_argument("--eta", type=float, default=None,
                   help="step size (default 0.9 / (2 L))")
    p.add_argument("--max-iter", type=int, default=50_000)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--trace", default=None,
                   help=f"CSV trace path (relative paths go under ${TRACE_DIR_ENV})")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for random starts and generated problems")
    p.add_argument("--full-trace", action="store_true",
                   help="record every iteration, no decimation")
    p.add_argument("--compare", action="store_true",
                   help="run padpd and admm-direct side by side")
    p.add_argument("--zero-init", action="store_true",
                   help="start from zero instead of a seeded random point")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.compare:
            cmd_compare(args.problem, 1.0 if args.rho is None else args.rho,
                        args.max_iter, args.seed, args.tol, args.eta, args.trace,
                        args.zero_init)
            return EXIT_CONVERGED
        spec = RunSpec(args.problem, args.algorithm, args.rho, args.eta,
                       args.max_iter, args.tol, args.trace, args.seed,
                       args.full_trace, args.zero_init)
        return cmd_run(spec)
    except (UsageError, PadpdError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
