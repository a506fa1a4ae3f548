"""
Three coupled blocks, solved with every block updated in parallel.

    min 0.5 x1^2   s.t.  A1 (x1, x2) + A2 x3 + A3 x4 = 0

The only solution is the origin, so the Euclidean norm of the primal stack
is the distance to the answer.  We start from a random point and watch it
shrink, first with the penalized operator (rho = 1) and then without a
penalty (rho = 0).

Run:  python demos/three_block_example.py
"""

import numpy as np

from padpd import (SolverConfig, build_operator, example1, frb_step, initial_state,
                   solve, spectral_norm)

problem = example1()
start = np.random.default_rng(0).normal(size=problem.size)

for rho, eta in [(1.0, 1 / 50), (0.0, 0.1)]:
    # the step must stay below 1 / (2 L) with L the norm of the operator matrix
    L = spectral_norm(build_operator(problem, rho).M)
    print(f"rho={rho:g}: L={L:.4f}, admissible eta < {1 / (2 * L):.5f}, using {eta:g}")

    res = solve(problem, SolverConfig(eta=eta, rho=rho, max_iter=20_000, tol=1e-10),
                init=(start, None))
    errors = {r.k: r.error for r in res.records}
    for k in (0, 10, 100, 1000, 2000, 4000):
        if k in errors:
            print(f"  k={k:5d}  e_k={errors[k]:.3e}")
    print(f"  stopped after {res.iterations} iterations ({res.stop_reason}), "
          f"KKT residual {res.kkt:.1e}")

    # every block of one step reads only the previous two iterates, so the
    # order in which blocks are written does not matter; check it on one step
    op = build_operator(problem, rho)
    s0 = initial_state(op, start)
    a = frb_step(s0, op, problem.functions, eta, order=[0, 1, 2])
    b = frb_step(s0, op, problem.functions, eta, order=[2, 0, 1])
    print(f"  block order changes the step: {not np.array_equal(a.current, b.current)}")
    print()
