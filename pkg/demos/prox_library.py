"""
The proximity operators behind every backward step, and a user-supplied one.

prox_{eta f}(x) = argmin_u  eta f(u) + 0.5 ||u - x||^2

The closed forms are checked against a direct extended-precision
minimization, then a box indicator (supplied as plain callables) is dropped
into a two-block problem.

Run:  python demos/prox_library.py
"""

import numpy as np

from padpd import (BlockProblem, CallableFunction, L1Norm, QuadraticFunction,
                   SolverConfig, prox_numeric_oracle, solve)

x = np.array([2.0, -0.5, 0.0, 1.3])
for f in (QuadraticFunction(4, curvature=[1.0, 0.0, 2.0, 0.5]), L1Norm(4, lam=1.0)):
    closed = f.prox(x, 0.7)
    numeric = prox_numeric_oracle(f, x, 0.7)
    print(f"{f.tag:>9}: prox = {closed}, |closed - numeric| = "
          f"{np.max(np.abs(closed - numeric)):.1e}")

# Indicator of [0, 1]^2: infinite outside the box, prox is the clipping map.
box = CallableFunction(
    2,
    lambda u: 0.0 if np.all((np.asarray(u, float) >= 0) & (np.asarray(u, float) <= 1))
    else np.inf,
    lambda v, eta: np.clip(v, 0.0, 1.0))

# min 0.5 ||z||^2 + indicator_box(x)  s.t.  x - z = (2, -1)
# Eliminating z leaves the projection of (2, -1) onto the box: x = (1, 0).
problem = BlockProblem([np.eye(2), -np.eye(2)], [box, QuadraticFunction(2)],
                       [2.0, -1.0])
res = solve(problem, SolverConfig(rho=1.0, max_iter=50_000, tol=1e-10))
(xb, z), y = problem.split(res.state.current)
print(f"\nbox block x = {xb}, free block z = {z}, multiplier y = {y}")
print(f"constraint residual {np.linalg.norm(problem.residual([xb, z])):.1e} "
      f"after {res.iterations} iterations")
