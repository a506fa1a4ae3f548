"""
Five agents agree on the average of their private targets.

Agent i holds f_i(s) = 0.5 ||s - b_i||^2.  The sum is minimized at the mean
of the b_i.  Each agent only talks to its graph neighbours, and the step size
0.2 is admissible on any connected graph because ||I - W||_1 <= 2.

Run:  python demos/consensus.py
"""

import numpy as np

from padpd import consensus_least_squares, solve_consensus

targets = np.array([[1.0, -2.0], [3.0, 0.5], [-1.0, 4.0], [2.0, 2.0], [0.25, -1.0]])
print("target mean:", targets.mean(axis=0))

for generator in ("cycle", "path", "star", "complete"):
    problem = consensus_least_squares(targets, generator)
    report = problem.validate()
    log = []
    res = solve_consensus(problem, eta=0.2, max_iter=20_000, tol=1e-10,
                          access_log=log)
    far = sum(1 for _, i, j in log if j != i and not problem.graph.has_edge(i, j))
    print(f"\n{generator:>8}: lambda_2(I - W) = {report.algebraic_connectivity:.4f}, "
          f"{res.iterations} rounds ({res.stop_reason})")
    print(f"          agent 0 ends at {res.x[0]}, spread across agents "
          f"{np.ptp(res.x, axis=0).max():.1e}")
    print(f"          {len(log)} reads, {far} outside a neighbourhood")

# Better-connected graphs mix faster; the cycle needs about twice the rounds
# of the complete graph here.
