"""Pure versus mixed equilibria, solved and checked against the grid oracle.

Run with ``python3 demos/equilibria.py``.
"""

import numpy as np

from markov_game import GridSpec, alpha, fixture, oracle_dual_max, pure_nash_check, solve_game

np.set_printoptions(precision=4, suppress=True)
spec = alpha(2.0)

for name in ("unique-pure", "no-pure", "dominant-middle"):
    inst = fixture(name)
    pn = pure_nash_check(spec, inst.family, inst.pi)
    r = solve_game(spec, inst.family, inst.pi, 10_000)
    w_grid, v_grid = oracle_dual_max(spec, inst.family, inst.pi, GridSpec(1e-3))
    print(f"{name}: pure equilibrium {'yes' if pn.exists else 'no'}")
    print(f"  averaged weights {r.weights_avg}  value {r.value:.6f}  gap {r.gap:.2e}")
    print(f"  best certified gap {r.best_gap:.2e}  grid oracle {w_grid} -> {v_grid:.6f}")
