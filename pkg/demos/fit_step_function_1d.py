"""Fit a ten-piece staircase on [0, 10] with 30 ReLU neurons.

The interesting behavior is geometric: the 30 breaking points start on a
uniform grid and migrate until pairs of them straddle each jump of the
target, which is what lets a continuous piecewise linear function mimic a
discontinuity. Watch the loss fall by ~15 orders of magnitude while that
happens.
"""

import numpy as np

from sggn import SgGNConfig, run_sggn
from sggn.cli import presets

config = presets()["step1d"]
print(f"target: staircase with values {np.round(config.spec.target.params['values'], 3)}")

# 120 iterations instead of the preset's 825: plenty to see the mechanism
params, history = run_sggn(config.spec, config.n, config.init_style,
                           SgGNConfig(max_iters=120))

print("\niter   loss        step size  active")
for record in history[::12] + [history[-1]]:
    print(f"{record.k:4d}   {record.loss:.3e}  {record.gamma:9.3e}  {record.active_count:3d}")

breakpoints = np.sort([-n.b / n.omega[0] for n in params.neurons])
inside = breakpoints[(breakpoints > 0) & (breakpoints < 10)]
print(f"\nbreakpoints inside [0, 10] ({inside.size} of {config.n}):")
print(np.array2string(inside, precision=3, max_line_width=100))
print("\nnote the pairs hugging the jump locations 1, 2, ..., 9.")
