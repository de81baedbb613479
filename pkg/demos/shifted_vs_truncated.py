"""Why filter neurons instead of shifting the matrix?

A Gauss-Newton matrix with a zero direction forces a choice. Shifting
(Levenberg-Marquardt) makes the matrix invertible but manufactures a
search direction of size g/lambda along the null direction - enormous
exactly when the shift is small enough not to pollute the good
directions. Truncation simply refuses to move along it. The second half
runs both optimizers on the staircase problem.
"""

import numpy as np

from sggn import LMConfig, SgGNConfig, run_lm, run_sggn, shifted_solve, truncated_svd_solve
from sggn.cli import presets

M = np.diag([1.0, 0.0])   # one good direction, one null direction
g = np.array([1.0, 1.0])

print("system: M = diag(1, 0), g = (1, 1)")
for lam in (1e-2, 1e-4, 1e-6):
    p = shifted_solve(M, g, lam)
    print(f"  shifted solve, lambda = {lam:7.0e}: p = ({p[0]:.6f}, {p[1]:.3e})")
report = truncated_svd_solve(M, g, 1e-12)
print(f"  truncated solve:                 p = ({report.solution[0]:.6f}, "
      f"{report.solution[1]:.1f})  rank {report.numerical_rank}")

print("\nstaircase comparison (n = 30, 200 iterations):")
config = presets()["step1d"]
_, sggn_hist = run_sggn(config.spec, config.n, config.init_style,
                        SgGNConfig(max_iters=200))
print(f"  structure-guided GN: final loss {sggn_hist[-1].loss:.3e}")
for scope in ("nonlinear_only", "full"):
    _, lm_hist = run_lm(config.spec, config.n, config.init_style,
                        LMConfig(scope=scope), 200)
    print(f"  LM ({scope:>14s}): final loss {lm_hist[-1].loss:.3e} "
          f"after {lm_hist[-1].k} iterations")
