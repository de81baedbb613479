"""Fit the 2-D band indicator (+1 inside |x1 + x2| <= 0.5, -1 outside)
with only four neurons.

Four is the minimum: each discontinuity line needs a pair of neurons
whose breaking lines straddle it. Success shows as all four trained lines
rotating from their horizontal initialization onto the two diagonals.
"""

import numpy as np

from sggn import run_sggn
from sggn.cli import presets

config = presets()["step2d"]
params, history = run_sggn(config.spec, config.n, config.init_style, config.sggn)

print(f"final loss after {history[-1].k} iterations: {history[-1].loss:.3e}")
print("\ntrained breaking lines (unit normal, offset):")
for nrn in params.neurons:
    s = np.linalg.norm(nrn.omega)
    w, b = nrn.omega / s, nrn.b / s
    # signed offset of the line along the (1,1)/sqrt(2) diagonal
    diag = (w[0] + w[1]) / np.sqrt(2.0)
    level = -b / diag if abs(diag) > 1e-9 else np.nan
    print(f"  omega = ({w[0]:+.4f}, {w[1]:+.4f})  line x1 + x2 = {level * np.sqrt(2):+.4f}"
          f"   (targets: -0.5 or +0.5)")
