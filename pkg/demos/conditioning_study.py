"""How ill-conditioned do the two solve matrices get?

On [0,1] with n uniform breakpoints, the mass matrix's condition number
grows like n^4. The full layer GN matrix also grows like n^4 (its scalar
Heaviside Gram factor alone grows like n^2 - the difference comes from
the near-collinear (H_i, x H_i) column pairs). Clustering the breakpoints
makes everything far worse, which is why the solvers truncate.
"""

import numpy as np

from sggn import BreakpointLayout, condition_sweep

ns = [8, 16, 32, 64, 128]
reports = condition_sweep(ns)

print("      n    kappa2(mass)   kappa2(layer GN)")
for n in ns:
    ka = next(r.kappa2 for r in reports if r.n == n and r.tag == "mass")
    kh = next(r.kappa2 for r in reports if r.n == n and r.tag == "layer_gn")
    print(f"  {n:5d}    {ka:.3e}      {kh:.3e}")

for tag in ("mass", "layer_gn"):
    ks = [r.kappa2 for r in reports if r.tag == tag]
    slope = np.polyfit(np.log(ns), np.log(ks), 1)[0]
    print(f"log-log slope for {tag}: {slope:.2f}")

print("\nclustered breakpoints (gaps shrinking by 1/2), n = 10:")
clustered = condition_sweep([10], BreakpointLayout(placement="clustered"))
uniform = condition_sweep([10])
for tag in ("mass", "layer_gn"):
    ku = next(r.kappa2 for r in uniform if r.tag == tag)
    kc = next(r.kappa2 for r in clustered if r.tag == tag)
    print(f"  {tag}: uniform {ku:.2e}  ->  clustered {kc:.2e}")
