"""Robust solution of the ill-conditioned symmetric systems.

Both structured matrices (mass and layer GN) are symmetric positive
definite in exact arithmetic but can be extremely ill-conditioned: on
[0,1] with n uniformly placed breakpoints their 2-norm condition numbers
grow like n^4 and n^2 respectively, and faster still when breakpoints
cluster. Direct inversion therefore goes through a truncated SVD, which
discards (rather than amplifies) directions below a relative threshold.
For a symmetric matrix the SVD is read off the eigendecomposition:
singular values are the eigenvalue magnitudes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Domain, NetworkParams
from .problem import WeightedPointSet, midpoint_grid

__all__ = [
    "BreakpointLayout",
    "ConditionReport",
    "SpdSolveReport",
    "condition_reports_csv",
    "condition_sweep",
    "shifted_solve",
    "truncated_svd_solve",
]


@dataclass(frozen=True)
class SpdSolveReport:
    """Result of a truncated-SVD solve."""

    solution: np.ndarray
    numerical_rank: int
    truncation_tol: float
    relative_residual: float
    smallest_kept_singular_value: float
    largest_singular_value: float


@dataclass(frozen=True)
class ConditionReport:
    """2-norm condition number of one assembled matrix."""

    n: int
    tag: str  # "mass" | "layer_gn"
    kappa2: float
    sigma_max: float
    sigma_min: float


def truncated_svd_solve(M: np.ndarray, b: np.ndarray, rel_tol: float,
                        equilibrate: bool = False) -> SpdSolveReport:
    """Solve M x = b for symmetric M, truncating small singular values.

    Directions with singular value below rel_tol * sigma_max are dropped:
    the solution has exactly zero component along them. A couple of
    refinement passes (projected onto the kept subspace) push the
    residual of the kept part down to rounding level.

    With ``equilibrate`` the system is symmetrically scaled to unit
    diagonal first (Jacobi scaling) and the truncation acts on the scaled
    spectrum. That makes the cut scale-invariant per unknown, which
    matters when basis functions differ wildly in magnitude; the
    singular-value fields of the report then refer to the scaled matrix,
    while the residual is still measured on the original system.
    """
    M = np.asarray(M, dtype=float)
    b = np.asarray(b, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix must be square, got shape {M.shape}")
    if b.shape != (M.shape[0],):
        raise ValueError(f"rhs has shape {b.shape}, expected ({M.shape[0]},)")
    if not 0.0 < rel_tol < 1.0:
        raise ValueError("rel_tol must lie in (0, 1)")
    scale = np.abs(M).max()
    if scale > 0 and np.abs(M - M.T).max() > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")

    if equilibrate:
        diag = np.sqrt(np.abs(np.diag(M)))
        s_inv = np.where(diag > 0, 1.0 / np.where(diag > 0, diag, 1.0), 1.0)
        Ms = M * s_inv[:, None] * s_inv[None, :]
        Ms = np.tril(Ms) + np.tril(Ms, -1).T
        bs = s_inv * b
    else:
        s_inv = None
        Ms, bs = M, b

    evals, vecs = np.linalg.eigh(Ms)
    sv = np.abs(evals)
    sigma_max = float(sv.max(initial=0.0))
    keep = sv >= rel_tol * sigma_max if sigma_max > 0 else np.zeros(sv.shape, dtype=bool)
    vk = vecs[:, keep]
    lk = evals[keep]

    bnorm = float(np.linalg.norm(bs))
    if keep.any() and bnorm > 0:
        xs = vk @ ((vk.T @ bs) / lk)
        best_res = float(np.linalg.norm(Ms @ xs - bs))
        for _ in range(2):
            correction = vk @ ((vk.T @ (bs - Ms @ xs)) / lk)
            x_try = xs + correction
            res = float(np.linalg.norm(Ms @ x_try - bs))
            if res >= best_res:
                break
            xs, best_res = x_try, res
    else:
        xs = np.zeros_like(bs)

    x = s_inv * xs if equilibrate else xs
    bnorm_orig = float(np.linalg.norm(b))
    residual = float(np.linalg.norm(M @ x - b)) if bnorm_orig > 0 else 0.0

    return SpdSolveReport(
        solution=x,
        numerical_rank=int(keep.sum()),
        truncation_tol=rel_tol,
        relative_residual=residual / bnorm_orig if bnorm_orig > 0 else 0.0,
        smallest_kept_singular_value=float(sv[keep].min()) if keep.any() else 0.0,
        largest_singular_value=sigma_max,
    )


def shifted_solve(M: np.ndarray, g: np.ndarray, lam: float) -> np.ndarray:
    """Solve the shifted system (M + lam*I) p = g.

    This is the Levenberg-Marquardt way around a singular M. Along a null
    direction of M it returns g_component / lam, which blows up as lam
    shrinks -- the behavior the active-set reduction avoids.
    """
    M = np.asarray(M, dtype=float)
    return np.linalg.solve(M + lam * np.eye(M.shape[0]), np.asarray(g, dtype=float))


@dataclass(frozen=True)
class BreakpointLayout:
    """1-D breakpoint placement on [0,1] for the conditioning study."""

    placement: str = "uniform"  # "uniform" | "clustered"
    ratio: float = 0.5          # gap ratio between consecutive breakpoints (clustered)
    oversample: int = 50        # quadrature points per neuron

    def breakpoints(self, n: int) -> np.ndarray:
        if self.placement == "uniform":
            return np.arange(1, n + 1) / (n + 1)
        if self.placement == "clustered":
            # Geometrically shrinking gaps, scaled so the last breakpoint
            # sits where the uniform layout puts it.
            gaps = self.ratio ** np.arange(n)
            pos = np.cumsum(gaps)
            return pos / pos[-1] * (n / (n + 1))
        raise ValueError(f"unknown placement {self.placement!r}")


def condition_sweep(n_list, layout: BreakpointLayout | None = None) -> list[ConditionReport]:
    """Condition numbers of A(r) and H(r) on [0,1] for each n.

    Breakpoints follow the layout (uniform by default), mu is 1, and the
    midpoint grid has layout.oversample points per neuron.
    """
    layout = layout or BreakpointLayout()
    from .assembly import assemble_layer_gn, assemble_mass  # local: avoids import cycle

    domain = Domain([0.0], [1.0])
    reports = []
    for n in n_list:
        if n < 4:
            raise ValueError("condition sweep needs n >= 4")
        t = layout.breakpoints(int(n))
        hidden = np.column_stack([-t, np.ones_like(t)])
        params = NetworkParams.from_arrays(0.0, np.ones(t.size), hidden)
        # The grid must separate every pair of breakpoints (clustered
        # layouts shrink gaps geometrically), or the assembled matrices
        # are exactly singular.
        gaps = np.diff(np.concatenate([[0.0], t, [1.0]]))
        m = max(layout.oversample * int(n), int(np.ceil(2.0 / gaps.min())))
        if m > 2_000_000:
            raise ValueError(
                f"layout needs {m} quadrature points to separate breakpoints at n={n}; "
                "gaps are too small to resolve"
            )
        points, volume = midpoint_grid(domain, 1.0 / m)
        pts = WeightedPointSet(points, np.full(m, volume), np.zeros(m), kind="quadrature")
        A, _ = assemble_mass(params, pts)
        H = assemble_layer_gn(params, pts)
        for tag, mat in (("mass", A), ("layer_gn", H)):
            ev = np.linalg.eigvalsh(mat)
            reports.append(
                ConditionReport(
                    n=int(n),
                    tag=tag,
                    kappa2=float(ev[-1] / ev[0]),
                    sigma_max=float(ev[-1]),
                    sigma_min=float(ev[0]),
                )
            )
    return reports


def condition_reports_csv(reports, path) -> None:
    """Write condition reports as CSV: n, tag, kappa2, sigma_max, sigma_min."""
    with open(path, "w", newline="") as fh:
        fh.write("n,tag,kappa2,sigma_max,sigma_min\n")
        for r in reports:
            fh.write(f"{r.n},{r.tag},{r.kappa2!r},{r.sigma_max!r},{r.sigma_min!r}\n")
