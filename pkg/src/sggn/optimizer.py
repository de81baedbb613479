"""Training loops: the structure-guided Gauss-Newton iteration and a
classic Levenberg-Marquardt baseline.

One structure-guided iteration does, in order:

  (i)   pick the active neurons (|c_i| >= eps_c);
  (ii)  solve the reduced layer-GN system H~ s~ = G~ and scale the
        result by D(c~)^-1 to get the search direction, zero-padded for
        inactive neurons;
  (iii) line-search the step size and update the nonlinear parameters,
        then renormalize the weight directions;
  (iv)  recompute the optimal linear parameters from the mass system.

Filtering by the active set removes the GN matrix's null directions
structurally, so no shift is ever added to the reduced system. The loss
recorded for an iteration is the one after step (iv).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .assembly import (
    active_set,
    assemble_bundle,
    assemble_mass,
    block_indices,
    coefficient_scaling,
    reduce_system,
)
from .linalg import shifted_solve, truncated_svd_solve
from .model import NetworkParams, features, homogeneous, normalize
from .problem import ProblemSpec, WeightedPointSet, build_point_set, loss

logger = logging.getLogger(__name__)

__all__ = [
    "IterationRecord",
    "OptimizerError",
    "LMConfig",
    "SgGNConfig",
    "history_to_csv",
    "initialize",
    "line_search",
    "run_lm",
    "run_sggn",
    "sggn_step",
]

INIT_STYLES = ("uniform_1d", "horizontal_2d", "vertical_2d", "explicit")


class OptimizerError(RuntimeError):
    """A linear solve or assembly failed; carries the iteration index."""

    def __init__(self, iteration: int, cause: Exception):
        super().__init__(f"iteration {iteration}: {cause}")
        self.iteration = iteration


def _solve_mass(A, f, rel_tol):
    # Neuron scales drift by orders of magnitude when hyperplanes wander
    # (a weight direction passing near zero blows up the bias after
    # renormalization), so the mass system is equilibrated to unit
    # diagonal before truncation; the cut then reflects geometry between
    # neurons, not their scale.
    return truncated_svd_solve(A, f, rel_tol, equilibrate=True)


@dataclass(frozen=True)
class SgGNConfig:
    """Settings of the structure-guided iteration."""

    max_iters: int = 100
    eps_c: float = 1e-8
    gamma_max: float = 1e3
    max_expansions: int = 60
    ls_tol: float = 1e-4          # golden-section width, relative to the bracket
    svd_tol_mass: float = 1e-13
    svd_tol_gn: float = 1e-14
    stop_loss: float | None = None
    renormalize_each_iter: bool = True
    record_condition: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        for name in ("eps_c", "gamma_max", "ls_tol", "svd_tol_mass", "svd_tol_gn"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class LMConfig:
    """Settings of the Levenberg-Marquardt baseline."""

    lam0: float = 1e-3
    increase: float = 10.0
    decrease: float = 0.1
    max_adjust: int = 25
    scope: str = "nonlinear_only"  # "nonlinear_only" | "full"
    svd_tol_mass: float = 1e-12
    lam_min: float = 1e-10
    lam_max: float = 1e32

    def __post_init__(self):
        if self.lam0 <= 0:
            raise ValueError("lam0 must be positive")
        if self.increase <= 1 or not 0 < self.decrease < 1:
            raise ValueError("need increase > 1 and 0 < decrease < 1")
        if self.scope not in ("nonlinear_only", "full"):
            raise ValueError(f"unknown LM scope {self.scope!r}")


@dataclass(frozen=True)
class IterationRecord:
    """One row of a loss curve."""

    k: int
    loss: float
    gamma: float
    active_count: int
    mass_rank: int
    gn_rank: int
    kappa_mass: float | None = None
    kappa_gn: float | None = None


def line_search(objective, gamma_max: float = 1e3, tol: float = 1e-4,
                max_expansions: int = 60) -> float:
    """Minimize a scalar objective over [0, gamma_max].

    Brackets a descent minimum from 0 (initial probe 1, doubling while
    the objective falls, halving when the first probe already fails),
    then refines by golden section to a width of tol * bracket. Returns
    the best point evaluated anywhere, so the result never loses to
    gamma = 0 or to any probe.
    """
    f0 = objective(0.0)
    best = [0.0, f0]

    def probe(g):
        f = objective(g)
        if f < best[1]:
            best[0], best[1] = g, f
        return f

    g1 = min(1.0, gamma_max)
    f1 = probe(g1)
    if f1 < f0:
        lo, mid, fmid = 0.0, g1, f1
        hi = None
        for _ in range(max_expansions):
            if mid >= gamma_max:
                break
            g_next = min(2.0 * mid, gamma_max)
            f_next = probe(g_next)
            if f_next >= fmid:
                hi = g_next
                break
            lo, mid, fmid = mid, g_next, f_next
        if hi is None:
            hi = gamma_max
    else:
        # First probe is uphill: shrink until a descent point appears.
        g, found = g1, None
        for _ in range(max_expansions):
            g *= 0.5
            if g < 1e-18 * max(1.0, gamma_max):
                break
            if probe(g) < f0:
                found = g
                break
        if found is None:
            return 0.0
        lo, hi = 0.0, min(2.0 * found, gamma_max)

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    width_target = tol * (b - a)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = probe(c), probe(d)
    while b - a > width_target:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = probe(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = probe(d)
    return best[0]


def initial_hidden(domain, n: int, init_style: str) -> np.ndarray:
    """Hidden matrix whose hyperplanes uniformly partition the domain."""
    if init_style == "uniform_1d":
        if domain.d != 1:
            raise ValueError("uniform_1d needs a 1-D domain")
        lo, hi = domain.lower[0], domain.upper[0]
        t = lo + np.arange(1, n + 1) * (hi - lo) / (n + 1)
        return np.column_stack([-t, np.ones(n)])
    if init_style in ("horizontal_2d", "vertical_2d"):
        if domain.d != 2:
            raise ValueError(f"{init_style} needs a 2-D domain")
        axis = 1 if init_style == "horizontal_2d" else 0
        lo, hi = domain.lower[axis], domain.upper[axis]
        levels = lo + np.arange(1, n + 1) * (hi - lo) / (n + 1)
        hidden = np.zeros((n, 3))
        hidden[:, 0] = -levels
        hidden[:, 1 + axis] = 1.0
        return hidden
    raise ValueError(f"unknown init style {init_style!r}; expected one of {INIT_STYLES}")


def initialize(spec: ProblemSpec, n: int, init_style: str,
               svd_tol_mass: float = 1e-12,
               pts: WeightedPointSet | None = None,
               explicit: NetworkParams | None = None) -> NetworkParams:
    """Uniformly partitioning hyperplanes plus the optimal linear part.

    The nonlinear parameters place n hyperplanes that uniformly
    partition the domain (or come from ``explicit``); the linear
    parameters then solve the mass system at that configuration.
    """
    if pts is None:
        pts = build_point_set(spec)
    if init_style == "explicit":
        if explicit is None:
            raise ValueError("init_style 'explicit' requires explicit parameters")
        params = normalize(explicit)
    else:
        hidden = initial_hidden(spec.domain, n, init_style)
        if spec.h is not None:
            axis = {"uniform_1d": 0, "vertical_2d": 0, "horizontal_2d": 1}[init_style]
            edge = spec.domain.upper[axis] - spec.domain.lower[axis]
            spacing = edge / (n + 1)
            if spacing < spec.h:
                raise ValueError(
                    f"n={n} puts hyperplanes closer ({spacing:g}) than the "
                    f"quadrature mesh h={spec.h:g}; they are indistinguishable on the grid"
                )
        params = NetworkParams.from_arrays(0.0, np.zeros(n), hidden, d=spec.domain.d)
    A, f = assemble_mass(params, pts)
    report = _solve_mass(A, f, svd_tol_mass)
    return params.with_linear(report.solution)


def _loss_for_hidden(c_hat: np.ndarray, hidden: np.ndarray, y: np.ndarray,
                     w: np.ndarray, u: np.ndarray) -> float:
    """Loss at given hidden matrix with fixed linear parameters; y, w, u
    are precomputed over the point set."""
    z = y @ hidden.T
    np.maximum(z, 0.0, out=z)
    r = z @ c_hat[1:] + c_hat[0] - u
    return 0.5 * float(np.dot(w * r, r))


def _kappa(report) -> float | None:
    if report is None or report.smallest_kept_singular_value == 0.0:
        return None
    return report.largest_singular_value / report.smallest_kept_singular_value


def sggn_step(params: NetworkParams, pts: WeightedPointSet, cfg: SgGNConfig,
              k: int = 0) -> tuple[NetworkParams, IterationRecord]:
    """One structure-guided Gauss-Newton iteration (steps (i)-(iv)).

    With an empty active set the nonlinear update is skipped (the
    optimality condition for those neurons holds automatically) and only
    the linear solve runs; gamma is recorded as 0.
    """
    d = params.d
    act = active_set(params.c, cfg.eps_c)
    gamma = 0.0
    gn_report = None
    new_hidden = params.hidden_matrix

    if act:
        bundle = assemble_bundle(params, pts)
        h_red, g_red, c_red = reduce_system(bundle.H, bundle.G, params.c, act)
        gn_report = truncated_svd_solve(h_red, g_red, cfg.svd_tol_gn)
        # The reduction guarantees the scaling never divides by a
        # filtered-out coefficient.
        assert np.all(np.abs(c_red) >= cfg.eps_c)
        p_red = gn_report.solution / coefficient_scaling(c_red, d)
        p = np.zeros(params.n * (d + 1))
        p[block_indices(act, d)] = p_red
        direction = p.reshape(params.n, d + 1)

        y = homogeneous(pts.points)
        c_hat, w, u = params.c_hat, pts.weights, pts.targets
        base = new_hidden

        def objective(g):
            return _loss_for_hidden(c_hat, base - g * direction, y, w, u)

        gamma = line_search(objective, cfg.gamma_max, cfg.ls_tol, cfg.max_expansions)
        new_hidden = base - gamma * direction

    candidate = params.with_hidden(new_hidden)
    if cfg.renormalize_each_iter:
        candidate = normalize(candidate)
    A, f = assemble_mass(candidate, pts)
    mass_report = _solve_mass(A, f, cfg.svd_tol_mass)
    new_params = candidate.with_linear(mass_report.solution)
    # In exact arithmetic the linear solve is the minimizer over c_hat, so
    # it cannot raise the loss; if truncation ever makes it worse than the
    # carried-over coefficients, keep those.
    new_loss = loss(new_params, pts)
    carried_loss = loss(candidate, pts)
    if carried_loss < new_loss:
        new_params, new_loss = candidate, carried_loss

    record = IterationRecord(
        k=k,
        loss=new_loss,
        gamma=gamma,
        active_count=act.count,
        mass_rank=mass_report.numerical_rank,
        gn_rank=gn_report.numerical_rank if gn_report is not None else 0,
        kappa_mass=_kappa(mass_report) if cfg.record_condition else None,
        kappa_gn=_kappa(gn_report) if cfg.record_condition else None,
    )
    return new_params, record


def run_sggn(spec: ProblemSpec, n: int, init_style: str, cfg: SgGNConfig,
             explicit: NetworkParams | None = None,
             pts: WeightedPointSet | None = None):
    """Iterate sggn_step until max_iters or stop_loss; returns
    (final params, list of IterationRecord)."""
    if pts is None:
        pts = build_point_set(spec)
    params = initialize(spec, n, init_style, cfg.svd_tol_mass, pts=pts, explicit=explicit)
    history: list[IterationRecord] = []
    for k in range(1, cfg.max_iters + 1):
        try:
            params, record = sggn_step(params, pts, cfg, k=k)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise OptimizerError(k, exc) from exc
        history.append(record)
        if cfg.stop_loss is not None and record.loss <= cfg.stop_loss:
            break
    return params, history


def _residual_jacobian(params: NetworkParams, pts: WeightedPointSet, scope: str):
    """Residual vector and Jacobian of the model over the point set.

    nonlinear_only: columns for r (rows (D(c) kron I)(H kron y)).
    full: columns for (c_hat, r).
    """
    sigma_hat, heav, y = features(params, pts.points)
    residual = sigma_hat @ params.c_hat - pts.targets
    m = pts.m
    b = (heav[:, :, None] * y[:, None, :]).reshape(m, -1)
    jr = b * coefficient_scaling(params.c, params.d)[None, :]
    if scope == "nonlinear_only":
        return residual, jr
    return residual, np.hstack([sigma_hat, jr])


def run_lm(spec: ProblemSpec, n: int, init_style: str, lm_cfg: LMConfig, max_iters: int,
           explicit: NetworkParams | None = None,
           pts: WeightedPointSet | None = None):
    """Levenberg-Marquardt on the same problem, as a baseline.

    nonlinear_only shifts only the r-block GN system and refreshes the
    linear parameters from the mass system every iteration; full shifts
    the joint (c_hat, r) system. The shift lambda is divided by 1/decrease
    on an accepted step and multiplied by increase on a rejected one,
    lsqnonlin-style (unit step, no line search).
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if pts is None:
        pts = build_point_set(spec)
    params = initialize(spec, n, init_style, lm_cfg.svd_tol_mass, pts=pts, explicit=explicit)
    lam = lm_cfg.lam0
    history: list[IterationRecord] = []
    current_loss = loss(params, pts)

    for k in range(1, max_iters + 1):
        residual, jac = _residual_jacobian(params, pts, lm_cfg.scope)
        wj = jac * pts.weights[:, None]
        M = jac.T @ wj
        M = np.tril(M) + np.tril(M, -1).T
        g = jac.T @ (pts.weights * residual)

        accepted = False
        for _ in range(lm_cfg.max_adjust):
            delta = shifted_solve(M, g, lam)
            if lm_cfg.scope == "nonlinear_only":
                trial = params.with_hidden(
                    params.hidden_matrix - delta.reshape(params.n, params.d + 1)
                )
            else:
                nc = params.n + 1
                trial = params.with_linear(params.c_hat - delta[:nc]).with_hidden(
                    params.hidden_matrix - delta[nc:].reshape(params.n, params.d + 1)
                )
            trial_loss = loss(trial, pts)
            if trial_loss < current_loss:
                params, current_loss = trial, trial_loss
                lam = max(lam * lm_cfg.decrease, lm_cfg.lam_min)
                accepted = True
                break
            lam *= lm_cfg.increase
            if lam > lm_cfg.lam_max:
                break

        mass_rank = 0
        if lm_cfg.scope == "nonlinear_only":
            A, f = assemble_mass(params, pts)
            mass_report = _solve_mass(A, f, lm_cfg.svd_tol_mass)
            refreshed = params.with_linear(mass_report.solution)
            refreshed_loss = loss(refreshed, pts)
            # same guard as the main iteration: the refresh is a minimizer
            # in exact arithmetic, so never let truncation raise the loss
            if refreshed_loss <= current_loss:
                params, current_loss = refreshed, refreshed_loss
            mass_rank = mass_report.numerical_rank

        history.append(
            IterationRecord(
                k=k,
                loss=current_loss,
                gamma=1.0 if accepted else 0.0,
                active_count=params.n,
                mass_rank=mass_rank,
                gn_rank=M.shape[0],
            )
        )
        if lam > lm_cfg.lam_max:
            logger.warning("LM shift overflowed (lambda=%.3g) at iteration %d; stopping", lam, k)
            break
    return params, history


def history_to_csv(history, path) -> None:
    """Write a loss curve as CSV: iter,loss,gamma,active_count,mass_rank,gn_rank."""
    with open(path, "w", newline="") as fh:
        fh.write("iter,loss,gamma,active_count,mass_rank,gn_rank\n")
        for r in history:
            fh.write(
                f"{r.k},{r.loss!r},{r.gamma!r},{r.active_count},{r.mass_rank},{r.gn_rank}\n"
            )
