"""Experiment driver.

Verbs:

    run <config.toml|config.json>   run a configured experiment
    preset <name> [--out DIR ...]   run a named built-in experiment
    sweep --ns 8,16,32 --out FILE   conditioning study CSV
    validate <config.toml>          check a config without running

Every run writes a per-iteration history CSV, the final parameters as
JSON, hyperplane snapshots, and a manifest JSON tying them together.
Exit codes: 0 success, 2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .linalg import BreakpointLayout, condition_reports_csv, condition_sweep
from .model import Domain, NetworkParams
from .optimizer import (
    IterationRecord,
    LMConfig,
    SgGNConfig,
    history_to_csv,
    initialize,
    run_lm,
    sggn_step,
)
from .problem import (
    ConfigError,
    ProblemSpec,
    _load_config_doc,
    build_point_set,
    builtin_target,
    problem_spec_from_dict,
)

__all__ = ["ExperimentConfig", "RunManifest", "main", "presets", "run_condition_sweep",
           "run_experiment"]


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to run one experiment."""

    name: str
    spec: ProblemSpec
    n: int
    init_style: str
    optimizer: str  # "sggn" | "lm"
    sggn: SgGNConfig | None = None
    lm: LMConfig | None = None
    max_iters: int | None = None  # LM iteration count (sggn carries its own)
    output_dir: str = "."
    snapshot_every: int = 10

    def __post_init__(self):
        if self.optimizer not in ("sggn", "lm"):
            raise ConfigError("optimizer", f"unknown optimizer {self.optimizer!r}")
        if self.optimizer == "sggn" and self.sggn is None:
            raise ConfigError("sggn", "missing settings for the sggn optimizer")
        if self.optimizer == "lm":
            if self.lm is None or self.max_iters is None:
                raise ConfigError("lm", "lm runs need lm settings and max_iters")
            if self.max_iters < 1:
                raise ConfigError("max_iters", "must be >= 1")
        if self.snapshot_every < 1:
            raise ConfigError("snapshot_every", "must be >= 1")

    def to_dict(self) -> dict:
        doc = {
            "name": self.name,
            "n": self.n,
            "init_style": self.init_style,
            "optimizer": self.optimizer,
            "output_dir": str(self.output_dir),
            "snapshot_every": self.snapshot_every,
            "domain": {
                "lower": self.spec.domain.lower.tolist(),
                "upper": self.spec.domain.upper.tolist(),
            },
            "sampling": (
                {"h": self.spec.h} if self.spec.h is not None
                else {"data_path": self.spec.data_path}
            ),
        }
        if self.spec.target is not None:
            doc["target"] = {
                "tag": self.spec.target.tag,
                "params": _jsonable(self.spec.target.params),
            }
        if self.sggn is not None:
            doc["sggn"] = asdict(self.sggn)
        if self.lm is not None:
            doc["lm"] = asdict(self.lm)
            doc["max_iters"] = self.max_iters
        return doc


@dataclass(frozen=True)
class RunManifest:
    """Paths and summary scalars of a finished experiment."""

    config: dict
    code_version: str
    wall_clock_seconds: float
    history_csv: str
    params_json: str
    snapshot_files: list[str]
    final_loss: float
    iterations: int
    best_loss: float
    best_iteration: int

    def to_dict(self) -> dict:
        return asdict(self)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, NetworkParams):
        return obj.to_dict()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if callable(obj):
        return repr(obj)
    return obj


def presets() -> dict[str, ExperimentConfig]:
    """The named experiments, fully configured and deterministic."""
    square = Domain([-1.0, -1.0], [1.0, 1.0])
    out = {}
    out["step1d"] = ExperimentConfig(
        name="step1d",
        spec=ProblemSpec(Domain([0.0], [10.0]), builtin_target("step1d"), h=0.01),
        n=30,
        init_style="uniform_1d",
        optimizer="sggn",
        sggn=SgGNConfig(max_iters=825),
    )
    out["delta1d"] = ExperimentConfig(
        name="delta1d",
        spec=ProblemSpec(Domain([-1.5], [1.5]), builtin_target("delta1d"), h=0.01),
        n=15,
        init_style="uniform_1d",
        optimizer="sggn",
        # The sharp peaks leave many neurons nearly redundant early on; a
        # meaningful coefficient threshold keeps them parked (and
        # reusable) instead of being flung out by the 1/c scaling.
        sggn=SgGNConfig(max_iters=334, eps_c=3e-2),
    )
    out["step2d"] = ExperimentConfig(
        name="step2d",
        spec=ProblemSpec(square, builtin_target("step2d"), h=0.01),
        n=4,
        init_style="horizontal_2d",
        optimizer="sggn",
        sggn=SgGNConfig(max_iters=142),
    )
    out["synthetic2d_h"] = ExperimentConfig(
        name="synthetic2d_h",
        spec=ProblemSpec(square, builtin_target("synthetic2d"), h=0.01),
        n=5,
        init_style="horizontal_2d",
        optimizer="sggn",
        sggn=SgGNConfig(max_iters=207),
    )
    out["synthetic2d_v"] = ExperimentConfig(
        name="synthetic2d_v",
        spec=ProblemSpec(square, builtin_target("synthetic2d"), h=0.01),
        n=5,
        init_style="vertical_2d",
        optimizer="sggn",
        sggn=SgGNConfig(max_iters=105),
    )
    out["lm_step1d"] = ExperimentConfig(
        name="lm_step1d",
        spec=ProblemSpec(Domain([0.0], [10.0]), builtin_target("step1d"), h=0.01),
        n=30,
        init_style="uniform_1d",
        optimizer="lm",
        lm=LMConfig(scope="nonlinear_only"),
        max_iters=825,
    )
    return out


def _snapshot_doc(params: NetworkParams, k: int) -> dict:
    if params.d == 1:
        points = [-nrn.b / nrn.omega[0] for nrn in params.neurons]
        return {"iter": k, "breakpoints": points}
    return {
        "iter": k,
        "lines": [{"b": nrn.b, "omega": nrn.omega.tolist()} for nrn in params.neurons],
    }


def run_experiment(config: ExperimentConfig) -> RunManifest:
    """Run the configured optimizer and write all artifacts.

    Writes <out>/<name>_history.csv, <out>/<name>_params.json,
    <out>/<name>_snapshots/iter_XXXXXX.json, and <out>/<name>_manifest.json.
    """
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    snap_dir = out_dir / f"{config.name}_snapshots"
    snap_dir.mkdir(exist_ok=True)

    t0 = time.perf_counter()
    pts = build_point_set(config.spec)
    snapshots: list[str] = []

    def take_snapshot(params, k):
        path = snap_dir / f"iter_{k:06d}.json"
        with open(path, "w") as fh:
            json.dump(_snapshot_doc(params, k), fh, indent=1)
        snapshots.append(str(path))

    if config.optimizer == "sggn":
        cfg = config.sggn
        params = initialize(config.spec, config.n, config.init_style,
                            cfg.svd_tol_mass, pts=pts)
        take_snapshot(params, 0)
        history: list[IterationRecord] = []
        for k in range(1, cfg.max_iters + 1):
            params, record = sggn_step(params, pts, cfg, k=k)
            history.append(record)
            if k % config.snapshot_every == 0:
                take_snapshot(params, k)
            if cfg.stop_loss is not None and record.loss <= cfg.stop_loss:
                break
        if history and history[-1].k % config.snapshot_every != 0:
            take_snapshot(params, history[-1].k)
    else:
        params, history = run_lm(config.spec, config.n, config.init_style,
                                 config.lm, config.max_iters, pts=pts)
        take_snapshot(params, history[-1].k if history else 0)

    if not np.isfinite([r.loss for r in history]).all():
        raise FloatingPointError("non-finite loss encountered during the run")

    history_path = out_dir / f"{config.name}_history.csv"
    history_to_csv(history, history_path)
    params_path = out_dir / f"{config.name}_params.json"
    with open(params_path, "w") as fh:
        fh.write(params.to_json(indent=1))

    best = min(history, key=lambda r: r.loss)
    manifest = RunManifest(
        config=config.to_dict(),
        code_version=__version__,
        wall_clock_seconds=time.perf_counter() - t0,
        history_csv=str(history_path),
        params_json=str(params_path),
        snapshot_files=snapshots,
        final_loss=history[-1].loss,
        iterations=history[-1].k,
        best_loss=best.loss,
        best_iteration=best.k,
    )
    manifest_path = out_dir / f"{config.name}_manifest.json"
    with open(manifest_path, "w") as fh:
        json.dump(manifest.to_dict(), fh, indent=1)
    return manifest


def run_condition_sweep(n_list, out_path, layout: BreakpointLayout | None = None) -> str:
    """Run the conditioning study and write its CSV."""
    reports = condition_sweep(n_list, layout)
    condition_reports_csv(reports, out_path)
    return str(out_path)


def experiment_config_from_dict(doc: dict, name: str = "custom") -> ExperimentConfig:
    """Build an ExperimentConfig from a parsed config document."""
    spec = problem_spec_from_dict(doc)
    for field_name in ("n", "init_style", "optimizer"):
        if field_name not in doc:
            raise ConfigError(field_name, "missing")
    optimizer = doc["optimizer"]
    sggn_cfg = None
    lm_cfg = None
    max_iters = doc.get("max_iters")
    try:
        if optimizer == "sggn":
            sggn_doc = dict(doc.get("sggn", {}))
            if max_iters is not None:
                sggn_doc.setdefault("max_iters", max_iters)
            sggn_cfg = SgGNConfig(**sggn_doc)
        elif optimizer == "lm":
            lm_cfg = LMConfig(**doc.get("lm", {}))
            if max_iters is None:
                raise ConfigError("max_iters", "required for lm runs")
    except TypeError as exc:
        raise ConfigError(optimizer, f"bad option: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(optimizer, str(exc)) from exc
    return ExperimentConfig(
        name=doc.get("name", name),
        spec=spec,
        n=int(doc["n"]),
        init_style=doc["init_style"],
        optimizer=optimizer,
        sggn=sggn_cfg,
        lm=lm_cfg,
        max_iters=max_iters,
        output_dir=doc.get("output_dir", "."),
        snapshot_every=int(doc.get("snapshot_every", 10)),
    )


def load_experiment_config(path) -> ExperimentConfig:
    doc = _load_config_doc(path)
    return experiment_config_from_dict(doc, name=Path(path).stem)


def _apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    if args.out is not None:
        config = replace(config, output_dir=args.out)
    if config.optimizer == "sggn":
        cfg = config.sggn
        if args.iters is not None:
            cfg = replace(cfg, max_iters=args.iters)
        if args.eps_c is not None:
            cfg = replace(cfg, eps_c=args.eps_c)
        if args.svd_tol_mass is not None:
            cfg = replace(cfg, svd_tol_mass=args.svd_tol_mass)
        if args.svd_tol_gn is not None:
            cfg = replace(cfg, svd_tol_gn=args.svd_tol_gn)
        config = replace(config, sggn=cfg)
    else:
        lm = config.lm
        if args.iters is not None:
            config = replace(config, max_iters=args.iters)
        if args.svd_tol_mass is not None:
            lm = replace(lm, svd_tol_mass=args.svd_tol_mass)
        if getattr(args, "lm_scope", None):
            lm = replace(lm, scope=args.lm_scope)
        config = replace(config, lm=lm)
    return config


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sggn",
        description="Structure-guided Gauss-Newton training of shallow ReLU networks.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a TOML/JSON config")
    p_run.add_argument("config", help="path to config file")
    p_run.add_argument("--out", default=None, help="override output directory")

    p_preset = sub.add_parser("preset", help="run a named built-in experiment")
    p_preset.add_argument("name", help="preset name (see --list)")
    p_preset.add_argument("--list", action="store_true", help="list preset names and exit")
    p_preset.add_argument("--out", default=None, help="output directory")
    p_preset.add_argument("--iters", type=int, default=None, help="override iteration count")
    p_preset.add_argument("--eps-c", type=float, default=None, dest="eps_c")
    p_preset.add_argument("--svd-tol-mass", type=float, default=None, dest="svd_tol_mass")
    p_preset.add_argument("--svd-tol-gn", type=float, default=None, dest="svd_tol_gn")
    p_preset.add_argument("--lm-scope", choices=("nonlinear_only", "full"), default=None,
                          dest="lm_scope", help="LM scope for lm presets")

    p_sweep = sub.add_parser("sweep", help="condition-number sweep")
    p_sweep.add_argument("--ns", default="8,16,32,64,128",
                         help="comma-separated neuron counts")
    p_sweep.add_argument("--out", required=True, help="output CSV path")
    p_sweep.add_argument("--placement", choices=("uniform", "clustered"), default="uniform")

    p_val = sub.add_parser("validate", help="validate a config file")
    p_val.add_argument("config", help="path to config file")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.verb == "run":
            config = load_experiment_config(args.config)
            if args.out is not None:
                config = replace(config, output_dir=args.out)
            manifest = run_experiment(config)
            print(f"{config.name}: final loss {manifest.final_loss:.6e} "
                  f"after {manifest.iterations} iterations -> {manifest.history_csv}")
        elif args.verb == "preset":
            table = presets()
            if args.list:
                for key in table:
                    print(key)
                return 0
            if args.name not in table:
                raise ConfigError("preset", f"unknown preset {args.name!r}; "
                                  f"known: {', '.join(table)}")
            config = _apply_overrides(table[args.name], args)
            manifest = run_experiment(config)
            print(f"{config.name}: final loss {manifest.final_loss:.6e} "
                  f"after {manifest.iterations} iterations -> {manifest.history_csv}")
        elif args.verb == "sweep":
            try:
                ns = [int(tok) for tok in args.ns.split(",") if tok.strip()]
            except ValueError as exc:
                raise ConfigError("--ns", f"bad neuron count list: {exc}") from exc
            layout = BreakpointLayout(placement=args.placement)
            path = run_condition_sweep(ns, args.out, layout)
            print(f"wrote {path}")
        elif args.verb == "validate":
            config = load_experiment_config(args.config)
            print(f"ok: {config.name} ({config.optimizer}, n={config.n})")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (KeyError, FileNotFoundError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (np.linalg.LinAlgError, FloatingPointError, ValueError, AssertionError,
            RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
