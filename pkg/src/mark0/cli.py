"""Command line entry point: ``mark0 {baseline,run,sweep}``.

Each invocation writes into one output directory: CSV files, a summary or
phase-diagram table, and ``manifest.json`` holding the fully resolved
configuration.  A manifest can be passed back through ``--config`` to
repeat the invocation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from mark0.harness import (
    PROFILES,
    SCHEMA_VERSION,
    RunConfig,
    SweepGrid,
    _code_version,
    run_ensemble,
    run_one,
    sweep,
)
from mark0.metrics import ShapeThresholds, annualized_inflation, relative_output
from mark0.params import EconomyParams
from mark0.scenario import PolicySpec, ScenarioSpec, ShockSchedule

log = logging.getLogger("mark0")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3
SECTIONS = ("params", "shock", "policy", "run", "grid", "shape")
RUN_KEYS = ("warmup", "horizon", "months", "seeds", "out", "profile", "workers")


class ConfigError(Exception):
    pass


@dataclass
class Config:
    params: EconomyParams = field(default_factory=EconomyParams)
    shock: ShockSchedule = field(default_factory=ShockSchedule)
    policy: PolicySpec = field(default_factory=PolicySpec)
    run: dict[str, Any] = field(default_factory=dict)
    grid: SweepGrid | None = None
    shape: ShapeThresholds = field(default_factory=ShapeThresholds)
    has_shock: bool = False

    @property
    def scenario(self) -> ScenarioSpec:
        return ScenarioSpec(self.shock, self.policy)

    @property
    def run_config(self) -> RunConfig:
        return RunConfig(warmup=self.run["warmup"], horizon=self.run["horizon"], thresholds=self.shape)

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "params": self.params.to_dict(),
            "policy": {k: v for k, v in self.policy.to_dict().items() if v is not None},
            "run": dict(self.run),
            "shape": asdict(self.shape),
        }
        if self.has_shock:
            d["shock"] = self.shock.to_dict()
        if self.grid is not None:
            g = self.grid.to_dict()
            g.pop("policy")
            d["grid"] = g
        return d


def parse_seeds(text: str) -> list[int]:
    """``"7"`` -> [7]; ``"0..4"`` -> [0, 1, 2, 3, 4] (inclusive)."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(text)]
    except ValueError:
        raise ConfigError(f"bad seed specification {text!r}") from None


def load_document(path: str | None) -> dict[str, Any]:
    if path is None:
        return {}
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        if p.suffix == ".json":
            doc = json.loads(raw.decode("utf-8"))
            # a manifest carries the resolved config under "config"
            doc = doc.get("config", doc)
        else:
            doc = tomllib.loads(raw.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a table")
    return doc


def build_config(doc: dict[str, Any], args: argparse.Namespace | None = None) -> Config:
    """Resolve a config document plus command-line overrides."""
    unknown = set(doc) - set(SECTIONS)
    if unknown:
        raise ConfigError(f"unknown section(s): {sorted(unknown)}")
    try:
        run = dict(doc.get("run", {}))
        bad = set(run) - set(RUN_KEYS)
        if bad:
            raise KeyError(f"unknown run key(s): {sorted(bad)}")
        if args is not None:
            if getattr(args, "profile", None):
                run["profile"] = args.profile
            if getattr(args, "seed", None) is not None:
                run["seeds"] = [args.seed]
            if getattr(args, "seeds", None):
                run["seeds"] = parse_seeds(args.seeds)
            if getattr(args, "out", None):
                run["out"] = args.out
            if getattr(args, "workers", None):
                run["workers"] = args.workers
        profile = run.get("profile")
        if profile is not None and profile not in PROFILES:
            raise ValueError(f"profile must be one of {sorted(PROFILES)}")

        pdict = dict(doc.get("params", {}))
        if profile is not None and "n_firms" not in pdict:
            pdict["n_firms"] = PROFILES[profile].n_firms
        params = EconomyParams.from_dict(pdict)

        seeds = run.get("seeds", [0])
        if isinstance(seeds, str):
            seeds = parse_seeds(seeds)
        if isinstance(seeds, int) or not seeds or not all(isinstance(s, int) for s in seeds):
            raise ValueError("run.seeds must be a non-empty list of integers or 'N..M'")
        run["seeds"] = list(seeds)
        run.setdefault("warmup", 300)
        run.setdefault("horizon", 180)
        run.setdefault("months", 600)
        run.setdefault("workers", 1)
        for k in ("warmup", "horizon", "months", "workers"):
            if not isinstance(run[k], int) or run[k] < 0:
                raise ValueError(f"run.{k} must be a non-negative integer")

        has_shock = bool(doc.get("shock"))
        shock = ShockSchedule.from_dict(doc.get("shock", {}))
        policy = PolicySpec.from_dict(doc.get("policy", {}))
        shape = ShapeThresholds.from_dict(doc.get("shape", {}))

        grid = None
        if "grid" in doc:
            gdict = dict(doc["grid"])
            if profile is not None and "runs_per_cell" not in gdict:
                gdict["runs_per_cell"] = PROFILES[profile].runs_per_cell
            if "policy" in gdict:
                raise KeyError("put the sweep policy in the [policy] section")
            grid = SweepGrid.from_dict({**gdict, "policy": policy})
        cfg = Config(params, shock, policy, run, grid, shape, has_shock)
        cfg.run_config.validate()
        cfg.scenario.validate()
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def _manifest(cfg: Config, command: str, files: list[str]) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "code_version": _code_version(),
        "command": command,
        "config": cfg.to_dict(),
        "files": sorted(files),
    }


def _prepare_out(cfg: Config) -> Path:
    out = Path(cfg.run.get("out", "out"))
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise RuntimeError(f"output directory {out} is not writable: {exc}") from exc
    return out


def _write(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def cmd_baseline(cfg: Config) -> int:
    if cfg.has_shock and cfg.shock.windows:
        raise ConfigError("baseline takes no shock windows; use `run`")
    out = _prepare_out(cfg)
    files, per_seed = [], {}
    for seed in cfg.run["seeds"]:
        series = run_one(cfg.params, ScenarioSpec(), seed, cfg.run["warmup"], cfg.run["months"])
        name = f"dashboard_seed{seed}.csv"
        _write(out / name, series.to_csv())
        files.append(name)
        per_seed[str(seed)] = {
            "mean_u": float(series.u.mean()),
            "annual_inflation": annualized_inflation(series.pi),
            "mean_avg_phi": float(series.avg_phi.mean()),
            "bankruptcies": int(series.bankruptcies.sum()),
        }
    keys = ("mean_u", "annual_inflation", "mean_avg_phi")
    summary = {
        "per_seed": per_seed,
        "median": {k: float(np.median([v[k] for v in per_seed.values()])) for k in keys},
    }
    _write(out / "summary.json", _dump(summary))
    files.append("summary.json")
    _write(out / "manifest.json", _dump(_manifest(cfg, "baseline", files)))
    return EXIT_OK


def _relative_csv(run, twin) -> str:
    rel = relative_output(run, twin)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("t", "output", "baseline_output", "relative_output"))
    for t, a, b, r in zip(run.t, run.output, twin.output, rel):
        w.writerow((int(t), repr(float(a)), repr(float(b)), repr(float(r))))
    return buf.getvalue()


def cmd_run(cfg: Config) -> int:
    if not cfg.shock.windows:
        raise ConfigError("run needs a [shock] section with at least one window")
    out = _prepare_out(cfg)
    ens = run_ensemble(
        cfg.params,
        cfg.scenario,
        cfg.run["seeds"],
        cfg.run_config,
        keep_series=True,
        workers=cfg.run["workers"],
    )
    files = []
    per_seed = {}
    for o in ens.outcomes:
        run, twin = ens.series[o.seed]
        for name, text in (
            (f"dashboard_seed{o.seed}.csv", run.to_csv()),
            (f"relative_output_seed{o.seed}.csv", _relative_csv(run, twin)),
        ):
            _write(out / name, text)
            files.append(name)
        per_seed[str(o.seed)] = {
            "shape": o.shape.label,
            "time_to_recovery": o.shape.time_to_recovery,
            "trough": o.shape.trough,
            "relapses": o.shape.relapses,
            "peak_u_during": o.peak_u_during,
            "peak_u_after": o.peak_u_after,
        }
    summary = {
        "per_seed": per_seed,
        "shape_fractions": ens.fractions,
        "p_L": ens.p_L,
        "peak_u_during_mean": ens.peak_u_during_mean,
        "peak_u_after_mean": ens.peak_u_after_mean,
    }
    _write(out / "summary.json", _dump(summary))
    files.append("summary.json")
    _write(out / "manifest.json", _dump(_manifest(cfg, "run", files)))
    return EXIT_OK


def cmd_sweep(cfg: Config, resume: bool = False, max_cells: int | None = None) -> int:
    if cfg.grid is None:
        raise ConfigError("sweep needs a [grid] section")
    out = _prepare_out(cfg)
    extra = _manifest(cfg, "sweep", ["phase_diagram.csv"])
    try:
        sweep(
            cfg.grid,
            cfg.params,
            cfg.run_config,
            out_dir=out,
            resume=resume,
            workers=cfg.run["workers"],
            extra_manifest=extra,
            max_cells=max_cells,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mark0", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, text in (
        ("baseline", "no-shock economy: dashboard and summary statistics"),
        ("run", "shocked runs with a no-shock twin: dashboards and recovery shapes"),
        ("sweep", "phase diagram over a (dc, dzeta) grid"),
    ):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", help="TOML config or JSON manifest")
        seeds = sp.add_mutually_exclusive_group()
        seeds.add_argument("--seed", type=int)
        seeds.add_argument("--seeds", help="inclusive range N..M")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--profile", choices=sorted(PROFILES))
        sp.add_argument("--workers", type=int, help="worker processes")
        sp.add_argument("-v", "--verbose", action="store_true")
        if name == "sweep":
            sp.add_argument("--resume", action="store_true", help="continue from the manifest in --out")
            sp.add_argument("--max-cells", type=int, help=argparse.SUPPRESS)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = build_config(load_document(args.config), args)
        if args.command == "baseline":
            return cmd_baseline(cfg)
        if args.command == "run":
            return cmd_run(cfg)
        return cmd_sweep(cfg, resume=args.resume, max_cells=args.max_cells)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        log.error("runtime error: %s", exc)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
