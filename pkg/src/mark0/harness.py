"""Seeded runs, ensembles and (dc, dzeta) phase-diagram sweeps.

Randomness: run ``seed`` drives one Philox stream that is used for the
initial condition, the warm-up and the months after it.  A shocked run and
its no-shock twin fork from the same warmed-up state and draw the same
numbers month by month, so their ratio isolates the effect of the shock.
The stream depends on the seed only, never on the grid cell, so any
sub-grid of a sweep reproduces the corresponding cells of the full sweep.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from mark0 import core
from mark0.core import EconomyState
from mark0.metrics import (
    RunSeries,
    SeriesRecorder,
    ShapeLabel,
    ShapeThresholds,
    classify_shape,
    crisis_probability,
    peak_unemployment,
    relative_output,
    shape_fractions,
)
from mark0.params import EconomyParams
from mark0.scenario import PolicySpec, ScenarioSpec, ShockSchedule, inputs_at

log = logging.getLogger(__name__)

PHASE_COLUMNS = (
    "dc_rel",
    "dzeta_rel",
    "T_months",
    "n_runs",
    "p_L",
    "peak_u_during_mean",
    "peak_u_after_mean",
)
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class RunConfig:
    warmup: int = 300
    # months simulated after the final lockdown window closes
    horizon: int = 180
    thresholds: ShapeThresholds = ShapeThresholds()

    def validate(self) -> None:
        if self.warmup < 0 or self.horizon < 1:
            raise ValueError("warmup must be >= 0 and horizon >= 1")


@dataclass(frozen=True)
class Profile:
    n_firms: int
    runs_per_cell: int


PROFILES = {
    "desk": Profile(n_firms=1_000, runs_per_cell=100),
    "full": Profile(n_firms=10_000, runs_per_cell=500),
}


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def warm_state(params: EconomyParams, seed: int, warmup: int) -> EconomyState:
    """Initial condition plus ``warmup`` baseline months."""
    st = core.initial_state(params, make_rng(seed))
    for _ in range(warmup):
        core.step(st, params.c0, params.zeta, params.theta)
    st.t = 0
    return st


def simulate(state: EconomyState, scenario: ScenarioSpec, months: int) -> RunSeries:
    """Advance ``state`` in place through months 0..months-1 of the scenario."""
    p = state.params
    rec = SeriesRecorder()
    for t in range(months):
        c_t, z_t, theta, kappa = inputs_at(scenario, t, p.c0, p.zeta)
        core.step(state, c_t, z_t, theta, kappa)
        rec.record(t, state)
    return rec.series()


def run_length(scenario: ScenarioSpec, cfg: RunConfig) -> int:
    return scenario.shock.end + cfg.horizon


def run_one(
    params: EconomyParams,
    scenario: ScenarioSpec,
    seed: int,
    warmup: int = 300,
    horizon: int = 180,
) -> RunSeries:
    params.validate()
    scenario.validate()
    st = warm_state(params, seed, warmup)
    return simulate(st, scenario, scenario.shock.end + horizon)


def run_pair(
    params: EconomyParams,
    scenario: ScenarioSpec,
    seed: int,
    cfg: RunConfig = RunConfig(),
) -> tuple[RunSeries, RunSeries]:
    """(shocked run, no-shock twin) from one shared warm-up."""
    params.validate()
    scenario.validate()
    st = warm_state(params, seed, cfg.warmup)
    twin = st.copy()
    n = run_length(scenario, cfg)
    return simulate(st, scenario, n), simulate(twin, ScenarioSpec(), n)


@dataclass(frozen=True)
class RunOutcome:
    seed: int
    shape: ShapeLabel
    peak_u_during: float
    peak_u_after: float


def outcome(
    seed: int,
    run: RunSeries,
    twin: RunSeries,
    scenario: ScenarioSpec,
    cfg: RunConfig,
) -> RunOutcome:
    end = scenario.shock.end
    rel = relative_output(run, twin)
    shape = classify_shape(rel, end, cfg.horizon, cfg.thresholds)
    if scenario.shock.windows:
        first = scenario.shock.windows[0][0]
        during = peak_unemployment(run, (first, end - 1))
    else:
        during = float("nan")
    after = peak_unemployment(run, (end, len(run) - 1))
    return RunOutcome(seed, shape, during, after)


@dataclass
class EnsembleResult:
    outcomes: list[RunOutcome]
    series: dict[int, tuple[RunSeries, RunSeries]] = field(default_factory=dict)

    @property
    def labels(self) -> list[str]:
        return [o.shape.label for o in self.outcomes]

    @property
    def p_L(self) -> float:
        return crisis_probability(self.labels)

    @property
    def fractions(self) -> dict[str, float]:
        return shape_fractions(self.labels)

    @property
    def peak_u_during_mean(self) -> float:
        return float(np.mean([o.peak_u_during for o in self.outcomes]))

    @property
    def peak_u_after_mean(self) -> float:
        return float(np.mean([o.peak_u_after for o in self.outcomes]))


class WarmCache:
    """Warmed-up states and twin series keyed by (seed, months).

    A sweep reuses both across all of its cells.
    """

    def __init__(self, params: EconomyParams, cfg: RunConfig) -> None:
        self.params = params
        self.cfg = cfg
        self._warm: dict[int, EconomyState] = {}
        self._twin: dict[tuple[int, int], RunSeries] = {}

    # cap on cached firm slots (seeds x n_firms) to bound memory
    max_slots = 5_000_000

    def state(self, seed: int) -> EconomyState:
        if seed in self._warm:
            return self._warm[seed].copy()
        st = warm_state(self.params, seed, self.cfg.warmup)
        if (len(self._warm) + 1) * self.params.n_firms <= self.max_slots:
            self._warm[seed] = st.copy()
        return st

    def twin(self, seed: int, months: int) -> RunSeries:
        key = (seed, months)
        if key not in self._twin:
            self._twin[key] = simulate(self.state(seed), ScenarioSpec(), months)
        return self._twin[key]


def _run_seed(args) -> tuple[RunOutcome, tuple[RunSeries, RunSeries] | None]:
    params, scenario, seed, cfg, keep, cache = args
    cache = cache or WarmCache(params, cfg)
    n = run_length(scenario, cfg)
    twin = cache.twin(seed, n)
    run = simulate(cache.state(seed), scenario, n)
    return outcome(seed, run, twin, scenario, cfg), ((run, twin) if keep else None)


def run_ensemble(
    params: EconomyParams,
    scenario: ScenarioSpec,
    seeds: Sequence[int],
    cfg: RunConfig = RunConfig(),
    keep_series: bool = False,
    workers: int = 1,
    cache: WarmCache | None = None,
) -> EnsembleResult:
    """Independent runs over ``seeds``, each compared with its own twin."""
    if not seeds:
        raise ValueError("need at least one seed")
    params.validate()
    scenario.validate()
    cfg.validate()
    if cache is None:
        cache = WarmCache(params, cfg)
    jobs = [(params, scenario, s, cfg, keep_series, cache if workers <= 1 else None) for s in seeds]
    results = []
    if workers <= 1:
        for job in jobs:
            try:
                results.append(_run_seed(job))
            except Exception as exc:
                raise RuntimeError(f"run with seed {job[2]} failed: {exc}") from exc
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for job, res in zip(jobs, pool.map(_run_seed, jobs)):
                results.append(res)
    out = EnsembleResult([r[0] for r in results])
    if keep_series:
        out.series = {r[0].seed: r[1] for r in results}
    return out


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepGrid:
    dc_values: tuple[float, ...]
    dzeta_values: tuple[float, ...]
    shock_length: int
    runs_per_cell: int = 100
    base_seed: int = 0
    policy: PolicySpec = PolicySpec()

    def __post_init__(self) -> None:
        object.__setattr__(self, "dc_values", tuple(float(x) for x in self.dc_values))
        object.__setattr__(self, "dzeta_values", tuple(float(x) for x in self.dzeta_values))

    def validate(self) -> None:
        if self.runs_per_cell < 1:
            raise ValueError("runs_per_cell must be >= 1")
        if self.shock_length < 1:
            raise ValueError("shock_length must be >= 1")
        for v in self.dc_values + self.dzeta_values:
            if not 0.0 <= v < 1.0:
                raise ValueError("grid values must lie in [0, 1)")
        if not self.dc_values or not self.dzeta_values:
            raise ValueError("grid axes must be non-empty")
        self.policy.validate()

    @property
    def seeds(self) -> list[int]:
        return list(range(self.base_seed, self.base_seed + self.runs_per_cell))

    def cells(self) -> list[tuple[float, float]]:
        return [(dc, dz) for dc in self.dc_values for dz in self.dzeta_values]

    def scenario(self, dc: float, dz: float) -> ScenarioSpec:
        return ScenarioSpec(ShockSchedule.single(dc, dz, self.shock_length), self.policy)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["dc_values"] = list(self.dc_values)
        d["dzeta_values"] = list(self.dzeta_values)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SweepGrid":
        d = dict(d)
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise KeyError(f"unknown grid key(s): {sorted(unknown)}")
        if "policy" in d and isinstance(d["policy"], dict):
            d["policy"] = PolicySpec.from_dict(d["policy"])
        g = cls(**d)
        g.validate()
        return g


@dataclass(frozen=True)
class PhaseCell:
    dc_rel: float
    dzeta_rel: float
    T_months: int
    n_runs: int
    p_L: float
    peak_u_during_mean: float
    peak_u_after_mean: float
    peak_u_during_max: float
    peak_u_after_max: float

    def row(self) -> list[str]:
        return [repr(self.dc_rel), repr(self.dzeta_rel), str(self.T_months), str(self.n_runs)] + [
            repr(float(x)) for x in (self.p_L, self.peak_u_during_mean, self.peak_u_after_mean)
        ]


@dataclass
class PhaseDiagram:
    grid: SweepGrid
    cells: list[PhaseCell]

    def cell(self, dc: float, dz: float) -> PhaseCell:
        for c in self.cells:
            if c.dc_rel == dc and c.dzeta_rel == dz:
                return c
        raise KeyError((dc, dz))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(PHASE_COLUMNS)
        for c in self.cells:
            w.writerow(c.row())
        return buf.getvalue()


def sweep_cell(
    params: EconomyParams,
    grid: SweepGrid,
    dc: float,
    dz: float,
    cfg: RunConfig = RunConfig(),
    cache: WarmCache | None = None,
    workers: int = 1,
) -> PhaseCell:
    ens = run_ensemble(params, grid.scenario(dc, dz), grid.seeds, cfg, workers=workers, cache=cache)
    during = [o.peak_u_during for o in ens.outcomes]
    after = [o.peak_u_after for o in ens.outcomes]
    return PhaseCell(
        dc_rel=dc,
        dzeta_rel=dz,
        T_months=grid.shock_length,
        n_runs=len(ens.outcomes),
        p_L=ens.p_L,
        peak_u_during_mean=float(np.mean(during)),
        peak_u_after_mean=float(np.mean(after)),
        peak_u_during_max=float(np.max(during)),
        peak_u_after_max=float(np.max(after)),
    )


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def sweep(
    grid: SweepGrid,
    params: EconomyParams,
    cfg: RunConfig = RunConfig(),
    out_dir: str | Path | None = None,
    resume: bool = False,
    workers: int = 1,
    extra_manifest: dict[str, Any] | None = None,
    max_cells: int | None = None,
    cache: WarmCache | None = None,
) -> PhaseDiagram:
    """Compute every cell of ``grid`` in row-major (dc, dzeta) order.

    With ``out_dir`` each finished cell is written to ``manifest.json``
    before the next one starts, so an interrupted sweep can continue with
    ``resume=True``.  ``max_cells`` stops after that many new cells, which
    is how tests simulate an interruption.  Warm-ups and no-shock twins come
    from ``cache``, or from a fresh :class:`WarmCache` shared by all cells.
    """
    grid.validate()
    params.validate()
    cfg.validate()
    manifest_path = Path(out_dir) / "manifest.json" if out_dir is not None else None
    done: dict[tuple[float, float], PhaseCell] = {}
    if manifest_path is not None and resume and manifest_path.exists():
        old = json.loads(manifest_path.read_text(encoding="utf-8"))
        if old.get("grid") != grid.to_dict() or old.get("params") != params.to_dict():
            raise ValueError("manifest in output directory belongs to a different sweep")
        for c in old.get("completed_cells", []):
            cell = PhaseCell(**c)
            done[(cell.dc_rel, cell.dzeta_rel)] = cell

    manifest: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "code_version": _code_version(),
        "params": params.to_dict(),
        "grid": grid.to_dict(),
        "run": {"warmup": cfg.warmup, "horizon": cfg.horizon, "thresholds": asdict(cfg.thresholds)},
        "seeds": grid.seeds,
        "columns": list(PHASE_COLUMNS),
        "complete": False,
        "completed_cells": [],
    }
    if extra_manifest:
        manifest.update(extra_manifest)

    def persist() -> None:
        if manifest_path is None:
            return
        manifest["completed_cells"] = [asdict(c) for c in _ordered(grid, done)]
        _write_atomic(manifest_path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")

    if manifest_path is not None:
        manifest_path.parent.mkdir(parents=True, exist_ok=True)
        persist()

    if cache is None and workers <= 1:
        cache = WarmCache(params, cfg)
    new = 0
    for dc, dz in grid.cells():
        if (dc, dz) in done:
            continue
        if max_cells is not None and new >= max_cells:
            log.info("stopping after %d new cells", new)
            return PhaseDiagram(grid, _ordered(grid, done))
        log.info("cell dc=%.3f dzeta=%.3f", dc, dz)
        done[(dc, dz)] = sweep_cell(params, grid, dc, dz, cfg, cache=cache, workers=workers)
        new += 1
        persist()

    diagram = PhaseDiagram(grid, _ordered(grid, done))
    if manifest_path is not None:
        _write_atomic(manifest_path.parent / "phase_diagram.csv", diagram.to_csv())
        manifest["complete"] = True
        persist()
    return diagram


def _ordered(grid: SweepGrid, done: dict[tuple[float, float], PhaseCell]) -> list[PhaseCell]:
    return [done[k] for k in grid.cells() if k in done]


def _code_version() -> str:
    try:
        from importlib.metadata import version

        return version("artifact")
    except Exception:
        return "unknown"


def params_for_profile(params: EconomyParams, profile: str) -> EconomyParams:
    return replace(params, n_firms=PROFILES[profile].n_firms)
