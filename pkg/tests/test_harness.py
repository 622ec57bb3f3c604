import numpy as np
import pytest

from mark0.harness import (
    RunConfig,
    SweepGrid,
    WarmCache,
    run_ensemble,
    run_one,
    run_pair,
    sweep,
)
from mark0.metrics import relative_output
from mark0.params import EconomyParams
from mark0.scenario import PolicySpec, ScenarioSpec, ShockSchedule

P = EconomyParams(n_firms=150)
CFG = RunConfig(warmup=60, horizon=30)


def test_same_seed_same_bytes():
    sc = ScenarioSpec(ShockSchedule.single(0.3, 0.1, 3))
    a = run_one(P, sc, 11, 40, 20).to_csv()
    b = run_one(P, sc, 11, 40, 20).to_csv()
    assert a == b
    assert a != run_one(P, sc, 12, 40, 20).to_csv()


def test_twin_matches_unshocked_run():
    sc = ScenarioSpec(ShockSchedule.single(0.3, 0.1, 3))
    run, twin = run_pair(P, sc, 3, CFG)
    plain = run_one(P, ScenarioSpec(), 3, CFG.warmup, len(twin))
    np.testing.assert_array_equal(twin.output, plain.output)
    assert len(run) == 3 + CFG.horizon
    assert relative_output(run, twin)[0] < 1.0


def test_single_seed_ensemble_aggregates():
    sc = ScenarioSpec(ShockSchedule.single(0.3, 0.1, 3))
    ens = run_ensemble(P, sc, [5], CFG)
    o = ens.outcomes[0]
    assert ens.peak_u_during_mean == o.peak_u_during
    assert ens.p_L == (1.0 if o.shape.label == "L" else 0.0)


def test_ensemble_uses_shared_cache_consistently():
    sc = ScenarioSpec(ShockSchedule.single(0.4, 0.2, 3), PolicySpec("naive"))
    fresh = run_ensemble(P, sc, [1, 2, 3], CFG)
    cache = WarmCache(P, CFG)
    run_ensemble(P, ScenarioSpec(ShockSchedule.single(0.1, 0.0, 3)), [1, 2, 3], CFG, cache=cache)
    cached = run_ensemble(P, sc, [1, 2, 3], CFG, cache=cache)
    assert fresh.outcomes == cached.outcomes


def test_ensemble_requires_seeds():
    with pytest.raises(ValueError):
        run_ensemble(P, ScenarioSpec(), [], CFG)


GRID = SweepGrid((0.2, 0.5), (0.0, 0.3), shock_length=3, runs_per_cell=3, base_seed=7)


def test_sweep_shape_and_order():
    d = sweep(GRID, P, CFG)
    assert [(c.dc_rel, c.dzeta_rel) for c in d.cells] == GRID.cells()
    assert all(0.0 <= c.p_L <= 1.0 for c in d.cells)
    assert d.to_csv().splitlines()[0] == "dc_rel,dzeta_rel,T_months,n_runs,p_L,peak_u_during_mean,peak_u_after_mean"


def test_subgrid_matches_full_grid():
    full = sweep(GRID, P, CFG)
    sub = sweep(SweepGrid((0.5,), (0.3,), 3, 3, 7), P, CFG)
    assert sub.cells[0] == full.cell(0.5, 0.3)


def test_one_cell_equals_ensemble():
    d = sweep(SweepGrid((0.5,), (0.3,), 3, 3, 7), P, CFG)
    ens = run_ensemble(P, GRID.scenario(0.5, 0.3), [7, 8, 9], CFG)
    assert d.cells[0].p_L == ens.p_L
    assert d.cells[0].peak_u_during_mean == ens.peak_u_during_mean


def test_resume_is_byte_identical(tmp_path):
    sweep(GRID, P, CFG, out_dir=tmp_path / "a")
    partial = sweep(GRID, P, CFG, out_dir=tmp_path / "b", max_cells=2)
    assert len(partial.cells) == 2
    assert not (tmp_path / "b" / "phase_diagram.csv").exists()
    sweep(GRID, P, CFG, out_dir=tmp_path / "b", resume=True)
    a = (tmp_path / "a" / "phase_diagram.csv").read_bytes()
    assert a == (tmp_path / "b" / "phase_diagram.csv").read_bytes()


def test_resume_rejects_foreign_manifest(tmp_path):
    sweep(GRID, P, CFG, out_dir=tmp_path, max_cells=1)
    other = SweepGrid((0.1,), (0.0,), 3, 3, 7)
    with pytest.raises(ValueError):
        sweep(other, P, CFG, out_dir=tmp_path, resume=True)


def test_grid_validation():
    with pytest.raises(ValueError):
        SweepGrid((1.2,), (0.0,), 3).validate()
    with pytest.raises(KeyError):
        SweepGrid.from_dict({"dc_values": [0.1], "dzeta_values": [0.0], "shock_length": 3, "x": 1})
