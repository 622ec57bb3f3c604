import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mark0 import core
from mark0.params import EconomyParams
from mark0.scenario import PolicySpec, ScenarioSpec, ShockSchedule, inputs_at, shock_at, theta_at


def test_single_window_examples():
    s = ShockSchedule.single(0.0, 0.1, 6)
    assert shock_at(s, 3, 0.5, 1.0) == pytest.approx((0.5, 0.9))
    assert shock_at(s, 6, 0.5, 1.0) == (0.5, 1.0)
    assert shock_at(s, -1, 0.5, 1.0) == (0.5, 1.0)


def test_dual_window_ramp():
    s = ShockSchedule(windows=((0, 3), (7, 10)), dc_rel=0.4, recovery_ramp=4)
    c_low = 0.5 * 0.6
    assert shock_at(s, 5, 0.5, 1.0)[0] == pytest.approx(c_low + 0.5 * (0.5 - c_low))
    assert shock_at(s, 3, 0.5, 1.0)[0] == pytest.approx(c_low)
    # the second window re-imposes the shock, the ramp after it ends on time
    assert shock_at(s, 7, 0.5, 1.0)[0] == pytest.approx(c_low)
    assert shock_at(s, 14, 0.5, 1.0)[0] == 0.5


def test_new_window_cuts_ramp_short():
    s = ShockSchedule(windows=((0, 3), (5, 8)), dc_rel=0.4, recovery_ramp=4)
    assert shock_at(s, 5, 0.5, 1.0)[0] == pytest.approx(0.3)


@given(
    st.floats(0, 0.9), st.floats(0, 0.9), st.integers(1, 12), st.integers(0, 6), st.integers(0, 40)
)
def test_shock_path_is_continuous_and_bounded(dc, dz, months, ramp, t):
    s = ShockSchedule(windows=((2, 2 + months),), dc_rel=dc, dzeta_rel=dz, recovery_ramp=ramp)
    c, z = shock_at(s, t, 0.5, 1.0)
    assert 0.5 * (1 - dc) - 1e-12 <= c <= 0.5 + 1e-12
    assert 1 - dz - 1e-12 <= z <= 1.0 + 1e-12
    assert shock_at(s, t, 0.5, 1.0) == (c, z)
    # consecutive months after the window differ by at most one ramp increment
    if t >= 2 + months and ramp:
        c2, _ = shock_at(s, t + 1, 0.5, 1.0)
        assert abs(c2 - c) <= 0.5 * dc / ramp + 1e-12
    if t >= 2 + months + ramp:
        assert (c, z) == (0.5, 1.0)


def test_schedule_validation():
    with pytest.raises(ValueError):
        ShockSchedule(windows=((0, 5), (3, 8))).validate()
    with pytest.raises(ValueError):
        ShockSchedule.single(1.0, 0.0, 3).validate()
    with pytest.raises(KeyError):
        ShockSchedule.from_dict({"months": 3, "bogus": 1})
    s = ShockSchedule.from_dict({"months": 6, "start": 2, "dc_rel": 0.3})
    assert s.windows == ((2, 8),) and s.end == 8
    assert ShockSchedule.from_dict(s.to_dict()) == s


def test_theta_examples():
    ad = PolicySpec("adaptive")
    assert theta_at(ad, 10, False, 6.0) == pytest.approx(7.5)
    assert theta_at(ad, 10, False, 2.0) == 3.0
    assert theta_at(PolicySpec("naive"), 1, True, 0.0) == math.inf
    assert theta_at(PolicySpec("naive"), 10, False, 9.0) == 3.0
    assert theta_at(PolicySpec("none"), 1, True, 9.0) == 3.0


@given(st.sampled_from(["none", "naive", "adaptive"]), st.floats(-5, 50))
def test_theta_never_below_baseline_after_shock(mode, phi):
    assert theta_at(PolicySpec(mode), 20, False, phi) >= 3.0


def test_helicopter_examples():
    s = core.initial_state(EconomyParams(n_firms=10), np.random.default_rng(0))
    s.households.savings, s.bank.total_money = 100.0, 0.0
    core.apply_helicopter(s, 1.5)
    assert (s.households.savings, s.bank.total_money) == (150.0, 50.0)
    s.households.savings, s.bank.total_money = 0.0, 0.0
    core.apply_helicopter(s, 1.5)
    assert (s.households.savings, s.bank.total_money) == (0.0, 0.0)


def test_two_drops_audit():
    s = core.initial_state(EconomyParams(n_firms=50), np.random.default_rng(1))
    m0 = s.bank.total_money
    added = 0.0
    for t in range(12):
        kappa = 1.5 if t in (3, 8) else None
        s_before = s.copy()
        core.step(s_before, 0.5, 1.0, 3.0)
        core.step(s, 0.5, 1.0, 3.0, kappa)
        if kappa:
            added += 0.5 * s_before.households.savings
        assert abs(s.money_residual()) < 1e-9 * max(1.0, s.households.savings)
    assert s.bank.total_money - m0 == pytest.approx(added, rel=1e-12)


def test_inputs_at_drop_month_and_adaptive():
    spec = ScenarioSpec(ShockSchedule.single(0.3, 0.5, 9), PolicySpec("adaptive", helicopter_kappa=1.5))
    assert inputs_at(spec, 8, 0.5, 1.0)[3] == 1.5
    assert inputs_at(spec, 9, 0.5, 1.0)[3] is None
    c, z, theta, _ = inputs_at(spec, 4, 0.5, 1.0)
    assert (c, z, theta) == pytest.approx((0.35, 0.5, math.inf))
    theta = inputs_at(spec, 9, 0.5, 1.0)[2]

    class Obs:
        avg_fragility = 6.0

    assert theta(Obs()) == pytest.approx(7.5)


def test_policy_validation():
    with pytest.raises(ValueError):
        PolicySpec("reckless").validate()
    with pytest.raises(ValueError):
        PolicySpec("naive", helicopter_kappa=0.9).validate()
    with pytest.raises(KeyError):
        PolicySpec.from_dict({"kappa": 1.5})
