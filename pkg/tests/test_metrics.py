import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mark0.metrics import (
    ShapeLabel,
    ShapeThresholds,
    annualized_inflation,
    classify_shape,
    crisis_probability,
    peak_unemployment,
    relative_output,
    shape_fractions,
)


def path(*segments):
    out = []
    for value, months in segments:
        out += [value] * months
    return np.array(out)


def test_relative_output_examples():
    y = np.linspace(1, 2, 10)
    assert (relative_output(y, y) == 1.0).all()
    np.testing.assert_allclose(relative_output(0.4 * y, y), 0.4)
    with pytest.raises(ValueError):
        relative_output([1.0], [0.0])


def test_classify_examples():
    assert classify_shape(np.ones(200), 6, 180) == ShapeLabel("V", 0, 1.0, 0)
    assert classify_shape(path((1.0, 3), (0.4, 200)), 6, 180).label == "L"
    w = classify_shape(path((0.8, 8), (1.0, 22), (0.85, 6), (1.0, 200)), 6, 180)
    assert w.label == "W" and w.relapses == 1 and w.time_to_recovery == 2


def test_u_shape():
    lab = classify_shape(path((0.8, 30), (1.0, 200)), 6, 180)
    assert lab.label == "U" and lab.time_to_recovery == 24


def test_relapse_without_recovery_is_l():
    lab = classify_shape(path((0.8, 6), (1.0, 20), (0.5, 200)), 6, 180)
    assert lab.label == "L" and lab.relapses == 1


def test_recovery_needs_sustained_stretch():
    # 5 good months do not count, the 6-month stretch comes later
    lab = classify_shape(path((0.8, 6), (1.0, 5), (0.93, 10), (1.0, 200)), 6, 180)
    assert lab.label == "U" and lab.time_to_recovery == 15


def test_short_series_rejected():
    with pytest.raises(ValueError):
        classify_shape(np.ones(50), 6, 180)


rel_paths = st.lists(st.floats(0.0, 1.2), min_size=40, max_size=40)


@given(rel_paths, st.floats(0.01, 100))
def test_shape_invariant_under_rescaling(rel, k):
    base = np.linspace(1, 3, 40)
    run = np.array(rel) * base
    a = classify_shape(relative_output(run, base), 4, 36)
    b = classify_shape(relative_output(k * run, k * base), 4, 36)
    assert a.label == b.label and a.time_to_recovery == b.time_to_recovery


@given(rel_paths, st.floats(0.5, 0.9))
def test_lowering_relapse_threshold_never_creates_w(rel, lower):
    hi = classify_shape(rel, 4, 36, ShapeThresholds(relapse=0.9))
    lo = classify_shape(rel, 4, 36, ShapeThresholds(relapse=lower))
    if hi.label != "W":
        assert lo.label != "W"


def test_peak_unemployment_examples():
    assert peak_unemployment(np.full(10, 0.05), (0, 9)) == 0.05
    assert peak_unemployment([0.02, 0.4, 0.1], (0, 2)) == 0.4
    with pytest.raises(ValueError):
        peak_unemployment([0.1, 0.2], (5, 9))


def test_crisis_probability_examples():
    assert crisis_probability(["V"] * 5) == 0.0
    assert crisis_probability(["L"] * 5) == 1.0
    with pytest.raises(ValueError):
        crisis_probability([])


@given(st.lists(st.sampled_from("VUWL"), min_size=1, max_size=50), st.randoms())
def test_crisis_probability_permutation(labels, rnd):
    p = crisis_probability(labels)
    shuffled = list(labels)
    rnd.shuffle(shuffled)
    assert 0.0 <= p <= 1.0 and crisis_probability(shuffled) == p
    assert sum(shape_fractions(labels).values()) == pytest.approx(1.0)


def test_annualized_inflation():
    assert annualized_inflation([0.001] * 12) == pytest.approx(0.012)
