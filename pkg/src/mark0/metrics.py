"""Observables computed from monthly series: relative output, recovery
shapes, peak unemployment and crisis probabilities."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, fields
from typing import Iterable, Sequence

import numpy as np

from mark0.core import EconomyState

DASHBOARD_COLUMNS = (
    "t",
    "output",
    "u",
    "pi",
    "pi_ema",
    "pbar",
    "wbar",
    "S",
    "avg_phi",
    "bankruptcies",
    "rho_l",
    "rho_d",
    "theta",
    "c_t",
    "zeta_t",
)


@dataclass
class RunSeries:
    """One record per simulated month, stored column-wise."""

    t: np.ndarray
    output: np.ndarray
    u: np.ndarray
    pi: np.ndarray
    pi_ema: np.ndarray
    pbar: np.ndarray
    wbar: np.ndarray
    S: np.ndarray
    avg_phi: np.ndarray
    bankruptcies: np.ndarray
    rho_l: np.ndarray
    rho_d: np.ndarray
    theta: np.ndarray
    c_t: np.ndarray
    zeta_t: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(DASHBOARD_COLUMNS)
        cols = [getattr(self, name) for name in DASHBOARD_COLUMNS]
        for row in zip(*cols):
            w.writerow([_fmt(x) for x in row])
        return buf.getvalue()


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


class SeriesRecorder:
    """Collects one dashboard row per month from an evolving state."""

    def __init__(self) -> None:
        self._rows: list[tuple] = []

    def record(self, t: int, st: EconomyState) -> None:
        self._rows.append(
            (
                t,
                st.output,
                st.unemployment,
                st.inflation.instant_inflation,
                st.inflation.ema_inflation,
                st.inflation.avg_price,
                st.inflation.avg_wage,
                st.households.savings,
                st.avg_fragility,
                st.n_defaults,
                st.bank.loan_rate,
                st.bank.deposit_rate,
                st.theta,
                st.consumption_propensity,
                st.zeta,
            )
        )

    def series(self) -> RunSeries:
        if not self._rows:
            cols = [np.zeros(0) for _ in DASHBOARD_COLUMNS]
        else:
            cols = [np.array(c) for c in zip(*self._rows)]
        return RunSeries(*cols)


@dataclass(frozen=True)
class ShapeThresholds:
    recover: float = 0.95
    sustain: int = 6
    v_window: int = 12
    relapse: float = 0.90

    @classmethod
    def from_dict(cls, d: dict) -> "ShapeThresholds":
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise KeyError(f"unknown ShapeThresholds key(s): {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class ShapeLabel:
    label: str
    # months from the end of the shock to the first sustained recovery
    time_to_recovery: int | None
    trough: float
    relapses: int


def relative_output(run: RunSeries | np.ndarray, baseline: RunSeries | np.ndarray) -> np.ndarray:
    a = np.asarray(run.output if isinstance(run, RunSeries) else run, dtype=float)
    b = np.asarray(baseline.output if isinstance(baseline, RunSeries) else baseline, dtype=float)
    if a.shape != b.shape:
        raise ValueError("runs must have the same length")
    if np.any(b <= 0):
        raise ValueError("baseline output is zero in some month")
    return a / b


def _sustained(above: np.ndarray, sustain: int) -> np.ndarray:
    """ok[t] is True when above[t : t + sustain] is all True."""
    n = len(above)
    if n < sustain:
        return np.zeros(0, dtype=bool)
    run = np.convolve(above.astype(int), np.ones(sustain, dtype=int), mode="valid")
    return run == sustain


def classify_shape(
    rel: Sequence[float],
    shock_end: int,
    horizon: int,
    thresholds: ShapeThresholds = ShapeThresholds(),
) -> ShapeLabel:
    """Label a relative-output path V, U, W or L.

    ``rel[t]`` is month t counted from the shock start; the first
    ``shock_end + horizon`` months are used.  A month is recovered when it
    starts a stretch of ``sustain`` months at or above ``recover``.  The
    first recovery is searched from the first month below ``recover``.
    A path that recovers, falls below ``relapse`` and recovers again is W;
    one that never recovers, or relapses without recovering, is L.
    """
    th = thresholds
    rel = np.asarray(rel, dtype=float)
    n = shock_end + horizon
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if len(rel) < n:
        raise ValueError(f"series has {len(rel)} months, need {n}")
    rel = rel[:n]
    trough = float(rel.min())
    ok = _sustained(rel >= th.recover, th.sustain)
    below = np.flatnonzero(rel < th.recover)
    if below.size == 0:
        return ShapeLabel("V", 0, trough, 0)
    start = int(below[0])
    hits = np.flatnonzero(ok[start:])
    if hits.size == 0:
        return ShapeLabel("L", None, trough, 0)
    t_rec = start + int(hits[0])
    ttr = max(t_rec - shock_end, 0)

    relapses = 0
    recovered_again = True
    t = t_rec + th.sustain
    while t < n:
        drop = np.flatnonzero(rel[t:] < th.relapse)
        if drop.size == 0:
            break
        t_drop = t + int(drop[0])
        relapses += 1
        again = np.flatnonzero(ok[t_drop:])
        if again.size == 0:
            recovered_again = False
            break
        t = t_drop + int(again[0]) + th.sustain
    if relapses == 0:
        return ShapeLabel("V" if ttr <= th.v_window else "U", ttr, trough, 0)
    if not recovered_again:
        return ShapeLabel("L", ttr, trough, relapses)
    return ShapeLabel("W", ttr, trough, relapses)


def peak_unemployment(u: RunSeries | Sequence[float], window: tuple[int, int]) -> float:
    """Maximum of u over months ``window[0] .. window[1]`` inclusive."""
    arr = np.asarray(u.u if isinstance(u, RunSeries) else u, dtype=float)
    a, b = window
    seg = arr[max(a, 0) : b + 1]
    if seg.size == 0 or a > b:
        raise ValueError(f"empty window {window}")
    return float(seg.max())


def crisis_probability(labels: Iterable[ShapeLabel | str]) -> float:
    names = [x.label if isinstance(x, ShapeLabel) else x for x in labels]
    if not names:
        raise ValueError("empty ensemble")
    return sum(1 for x in names if x == "L") / len(names)


def shape_fractions(labels: Iterable[ShapeLabel | str]) -> dict[str, float]:
    names = [x.label if isinstance(x, ShapeLabel) else x for x in labels]
    if not names:
        raise ValueError("empty ensemble")
    return {k: sum(1 for x in names if x == k) / len(names) for k in "VUWL"}


def annualized_inflation(pi: Sequence[float]) -> float:
    """Mean monthly inflation times 12."""
    pi = np.asarray(pi, dtype=float)
    return 12.0 * float(pi.mean()) if pi.size else float("nan")
