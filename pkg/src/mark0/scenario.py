"""Shock schedules and policy rules as pure functions of the month index.

Month 0 is the first month of the first lockdown window; the warm-up runs
before it with baseline values throughout.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from typing import Any

from mark0.core import apply_helicopter

CREDIT_MODES = ("none", "naive", "adaptive")


@dataclass(frozen=True)
class ShockSchedule:
    """Lockdown windows ``[start, end)`` during which c and zeta are cut.

    Inside a window c_t = c0 (1 - dc_rel) and zeta_t = zeta (1 - dzeta_rel).
    After a window closes both return linearly to baseline over
    ``recovery_ramp`` months.
    """

    windows: tuple[tuple[int, int], ...] = ()
    dc_rel: float = 0.0
    dzeta_rel: float = 0.0
    recovery_ramp: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "windows", tuple((int(a), int(b)) for a, b in self.windows))

    @classmethod
    def single(cls, dc_rel: float, dzeta_rel: float, months: int, start: int = 0) -> "ShockSchedule":
        return cls(windows=((start, start + months),), dc_rel=dc_rel, dzeta_rel=dzeta_rel)

    def validate(self) -> None:
        if not (0.0 <= self.dc_rel < 1.0 and 0.0 <= self.dzeta_rel < 1.0):
            raise ValueError("dc_rel and dzeta_rel must lie in [0, 1)")
        if self.recovery_ramp < 0:
            raise ValueError("recovery_ramp must be >= 0")
        prev_end = None
        for a, b in self.windows:
            if a < 0 or b <= a:
                raise ValueError(f"bad lockdown window [{a}, {b})")
            if prev_end is not None and a < prev_end:
                raise ValueError("lockdown windows must be ordered and disjoint")
            prev_end = b

    @property
    def end(self) -> int:
        """Month at which the final window closes (0 without windows)."""
        return self.windows[-1][1] if self.windows else 0

    def in_lockdown(self, t: int) -> bool:
        return any(a <= t < b for a, b in self.windows)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["windows"] = [list(w) for w in self.windows]
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ShockSchedule":
        d = dict(d)
        months = d.pop("months", None)
        start = d.pop("start", 0)
        _check_keys(cls, d)
        if months is not None:
            if "windows" in d:
                raise KeyError("give either 'windows' or 'months', not both")
            d["windows"] = ((start, start + int(months)),)
        s = cls(**d)
        s.validate()
        return s


@dataclass(frozen=True)
class PolicySpec:
    """Credit policy and an optional helicopter drop.

    ``helicopter_time`` defaults to the last month of the final lockdown
    window; the drop happens after that month's accounting.
    """

    credit_mode: str = "none"
    theta_baseline: float = 3.0
    theta_offset: float = 1.25
    helicopter_kappa: float | None = None
    helicopter_time: int | None = None

    def validate(self) -> None:
        if self.credit_mode not in CREDIT_MODES:
            raise ValueError(f"credit_mode must be one of {CREDIT_MODES}")
        if not self.theta_baseline > 0 or not self.theta_offset > 0:
            raise ValueError("thresholds must be positive")
        if self.helicopter_kappa is not None and not self.helicopter_kappa > 1.0:
            raise ValueError("helicopter_kappa must be > 1")

    def drop_month(self, shock: ShockSchedule) -> int | None:
        if self.helicopter_kappa is None:
            return None
        if self.helicopter_time is not None:
            return self.helicopter_time
        return max(shock.end - 1, 0)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PolicySpec":
        _check_keys(cls, d)
        p = cls(**d)
        p.validate()
        return p


@dataclass(frozen=True)
class ScenarioSpec:
    shock: ShockSchedule = field(default_factory=ShockSchedule)
    policy: PolicySpec = field(default_factory=PolicySpec)

    def validate(self) -> None:
        self.shock.validate()
        self.policy.validate()


def _check_keys(cls: type, d: dict[str, Any]) -> None:
    unknown = set(d) - {f.name for f in fields(cls)}
    if unknown:
        raise KeyError(f"unknown {cls.__name__} key(s): {sorted(unknown)}")


def shock_at(s: ShockSchedule, t: int, c0: float, zeta: float) -> tuple[float, float]:
    """Scheduled (c_t, zeta_t) for month t."""
    c_low = c0 * (1.0 - s.dc_rel)
    z_low = zeta * (1.0 - s.dzeta_rel)
    if s.in_lockdown(t):
        return c_low, z_low
    if s.recovery_ramp > 0:
        # most recent window closed at or before t
        closed = [b for a, b in s.windows if b <= t]
        if closed:
            b = closed[-1]
            if t < b + s.recovery_ramp:
                w = (t - b) / s.recovery_ramp
                return c_low + w * (c0 - c_low), z_low + w * (zeta - z_low)
    return c0, zeta


def theta_at(p: PolicySpec, t: int, in_lockdown: bool, avg_fragility: float) -> float:
    """Bankruptcy threshold for month t under the credit policy."""
    if p.credit_mode == "none":
        return p.theta_baseline
    if in_lockdown:
        return math.inf
    if p.credit_mode == "naive":
        return p.theta_baseline
    return max(p.theta_offset * avg_fragility, p.theta_baseline)


def inputs_at(spec: ScenarioSpec, t: int, c0: float, zeta: float):
    """(c_t, zeta_t, theta_t, kappa) to feed into one step at month t.

    theta_t is a callable for the adaptive rule so it sees the fragility
    measured at the end of the month.
    """
    c_t, z_t = shock_at(spec.shock, t, c0, zeta)
    lock = spec.shock.in_lockdown(t)
    pol = spec.policy
    if pol.credit_mode == "adaptive" and not lock:
        theta: Any = lambda st: theta_at(pol, t, False, st.avg_fragility)  # noqa: E731
    else:
        theta = theta_at(pol, t, lock, 0.0)
    kappa = pol.helicopter_kappa if pol.drop_month(spec.shock) == t else None
    return c_t, z_t, theta, kappa


__all__ = [
    "CREDIT_MODES",
    "PolicySpec",
    "ScenarioSpec",
    "ShockSchedule",
    "apply_helicopter",
    "inputs_at",
    "shock_at",
    "theta_at",
]
