"""Model constants for the Mark-0 economy."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Any


@dataclass(frozen=True)
class EconomyParams:
    """All model constants.

    The defaults are the baseline calibration with the central bank switched
    off and every inflation-expectation feedback set to zero.
    """

    n_firms: int = 10_000
    c0: float = 0.5
    beta: float = 2.0
    gamma: float = 0.01
    eta0_minus: float = 0.2
    R: float = 2.0
    delta: float = 0.02
    theta: float = 3.0
    phi: float = 0.1
    zeta: float = 1.0
    gamma0: float = 0.0
    omega: float = 0.2

    # feedback channels, all inert in the default configuration
    alpha_c: float = 0.0
    alpha_gamma: float = 0.0
    tau_r: float = 0.0
    tau_t: float = 0.0

    # banking sector
    f: float = 0.5
    g: float = 1.0
    rho_star: float = 0.0
    phi_pi: float = 0.0
    pi_target: float = 0.0

    # demand softmax on p_i / pbar (True) or on raw prices (False)
    normalized_demand: bool = True
    # payroll in the fragility ratio: "output" (W_i Y_i) or "workforce" (W_i Y_i / zeta)
    fragility_basis: str = "output"

    # starting balance sheets: firm i owes init_fragility_i times its payroll,
    # drawn uniformly in init_fragility +/- init_fragility_spread
    init_fragility: float = 1.0
    init_fragility_spread: float = 0.8

    @property
    def eta0_plus(self) -> float:
        return self.R * self.eta0_minus

    def validate(self) -> None:
        if self.n_firms < 1:
            raise ValueError("n_firms must be >= 1")
        for name in ("c0", "beta", "gamma", "eta0_minus", "R", "delta", "phi", "zeta", "omega"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and non-negative, got {v!r}")
        if not 0.0 <= self.f <= 1.0:
            raise ValueError("f must lie in [0, 1]")
        if not 0.0 <= self.phi <= 1.0:
            raise ValueError("phi is a per-step probability and must lie in [0, 1]")
        if not 0.0 <= self.omega <= 1.0:
            raise ValueError("omega must lie in [0, 1]")
        if self.gamma >= 1.0:
            raise ValueError("gamma must be < 1 so prices stay positive")
        if self.zeta <= 0:
            raise ValueError("zeta must be positive")
        if self.fragility_basis not in ("output", "workforce"):
            raise ValueError("fragility_basis must be 'output' or 'workforce'")
        if self.init_fragility_spread < 0 or self.init_fragility - self.init_fragility_spread < 0:
            raise ValueError("initial fragility draws must be non-negative")
        if not self.theta > 0:
            raise ValueError("theta must be positive (inf allowed)")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "EconomyParams":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise KeyError(f"unknown parameter(s): {sorted(unknown)}")
        p = cls(**d)
        p.validate()
        return p

    def with_(self, **kw: Any) -> "EconomyParams":
        return replace(self, **kw)
