"""Simulation parameters for the random-spreading URA link.

`SystemConfig` bundles every scalar of the link (users, message split,
spreading/codeword lengths, operating Eb/N0, iteration caps, seeds) with the
power-division profile and the activity-detection policy. Instances are
frozen and validated on construction so they can be shared freely between
trials and worker processes.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

__all__ = [
    "POWER_PRESETS",
    "DetectionPolicy",
    "PowerProfile",
    "SystemConfig",
    "amplitude_for",
    "ebn0_from_noise_variance",
    "load_config",
    "noise_variance",
]

# Signal amplitudes (p_1..p_m) per number of active users.
POWER_PRESETS: dict[int, tuple[float, ...]] = {
    150: (0.9098, 0.9947, 1.0876),
    175: (0.9141, 1.0791),
    200: (0.8997, 1.0911),
    225: (0.8620, 0.9878, 1.1319),
    250: (0.8451, 0.9847, 1.1472),
}

_POWER_TOL = 1e-3


@dataclass(frozen=True)
class PowerProfile:
    """Power-division groups over the codebook columns.

    Columns are split into ``m`` contiguous blocks of ``t_size // m`` columns,
    the last block absorbing any remainder; every column of block ``g`` is
    transmitted with amplitude ``amplitudes[g]``.
    """

    amplitudes: tuple[float, ...] = (1.0,)
    t_size: int = 4096

    def __post_init__(self):
        amps = tuple(float(a) for a in self.amplitudes)
        object.__setattr__(self, "amplitudes", amps)
        if not amps:
            raise ValueError("power profile needs at least one amplitude")
        if any(not math.isfinite(a) or a <= 0 for a in amps):
            raise ValueError(f"amplitudes must be positive and finite, got {amps}")
        if self.t_size < len(amps):
            raise ValueError(
                f"cannot split {self.t_size} columns into {len(amps)} groups"
            )
        mean_sq = sum(a * a for a in amps) / len(amps)
        if abs(mean_sq - 1.0) > _POWER_TOL:
            raise ValueError(
                f"mean squared amplitude must be 1 within {_POWER_TOL}, got {mean_sq:.6f}"
            )

    @property
    def m(self) -> int:
        return len(self.amplitudes)

    @property
    def group_size(self) -> int:
        return self.t_size // self.m

    def group_of(self, column: int) -> int:
        if not 0 <= column < self.t_size:
            raise IndexError(f"column {column} outside [0, {self.t_size})")
        return min(column // self.group_size, self.m - 1)

    def column_amplitudes(self):
        """Amplitude of every codebook column as a length-T array."""
        import numpy as np

        groups = np.minimum(np.arange(self.t_size) // self.group_size, self.m - 1)
        return np.asarray(self.amplitudes)[groups]

    @classmethod
    def for_ka(cls, ka: int, t_size: int) -> "PowerProfile":
        """Preset profile for ``ka`` active users, uniform power if none is tabulated."""
        return cls(POWER_PRESETS.get(ka, (1.0,)), t_size)


def amplitude_for(profile: PowerProfile, column: int) -> float:
    """Amplitude of the power group that contains ``column``."""
    return profile.amplitudes[profile.group_of(column)]


@dataclass(frozen=True)
class DetectionPolicy:
    """Stopping rule for activity detection.

    ``budget=None`` means "number of active users", resolved by the receiver.
    """

    budget: int | None = None
    mode: str = "fixed"
    threshold: float = 0.05

    def __post_init__(self):
        if self.mode not in ("fixed", "threshold"):
            raise ValueError(f"detection mode must be 'fixed' or 'threshold', got {self.mode!r}")
        if self.budget is not None and self.budget < 1:
            raise ValueError("detection budget must be >= 1")
        if self.mode == "threshold" and not 0 < self.threshold <= 1:
            raise ValueError("residual threshold must lie in (0, 1]")


@dataclass(frozen=True)
class SystemConfig:
    """All parameters of one simulated operating point.

    Defaults reproduce the reference setup: 100-bit messages split 12/88,
    114-chip signatures, 264-symbol rate-1/3 codewords, at most 20
    ESE/decoder iterations.
    """

    ka: int = 25
    b_total: int = 100
    b_header: int = 12
    b_payload: int = 88
    n_chips: int = 114
    n_symbols: int = 264
    ebn0_db: float = 3.0
    max_ese_iters: int = 20
    max_sic_rounds: int = 8
    bp_iters: int = 20
    trials: int = 100
    seed: int = 0
    power: PowerProfile | None = None
    detection: DetectionPolicy = field(default_factory=DetectionPolicy)
    llr_scale: str = "paper"

    def __post_init__(self):
        for name in ("ka", "b_total", "b_header", "b_payload", "n_chips",
                     "n_symbols", "max_ese_iters", "max_sic_rounds", "bp_iters",
                     "trials"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if self.b_header + self.b_payload != self.b_total:
            raise ValueError(
                f"b_header + b_payload = {self.b_header + self.b_payload} != b_total = {self.b_total}"
            )
        if self.b_header > 24:
            raise ValueError("b_header > 24 gives an unmanageable codebook")
        if math.isnan(self.ebn0_db) or self.ebn0_db == -math.inf:
            raise ValueError(f"ebn0_db must be a number or +inf, got {self.ebn0_db}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.llr_scale not in ("paper", "half"):
            raise ValueError(f"llr_scale must be 'paper' or 'half', got {self.llr_scale!r}")
        if self.power is None:
            object.__setattr__(self, "power", PowerProfile.for_ka(self.ka, self.t_size))
        elif self.power.t_size != self.t_size:
            raise ValueError(
                f"power profile covers {self.power.t_size} columns, codebook has {self.t_size}"
            )

    @property
    def t_size(self) -> int:
        return 2 ** self.b_header

    @property
    def n_channel_uses(self) -> int:
        return self.n_chips * self.n_symbols

    @property
    def sigma2(self) -> float:
        return noise_variance(self)

    @property
    def detection_budget(self) -> int:
        return self.detection.budget if self.detection.budget is not None else self.ka

    def with_(self, **changes: Any) -> "SystemConfig":
        """Copy with fields replaced; the power profile is re-derived when ``ka`` changes."""
        if "ka" in changes and "power" not in changes and self.power == PowerProfile.for_ka(self.ka, self.t_size):
            changes["power"] = None
        if "b_header" in changes and "power" not in changes:
            changes["power"] = None
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["power"] = {"amplitudes": list(self.power.amplitudes)}
        return d


def noise_variance(cfg: SystemConfig) -> float:
    """Per-entry noise variance that yields ``cfg.ebn0_db`` per user.

    Each user spends ``n_symbols`` units of energy on ``b_total`` bits over a
    real channel, so ``Eb/N0 = n_symbols / (2 * b_total * sigma2)``.
    """
    if cfg.ebn0_db == math.inf:
        return 0.0
    return cfg.n_symbols / (2.0 * cfg.b_total * 10.0 ** (cfg.ebn0_db / 10.0))


def ebn0_from_noise_variance(sigma2: float, n_symbols: int, b_total: int) -> float:
    """Inverse of :func:`noise_variance`, in dB."""
    return 10.0 * math.log10(n_symbols / (2.0 * b_total * sigma2))


_SCALAR_KEYS = {
    "ka": int, "b_total": int, "b_header": int, "b_payload": int,
    "n_chips": int, "n_symbols": int, "ebn0_db": float, "max_ese_iters": int,
    "max_sic_rounds": int, "bp_iters": int, "trials": int, "seed": int,
    "llr_scale": str,
}


def config_from_mapping(data: Mapping[str, Any], **overrides: Any) -> SystemConfig:
    """Build a config from nested key/value data (as parsed from TOML).

    Unknown keys are rejected so typos do not silently fall back to defaults.
    ``overrides`` (e.g. from CLI flags) win over file values; ``None`` values
    are ignored.
    """
    data = dict(data)
    power = data.pop("power", None)
    detection = data.pop("detection", None)
    unknown = set(data) - set(_SCALAR_KEYS)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    kwargs: dict[str, Any] = {k: _SCALAR_KEYS[k](v) for k, v in data.items()}
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in _SCALAR_KEYS:
            raise ValueError(f"unknown override {key!r}")
        kwargs[key] = _SCALAR_KEYS[key](value)

    if detection is not None:
        bad = set(detection) - {"budget", "mode", "threshold"}
        if bad:
            raise ValueError(f"unknown detection keys: {sorted(bad)}")
        kwargs["detection"] = DetectionPolicy(**detection)
    if power is not None:
        bad = set(power) - {"amplitudes"}
        if bad:
            raise ValueError(f"unknown power keys: {sorted(bad)}")
        b_header = kwargs.get("b_header", SystemConfig.b_header)
        kwargs["power"] = PowerProfile(tuple(power["amplitudes"]), 2 ** b_header)
    return SystemConfig(**kwargs)


def load_config(path: str | Path | None = None, **overrides: Any) -> SystemConfig:
    """Read a TOML config file; ``path=None`` starts from the defaults."""
    data: dict[str, Any] = {}
    if path is not None:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    return config_from_mapping(data, **overrides)

