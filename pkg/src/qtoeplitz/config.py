"""Run configuration: JSON document, fully validated before any run starts.

Unknown keys are rejected so a typo cannot silently disable a setting.
Every diagnostic names the offending field by its path.

Top-level schema (see README for the full description)::

    {
      "duration_blocks": 16,
      "out_dir": "out",
      "seeds": "seeds",                  # QRS1 file, or directory holding
                                         # channel<i>.qrs per channel
      "security": {"log10_eps_hash": -50, "log10_eps_seed": -50,
                   "log10_eps_threshold": -36},
      "refresh": {"wallclock_hours": null},
      "channels": [ { ...channel keys... } ]
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

from .extractor import ToeplitzConfig
from .params import SecuritySpec
from .pipeline import ChannelConfig
from .seedbank import DEFAULT_LFSR_TAPS, DEFAULT_LFSR_WIDTH


class ConfigError(ValueError):
    """Configuration rejected; the message names the offending field."""


_SECURITY_KEYS = {"log10_eps_hash", "log10_eps_seed", "log10_eps_threshold", "universality"}
_CHANNEL_KEYS = {
    "m",
    "n",
    "k",
    "b",
    "sigma",
    "full_scale",
    "adc_bits",
    "sample_rate_hz",
    "out_clock_hz",
    "hmin_per_sample",
    "rng_seed",
    "seed_file",
    "override_unsafe",
    "security",
    "lfsr_width",
    "lfsr_taps",
}
_TOP_KEYS = {"duration_blocks", "out_dir", "seeds", "security", "refresh", "channels"}
_REFRESH_KEYS = {"wallclock_hours"}


@dataclass
class RunConfig:
    channels: List[ChannelConfig]
    duration_blocks: int = 1
    out_dir: str = "out"
    seeds: Optional[str] = None
    wallclock_refresh_seconds: Optional[float] = None
    base_dir: Path = field(default_factory=Path)

    def resolve(self, p: Optional[str]) -> Optional[Path]:
        """Resolve a config-relative path."""
        if p is None:
            return None
        path = Path(p)
        return path if path.is_absolute() else self.base_dir / path


def _require(cond: bool, where: str, msg: str):
    if not cond:
        raise ConfigError(f"{where}: {msg}")


def _check_keys(obj: dict, allowed: set, where: str):
    _require(isinstance(obj, dict), where, "must be an object")
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(
            f"{where}: unknown key(s) {', '.join(sorted(unknown))} "
            f"(allowed: {', '.join(sorted(allowed))})"
        )


def _number(obj: dict, key: str, where: str, default=None, required=False):
    if key not in obj or obj[key] is None:
        _require(not required, f"{where}.{key}", "is required")
        return default
    v = obj[key]
    _require(isinstance(v, (int, float)) and not isinstance(v, bool),
             f"{where}.{key}", f"must be a number, got {type(v).__name__}")
    return v


def _integer(obj: dict, key: str, where: str, default=None, required=False):
    v = _number(obj, key, where, default=default, required=required)
    if v is None:
        return None
    _require(float(v).is_integer(), f"{where}.{key}", f"must be an integer, got {v}")
    return int(v)


def _parse_security(obj: dict, where: str) -> SecuritySpec:
    _check_keys(obj, _SECURITY_KEYS, where)
    try:
        return SecuritySpec(
            log10_eps_hash=_number(obj, "log10_eps_hash", where, required=True),
            log10_eps_seed=_number(obj, "log10_eps_seed", where, required=True),
            log10_eps_threshold=_number(obj, "log10_eps_threshold", where, required=True),
            universality=_number(obj, "universality", where, default=1.0),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from None


def _parse_channel(obj: dict, index: int, default_security: Optional[SecuritySpec]) -> ChannelConfig:
    where = f"channels[{index}]"
    _check_keys(obj, _CHANNEL_KEYS, where)
    m = _integer(obj, "m", where, required=True)
    n = _integer(obj, "n", where, required=True)
    k = _integer(obj, "k", where, required=True)
    try:
        cfg = ToeplitzConfig(m, n, k)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    if "security" in obj and obj["security"] is not None:
        security = _parse_security(obj["security"], f"{where}.security")
    elif default_security is not None:
        security = default_security
    else:
        raise ConfigError(f"{where}.security: is required (no top-level default given)")
    b = _integer(obj, "b", where, default=4)
    _require(b >= 1 and b & (b - 1) == 0, f"{where}.b", f"must be a power of two, got {b}")
    seed_file = obj.get("seed_file")
    if seed_file is not None:
        _require(isinstance(seed_file, str), f"{where}.seed_file", "must be a string path")
    override = obj.get("override_unsafe", False)
    _require(isinstance(override, bool), f"{where}.override_unsafe", "must be true or false")
    channel = ChannelConfig(
        cfg=cfg,
        security=security,
        sigma=_number(obj, "sigma", where, default=0.05),
        full_scale=_number(obj, "full_scale", where, default=1.0),
        adc_bits=_integer(obj, "adc_bits", where, default=16),
        sample_rate=_number(obj, "sample_rate_hz", where, default=250e6),
        out_clock=_number(obj, "out_clock_hz", where, default=None),
        hmin_per_sample=_number(obj, "hmin_per_sample", where, default=None),
        rng_seed=_integer(obj, "rng_seed", where, default=index),
        b=b,
        seed_file=seed_file,
        override_unsafe=override,
        lfsr_width=_integer(obj, "lfsr_width", where, default=DEFAULT_LFSR_WIDTH),
        lfsr_taps=_integer(obj, "lfsr_taps", where, default=DEFAULT_LFSR_TAPS),
    )
    _require(channel.sigma > 0, f"{where}.sigma", "must be positive")
    _require(channel.full_scale > 0, f"{where}.full_scale", "must be positive")
    _require(1 <= channel.adc_bits <= 32, f"{where}.adc_bits", "must be in [1, 32]")
    _require(channel.sample_rate > 0, f"{where}.sample_rate_hz", "must be positive")
    if channel.hmin_per_sample is not None:
        _require(
            0 <= channel.hmin_per_sample <= channel.adc_bits,
            f"{where}.hmin_per_sample",
            "must lie in [0, adc_bits]",
        )
    return channel


def parse_run_config(document, base_dir: Optional[Path] = None) -> RunConfig:
    """Validate a config document (dict, JSON text, or file path)."""
    if isinstance(document, (str, Path)) and not str(document).lstrip().startswith("{"):
        path = Path(document)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        base_dir = base_dir if base_dir is not None else path.parent
        try:
            obj = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    elif isinstance(document, (str, Path)):
        try:
            obj = json.loads(str(document))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from None
    else:
        obj = document
    _check_keys(obj, _TOP_KEYS, "config")

    default_security = None
    if "security" in obj and obj["security"] is not None:
        default_security = _parse_security(obj["security"], "config.security")

    raw_channels = obj.get("channels")
    _require(isinstance(raw_channels, list) and raw_channels,
             "config.channels", "must be a non-empty list")
    channels = [
        _parse_channel(ch, i, default_security) for i, ch in enumerate(raw_channels)
    ]

    duration = _integer(obj, "duration_blocks", "config", default=1)
    _require(duration >= 0, "config.duration_blocks", "must be nonnegative")

    out_dir = obj.get("out_dir", "out")
    _require(isinstance(out_dir, str), "config.out_dir", "must be a string path")
    seeds = obj.get("seeds")
    if seeds is not None:
        _require(isinstance(seeds, str), "config.seeds", "must be a string path")

    wallclock_seconds = None
    if "refresh" in obj and obj["refresh"] is not None:
        _check_keys(obj["refresh"], _REFRESH_KEYS, "config.refresh")
        hours = _number(obj["refresh"], "wallclock_hours", "config.refresh", default=None)
        if hours is not None:
            _require(hours > 0, "config.refresh.wallclock_hours", "must be positive")
            wallclock_seconds = hours * 3600.0

    return RunConfig(
        channels=channels,
        duration_blocks=duration,
        out_dir=out_dir,
        seeds=seeds,
        wallclock_refresh_seconds=wallclock_seconds,
        base_dir=base_dir if base_dir is not None else Path(),
    )
