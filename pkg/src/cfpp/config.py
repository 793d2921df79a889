"""Plain-text configuration files: `key = value` with SI suffixes.

Values accept an optional SI magnitude suffix (p, n, u, m, k, M, G), so
`110.9u`, `40k` and `4.5` all parse. Unknown keys are fatal; parse and
validation errors carry the line number.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import reference
from .errors import ConfigError, ParameterError
from .params import ConverterParams, validate
from .transient import SimConfig

_SI = {"p": 1e-12, "n": 1e-9, "u": 1e-6, "m": 1e-3, "k": 1e3, "M": 1e6, "G": 1e9}

_PARAM_KEYS = {
    "vi", "l", "llk1", "llk2", "ci", "co1", "co2", "n", "d", "r1", "r2", "fs",
    "csn1", "csn2", "csn3", "csn4", "csn5", "csn6",
}
_SIM_KEYS = {"samples", "max_periods", "ss_tol", "max_step", "event_tol"}
_REQUIRED = {"vi", "l", "llk1", "llk2", "n", "d", "fs"}

_DEFAULTS = {
    "ci": 0.0,
    "co1": 220e-6,
    "co2": 220e-6,
    "r1": 4.5,
    "r2": 4.5,
    "csn1": 0.0, "csn2": 0.0, "csn3": 0.0, "csn4": 0.0, "csn5": 0.0, "csn6": 0.0,
}


@dataclass(frozen=True)
class LoadedConfig:
    params: ConverterParams
    sim: SimConfig
    warnings: tuple[str, ...] = ()


def parse_si(text: str) -> float:
    """Parse a number with an optional SI suffix ('110.9u' -> 1.109e-4)."""
    text = text.strip()
    if not text:
        raise ValueError("empty value")
    scale = 1.0
    if text[-1] in _SI:
        scale = _SI[text[-1]]
        text = text[:-1]
    return float(text) * scale


def load_config(path) -> LoadedConfig:
    """Parse and validate a configuration file.

    Returns the validated ConverterParams, the SimConfig, and any
    advisory warnings (for instance the tabulated-leakage override).
    """
    raw: dict[str, float] = {}
    lines: dict[str, int] = {}
    try:
        fh = open(path, "r")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line.strip()!r}")
            key, _, value = stripped.partition("=")
            key = key.strip().lower()
            if key not in _PARAM_KEYS and key not in _SIM_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in raw:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            try:
                raw[key] = parse_si(value)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
            lines[key] = lineno

    missing = sorted(_REQUIRED - set(raw))
    if missing:
        raise ConfigError(f"{path}: missing required keys: {', '.join(missing)}")

    merged = dict(_DEFAULTS)
    merged.update({k: v for k, v in raw.items() if k in _PARAM_KEYS})
    params = ConverterParams(
        vi=merged["vi"], l=merged["l"], llk1=merged["llk1"], llk2=merged["llk2"],
        ci=merged["ci"], co1=merged["co1"], co2=merged["co2"], n=merged["n"],
        d=merged["d"], fs=merged["fs"], r1=merged["r1"], r2=merged["r2"],
        csn=tuple(merged[f"csn{i}"] for i in range(1, 7)),
    )
    try:
        validate(params)
    except ParameterError as exc:
        tokens = set(re.findall(r"[a-z0-9]+", str(exc).lower()))
        hit = next((k for k in lines if k in tokens), None)
        where = f" (line {lines[hit]})" if hit else ""
        raise ConfigError(f"{path}: {exc}{where}") from exc

    warnings = []
    tab = reference.BENCHMARK["llk_tabulated"]
    if abs(params.llk1 - tab) <= 1e-12 * tab:
        warnings.append(
            "leakage inductance equals the tabulated benchmark literal (1109 uH), "
            "which is inconsistent with the leakage design equation; proceeding as given"
        )

    sim_kwargs = {}
    if "samples" in raw:
        sim_kwargs["samples_per_period"] = int(raw["samples"])
    if "max_periods" in raw:
        sim_kwargs["max_periods"] = int(raw["max_periods"])
    if "ss_tol" in raw:
        sim_kwargs["ss_tol"] = raw["ss_tol"]
    if "max_step" in raw:
        sim_kwargs["max_step"] = raw["max_step"]
    if "event_tol" in raw:
        sim_kwargs["event_tol"] = raw["event_tol"]
    sim = SimConfig(**sim_kwargs).validated()
    return LoadedConfig(params=params, sim=sim, warnings=tuple(warnings))
