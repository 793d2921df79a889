"""Converter parameters and derived constants.

All electrical constants of the circuit live here. Instances are frozen
after validation and safe to share between concurrently running
simulations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError

# Relative tolerance for the leakage symmetry check. The two primary
# leakage inductances must be equal for the commutation model to hold.
_SYMMETRY_RTOL = 1e-12


@dataclass(frozen=True)
class ConverterParams:
    """Electrical constants of the converter.

    vi    input source voltage, V
    l     input inductance, H
    llk1, llk2  transformer primary leakage inductances, H (must be equal)
    ci    input capacitance, F (carried, unused by the ideal-source model)
    co1, co2    output filter capacitances, F
    n     transformer turns ratio primary:secondary half-winding, n:1
    d     duty cycle of the primary switches, 0.5 < d < 1
    r1, r2      load resistances on outputs vo1 and vo2, ohm
    fs    switching frequency, Hz
    csn   parasitic/snubber capacitance across S1..S6, F (zeros allowed)
    """

    vi: float
    l: float
    llk1: float
    llk2: float
    ci: float
    co1: float
    co2: float
    n: float
    d: float
    fs: float
    r1: float = 4.5
    r2: float = 4.5
    csn: tuple[float, float, float, float, float, float] = (0.0,) * 6


@dataclass(frozen=True)
class DerivedConstants:
    """Constants derived from ConverterParams (pure function of them)."""

    t: float               # switching period, s
    l_lkt: float           # total leakage inductance llk1 + llk2, H
    duty_secondary: float  # conduction duty of the secondary pairs, < 0.5


def _positive(name: str, value: float) -> None:
    if not math.isfinite(value) or value <= 0.0:
        raise ParameterError(f"{name} must be strictly positive and finite, got {value!r}")


def validate(params: ConverterParams) -> ConverterParams:
    """Check every invariant; return the params unchanged if all hold.

    Raises ParameterError naming the first violated invariant.
    Idempotent: validate(validate(p)) == validate(p).
    """
    for name in ("vi", "l", "llk1", "llk2", "co1", "co2", "r1", "r2", "fs", "n"):
        _positive(name, getattr(params, name))
    if not math.isfinite(params.ci) or params.ci < 0.0:
        raise ParameterError(f"ci must be nonnegative and finite, got {params.ci!r}")
    if not math.isfinite(params.d):
        raise ParameterError(f"d must be finite, got {params.d!r}")
    if params.d <= 0.5:
        raise ParameterError("D must exceed 0.5")
    if params.d >= 1.0:
        raise ParameterError("D must be below 1")
    scale = max(abs(params.llk1), abs(params.llk2))
    if abs(params.llk1 - params.llk2) > _SYMMETRY_RTOL * scale:
        raise ParameterError("leakage symmetry violated (llk1 must equal llk2)")
    if len(params.csn) != 6:
        raise ParameterError(f"csn must have six entries, got {len(params.csn)}")
    for i, c in enumerate(params.csn, start=1):
        if not math.isfinite(c) or c < 0.0:
            raise ParameterError(f"csn{i} must be nonnegative and finite, got {c!r}")
    return params


def derive(params: ConverterParams) -> DerivedConstants:
    """Derived constants: period, total leakage, secondary conduction duty.

    The secondary pairs conduct for the complement of the primary duty,
    duty_secondary = 1 - d, which is below 0.5 whenever d > 0.5.
    """
    validate(params)
    return DerivedConstants(
        t=1.0 / params.fs,
        l_lkt=params.llk1 + params.llk2,
        duty_secondary=1.0 - params.d,
    )
