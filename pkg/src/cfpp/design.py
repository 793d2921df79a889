"""Closed-form design equations and the steady-state operating point.

All calculators are pure functions of their arguments. They accept a
slightly wider domain than ConverterParams (n = 0 and d = 1 are legal
limits of the gain expression) so the algebraic boundary cases stay
testable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConvergenceError, ParameterError
from .params import ConverterParams, DerivedConstants, derive

_FIXED_POINT_RTOL = 1e-12
_FIXED_POINT_MAX_ITER = 100


@dataclass(frozen=True)
class DesignInputs:
    """Target specification for the design calculators."""

    vi: float
    vo2_target: float
    n: float
    d: float
    i_l: float
    delta_ii: float  # allowed input-current ripple, A
    fs: float


@dataclass(frozen=True)
class DesignResult:
    """Output of the design flow: gain and the passive values."""

    gain: float        # vo2 / vi
    l: float           # input inductance, H
    llk_each: float    # per-inductor leakage, H (total is twice this)
    d_ext: float       # extended diode-conduction duty at the design point


@dataclass(frozen=True)
class OperatingPoint:
    """Steady-state operating point of a validated parameter set."""

    vo1: float
    vo2: float
    i_l: float
    d_ext: float
    iterations: int


def _check_duty(d: float) -> None:
    if not 0.5 < d <= 1.0:
        raise ParameterError(f"duty cycle must satisfy 0.5 < d <= 1, got {d!r}")


def voltage_gain(n: float, d: float) -> float:
    """Ideal voltage gain M = vo2/vi = 1 / (2 (n (1 - d) + 1))."""
    if n < 0:
        raise ParameterError(f"turns ratio must be nonnegative, got {n!r}")
    _check_duty(d)
    return 1.0 / (2.0 * (n * (1.0 - d) + 1.0))


def duty_for_gain(n: float, vi: float, vo2: float) -> float:
    """Invert the gain: the duty cycle that produces vo2 from vi.

    The gain is attainable only for vi/(2 vo2) - 1 in (0, n/2); outside
    that band the converter cannot reach the target (step-down only,
    open interval at d = 1).
    """
    if n <= 0 or vi <= 0 or vo2 <= 0:
        raise ParameterError("n, vi and vo2 must be strictly positive")
    x = vi / (2.0 * vo2) - 1.0
    if not 0.0 < x < 0.5 * n:
        raise ParameterError(
            f"gain unattainable: vi/(2 vo2) - 1 = {x:.6g} outside (0, {0.5 * n:.6g})"
        )
    return 1.0 - x / n


def leakage_for_zcs(n: float, vo2: float, d: float, i_l: float, fs: float) -> float:
    """Per-inductor leakage that completes commutation in half the overlap.

    llk_each = n vo2 (d - 0.5) / (2 i_l fs). At this value the extended
    diode-conduction duty is exactly zero.
    """
    if n <= 0 or vo2 <= 0 or i_l <= 0 or fs <= 0:
        raise ParameterError("n, vo2, i_l and fs must be strictly positive")
    if not 0.5 <= d <= 1.0:
        raise ParameterError(f"duty cycle must satisfy 0.5 <= d <= 1, got {d!r}")
    return n * vo2 * (d - 0.5) / (2.0 * i_l * fs)


def input_inductance(n: float, d: float, delta_ii: float, fs: float, vi: float) -> float:
    """Input inductance for a given peak-to-peak input-current ripple.

    l = 3 n (d - 0.5) vi / (8 delta_ii fs (n (1 - d) + 1)).
    """
    if n <= 0 or vi <= 0 or fs <= 0:
        raise ParameterError("n, vi and fs must be strictly positive")
    if delta_ii <= 0:
        raise ParameterError(f"delta_ii must be strictly positive, got {delta_ii!r}")
    if not 0.5 <= d <= 1.0:
        raise ParameterError(f"duty cycle must satisfy 0.5 <= d <= 1, got {d!r}")
    return 3.0 * n * (d - 0.5) * vi / (8.0 * delta_ii * fs * (n * (1.0 - d) + 1.0))


def ripple_for_inductance(n: float, d: float, l: float, fs: float, vi: float) -> float:
    """Inverse of input_inductance: the ripple a given inductance yields."""
    if l <= 0:
        raise ParameterError(f"l must be strictly positive, got {l!r}")
    return 3.0 * n * (d - 0.5) * vi / (8.0 * l * fs * (n * (1.0 - d) + 1.0))


def extended_duty(d: float, i_l: float, llk_each: float, n: float, vo2: float, fs: float) -> float:
    """Extended diode-conduction duty, clamped below at zero.

    d_ext = d - 0.5 - i_l (2 llk_each) fs / (n vo2). Positive when the
    commutation ramp is faster than the design point, i.e. the body
    diode keeps conducting past the gate overlap; zero at or beyond the
    leakage_for_zcs design value. i_l -> 0 gives the d - 0.5 maximum.
    """
    if n <= 0 or vo2 <= 0 or fs <= 0:
        raise ParameterError("n, vo2 and fs must be strictly positive")
    if i_l < 0 or llk_each < 0:
        raise ParameterError("i_l and llk_each must be nonnegative")
    _check_duty(d)
    raw = d - 0.5 - i_l * (2.0 * llk_each) * fs / (n * vo2)
    if raw > (d - 0.5) * (1.0 + 1e-12):
        raise ParameterError("commutation exceeds half-period")
    return max(0.0, raw)


def leakage_total_for_duty(d: float, d_ext: float, i_l: float, n: float, vo2: float, fs: float) -> float:
    """Total leakage that yields a given extended duty (inverse pair).

    l_lkt = n vo2 (d - d_ext - 0.5) / (i_l fs), the algebraic inverse of
    extended_duty for d_ext in [0, d - 0.5]. Less leakage means a faster
    commutation ramp and therefore a longer extended diode conduction,
    so d_ext enters with a minus sign.
    """
    if i_l <= 0 or n <= 0 or vo2 <= 0 or fs <= 0:
        raise ParameterError("i_l, n, vo2 and fs must be strictly positive")
    _check_duty(d)
    if not 0.0 <= d_ext <= d - 0.5:
        raise ParameterError(f"d_ext must lie in [0, d - 0.5], got {d_ext!r}")
    return n * vo2 * (d - d_ext - 0.5) / (i_l * fs)


def load_current(vo2: float, vi: float, r1: float, r2: float) -> float:
    """Input current from the ideal power balance vi i_l = vo1^2/r1 + vo2^2/r2."""
    vo1 = 2.0 * vo2
    return (vo1 * vo1 / r1 + vo2 * vo2 / r2) / vi


def solve_design(inputs: DesignInputs) -> DesignResult:
    """Full design flow from a target spec: gain, passives, extended duty."""
    if not 0.5 < inputs.d < 1.0:
        raise ParameterError(f"duty cycle must satisfy 0.5 < d < 1, got {inputs.d!r}")
    gain = voltage_gain(inputs.n, inputs.d)
    llk_each = leakage_for_zcs(inputs.n, inputs.vo2_target, inputs.d, inputs.i_l, inputs.fs)
    l = input_inductance(inputs.n, inputs.d, inputs.delta_ii, inputs.fs, inputs.vi)
    d_ext = extended_duty(inputs.d, inputs.i_l, llk_each, inputs.n,
                          inputs.vo2_target, inputs.fs)
    return DesignResult(gain=gain, l=l, llk_each=llk_each, d_ext=d_ext)


def operating_point(params: ConverterParams, derived: DerivedConstants | None = None) -> OperatingPoint:
    """Solve the steady-state operating point by fixed-point iteration.

    Start from d_ext = 0, compute vo2 from the gain, i_l from the power
    balance, then d_ext from the extended-duty expression (clamped at
    zero) and repeat until the relative change drops below 1e-12. A 0.5
    damping factor is applied if the iterates oscillate.

    Raises ConvergenceError("no steady state") on iteration failure and
    ParameterError("commutation exceeds half-period") when the
    commutation ramp cannot fit inside the gate overlap window.
    """
    if derived is None:
        derived = derive(params)
    vo2 = params.vi * voltage_gain(params.n, params.d)   # d_ext = 0 start
    i_l = load_current(vo2, params.vi, params.r1, params.r2)
    d_ext = 0.0
    last_delta = 0.0
    converged = False
    for iteration in range(1, _FIXED_POINT_MAX_ITER + 1):
        i_l = load_current(vo2, params.vi, params.r1, params.r2)
        d_ext = extended_duty(params.d, i_l, params.llk1, params.n, vo2, params.fs)
        vo2_new = params.vi / (2.0 * (params.n * (1.0 - params.d - d_ext) + 1.0))
        delta = vo2_new - vo2
        if last_delta * delta < 0.0:
            vo2_new = 0.5 * (vo2_new + vo2)  # damp oscillation
            delta = vo2_new - vo2
        converged = abs(delta) <= _FIXED_POINT_RTOL * abs(vo2_new)
        vo2 = vo2_new
        last_delta = delta
        if converged:
            break
    if not converged:
        raise ConvergenceError("no steady state")
    i_l = load_current(vo2, params.vi, params.r1, params.r2)
    d_ext = extended_duty(params.d, i_l, params.llk1, params.n, vo2, params.fs)
    # Commutation must complete inside the overlap window (d - 0.5) t.
    ramp = i_l * derived.l_lkt / (2.0 * params.n * vo2)
    overlap = (params.d - 0.5) * derived.t
    if ramp >= overlap:
        raise ParameterError("commutation exceeds half-period")
    return OperatingPoint(vo1=2.0 * vo2, vo2=vo2, i_l=i_l, d_ext=d_ext, iterations=iteration)


def commutation_time(op: OperatingPoint, params: ConverterParams, derived: DerivedConstants) -> float:
    """Duration of the linear commutation ramp, i_l l_lkt / (2 n vo2)."""
    return op.i_l * derived.l_lkt / (2.0 * params.n * op.vo2)
