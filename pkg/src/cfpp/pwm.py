"""Gate-signal generation for the six switches.

The comparator-based modulator is realized as precomputed interval sets:
S1 anchors the period at t = 0, S2 runs 180 degrees later, and the
secondary pairs (S3,S6) / (S4,S5) are placed so their turn-off lands
just after the commutation ramp completes, which is what lets the
primary switches turn off at zero current. Turn-on of a secondary pair
falls inside its body-diode conduction window, so it happens at zero
voltage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import design
from .errors import ParameterError
from .params import ConverterParams, DerivedConstants, derive

SWITCHES = ("s1", "s2", "s3", "s4", "s5", "s6")

# Default turn-off guard added after the commutation ramp, as a fraction
# of the period. Keeps the body diode conducting across the primary
# gate-off instant despite ripple-induced timing drift.
DEFAULT_ZCS_GUARD_FRACTION = 0.002


def _wrap_interval(start: float, duration: float, period: float) -> tuple[tuple[float, float], ...]:
    """Fold (start, start+duration) into non-wrapping pieces inside [0, period)."""
    if not 0.0 < duration < period:
        raise ParameterError(f"on duration must lie in (0, period), got {duration!r}")
    a = math.fmod(start, period)
    if a < 0.0:
        a += period
    b = a + duration
    if b <= period:
        return ((a, b),)
    return ((a, period), (0.0, b - period))


@dataclass(frozen=True)
class GateSchedule:
    """Periodic on/off intervals for S1..S6.

    raw maps each switch to its single (turn_on, duration) pair before
    folding; turn_on may be negative (an interval wrapping the period
    boundary). on_intervals holds the folded half-open pieces.
    """

    period: float
    raw: dict[str, tuple[float, float]]
    on_intervals: dict[str, tuple[tuple[float, float], ...]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.on_intervals:
            folded = {
                sw: _wrap_interval(on, dur, self.period) for sw, (on, dur) in self.raw.items()
            }
            object.__setattr__(self, "on_intervals", folded)

    def is_on(self, switch: str, t: float) -> bool:
        tm = math.fmod(t, self.period)
        if tm < 0.0:
            tm += self.period
        return any(a <= tm < b for a, b in self.on_intervals[switch])

    def edges(self) -> list[tuple[float, str, str]]:
        """Sorted (time, switch, 'on'|'off') edge list within [0, period)."""
        out = []
        for sw, (on, dur) in self.raw.items():
            t_on = math.fmod(on, self.period)
            if t_on < 0.0:
                t_on += self.period
            t_off = math.fmod(on + dur, self.period)
            if t_off < 0.0:
                t_off += self.period
            out.append((t_on, sw, "on"))
            out.append((t_off, sw, "off"))
        out.sort()
        return out

    def on_fraction(self, switch: str) -> float:
        return sum(b - a for a, b in self.on_intervals[switch]) / self.period


def gate_state(schedule: GateSchedule, t: float) -> dict[str, bool]:
    """On/off state of every switch at time t (half-open semantics)."""
    if t < 0.0:
        raise ParameterError(f"t must be nonnegative, got {t!r}")
    return {sw: schedule.is_on(sw, t) for sw in SWITCHES}


def build_schedule(
    params: ConverterParams,
    derived: DerivedConstants | None = None,
    *,
    zcs_guard: float | None = None,
) -> GateSchedule:
    """Construct the gate schedule for a validated parameter set.

    S1 turns on at t = 0 and conducts for d*t; S2 is the same interval
    shifted by half a period, so the two overlap for (2d - 1)*t per
    period. Each secondary pair conducts for (1 - d)*t. Its turn-off is
    placed after the commutation ramp so that the extended
    diode-conduction duty matches the closed-form design expression,
    plus a small guard; its turn-on then falls inside the pair's
    body-diode conduction window (zero-voltage turn-on).
    """
    if derived is None:
        derived = derive(params)
    t = derived.t
    if zcs_guard is None:
        zcs_guard = DEFAULT_ZCS_GUARD_FRACTION * t
    if zcs_guard < 0.0:
        raise ParameterError(f"zcs_guard must be nonnegative, got {zcs_guard!r}")

    op = design.operating_point(params, derived)
    overlap = (params.d - 0.5) * t
    ramp = design.commutation_time(op, params, derived)
    # Conduction extension past the ramp: the first branch keeps the
    # extended-duty expression exact, the second is the floor that keeps
    # the body diode conducting until the primary gate-off.
    ext = max(overlap - 1.5 * ramp, 0.5 * (overlap - ramp))
    t_sec_off = ramp + ext + zcs_guard
    t_sec_on = t_sec_off - derived.duty_secondary * t  # usually in the previous half
    sec_duration = derived.duty_secondary * t
    # Zero-voltage turn-on requires the gate to rise while the pair's body
    # diodes still conduct, i.e. before the commutation midpoint. Above
    # d of about 5/6 the required conduction window outgrows (1 - d) t.
    if t_sec_on > 0.5 * ramp:
        raise ParameterError(
            "secondary conduction window exceeds its gate duty; duty cycle "
            "too high for zero-voltage turn-on"
        )

    raw = {
        "s1": (0.0, params.d * t),
        "s2": (0.5 * t, params.d * t),
        "s3": (t_sec_on, sec_duration),
        "s6": (t_sec_on, sec_duration),
        "s4": (t_sec_on + 0.5 * t, sec_duration),
        "s5": (t_sec_on + 0.5 * t, sec_duration),
    }
    return GateSchedule(period=t, raw=raw)


def secondary_off_time(schedule: GateSchedule) -> float:
    """Turn-off instant of the (S3,S6) pair within [0, period)."""
    on, dur = schedule.raw["s3"]
    t_off = math.fmod(on + dur, schedule.period)
    if t_off < 0.0:
        t_off += schedule.period
    return t_off


def sample_gates(schedule: GateSchedule, samples: int) -> list[tuple[float, ...]]:
    """One period of gate states on a uniform grid: rows (t, s1..s6) with 0/1."""
    if samples < 2:
        raise ParameterError(f"samples must be at least 2, got {samples}")
    rows = []
    for j in range(samples):
        tj = j * schedule.period / samples
        state = gate_state(schedule, tj)
        rows.append((tj, *(1 if state[sw] else 0 for sw in SWITCHES)))
    return rows
