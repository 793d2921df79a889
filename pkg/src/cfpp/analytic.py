"""Closed-form steady-state engine.

Stitches the eight operating intervals of the converter into an exact
piecewise-affine waveform set over one period. The input inductor
current is treated as ripple-free here; the transient engine is the
independent oracle that carries the ripple.

Interval structure per half-period, anchored at the S1 turn-on (t = 0):

  1  [t0, t1)  one primary switch conducts, opposite diode pair carries
  2  [t1, t2)  snubber discharge (zero length, ideal devices)
  3  [t2, t3)  overlap: linear commutation until the diode pair current
               reaches zero
  4  [t3, t4)  secondary pair gated at zero voltage, ramp continues to
               full input current (other primary switch reaches zero
               current)
  5  [t4, t5)  ramp overshoot through the freed switch's body diode
  6  [t5, t6)  secondary pair off, opposite diodes conduct, currents
               ramp back
  7  [t6, t7)  snubber charge (zero length)
  8  [t7, t8)  single-switch conduction
The second half mirrors the first under the swap S1<->S2,
(S3,S6)<->(S4,S5).
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from . import design, pwm
from .errors import ParameterError
from .params import ConverterParams, derive
from .waveio import WAVEFORM_COLUMNS, Event, WaveformSet, params_hash

_QUANTITIES = WAVEFORM_COLUMNS  # affine within every segment


@dataclass(frozen=True)
class ModeSegment:
    """One affine piece of the periodic solution.

    coeffs maps each quantity name to (value at t_start, slope); every
    waveform is affine inside a segment and the branch currents are
    continuous across boundaries.
    """

    mode_id: int
    mirrored: bool
    t_start: float
    t_end: float
    sigma: int            # +1: (S3,S6) path clamps; -1: (S4,S5) path
    live1: bool           # primary branch 1 conducting
    live2: bool
    gates: frozenset
    coeffs: dict[str, tuple[float, float]]

    def value(self, name: str, t: float) -> float:
        v0, slope = self.coeffs[name]
        return v0 + slope * (t - self.t_start)


@dataclass(frozen=True)
class SteadyStateSolution:
    """Solved operating point plus the per-period segment table."""

    i_l: float
    vo1: float
    vo2: float
    d_ext: float
    boundaries: tuple[float, ...]   # t0..t8, t0 negative (wraps the anchor)
    i_lk1_peak: float
    i_d2_peak: float
    period: float
    ramp_slope: float               # commutation slope 2 n vo2 / l_lkt, A/s
    segments: tuple[ModeSegment, ...]
    schedule: pwm.GateSchedule


@dataclass(frozen=True)
class AnalyticState:
    """Snapshot of every device quantity at one instant."""

    time: float
    mode_id: int
    mirrored: bool
    values: dict[str, float]

    def __getattr__(self, name: str):
        try:
            return self.values[name]
        except KeyError:
            raise AttributeError(name) from None


def _require_ideal(params: ConverterParams) -> None:
    if any(c != 0.0 for c in params.csn):
        raise ParameterError(
            "analytic engine requires zero snubber capacitance; "
            "use the transient engine for csn > 0"
        )


def solve_steady_state(
    params: ConverterParams,
    schedule: pwm.GateSchedule | None = None,
) -> SteadyStateSolution:
    """Solve the operating point and build the closed-form segment table.

    vo2 follows the gain with the extended diode-conduction duty, i_l the
    ideal power balance, and the interval boundaries follow the
    commutation ramp plus the gate schedule.
    """
    derived = derive(params)
    _require_ideal(params)
    if schedule is None:
        schedule = pwm.build_schedule(params, derived)
    op = design.operating_point(params, derived)

    t = derived.t
    half = 0.5 * t
    kp = 2.0 * params.n * op.vo2 / derived.l_lkt      # A/s
    ramp = op.i_l / kp                                # commutation duration
    overlap = (params.d - 0.5) * t
    if ramp >= overlap:
        raise ParameterError("commutation exceeds half-period")

    t5 = pwm.secondary_off_time(schedule)
    t3 = 0.5 * ramp
    t4 = ramp
    if not t4 < t5 < half:
        raise ParameterError(
            f"secondary turn-off at {t5:.4g} s must fall after the commutation "
            f"ramp ({t4:.4g} s) and inside the half-period"
        )
    t6 = 2.0 * t5 - t4
    if t6 < overlap:
        raise ParameterError(
            "primary gate-off misses the diode conduction window "
            f"(diode clears at {t6:.4g} s, gate-off at {overlap:.4g} s)"
        )
    if t6 >= half:
        raise ParameterError("diode conduction does not clear within the half-period")
    # Interval 1 starts at the secondary gate-on when that lands in the
    # preceding single-conduction span; at high duty the gate-on slides
    # into the commutation window (still zero-voltage: the pair's diodes
    # conduct there), and the anchor falls back to the span midpoint.
    ton36, _ = schedule.raw["s3"]
    if ton36 > t3:
        raise ParameterError(
            "secondary gate-on misses its diode conduction window; duty "
            "cycle too high for zero-voltage turn-on"
        )
    t0 = ton36 if t6 - half < ton36 < 0.0 else 0.5 * (t6 - half)
    t8 = t0 + half
    boundaries = (t0, 0.0, 0.0, t3, t4, t5, t6, t6, t8)

    delta = kp * (t5 - t4)          # overshoot above i_l at t5
    segments = _build_segments(
        params, schedule, boundaries, period=t, i_l=op.i_l, vo2=op.vo2, kp=kp
    )
    return SteadyStateSolution(
        i_l=op.i_l,
        vo1=op.vo1,
        vo2=op.vo2,
        d_ext=op.d_ext,
        boundaries=boundaries,
        i_lk1_peak=op.i_l + delta,
        i_d2_peak=delta,
        period=t,
        ramp_slope=kp,
        segments=segments,
        schedule=schedule,
    )


def mode_boundaries(params: ConverterParams, sol: SteadyStateSolution) -> tuple[float, ...]:
    """The t0..t8 boundary instants of the solved half-period."""
    return sol.boundaries


def _i1_piecewise(
    boundaries: tuple[float, ...], period: float, i_l: float, kp: float
) -> list[tuple[float, float, float, float]]:
    """Branch-1 current as (t_start, t_end, value_at_start, slope) pieces."""
    _, _, _, t3, t4, t5, t6, _, _ = boundaries
    half = 0.5 * period
    peak = i_l + kp * (t5 - t4)
    return [
        (0.0, t5, 0.0, kp),                 # commutation up-ramp and overshoot
        (t5, t6, peak, -kp),                # back to i_l
        (t6, half, i_l, 0.0),               # single conduction
        (half, half + t5, i_l, -kp),        # mirrored: down through zero
        (half + t5, half + t6, i_l - peak, kp),
        (half + t6, period, 0.0, 0.0),      # branch open
    ]


def _build_segments(
    params: ConverterParams,
    schedule: pwm.GateSchedule,
    boundaries: tuple[float, ...],
    *,
    period: float,
    i_l: float,
    vo2: float,
    kp: float,
) -> tuple[ModeSegment, ...]:
    t = period
    half = 0.5 * t
    vo1 = 2.0 * vo2
    n = params.n
    t0, _, _, t3, t4, t5, t6, _, t8 = boundaries
    overlap = (params.d - 0.5) * t

    cuts = {0.0, t3, t4, t5, overlap, t6, t8, half}
    cuts |= {half + x for x in (t3, t4, t5, overlap, t6, t8) if half + x < t}
    cuts |= {tau for tau, _, _ in schedule.edges() if 0.0 < tau < t}
    cuts.add(t)
    grid = sorted(cuts)
    pieces = _i1_piecewise(boundaries, period, i_l, kp)
    mode_edges = [t0, 0.0, 0.0, t3, t4, t5, t6, t6, t8]

    def i1_at(tq: float) -> tuple[float, float]:
        for a, b, v0, slope in pieces:
            if a <= tq < b or (b == t and tq >= a):
                return v0 + slope * (tq - a), slope
        raise AssertionError(f"no branch piece for t={tq!r}")

    def mode_of(tm: float) -> tuple[int, bool]:
        mirrored = False
        tc = tm
        if tc >= t8 + half:
            tc -= t
        elif tc >= t8:
            tc -= half
            mirrored = True
        idx = bisect_right(mode_edges, tc) - 1
        idx = min(max(idx, 0), 7)
        return idx + 1, mirrored

    segments = []
    for a, b in zip(grid[:-1], grid[1:]):
        if b - a <= 0.0:
            continue
        tm = 0.5 * (a + b)
        v0, slope = i1_at(a)
        vm = v0 + slope * (tm - a)
        i2m = i_l - vm
        live1 = tm < half + t6
        live2 = tm < t6 or tm >= half
        sigma = +1 if (tm < t5 or tm >= half + t5) else -1
        jm = n * (2.0 * vm - i_l) / 2.0
        gates = frozenset(sw for sw in pwm.SWITCHES if schedule.is_on(sw, tm))

        c: dict[str, tuple[float, float]] = {}
        c["i_l"] = (i_l, 0.0)
        c["i_lk1"] = (v0, slope)
        c["i_lk2"] = (i_l - v0, -slope)
        j0 = n * (2.0 * v0 - i_l) / 2.0
        jslope = n * slope
        zero = (0.0, 0.0)
        c["i_s1"] = (v0, slope) if live1 and vm >= 0.0 else zero
        c["i_d1"] = (-v0, -slope) if live1 and vm < 0.0 else zero
        c["i_s2"] = (i_l - v0, -slope) if live2 and i2m >= 0.0 else zero
        c["i_d2"] = (v0 - i_l, slope) if live2 and i2m < 0.0 else zero
        c["i_s3"] = c["i_s6"] = (j0, jslope) if sigma > 0 and jm >= 0.0 else zero
        c["i_d3"] = c["i_d6"] = (-j0, -jslope) if sigma > 0 and jm < 0.0 else zero
        c["i_s4"] = c["i_s5"] = (-j0, -jslope) if sigma < 0 and jm < 0.0 else zero
        c["i_d4"] = c["i_d5"] = (j0, jslope) if sigma < 0 and jm >= 0.0 else zero
        block_v = 2.0 * n * vo2
        c["v_s1"] = zero if live1 else (block_v, 0.0)
        c["v_s2"] = zero if live2 else (block_v, 0.0)
        c["v_s3"] = c["v_s6"] = zero if sigma > 0 else (vo1, 0.0)
        c["v_s4"] = c["v_s5"] = (vo1, 0.0) if sigma > 0 else zero
        c["v_o1"] = (vo1, 0.0)
        c["v_o2"] = (vo2, 0.0)

        mode_id, mirrored = mode_of(tm)
        segments.append(
            ModeSegment(
                mode_id=mode_id,
                mirrored=mirrored,
                t_start=a,
                t_end=b,
                sigma=sigma,
                live1=live1,
                live2=live2,
                gates=gates,
                coeffs=c,
            )
        )
    return tuple(segments)


def eval_state(params: ConverterParams, sol: SteadyStateSolution, t: float) -> AnalyticState:
    """Every device current and voltage at time t (folded into the period)."""
    if t < 0.0:
        raise ParameterError(f"t must be nonnegative, got {t!r}")
    tm = math.fmod(t, sol.period)
    seg = _segment_at(sol, tm)
    values = {name: seg.value(name, tm) for name in _QUANTITIES}
    return AnalyticState(time=tm, mode_id=seg.mode_id, mirrored=seg.mirrored, values=values)


def _segment_at(sol: SteadyStateSolution, tm: float) -> ModeSegment:
    for seg in sol.segments:
        if seg.t_start <= tm < seg.t_end:
            return seg
    return sol.segments[-1]


def _event_log(params: ConverterParams, sol: SteadyStateSolution) -> list[Event]:
    t = sol.period
    half = 0.5 * t
    _, _, _, t3, t4, t5, t6, _, _ = sol.boundaries
    n, i_l = params.n, sol.i_l
    block_v = 2.0 * n * sol.vo2
    j5 = n * (i_l / 2.0 + sol.i_d2_peak)   # pair current at secondary turn-off

    def sigma_at(tq: float) -> int:
        ph = math.fmod(tq - t5, t)
        ph += t if ph < 0.0 else 0.0
        return -1 if ph < half else +1

    events = []
    for sw, (on, dur) in sol.schedule.raw.items():
        t_on = math.fmod(on, t)
        t_on += t if t_on < 0.0 else 0.0
        t_off = math.fmod(on + dur, t)
        t_off += t if t_off < 0.0 else 0.0
        if sw in ("s1", "s2"):
            events.append(Event(sw, "gate_on", t_on, value_i=0.0, value_v=block_v))
            events.append(Event(sw, "gate_off", t_off, value_i=0.0, value_v=0.0))
        else:
            pair = +1 if sw in ("s3", "s6") else -1
            v_on = 0.0 if sigma_at(t_on) == pair else sol.vo1
            events.append(Event(sw, "gate_on", t_on, value_i=0.0, value_v=v_on))
            events.append(Event(sw, "gate_off", t_off, value_i=j5, value_v=0.0))
    for dev, t_on, t_off in (
        ("d2", t4, t6),
        ("d1", half + t4, half + t6),
        ("d4", t5, half + t3),
        ("d5", t5, half + t3),
        ("d3", half + t5, t3),
        ("d6", half + t5, t3),
    ):
        events.append(Event(dev, "on", t_on, value_i=0.0, value_v=0.0))
        events.append(Event(dev, "off", t_off, value_i=0.0, value_v=0.0))
    events.sort(key=lambda e: (e.time, e.device))
    return events


def sample_waveforms(
    params: ConverterParams,
    sol: SteadyStateSolution,
    samples: int = 1024,
) -> WaveformSet:
    """Sample the closed-form solution on a uniform grid over one period."""
    if samples < 64:
        raise ParameterError(f"samples must be at least 64, got {samples}")
    tgrid = np.arange(samples) * (sol.period / samples)
    series = {name: np.empty(samples) for name in _QUANTITIES}
    for seg in sol.segments:
        j0 = int(math.ceil(seg.t_start * samples / sol.period - 1e-9))
        j1 = int(math.ceil(seg.t_end * samples / sol.period - 1e-9))
        if j1 <= j0:
            continue
        tt = tgrid[j0:j1] - seg.t_start
        for name in _QUANTITIES:
            v0, slope = seg.coeffs[name]
            series[name][j0:j1] = v0 + slope * tt
    return WaveformSet(
        period=sol.period,
        t=tgrid,
        series=series,
        events=_event_log(params, sol),
        converged=True,
        periods=1,
        params_hash=params_hash(params),
        engine="analytic",
        extras={"i_l_mean": sol.i_l, "vo1": sol.vo1, "vo2": sol.vo2},
    )
