"""Waveform containers and CSV export shared by both engines.

Both engines emit the same schema so their outputs are directly
comparable: a uniform sample grid over one period plus an event log
whose times are stored exactly (they generally fall between grid
points).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields

import numpy as np

from .params import ConverterParams

# Column order of the waveform CSV (after the leading t column).
WAVEFORM_COLUMNS = (
    "i_l", "i_lk1", "i_lk2",
    "i_s1", "i_s2", "i_s3", "i_s4", "i_s5", "i_s6",
    "i_d1", "i_d2", "i_d3", "i_d4", "i_d5", "i_d6",
    "v_s1", "v_s2", "v_s3", "v_s4", "v_s5", "v_s6",
    "v_o1", "v_o2",
)


@dataclass(frozen=True)
class Event:
    """One switching event: device (s1..s6, d1..d6), kind, exact time.

    value_i / value_v hold the device current / voltage captured at the
    instant (current just before a turn-off, voltage just before a
    turn-on); NaN when not applicable.
    """

    device: str
    kind: str
    time: float
    value_i: float = float("nan")
    value_v: float = float("nan")


@dataclass
class WaveformSet:
    """Sampled final-period waveforms plus the event log."""

    period: float
    t: np.ndarray                      # uniform grid covering [0, period)
    series: dict[str, np.ndarray]      # keys from WAVEFORM_COLUMNS
    events: list[Event]
    converged: bool
    periods: int
    params_hash: str
    engine: str
    extras: dict = field(default_factory=dict)

    def copy(self) -> "WaveformSet":
        return WaveformSet(
            period=self.period,
            t=self.t.copy(),
            series={k: v.copy() for k, v in self.series.items()},
            events=list(self.events),
            converged=self.converged,
            periods=self.periods,
            params_hash=self.params_hash,
            engine=self.engine,
            extras=dict(self.extras),
        )

    def equals(self, other: "WaveformSet") -> bool:
        """Value equality of grid, series and events (read-only checks)."""
        if self.period != other.period or len(self.events) != len(other.events):
            return False
        if not np.array_equal(self.t, other.t):
            return False
        if set(self.series) != set(other.series):
            return False
        return all(np.array_equal(self.series[k], other.series[k]) for k in self.series) and (
            self.events == other.events
        )


def _fmt(x: float) -> str:
    return repr(float(x))


def params_hash(params: ConverterParams) -> str:
    """Short stable hash of the resolved parameter set."""
    parts = []
    for f in fields(params):
        parts.append(f"{f.name}={getattr(params, f.name)!r}")
    digest = hashlib.sha256(";".join(parts).encode()).hexdigest()
    return digest[:12]


def write_waveforms_csv(path, w: WaveformSet) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# cfpp waveforms engine={w.engine} params={w.params_hash}\n")
        fh.write("t," + ",".join(WAVEFORM_COLUMNS) + "\n")
        cols = [w.series[name] for name in WAVEFORM_COLUMNS]
        for j in range(len(w.t)):
            row = [_fmt(w.t[j])] + [_fmt(c[j]) for c in cols]
            fh.write(",".join(row) + "\n")


def write_events_csv(path, w: WaveformSet) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# cfpp events engine={w.engine} params={w.params_hash}\n")
        fh.write("t,device,kind\n")
        for ev in sorted(w.events, key=lambda e: (e.time, e.device)):
            fh.write(f"{_fmt(ev.time)},{ev.device},{ev.kind}\n")


def write_gates_csv(path, rows, params: ConverterParams) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# cfpp gates params={params_hash(params)}\n")
        fh.write("t,s1,s2,s3,s4,s5,s6\n")
        for row in rows:
            fh.write(",".join([_fmt(row[0])] + [str(int(v)) for v in row[1:]]) + "\n")
