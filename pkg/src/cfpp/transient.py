"""Transient engine: event-driven integration of the ideal-switch network.

Independent numerical oracle for the closed-form engine. The converter
is a piecewise-affine network: between switching events the state obeys
x' = A x + c for the conduction topology in force, and the step is taken
with the exact matrix exponential (no step-size error; events are
located by bisection to a time tolerance of 1e-9 periods).

Conduction model
----------------
* A conducting device is a zero-voltage branch; a blocking device is a
  zero-current branch, with its snubber capacitance (when nonzero) as
  the only dynamic element across it.
* A device carries reverse current through its body diode regardless of
  gate state; forward conduction requires the gate.
* The secondary bridge acts per diagonal pair: whichever pair conducts
  (channel or diode) clamps the winding to +vo1 or -vo1 and ties
  vo1 = 2 vo2 through the center tap. The pair current is attributed
  symmetrically to the two devices of the pair.

State vector: [i_lk1, i_lk2, v_co1, v_co2, v_csn1, v_csn2]; the input
inductor current is i_lk1 + i_lk2 by the tap node law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import design, pwm
from .errors import ConvergenceError, DegenerateNetworkError, ParameterError
from .params import ConverterParams, derive
from .waveio import Event, WaveformSet, params_hash

I1, I2, V1, V2, U1, U2 = range(6)
CLOSED, CAP, OPEN = 0, 1, 2

_TIME_TOL_FRACTION = 1e-9   # event bisection tolerance, fraction of the period


@dataclass(frozen=True)
class SimConfig:
    """Integrator settings.

    max_step: event-scan substep, s (None: period/128)
    event_tol: zero thresholds for currents/voltages, relative to the
        operating-point scale
    ss_tol: relative period-to-period state change that counts as
        periodic steady state
    max_periods: give up after this many periods
    samples_per_period: uniform output grid (>= 64)
    """

    max_step: float | None = None
    event_tol: float = 1e-9
    ss_tol: float = 1e-7
    max_periods: int = 4000
    samples_per_period: int = 1024

    def validated(self) -> "SimConfig":
        if self.max_step is not None and self.max_step <= 0:
            raise ParameterError("max_step must be positive")
        if self.event_tol <= 0 or self.ss_tol <= 0:
            raise ParameterError("tolerances must be positive")
        if self.max_periods < 1:
            raise ParameterError("max_periods must be at least 1")
        if self.samples_per_period < 64:
            raise ParameterError("samples_per_period must be at least 64")
        return self


@dataclass(frozen=True)
class CircuitState:
    """Instantaneous state and conduction snapshot of one sample."""

    time: float
    i_l: float
    i_lk1: float
    i_lk2: float
    v_co1: float
    v_co2: float
    v_csn: tuple[float, float, float, float, float, float]
    conducting: dict[str, bool]


def _unit(i: int) -> np.ndarray:
    v = np.zeros(6)
    v[i] = 1.0
    return v


@dataclass
class _Mats:
    """Assembled affine dynamics and output rows for one topology."""

    A: np.ndarray
    c: np.ndarray
    vt_row: np.ndarray
    vt_c: float
    e_row: np.ndarray
    e_c: float
    vdev1_row: np.ndarray
    vdev1_c: float
    vdev2_row: np.ndarray
    vdev2_c: float


def _assemble(p: ConverterParams, b1: int, b2: int, sigma: int) -> _Mats:
    llk, l, n = p.llk1, p.l, p.n
    live1, live2 = b1 != OPEN, b2 != OPEN
    u1row = _unit(U1) if b1 == CAP else np.zeros(6)
    u2row = _unit(U2) if b2 == CAP else np.zeros(6)
    zero = np.zeros(6)

    if sigma != 0:
        e_row, e_c = sigma * _unit(V2), 0.0
    else:
        e_row, e_c = zero.copy(), 0.0

    di1_row = zero.copy(); di1_c = 0.0
    di2_row = zero.copy(); di2_c = 0.0

    if live1 and live2:
        k = 2.0 + llk / l
        vt_row = (2.0 * _unit(V1) + u1row + u2row) / k
        vt_c = (llk / l) * p.vi / k
        if sigma != 0:
            di1_row = (vt_row + n * e_row - _unit(V1) - u1row) / llk
            di1_c = vt_c / llk
            di2_row = (vt_row - n * e_row - _unit(V1) - u2row) / llk
            di2_c = vt_c / llk
        else:
            di1_row = -vt_row / (2.0 * l)
            di1_c = (p.vi - vt_c) / (2.0 * l)
            di2_row, di2_c = di1_row.copy(), di1_c
            e_row = (u1row - u2row) / (2.0 * n)
            e_c = 0.0
    elif live1 or live2:
        sgn = 1.0 if live1 else -1.0
        urow = u1row if live1 else u2row
        if sigma != 0:
            d_row = (sgn * n * e_row - _unit(V1) - urow) / (l + llk)
            d_c = p.vi / (l + llk)
        else:
            d_row, d_c = zero.copy(), 0.0   # zero ampere-turns pin the current
            e_row = sgn * (_unit(V1) + urow) / n
            e_c = -sgn * p.vi / n
        if live1:
            di1_row, di1_c = d_row, d_c
        else:
            di2_row, di2_c = d_row, d_c
        vt_row = -l * d_row
        vt_c = p.vi - l * d_c
    else:
        vt_row, vt_c = zero.copy(), p.vi

    A = np.zeros((6, 6))
    c = np.zeros(6)
    A[I1], c[I1] = di1_row, di1_c
    A[I2], c[I2] = di2_row, di2_c
    if sigma != 0:
        ceq = 4.0 * p.co1 + p.co2
        gload = 4.0 / p.r1 + 1.0 / p.r2
        A[V2] = ((2.0 - sigma * n) * _unit(I1) + (2.0 + sigma * n) * _unit(I2)
                 - gload * _unit(V2)) / ceq
        A[V1] = 2.0 * A[V2]
    else:
        A[V1] = (_unit(I1) + _unit(I2) - _unit(V1) / p.r1) / p.co1
        A[V2] = -_unit(V2) / (p.r2 * p.co2)
    if b1 == CAP:
        A[U1] = _unit(I1) / p.csn[0]
    if b2 == CAP:
        A[U2] = _unit(I2) / p.csn[1]

    if b1 == CLOSED:
        vdev1_row, vdev1_c = zero.copy(), 0.0
    elif b1 == CAP:
        vdev1_row, vdev1_c = _unit(U1), 0.0
    else:
        vdev1_row = vt_row + n * e_row - _unit(V1)
        vdev1_c = vt_c + n * e_c
    if b2 == CLOSED:
        vdev2_row, vdev2_c = zero.copy(), 0.0
    elif b2 == CAP:
        vdev2_row, vdev2_c = _unit(U2), 0.0
    else:
        vdev2_row = vt_row - n * e_row - _unit(V1)
        vdev2_c = vt_c - n * e_c

    return _Mats(A, c, vt_row, vt_c, e_row, e_c,
                 vdev1_row, vdev1_c, vdev2_row, vdev2_c)


@dataclass(frozen=True)
class _Watch:
    """Affine event functional g(x) = row . x + const.

    direction +1 fires on an upward crossing of zero, -1 downward.
    topology_change=False entries are informational log entries only.
    """

    name: str
    row: np.ndarray
    const: float
    direction: int
    action: tuple
    topology_change: bool = True


class _Engine:
    def __init__(self, params: ConverterParams, schedule: pwm.GateSchedule, cfg: SimConfig):
        self.p = params
        self.sch = schedule
        self.cfg = cfg
        self.T = schedule.period
        self.half = 0.5 * self.T
        self.ttol = _TIME_TOL_FRACTION * self.T
        self.max_step = cfg.max_step if cfg.max_step is not None else self.T / 128.0

        try:
            op = design.operating_point(params)
            self.iscale = max(op.i_l, 1e-9)
            self.vscale = max(params.vi, 2.0 * params.n * op.vo2)
            self.seed_il = op.i_l
        except Exception:
            self.iscale = max(params.vi / min(params.r1, params.r2), 1e-9)
            self.vscale = params.vi
            self.seed_il = 0.0
        self.itol = cfg.event_tol * self.iscale
        self.stol = cfg.event_tol * self.iscale * params.n
        self.vtol = cfg.event_tol * self.vscale

        self._mats_cache: dict = {}
        self._watch_cache: dict = {}
        self._expm_cache: dict = {}

        # Edge groups within one period; edges at t = 0 apply at period start.
        groups: dict[float, list[tuple[str, str]]] = {}
        for tm, sw, kind in schedule.edges():
            groups.setdefault(tm, []).append((sw, kind))
        self._group0 = sorted(groups.pop(0.0, []))
        bounds = sorted(tm for tm in groups if 0.0 < tm < self.T)
        self._spans = []
        prev = 0.0
        for tm in bounds:
            self._spans.append((prev, tm, sorted(groups[tm])))
            prev = tm
        self._spans.append((prev, self.T, self._group0))

        # Mutable run state
        self.x = np.zeros(6)
        self.b1 = CLOSED
        self.b2 = CLOSED
        self.sigma = 0
        self.gates = {sw: False for sw in pwm.SWITCHES}
        self.t = 0.0
        self.energy_lost = 0.0
        self.recording = False
        self.pieces: list = []
        self.events: list[Event] = []
        self.rec_t0 = 0.0

    # -- topology bookkeeping -------------------------------------------------

    def _mats(self) -> _Mats:
        key = (self.b1, self.b2, self.sigma)
        m = self._mats_cache.get(key)
        if m is None:
            m = _assemble(self.p, *key)
            self._mats_cache[key] = m
        return m

    def _tkey(self):
        return (self.b1, self.b2, self.sigma)

    def _mats_for(self, key) -> _Mats:
        m = self._mats_cache.get(key)
        if m is None:
            m = _assemble(self.p, *key)
            self._mats_cache[key] = m
        return m

    def _flow(self, key, h: float) -> np.ndarray:
        ck = (key, h)
        f = self._expm_cache.get(ck)
        if f is None:
            m = self._mats_for(key)
            M = np.zeros((7, 7))
            M[:6, :6] = m.A
            M[:6, 6] = m.c
            f = expm(M * h)
            if len(self._expm_cache) > 4096:
                self._expm_cache.clear()
            self._expm_cache[ck] = f
        return f

    def _s(self) -> float:
        return self.p.n * (self.x[I2] - self.x[I1])

    def _eval(self, row: np.ndarray, const: float) -> float:
        return float(row @ self.x + const)

    def _stored_energy(self) -> float:
        i1, i2, v1, v2, u1, u2 = self.x
        il = i1 + i2
        e = 0.5 * (self.p.l * il * il + self.p.llk1 * (i1 * i1 + i2 * i2)
                   + self.p.co1 * v1 * v1 + self.p.co2 * v2 * v2)
        e += 0.5 * (self.p.csn[0] * u1 * u1 + self.p.csn[1] * u2 * u2)
        return e

    def _log(self, device: str, kind: str, value_i=float("nan"), value_v=float("nan")):
        if self.recording:
            self.events.append(
                Event(device, kind, self.t - self.rec_t0, value_i=value_i, value_v=value_v)
            )

    def _open_piece(self):
        if self.recording:
            self.pieces.append((self.t - self.rec_t0, self.x.copy(), self._tkey(),
                                dict(self.gates)))

    # -- discrete transitions -------------------------------------------------

    def _device_snapshot(self, sw: str) -> tuple[float, float]:
        """(channel current, device voltage) of a switch right now."""
        m = self._mats()
        if sw in ("s1", "s2"):
            b, idx = (self.b1, I1) if sw == "s1" else (self.b2, I2)
            cur = max(self.x[idx], 0.0) if b == CLOSED else 0.0
            row, const = (m.vdev1_row, m.vdev1_c) if sw == "s1" else (m.vdev2_row, m.vdev2_c)
            return cur, self._eval(row, const)
        s = self._s()
        e = self._eval(m.e_row, m.e_c)
        v1, v2 = self.x[V1], self.x[V2]
        if sw in ("s3", "s6"):
            cur = max(-0.5 * s, 0.0) if self.sigma > 0 else 0.0
            if self.sigma > 0:
                volt = 0.0
            elif self.sigma < 0:
                volt = v1
            else:
                volt = v1 - v2 - e if sw == "s3" else v2 - e
        else:
            cur = max(0.5 * s, 0.0) if self.sigma < 0 else 0.0
            if self.sigma < 0:
                volt = 0.0
            elif self.sigma > 0:
                volt = v1
            else:
                volt = v2 + e if sw == "s4" else v1 - v2 + e
        return cur, volt

    def _hard_open(self, k: int):
        """Force a branch current to zero at a gate-driven opening.

        The residual flux redistributes impulsively over the remaining
        inductive paths; the dropped energy is booked as switching loss.
        """
        idx = I1 if k == 1 else I2
        other = I2 if k == 1 else I1
        other_live = (self.b2 if k == 1 else self.b1) != OPEN
        if not other_live:
            raise DegenerateNetworkError("stiff/degenerate network")
        res = self.x[idx]
        e_before = self._stored_energy()
        lam = res / (1.0 / self.p.l + 1.0 / self.p.llk1)
        self.x[other] += lam / self.p.llk1
        self.x[idx] = 0.0
        self._set_branch(k, OPEN)
        self.energy_lost += max(e_before - self._stored_energy(), 0.0)
        self._log(f"s{k}", "hard_off", value_i=res)

    def _set_sigma(self, new: int):
        old = self.sigma
        if new == old:
            return
        s = self._s()
        if old > 0 and s > self.stol:
            self._log("d3", "off"), self._log("d6", "off")
        if old < 0 and s < -self.stol:
            self._log("d4", "off"), self._log("d5", "off")
        if new != 0:
            # project the output capacitors onto the vo1 = 2 vo2 manifold
            q = (2.0 * self.x[V2] - self.x[V1]) / (1.0 / self.p.co1 + 4.0 / self.p.co2)
            if q != 0.0:
                e_before = self._stored_energy()
                dv1 = q / self.p.co1
                self.x[V1] += dv1
                self.x[V2] -= 2.0 * q / self.p.co2
                self.energy_lost += max(e_before - self._stored_energy(), 0.0)
                if abs(dv1) > self.vtol:
                    self._log("bridge", "clamp_snap", value_v=dv1)
            if new > 0 and s > self.stol:
                self._log("d3", "on"), self._log("d6", "on")
            if new < 0 and s < -self.stol:
                self._log("d4", "on"), self._log("d5", "on")
        else:
            mean = 0.5 * (self.x[I1] + self.x[I2])
            self.x[I1] = self.x[I2] = mean
        self.sigma = new

    def _set_branch(self, k: int, state: int):
        if k == 1:
            self.b1 = state
        else:
            self.b2 = state

    def _normalize(self):
        """Settle the discrete state after a jump (event cascade)."""
        for _ in range(8):
            changed = False
            for k, idx in ((1, I1), (2, I2)):
                b = self.b1 if k == 1 else self.b2
                gate = self.gates[f"s{k}"]
                csn = self.p.csn[k - 1]
                ik = self.x[idx]
                if b == CLOSED and not gate and ik > self.itol:
                    if csn > 0.0:
                        self._set_branch(k, CAP)   # residual flows into the snubber
                    else:
                        self._hard_open(k)
                    changed = True
                elif b == CLOSED and not gate and -self.itol <= ik <= self.itol:
                    # open only if the blocked branch would be reverse-biased;
                    # otherwise the body diode holds the branch conducting
                    self.x[idx] = 0.0
                    self._set_branch(k, OPEN)
                    m = self._mats()
                    row, const = (m.vdev1_row, m.vdev1_c) if k == 1 else (m.vdev2_row, m.vdev2_c)
                    if self._eval(row, const) < -self.vtol:
                        self._set_branch(k, CLOSED)
                    else:
                        if csn > 0.0:
                            self._set_branch(k, CAP)
                        changed = True
                elif b in (CAP, OPEN) and gate:
                    if b == CAP:
                        u = U1 if k == 1 else U2
                        if self.x[u] != 0.0:
                            self.energy_lost += 0.5 * csn * self.x[u] ** 2
                            self._log(f"s{k}", "snubber_dump", value_v=self.x[u])
                        self.x[u] = 0.0
                    self._set_branch(k, CLOSED)
                    changed = True
                elif b == OPEN and not gate:
                    m = self._mats()
                    row, const = (m.vdev1_row, m.vdev1_c) if k == 1 else (m.vdev2_row, m.vdev2_c)
                    if self._eval(row, const) < -self.vtol:
                        self._set_branch(k, CLOSED)
                        self._log(f"d{k}", "on")
                        changed = True

            g36 = self.gates["s3"] and self.gates["s6"]
            g45 = self.gates["s4"] and self.gates["s5"]
            s = self._s()
            des = self.sigma
            if g36:
                des = +1
            elif g45:
                des = -1
            elif self.sigma == +1 and s < -self.stol:
                des = -1
            elif self.sigma == -1 and s > self.stol:
                des = +1
            elif self.sigma == 0 and abs(s) > self.stol:
                des = 1 if s > 0 else -1
            if des != self.sigma:
                self._set_sigma(des)
                changed = True

            if self.b1 == OPEN and self.b2 == OPEN and abs(self.x[I1] + self.x[I2]) > self.itol:
                raise DegenerateNetworkError("stiff/degenerate network")
            if not changed:
                return
        raise ConvergenceError("event cascade did not settle")

    def _apply_edges(self, actions: list[tuple[str, str]]):
        for sw, kind in actions:
            cur, volt = self._device_snapshot(sw)
            self.gates[sw] = kind == "on"
            self._log(sw, f"gate_{kind}", value_i=cur if kind == "off" else 0.0,
                      value_v=volt)
        self._normalize()
        self._open_piece()

    # -- watches --------------------------------------------------------------

    def _watches(self) -> list[_Watch]:
        key = (self._tkey(), self.gates["s1"], self.gates["s2"],
               self.gates["s3"] and self.gates["s6"],
               self.gates["s4"] and self.gates["s5"], self.recording)
        ws = self._watch_cache.get(key)
        if ws is not None:
            return ws
        m = self._mats()
        n = self.p.n
        ws = []
        for k, idx, b, gate in ((1, I1, self.b1, self.gates["s1"]),
                                (2, I2, self.b2, self.gates["s2"])):
            u = U1 if k == 1 else U2
            if b == CLOSED:
                if not gate:
                    ws.append(_Watch(f"d{k}_off", _unit(idx), 0.0, +1, ("open", k)))
                elif self.recording:
                    ws.append(_Watch(f"d{k}_log", _unit(idx), 0.0, 0, ("diode_log", k),
                                     topology_change=False))
            elif b == CAP:
                ws.append(_Watch(f"u{k}_zero", _unit(u), 0.0, -1, ("close", k)))
                if self.sigma != 0 and self.recording:
                    ws.append(_Watch(f"snub{k}", _unit(u) - 2.0 * n * _unit(V2),
                                     0.0, +1, ("snubber_clamp", k), topology_change=False))
            else:
                row, const = (m.vdev1_row, m.vdev1_c) if k == 1 else (m.vdev2_row, m.vdev2_c)
                ws.append(_Watch(f"d{k}_on", row, const, -1, ("close", k)))
        srow = n * (_unit(I2) - _unit(I1))
        g36 = self.gates["s3"] and self.gates["s6"]
        g45 = self.gates["s4"] and self.gates["s5"]
        if self.sigma == +1 and not g36:
            ws.append(_Watch("sec_zero", srow, 0.0, -1, ("sec_open",)))
        elif self.sigma == -1 and not g45:
            ws.append(_Watch("sec_zero", srow, 0.0, +1, ("sec_open",)))
        elif self.sigma == 0:
            ws.append(_Watch("sec_fwd_p", 2.0 * m.e_row - _unit(V1), 2.0 * m.e_c, +1,
                             ("sec_close", +1)))
            ws.append(_Watch("sec_fwd_n", -2.0 * m.e_row - _unit(V1), -2.0 * m.e_c, +1,
                             ("sec_close", -1)))
        self._watch_cache[key] = ws
        return ws

    def _apply_watch(self, w: _Watch):
        tag = w.action[0]
        if tag == "open":
            k = w.action[1]
            idx = I1 if k == 1 else I2
            self._log(f"d{k}", "off", value_i=abs(self.x[idx]))
            self.x[idx] = 0.0
            self._set_branch(k, CAP if self.p.csn[k - 1] > 0.0 else OPEN)
        elif tag == "close":
            k = w.action[1]
            self._set_branch(k, CLOSED)
            u = U1 if k == 1 else U2
            if self.p.csn[k - 1] > 0.0:
                self.x[u] = 0.0
            self._log(f"d{k}", "on")
        elif tag == "sec_open":
            pair = ("d3", "d6") if self.sigma > 0 else ("d4", "d5")
            for dev in pair:
                self._log(dev, "off")
            self._set_sigma(0)
        elif tag == "sec_close":
            self._set_sigma(w.action[1])
        elif tag == "diode_log":
            k = w.action[1]
            going_negative = self.x[I1 if k == 1 else I2] < 0.0
            self._log(f"d{k}", "on" if going_negative else "off")
            return  # no topology change
        elif tag == "snubber_clamp":
            self._log(f"s{w.action[1]}", "snubber_clamp",
                      value_v=self.x[U1 if w.action[1] == 1 else U2])
            return
        self._normalize()
        self._open_piece()

    # -- integration ----------------------------------------------------------

    def _crossed(self, w: _Watch, g0: float, g1: float) -> bool:
        if w.direction >= 0 and g0 < 0.0 <= g1:
            return True
        if w.direction <= 0 and g0 > 0.0 >= g1:
            return True
        return False

    def _bisect(self, key, x0: np.ndarray, h: float, ws, g0: np.ndarray):
        """Locate the earliest crossing inside (0, h] from state x0."""
        levels = max(1, math.ceil(math.log2(max(h / self.ttol, 2.0))))
        m = self._mats_cache[key]
        M = np.zeros((7, 7))
        M[:6, :6] = m.A
        M[:6, 6] = m.c
        fam = [None] * (levels + 1)
        fam[levels] = expm(M * (h / (1 << levels)))
        for j in range(levels - 1, -1, -1):
            fam[j] = fam[j + 1] @ fam[j + 1]
        W = np.array([w.row for w in ws])
        Wc = np.array([w.const for w in ws])
        z = np.append(x0, 1.0)
        g_cur = g0.copy()
        t_rel = 0.0
        for j in range(1, levels + 1):
            zc = fam[j] @ z
            gc = W @ zc[:6] + Wc
            if any(self._crossed(w, g_cur[i], gc[i]) for i, w in enumerate(ws)):
                continue  # crossing in the first half: refine
            z, g_cur, t_rel = zc, gc, t_rel + h / (1 << j)
        # one minimal step across the crossing
        zc = fam[levels] @ z
        gc = W @ zc[:6] + Wc
        fired = [i for i, w in enumerate(ws) if self._crossed(w, g_cur[i], gc[i])]
        if not fired:
            fired = [int(np.argmax(np.abs(gc - g_cur)))]
        return t_rel + h / (1 << levels), zc[:6], fired[0]

    def _integrate_to(self, t_end: float):
        while t_end - self.t > self.ttol:
            key = self._tkey()
            self._mats()
            ws = self._watches()
            span = t_end - self.t
            nsub = max(1, math.ceil(span / self.max_step))
            h = span / nsub
            phi = self._flow(key, h)
            W = np.array([w.row for w in ws]) if ws else np.zeros((0, 6))
            Wc = np.array([w.const for w in ws]) if ws else np.zeros(0)
            z = np.append(self.x, 1.0)
            g_prev = W @ self.x + Wc
            x_prev = self.x.copy()
            t_prev = self.t
            event = False
            for _ in range(nsub):
                z = phi @ z
                g_cur = W @ z[:6] + Wc
                if any(self._crossed(w, g_prev[i], g_cur[i]) for i, w in enumerate(ws)):
                    dt, x_ev, widx = self._bisect(key, x_prev, h, ws, g_prev)
                    self.t = t_prev + dt
                    self.x = x_ev
                    self._apply_watch(ws[widx])
                    event = True
                    break
                t_prev += h
                x_prev = z[:6].copy()
                g_prev = g_cur
            if not event:
                self.t = t_end
                self.x = z[:6].copy()
        self.t = t_end

    # -- main loop ------------------------------------------------------------

    def run(self, initial_state: np.ndarray | None, strict: bool):
        if initial_state is not None:
            self.x = np.asarray(initial_state, dtype=float).copy()
        else:
            self.x = np.zeros(6)
            self.x[I1] = self.x[I2] = 0.5 * self.seed_il
        self.gates = pwm.gate_state(self.sch, 0.0)
        for k, idx in ((1, I1), (2, I2)):
            if self.gates[f"s{k}"] or abs(self.x[idx]) > self.itol:
                self._set_branch(k, CLOSED)   # nonzero current needs a path
            else:
                self.x[idx] = 0.0
                self._set_branch(k, CAP if self.p.csn[k - 1] > 0.0 else OPEN)
        self.sigma = 0
        self._normalize()

        converged = False
        periods = 0
        x_prev = self.x.copy()
        scales = np.array([self.iscale, self.iscale, self.vscale, self.vscale,
                           self.vscale, self.vscale])
        for p in range(self.cfg.max_periods):
            base = p * self.T
            if p == 0:
                self._apply_edges(self._group0)
            for a, b, actions in self._spans:
                self._integrate_to(base + b)
                self._apply_edges(actions)
            periods = p + 1
            delta = np.abs(self.x - x_prev)
            denom = np.maximum(np.abs(self.x), 0.01 * scales)
            if np.max(delta / denom) < self.cfg.ss_tol:
                converged = True
                break
            x_prev = self.x.copy()
        if not converged and strict:
            raise ConvergenceError("no convergence")

        # Recording pass: one further period with sampling and event log.
        self.recording = True
        self.rec_t0 = self.t
        self.pieces = []
        self.events = []
        self.energy_lost = 0.0   # audit covers the recorded period only
        self._open_piece()
        base = self.t
        self._apply_edges(self._group0)
        for a, b, actions in self._spans:
            self._integrate_to(base + b)
            self._apply_edges(actions)
        x_end = self.x.copy()
        # the period-boundary edge group belongs to the next period
        self.events = [e for e in self.events if e.time < self.T - self.ttol]
        return self._sample(), converged, periods, x_end

    # -- output ---------------------------------------------------------------

    def _sample(self):
        N = self.cfg.samples_per_period
        dt = self.T / N
        tgrid = np.arange(N) * dt
        cols = {}
        vt_aug_t: list[float] = []
        vt_aug_v: list[float] = []

        spans = []
        for i, (t0, x0, key, gates) in enumerate(self.pieces):
            t1 = self.pieces[i + 1][0] if i + 1 < len(self.pieces) else self.T
            if t1 - t0 > 0.0:
                spans.append((t0, t1, x0, key, gates))

        chunks = []
        for t0, t1, x0, key, gates in spans:
            m = self._mats_cache[key]
            j0 = int(math.ceil(t0 / dt - 1e-9))
            j1 = int(math.ceil(t1 / dt - 1e-9))
            j1 = min(j1, N)
            xs = np.empty((max(j1 - j0, 0), 6))
            if j1 > j0:
                phi_dt = self._flow(key, dt)
                z = np.append(x0, 1.0)
                off = j0 * dt - t0
                z = (self._flow(key, off) @ z) if off > 0.0 else z
                for r in range(j1 - j0):
                    xs[r] = z[:6]
                    z = phi_dt @ z
            chunks.append((j0, j1, xs, key, gates))
            # endpoint values for the exact volt-second quadrature
            M = np.zeros((7, 7)); M[:6, :6] = m.A; M[:6, 6] = m.c
            x_end = (expm(M * (t1 - t0)) @ np.append(x0, 1.0))[:6]
            for tt, xx in ((t0, x0), (t1, x_end)):
                vt_aug_t.append(tt)
                vt_aug_v.append(float(m.vt_row @ xx + m.vt_c))

        names = list(_SERIES_NAMES)
        for nm in names:
            cols[nm] = np.zeros(N)
        for j0, j1, xs, key, gates in chunks:
            if j1 <= j0:
                continue
            vals = _signals(self.p, self._mats_cache[key], key, gates, xs)
            for nm in names:
                cols[nm][j0:j1] = vals[nm]

        # augmented v_tap trace ordered in time for quadrature
        order = np.argsort(np.array(vt_aug_t), kind="stable")
        extras = {
            "vt_t": np.array(vt_aug_t)[order],
            "vt_v": np.array(vt_aug_v)[order],
            "energy_lost": self.energy_lost,
        }
        return tgrid, cols, extras


_SERIES_NAMES = (
    "i_l", "i_lk1", "i_lk2",
    "i_s1", "i_s2", "i_s3", "i_s4", "i_s5", "i_s6",
    "i_d1", "i_d2", "i_d3", "i_d4", "i_d5", "i_d6",
    "v_s1", "v_s2", "v_s3", "v_s4", "v_s5", "v_s6",
    "v_o1", "v_o2", "v_csn1", "v_csn2",
)


def _signals(p: ConverterParams, m: _Mats, key, gates, xs: np.ndarray) -> dict:
    b1, b2, sigma = key
    i1 = xs[:, I1]
    i2 = xs[:, I2]
    v1 = xs[:, V1]
    v2 = xs[:, V2]
    u1 = xs[:, U1]
    u2 = xs[:, U2]
    zero = np.zeros(len(xs))
    out = {
        "i_l": i1 + i2, "i_lk1": i1, "i_lk2": i2,
        "v_o1": v1, "v_o2": v2, "v_csn1": u1, "v_csn2": u2,
    }
    out["i_s1"] = np.maximum(i1, 0.0) if b1 == CLOSED else zero
    out["i_d1"] = np.maximum(-i1, 0.0) if b1 == CLOSED else zero
    out["i_s2"] = np.maximum(i2, 0.0) if b2 == CLOSED else zero
    out["i_d2"] = np.maximum(-i2, 0.0) if b2 == CLOSED else zero
    if b1 == CLOSED:
        out["v_s1"] = zero
    elif b1 == CAP:
        out["v_s1"] = u1
    else:
        out["v_s1"] = xs @ m.vdev1_row + m.vdev1_c
    if b2 == CLOSED:
        out["v_s2"] = zero
    elif b2 == CAP:
        out["v_s2"] = u2
    else:
        out["v_s2"] = xs @ m.vdev2_row + m.vdev2_c

    s = p.n * (i2 - i1)
    half = 0.5 * s
    if sigma > 0:
        out["i_d3"] = out["i_d6"] = np.maximum(half, 0.0)
        out["i_s3"] = out["i_s6"] = np.maximum(-half, 0.0)
        out["i_s4"] = out["i_s5"] = out["i_d4"] = out["i_d5"] = zero
        out["v_s3"] = out["v_s6"] = zero
        out["v_s4"] = out["v_s5"] = v1
    elif sigma < 0:
        out["i_d4"] = out["i_d5"] = np.maximum(-half, 0.0)
        out["i_s4"] = out["i_s5"] = np.maximum(half, 0.0)
        out["i_s3"] = out["i_s6"] = out["i_d3"] = out["i_d6"] = zero
        out["v_s3"] = out["v_s6"] = v1
        out["v_s4"] = out["v_s5"] = zero
    else:
        e = xs @ m.e_row + m.e_c
        for nm in ("i_s3", "i_s4", "i_s5", "i_s6", "i_d3", "i_d4", "i_d5", "i_d6"):
            out[nm] = zero
        out["v_s3"] = v1 - v2 - e
        out["v_s4"] = v2 + e
        out["v_s5"] = v1 - v2 + e
        out["v_s6"] = v2 - e
    return out


def detect_next_event(
    params: ConverterParams,
    schedule: pwm.GateSchedule,
    x: np.ndarray,
    t: float,
    horizon: float,
) -> float | None:
    """Earliest switching event in (t, t + horizon], or None.

    Events are gate edges from the schedule plus the natural transitions
    of the conduction state (body-diode current zero crossings, device
    forward-bias onsets, snubber voltage reaching zero), the latter
    located by bisection on the exact segment flow to a time tolerance
    of 1e-9 periods. The conduction state is inferred from x and the
    gate states at t; x must be consistent with it.
    """
    cfg = SimConfig()
    engine = _Engine(params, schedule, cfg)
    engine.x = np.asarray(x, dtype=float).copy()
    engine.t = t
    engine.gates = pwm.gate_state(schedule, t)
    for k, idx in ((1, I1), (2, I2)):
        if engine.gates[f"s{k}"] or abs(engine.x[idx]) > engine.itol:
            engine._set_branch(k, CLOSED)
        else:
            engine._set_branch(k, CAP if params.csn[k - 1] > 0.0 else OPEN)
    engine.sigma = 0
    engine._normalize()

    tm = math.fmod(t, engine.T)
    next_edge = None
    for tau, _, _ in schedule.edges():
        if tau > tm + engine.ttol:
            next_edge = t + (tau - tm)
            break
    if next_edge is None and schedule.edges():
        next_edge = t + (engine.T - tm) + schedule.edges()[0][0]
    t_end = t + horizon
    scan_end = min(t_end, next_edge) if next_edge is not None else t_end

    key = engine._tkey()
    engine._mats()
    ws = engine._watches()
    if ws and scan_end - t > engine.ttol:
        span = scan_end - t
        nsub = max(1, math.ceil(span / engine.max_step))
        h = span / nsub
        phi = engine._flow(key, h)
        W = np.array([w.row for w in ws])
        Wc = np.array([w.const for w in ws])
        z = np.append(engine.x, 1.0)
        g_prev = W @ engine.x + Wc
        x_prev = engine.x.copy()
        t_prev = t
        for _ in range(nsub):
            z = phi @ z
            g_cur = W @ z[:6] + Wc
            if any(engine._crossed(w, g_prev[i], g_cur[i]) for i, w in enumerate(ws)):
                dt, _, _ = engine._bisect(key, x_prev, h, ws, g_prev)
                return t_prev + dt
            t_prev += h
            x_prev = z[:6].copy()
            g_prev = g_cur
    if next_edge is not None and next_edge <= t_end:
        return next_edge
    return None


def simulate(
    params: ConverterParams,
    schedule: pwm.GateSchedule | None = None,
    cfg: SimConfig | None = None,
    *,
    initial_state: np.ndarray | None = None,
    strict: bool = True,
) -> WaveformSet:
    """Integrate to periodic steady state and return final-period waveforms.

    strict=False returns the last period unconverged instead of raising
    ConvergenceError("no convergence").
    """
    derived = derive(params)
    if any(c != 0.0 for c in params.csn[2:]):
        raise ParameterError(
            "snubber capacitance on the bridge devices (csn3..csn6) is not modeled; "
            "set them to zero"
        )
    if schedule is None:
        schedule = pwm.build_schedule(params, derived)
    cfg = (cfg or SimConfig()).validated()
    engine = _Engine(params, schedule, cfg)
    (tgrid, cols, extras), converged, periods, x_end = engine.run(initial_state, strict)

    series = {k: v for k, v in cols.items() if k not in ("v_csn1", "v_csn2")}
    extras.update({
        "v_csn1": cols["v_csn1"],
        "v_csn2": cols["v_csn2"],
        "x_end": x_end,
        "i_l_mean": float(np.mean(series["i_l"])),
    })
    return WaveformSet(
        period=engine.T,
        t=tgrid,
        series=series,
        events=engine.events,
        converged=converged,
        periods=periods,
        params_hash=params_hash(params),
        engine="transient",
        extras=extras,
    )


@dataclass(frozen=True)
class SteadyStateMetrics:
    """Operating-point summary of a converged waveform set."""

    vo1: float
    vo2: float
    i_l: float
    i_lk1_peak: float
    i_lk2_peak: float
    device_peak_v: dict[str, float]
    device_peak_i: dict[str, float]
    energy_in: float
    energy_out: float
    energy_lost: float
    balance_rel: float
    volt_sec_l: float
    converged: bool


def steady_state_metrics(w: WaveformSet, params: ConverterParams) -> SteadyStateMetrics:
    """Period averages, device peaks and the energy audit of one period."""
    t = w.period
    i_l = w.series["i_l"]
    vo1 = w.series["v_o1"]
    vo2 = w.series["v_o2"]
    e_in = params.vi * float(np.mean(i_l)) * t
    e_out = (float(np.mean(vo1 ** 2)) / params.r1 + float(np.mean(vo2 ** 2)) / params.r2) * t
    peak_v = {}
    peak_i = {}
    for k in range(1, 7):
        peak_v[f"s{k}"] = float(np.max(np.abs(w.series[f"v_s{k}"])))
        peak_i[f"s{k}"] = float(np.max(np.abs(w.series[f"i_s{k}"])))
    if "vt_t" in w.extras:
        # average across the input inductor is vi minus the tap-node average
        v_tap_avg = float(np.trapezoid(w.extras["vt_v"], w.extras["vt_t"]) / t)
        volt_sec = params.vi - v_tap_avg
    else:
        volt_sec = 0.0
    return SteadyStateMetrics(
        vo1=float(np.mean(vo1)),
        vo2=float(np.mean(vo2)),
        i_l=float(np.mean(i_l)),
        i_lk1_peak=float(np.max(np.abs(w.series["i_lk1"]))),
        i_lk2_peak=float(np.max(np.abs(w.series["i_lk2"]))),
        device_peak_v=peak_v,
        device_peak_i=peak_i,
        energy_in=e_in,
        energy_out=e_out,
        energy_lost=float(w.extras.get("energy_lost", 0.0)),
        balance_rel=abs(e_in - e_out) / max(abs(e_in), 1e-30),
        volt_sec_l=volt_sec,
        converged=w.converged,
    )


def circuit_state(w: WaveformSet, index: int) -> CircuitState:
    """Snapshot of sample `index` as a CircuitState."""
    s = {k: float(v[index]) for k, v in w.series.items()}
    u1 = float(w.extras["v_csn1"][index]) if "v_csn1" in w.extras else 0.0
    u2 = float(w.extras["v_csn2"][index]) if "v_csn2" in w.extras else 0.0
    conducting = {}
    for k in range(1, 7):
        conducting[f"s{k}"] = s[f"i_s{k}"] > 0.0
        conducting[f"d{k}"] = s[f"i_d{k}"] > 0.0
    return CircuitState(
        time=float(w.t[index]),
        i_l=s["i_l"],
        i_lk1=s["i_lk1"],
        i_lk2=s["i_lk2"],
        v_co1=s["v_o1"],
        v_co2=s["v_o2"],
        v_csn=(u1, u2, 0.0, 0.0, 0.0, 0.0),
        conducting=conducting,
    )
