#!/usr/bin/env python3
"""Gain-versus-duty sweep comparing the two engines.

For each duty cycle the leakage is re-chosen from the zero-current
design equation (so commutation always fits) and both engines are run.
Writes out/sweep_duty.csv with columns:
d, vo2_gain_formula, vo2_analytic, vo2_transient, i_l_analytic, i_l_transient
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

import numpy as np

from cfpp import ConverterParams, SimConfig, design, analytic, transient

ROOT = pathlib.Path(__file__).resolve().parent.parent


def params_for_duty(d: float) -> ConverterParams:
    vi, n, fs, r = 48.0, 8.0, 40e3, 4.5
    vo2 = vi * design.voltage_gain(n, d)
    i_l = design.load_current(vo2, vi, r, r)
    llk = design.leakage_for_zcs(n, vo2, d, i_l, fs)
    l_in = design.input_inductance(n, d, 0.15 * i_l, fs, vi)
    return ConverterParams(vi=vi, l=l_in, llk1=llk, llk2=llk, ci=0.0,
                           co1=220e-6, co2=220e-6, n=n, d=d, fs=fs, r1=r, r2=r)


def main() -> int:
    out = ROOT / "out"
    out.mkdir(exist_ok=True)
    rows = ["d,vo2_gain_formula,vo2_analytic,vo2_transient,i_l_analytic,i_l_transient"]
    for d in np.linspace(0.55, 0.82, 10):
        p = params_for_duty(float(d))
        sol = analytic.solve_steady_state(p)
        w = transient.simulate(p, cfg=SimConfig(samples_per_period=512))
        m = transient.steady_state_metrics(w, p)
        vo2_formula = p.vi * design.voltage_gain(p.n, p.d)
        rows.append(f"{d!r},{vo2_formula!r},{sol.vo2!r},{m.vo2!r},{sol.i_l!r},{m.i_l!r}")
        print(f"d={d:.3f}  gain formula {vo2_formula:7.4f}  analytic {sol.vo2:7.4f}  "
              f"transient {m.vo2:7.4f} V   ({w.periods} periods)")
    (out / "sweep_duty.csv").write_text("\n".join(rows) + "\n")
    print(f"wrote {out / 'sweep_duty.csv'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
