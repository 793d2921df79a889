"""Reference values for the shipped 48 V dual-output benchmark design.

Two reference columns exist for the benchmark operating point: one from
closed-form analysis, one from an independent circuit-simulator run of
the same design. Notes on known quirks of those references:

* The tabulated leakage inductance (1109 uH, equal to the input
  inductance) is inconsistent with the design's own leakage equation,
  which gives ~110.9 uH at the benchmark operating point; with the
  tabulated value the commutation ramp cannot fit inside the gate
  overlap at all. The shipped config therefore uses 110.9 uH; the
  tabulated literal stays accepted as an explicit override and is
  flagged with a warning.
* The reference peak switch voltage (55.12 V) is half of 2 n vo2
  evaluated with the reference's own vo2; comparisons annotate the 2x
  convention difference instead of failing.
* The reference circuit-simulator column matches a voltage gain of
  vi / (2 n (1 - d) + 1), while the closed-form gain implemented here
  (and consistent with the interval equations) is
  vi / (2 (n (1 - d) + 1)). Both engines implement the latter, so the
  transient result tracks the analytic column, not the simulator column.
"""

# Benchmark component values (shipped as benchmark.cfg).
BENCHMARK = {
    "vi": 48.0,
    "l": 1109e-6,
    "llk_corrected": 110.9e-6,
    "llk_tabulated": 1109e-6,
    "ci": 4700e-6,
    "co": 220e-6,
    "n": 8.0,
    "d": 0.67,
    "r": 4.5,
    "fs": 40e3,
}

# Reference operating point, closed-form analysis column.
REFERENCE_ANALYTIC = {
    "vo1": 13.78,
    "vo2": 6.89,
    "v_peak_switch": 55.12,
    "i_lk2_peak": 1.06,
    "i_s_peak": 0.89,
}

# Reference operating point, circuit-simulator column.
REFERENCE_SIMULATION = {
    "vo1": 15.15,
    "vo2": 7.54,
    "v_peak_switch": 57.3,
    "i_lk2_peak": 1.17,
    "i_s_peak": 0.91,
}
