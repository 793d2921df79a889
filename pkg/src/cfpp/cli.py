"""Command-line entry point.

Subcommands: analytic, simulate, analyze, design, verify. Exit codes:
0 success, 1 validation/config error, 2 convergence failure,
3 acceptance failure. All file outputs carry the resolved parameter
hash in a header comment; outputs are byte-identical across runs of the
same config.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from . import analytic, design, pwm, softswitch, transient, verify
from .config import LoadedConfig, load_config
from .errors import (AnalyzerError, ConfigError, ConvergenceError,
                     DegenerateNetworkError, ParameterError)
from .params import ConverterParams, derive
from .waveio import (params_hash, write_events_csv, write_gates_csv,
                     write_waveforms_csv)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONVERGENCE = 2
EXIT_ACCEPTANCE = 3


@dataclass(frozen=True)
class RunManifest:
    """Resolved inputs of one CLI run."""

    params: ConverterParams
    engine: str                     # analytic | simulate | analyze | verify
    sim: transient.SimConfig
    out_dir: Path
    deterministic: bool = True      # no seeded randomness anywhere


def _add_common(sub):
    sub.add_argument("--config", required=True, help="key = value config file")
    sub.add_argument("--out", default="cfpp_out", help="output directory")
    sub.add_argument("--samples", type=int, help="samples per period")
    sub.add_argument("--periods", type=int, help="maximum periods to integrate")
    sub.add_argument("--gates-csv", action="store_true",
                     help="also dump one period of gate states (gates.csv)")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cfpp",
        description="dual-output step-down current-fed push-pull converter toolkit",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("analytic", help="closed-form steady-state waveforms"))
    _add_common(sub.add_parser("simulate", help="event-driven transient to steady state"))

    an = sub.add_parser("analyze", help="soft-switching report from both engines")
    _add_common(an)
    an.add_argument("--thresh-zcs", type=float, default=2.0,
                    help="turn-off current threshold, percent of peak S1 current")
    an.add_argument("--thresh-zvs", type=float, default=2.0,
                    help="turn-on voltage threshold, percent of vo1")

    ve = sub.add_parser("verify", help="run both engines and grade all acceptance checks")
    _add_common(ve)
    ve.add_argument("--thresh-zcs", type=float, default=2.0)
    ve.add_argument("--thresh-zvs", type=float, default=2.0)

    de = sub.add_parser("design", help="closed-form design from a target spec")
    de.add_argument("--vi", type=float, required=True)
    de.add_argument("--vo2", type=float, required=True)
    de.add_argument("--n", type=float, required=True)
    de.add_argument("--fs", type=str, required=True, help="switching frequency (SI suffixes ok)")
    de.add_argument("--load", type=float, default=4.5, help="load resistance on both outputs")
    de.add_argument("--ripple-pct", type=float, default=15.0,
                    help="input current ripple, percent of the input current")
    return ap


def _manifest(args, engine: str) -> tuple[RunManifest, LoadedConfig]:
    loaded = load_config(args.config)
    sim = loaded.sim
    if args.samples is not None or args.periods is not None:
        sim = transient.SimConfig(
            max_step=sim.max_step,
            event_tol=sim.event_tol,
            ss_tol=sim.ss_tol,
            max_periods=args.periods if args.periods is not None else sim.max_periods,
            samples_per_period=args.samples if args.samples is not None else sim.samples_per_period,
        ).validated()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    probe = out_dir / ".write_probe"
    try:
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {out_dir} not writable: {exc}") from exc
    for warning in loaded.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return RunManifest(params=loaded.params, engine=engine, sim=sim, out_dir=out_dir), loaded


def _dump_gates(manifest: RunManifest):
    derived = derive(manifest.params)
    schedule = pwm.build_schedule(manifest.params, derived)
    rows = pwm.sample_gates(schedule, manifest.sim.samples_per_period)
    write_gates_csv(manifest.out_dir / "gates.csv", rows, manifest.params)


def _print_solution(sol: analytic.SteadyStateSolution):
    print(f"operating point: vo1={sol.vo1:.6g} V vo2={sol.vo2:.6g} V "
          f"i_l={sol.i_l:.6g} A d_ext={sol.d_ext:.6g}")
    labels = [f"t{i}" for i in range(9)]
    print("interval boundaries [us]: " +
          " ".join(f"{lb}={b*1e6:.4f}" for lb, b in zip(labels, sol.boundaries)))
    print(f"peaks: i_lk1={sol.i_lk1_peak:.6g} A, reverse diode {sol.i_d2_peak:.6g} A")


def _cmd_analytic(args) -> int:
    manifest, _ = _manifest(args, "analytic")
    sol = analytic.solve_steady_state(manifest.params)
    w = analytic.sample_waveforms(manifest.params, sol, manifest.sim.samples_per_period)
    write_waveforms_csv(manifest.out_dir / "waveforms_analytic.csv", w)
    write_events_csv(manifest.out_dir / "events_analytic.csv", w)
    if args.gates_csv:
        _dump_gates(manifest)
    _print_solution(sol)
    print(f"wrote {manifest.out_dir}/waveforms_analytic.csv "
          f"[params {params_hash(manifest.params)}]")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    manifest, _ = _manifest(args, "simulate")
    w = transient.simulate(manifest.params, cfg=manifest.sim)
    m = transient.steady_state_metrics(w, manifest.params)
    write_waveforms_csv(manifest.out_dir / "waveforms_transient.csv", w)
    write_events_csv(manifest.out_dir / "events_transient.csv", w)
    if args.gates_csv:
        _dump_gates(manifest)
    print(f"converged in {w.periods} periods")
    print(f"operating point: vo1={m.vo1:.6g} V vo2={m.vo2:.6g} V i_l={m.i_l:.6g} A")
    print(f"energy audit: in={m.energy_in:.6g} J out={m.energy_out:.6g} J "
          f"(relative imbalance {m.balance_rel:.2e})")
    print(f"wrote {manifest.out_dir}/waveforms_transient.csv "
          f"[params {params_hash(manifest.params)}]")
    return EXIT_OK


def _cmd_analyze(args) -> int:
    manifest, _ = _manifest(args, "analyze")
    thresholds = softswitch.Thresholds(zcs_pct=args.thresh_zcs, zvs_pct=args.thresh_zvs)
    results, art = verify.run_verification(manifest.params, manifest.sim, thresholds)
    print("transient engine:")
    print(softswitch.report_text(art.report_transient))
    print()
    print("closed-form engine:")
    print(softswitch.report_text(art.report_analytic))
    print()
    print(softswitch.comparison_text(art.comparison))
    csv_path = manifest.out_dir / "report.csv"
    csv_path.write_text(
        f"# cfpp report params={params_hash(manifest.params)}\n"
        + "\n".join(softswitch.comparison_csv_rows(art.comparison)) + "\n"
    )
    if args.gates_csv:
        _dump_gates(manifest)
    print(f"wrote {csv_path}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    manifest, _ = _manifest(args, "verify")
    thresholds = softswitch.Thresholds(zcs_pct=args.thresh_zcs, zvs_pct=args.thresh_zvs)
    results, art = verify.run_verification(manifest.params, manifest.sim, thresholds)
    write_waveforms_csv(manifest.out_dir / "waveforms_analytic.csv", art.w_analytic)
    write_events_csv(manifest.out_dir / "events_analytic.csv", art.w_analytic)
    write_waveforms_csv(manifest.out_dir / "waveforms_transient.csv", art.w_transient)
    write_events_csv(manifest.out_dir / "events_transient.csv", art.w_transient)
    if args.gates_csv:
        _dump_gates(manifest)
    print(softswitch.comparison_text(art.comparison))
    print()
    all_pass = True
    for r in results:
        flag = "PASS" if r.passed else "FAIL"
        all_pass &= r.passed
        print(f"[{flag}] {r.index:>2}. {r.name}: {r.detail}")
    print()
    print(f"verification {'passed' if all_pass else 'FAILED'} "
          f"({sum(r.passed for r in results)}/{len(results)} checks)")
    return EXIT_OK if all_pass else EXIT_ACCEPTANCE


def _cmd_design(args) -> int:
    from .config import parse_si
    fs = parse_si(args.fs)
    d = design.duty_for_gain(args.n, args.vi, args.vo2)
    i_l = design.load_current(args.vo2, args.vi, args.load, args.load)
    delta_ii = args.ripple_pct / 100.0 * i_l
    inputs = design.DesignInputs(vi=args.vi, vo2_target=args.vo2, n=args.n, d=d,
                                 i_l=i_l, delta_ii=delta_ii, fs=fs)
    result = design.solve_design(inputs)
    print(f"design result: D={d:.6g} gain={result.gain:.6g} i_l={i_l:.6g} A")
    print(f"  input inductance     l    = {result.l*1e6:.4g} uH "
          f"(ripple {delta_ii:.4g} A = {args.ripple_pct:g}%)")
    print(f"  leakage (each)       llk  = {result.llk_each*1e6:.4g} uH "
          f"(total {2*result.llk_each*1e6:.4g} uH)")
    print(f"  extended diode duty  dext = {result.d_ext:.3g}")
    print(f"  outputs: vo1={2*args.vo2:.6g} V vo2={args.vo2:.6g} V")
    print()
    print("# config stanza, ready for `cfpp simulate --config`")
    print(f"vi = {args.vi!r}")
    print(f"l = {result.l!r}")
    print(f"llk1 = {result.llk_each!r}")
    print(f"llk2 = {result.llk_each!r}")
    print(f"n = {args.n!r}")
    print(f"d = {d!r}")
    print(f"r1 = {args.load!r}")
    print(f"r2 = {args.load!r}")
    print(f"fs = {fs!r}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "analytic": _cmd_analytic,
        "simulate": _cmd_simulate,
        "analyze": _cmd_analyze,
        "verify": _cmd_verify,
        "design": _cmd_design,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConvergenceError, DegenerateNetworkError, AnalyzerError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))  # pragma: no cover
