"""Command-line entry point: one subcommand per experiment family.

Exit codes: 0 success, 1 configuration/validation error, 2 runtime or
numerical failure (reported together with the run's stability diagnostics).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .detectors import DetectorArray, DetectorError
from .ensemble import (
    EnsembleError,
    collapse_time_runs,
    detector_probabilities,
    fit_power_law,
    qm_baseline,
    scan_r0,
    scan_sampled,
)
from .grid import GridError, ground_state
from .guidance import GuidanceError
from .schrodinger import SchrodingerError
from .cli_io import (
    SUITE_SCENARIOS,
    ConfigError,
    ExperimentSpec,
    emit_baseline_csv,
    emit_density_csv,
    emit_detectors_csv,
    emit_fit_csv,
    emit_nsweep_csv,
    emit_report_csv,
    emit_run_csv,
    emit_scan_csv,
    parse_config,
)
from .simulation import OutcomeKind, RunOutcome, SimulationError, run

# a run whose pseudo-norm moved this much is numerically untrustworthy
NORM_FAILURE = 1e-2

_KIND_OF_COMMAND = {
    "run": "single_run",
    "scan": "scan",
    "nsweep": "n_sweep",
    "baseline": "baseline",
    "suite": "two_detector_suite",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dbbwell",
        description="Pilot-wave collapse experiments in a 1-D infinite square well",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "one coupled run (defaults: detector at x0=5, r0=5.5)"),
        ("scan", "Born-weighted scan over r0 against the 10-detector array"),
        ("nsweep", "collapse time versus detector degrees of freedom"),
        ("baseline", "standard-QM window probabilities of the initial state"),
        ("suite", "the four two-detector placement scenarios"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, default=None,
                       help="key = value experiment document")
        p.add_argument("--out", type=Path, default=Path("out"),
                       help="output directory for CSV files")
        p.add_argument("--threads", type=int, default=1,
                       help="parallel runs for scan (default 1)")
        p.add_argument("--seed", type=int, default=0,
                       help="RNG seed, used only by sampling modes")
        p.add_argument("--record-every", type=int, default=None,
                       help="override the recording stride")
    return parser


def _load_spec(args) -> ExperimentSpec:
    text = ""
    if args.config is not None:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    spec = parse_config(text, kind=_KIND_OF_COMMAND[args.command],
                        out_dir=args.out)
    if args.record_every is not None:
        if args.record_every < 1:
            raise ConfigError(f"--record-every must be >= 1, got {args.record_every}")
        spec = replace(spec, config=replace(spec.config, record_every=args.record_every))
    if args.threads < 1:
        raise ConfigError(f"--threads must be >= 1, got {args.threads}")
    if args.seed < 0:
        raise ConfigError(f"--seed must be >= 0, got {args.seed}")
    return replace(spec, threads=args.threads, seed=args.seed)


def _outcome_line(outcome: RunOutcome) -> str:
    if outcome.kind is OutcomeKind.COLLAPSED:
        return (f"collapsed on detector {outcome.detector_index} "
                f"at step {outcome.collapse_step} (t = {outcome.collapse_time:g})")
    if outcome.kind is OutcomeKind.ABSORBED:
        side = "+L" if outcome.absorbed_side == 1 else "-L"
        return f"absorbed at {side} (t = {outcome.absorbed_time:g})"
    return f"{outcome.kind.value} after {outcome.end_step} steps"


def _check_numerics(outcome: RunOutcome, label: str) -> None:
    diag = outcome.diagnostics
    if diag is None:
        return
    drift = abs(diag.final_pseudo_norm - diag.initial_pseudo_norm)
    if drift > NORM_FAILURE:
        raise SimulationError(
            f"{label}: pseudo-norm drift {drift:.3e} exceeds {NORM_FAILURE:g} "
            f"(max drift {diag.max_norm_drift:.3e}, "
            f"max |V_det| {diag.max_abs_detector_potential:.3e})"
        )


def _cmd_run(spec: ExperimentSpec) -> None:
    outcome = run(spec.config)
    out = spec.out_dir
    emit_run_csv(outcome.series, outcome, out / "single_run.csv", spec.csv_precision)
    emit_detectors_csv(DetectorArray(list(spec.config.detectors)),
                       out / "single_detectors.csv", spec.csv_precision)
    if outcome.series.density is not None:
        emit_density_csv(outcome.series, spec.config.grid(),
                         out / "single_density.csv", spec.csv_precision)
    print(_outcome_line(outcome))
    _check_numerics(outcome, "run")


def _cmd_scan(spec: ExperimentSpec) -> None:
    grid = spec.config.grid()
    if spec.sample_count > 0:
        rng = np.random.default_rng(spec.seed)
        scan = scan_sampled(spec.config, spec.sample_count, rng,
                            threads=spec.threads)
    else:
        nodes = np.arange(0, grid.n_interior, spec.scan_stride)
        scan = scan_r0(spec.config, scan_nodes=nodes, threads=spec.threads)
    dets = DetectorArray(list(spec.config.detectors))
    state0 = ground_state(grid, spec.config.mass, spec.config.resolved_dt())
    report = detector_probabilities(scan, len(dets),
                                    baseline=qm_baseline(state0, dets, grid))
    emit_scan_csv(scan, spec.out_dir / "scan.csv", spec.csv_precision)
    emit_report_csv(report, dets, spec.out_dir / "report.csv", spec.csv_precision)
    bad = sum(
        1 for e in scan.entries
        if e.outcome.diagnostics is not None
        and abs(e.outcome.diagnostics.final_pseudo_norm
                - e.outcome.diagnostics.initial_pseudo_norm) > NORM_FAILURE
    )
    print(f"scanned {len(scan.entries)} nodes: "
          f"sum p_n = {float(np.sum(report.p)):.6f}, "
          f"no-detection {report.p_no_detection:.6f}, "
          f"absorbed {report.p_absorbed:.6f}, timeout {report.p_timeout:.6f}")
    if bad:
        print(f"warning: {bad} run(s) exceeded the norm-drift budget; "
              f"see max_norm_drift in scan.csv", file=sys.stderr)


def _cmd_nsweep(spec: ExperimentSpec) -> None:
    runs = collapse_time_runs(spec.config, list(spec.n_values))
    points = []
    for n, outcome in runs:
        emit_run_csv(outcome.series, outcome,
                     spec.out_dir / f"nsweep_run_N{n}.csv", spec.csv_precision)
        if outcome.kind is not OutcomeKind.COLLAPSED:
            raise EnsembleError(
                f"N = {n} did not collapse ({outcome.kind.value}); "
                f"cannot fit a collapse-time power law"
            )
        _check_numerics(outcome, f"N = {n}")
        points.append((n, float(outcome.collapse_time)))
        print(f"N = {n}: t_c = {outcome.collapse_time:g} "
              f"({outcome.collapse_step} steps)")
    fit = fit_power_law(points)
    dt = spec.config.resolved_dt()
    emit_nsweep_csv(points, dt, spec.out_dir / "nsweep.csv", spec.csv_precision)
    emit_fit_csv(fit, dt, spec.out_dir / "nsweep_fit.csv", spec.csv_precision)
    print(f"power-law fit: slope = {fit.slope:.4f}, "
          f"intercept = {fit.intercept:.4f} (time units), "
          f"residual = {fit.residual:.3e}")


def _cmd_baseline(spec: ExperimentSpec) -> None:
    grid = spec.config.grid()
    dets = DetectorArray(list(spec.config.detectors))
    state0 = ground_state(grid, spec.config.mass, spec.config.resolved_dt())
    p0 = qm_baseline(state0, dets, grid)
    emit_baseline_csv(p0, dets, spec.out_dir / "baseline.csv", spec.csv_precision)
    print(f"sum p_n0 = {float(np.sum(p0)):.6f} over {len(dets)} detectors")


def _cmd_suite(spec: ExperimentSpec) -> None:
    proto = spec.config.detectors[0]
    lines = ["scenario,det2_center,outcome,detector_index,end_step"]
    for name, second_center in SUITE_SCENARIOS:
        dets = (
            replace(proto, center=0.0),
            replace(proto, center=second_center),
        )
        config = replace(spec.config, detectors=dets, r0=0.5)
        outcome = run(config)
        emit_run_csv(outcome.series, outcome,
                     spec.out_dir / f"suite_{name}_run.csv", spec.csv_precision)
        emit_detectors_csv(DetectorArray(list(dets)),
                           spec.out_dir / f"suite_{name}_detectors.csv",
                           spec.csv_precision)
        det = outcome.detector_index if outcome.kind is OutcomeKind.COLLAPSED else -1
        lines.append(f"{name},{second_center:g},{outcome.kind.value},"
                     f"{det},{outcome.end_step}")
        print(f"{name} (second detector at {second_center:g}): "
              f"{_outcome_line(outcome)}")
    path = spec.out_dir / "suite.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")


_COMMANDS = {
    "run": _cmd_run,
    "scan": _cmd_scan,
    "nsweep": _cmd_nsweep,
    "baseline": _cmd_baseline,
    "suite": _cmd_suite,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        spec = _load_spec(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        _COMMANDS[args.command](spec)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SimulationError, EnsembleError, DetectorError, GridError,
            SchrodingerError, GuidanceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
