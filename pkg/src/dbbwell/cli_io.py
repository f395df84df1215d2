"""Experiment configuration parsing and deterministic CSV emission.

Config files are flat `key = value` documents ('#' starts a comment).
Unknown keys are rejected, not ignored, and every parse or validation error
carries the offending line number. All CSV output is byte-deterministic:
same spec in, same bytes out.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .detectors import Detector, DetectorArray, DetectorError
from .ensemble import EnsembleReport, PowerLawFit, ScanResult, intercept_in_steps
from .grid import Grid
from .simulation import OutcomeKind, RunOutcome, SimConfig, SimulationError, TimeSeries

EXPERIMENT_KINDS = ("single_run", "scan", "n_sweep", "baseline", "two_detector_suite")

# the two-detector suite: second detector center per scenario, first fixed at 0
SUITE_SCENARIOS = (
    ("separated", 6.0),
    ("near", 4.0),
    ("adjacent", 2.0),
    ("overlapping", 1.0),
)


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    config: SimConfig
    out_dir: Path = Path("out")
    csv_precision: int = 12
    n_values: tuple[int, ...] = (2, 4, 6, 8, 10)
    scan_stride: int = 1
    sample_count: int = 0   # 0: deterministic full-grid scan
    threads: int = 1
    seed: int = 0


_BOOL_WORDS = {"true": True, "false": False, "on": True, "off": False,
               "yes": True, "no": False}


def _parse_scalar(raw: str, kind: str, key: str, line: int):
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            v = float(raw)
            if v != int(v):
                raise ValueError
            return int(v)
        if kind == "bool":
            if raw.lower() not in _BOOL_WORDS:
                raise ValueError
            return _BOOL_WORDS[raw.lower()]
        if kind == "str":
            return raw
        if kind == "float_list":
            return tuple(float(p) for p in raw.split(","))
        if kind == "int_list":
            return tuple(int(p) for p in raw.split(","))
    except ValueError:
        raise ConfigError(f"{key} expects a {kind}, got {raw!r}", line) from None
    raise AssertionError(kind)


_SCHEMA: dict[str, str] = {
    "half_width": "float",
    "interior_nodes": "int",
    "mass": "float",
    "dt": "float",
    "coupling": "float",
    "pointer_mass": "float",
    "dof_count": "int",
    "detector_centers": "float_list",
    "detector_half_width": "float",
    "u2_spring": "float",
    "window_outside_value": "int",
    "r0": "float",
    "collapse_threshold": "float",
    "max_steps": "int",
    "record_every": "int",
    "snapshot_every": "int",
    "short_circuit_stationary": "bool",
    "engine": "str",
    "csv_precision": "int",
    "n_values": "int_list",
    "scan_stride": "int",
    "sample_count": "int",
}


def _default_centers(kind: str, half_width: float) -> tuple[float, ...]:
    if kind in ("scan", "baseline"):
        step = half_width / 5.0
        return tuple(-half_width + step * (i + 0.5) for i in range(10))
    if kind == "n_sweep":
        return (0.0,)
    return (5.0,)


def _default_r0(kind: str) -> float:
    return 0.5 if kind == "n_sweep" else 5.5


def parse_config(text: str, kind: str = "single_run",
                 out_dir: str | Path = "out") -> ExperimentSpec:
    """Parse and fully validate a key-value experiment document."""
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}")

    values: dict[str, object] = {}
    lines_of: dict[str, int] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw_line.strip()!r}", lineno)
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        if not raw:
            raise ConfigError(f"{key} has no value", lineno)
        values[key] = _parse_scalar(raw, _SCHEMA[key], key, lineno)
        lines_of[key] = lineno

    def get(key: str, default):
        return values.get(key, default)

    def fail(key: str, message: str):
        raise ConfigError(message, lines_of.get(key))

    half_width = float(get("half_width", 10.0))
    if half_width <= 0:
        fail("half_width", f"half_width must be positive, got {half_width}")
    n_interior = int(get("interior_nodes", 199))
    if n_interior < 3:
        fail("interior_nodes", f"interior_nodes must be >= 3, got {n_interior}")
    mass = float(get("mass", 1.0))
    if mass <= 0:
        fail("mass", f"mass must be positive, got {mass}")
    dt = values.get("dt")
    if dt is not None and dt <= 0:
        fail("dt", f"dt must be positive, got {dt}")
    coupling = float(get("coupling", 0.01))
    if coupling <= 0:
        fail("coupling", f"coupling must be positive, got {coupling}")
    pointer_mass = float(get("pointer_mass", 1.0))
    if pointer_mass <= 0:
        fail("pointer_mass", f"pointer_mass must be positive, got {pointer_mass}")
    dof_count = int(get("dof_count", 1))
    if dof_count < 1:
        fail("dof_count", f"dof_count must be >= 1, got {dof_count}")
    half_width_det = float(get("detector_half_width", 1.0))
    if half_width_det <= 0:
        fail("detector_half_width",
             f"detector_half_width must be positive, got {half_width_det}")
    u2_spring = float(get("u2_spring", 0.0))
    if u2_spring < 0:
        fail("u2_spring", f"u2_spring must be >= 0, got {u2_spring}")
    outside = int(get("window_outside_value", 0))
    if outside not in (0, -1):
        fail("window_outside_value",
             f"window_outside_value must be 0 or -1, got {outside}")
    threshold = float(get("collapse_threshold", 0.95))
    if not 0.0 < threshold <= 1.0:
        fail("collapse_threshold",
             f"collapse_threshold must be in (0, 1], got {threshold}")
    max_steps = int(get("max_steps", 2_000_000))
    if max_steps < 1:
        fail("max_steps", f"max_steps must be >= 1, got {max_steps}")
    record_every = int(get("record_every", 1000))
    if record_every < 1:
        fail("record_every", f"record_every must be >= 1, got {record_every}")
    snapshot_every = int(get("snapshot_every", 0))
    if snapshot_every < 0:
        fail("snapshot_every", f"snapshot_every must be >= 0, got {snapshot_every}")
    engine = str(get("engine", "numba"))
    if engine not in ("numba", "reference"):
        fail("engine", f"engine must be 'numba' or 'reference', got {engine!r}")
    precision = int(get("csv_precision", 12))
    if not 1 <= precision <= 17:
        fail("csv_precision", f"csv_precision must be in [1, 17], got {precision}")
    scan_stride = int(get("scan_stride", 1))
    if scan_stride < 1:
        fail("scan_stride", f"scan_stride must be >= 1, got {scan_stride}")
    sample_count = int(get("sample_count", 0))
    if sample_count < 0:
        fail("sample_count", f"sample_count must be >= 0, got {sample_count}")
    n_values = tuple(get("n_values", (2, 4, 6, 8, 10)))
    if any(n < 1 for n in n_values) or not n_values:
        fail("n_values", f"n_values must be positive integers, got {n_values}")

    centers = tuple(get("detector_centers", _default_centers(kind, half_width)))
    if any(b <= a for a, b in zip(centers, centers[1:])):
        fail("detector_centers",
             f"detector centers must be strictly increasing, got {list(centers)}")
    r0 = float(get("r0", _default_r0(kind)))
    if abs(r0) > half_width:
        anchor = "r0" if "r0" in lines_of else "half_width"
        raise ConfigError(f"r0 = {r0} outside the well of half-width {half_width}",
                          lines_of.get(anchor))

    detectors = tuple(
        Detector(center=c, half_width=half_width_det, coupling=coupling,
                 dof_count=dof_count, pointer_mass=pointer_mass,
                 u2_spring=u2_spring)
        for c in centers
    )
    config = SimConfig(
        half_width=half_width, n_interior=n_interior, mass=mass, dt=dt,
        detectors=detectors, r0=r0, collapse_threshold=threshold,
        max_steps=max_steps, record_every=record_every,
        short_circuit_stationary=bool(get("short_circuit_stationary", True)),
        window_outside_value=outside, snapshot_every=snapshot_every,
        engine=engine,
    )
    try:
        config.validate()
    except (SimulationError, DetectorError) as exc:
        # backstop; the field checks above anchor the common cases to lines
        raise ConfigError(str(exc)) from exc
    return ExperimentSpec(
        kind=kind, config=config, out_dir=Path(out_dir),
        csv_precision=precision, n_values=n_values, scan_stride=scan_stride,
        sample_count=sample_count,
    )


# ---------------------------------------------------------------------------
# CSV emission. Formatting is %.{precision}g, one trailing newline, no
# footers (the report's summary row is schema, not a footer).

def _fmt(value: float, precision: int) -> str:
    return f"{value:.{precision}g}"


def _write(path: Path, lines: list[str]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")


def emit_run_csv(series: TimeSeries, outcome: RunOutcome,
                 path: str | Path, precision: int = 12) -> None:
    """One row per recorded step: step, t, r, then y_i and P_i per detector."""
    n_det = series.y.shape[1]
    header = ["step", "t", "r"]
    header += [f"y_{i}" for i in range(n_det)]
    header += [f"P_{i}" for i in range(n_det)]
    lines = [",".join(header)]
    t = series.t
    for k in range(len(series.steps)):
        row = [str(int(series.steps[k])), _fmt(t[k], precision),
               _fmt(series.r[k], precision)]
        row += [_fmt(series.y[k, i], precision) for i in range(n_det)]
        row += [_fmt(series.window_prob[k, i], precision) for i in range(n_det)]
        lines.append(",".join(row))
    _write(path, lines)


def emit_density_csv(series: TimeSeries, grid: Grid,
                     path: str | Path, precision: int = 12) -> None:
    """Density snapshots, one column per captured step."""
    if series.density is None or series.density_steps is None:
        raise ValueError("series carries no density snapshots")
    header = ["x"] + [f"rho_step_{int(s)}" for s in series.density_steps]
    lines = [",".join(header)]
    for j in range(grid.n_interior):
        row = [_fmt(grid.x[j], precision)]
        row += [_fmt(series.density[k, j], precision)
                for k in range(len(series.density_steps))]
        lines.append(",".join(row))
    _write(path, lines)


def emit_detectors_csv(dets: DetectorArray, path: str | Path,
                       precision: int = 12) -> None:
    lines = ["detector_index,x0,half_width"]
    for i, det in enumerate(dets):
        lines.append(",".join([str(i), _fmt(det.center, precision),
                               _fmt(det.half_width, precision)]))
    _write(path, lines)


def emit_report_csv(report: EnsembleReport, dets: DetectorArray,
                    path: str | Path, precision: int = 12) -> None:
    """Detector rows then a summary row with the non-collapse masses."""
    lines = ["detector_index,x0,p_n,p_n0"]
    for i, det in enumerate(dets):
        lines.append(",".join([
            str(i), _fmt(det.center, precision),
            _fmt(report.p[i], precision), _fmt(report.p0[i], precision),
        ]))
    lines.append(",".join([
        "summary", _fmt(report.p_no_detection, precision),
        _fmt(report.p_absorbed, precision), _fmt(report.p_timeout, precision),
    ]))
    _write(path, lines)


def read_report_csv(path: str | Path) -> tuple[EnsembleReport, np.ndarray]:
    """Inverse of emit_report_csv; returns the report and the x0 column."""
    lines = Path(path).read_text(encoding="ascii").splitlines()
    if not lines or lines[0] != "detector_index,x0,p_n,p_n0":
        raise ValueError(f"{path}: not a report CSV")
    p, p0, x0 = [], [], []
    summary = None
    for line in lines[1:]:
        parts = line.split(",")
        if parts[0] == "summary":
            summary = [float(v) for v in parts[1:4]]
            break
        x0.append(float(parts[1]))
        p.append(float(parts[2]))
        p0.append(float(parts[3]))
    if summary is None:
        raise ValueError(f"{path}: missing summary row")
    report = EnsembleReport(
        p=np.array(p), p0=np.array(p0),
        p_no_detection=summary[0], p_absorbed=summary[1], p_timeout=summary[2],
    )
    return report, np.array(x0)


def emit_scan_csv(scan: ScanResult, path: str | Path,
                  precision: int = 12) -> None:
    """One row per scanned node with its weight and outcome."""
    lines = ["node,r0,weight,outcome,detector_index,end_step,max_norm_drift"]
    for e in scan.entries:
        det = e.outcome.detector_index if e.outcome.kind is OutcomeKind.COLLAPSED else -1
        drift = e.outcome.diagnostics.max_norm_drift if e.outcome.diagnostics else 0.0
        lines.append(",".join([
            str(e.node), _fmt(e.r0, precision), _fmt(e.weight, precision),
            e.outcome.kind.value, str(det), str(e.outcome.end_step),
            _fmt(drift, precision),
        ]))
    _write(path, lines)


def emit_nsweep_csv(points: list[tuple[int, float]], dt: float,
                    path: str | Path, precision: int = 12) -> None:
    lines = ["N,t_c,steps"]
    for n, t_c in points:
        lines.append(",".join([str(n), _fmt(t_c, precision),
                               str(int(round(t_c / dt)))]))
    _write(path, lines)


def emit_fit_csv(fit: PowerLawFit, dt: float, path: str | Path,
                 precision: int = 12) -> None:
    """Fit on ln-ln axes; intercept given in both time and step-count units."""
    lines = [
        "slope,intercept_time,intercept_steps,residual",
        ",".join([
            _fmt(fit.slope, precision), _fmt(fit.intercept, precision),
            _fmt(intercept_in_steps(fit, dt), precision),
            _fmt(fit.residual, precision),
        ]),
    ]
    _write(path, lines)


def emit_baseline_csv(p0: np.ndarray, dets: DetectorArray, path: str | Path,
                      precision: int = 12) -> None:
    lines = ["detector_index,x0,p_n0"]
    for i, det in enumerate(dets):
        lines.append(",".join([str(i), _fmt(det.center, precision),
                               _fmt(p0[i], precision)]))
    _write(path, lines)
