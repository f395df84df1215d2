"""The coupled run loop: wavefunction + pointers + realization.

Per step, in fixed order: (1) refresh the detector potential from the current
pointers, (2) advance the wavefunction, (3) advance the realization, (4)
advance every pointer with the updated realization, (5) check collapse, (6)
record if due. Any fixed order differs by O(dt); this one lets r see the
wavefunction it co-evolves with and y see the current r, and it never
changes, so identical configs reproduce identical runs bit for bit.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from . import _kernel
from .detectors import Detector, DetectorArray, detector_potential, step_pointer, window
from .grid import EDGE_EPS, Grid, StaggeredWavefunction, ground_state, make_grid, node_range
from .guidance import (
    NODE_EPS_REL,
    Realization,
    RealizationStatus,
    step_realization,
)
from .schrodinger import (
    PotentialField,
    _centered_diff,
    density,
    probability_in_interval,
    pseudo_norm,
    visscher_step,
)


class SimulationError(ValueError):
    pass


class OutcomeKind(enum.Enum):
    COLLAPSED = "collapsed"
    NO_DETECTION = "no_detection"
    ABSORBED = "absorbed"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class SimConfig:
    """Full specification of one coupled run. Defaults are the canonical
    parameter set: dx = 0.1 box of half-width 10, dt = dx^2/4, unit masses,
    coupling 0.01, one detector at x0 = 5 of half-width 1, r0 = 5.5."""

    half_width: float = 10.0
    n_interior: int = 199
    mass: float = 1.0
    dt: float | None = None          # None -> dx^2 / 4
    detectors: tuple[Detector, ...] = (Detector(center=5.0, half_width=1.0),)
    r0: float = 5.5
    collapse_threshold: float = 0.95
    max_steps: int = 2_000_000
    record_every: int = 1000
    short_circuit_stationary: bool = True
    window_outside_value: int = 0
    snapshot_every: int = 0          # density snapshot stride; 0 disables
    engine: str = "numba"            # "numba" | "reference"

    def resolved_dt(self) -> float:
        if self.dt is not None:
            return self.dt
        dx = 2.0 * self.half_width / (self.n_interior + 1)
        return dx * dx / 4.0

    def validate(self) -> None:
        if self.half_width <= 0:
            raise SimulationError(f"half_width must be positive, got {self.half_width}")
        if self.n_interior < 3:
            raise SimulationError(f"n_interior must be >= 3, got {self.n_interior}")
        if self.mass <= 0:
            raise SimulationError(f"mass must be positive, got {self.mass}")
        if self.resolved_dt() <= 0:
            raise SimulationError(f"dt must be positive, got {self.dt}")
        if not 0.0 < self.collapse_threshold <= 1.0:
            raise SimulationError(
                f"collapse_threshold must be in (0, 1], got {self.collapse_threshold}"
            )
        if self.max_steps < 1:
            raise SimulationError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.record_every < 1:
            raise SimulationError(f"record_every must be >= 1, got {self.record_every}")
        if self.snapshot_every < 0:
            raise SimulationError(f"snapshot_every must be >= 0, got {self.snapshot_every}")
        if abs(self.r0) > self.half_width:
            raise SimulationError(f"r0 = {self.r0} outside the well")
        if self.window_outside_value not in (0, -1):
            raise SimulationError(
                f"window_outside_value must be 0 or -1, got {self.window_outside_value}"
            )
        if self.engine not in ("numba", "reference"):
            raise SimulationError(f"unknown engine {self.engine!r}")
        DetectorArray(list(self.detectors))  # centers strictly increasing etc.

    def grid(self) -> Grid:
        return make_grid(self.half_width, self.n_interior)


@dataclass(frozen=True)
class TimeSeries:
    """Recorded samples of one run; all series share the step axis."""

    steps: np.ndarray            # int64[n]
    r: np.ndarray                # float64[n]
    y: np.ndarray                # float64[n, D]
    window_prob: np.ndarray      # float64[n, D]
    dt: float
    density_steps: np.ndarray | None = None
    density: np.ndarray | None = None   # float64[n_snap, M]

    @property
    def t(self) -> np.ndarray:
        return self.steps * self.dt


@dataclass(frozen=True)
class RunDiagnostics:
    """Stability record: staggered-norm drift and the deepest detector well."""

    initial_pseudo_norm: float
    final_pseudo_norm: float
    max_norm_drift: float
    max_abs_detector_potential: float


@dataclass(frozen=True)
class RunOutcome:
    kind: OutcomeKind
    detector_index: int | None = None
    collapse_step: int | None = None
    collapse_time: float | None = None
    absorbed_side: int | None = None
    absorbed_time: float | None = None
    end_step: int = 0
    r_final: float = 0.0
    series: TimeSeries | None = None
    diagnostics: RunDiagnostics | None = None


def collapse_check(
    state: StaggeredWavefunction,
    dets: DetectorArray,
    grid: Grid,
    threshold: float,
) -> int | None:
    """Smallest detector index whose window probability reached the threshold."""
    for i, det in enumerate(dets):
        lo = max(det.x_lo, -grid.half_width)
        hi = min(det.x_hi, grid.half_width)
        if probability_in_interval(state, grid, lo, hi) >= threshold:
            return i
    return None


def quantum_force_diagnostic(
    state: StaggeredWavefunction,
    potential: PotentialField,
    grid: Grid,
    mass: float,
    r: float,
) -> float:
    """Force on the realization: -d/dx V_T + (1/2m) d/dx (R''/R) at r.

    Diagnostic only; nothing feeds back into the dynamics. R''/R has a
    barrier at a density peak, so this term pushes the realization away from
    peaks and toward the window edges.
    """
    rho = density(state)
    eps = NODE_EPS_REL * float(np.max(rho))
    big_r = np.sqrt(np.clip(rho, 0.0, None))
    dx = grid.dx

    u = grid.tick(r)
    i0 = int(np.floor(u))
    frac = u - i0
    # nodes needed: curvature ratio at i0-2 .. i0+1 to difference it at the
    # two bracketing nodes of r
    need = range(i0 - 3, i0 + 3)
    if any(j < 0 or j >= grid.n_interior or rho[j] <= eps for j in need):
        raise SimulationError(
            f"quantum force undefined at r = {r}: wavefunction node or wall too close"
        )

    def curvature_ratio(j: int) -> float:
        lap = (big_r[j + 1] - 2.0 * big_r[j] + big_r[j - 1]) / (dx * dx)
        return lap / big_r[j]

    def dq(j: int) -> float:
        return (curvature_ratio(j + 1) - curvature_ratio(j - 1)) / (2.0 * dx)

    v_grad = _centered_diff(potential.total(), dx)
    lo_val = -v_grad[i0 - 1] + dq(i0 - 1) / (2.0 * mass)
    hi_val = -v_grad[i0] + dq(i0) / (2.0 * mass)
    return (1.0 - frac) * lo_val + frac * hi_val


def _is_stationary_no_detection(config: SimConfig, dets: DetectorArray) -> bool:
    """True when the run provably never interacts: ground state, free
    pointers, plain windows, and r0 outside every window."""
    if not config.short_circuit_stationary:
        return False
    if config.window_outside_value != 0:
        return False
    if any(det.u2_spring != 0.0 for det in dets):
        return False
    if any(det.y != 0.0 or det.y_dot != 0.0 for det in dets):
        return False
    return all(window(det, config.r0) == 0 for det in dets)


def run(config: SimConfig) -> RunOutcome:
    """Execute one coupled run to its first terminal event."""
    config.validate()
    grid = config.grid()
    dt = config.resolved_dt()
    dets = DetectorArray([replace(d) for d in config.detectors])
    state = ground_state(grid, config.mass, dt)

    if _is_stationary_no_detection(config, dets):
        norm0 = pseudo_norm(state, grid)
        series = _single_row_series(state, grid, dets, config, dt)
        return RunOutcome(
            kind=OutcomeKind.NO_DETECTION,
            end_step=0,
            r_final=config.r0,
            series=series,
            diagnostics=RunDiagnostics(norm0, norm0, 0.0, 0.0),
        )

    if config.engine == "numba":
        return _run_numba(config, grid, state, dets, dt)
    return _run_reference(config, grid, state, dets, dt)


def _single_row_series(state, grid, dets, config, dt) -> TimeSeries:
    probs = np.array([
        probability_in_interval(
            state, grid,
            max(d.x_lo, -grid.half_width), min(d.x_hi, grid.half_width),
        )
        for d in dets
    ])
    return TimeSeries(
        steps=np.array([0], dtype=np.int64),
        r=np.array([config.r0]),
        y=np.zeros((1, len(dets))),
        window_prob=probs.reshape(1, -1),
        dt=dt,
    )


def _window_ranges(dets: DetectorArray, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    lo = np.empty(len(dets), dtype=np.int64)
    hi = np.empty(len(dets), dtype=np.int64)
    for i, det in enumerate(dets):
        a = max(det.x_lo, -grid.half_width)
        b = min(det.x_hi, grid.half_width)
        lo[i], hi[i] = node_range(grid, a, b)
    return lo, hi


def _classify(status, det_idx, end_step, r_final, dt, y, y_dot, series, diag) -> RunOutcome:
    if status == _kernel.STATUS_COLLAPSED:
        return RunOutcome(
            kind=OutcomeKind.COLLAPSED, detector_index=det_idx,
            collapse_step=end_step, collapse_time=end_step * dt,
            end_step=end_step, r_final=r_final, series=series, diagnostics=diag,
        )
    if status == _kernel.STATUS_ABSORBED:
        return RunOutcome(
            kind=OutcomeKind.ABSORBED, absorbed_side=det_idx,
            absorbed_time=end_step * dt,
            end_step=end_step, r_final=r_final, series=series, diagnostics=diag,
        )
    # a run that reached max_steps without any pointer ever moving never
    # interacted at all: physically identical to the short-circuit case
    if np.all(y == 0.0) and np.all(y_dot == 0.0):
        return RunOutcome(
            kind=OutcomeKind.NO_DETECTION,
            end_step=end_step, r_final=r_final, series=series, diagnostics=diag,
        )
    return RunOutcome(
        kind=OutcomeKind.TIMEOUT,
        end_step=end_step, r_final=r_final, series=series, diagnostics=diag,
    )


def _run_numba(config, grid, state, dets, dt) -> RunOutcome:
    n_det = len(dets)
    det_lo, det_hi = _window_ranges(dets, grid)
    det_xlo = np.array([d.x_lo for d in dets])
    det_xhi = np.array([d.x_hi for d in dets])
    lam = np.array([d.coupling for d in dets])
    ndof = np.array([float(d.dof_count) for d in dets])
    mu = np.array([d.pointer_mass for d in dets])
    u2k = np.array([d.u2_spring for d in dets])
    y = np.array([d.y for d in dets])
    y_dot = np.array([d.y_dot for d in dets])

    cap = _kernel.record_capacity(config.max_steps, config.record_every)
    rec_step = np.zeros(cap, dtype=np.int64)
    rec_r = np.zeros(cap)
    rec_y = np.zeros((cap, n_det))
    rec_p = np.zeros((cap, n_det))
    if config.snapshot_every > 0:
        scap = _kernel.record_capacity(config.max_steps, config.snapshot_every)
        snap_step = np.zeros(scap, dtype=np.int64)
        snap_rho = np.zeros((scap, grid.n_interior))
    else:
        snap_step = np.zeros(1, dtype=np.int64)
        snap_rho = np.zeros((1, grid.n_interior))

    (status, det_idx, end_step, r_final, _vel, n_rec, n_snap,
     norm0, norm_end, max_drift, vdet_max) = _kernel.run_coupled(
        state.re, state.im, state.im_prev,
        grid.dx, dt, config.mass, grid.half_width,
        det_lo, det_hi, det_xlo, det_xhi,
        lam, ndof, mu, u2k,
        float(config.window_outside_value), EDGE_EPS,
        config.r0, config.collapse_threshold,
        config.max_steps, config.record_every, config.snapshot_every,
        NODE_EPS_REL,
        y, y_dot,
        rec_step, rec_r, rec_y, rec_p,
        snap_step, snap_rho,
    )
    state.step_index = end_step

    series = TimeSeries(
        steps=rec_step[:n_rec].copy(),
        r=rec_r[:n_rec].copy(),
        y=rec_y[:n_rec].copy(),
        window_prob=rec_p[:n_rec].copy(),
        dt=dt,
        density_steps=snap_step[:n_snap].copy() if config.snapshot_every > 0 else None,
        density=snap_rho[:n_snap].copy() if config.snapshot_every > 0 else None,
    )
    diag = RunDiagnostics(norm0, norm_end, max_drift, vdet_max)
    return _classify(status, det_idx, end_step, r_final, dt, y, y_dot, series, diag)


def _run_reference(config, grid, state, dets, dt) -> RunOutcome:
    """Pure-python twin of the kernel, built from the module operations."""
    real = Realization(r=config.r0)
    potential = PotentialField.zero(grid)
    det_list = list(dets)

    rows_step: list[int] = []
    rows_r: list[float] = []
    rows_y: list[list[float]] = []
    rows_p: list[list[float]] = []
    snaps_step: list[int] = []
    snaps_rho: list[np.ndarray] = []

    def window_probs() -> list[float]:
        return [
            probability_in_interval(
                state, grid,
                max(d.x_lo, -grid.half_width), min(d.x_hi, grid.half_width),
            )
            for d in det_list
        ]

    def record(step: int) -> None:
        rows_step.append(step)
        rows_r.append(real.r)
        rows_y.append([d.y for d in det_list])
        rows_p.append(window_probs())

    norm0 = pseudo_norm(state, grid)
    max_drift = 0.0
    vdet_max = 0.0

    record(0)
    if config.snapshot_every > 0:
        snaps_step.append(0)
        snaps_rho.append(density(state).copy())

    status = _kernel.STATUS_TIMEOUT
    det_idx = -1
    end_step = config.max_steps

    first = collapse_check(state, dets, grid, config.collapse_threshold)
    if first is None:
        for step in range(1, config.max_steps + 1):
            potential.detector_part = detector_potential(
                dets, grid, config.window_outside_value
            )
            vmax_now = float(np.max(np.abs(potential.detector_part))) if len(det_list) else 0.0
            vdet_max = max(vdet_max, vmax_now)

            visscher_step(state, potential, grid, config.mass)
            drift = abs(pseudo_norm(state, grid) - norm0)
            max_drift = max(max_drift, drift)

            step_realization(real, state, grid, config.mass, dt)
            if real.status is RealizationStatus.ABSORBED:
                status = _kernel.STATUS_ABSORBED
                det_idx = 1 if real.r > 0 else -1
                end_step = step
                record(step)
                if config.snapshot_every > 0:
                    snaps_step.append(step)
                    snaps_rho.append(density(state).copy())
                break

            for det in det_list:
                step_pointer(det, real.r, dt, config.window_outside_value)

            collapsed = collapse_check(state, dets, grid, config.collapse_threshold)
            terminal = collapsed is not None or step == config.max_steps
            if step % config.record_every == 0 or terminal:
                record(step)
            if config.snapshot_every > 0 and (
                step % config.snapshot_every == 0 or terminal
            ):
                snaps_step.append(step)
                snaps_rho.append(density(state).copy())
            if collapsed is not None:
                status = _kernel.STATUS_COLLAPSED
                det_idx = collapsed
                end_step = step
                break
    else:
        status = _kernel.STATUS_COLLAPSED
        det_idx = first
        end_step = 0

    series = TimeSeries(
        steps=np.array(rows_step, dtype=np.int64),
        r=np.array(rows_r),
        y=np.array(rows_y).reshape(len(rows_step), len(det_list)),
        window_prob=np.array(rows_p).reshape(len(rows_step), len(det_list)),
        dt=dt,
        density_steps=np.array(snaps_step, dtype=np.int64) if config.snapshot_every > 0 else None,
        density=np.array(snaps_rho) if config.snapshot_every > 0 else None,
    )
    diag = RunDiagnostics(norm0, pseudo_norm(state, grid), max_drift, vdet_max)
    y = np.array([d.y for d in det_list])
    y_dot = np.array([d.y_dot for d in det_list])
    return _classify(status, det_idx, end_step, real.r, dt, y, y_dot, series, diag)
