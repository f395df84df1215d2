"""Born-weighted scans over the initial realization and their aggregates.

The primary mode is deterministic: one run per scan node, weighted by the
initial probability mass on that node. A seeded inverse-CDF sampler exists
for convergence studies; the headline experiments never use it.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .detectors import DetectorArray
from .grid import Grid, StaggeredWavefunction, ground_state, x_to_node
from .schrodinger import density, probability_in_interval
from .simulation import OutcomeKind, RunOutcome, SimConfig, run


class EnsembleError(ValueError):
    pass


@dataclass(frozen=True)
class ScanEntry:
    node: int
    r0: float
    weight: float
    outcome: RunOutcome


@dataclass(frozen=True)
class ScanResult:
    entries: tuple[ScanEntry, ...]


@dataclass(frozen=True)
class EnsembleReport:
    """Per-detector collapse probabilities with the standard-QM baseline."""

    p: np.ndarray         # dBB collapse probability per detector
    p0: np.ndarray        # Born probability of each window at t = 0
    p_no_detection: float
    p_absorbed: float
    p_timeout: float

    def total_mass(self) -> float:
        return float(np.sum(self.p) + self.p_no_detection
                     + self.p_absorbed + self.p_timeout)


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares line on ln-ln axes; residual is the sum of squares."""

    slope: float
    intercept: float
    residual: float


def scan_weights(state0: StaggeredWavefunction, grid: Grid,
                 nodes: np.ndarray) -> np.ndarray:
    """Initial-density weights over the scan set, renormalized to sum to 1."""
    rho = np.clip(density(state0), 0.0, None)
    w = rho[nodes] * grid.dx
    total = float(np.sum(w))
    if total <= 0:
        raise EnsembleError("scan set carries no probability mass")
    return w / total


def scan_r0(
    base_config: SimConfig,
    scan_nodes: np.ndarray | None = None,
    threads: int = 1,
) -> ScanResult:
    """Run the coupled system once per scan node with r0 at that node.

    Entries come back ordered by node index regardless of execution order,
    so aggregation is scheduling-independent.
    """
    base_config.validate()
    grid = base_config.grid()
    if scan_nodes is None:
        nodes = np.arange(grid.n_interior)
    else:
        nodes = np.asarray(scan_nodes, dtype=np.int64)
        if nodes.size == 0:
            raise EnsembleError("empty scan set")
        if np.any((nodes < 0) | (nodes >= grid.n_interior)):
            raise EnsembleError("scan nodes outside the interior lattice")
        if len(np.unique(nodes)) != nodes.size:
            raise EnsembleError("scan nodes must be unique")
        # canonical node order keys every reduction: identical output no
        # matter how the caller ordered the set or how runs are scheduled
        nodes = np.sort(nodes)
    state0 = ground_state(grid, base_config.mass, base_config.resolved_dt())
    weights = scan_weights(state0, grid, nodes)

    def one(node: int) -> RunOutcome:
        return run(replace(base_config, r0=float(grid.x[node])))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(one, nodes))
    else:
        outcomes = [one(n) for n in nodes]

    entries = tuple(
        ScanEntry(node=int(nodes[i]), r0=float(grid.x[nodes[i]]),
                  weight=float(weights[i]), outcome=outcomes[i])
        for i in range(nodes.size)
    )
    return ScanResult(entries=entries)


def scan_sampled(
    base_config: SimConfig,
    n_samples: int,
    rng: np.random.Generator,
    threads: int = 1,
) -> ScanResult:
    """Monte Carlo variant of scan_r0: r0 drawn from the initial density.

    Every draw carries weight 1/n. This exists for convergence studies; the
    deterministic full-grid scan is the primary mode.
    """
    base_config.validate()
    grid = base_config.grid()
    state0 = ground_state(grid, base_config.mass, base_config.resolved_dt())
    positions = born_sample(state0, grid, n_samples, rng)

    def one(r0: float) -> RunOutcome:
        return run(replace(base_config, r0=float(r0)))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(one, positions))
    else:
        outcomes = [one(r0) for r0 in positions]
    entries = tuple(
        ScanEntry(node=x_to_node(grid, float(positions[i])),
                  r0=float(positions[i]), weight=1.0 / n_samples,
                  outcome=outcomes[i])
        for i in range(n_samples)
    )
    return ScanResult(entries=entries)


def detector_probabilities(
    scan: ScanResult,
    n_detectors: int,
    baseline: np.ndarray | None = None,
) -> EnsembleReport:
    """Aggregate outcome masses keyed by node order (already fixed)."""
    p = np.zeros(n_detectors)
    masses = {OutcomeKind.NO_DETECTION: 0.0,
              OutcomeKind.ABSORBED: 0.0,
              OutcomeKind.TIMEOUT: 0.0}
    for e in scan.entries:
        if e.outcome.kind is OutcomeKind.COLLAPSED:
            p[e.outcome.detector_index] += e.weight
        else:
            masses[e.outcome.kind] += e.weight
    p0 = np.zeros(n_detectors) if baseline is None else np.asarray(baseline, dtype=float)
    return EnsembleReport(
        p=p, p0=p0,
        p_no_detection=masses[OutcomeKind.NO_DETECTION],
        p_absorbed=masses[OutcomeKind.ABSORBED],
        p_timeout=masses[OutcomeKind.TIMEOUT],
    )


def qm_baseline(
    state0: StaggeredWavefunction,
    dets: DetectorArray,
    grid: Grid,
) -> np.ndarray:
    """Born probability of each detector window in the initial state."""
    return np.array([
        probability_in_interval(
            state0, grid,
            max(d.x_lo, -grid.half_width), min(d.x_hi, grid.half_width),
        )
        for d in dets
    ])


def collapse_time_runs(
    base_config: SimConfig,
    n_values: list[int],
) -> list[tuple[int, RunOutcome]]:
    """One full run per detector degrees-of-freedom value."""
    out = []
    for n in n_values:
        dets = tuple(replace(d, dof_count=int(n)) for d in base_config.detectors)
        out.append((int(n), run(replace(base_config, detectors=dets))))
    return out


def collapse_time_experiment(
    base_config: SimConfig,
    n_values: list[int],
) -> list[tuple[int, float]]:
    """Collapse time versus detector degrees of freedom.

    Every N must produce a collapse; anything else aborts loudly rather than
    dropping the point.
    """
    points = []
    for n, outcome in collapse_time_runs(base_config, n_values):
        if outcome.kind is not OutcomeKind.COLLAPSED:
            raise EnsembleError(
                f"N = {n} did not collapse within {base_config.max_steps} steps "
                f"(outcome: {outcome.kind.value})"
            )
        points.append((n, float(outcome.collapse_time)))
    return points


def fit_power_law(points: list[tuple[float, float]]) -> PowerLawFit:
    """Ordinary least squares of ln(t) on ln(N)."""
    if len(points) < 2:
        raise EnsembleError(f"need at least 2 points, got {len(points)}")
    if any(n <= 0 or t <= 0 for n, t in points):
        raise EnsembleError("power-law fit needs strictly positive inputs")
    ln_n = np.log([p[0] for p in points])
    ln_t = np.log([p[1] for p in points])
    design = np.vstack([ln_n, np.ones_like(ln_n)]).T
    coeffs, _, _, _ = np.linalg.lstsq(design, ln_t, rcond=None)
    slope, intercept = float(coeffs[0]), float(coeffs[1])
    resid = ln_t - (slope * ln_n + intercept)
    return PowerLawFit(slope=slope, intercept=intercept,
                       residual=float(np.sum(resid * resid)))


def intercept_in_steps(fit: PowerLawFit, dt: float) -> float:
    """Rebase the fit intercept from time units to step counts (t = steps * dt)."""
    return fit.intercept - math.log(dt)


def born_sample(
    state0: StaggeredWavefunction,
    grid: Grid,
    n_samples: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw positions from the discrete |psi|^2 by inverse CDF.

    Each node owns the cell [x_j - dx/2, x_j + dx/2); a cell is picked by
    weight and the position is uniform within it.
    """
    if n_samples < 1:
        raise EnsembleError("need at least one sample")
    rho = np.clip(density(state0), 0.0, None) * grid.dx
    total = float(np.sum(rho))
    if total <= 0:
        raise EnsembleError("state carries no probability mass")
    cdf = np.cumsum(rho / total)
    cells = np.searchsorted(cdf, rng.random(n_samples), side="right")
    cells = np.clip(cells, 0, grid.n_interior - 1)
    return grid.x[cells] - grid.dx / 2.0 + grid.dx * rng.random(n_samples)
