"""Detector geometry, classical pointer dynamics, and the coupling potential.

A detector is a top-hat window of half-width d centered at x0 plus a single
classical pointer coordinate y, the mean of N microscopic degrees of freedom.
The pointer is forced whenever the particle realization sits inside the
window; its displacement in turn feeds the attractive potential -lambda N y
back into the wave equation on the window's nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .grid import EDGE_EPS, Grid, node_range


class DetectorError(ValueError):
    pass


@dataclass
class Detector:
    """Top-hat detector with one classical pointer degree of freedom.

    `u2_spring` is the restoring-potential hook: U2(y) = u2_spring * y^2 / 2,
    zero by default so an undisturbed pointer never moves.
    """

    center: float
    half_width: float = 1.0
    coupling: float = 0.01      # lambda, energy per pointer displacement
    dof_count: int = 1          # N
    pointer_mass: float = 1.0   # mu
    y: float = 0.0
    y_dot: float = 0.0
    u2_spring: float = 0.0

    def __post_init__(self):
        if self.half_width <= 0:
            raise DetectorError(f"half_width must be positive, got {self.half_width}")
        if self.dof_count < 1:
            raise DetectorError(f"dof_count must be >= 1, got {self.dof_count}")
        if self.pointer_mass <= 0:
            raise DetectorError(f"pointer_mass must be positive, got {self.pointer_mass}")

    @property
    def x_lo(self) -> float:
        return self.center - self.half_width

    @property
    def x_hi(self) -> float:
        return self.center + self.half_width

    def reset(self) -> "Detector":
        return replace(self, y=0.0, y_dot=0.0)


@dataclass
class DetectorArray:
    """Ordered detectors; centers strictly increasing, windows may touch or overlap."""

    detectors: list[Detector]

    def __post_init__(self):
        centers = [d.center for d in self.detectors]
        if any(b <= a for a, b in zip(centers, centers[1:])):
            raise DetectorError(f"detector centers must be strictly increasing, got {centers}")

    def __len__(self) -> int:
        return len(self.detectors)

    def __iter__(self):
        return iter(self.detectors)

    def reset(self) -> "DetectorArray":
        return DetectorArray([d.reset() for d in self.detectors])


def ten_detector_array(grid: Grid, **kwargs) -> DetectorArray:
    """Ten touching detectors of half-width 1 partitioning [-L, L)."""
    step = grid.half_width / 5.0
    centers = [-grid.half_width + step * (i + 0.5) for i in range(10)]
    return DetectorArray([
        Detector(center=c, half_width=step / 2.0, **kwargs) for c in centers
    ])


def window(det: Detector, x: float) -> int:
    """Top-hat indicator on the half-open [x0 - d, x0 + d).

    Half-open so touching detectors partition the well with no double
    counting; edges snap within EDGE_EPS so lattice-aligned positions land
    on the same side as their node.
    """
    return int(det.x_lo - EDGE_EPS <= x < det.x_hi - EDGE_EPS)


def detector_potential(
    dets: DetectorArray,
    grid: Grid,
    outside_value: int = 0,
) -> np.ndarray:
    """Assemble V_det(x_j) = -sum_i lambda_i N_i y_i W_i(x_j).

    With `outside_value = -1` the window contributes -1 instead of 0 away
    from the detector (the sign-flip variant); all headline runs use 0.
    """
    v = np.zeros(grid.n_interior)
    for det in dets:
        amp = det.coupling * det.dof_count * det.y
        lo, hi = node_range(grid, det.x_lo, det.x_hi)
        if outside_value == 0:
            v[lo:hi] -= amp
        else:
            v -= amp * float(outside_value)
            v[lo:hi] -= amp * (1.0 - float(outside_value))
    return v


def step_pointer(det: Detector, r: float, dt: float, outside_value: int = 0) -> Detector:
    """Advance the pointer ODE mu y'' + U2'(y)/N = lambda W(r) one step.

    Semi-implicit Euler (velocity first) at the wavefunction's dt, so the
    coupled system shares one clock.
    """
    w = float(window(det, r))
    if outside_value != 0 and w == 0.0:
        w = float(outside_value)
    force = det.coupling * w - det.u2_spring * det.y / det.dof_count
    det.y_dot += dt * force / det.pointer_mass
    det.y += dt * det.y_dot
    return det
