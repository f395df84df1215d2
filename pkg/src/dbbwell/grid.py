"""Spatial discretization of the infinite square well and initial quantum states.

The box occupies [-L, L] with hard (Dirichlet) walls. Only interior nodes are
stored: node j sits at x_j = -L + (j+1)*dx with (M+1)*dx = 2L, so the wall
points x = +-L carry psi = 0 implicitly and never enter the arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Membership guard (length units) for interval edges that are meant to be
# lattice-aligned. Sits far above float noise (~1e-13) and far below dx.
EDGE_EPS = 1e-9


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    """Uniform interior lattice of the well."""

    half_width: float  # L
    dx: float
    n_interior: int    # M
    x: np.ndarray      # node positions, length M

    def tick(self, position: float) -> float:
        """Fractional lattice index + 1 of a physical position (node j has tick j+1)."""
        return (position + self.half_width) / self.dx


@dataclass(frozen=True)
class LatticeCoordinate:
    """Integer position in units of dx measured from the well center.

    Positions quoted in lattice units (e.g. a detector "at 50") mean
    x = offset * dx, so offset 50 on a dx = 0.1 grid is x = 5.0.
    """

    offset_from_center: int

    def to_physical(self, grid: Grid) -> float:
        return self.offset_from_center * grid.dx


@dataclass
class StaggeredWavefunction:
    """Wavefunction in the staggered real/imaginary layout.

    `re` lives at integer steps t_n, `im` at t_n + dt/2 and `im_prev` at
    t_n - dt/2. All arrays cover interior nodes only.
    """

    re: np.ndarray
    im: np.ndarray
    im_prev: np.ndarray
    step_index: int
    dt: float

    def __post_init__(self):
        if not (len(self.re) == len(self.im) == len(self.im_prev)):
            raise GridError("staggered components must have equal length")

    def copy(self) -> "StaggeredWavefunction":
        return StaggeredWavefunction(
            self.re.copy(), self.im.copy(), self.im_prev.copy(),
            self.step_index, self.dt,
        )


def make_grid(half_width: float, n_interior: int) -> Grid:
    """Build the interior lattice with dx = 2L / (M + 1)."""
    if half_width <= 0:
        raise GridError(f"half_width must be positive, got {half_width}")
    if n_interior < 3:
        raise GridError(f"need at least 3 interior nodes, got {n_interior}")
    dx = 2.0 * half_width / (n_interior + 1)
    x = -half_width + (np.arange(n_interior) + 1.0) * dx
    return Grid(half_width=half_width, dx=dx, n_interior=n_interior, x=x)


def x_to_node(grid: Grid, position: float) -> int:
    """Nearest interior node index; exact midpoints round toward the well center."""
    L = grid.half_width
    if abs(position) > L + EDGE_EPS:
        raise GridError(f"position {position} outside the well [-{L}, {L}]")
    u = grid.tick(position) - 1.0  # fractional node index
    lo = math.floor(u)
    frac = u - lo
    guard = EDGE_EPS / grid.dx
    if frac > 0.5 + guard:
        j = lo + 1
    elif frac < 0.5 - guard:
        j = lo
    else:
        # midpoint: pick the candidate closer to x = 0; equidistant -> lower
        cand = (lo, lo + 1)
        j = min(cand, key=lambda c: (abs(grid.x[min(max(c, 0), grid.n_interior - 1)]), c))
    return min(max(j, 0), grid.n_interior - 1)


def node_range(grid: Grid, a: float, b: float) -> tuple[int, int]:
    """Node index range [lo, hi) whose positions fall in the half-open [a, b).

    Edges within EDGE_EPS of a lattice point snap to it, so windows built
    from lattice-aligned bounds partition the grid exactly.
    """
    if not a < b:
        raise GridError(f"malformed interval [{a}, {b})")
    guard = EDGE_EPS / grid.dx
    lo = math.ceil(grid.tick(a) - 1.0 - guard)
    hi = math.ceil(grid.tick(b) - 1.0 - guard)
    return max(lo, 0), min(hi, grid.n_interior)


def mode_wavenumber(grid: Grid, mode: int) -> float:
    """Wavenumber k_n = n*pi/(2L) of the n-th box eigenmode (n = 1 is the ground state)."""
    return mode * math.pi / (2.0 * grid.half_width)


def discrete_eigenvalue(grid: Grid, mode: int, mass: float) -> float:
    """Energy of the n-th eigenmode under the three-point discrete Laplacian.

    E_d = (1 - cos(k dx)) / (m dx^2); the sampled sine modes are exact
    eigenvectors of the discrete Hamiltonian, so initializing with E_d makes
    them exactly stationary on the lattice.
    """
    k = mode_wavenumber(grid, mode)
    return (1.0 - math.cos(k * grid.dx)) / (mass * grid.dx * grid.dx)


def eigenmode(grid: Grid, mode: int) -> np.ndarray:
    """Sampled n-th eigenmode, unit discrete norm (sum f^2 dx = 1)."""
    k = mode_wavenumber(grid, mode)
    f = np.sin(k * (grid.x + grid.half_width))
    f /= math.sqrt(np.sum(f * f) * grid.dx)
    return f


def ground_state(grid: Grid, mass: float, dt: float) -> StaggeredWavefunction:
    """Ground state in staggered layout, stationary under the discrete stepper.

    The real part samples (1/sqrt(L)) sin(pi (x - L) / (2L)) and is
    renormalized to unit discrete norm; the imaginary parts carry the
    half-step phases exp(-+ i E_d dt/2) of the discrete eigenvalue.
    """
    if dt <= 0:
        raise GridError(f"dt must be positive, got {dt}")
    L = grid.half_width
    re = np.sin(math.pi * (grid.x - L) / (2.0 * L)) / math.sqrt(L)
    re /= math.sqrt(np.sum(re * re) * grid.dx)
    s = math.sin(discrete_eigenvalue(grid, 1, mass) * dt / 2.0)
    return StaggeredWavefunction(
        re=re, im=-re * s, im_prev=re * s, step_index=0, dt=dt,
    )


def superposition_state(
    grid: Grid,
    coefficients: dict[int, float],
    mass: float,
    dt: float,
) -> StaggeredWavefunction:
    """Real-coefficient superposition of eigenmodes in staggered layout.

    Each mode carries its own half-step phase, so the state evolves exactly
    as the sum of the individually stationary modes.
    """
    if dt <= 0:
        raise GridError(f"dt must be positive, got {dt}")
    if not coefficients:
        raise GridError("superposition needs at least one mode")
    norm = math.sqrt(sum(c * c for c in coefficients.values()))
    re = np.zeros(grid.n_interior)
    im = np.zeros(grid.n_interior)
    for mode, c in sorted(coefficients.items()):
        f = eigenmode(grid, mode) * (c / norm)
        s = math.sin(discrete_eigenvalue(grid, mode, mass) * dt / 2.0)
        re += f
        im += -f * s
    return StaggeredWavefunction(re=re, im=im, im_prev=-im.copy(), step_index=0, dt=dt)
