"""Guidance-equation transport of the particle realization r(t).

The velocity field is v = J/rho evaluated at r: identical to the phase
gradient where rho > 0, with no branch-cut bookkeeping. J and rho are
interpolated separately and divided last; interpolating the ratio amplifies
noise near wavefunction nodes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .grid import Grid, StaggeredWavefunction
from .schrodinger import PotentialField, density, probability_current, visscher_step

# Interpolated rho below NODE_EPS_REL * max(rho) counts as a wavefunction
# node; the velocity holds its last value there.
NODE_EPS_REL = 1e-12


class GuidanceError(ValueError):
    pass


class RealizationStatus(enum.Enum):
    ACTIVE = "active"
    ABSORBED = "absorbed"


@dataclass
class Realization:
    """Definite particle position plus its absorption state."""

    r: float
    status: RealizationStatus = RealizationStatus.ACTIVE
    velocity_last: float = 0.0


def _interp_with_walls(values: np.ndarray, grid: Grid, r: float) -> float:
    """Linear interpolation with zero ghosts at the walls; r in [-L, L]."""
    u = grid.tick(r)  # ghost wall at tick 0, node j at tick j+1, wall at M+1
    i0 = int(np.floor(u))
    frac = u - i0
    if i0 < 0:
        i0, frac = 0, 0.0
    if i0 > grid.n_interior:
        i0, frac = grid.n_interior, 1.0
    lo = values[i0 - 1] if i0 >= 1 else 0.0
    hi = values[i0] if i0 < grid.n_interior else 0.0
    return (1.0 - frac) * lo + frac * hi


def velocity_at(
    state: StaggeredWavefunction,
    grid: Grid,
    r: float,
    mass: float,
    velocity_last: float = 0.0,
) -> float:
    """Guidance velocity J/rho at r, holding the last value at nodes."""
    if abs(r) > grid.half_width:
        raise GuidanceError(f"realization {r} outside the well")
    rho = density(state)
    current = probability_current(state, grid, mass)
    rho_r = _interp_with_walls(rho, grid, r)
    if rho_r < NODE_EPS_REL * float(np.max(rho)):
        return velocity_last
    return _interp_with_walls(current, grid, r) / rho_r


def step_realization(
    real: Realization,
    state: StaggeredWavefunction,
    grid: Grid,
    mass: float,
    dt: float,
) -> Realization:
    """Explicit Euler step of r, then the absorptive wall rule.

    Within one lattice spacing of a wall the realization is clamped to the
    wall and permanently absorbed; absorbed realizations never change.
    """
    if real.status is not RealizationStatus.ACTIVE:
        raise GuidanceError("cannot step an absorbed realization")
    v = velocity_at(state, grid, real.r, mass, real.velocity_last)
    real.velocity_last = v
    real.r += dt * v
    L, dx = grid.half_width, grid.dx
    if real.r > L - dx:
        real.r = L
        real.status = RealizationStatus.ABSORBED
    elif real.r < -L + dx:
        real.r = -L
        real.status = RealizationStatus.ABSORBED
    return real


def transport_ensemble(
    state: StaggeredWavefunction,
    grid: Grid,
    mass: float,
    positions: np.ndarray,
    n_steps: int,
    potential: PotentialField | None = None,
) -> np.ndarray:
    """Advect many independent realizations under one evolving wavefunction.

    Evolves `state` in place for n_steps and Euler-steps every position each
    step (all share the wavefunction; none feeds back). Returns the final
    positions; absorbed trajectories sit frozen at +-L. This is the
    workhorse for checking that Born-distributed ensembles stay
    Born-distributed.
    """
    if potential is None:
        potential = PotentialField.zero(grid)
    L, dx, dt = grid.half_width, grid.dx, state.dt
    r = np.asarray(positions, dtype=float).copy()
    v_last = np.zeros_like(r)
    active = np.ones(r.shape, dtype=bool)
    # ghost-padded node positions for np.interp (walls carry zeros)
    x_pad = np.concatenate(([-L], grid.x, [L]))
    zero_pad = np.zeros(grid.n_interior + 2)
    for _ in range(n_steps):
        visscher_step(state, potential, grid, mass)
        rho = density(state)
        current = probability_current(state, grid, mass)
        zero_pad[1:-1] = rho
        rho_r = np.interp(r, x_pad, zero_pad)
        zero_pad[1:-1] = current
        j_r = np.interp(r, x_pad, zero_pad)
        eps = NODE_EPS_REL * float(np.max(rho))
        ok = rho_r >= eps
        v = np.where(ok, j_r / np.where(ok, rho_r, 1.0), v_last)
        v_last = np.where(active, v, v_last)
        r = np.where(active, r + dt * v, r)
        hit_hi = active & (r > L - dx)
        hit_lo = active & (r < -L + dx)
        r[hit_hi] = L
        r[hit_lo] = -L
        active &= ~(hit_hi | hit_lo)
    return r
