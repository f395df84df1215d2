"""Shared fixtures and independent oracles for the test suite."""

import math
from pathlib import Path

import numpy as np
import pytest

import dbbwell as d

# acceptance artifacts land here; the figure renderer consumes them
ACCEPTANCE_OUT = Path(__file__).resolve().parent.parent / "out" / "acceptance"


def analytic_interval_probability(a: float, b: float, half_width: float) -> float:
    """Closed-form ground-state probability on [a, b]: the cos^2 integral
    (1/L) [x/2 + (L/2pi) sin(pi x / L)] evaluated between the endpoints."""
    L = half_width

    def antideriv(x: float) -> float:
        return (x / 2.0 + (L / (2.0 * math.pi)) * math.sin(math.pi * x / L)) / L

    return antideriv(b) - antideriv(a)


def gaussian_packet(grid: d.Grid, center: float, sigma: float, k: float,
                    dt: float) -> d.StaggeredWavefunction:
    """Moving Gaussian packet sampled at a single instant (im_prev = im)."""
    envelope = np.exp(-((grid.x - center) ** 2) / (4.0 * sigma * sigma))
    psi = envelope * np.exp(1j * k * grid.x)
    norm = math.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
    psi /= norm
    return d.StaggeredWavefunction(
        re=np.real(psi).copy(), im=np.imag(psi).copy(),
        im_prev=np.imag(psi).copy(), step_index=0, dt=dt,
    )


@pytest.fixture(scope="session")
def grid() -> d.Grid:
    return d.make_grid(10.0, 199)


@pytest.fixture(scope="session")
def default_dt(grid) -> float:
    return grid.dx * grid.dx / 4.0


@pytest.fixture()
def ground(grid, default_dt) -> d.StaggeredWavefunction:
    return d.ground_state(grid, 1.0, default_dt)


class TimedRun:
    def __init__(self, outcome, seconds: float):
        self.outcome = outcome
        self.seconds = seconds


def timed_run(config) -> TimedRun:
    import time

    start = time.monotonic()
    outcome = d.run(config)
    return TimedRun(outcome, time.monotonic() - start)


@pytest.fixture(scope="session")
def fig2_run() -> TimedRun:
    """The canonical single-detector collapse run, shared across tests."""
    return timed_run(d.SimConfig(snapshot_every=50_000))


@pytest.fixture(scope="session")
def fig2_outcome(fig2_run):
    return fig2_run.outcome


@pytest.fixture(scope="session")
def central_collapse_outcome():
    """Collapse with the detector centered in the well, r0 = 0.5, N = 1."""
    cfg = d.SimConfig(
        detectors=(d.Detector(center=0.0, half_width=1.0),), r0=0.5,
    )
    return d.run(cfg)
