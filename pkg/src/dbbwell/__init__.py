"""Pilot-wave collapse in a 1-D infinite square well with classical-pointer
detectors: staggered-time wave integration, guidance-equation trajectories,
and Born-weighted ensemble experiments."""

from .detectors import (
    Detector,
    DetectorArray,
    detector_potential,
    step_pointer,
    ten_detector_array,
    window,
)
from .ensemble import (
    EnsembleReport,
    PowerLawFit,
    ScanEntry,
    ScanResult,
    born_sample,
    collapse_time_experiment,
    collapse_time_runs,
    detector_probabilities,
    fit_power_law,
    intercept_in_steps,
    qm_baseline,
    scan_r0,
    scan_sampled,
)
from .grid import (
    Grid,
    LatticeCoordinate,
    StaggeredWavefunction,
    discrete_eigenvalue,
    eigenmode,
    ground_state,
    make_grid,
    node_range,
    superposition_state,
    x_to_node,
)
from .guidance import (
    Realization,
    RealizationStatus,
    step_realization,
    transport_ensemble,
    velocity_at,
)
from .schrodinger import (
    PotentialField,
    apply_hamiltonian,
    density,
    probability_current,
    probability_in_interval,
    pseudo_norm,
    visscher_step,
)
from .simulation import (
    OutcomeKind,
    RunDiagnostics,
    RunOutcome,
    SimConfig,
    TimeSeries,
    collapse_check,
    quantum_force_diagnostic,
    run,
)

__version__ = "0.1.0"

__all__ = [
    "Detector", "DetectorArray", "detector_potential", "step_pointer",
    "ten_detector_array", "window",
    "EnsembleReport", "PowerLawFit", "ScanEntry", "ScanResult", "born_sample",
    "collapse_time_experiment", "collapse_time_runs", "detector_probabilities",
    "fit_power_law", "intercept_in_steps", "qm_baseline", "scan_r0",
    "scan_sampled",
    "Grid", "LatticeCoordinate", "StaggeredWavefunction", "discrete_eigenvalue",
    "eigenmode", "ground_state", "make_grid", "node_range",
    "superposition_state", "x_to_node",
    "Realization", "RealizationStatus", "step_realization",
    "transport_ensemble", "velocity_at",
    "PotentialField", "apply_hamiltonian", "density", "probability_current",
    "probability_in_interval", "pseudo_norm", "visscher_step",
    "OutcomeKind", "RunDiagnostics", "RunOutcome", "SimConfig", "TimeSeries",
    "collapse_check", "quantum_force_diagnostic", "run",
]
