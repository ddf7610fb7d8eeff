"""Steady-state Gaussian entanglement in cascaded optomagnomechanical systems."""

__version__ = "0.1.0"

from .gaussian import (
    EntanglementReport,
    analyze,
    check_stability,
    log_negativity,
    pairwise_report,
    partial_transpose,
    quadripartite_witness,
    reduced_covariance,
    steady_state_covariance,
    symplectic_eigenvalues,
)
from .model import (
    CascadeParams,
    DriveParams,
    EnvironmentParams,
    LinearModel,
    PhysicalParams,
    SubsystemParams,
    assemble_diffusion,
    assemble_drift,
    hz,
    linearize,
    thermal_occupation,
)
from .sweep import Axis, SweepSpec, SweepTable, figure_preset, run_sweep, write_table

__all__ = [
    "Axis",
    "CascadeParams",
    "DriveParams",
    "EntanglementReport",
    "EnvironmentParams",
    "LinearModel",
    "PhysicalParams",
    "SubsystemParams",
    "SweepSpec",
    "SweepTable",
    "analyze",
    "assemble_diffusion",
    "assemble_drift",
    "check_stability",
    "figure_preset",
    "hz",
    "linearize",
    "log_negativity",
    "pairwise_report",
    "partial_transpose",
    "quadripartite_witness",
    "reduced_covariance",
    "run_sweep",
    "steady_state_covariance",
    "symplectic_eigenvalues",
    "thermal_occupation",
    "write_table",
]
