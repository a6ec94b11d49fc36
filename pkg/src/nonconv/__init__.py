"""Linear nonlocal convection with a spatially varying horizon.

Modules
-------
kernel          reference kernel, horizon field, initial data
discretization  grid and upwind nonlocal stencil
solver          forward Euler stepping and snapshots
singularity     jumps of u and u_x by difference quotients and jump laws
scenarios       scenario files, presets and batch output
"""

from nonconv.kernel import (
    LOCAL, HorizonField, InitialData, LocalPointError, ReferenceKernel,
    build_horizon, build_initial, build_kernel, gamma_eval,
    gamma_x_jump_integrand, gaussian_paper, k_of_x)
from nonconv.discretization import (
    CoefficientRow, Grid, Stencil, apply_operator, assemble, assemble_row)
from nonconv.solver import (
    SnapshotStore, SolverState, choose_domain, integrate, run,
    stability_check, step)
from nonconv.scenarios import (
    ConfigError, ScenarioConfig, list_presets, run_preset, validate)

__version__ = "0.1.0"

__all__ = [
    "LOCAL", "HorizonField", "InitialData", "LocalPointError", "ReferenceKernel",
    "build_horizon", "build_initial", "build_kernel", "gamma_eval",
    "gamma_x_jump_integrand", "gaussian_paper", "k_of_x",
    "CoefficientRow", "Grid", "Stencil", "apply_operator", "assemble", "assemble_row",
    "SnapshotStore", "SolverState", "choose_domain", "integrate", "run",
    "stability_check", "step",
    "ConfigError", "ScenarioConfig", "list_presets", "run_preset", "validate",
]
