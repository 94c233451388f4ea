"""Nearest positive-real (passive) LTI system approximation.

Given a standard or descriptor state-space system (E, A, B, C, D), the
package finds a nearby passive system by minimizing a weighted Frobenius
distance over port-Hamiltonian parametrizations with a fast projected
gradient method, and provides LMI-based initializations, passivity
diagnostics and benchmark drivers.
"""

from .analysis import (DiagnosticsReport, HamiltonianCheck, LmiResidual,
                       PencilEigs, hamiltonian_check, index_le_one,
                       lmi_residual, passivity_report, pencil_eigs,
                       transfer_eval)
from .errors import (BisectionFailed, EigFailure, IllConditionedX,
                     NearprError, NonFiniteObjective, PoleAt,
                     PreconditionViolated, SingularPencil, SingularQ,
                     SolverFailed)
from .experiments import (BenchReport, MsdParams, msd_generate, msd_perturb,
                          perturb_to_distance, random_pr_system,
                          relative_error, run_benchmark, sv_perturb)
from .fgm import FgmOptions, FgmTrace, fgm_minimize, initial_step, solve_nearest
from .init import (DEFAULT_COND_CAP, LmiInitResult, init_lmi_formula,
                   init_lmi_solve, init_random, init_standard, init_true,
                   optimal_f, solve_delta_lmi)
from .model import (LtiSystem, PhForm, PhGradient, Weights, assemble,
                    cost_matrix, gradient, objective)
from .projections import Bounds, project_ph, project_psd, project_skew
from ._io import (load_system, ph_from_dict, ph_to_dict, save_system,
                  system_to_dict)

__all__ = [
    "BenchReport", "BisectionFailed", "Bounds", "DEFAULT_COND_CAP",
    "DiagnosticsReport", "EigFailure", "FgmOptions", "FgmTrace",
    "HamiltonianCheck", "IllConditionedX", "LmiInitResult", "LmiResidual",
    "LtiSystem", "MsdParams", "NearprError", "NonFiniteObjective",
    "PencilEigs", "PhForm", "PhGradient", "PoleAt", "PreconditionViolated",
    "SingularPencil", "SingularQ", "SolverFailed", "Weights", "assemble",
    "cost_matrix", "fgm_minimize", "gradient", "hamiltonian_check",
    "index_le_one", "init_lmi_formula", "init_lmi_solve", "init_random",
    "init_standard", "init_true", "initial_step", "lmi_residual",
    "load_system", "msd_generate", "msd_perturb", "objective", "optimal_f",
    "passivity_report", "pencil_eigs", "perturb_to_distance", "ph_from_dict",
    "ph_to_dict", "project_ph", "project_psd", "project_skew",
    "random_pr_system", "relative_error", "run_benchmark", "save_system",
    "solve_delta_lmi", "solve_nearest", "sv_perturb", "system_to_dict",
    "transfer_eval",
]

__version__ = "0.1.0"
