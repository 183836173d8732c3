"""Upscaled two-fluid/mineral dynamics in a thin strip.

Two models of the same physical setting share one scenario format and one
output layout: a phase-field description resolving the cross-section of the
strip at every longitudinal position, and a sharp-interface companion that
evolves the layer widths directly.  See the README for the file formats and
the command line front end.
"""

from .params import InvalidParams, ModelParams
from .grids import GridError, XGrid, YGrid
from .potentials import (DomainError, MixtureError, double_well,
                         double_well_d1, double_well_d2, equilibrium_profile,
                         mixtures, profile_z, project, rate_r, reaction_R,
                         reaction_q, triple_well, triple_well_grad,
                         triple_well_hess)
from .cellflow import (SharpFlowProfile, closed_form_kc, closed_form_kf,
                       permeabilities, slip_length, solve_w_phasefield)
from .chcell import (CellState, CFLViolation, GeometryError, NewtonDiverged,
                     cell_integrals, ch_step, extract_interfaces,
                     make_initial_cell, mixture_energy)
from .macro import (PressureBC, PressureBCError, ion_balance_residual,
                    ion_step, solve_pressure)
from .sharp import (SharpState, ShockReached, StateCollapse,
                    characteristics_oracle, flux_fraction, flux_fraction_d2,
                    sharp_step)
from .scenario import (ConfigError, ScenarioConfig, calibrated_flux,
                       geometry_profiles, initial_ion, parse_scenario,
                       read_scenario, scenario_text, source_profile)
from .runner import (RunResult, compare_runs, read_meta, read_snapshot,
                     run_phasefield, run_scenario, run_sharp)

__version__ = "0.1.0"

__all__ = [
    "ModelParams", "InvalidParams",
    "XGrid", "YGrid", "GridError",
    "DomainError", "MixtureError", "double_well", "double_well_d1",
    "double_well_d2", "triple_well", "triple_well_grad", "triple_well_hess",
    "mixtures", "profile_z", "project", "equilibrium_profile", "reaction_q", "rate_r",
    "reaction_R",
    "solve_w_phasefield", "permeabilities", "closed_form_kf",
    "closed_form_kc", "slip_length", "SharpFlowProfile",
    "CellState", "ch_step", "make_initial_cell", "cell_integrals",
    "mixture_energy", "extract_interfaces", "NewtonDiverged", "CFLViolation",
    "GeometryError",
    "PressureBC", "PressureBCError", "solve_pressure", "ion_step",
    "ion_balance_residual",
    "SharpState", "sharp_step", "flux_fraction", "flux_fraction_d2",
    "characteristics_oracle", "StateCollapse", "ShockReached",
    "ScenarioConfig", "ConfigError", "parse_scenario", "read_scenario",
    "scenario_text", "geometry_profiles", "source_profile", "initial_ion",
    "calibrated_flux",
    "RunResult", "run_scenario", "run_phasefield", "run_sharp",
    "compare_runs", "read_snapshot", "read_meta",
]
