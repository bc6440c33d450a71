"""Ricci flow on the flat torus and round sphere, with checks of the
log-Sobolev, Sobolev, noncollapsing and extinction bounds it satisfies."""
from .surface import (
    ConformalSurface,
    ScalarField,
    curvature_moment,
    dirichlet_energy,
    grad_norm_l1,
    hessian,
    integrate,
    scalar_curvature,
    sphere,
    torus,
    volume,
)
from .flow import StepControl, run_flow, solve_conjugate_backward, f_energy_rate_check
from .spectral import lambda0, rayleigh_quotient
from .inequalities import LogSobolevConstants, constants_for, neumann_isoperimetric_estimate
from .noncollapse import kappa_scan
from .oracles import ModelSolution, analytic_cni, oracle_eval
from .config import ExperimentConfig, load_config
from .runner import run

__all__ = [
    "ConformalSurface", "ScalarField", "curvature_moment", "dirichlet_energy", "grad_norm_l1",
    "hessian", "integrate", "scalar_curvature", "sphere", "torus", "volume",
    "StepControl", "run_flow", "solve_conjugate_backward", "f_energy_rate_check",
    "lambda0", "rayleigh_quotient",
    "LogSobolevConstants", "constants_for", "neumann_isoperimetric_estimate",
    "kappa_scan", "ModelSolution", "analytic_cni", "oracle_eval",
    "ExperimentConfig", "load_config", "run",
]
