"""Asymptotic (n, d -> inf, n/d = alpha) theory of logistic-regression calibration."""
from .asymptotics import (
    asymptotic_brier,
    asymptotic_calibration,
    asymptotic_ece,
    asymptotic_error,
    asymptotic_loss,
    asymptotic_mean_confidence,
    fit_ec_asymptotic,
    fit_ts_asymptotic,
)
from .channels import f_out, f_out_and_derivative, prox_logistic, z_star
from .density import density_curves, joint_density_grid
from .state_evolution import Overlaps, SEParams, se_fixed_point
from .sweep import optimize_lambda, sweep, sweep_point

__all__ = [
    "Overlaps", "SEParams", "asymptotic_brier", "asymptotic_calibration", "asymptotic_ece",
    "asymptotic_error", "asymptotic_loss", "asymptotic_mean_confidence", "density_curves",
    "f_out", "f_out_and_derivative", "fit_ec_asymptotic", "fit_ts_asymptotic", "joint_density_grid",
    "optimize_lambda", "prox_logistic", "se_fixed_point", "sweep", "sweep_point", "z_star",
]
