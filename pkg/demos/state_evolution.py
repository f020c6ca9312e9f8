"""
Asymptotic calibration of logistic regression
=============================================

For ridge-penalized logistic regression on Gaussian data, the overlaps
``m = w*.w / d`` and ``q = |w|^2 / d`` are given in high dimension by a small
fixed-point system. Every uncertainty metric follows from them. This
script solves the system for the three teacher activations, then compares
the temperatures picked by temperature scaling and by expectation
consistency as the sample ratio ``alpha = n / d`` grows.
"""

from expcal import GenerativeModel
from expcal.theory import (
    SEParams,
    asymptotic_ece,
    asymptotic_error,
    fit_ec_asymptotic,
    fit_ts_asymptotic,
    se_fixed_point,
)

lam = 1e-4
for target in ("logit", "affine", "constant"):
    model = GenerativeModel(target)
    print(f"\n{target} teacher")
    print("alpha      m        q      error   T_TS    T_EC   dT      ECE_raw  ECE_EC")
    for alpha in (1.0, 5.0, 20.0):
        ov = se_fixed_point(SEParams(alpha, lam, model))
        t_ts = fit_ts_asymptotic(ov, model).temperature
        t_ec = fit_ec_asymptotic(ov, model).temperature
        print(f"{alpha:5.1f} {ov.m:8.3f} {ov.q:8.3f}  {asymptotic_error(ov, model):.4f} "
              f"{t_ts:7.3f} {t_ec:7.3f}  {abs(t_ec - t_ts) / t_ts:.4f}  "
              f"{asymptotic_ece(ov, model):.4f}   {asymptotic_ece(ov, model, t_ec):.4f}")

# The two temperatures nearly coincide for the logit teacher, where the model
# is well specified, and drift apart for the misspecified teachers.
