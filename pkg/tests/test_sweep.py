import numpy as np
import pytest

from expcal.synthetic import GenerativeModel
from expcal.theory.asymptotics import asymptotic_error, asymptotic_loss
from expcal.theory.state_evolution import SEParams, se_fixed_point
from expcal.theory.sweep import (
    SWEEP_COLUMNS,
    asymptotic_report,
    optimize_lambda,
    relative_temperature_gap,
    sweep,
    sweep_point,
)


def test_optimize_lambda_local_optimality():
    model = GenerativeModel("constant")
    fit = optimize_lambda(2.0, model, "error")
    assert not fit.clamped

    def err(lam):
        return asymptotic_error(se_fixed_point(SEParams(2.0, lam, model)), model)

    assert fit.value <= err(2 * fit.lam) + 1e-12
    assert fit.value <= err(fit.lam / 2) + 1e-12


def test_lambda_error_differs_from_lambda_loss_misspecified():
    model = GenerativeModel("constant")
    a = optimize_lambda(2.0, model, "error")
    b = optimize_lambda(2.0, model, "loss")
    assert abs(np.log(a.lam / b.lam)) > 0.05
    assert b.value <= asymptotic_loss(a.overlaps, model) + 1e-12


def test_optimize_lambda_rejects_objective():
    with pytest.raises(ValueError):
        optimize_lambda(2.0, GenerativeModel(), "ece")


def test_sweep_point_columns_and_order():
    rows = sweep([1.0, 3.0], [1e-1], ["logit", "affine"])
    assert [(r["target"], r["alpha"]) for r in rows] == [("logit", 1.0), ("logit", 3.0),
                                                          ("affine", 1.0), ("affine", 3.0)]
    for r in rows:
        assert set(SWEEP_COLUMNS) <= set(r)
        assert r["converged"] and 0 <= r["E_g"] <= 0.5
        assert relative_temperature_gap(r) >= 0


def test_sweep_parallel_matches_serial():
    a = sweep([2.0, 4.0], [1e-2], ["constant"], jobs=1)
    b = sweep([2.0, 4.0], [1e-2], ["constant"], jobs=2)
    assert a == b


def test_non_converged_row_is_flagged():
    row = sweep_point(2.0, 1e-4, "logit", max_iter=2)
    assert row["converged"] is False


def test_report_to_dict():
    ov = se_fixed_point(SEParams(2.0, 1e-2))
    rep = asymptotic_report(ov, GenerativeModel(), 1.2, ell=[0.6, 0.8]).to_dict()
    assert rep["temperature"] == 1.2 and len(rep["calibration"]) == 2
    assert 0 <= rep["ece"] <= 1 and 0 <= rep["error"] <= 0.5


def test_delta_t_non_decreasing_in_alpha():
    rows = sweep([1.0, 4.0, 10.0, 20.0], [1e-4], ["affine"])
    gaps = [relative_temperature_gap(r) for r in rows]
    assert all(b >= a for a, b in zip(gaps, gaps[1:]))
