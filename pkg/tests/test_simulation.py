import numpy as np
import pytest

from expcal.simulation import aggregate, run_repetition, simulate
from expcal.synthetic import GenerativeModel


def test_repetition_fields():
    row = run_repetition(GenerativeModel("affine"), 2.0, 50, 1e-2, seed=1)
    assert row["status"] == "ok"
    assert row["delta_T"] == pytest.approx(abs(row["T_EC"] - row["T_TS"]) / row["T_TS"])
    for k in ("ECE_raw", "ECE_TS", "ECE_EC"):
        assert 0 <= row[k] <= 1


def test_failures_are_recorded_per_repetition():
    # n = 1: the validation accuracy is 0 or 1, so one of the fits fails or clamps
    rows = simulate(GenerativeModel(), 0.02, 50, 1.0, reps=4, seed=0)
    assert len(rows) == 4 and [r["rep"] for r in rows] == [0, 1, 2, 3]
    assert all("status" in r for r in rows)


def test_parallel_equals_serial():
    m = GenerativeModel("constant")
    a = simulate(m, 2.0, 30, 1e-2, reps=3, seed=2, jobs=1)
    b = simulate(m, 2.0, 30, 1e-2, reps=3, seed=2, jobs=2)
    assert a == b


def test_aggregate_statistics():
    rows = [{"status": "ok", "m_emp": 1.0, "q_emp": 2.0, "T_TS": 1.0, "T_EC": 1.1, "delta_T": 0.1},
            {"status": "ok", "m_emp": 3.0, "q_emp": 4.0, "T_TS": 1.0, "T_EC": 1.3, "delta_T": 0.3},
            {"status": "error: x"}]
    agg = aggregate(rows, GenerativeModel(), 1.0, 10, 0.1, theory=(2.0, 3.0))
    assert agg["n_ok"] == 2 and agg["reps"] == 3
    assert agg["m_mean"] == 2.0 and agg["m_se"] == pytest.approx(1.0)
    assert agg["delta_T_mean"] == pytest.approx(0.2)
    assert (agg["m_theory"], agg["q_theory"]) == (2.0, 3.0)


@pytest.mark.slow
def test_temperature_gap_estimate_shrinks_with_validation_size():
    # the finite-sample delta_T is dominated by validation noise: it falls toward
    # the asymptotic value as the validation split grows
    m = GenerativeModel("affine")
    small = aggregate(simulate(m, 1.0, 200, 1e-4, reps=30, seed=0), m, 1.0, 200, 1e-4)
    large = aggregate(simulate(m, 1.0, 200, 1e-4, reps=30, seed=0, n_val=5000), m, 1.0, 200, 1e-4)
    assert large["delta_T_mean"] < small["delta_T_mean"]
    assert large["delta_T_mean"] < 0.06
