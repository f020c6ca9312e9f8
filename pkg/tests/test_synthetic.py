import numpy as np
import pytest
from scipy import stats

from conftest import random_logits
from expcal.metrics import LabeledLogits, accuracy
from expcal.synthetic import (
    GenerativeModel,
    SolverError,
    SyntheticDataset,
    corrupt_labels,
    empirical_overlaps,
    erm_train,
    is_separable,
    risk,
    risk_gradient,
    sample_dataset,
    sample_labels,
    target_activation,
)


@pytest.mark.parametrize("target, z, expected", [
    ("constant", 0.0, 0.5), ("constant", 1.5, 1.0), ("constant", -1.5, 0.0),
    ("affine", 0.5, 0.75), ("affine", -3.0, 0.0), ("affine", 3.0, 1.0),
    ("logit", 0.0, 0.5),
])
def test_target_activation_values(target, z, expected):
    assert target_activation(GenerativeModel(target), z) == expected


@pytest.mark.parametrize("target", ["logit", "affine", "constant"])
def test_target_activation_antisymmetry(target):
    z = np.linspace(-4, 4, 81)
    m = GenerativeModel(target)
    np.testing.assert_allclose(target_activation(m, -z), 1 - target_activation(m, z), atol=1e-15)


def test_generative_model_validation():
    for kw in ({"target": "probit"}, {"T_star": 0.0}, {"rho": -1.0}):
        with pytest.raises(ValueError):
            GenerativeModel(**kw)


def test_constant_far_branch_always_positive():
    d = 2
    w = np.array([1.0, 0.0])
    y = sample_labels(GenerativeModel("constant"), np.full(1000, 10.0), seed=0)
    assert np.all(y == 1)
    ds = sample_dataset(GenerativeModel("constant"), 5, d, seed=0, w_star=w)
    assert ds.w_star is not None and ds.X.shape == (5, 2)


def test_labels_symmetric_at_zero_field():
    y = sample_labels(GenerativeModel("logit"), np.zeros(10**6), seed=1)
    assert abs(y.mean()) < 3e-3


def test_affine_conditional_probability():
    y = sample_labels(GenerativeModel("affine"), np.full(10**6, 0.5), seed=2)
    p = np.mean(y == 1)
    assert abs(p - 0.75) < 4 * np.sqrt(0.75 * 0.25 / 1e6)


def test_sample_dataset_distribution():
    ds = sample_dataset(GenerativeModel(), 10_000, 1000, seed=3)
    norms = np.sum(ds.X**2, axis=1)
    assert abs(norms.mean() - 1.0) < 0.01
    # w*.x has variance |w*|^2 / d given w*
    proj = ds.X @ ds.w_star / np.sqrt(ds.w_star @ ds.w_star / ds.d)
    assert stats.kstest(proj, "norm").pvalue > 1e-3
    assert set(np.unique(ds.y)) <= {-1.0, 1.0}


def test_seed_determinism():
    m = GenerativeModel("affine")
    a = sample_dataset(m, 50, 20, seed=42)
    b = sample_dataset(m, 50, 20, seed=42)
    for f in ("X", "y", "w_star"):
        np.testing.assert_array_equal(getattr(a, f), getattr(b, f))
    sa, sb = erm_train(a, 0.1), erm_train(b, 0.1)
    np.testing.assert_array_equal(sa.w_hat, sb.w_hat)


def test_w_star_shape_checked():
    with pytest.raises(ValueError):
        sample_dataset(GenerativeModel(), 10, 5, seed=0, w_star=np.ones(4))


def test_to_logits_orientation():
    ds = SyntheticDataset(X=np.array([[1.0, 0.0], [0.0, -1.0]]), y=np.array([1.0, -1.0]), w_star=np.ones(2))
    lg = ds.to_logits(np.array([2.0, 3.0]))
    np.testing.assert_array_equal(lg.logits, [[0.0, 2.0], [0.0, 3.0 * -1.0]])
    np.testing.assert_array_equal(lg.labels, [1, 0])
    assert accuracy(lg) == 1.0


# -- ERM ------------------------------------------------------------------------

def test_erm_symmetric_pair_direction():
    x = np.array([0.6, -0.8])
    ds = SyntheticDataset(X=np.vstack([x, -x]), y=np.array([1.0, -1.0]), w_star=np.zeros(2))
    sol = erm_train(ds, 0.5)
    cos = sol.w_hat @ x / (np.linalg.norm(sol.w_hat) * np.linalg.norm(x))
    assert cos == pytest.approx(1.0, abs=1e-12)


def test_erm_strong_regularization():
    ds = sample_dataset(GenerativeModel(), 100, 20, seed=0)
    sol = erm_train(ds, 1e8)
    assert np.linalg.norm(sol.w_hat) < 1e-6
    assert abs(sol.m_emp) < 1e-6 and sol.q_emp < 1e-12


def test_erm_kkt_and_local_optimality():
    ds = sample_dataset(GenerativeModel("affine"), 300, 50, seed=4)
    sol = erm_train(ds, 1e-2)
    assert np.linalg.norm(risk_gradient(sol.w_hat, ds.X, ds.y, 1e-2)) <= 1e-8 * ds.n
    f0 = risk(sol.w_hat, ds.X, ds.y, 1e-2)
    rng = np.random.default_rng(0)
    for _ in range(5):
        u = rng.standard_normal(50)
        assert risk(sol.w_hat + 1e-3 * u / np.linalg.norm(u), ds.X, ds.y, 1e-2) > f0


def test_risk_gradient_finite_difference():
    ds = sample_dataset(GenerativeModel(), 40, 6, seed=5)
    w = np.random.default_rng(1).standard_normal(6)
    g = risk_gradient(w, ds.X, ds.y, 0.3)
    h = 1e-6
    fd = [(risk(w + h * e, ds.X, ds.y, 0.3) - risk(w - h * e, ds.X, ds.y, 0.3)) / (2 * h) for e in np.eye(6)]
    np.testing.assert_allclose(g, fd, rtol=1e-6, atol=1e-8)


def test_erm_unregularized_separable_rejected():
    ds = sample_dataset(GenerativeModel(), 10, 50, seed=0)  # n < d: separable
    assert is_separable(ds.X, ds.y)
    with pytest.raises(SolverError):
        erm_train(ds, 0.0)


def test_erm_unregularized_nonseparable_ok():
    ds = sample_dataset(GenerativeModel(), 2000, 5, seed=0)
    assert not is_separable(ds.X, ds.y)
    sol = erm_train(ds, 0.0)
    assert sol.grad_norm <= 1e-8 * ds.n


def test_erm_negative_lambda():
    with pytest.raises(ValueError):
        erm_train(sample_dataset(GenerativeModel(), 10, 2, seed=0), -1.0)


def test_overlaps_two_ways():
    rng = np.random.default_rng(3)
    ws, wh = rng.standard_normal(400), rng.standard_normal(400)
    a = empirical_overlaps(ws, wh, "dot")
    b = empirical_overlaps(ws, wh, "gram")
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12)


def test_cauchy_schwarz():
    ds = sample_dataset(GenerativeModel(), 800, 400, seed=8)
    sol = erm_train(ds, 1e-2)
    rho_emp = ds.w_star @ ds.w_star / ds.d
    assert sol.m_emp**2 <= rho_emp * sol.q_emp + 1e-12


# -- corruption -----------------------------------------------------------------

def test_corrupt_rejects_empty_and_invalid():
    d = random_logits(0, K=4)
    with pytest.raises(ValueError):
        corrupt_labels(d, [])
    with pytest.raises(ValueError):
        corrupt_labels(d, [4])


def test_corrupt_fraction_and_others_untouched():
    rng = np.random.default_rng(0)
    n, K = 20_000, 10
    d = LabeledLogits(rng.standard_normal((n, K)), rng.integers(0, K, n))
    out = corrupt_labels(d, {0}, seed=1)
    touched = d.labels == 0
    assert abs(touched.mean() - 0.1) < 0.01
    np.testing.assert_array_equal(out.labels[~touched], d.labels[~touched])
    np.testing.assert_array_equal(out.logits, d.logits)


def test_corrupt_all_gives_chance_accuracy():
    n, K = 50_000, 10
    rng = np.random.default_rng(1)
    y = rng.integers(0, K, n)
    z = np.eye(K)[y] * 10  # perfect classifier before corruption
    d = LabeledLogits(z, y)
    out = corrupt_labels(d, range(K), seed=2)
    assert accuracy(out) == pytest.approx(1 / K, abs=0.01)


def test_corrupt_deterministic_and_dataset_type():
    d = random_logits(3)
    np.testing.assert_array_equal(corrupt_labels(d, [1], seed=5).labels, corrupt_labels(d, [1], seed=5).labels)
    ds = sample_dataset(GenerativeModel(), 500, 10, seed=0)
    out = corrupt_labels(ds, [0], seed=1)
    assert isinstance(out, SyntheticDataset)
    np.testing.assert_array_equal(out.y[ds.y == 1], 1.0)
    assert set(np.unique(out.y)) <= {-1.0, 1.0}
