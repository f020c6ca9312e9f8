import numpy as np
import pytest

from expcal.synthetic import GenerativeModel
from expcal.theory.state_evolution import DEFAULT_INIT, Overlaps, SEParams, se_fixed_point, se_update


def test_params_validation():
    for kw in ({"alpha": 0, "lam": 1}, {"alpha": 1, "lam": 0}, {"alpha": 1, "lam": 1, "damping": 1.0}):
        with pytest.raises(ValueError):
            SEParams(**kw)


def test_update_rejects_bad_state():
    with pytest.raises(ValueError):
        se_update(Overlaps(0.1, -1.0, 1.0), SEParams(1.0, 1.0))


def test_strong_regularization_limit():
    lam = 1e3
    ov = se_fixed_point(SEParams(2.0, lam))
    assert ov.converged
    assert abs(ov.m) < 1e-3 and ov.q < 1e-5 and ov.v == pytest.approx(1 / lam, rel=1e-3)


def test_small_alpha_gives_small_m():
    ov = se_fixed_point(SEParams(1e-3, 1.0))
    assert ov.converged and abs(ov.m) < 1e-3


@pytest.mark.parametrize("target", ["logit", "affine", "constant"])
def test_fixed_point_residual_and_invariants(target):
    p = SEParams(2.0, 0.1, GenerativeModel(target))
    ov = se_fixed_point(p)
    assert ov.converged and ov.residual <= p.tol
    again = se_update(ov, SEParams(2.0, 0.1, GenerativeModel(target), damping=0.0))
    for a, b in zip(again.as_tuple(), ov.as_tuple()):
        assert abs(a - b) <= 10 * p.tol * max(abs(b), 1e-12)
    assert ov.q > 0 and ov.v > 0 and ov.q_hat >= 0
    assert ov.m**2 <= p.model.rho * ov.q


def test_two_inits_same_fixed_point():
    p = SEParams(3.0, 0.05, GenerativeModel("affine"))
    a = se_fixed_point(p)
    b = se_fixed_point(p, init=Overlaps(1.0, 3.0, 0.2))
    for x, y in zip(a.as_tuple(), b.as_tuple()):
        assert x == pytest.approx(y, rel=10 * p.tol * 10)


@pytest.mark.parametrize("target, lam", [("logit", 1e-2), ("affine", 1e-4), ("constant", 1e-3)])
def test_quadrature_refinement_stable(target, lam):
    model = GenerativeModel(target)
    a = se_fixed_point(SEParams(2.0, lam, model, order=100, tol=1e-12))
    b = se_fixed_point(SEParams(2.0, lam, model, order=200, tol=1e-12))
    assert abs(a.m - b.m) < 1e-8 and abs(a.q - b.q) < 1e-8 * max(1.0, b.q)


def test_polish_path_near_transition():
    # slow damped contraction at small lambda is accelerated by the root polish
    ov = se_fixed_point(SEParams(2.0, 1e-4))
    assert ov.converged and ov.iterations < 10_000


def test_non_convergence_reported():
    ov = se_fixed_point(SEParams(2.0, 1e-4, max_iter=3), polish_after=10**9)
    assert not ov.converged and ov.iterations == 3


def test_default_init():
    assert DEFAULT_INIT.as_tuple() == (0.1, 0.5, 1.0)
