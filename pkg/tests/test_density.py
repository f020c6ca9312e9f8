import numpy as np
import pytest

from expcal.synthetic import GenerativeModel
from expcal.theory.density import density_curves, density_monte_carlo, joint_density_grid
from expcal.theory.state_evolution import SEParams, se_fixed_point


@pytest.fixture(scope="module", params=["logit", "affine", "constant"])
def setup(request):
    model = GenerativeModel(request.param)
    return se_fixed_point(SEParams(20.0, 1e-4, model)), model


def test_normalization(setup):
    ov, model = setup
    mass, edges = joint_density_grid(ov, model, 1.0, 50)
    assert mass.shape == (50, 50) and edges[0] == 0 and edges[-1] == 1
    assert np.all(mass >= -1e-15)
    assert mass.sum() == pytest.approx(1.0, abs=1e-6)


def test_student_marginal_symmetric(setup):
    ov, model = setup
    mass, _ = joint_density_grid(ov, model, 1.3, 40)
    np.testing.assert_allclose(mass.sum(1), mass.sum(1)[::-1], atol=1e-10)


def test_against_monte_carlo(setup):
    ov, model = setup
    mass, _ = joint_density_grid(ov, model, 1.0, 40)
    mc, _ = density_monte_carlo(ov, model, 1.0, 40, n=10**7, seed=3)
    assert 0.5 * np.abs(mass - mc).sum() <= 0.01


def test_curves(setup):
    ov, model = setup
    ell, cond, diag = density_curves(ov, model, 1.0)
    np.testing.assert_array_equal(ell, diag)
    assert cond[len(ell) // 2] == pytest.approx(0.5, abs=1e-14)  # ell = 0.5 in the middle
    assert np.all((cond >= 0) & (cond <= 1))
