import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rarelogit import (
    DensityModel,
    EmpiricalModel,
    GaussianModel,
    Rng,
    gaussian_tilted_mean,
    sample_majority,
    surrounds_check,
    tilted_moments,
)
from rarelogit.errors import InvalidModel, MomentOverflow


def std_density(x):
    return np.exp(-0.5 * x * x) / np.sqrt(2 * np.pi)


@pytest.fixture(scope="module")
def density_model():
    return DensityModel(std_density)


def all_models(density_model):
    return [
        GaussianModel.univariate(0.3, 1.7),
        EmpiricalModel([-1.0, 0.5, 2.0, 4.0]),
        density_model,
    ]


@pytest.mark.parametrize("t", [-2.0, -0.5, 0.0, 1.0, 3.0])
def test_gaussian_m0(std_normal, t):
    tm = tilted_moments(std_normal, [t], 1)
    assert tm.m0 == pytest.approx(math.exp(t * t / 2), rel=1e-14)
    assert tm.mean[0] == pytest.approx(t, abs=1e-14)


def test_zero_tilt_gives_untilted_moments(density_model):
    for model in all_models(density_model):
        tm = tilted_moments(model, [0.0], 1)
        assert tm.m0 == pytest.approx(1.0, abs=1e-10)
        assert tm.m1 == pytest.approx(model.mean(), abs=1e-10)
    emp = EmpiricalModel([-1.0, 0.5, 2.0, 4.0])
    assert tilted_moments(emp, [0.0]).m2[0, 0] == pytest.approx(np.mean(emp.points**2))


def test_empirical_three_points():
    tm = tilted_moments(EmpiricalModel([1.0, 2.0, 3.0]), [0.5], 1)
    # (e^0.5 + e^1 + e^1.5) / 3
    assert tm.m0 == pytest.approx(2.9495640564990794, rel=1e-15)


def test_multiplier_two_doubles_tilt(std_normal):
    assert tilted_moments(std_normal, [0.7], 2).m0 == pytest.approx(
        tilted_moments(std_normal, [1.4], 1).m0, rel=1e-14)


def test_center_scales_by_constant(density_model):
    for model in all_models(density_model):
        a = tilted_moments(model, [0.4], 1)
        b = tilted_moments(model, [0.4], 1, center=[1.5])
        assert b.m0 == pytest.approx(a.m0 * math.exp(-0.4 * 1.5), rel=1e-9)
        assert b.mean[0] == pytest.approx(a.mean[0] - 1.5, rel=1e-9, abs=1e-10)


@pytest.mark.parametrize("args, expected", [((0, 1, 0), 0.0), ((0, 1, 1), 1.0),
                                            ((2, 4, 0.5), 4.0)])
def test_gaussian_tilted_mean(args, expected):
    assert gaussian_tilted_mean(*args) == expected


def gaussian_f_moment(f_index, m, s2):
    return [1.0, m, m * m + s2][f_index]


@pytest.mark.parametrize("mu", [-1.0, 0.0, 2.0])
@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("t", [-3.0, -1.0, 0.5, 3.0])
def test_tilting_identity_by_quadrature(mu, sigma, t):
    """int e^{tx} f dF0 = e^{t^2 s^2/2 + mu t} int f dF_t, F_t = N(mu + t s^2, s^2)."""
    model = GaussianModel.univariate(mu, sigma)
    tm = tilted_moments(model, [t], 1, method="quadrature")
    lhs = [tm.m0, tm.m1[0], tm.m2[0, 0]]
    s2 = sigma * sigma
    scale = math.exp(t * t * s2 / 2 + mu * t)
    for i in range(3):
        rhs = scale * gaussian_f_moment(i, mu + t * s2, s2)
        assert lhs[i] == pytest.approx(rhs, rel=1e-8, abs=1e-8 * scale)


def test_quadrature_route_matches_closed_form_2d():
    model = GaussianModel([0.5, -1.0], [[1.0, 0.3], [0.3, 0.5]])
    for k in (1, 2):
        a = tilted_moments(model, [0.4, -0.8], k)
        b = tilted_moments(model, [0.4, -0.8], k, method="quadrature")
        assert b.m0 == pytest.approx(a.m0, rel=1e-10)
        assert np.allclose(b.m1, a.m1, rtol=1e-9, atol=1e-12)
        assert np.allclose(b.m2, a.m2, rtol=1e-9, atol=1e-12)


@given(st.floats(-3, 3), st.floats(0.01, 2))
def test_tilted_mean_monotone_empirical(b, h):
    model = EmpiricalModel([-2.0, -0.3, 0.1, 1.0, 2.5])
    assert tilted_moments(model, [b + h]).mean[0] > tilted_moments(model, [b]).mean[0]


@given(st.floats(-2, 2), st.floats(0.01, 1))
def test_tilted_mean_monotone_density(b, h):
    model = DensityModel(lambda x: np.where(np.abs(x) <= 1, 0.5, 0.0), (-1.0, 1.0))
    assert tilted_moments(model, [b + h]).mean[0] > tilted_moments(model, [b]).mean[0]


def test_tilted_covariance_psd():
    model = EmpiricalModel(np.random.default_rng(3).standard_normal((40, 3)))
    tm = tilted_moments(model, [0.2, -0.5, 0.9], 2)
    assert np.allclose(tm.m2, tm.m2.T)
    assert np.min(np.linalg.eigvalsh(tm.cov)) > 0


def test_moment_overflow():
    with pytest.raises(MomentOverflow):
        tilted_moments(GaussianModel.univariate(0, 1), [30.0], 2)
    with pytest.raises(MomentOverflow):
        tilted_moments(EmpiricalModel([0.0, 1000.0]), [1.0], 1)


def test_invalid_models():
    with pytest.raises(InvalidModel):
        GaussianModel([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(InvalidModel):
        DensityModel(lambda x: 2 * std_density(x))
    with pytest.raises(InvalidModel):
        EmpiricalModel([])


def test_sample_determinism(std_normal, density_model):
    for model in (std_normal, EmpiricalModel([1.0, 2.0]), density_model):
        a = sample_majority(model, 50, Rng(5, 1))
        b = sample_majority(model, 50, Rng(5, 1))
        assert np.array_equal(a, b)
        assert a.shape == (50, 1)


def test_sample_moments(std_normal, density_model):
    for model in (std_normal, density_model):
        x = sample_majority(model, 100_000, Rng(21))[:, 0]
        assert abs(x.mean()) < 0.02
        assert abs(x.var() - 1.0) < 0.05


def test_single_atom_sample():
    assert np.all(sample_majority(EmpiricalModel([5.0]), 100, Rng(0)) == 5.0)


def test_surrounds_gaussian(std_normal):
    res = surrounds_check(std_normal, [0.0], 0.1)
    # 1 - Phi(0.1), mpmath
    assert res.worst_mass == pytest.approx(0.460172162722971, abs=1e-14)
    assert res.satisfied


def test_surrounds_directions_1d(std_normal):
    res = surrounds_check(std_normal, [1.0], 0.1, directions=500)
    assert res.worst_direction.tolist() == [1.0]
    assert surrounds_check(std_normal, [-1.0], 0.1).worst_direction.tolist() == [-1.0]


def test_surrounds_empirical():
    res = surrounds_check(EmpiricalModel([-1.0, 1.0]), [0.0], 0.5)
    assert res.worst_mass == 0.5 and res.satisfied
    assert not surrounds_check(EmpiricalModel([-1.0, 1.0]), [2.0], 0.5).satisfied


def test_surrounds_raw_sample_2d():
    pts = np.random.default_rng(0).standard_normal((500, 2))
    assert surrounds_check(pts, [0.0, 0.0], 0.1).satisfied
    assert not surrounds_check(pts, [10.0, 0.0], 0.1).satisfied


def test_surrounds_gaussian_2d_matches_axis_mass():
    model = GaussianModel([0.0, 0.0], [[1.0, 0.0], [0.0, 4.0]])
    res = surrounds_check(model, [0.0, 0.0], 0.1, directions=64)
    # smallest mass is along the narrow axis: 1 - Phi(0.1)
    assert res.worst_mass == pytest.approx(0.460172162722971, abs=1e-12)
