import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stiffid.errors import DegenerateFieldError, InsufficientDataError, ValidationError
from stiffid.estimators import estimate_lin
from stiffid.fieldgen import NoiseSpec, add_noise, apply_rigid, inject_outliers
from stiffid.geometry import DisplacementField
from stiffid.stats import (DeflectionCovariance, SignificanceConfig, deflection_covariance, estimate_sigma,
                           filter_outliers, outlier_indices, significance_test)


def test_sigma_zero_residuals():
    assert estimate_sigma([np.zeros((10, 3))]) == 0.0


def test_sigma_hand_case():
    r = np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0]])
    assert estimate_sigma([r]) == 1.0


def test_sigma_pools_experiments():
    # 4 nodes (dof 6) and 5 nodes (dof 9): pooled, not averaged
    a, b = np.full((4, 3), 1.0), np.full((5, 3), 2.0)
    expected = np.sqrt((12 * 1 + 15 * 4) / (6 + 9))
    assert estimate_sigma([a, b]) == pytest.approx(expected, rel=1e-15)


def test_sigma_errors():
    with pytest.raises(InsufficientDataError):
        estimate_sigma([np.zeros((2, 3))])
    with pytest.raises(InsufficientDataError):
        estimate_sigma([])


def test_sigma_unbiased(cube):
    sigma = 5e-5
    ratios = []
    for seed in range(1000):
        f = add_noise(cube, NoiseSpec(sigma, seed))
        ratios.append(estimate_sigma([estimate_lin(f).residuals]) ** 2 / sigma ** 2)
    assert 0.97 <= np.mean(ratios) <= 1.03


def test_covariance_values(cube):
    cov = deflection_covariance(cube, 5e-5)
    assert np.sqrt(cov.cov_t[0, 0]) == pytest.approx(5e-5 / np.sqrt(1331), rel=1e-14)
    assert np.sqrt(cov.cov_t[0, 0]) == pytest.approx(1.37e-6, rel=0.01)
    np.testing.assert_allclose(np.sqrt(np.diag(cov.cov_phi)), 5e-5 / np.sqrt(26620), rtol=1e-14)
    assert np.degrees(np.sqrt(cov.cov_phi[0, 0])) == pytest.approx(1.76e-5, rel=0.01)
    zero = deflection_covariance(cube, 0.0)
    assert not zero.cov_t.any() and not zero.cov_phi.any()


def test_covariance_rescale(cube):
    a = deflection_covariance(cube, 1.0).at_sigma(3.0)
    b = deflection_covariance(cube, 3.0)
    np.testing.assert_allclose(a.cov_phi, b.cov_phi, rtol=1e-14)
    np.testing.assert_allclose(a.std, b.std, rtol=1e-14)
    with pytest.raises(ValidationError):
        DeflectionCovariance(np.eye(3), np.eye(3)).at_sigma(1.0)


def test_covariance_degenerate():
    line = np.outer(np.arange(6.0), [1, 0, 0])
    with pytest.raises(DegenerateFieldError):
        deflection_covariance(DisplacementField(line, np.zeros_like(line)), 1.0)


def test_filter_removes_injected(cube):
    clean = add_noise(apply_rigid(cube, [1, 1, 1], np.radians([0.1] * 3)), NoiseSpec(5e-5, 3))
    f, idx = inject_outliers(clean, 0.05, 10.0, 5e-5, seed=4)
    assert len(idx) == 66
    fit = estimate_lin(f)
    removed = outlier_indices(fit, 0.10)
    assert len(removed) == 134
    assert set(idx) <= set(removed)
    g = filter_outliers(f, fit, 0.10)
    assert g.n == 1331 - 134


def test_filter_percent_zero_unchanged(cube):
    f = add_noise(cube, NoiseSpec(1e-4, 0))
    assert filter_outliers(f, estimate_lin(f), 0.0) is f


def test_filter_any_component_counts():
    p = np.array([[x, y, z] for x in (-1, 0, 1) for y in (-1, 0, 1) for z in (0, 1)], dtype=float)
    r = np.zeros_like(p)
    r[5, 2] = -7.0    # large z residual only
    r[9, 0] = 3.0

    class Fit:
        residuals = r
    assert list(outlier_indices(Fit, 0.05)) == [5]
    assert list(outlier_indices(Fit, 0.10)) == [5, 9]


def test_filter_leaves_too_few():
    p = np.random.default_rng(0).normal(size=(7, 3))
    f = DisplacementField(p, np.zeros_like(p))
    with pytest.raises(InsufficientDataError):
        filter_outliers(f, estimate_lin(f), 0.2)
    with pytest.raises(ValidationError):
        filter_outliers(f, estimate_lin(f), 0.5)


def test_filter_deterministic(cube):
    f = add_noise(cube, NoiseSpec(5e-5, 9))
    fit = estimate_lin(f)
    np.testing.assert_array_equal(outlier_indices(fit, 0.1), outlier_indices(fit, 0.1))


def test_significance_basic():
    cfg = SignificanceConfig(3.0)
    assert not significance_test(0.0, 1.0, cfg)
    assert not significance_test(0.0, 0.0, cfg)
    assert significance_test(10.0, 1.0, cfg)
    assert not significance_test(3.0, 1.0, cfg)   # boundary counts as zero
    assert significance_test(-3.0001, 1.0, cfg)
    with pytest.raises(ValidationError):
        SignificanceConfig(0.0)
    with pytest.raises(ValidationError):
        significance_test(1.0, -1.0)


@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6), st.floats(0, 1e3), st.floats(0.1, 10))
def test_significance_monotone(v1, v2, std, k):
    cfg = SignificanceConfig(k)
    if abs(v1) <= abs(v2) and significance_test(v1, std, cfg):
        assert significance_test(v2, std, cfg)
