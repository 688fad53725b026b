import numpy as np
import pytest

from stiffid.beam import BeamSpec, beam_compliance_analytic
from stiffid.compliance import (ComplianceMatrix, Experiment, LoadCase, canonical_loads, identify, is_symmetric,
                                prune, recommend_loads, scale_ci, symmetrize, to_stiffness)
from stiffid.errors import (InsufficientDataError, NonPhysicalMatrixError, RecommendationError, UnidentifiableError,
                            ValidationError)
from stiffid.geometry import RigidDeflection
from stiffid.stats import DeflectionCovariance, SignificanceConfig

# synthetic deflections here are arbitrary numbers, not small rotations
pytestmark = pytest.mark.filterwarnings("ignore::stiffid.geometry.LinearityWarning")


def random_spd(rng):
    A = rng.normal(size=(6, 6))
    k = A @ A.T + 6 * np.eye(6)
    s = np.array([1e-3, 1e-3, 1e-3, 1e-6, 1e-6, 1e-6])
    return s[:, None] * k * s[None, :] / 1e-6


def experiments_for(k, loads, cov=None):
    out = []
    for load in loads:
        d = k @ load.wrench
        out.append(Experiment(load, RigidDeflection(d[:3], d[3:]), cov))
    return out


def unit_cov(std_t=1e-6, std_phi=1e-8):
    return DeflectionCovariance(std_t ** 2 * np.eye(3), std_phi ** 2 * np.eye(3), 1.0)


def test_load_case():
    load = LoadCase([1, 2, 3], [4, 5, 6], "x")
    np.testing.assert_array_equal(load.wrench, [1, 2, 3, 4, 5, 6])
    with pytest.raises(ValidationError):
        LoadCase([0, 0, 0], [0, 0, 0])
    with pytest.raises(ValidationError):
        LoadCase([0, 0], [1, 0, 0])


def test_identify_canonical_unit_loads(rng):
    k = random_spd(rng)
    got = identify(experiments_for(k, canonical_loads([1.0] * 6))).k
    np.testing.assert_allclose(got, k, rtol=1e-12)


def test_identify_canonical_reduces_to_column_division(rng):
    k = random_spd(rng)
    amps = [1000.0, 1.0, 1.0, 1000.0, 1000.0, 1000.0]
    exps = experiments_for(k, canonical_loads(amps))
    got = identify(exps).k
    manual = np.column_stack([e.deflection.as_vector() / a for e, a in zip(exps, amps)])
    np.testing.assert_allclose(got, manual, rtol=1e-15)


def test_identify_general_loads(rng):
    k = random_spd(rng)
    loads = [LoadCase(rng.normal(size=3) * 100, rng.normal(size=3) * 1e4) for _ in range(9)]
    np.testing.assert_allclose(identify(experiments_for(k, loads)).k, k, rtol=1e-9, atol=1e-12 * np.abs(k).max())


def test_identify_duplicated_loads_equal(rng):
    k = random_spd(rng)
    amps = [1000.0, 1.0, 1.0, 1000.0, 1000.0, 1000.0]
    six = canonical_loads(amps)
    twelve = six + canonical_loads([-a for a in amps])
    a = identify(experiments_for(k, six)).k
    b = identify(experiments_for(k, twelve)).k
    np.testing.assert_allclose(b, a, rtol=1e-15, atol=0)


def test_identify_errors(rng):
    k = random_spd(rng)
    loads = canonical_loads([1.0] * 6)
    with pytest.raises(InsufficientDataError):
        identify(experiments_for(k, loads[:5]))
    dup = loads[:5] + [LoadCase.canonical(0, 2.0)]
    with pytest.raises(UnidentifiableError):
        identify(experiments_for(k, dup))
    assert isinstance(UnidentifiableError("x"), ArithmeticError)


def test_identify_propagates_std():
    k = np.diag([1.0, 1, 1, 1e-3, 1e-3, 1e-3])
    amps = [10.0, 10, 10, 1e3, 1e3, 1e3]
    cm = identify(experiments_for(k, canonical_loads(amps), unit_cov()))
    expected = np.empty((6, 6))
    expected[:3] = 1e-6 / np.array(amps)
    expected[3:] = 1e-8 / np.array(amps)
    np.testing.assert_allclose(cm.std, expected, rtol=1e-14)
    np.testing.assert_allclose(cm.ci(3.0), 3 * expected, rtol=1e-14)


def test_scale_ci_linear():
    k = np.eye(6)
    amps = [1.0] * 6
    base = scale_ci(experiments_for(k, canonical_loads(amps), unit_cov()), 1.0)
    amps2 = list(amps)
    amps2[2] = 2.0
    doubled = scale_ci(experiments_for(k, canonical_loads(amps2), unit_cov()), 1.0)
    np.testing.assert_allclose(doubled[:, 2], base[:, 2] / 2, rtol=1e-15)
    np.testing.assert_array_equal(np.delete(doubled, 2, axis=1), np.delete(base, 2, axis=1))
    np.testing.assert_allclose(scale_ci(experiments_for(k, canonical_loads(amps), unit_cov()), 2.0), 2 * base)
    assert not scale_ci(experiments_for(k, canonical_loads(amps), unit_cov()), 0.0).any()
    with pytest.raises(ValidationError):
        scale_ci(experiments_for(k, canonical_loads(amps)), 1.0)


def test_prune():
    k = np.eye(6) + 1e-9 * np.ones((6, 6))
    std = np.full((6, 6), 1e-6)
    out = prune(ComplianceMatrix(k, std), SignificanceConfig(3))
    np.testing.assert_array_equal(out.k, np.where(np.eye(6, dtype=bool), k, 0.0))
    np.testing.assert_array_equal(out.significant, np.eye(6, dtype=bool))
    full = ComplianceMatrix(np.ones((6, 6)), np.full((6, 6), 0.01))
    np.testing.assert_array_equal(prune(full).k, full.k)
    assert prune(full).significant.all()
    with pytest.raises(ValidationError):
        prune(ComplianceMatrix(k))


def test_symmetrize():
    k = np.eye(6)
    k[0, 1] = 2.0
    s = symmetrize(ComplianceMatrix(k))
    assert s.k[0, 1] == s.k[1, 0] == 1.0
    np.testing.assert_array_equal(np.diag(s.k), np.diag(k))
    np.testing.assert_array_equal(symmetrize(s).k, s.k)
    sym = ComplianceMatrix(k + k.T)
    np.testing.assert_array_equal(symmetrize(sym).k, sym.k)


def test_symmetrize_significance_union():
    k = np.eye(6)
    k[2, 4] = -1.0
    pruned = ComplianceMatrix(k, np.full((6, 6), 0.01), k != 0)
    s = symmetrize(pruned)
    assert s.significant[2, 4] and s.significant[4, 2]
    assert s.k[4, 2] == -0.5


def test_to_stiffness_diagonal():
    c = np.array([1e-4, 2, 3, 1e-6, 2e-5, 5e-5])
    K, lam = to_stiffness(ComplianceMatrix(np.diag(c)))
    np.testing.assert_allclose(K, np.diag(1 / c), rtol=1e-15)
    assert lam == pytest.approx(1 / c.max())


def test_to_stiffness_beam():
    k = beam_compliance_analytic(BeamSpec()).k
    K, lam = to_stiffness(k)
    assert lam > 0
    np.testing.assert_allclose(K @ k, np.eye(6), atol=1e-10)


def test_to_stiffness_rejects():
    k = beam_compliance_analytic(BeamSpec()).k.copy()
    k[2, 4] = 0.0     # pruned on one side only
    assert not is_symmetric(k)
    with pytest.raises(NonPhysicalMatrixError):
        to_stiffness(k)
    with pytest.raises(NonPhysicalMatrixError):
        to_stiffness(np.diag([1, 1, 1, 1, 1, -1.0]))
    with pytest.raises(NonPhysicalMatrixError):
        to_stiffness(np.diag([1, 1, 1, 1, 1, 0.0]))
    assert issubclass(NonPhysicalMatrixError, ArithmeticError)


def test_to_stiffness_round_trip(rng):
    for _ in range(20):
        k = random_spd(rng)
        K, _ = to_stiffness(k)
        back, _ = to_stiffness(K)
        np.testing.assert_allclose(back, k, rtol=1e-10, atol=1e-10 * np.abs(k).max())


def test_recommend_loads_beam():
    loads = recommend_loads(beam_compliance_analytic(BeamSpec()))
    Fx = loads[0].F[0]
    assert 1e3 <= Fx <= 1e4
    assert len(loads) == 6 and all(np.count_nonzero(l.wrench) == 1 for l in loads)


def test_recommend_loads_simple():
    k = np.diag([2.0, 1, 1, 1e-3, 1e-3, 1e-3])
    loads = recommend_loads(k)
    assert loads[0].F[0] == 0.2
    # sqrt(0.01 * 0.2) deg over 1e-3 rad/N*mm, to 1 s.f.
    assert loads[3].M[0] == float(f"{np.radians(np.sqrt(0.01 * 0.2)) / 1e-3:.1g}")


def test_recommend_loads_errors():
    k = np.eye(6)
    k[0, 0] = np.inf
    with pytest.raises(RecommendationError):
        recommend_loads(k)
    with pytest.raises(RecommendationError):
        recommend_loads(-np.eye(6))
    coupled = np.eye(6)
    coupled[3, 0] = 1.0   # 1 rad per N: any useful F_x over-rotates
    with pytest.raises(RecommendationError, match="k41"):
        recommend_loads(coupled)
