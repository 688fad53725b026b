import numpy as np
import pytest

from stiffid.beam import (BeamSpec, beam_benchmark, beam_compliance_analytic, beam_compliance_discretized,
                          benchmark_loads, frame_element_stiffness, printed_rotational_compliance,
                          torsion_constant)
from stiffid.compliance import LoadCase, canonical_loads
from stiffid.errors import UnidentifiableError, ValidationError
from stiffid.fieldgen import NoiseSpec


def unit_scaled_error(a, b):
    """max |a - b| relative to sqrt(|b_ii b_jj|), which makes mixed-unit entries comparable."""
    d = np.sqrt(np.abs(np.diag(b)))
    return np.max(np.abs(a - b) / np.outer(d, d))


def random_beam(rng):
    return BeamSpec(L=rng.uniform(100, 2000), b=rng.uniform(2, 30), h=rng.uniform(2, 30),
                    E=rng.uniform(5e4, 3e5), nu=rng.uniform(0.2, 0.45))


def test_reference_values():
    k = beam_compliance_analytic(BeamSpec()).k
    assert k[0, 0] == pytest.approx(5.0e-5, rel=1e-15)
    assert k[1, 1] == pytest.approx(2.0, rel=1e-15)
    assert k[2, 2] == pytest.approx(2.0, rel=1e-15)
    assert k[4, 4] == pytest.approx(1000 / (2e5 * 10 ** 4 / 12), rel=1e-15)
    assert k[2, 4] < 0 < k[1, 5]
    assert k[2, 4] == k[4, 2] == pytest.approx(-1000 ** 2 / (2 * 2e5 * 10 ** 4 / 12))
    assert np.count_nonzero(k == 0) == 26
    assert np.array_equal(k, k.T)
    printed = printed_rotational_compliance(BeamSpec())
    assert printed["k55"] == pytest.approx(k[4, 4] / 3)


def test_torsion_constant():
    assert torsion_constant(10, 10) == pytest.approx(0.1406 * 1e4, rel=1e-3)
    # thin strip tends to a c^3 / 3 (1 - 0.63 c / a)
    assert torsion_constant(100, 1) == pytest.approx(100 / 3 * (1 - 0.630 / 100), rel=1e-3)
    assert torsion_constant(3, 7) == torsion_constant(7, 3)
    assert BeamSpec(J=123.0).torsion == 123.0


def test_beam_spec_validation():
    with pytest.raises(ValidationError):
        BeamSpec(L=-1)
    with pytest.raises(ValidationError):
        BeamSpec(nu=0.5)
    with pytest.raises(ValidationError):
        beam_compliance_discretized(BeamSpec(), 0)


def test_frame_element_symmetric_and_rigid_modes():
    ke = frame_element_stiffness(2e5, 8e4, 100, 833, 833, 1406, 50.0)
    np.testing.assert_array_equal(ke, ke.T)
    # rigid translation and a rigid rotation about z produce no forces
    u = np.zeros(12)
    u[[1, 7]] = 1.0
    assert np.allclose(ke @ u, 0)
    theta, le = 1e-3, 50.0
    u = np.zeros(12)
    u[[5, 11]] = theta
    u[7] = theta * le
    assert np.allclose(ke @ u, 0, atol=1e-9)
    u = np.zeros(12)
    u[[4, 10]] = theta
    u[8] = -theta * le
    assert np.allclose(ke @ u, 0, atol=1e-9)


@pytest.mark.parametrize("n_elem", [1, 7, 50])
def test_discretized_matches_analytic(n_elem):
    spec = BeamSpec()
    a = beam_compliance_analytic(spec).k
    d = beam_compliance_discretized(spec, n_elem).k
    assert unit_scaled_error(d, a) <= 1e-9


def test_random_beams_agree(rng):
    for _ in range(10):
        spec = random_beam(rng)
        a = beam_compliance_analytic(spec).k
        d = beam_compliance_discretized(spec, 4).k
        assert unit_scaled_error(d, a) <= 1e-9
        nz = a != 0
        np.testing.assert_allclose(d[nz], a[nz], rtol=1e-9)
        assert np.all(np.abs(d[~nz]) <= 1e-12 * np.abs(a).max())


def test_scaling_laws():
    base = beam_compliance_analytic(BeamSpec()).k
    longer = beam_compliance_analytic(BeamSpec(L=2000)).k
    assert longer[1, 1] / base[1, 1] == pytest.approx(8)
    assert longer[1, 5] / base[1, 5] == pytest.approx(4)
    assert longer[5, 5] / base[5, 5] == pytest.approx(2)
    stiffer = beam_compliance_analytic(BeamSpec(E=4e5)).k
    np.testing.assert_allclose(stiffer, base / 2, rtol=1e-14)
    tall = beam_compliance_analytic(BeamSpec(h=20)).k
    assert base[1, 1] / tall[1, 1] == pytest.approx(8)
    assert base[2, 2] / tall[2, 2] == pytest.approx(2)


def test_analytic_spd(rng):
    for _ in range(10):
        k = beam_compliance_analytic(random_beam(rng)).k
        d = np.sqrt(np.diag(k))
        assert np.linalg.eigvalsh(k / np.outer(d, d))[0] > 0


def test_noiseless_benchmark_round_trip():
    rep = beam_benchmark(noise=NoiseSpec(0.0, 0), outlier_percent=0.0, mode="linearized")
    nz = rep.analytic != 0
    np.testing.assert_allclose(rep.raw.k[nz], rep.analytic[nz], rtol=1e-9)
    assert unit_scaled_error(rep.raw.k, rep.analytic) <= 1e-9


def test_noisy_benchmark_coupling_terms():
    rep = beam_benchmark()
    k = rep.final.k
    assert k[2, 4] == k[4, 2]
    assert k[2, 4] == pytest.approx(rep.analytic[2, 4], rel=0.01)
    assert rep.zeros_detected == 26
    assert rep.nonzero_kept == 10


def test_benchmark_bad_loads():
    loads = canonical_loads([1.0] * 5) + [LoadCase.canonical(0, 3.0)]
    with pytest.raises(UnidentifiableError):
        beam_benchmark(loads=loads, noise=NoiseSpec(0.0, 0), outlier_percent=0.0)


def test_benchmark_loads_units():
    loads = benchmark_loads()
    np.testing.assert_array_equal([l.wrench[i] for i, l in enumerate(loads)],
                                  [1000, 1, 1, 1000, 1000, 1000])
