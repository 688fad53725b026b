"""Cantilever beam reference compliance and the end-to-end benchmark.

The beam runs along x from the clamped root to the free tip, where the
reference point sits. Cross-section: width ``b`` along z, height ``h`` along y,
so ``I_z = b h^3 / 12`` governs bending in the x-y plane and
``I_y = h b^3 / 12`` bending in the x-z plane.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .compliance import (BENCHMARK_AMPLITUDES, ComplianceMatrix, Experiment, canonical_loads, identify,
                         prune, symmetrize)
from .errors import NumericalError, ValidationError
from .estimators import get_estimator
from .fieldgen import GridSpec, NoiseSpec, simulate_experiment
from .stats import SignificanceConfig, deflection_covariance, estimate_sigma, filter_outliers


def torsion_constant(b, h, terms=101):
    """Saint-Venant torsion constant of a solid b x h rectangle (series solution).

    For a square of side s this is 0.1406 s^4.
    """
    a, c = max(b, h), min(b, h)
    n = np.arange(1, 2 * terms, 2, dtype=float)
    s = np.sum(np.tanh(n * np.pi * a / (2 * c)) / n ** 5)
    return a * c ** 3 * (1.0 / 3.0 - 64.0 / np.pi ** 5 * (c / a) * s)


@dataclass(frozen=True)
class BeamSpec:
    L: float = 1000.0
    b: float = 10.0
    h: float = 10.0
    E: float = 2.0e5
    nu: float = 0.266
    J: Optional[float] = None

    def __post_init__(self):
        if not all(v > 0 for v in (self.L, self.b, self.h, self.E)):
            raise ValidationError("beam dimensions and Young's modulus must be positive")
        if not 0 < self.nu < 0.5:
            raise ValidationError(f"Poisson's ratio must be in (0, 0.5), got {self.nu}")
        if self.J is not None and not self.J > 0:
            raise ValidationError("torsion constant must be positive")

    @property
    def A(self):
        return self.b * self.h

    @property
    def Iy(self):
        return self.h * self.b ** 3 / 12.0

    @property
    def Iz(self):
        return self.b * self.h ** 3 / 12.0

    @property
    def G(self):
        return self.E / (2.0 * (1.0 + self.nu))

    @property
    def torsion(self):
        return self.J if self.J is not None else torsion_constant(self.b, self.h)


def beam_compliance_analytic(spec):
    """Tip compliance of a clamped Euler-Bernoulli beam.

    Bending terms are written with ``b h^3`` (and ``h b^3``) directly instead
    of going through ``I = b h^3 / 12``, which keeps round numbers exact.
    """
    L, E, b, h = spec.L, spec.E, spec.b, spec.h
    bh3, hb3 = E * b * h ** 3, E * h * b ** 3     # 12 E I_z, 12 E I_y
    k = np.zeros((6, 6))
    k[0, 0] = L / (E * spec.A)
    k[1, 1] = 4 * L ** 3 / bh3
    k[2, 2] = 4 * L ** 3 / hb3
    k[3, 3] = L / (spec.G * spec.torsion)
    k[4, 4] = 12 * L / hb3
    k[5, 5] = 12 * L / bh3
    k[2, 4] = k[4, 2] = -6 * L ** 2 / hb3
    k[1, 5] = k[5, 1] = 6 * L ** 2 / bh3
    return ComplianceMatrix(k)


def printed_rotational_compliance(spec):
    """The L/(3EI) values sometimes quoted for k55 and k66, reported for comparison."""
    return {"k55": spec.L / (3 * spec.E * spec.Iy), "k66": spec.L / (3 * spec.E * spec.Iz)}


def frame_element_stiffness(E, G, A, Iy, Iz, J, le):
    """12x12 local stiffness of a 3D Euler-Bernoulli frame element.

    DOF order per node: u, v, w, rx, ry, rz.
    """
    K = np.zeros((12, 12))
    ea = E * A / le
    gj = G * J / le
    K[np.ix_([0, 6], [0, 6])] = ea * np.array([[1, -1], [-1, 1]])
    K[np.ix_([3, 9], [3, 9])] = gj * np.array([[1, -1], [-1, 1]])
    # x-y plane: v, rz
    c = E * Iz / le ** 3
    K[np.ix_([1, 5, 7, 11], [1, 5, 7, 11])] = c * np.array([
        [12, 6 * le, -12, 6 * le],
        [6 * le, 4 * le ** 2, -6 * le, 2 * le ** 2],
        [-12, -6 * le, 12, -6 * le],
        [6 * le, 2 * le ** 2, -6 * le, 4 * le ** 2]])
    # x-z plane: w, ry (ry = -dw/dx)
    c = E * Iy / le ** 3
    K[np.ix_([2, 4, 8, 10], [2, 4, 8, 10])] = c * np.array([
        [12, -6 * le, -12, -6 * le],
        [-6 * le, 4 * le ** 2, 6 * le, 2 * le ** 2],
        [-12, 6 * le, 12, 6 * le],
        [-6 * le, 2 * le ** 2, 6 * le, 4 * le ** 2]])
    return K


def beam_compliance_discretized(spec, n_elem=10):
    """Tip compliance from a chain of ``n_elem`` frame elements clamped at node 0."""
    if n_elem < 1:
        raise ValidationError("need at least one element")
    le = spec.L / n_elem
    ke = frame_element_stiffness(spec.E, spec.G, spec.A, spec.Iy, spec.Iz, spec.torsion, le)
    ndof = 6 * (n_elem + 1)
    K = np.zeros((ndof, ndof))
    for e in range(n_elem):
        s = slice(6 * e, 6 * e + 12)
        K[s, s] += ke
    Kff = K[6:, 6:]
    F = np.zeros((ndof - 6, 6))
    F[-6:, :] = np.eye(6)
    try:
        U = np.linalg.solve(Kff, F)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"beam assembly is singular: {exc}") from exc
    k = U[-6:, :]
    return ComplianceMatrix(k)


def benchmark_loads():
    return canonical_loads(BENCHMARK_AMPLITUDES)


def default_benchmark_grid():
    # one-layer square patch at the tip, normal to the beam axis
    return GridSpec(kind="planar", a=10.0, h=1.0, normal_axis="x")


@dataclass
class BenchmarkReport:
    analytic: np.ndarray
    raw: ComplianceMatrix
    pruned: ComplianceMatrix
    final: ComplianceMatrix
    sigma_hat: float
    k_multiplier: float
    experiments: list = field(default_factory=list)
    removed_nodes: list = field(default_factory=list)
    printed_rotational: dict = field(default_factory=dict)

    @property
    def true_zero(self):
        return self.analytic == 0

    @property
    def zeros_detected(self):
        return int(np.sum(self.true_zero & ~self.final.significant))

    @property
    def false_nonzero(self):
        return int(np.sum(self.true_zero & self.final.significant))

    @property
    def nonzero_kept(self):
        return int(np.sum(~self.true_zero & self.final.significant))

    @property
    def false_zero(self):
        return int(np.sum(~self.true_zero & ~self.final.significant))

    def relative_errors(self, which="final"):
        k = getattr(self, which).k
        nz = ~self.true_zero
        err = np.zeros((6, 6))
        err[nz] = np.abs(k[nz] - self.analytic[nz]) / np.abs(self.analytic[nz])
        return err

    @property
    def max_relative_error(self):
        return float(self.relative_errors().max())

    @property
    def min_margin(self):
        """Smallest |k_ij| / CI_ij over the true non-zero elements of the raw estimate."""
        ci = self.raw.ci(self.k_multiplier)
        nz = ~self.true_zero
        with np.errstate(divide="ignore"):
            return float(np.min(np.abs(self.raw.k[nz]) / ci[nz]))


def run_pipeline(true_k, loads, grid, noise, estimator="lin", outlier_percent=0.10,
                 config=SignificanceConfig(), mode="exact"):
    """Simulate, estimate, filter, re-estimate and identify one experiment set.

    Experiment ``e`` uses noise seed ``noise.seed + e``.
    """
    est = get_estimator(estimator)
    fits, fields, removed = [], [], []
    for e, load in enumerate(loads):
        f = simulate_experiment(true_k, load, grid, NoiseSpec(noise.sigma, noise.seed + e), mode)
        fit = est(f)
        n0 = f.n
        if outlier_percent > 0:
            f = filter_outliers(f, fit, outlier_percent)
            fit = est(f)
        fits.append(fit)
        fields.append(f)
        removed.append(n0 - f.n)
    sigma_hat = estimate_sigma([fit.residuals for fit in fits])
    experiments = [
        Experiment(load, fit.deflection, deflection_covariance(f, 1.0).at_sigma(sigma_hat))
        for load, fit, f in zip(loads, fits, fields)]
    raw = identify(experiments)
    return experiments, raw, sigma_hat, removed


def beam_benchmark(spec=BeamSpec(), grid=None, noise=NoiseSpec(5.6e-5, 0), loads=None,
                   outlier_percent=0.10, config=SignificanceConfig(), estimator="lin", mode="exact"):
    """Identify the beam compliance from synthetic fields and compare with the analytic matrix."""
    grid = grid or default_benchmark_grid()
    loads = loads if loads is not None else benchmark_loads()
    truth = beam_compliance_analytic(spec)
    experiments, raw, sigma_hat, removed = run_pipeline(
        truth, loads, grid, noise, estimator, outlier_percent, config, mode)
    pruned = prune(raw, config)
    final = symmetrize(pruned)
    return BenchmarkReport(
        analytic=truth.k, raw=raw, pruned=pruned, final=final, sigma_hat=sigma_hat,
        k_multiplier=config.k, experiments=experiments, removed_nodes=removed,
        printed_rotational=printed_rotational_compliance(spec))
