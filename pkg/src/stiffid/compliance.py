"""Compliance matrix identification from load experiments.

Each experiment contributes one wrench ``w = (F, M)`` and the deflection
``d = (t, phi)`` it produced. Stacking them column-wise as ``W`` (6 x m) and
``Dd`` (6 x m), the compliance follows from ``Dd = k W`` as ``k = Dd W^+``.
With the canonical one-component loads this is simply each deflection
column divided by its load amplitude.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import (InsufficientDataError, NonPhysicalMatrixError, RecommendationError,
                     UnidentifiableError, ValidationError)
from .geometry import RigidDeflection, _vec3
from .stats import DeflectionCovariance, SignificanceConfig

NM_TO_NMM = 1000.0
LABELS = ("Fx", "Fy", "Fz", "Mx", "My", "Mz")


@dataclass(frozen=True)
class LoadCase:
    """Force F (N) and moment M (N*mm) applied at the reference point."""

    F: np.ndarray
    M: np.ndarray
    label: str = ""

    def __post_init__(self):
        F = _vec3(self.F, "F")
        M = _vec3(self.M, "M")
        if not (np.any(F) or np.any(M)):
            raise ValidationError(f"load case {self.label!r} has zero force and moment")
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "M", M)

    @property
    def wrench(self):
        return np.concatenate([self.F, self.M])

    @classmethod
    def canonical(cls, axis, amplitude, label=None):
        """Load exciting a single wrench component (0..2 force, 3..5 moment in N*mm)."""
        w = np.zeros(6)
        w[axis] = amplitude
        return cls(w[:3], w[3:], label or LABELS[axis])


def canonical_loads(amplitudes):
    return [LoadCase.canonical(i, a) for i, a in enumerate(amplitudes)]


# force/moment amplitudes used for the cantilever benchmark: 1000 N, 1 N, 1 N, 1 N*m x3
BENCHMARK_AMPLITUDES = (1000.0, 1.0, 1.0, 1.0 * NM_TO_NMM, 1.0 * NM_TO_NMM, 1.0 * NM_TO_NMM)


@dataclass(frozen=True)
class Experiment:
    load: LoadCase
    deflection: RigidDeflection
    covariance: Optional[DeflectionCovariance] = None


@dataclass(frozen=True)
class ComplianceMatrix:
    """6x6 compliance with per-element standard deviations and significance flags.

    ``std`` is the standard deviation of each element; confidence half-widths
    are ``k * std`` for a significance multiplier ``k``.
    """

    k: np.ndarray
    std: Optional[np.ndarray] = None
    significant: Optional[np.ndarray] = None

    def __post_init__(self):
        k = np.array(self.k, dtype=float)
        if k.shape != (6, 6) or not np.all(np.isfinite(k)):
            raise ValidationError("compliance must be a finite 6x6 matrix")
        object.__setattr__(self, "k", k)
        if self.std is not None:
            object.__setattr__(self, "std", np.array(self.std, dtype=float))
        if self.significant is None:
            object.__setattr__(self, "significant", k != 0)

    def ci(self, k_multiplier=3.0):
        if self.std is None:
            raise ValidationError("compliance matrix carries no uncertainty information")
        return k_multiplier * self.std

    def margins(self):
        """|k_ij| / std_ij; inf where std is zero."""
        with np.errstate(divide="ignore", invalid="ignore"):
            m = np.abs(self.k) / self.std
        m[(self.std == 0) & (self.k == 0)] = 0.0
        return m


def _wrench_matrix(experiments):
    m = len(experiments)
    if m < 6:
        raise InsufficientDataError(f"identification needs at least 6 experiments, got {m}")
    W = np.column_stack([e.load.wrench for e in experiments])
    # relative rank test: columns may mix N and N*mm
    scaled = W / np.max(np.abs(W), axis=1, keepdims=True).clip(min=np.finfo(float).tiny)
    if np.linalg.matrix_rank(scaled) < 6:
        raise UnidentifiableError("the applied wrenches do not span all 6 directions (rank < 6)")
    return W


def _pinv(W):
    # exact for canonical (diagonal) sets; least squares otherwise
    if W.shape == (6, 6):
        return np.linalg.inv(W)
    return np.linalg.pinv(W)


def identify(experiments):
    """Least-squares compliance ``k = Dd W^+`` from m >= 6 experiments.

    Element standard deviations are filled in when every experiment carries
    a deflection covariance.
    """
    W = _wrench_matrix(experiments)
    Dd = np.column_stack([e.deflection.as_vector() for e in experiments])
    Wp = _pinv(W)
    k = Dd @ Wp
    std = None
    if all(e.covariance is not None for e in experiments):
        std = _element_std(experiments, Wp)
    return ComplianceMatrix(k, std)


def _element_std(experiments, Wp):
    # var(k_ij) = sum_e var(d_ie) * Wp_ej^2, experiments independent
    var_d = np.column_stack([e.covariance.std ** 2 for e in experiments])  # 6 x m
    return np.sqrt(var_d @ (Wp ** 2))


def scale_ci(experiments, sigma, config=SignificanceConfig()):
    """Confidence half-widths ``k * std`` of every compliance element.

    The deflection covariances are recomputed at noise level ``sigma`` (they
    scale with sigma^2) and propagated through the rows of ``W^+``.
    """
    W = _wrench_matrix(experiments)
    Wp = _pinv(W)
    rescaled = []
    for e in experiments:
        if e.covariance is None:
            raise ValidationError(f"experiment {e.load.label!r} has no covariance")
        rescaled.append(replace(e, covariance=e.covariance.at_sigma(sigma)))
    return config.k * _element_std(rescaled, Wp)


def prune(matrix, config=SignificanceConfig()):
    """Zero every element whose ``k * std`` interval contains zero."""
    if matrix.std is None:
        raise ValidationError("cannot prune without element standard deviations")
    keep = np.abs(matrix.k) > config.k * matrix.std
    return ComplianceMatrix(np.where(keep, matrix.k, 0.0), matrix.std, keep)


def symmetrize(matrix):
    """(k + k^T) / 2, propagating std and significance."""
    k = np.asarray(getattr(matrix, "k", matrix), dtype=float)
    ks = (k + k.T) / 2.0
    if not isinstance(matrix, ComplianceMatrix):
        return ComplianceMatrix(ks)
    std = None
    if matrix.std is not None:
        std = np.sqrt(matrix.std ** 2 + matrix.std.T ** 2) / 2.0
    sig = matrix.significant | matrix.significant.T
    return ComplianceMatrix(ks, std, sig & (ks != 0))


def _unit_scale(k):
    d = np.sqrt(np.abs(np.diag(k)))
    return np.outer(d, d)


def is_symmetric(k, rtol=1e-12):
    k = np.asarray(getattr(k, "k", k), dtype=float)
    return bool(np.all(np.abs(k - k.T) <= rtol * _unit_scale(k)))


def to_stiffness(matrix):
    """Invert a symmetric compliance to the stiffness K.

    Returns ``(K, smallest_eigenvalue)``. Raises :class:`NonPhysicalMatrixError`
    for asymmetric, singular or indefinite input.
    """
    k = np.asarray(getattr(matrix, "k", matrix), dtype=float)
    if not is_symmetric(k):
        raise NonPhysicalMatrixError("compliance matrix is not symmetric; symmetrize it first")
    # eigenvalues of mixed-unit blocks are only meaningful after diagonal scaling
    d = np.sqrt(np.abs(np.diag(k)))
    if np.any(d == 0):
        raise NonPhysicalMatrixError("compliance matrix has a zero diagonal entry")
    scaled = k / np.outer(d, d)
    eig = np.linalg.eigvalsh((scaled + scaled.T) / 2.0)
    if eig[0] <= 1e-12 * eig[-1]:
        raise NonPhysicalMatrixError(f"compliance matrix is not positive definite (min scaled eigenvalue {eig[0]:.3g})")
    K = np.linalg.inv(k)
    K = (K + K.T) / 2.0
    return K, float(np.linalg.eigvalsh(K)[0])


def recommend_loads(approx_k, t_range=(0.1, 1.0), phi_range_deg=(0.01, 0.2)):
    """Canonical load amplitudes that keep the direct deflections in range.

    For each wrench direction the amplitude puts the diagonal deflection at
    the geometric midpoint of its target range (translations against
    ``t_range`` in mm, rotations against ``phi_range_deg``), subject to no
    coupled deflection in the same column exceeding its range. Amplitudes are
    rounded to one significant figure; moments are in N*mm.
    """
    k = np.asarray(getattr(approx_k, "k", approx_k), dtype=float)
    if k.shape != (6, 6):
        raise ValidationError("approximate compliance must be 6x6")
    if not np.all(np.isfinite(k)):
        raise RecommendationError("approximate compliance has non-finite entries")
    t_lo, t_hi = t_range
    p_lo, p_hi = np.radians(phi_range_deg)
    if not (0 < t_lo <= t_hi and 0 < p_lo <= p_hi):
        raise RecommendationError(f"invalid target ranges t={t_range}, phi={phi_range_deg}")
    ranges = [(t_lo, t_hi)] * 3 + [(p_lo, p_hi)] * 3
    loads = []
    for j in range(6):
        kjj = k[j, j]
        if not kjj > 0:
            raise RecommendationError(f"diagonal compliance k{j + 1}{j + 1} must be positive, got {kjj}")
        lo, hi = ranges[j][0] / kjj, ranges[j][1] / kjj
        target = np.sqrt(lo * hi)
        conflicts = []
        for i in range(6):
            if i == j or k[i, j] == 0:
                continue
            cap = ranges[i][1] / abs(k[i, j])
            if cap < hi:
                hi = cap
                conflicts.append(f"k{i + 1}{j + 1}")
        if hi < lo:
            raise RecommendationError(
                f"no {LABELS[j]} amplitude keeps k{j + 1}{j + 1} in range without pushing "
                f"{', '.join(conflicts)} out of range")
        if target > hi:
            target = np.sqrt(lo * hi)
        loads.append(LoadCase.canonical(j, float(f"{target:.1g}")))
    return loads
