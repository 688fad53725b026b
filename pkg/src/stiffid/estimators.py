"""Rigid-deflection estimators for displacement fields.

Two routes are provided:

* :func:`estimate_svd` solves the orthogonal Procrustes problem for the full
  rotation matrix and then reads the small angles off its entries.
* :func:`estimate_lin` linearizes the rotation up front, which turns the fit
  into an ordinary least-squares problem that decouples into a translation
  and a 3x3 rotation solve once the origin is moved to the node centroid.

:func:`estimate_lin_full` keeps the undecoupled 6x6 normal system as an
independent cross-check of the decoupled solution.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateFieldError, InsufficientDataError, ValidationError
from .geometry import RigidDeflection, skew_neg

MAX_CONDITION = 1e12


class SvdVariant(enum.Enum):
    """How the rotation vector is read off the Procrustes rotation matrix."""

    PLUS = "svd+"
    MINUS = "svd-"
    AVG = "svd±"


@dataclass(frozen=True)
class EstimatorOutput:
    deflection: RigidDeflection
    residuals: np.ndarray
    rotation_matrix: Optional[np.ndarray] = None

    @property
    def residual_sum_sq(self):
        return float(np.sum(self.residuals ** 2))

    @property
    def t(self):
        return self.deflection.t

    @property
    def phi(self):
        return self.deflection.phi


def _check_size(field):
    if field.n < 3:
        raise InsufficientDataError(f"need at least 3 nodes, got {field.n}")


def _rotation_normal_matrix(centered):
    """sum_i P_i^T P_i for centred positions, using P^T P = |p|^2 I - p p^T."""
    return np.eye(3) * np.sum(centered ** 2) - centered.T @ centered


def _check_conditioning(D):
    cond = np.linalg.cond(D)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise DegenerateFieldError(
            f"rotation is not identifiable: node set is (nearly) collinear (condition number {cond:.3g})")


def d_matrix(field):
    """sum_i P_i^T P_i over node positions taken relative to their centroid.

    Diagonal for fields symmetric about their centre, where it reduces to
    ``diag[sum(y^2+z^2), sum(x^2+z^2), sum(x^2+y^2)]``.
    """
    p = np.asarray(getattr(field, "positions", field), dtype=float)
    return _rotation_normal_matrix(p - p.mean(axis=0))


def d_cubic_closed_form(a, n):
    """Diagonal entry of the D matrix for a uniform a x a x a grid of n nodes.

    Returns ``(d, d_printed)``: ``d = a^2 n (m+1) / (6 (m-1))`` with ``m = n^(1/3)``
    matches direct summation; ``d_printed`` is the variant with the ratio
    inverted, ``a^2 n (m-1) / (6 (m+1))``, kept for comparison only.
    """
    m = _integer_root(n, 3)
    if m < 2:
        raise ValidationError(f"need at least 2 points per axis, got n={n}")
    d = a * a * n * (m + 1) / (6.0 * (m - 1))
    d_printed = a * a * n * (m - 1) / (6.0 * (m + 1))
    return d, d_printed


def d_planar_closed_form(a, n):
    """d for an a x a planar grid of n nodes; D = diag[d, d/2, d/2] in the plane's normal frame."""
    m = _integer_root(n, 2)
    if m < 2:
        raise ValidationError(f"need at least 2 points per axis, got n={n}")
    return a * a * n * (m + 1) / (6.0 * (m - 1))


def _integer_root(n, k):
    m = int(round(n ** (1.0 / k)))
    if m ** k != n:
        raise ValidationError(f"n={n} is not a perfect {'cube' if k == 3 else 'square'}")
    return m


def estimate_lin(field):
    """Linearized least-squares fit of ``dp = t + phi x p``.

    Solved in the centroid frame, where translation and rotation decouple,
    and the translation is then reported at the field's reference point.
    """
    _check_size(field)
    p, dp = field.positions, field.displacements
    pc = p.mean(axis=0)
    ph = p - pc
    D = _rotation_normal_matrix(ph)
    _check_conditioning(D)
    t_c = dp.mean(axis=0)
    # P_i^T dp_i = p_i x dp_i for the skew convention of skew_neg
    phi = np.linalg.solve(D, np.cross(ph, dp).sum(axis=0))
    t = t_c - np.cross(phi, pc)
    residuals = dp - t - np.cross(phi, p)
    return EstimatorOutput(RigidDeflection(t, phi), residuals)


def estimate_lin_full(field):
    """Same fit as :func:`estimate_lin` via the full 6x6 normal equations at the field origin."""
    _check_size(field)
    p, dp = field.positions, field.displacements
    n = field.n
    Ps = [skew_neg(pi) for pi in p]
    sum_P = np.sum(Ps, axis=0)
    A = np.zeros((6, 6))
    A[:3, :3] = n * np.eye(3)
    A[:3, 3:] = sum_P
    A[3:, :3] = sum_P.T
    A[3:, 3:] = sum(P.T @ P for P in Ps)
    rhs = np.concatenate([dp.sum(axis=0), sum(P.T @ d for P, d in zip(Ps, dp))])
    _check_conditioning(A[3:, 3:] - sum_P.T @ sum_P / n)
    x = np.linalg.solve(A, rhs)
    t, phi = x[:3], x[3:]
    residuals = dp - t - np.array([P @ phi for P in Ps])
    return EstimatorOutput(RigidDeflection(t, phi), residuals)


def angles_from_rotation(R, variant=SvdVariant.AVG):
    """Small rotation angles from the entries of a rotation matrix."""
    R = np.asarray(R, dtype=float)
    plus = np.array([R[2, 1], R[0, 2], R[1, 0]])
    minus = -np.array([R[1, 2], R[2, 0], R[0, 1]])
    variant = SvdVariant(variant)
    if variant is SvdVariant.PLUS:
        return plus
    if variant is SvdVariant.MINUS:
        return minus
    return (plus + minus) / 2.0


def estimate_svd(field, variant=SvdVariant.AVG):
    """Procrustes fit of ``p + dp = R p + t`` followed by angle extraction.

    The rotation is the proper-rotation solution ``V diag(1, 1, det(V U^T)) U^T``
    of the SVD ``sum p_i g_i^T = U S V^T`` on centred point sets.
    """
    _check_size(field)
    p, dp = field.positions, field.displacements
    g = p + dp
    ph = p - p.mean(axis=0)
    gh = g - g.mean(axis=0)
    _check_conditioning(_rotation_normal_matrix(ph))
    U, _, Vt = np.linalg.svd(ph.T @ gh)
    V = Vt.T
    s = np.sign(np.linalg.det(V @ U.T))
    R = V @ np.diag([1.0, 1.0, s]) @ U.T
    n = field.n
    t = (dp.sum(axis=0) - (R - np.eye(3)) @ p.sum(axis=0)) / n
    residuals = g - p @ R.T - t
    phi = angles_from_rotation(R, variant)
    return EstimatorOutput(RigidDeflection(t, phi), residuals, R)


ESTIMATORS = {
    "lin": estimate_lin,
    "lin-full": estimate_lin_full,
    "svd+": lambda f: estimate_svd(f, SvdVariant.PLUS),
    "svd-": lambda f: estimate_svd(f, SvdVariant.MINUS),
    "svd±": lambda f: estimate_svd(f, SvdVariant.AVG),
}
_ALIASES = {"svd+-": "svd±", "svdpm": "svd±", "svd": "svd±"}


def get_estimator(name):
    name = _ALIASES.get(name, name)
    try:
        return ESTIMATORS[name]
    except KeyError:
        raise ValidationError(f"unknown estimator {name!r}; expected one of {sorted(ESTIMATORS)}") from None


def canonical_estimator_name(name):
    get_estimator(name)
    return _ALIASES.get(name, name)
