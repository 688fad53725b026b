"""Noise level, deflection covariance, significance and residual filtering."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InsufficientDataError, ValidationError
from .estimators import _check_conditioning, _rotation_normal_matrix

# minimum nodes left after filtering
MIN_FILTERED_NODES = 6


@dataclass(frozen=True)
class DeflectionCovariance:
    """Covariances of t (mm^2) and phi (rad^2) at noise level ``sigma`` (mm)."""

    cov_t: np.ndarray
    cov_phi: np.ndarray
    sigma: Optional[float] = None

    def at_sigma(self, sigma):
        """Same geometry, different noise level (covariances scale with sigma^2)."""
        if not self.sigma:
            raise ValidationError("covariance was computed without a positive sigma; cannot rescale")
        f = (float(sigma) / self.sigma) ** 2
        return DeflectionCovariance(self.cov_t * f, self.cov_phi * f, float(sigma))

    @property
    def std(self):
        """Standard deviations of (t_x, t_y, t_z, phi_x, phi_y, phi_z)."""
        return np.sqrt(np.concatenate([np.diag(self.cov_t), np.diag(self.cov_phi)]))


@dataclass(frozen=True)
class SignificanceConfig:
    k: float = 3.0

    def __post_init__(self):
        if not self.k > 0:
            raise ValidationError(f"significance multiplier must be positive, got {self.k}")


def estimate_sigma(residual_sets):
    """Pooled residual estimate of the per-component noise std.

    ``sigma^2 = sum of all squared residuals / sum_e (3 n_e - 6)`` where the
    sum runs over experiments e with ``n_e`` nodes each.
    """
    if isinstance(residual_sets, np.ndarray) and residual_sets.ndim == 2:
        residual_sets = [residual_sets]
    if len(residual_sets) == 0:
        raise InsufficientDataError("need residuals from at least one experiment")
    ss = 0.0
    dof = 0
    for r in residual_sets:
        r = np.asarray(r, dtype=float).reshape(-1, 3)
        if len(r) <= 2:
            raise InsufficientDataError(
                f"noise variance undefined with {len(r)} nodes (need 3n - 6 > 0)")
        ss += float(np.sum(r ** 2))
        dof += 3 * len(r) - 6
    return float(np.sqrt(ss / dof))


def deflection_covariance(field, sigma):
    """cov[t] = sigma^2/n I and cov[phi] = sigma^2 (sum P^T P)^-1 over centred nodes."""
    p = field.positions
    D = _rotation_normal_matrix(p - p.mean(axis=0))
    _check_conditioning(D)
    s2 = float(sigma) ** 2
    return DeflectionCovariance(s2 / field.n * np.eye(3), s2 * np.linalg.inv(D), float(sigma))


def outlier_ranking(residuals):
    """Node order by decreasing largest absolute residual component (stable)."""
    score = np.max(np.abs(np.asarray(residuals)), axis=1)
    return np.argsort(-score, kind="stable")


def outlier_indices(fit, percent=0.10):
    """Indices of the ``ceil(percent * n)`` nodes with the largest residuals."""
    if not 0 <= percent < 0.5:
        raise ValidationError(f"outlier percent must be in [0, 0.5), got {percent}")
    residuals = getattr(fit, "residuals", fit)
    n = len(residuals)
    count = int(np.ceil(percent * n - 1e-9))
    if n - count < MIN_FILTERED_NODES:
        raise InsufficientDataError(
            f"removing {count} of {n} nodes would leave fewer than {MIN_FILTERED_NODES}")
    return np.sort(outlier_ranking(residuals)[:count])


def filter_outliers(field, fit, percent=0.10):
    """Drop the nodes whose worst residual component ranks in the top ``percent``.

    A node goes if any one of its three residuals is extreme. Re-estimation on
    the returned field is up to the caller.
    """
    if len(fit.residuals) != field.n:
        raise ValidationError("fit residuals do not belong to this field")
    drop = outlier_indices(fit, percent)
    if len(drop) == 0:
        return field
    keep = np.ones(field.n, dtype=bool)
    keep[drop] = False
    return field.subset(keep)


def significance_test(value, std, config=SignificanceConfig()):
    """True when ``|value|`` lies outside the ``k * std`` interval around zero."""
    if std < 0:
        raise ValidationError(f"std must be non-negative, got {std}")
    return bool(abs(value) > config.k * std)
