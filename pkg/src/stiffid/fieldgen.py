"""Synthetic displacement fields standing in for FEA output."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .geometry import DisplacementField, _vec3, rotation_matrix

# FEA noise levels (mm) observed for different mesh types
NOISE_PRESETS = {
    "linear-2mm": 4.59e-5,
    "linear-1mm": 3.87e-5,
    "parabolic-3mm": 5.26e-5,
    "parabolic-2mm": 5.60e-5,
}

_AXES = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of extent ``a`` and step ``h`` centred on ``center``.

    ``kind`` is ``"cubic"`` (a x a x a) or ``"planar"`` (a x a square whose
    normal is ``normal_axis``).
    """

    kind: str = "cubic"
    a: float = 10.0
    h: float = 1.0
    normal_axis: str = "x"
    center: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.kind not in ("cubic", "planar"):
            raise ValidationError(f"grid kind must be 'cubic' or 'planar', got {self.kind!r}")
        if not (self.a > 0 and self.h > 0):
            raise ValidationError(f"grid extent and step must be positive (a={self.a}, h={self.h})")
        if self.normal_axis not in _AXES:
            raise ValidationError(f"normal_axis must be x, y or z, got {self.normal_axis!r}")
        ratio = self.a / self.h
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValidationError(f"a/h must be a positive integer, got {ratio:g}")
        _vec3(self.center, "center")

    @property
    def points_per_axis(self):
        return int(round(self.a / self.h)) + 1

    @property
    def n(self):
        k = self.points_per_axis
        return k ** 3 if self.kind == "cubic" else k ** 2


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValidationError(f"noise sigma must be >= 0, got {self.sigma}")

    @classmethod
    def preset(cls, name, seed=0):
        try:
            return cls(NOISE_PRESETS[name], seed)
        except KeyError:
            raise ValidationError(f"unknown noise preset {name!r}; choose from {sorted(NOISE_PRESETS)}") from None


def make_grid(spec):
    """Zero-displacement field on the grid, expressed relative to its centre."""
    k = spec.points_per_axis
    # integer offsets keep the coordinates exactly symmetric about the centre
    c = (np.arange(k) - (k - 1) / 2.0) * spec.h
    if spec.kind == "cubic":
        pts = np.stack(np.meshgrid(c, c, c, indexing="ij"), axis=-1).reshape(-1, 3)
    else:
        u, v = np.meshgrid(c, c, indexing="ij")
        pts = np.zeros((k * k, 3))
        free = [i for i in range(3) if i != _AXES[spec.normal_axis]]
        pts[:, free[0]] = u.ravel()
        pts[:, free[1]] = v.ravel()
    return DisplacementField._relative(pts, np.zeros_like(pts), _vec3(spec.center, "center"))


def apply_rigid(field, t, phi, mode="exact"):
    """Replace the displacements by those of the rigid motion ``(t, phi)``.

    ``mode`` picks the rotation model: ``exact`` (axis-angle), ``linearized``
    (first order) or ``elementary`` (Rx Ry Rz product).
    """
    t = _vec3(t, "t")
    R = rotation_matrix(phi, mode)
    p = field.positions
    dp = p @ (R - np.eye(3)).T + t
    return field.with_displacements(dp)


def add_noise(field, noise):
    """Add i.i.d. N(0, sigma^2) noise to every displacement component."""
    if noise.sigma == 0:
        return field
    rng = np.random.default_rng(noise.seed)
    eps = rng.normal(0.0, noise.sigma, size=field.displacements.shape)
    return field.with_displacements(field.displacements + eps)


def inject_outliers(field, fraction, magnitude, sigma, seed=0):
    """Perturb one component of ``floor(fraction * n)`` random nodes by +-magnitude*sigma.

    Returns the contaminated field and the sorted indices of the touched nodes.
    """
    if not 0 <= fraction < 0.5:
        raise ValidationError(f"outlier fraction must be in [0, 0.5), got {fraction}")
    n = field.n
    count = int(np.floor(fraction * n))
    if count == 0:
        return field, np.array([], dtype=int)
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(n, size=count, replace=False))
    comp = rng.integers(0, 3, size=count)
    sign = rng.choice([-1.0, 1.0], size=count)
    dp = field.displacements.copy()
    dp[idx, comp] += sign * magnitude * sigma
    return field.with_displacements(dp), idx


def simulate_experiment(true_k, load, grid, noise, mode="exact"):
    """One synthetic FEA run: wrench -> rigid deflection -> noisy grid field."""
    k = np.asarray(getattr(true_k, "k", true_k), dtype=float)
    if k.shape != (6, 6) or not np.all(np.isfinite(k)):
        raise ValidationError("true compliance must be a finite 6x6 matrix")
    d = k @ load.wrench
    field = apply_rigid(make_grid(grid), d[:3], d[3:], mode)
    return add_noise(field, noise)
