"""Small-rotation algebra and the displacement-field data model.

Vectors and 3x3 matrices are plain numpy arrays. Units are mm, N and rad
throughout; degrees only appear at I/O boundaries.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, ValidationError

# beyond this the first-order rotation model starts to bias the estimates
LINEAR_MODEL_LIMIT = 0.02


class LinearityWarning(UserWarning):
    pass


def _vec3(v, name="vector"):
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise ValidationError(f"{name} must have 3 components, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} has non-finite components")
    return a


def skew_neg(p):
    """Skew matrix P with ``P @ v == np.cross(v, p)``.

    This is the negative of the usual cross-product matrix of ``p``, so that
    ``P @ phi`` gives the displacement ``phi x p`` of a point under a small
    rotation ``phi``.
    """
    x, y, z = _vec3(p)
    return np.array([[0.0, z, -y],
                     [-z, 0.0, x],
                     [y, -x, 0.0]])


def small_rotation(phi):
    """First-order rotation matrix ``I + [phi]x``."""
    x, y, z = _vec3(phi, "phi")
    return np.array([[1.0, -z, y],
                     [z, 1.0, -x],
                     [-y, x, 1.0]])


def exact_rotation(phi):
    """Rotation by ``|phi|`` about ``phi / |phi|`` (Rodrigues formula)."""
    phi = _vec3(phi, "phi")
    theta = np.linalg.norm(phi)
    if theta == 0.0:
        return np.eye(3)
    k = phi / theta
    K = np.array([[0.0, -k[2], k[1]],
                  [k[2], 0.0, -k[0]],
                  [-k[1], k[0], 0.0]])
    return np.eye(3) + np.sin(theta) * K + (1.0 - np.cos(theta)) * (K @ K)


def _axis_rotation(axis, angle):
    c, s = np.cos(angle), np.sin(angle)
    i, j = [(1, 2), (2, 0), (0, 1)][axis]
    R = np.eye(3)
    R[i, i] = R[j, j] = c
    R[i, j], R[j, i] = -s, s
    return R


def elementary_rotation(phi):
    """Product ``Rx(phi_x) @ Ry(phi_y) @ Rz(phi_z)`` of elementary rotations.

    Agrees with :func:`exact_rotation` to first order but differs at second
    order; used as ground truth for the linearization study.
    """
    phi = _vec3(phi, "phi")
    return _axis_rotation(0, phi[0]) @ _axis_rotation(1, phi[1]) @ _axis_rotation(2, phi[2])


ROTATIONS = {
    "exact": exact_rotation,
    "linearized": small_rotation,
    "elementary": elementary_rotation,
}


def rotation_matrix(phi, mode="exact"):
    try:
        return ROTATIONS[mode](phi)
    except KeyError:
        raise ValidationError(f"unknown rotation mode {mode!r}; expected one of {sorted(ROTATIONS)}") from None


@dataclass(frozen=True)
class RigidDeflection:
    """Translation ``t`` (mm) and rotation ``phi`` (rad) of the reference frame."""

    t: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "t", _vec3(self.t, "t"))
        object.__setattr__(self, "phi", _vec3(self.phi, "phi"))
        self.t.flags.writeable = False
        self.phi.flags.writeable = False
        if np.linalg.norm(self.phi) > LINEAR_MODEL_LIMIT:
            warnings.warn(
                f"|phi| = {np.linalg.norm(self.phi):.3g} rad exceeds {LINEAR_MODEL_LIMIT} rad; "
                "the linear deflection model loses accuracy",
                LinearityWarning, stacklevel=3)

    @property
    def phi_deg(self):
        return np.degrees(self.phi)

    def as_vector(self):
        return np.concatenate([self.t, self.phi])


@dataclass(frozen=True)
class DisplacementField:
    """Node positions and displacements around a reference point.

    ``positions`` are given in absolute coordinates together with
    ``reference_point``; after construction they are stored relative to it,
    ``reference_point`` becomes the origin and the absolute location is kept
    in ``origin`` (used when the field is written back to a file).
    """

    positions: np.ndarray
    displacements: np.ndarray
    reference_point: np.ndarray = field(default_factory=lambda: np.zeros(3))
    origin: np.ndarray = field(init=False)

    def __post_init__(self):
        p = np.array(self.positions, dtype=float)
        dp = np.array(self.displacements, dtype=float)
        ref = _vec3(self.reference_point, "reference_point")
        if p.ndim != 2 or p.shape[1] != 3 or dp.shape != p.shape:
            raise ValidationError(
                f"positions and displacements must both be (n, 3); got {p.shape} and {dp.shape}")
        if len(p) < 3:
            raise InsufficientDataError(f"a displacement field needs at least 3 nodes, got {len(p)}")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(dp))):
            raise ValidationError("field contains non-finite values")
        if np.any(ref != 0.0):
            p = p - ref
        for a in (p, dp, ref):
            a.flags.writeable = False
        zero = np.zeros(3)
        zero.flags.writeable = False
        object.__setattr__(self, "positions", p)
        object.__setattr__(self, "displacements", dp)
        object.__setattr__(self, "origin", ref)
        object.__setattr__(self, "reference_point", zero)

    def __len__(self):
        return len(self.positions)

    @property
    def n(self):
        return len(self.positions)

    @property
    def absolute_positions(self):
        if np.any(self.origin != 0.0):
            return self.positions + self.origin
        return self.positions

    @classmethod
    def _relative(cls, positions, displacements, origin):
        f = cls(positions, displacements)
        object.__setattr__(f, "origin", origin)
        return f

    def with_displacements(self, displacements):
        return DisplacementField._relative(self.positions, displacements, self.origin)

    def subset(self, keep):
        """Field restricted to the node indices (or boolean mask) ``keep``."""
        return DisplacementField._relative(self.positions[keep], self.displacements[keep], self.origin)
