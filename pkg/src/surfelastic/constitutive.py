"""Compressible neo-Hookean response of the volume and of the surface.

Volume::

    Psi = 1/2 lam ln^2 J + 1/2 mu [F:F - 3 - 2 ln J]
    P   = lam ln J f^t + mu [F - f^t]
    A   = lam [f^t (x) f^t + ln J D] + mu [I4 - D],   D = -f^t (x-under) f

Surface (with surface tension ``gamma``)::

    Psi^ = 1/2 lam^ ln^2 J^ + 1/2 mu^ [F^:F^ - 2 - 2 ln J^] + gamma J^
    P^   = lam^ ln J^ f^t + mu^ [F^ - f^t] + gamma J^ f^t
    A^   = lam^ [f^t (x) f^t + ln J^ D^] + mu^ [I4^ - D^] + gamma J^ [f^t (x) f^t + D^]
    D^   = -f^t (x-under) f^ + n(x)n (x-over) f^.f^t,   I4^ = i (x-over) I^

where ``f^t`` denotes the transpose of the (surface) inverse deformation
gradient.  All routines are vectorised over leading batch axes.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InadmissibleStateError
from .tensor_kit import otimes, otimes_over, otimes_under, transpose

__all__ = [
    "VolumeMaterial",
    "SurfaceMaterial",
    "ContinuumPoints",
    "volume_energy",
    "volume_stress",
    "volume_tangent",
    "surface_energy",
    "surface_stress",
    "surface_tangent",
]


@dataclass(frozen=True)
class VolumeMaterial:
    lam: float
    mu: float
    allow_nonphysical: bool = False

    def __post_init__(self):
        if not self.allow_nonphysical and (self.mu <= 0.0 or self.lam < 0.0):
            raise ValueError(
                f"volume Lame parameters must satisfy mu > 0, lambda >= 0 "
                f"(got lambda={self.lam}, mu={self.mu})"
            )


@dataclass(frozen=True)
class SurfaceMaterial:
    lam: float = 0.0
    mu: float = 0.0
    gamma: float = 0.0
    allow_nonphysical: bool = False

    def __post_init__(self):
        if not self.allow_nonphysical and (self.mu < 0.0 or self.gamma < 0.0):
            raise ValueError(
                "negative surface parameters need allow_nonphysical=True "
                f"(got mu={self.mu}, gamma={self.gamma})"
            )

    @property
    def is_null(self):
        return self.lam == 0.0 and self.mu == 0.0 and self.gamma == 0.0

    def scaled_tension(self, factor):
        """Copy with the surface tension multiplied by ``factor``."""
        return SurfaceMaterial(self.lam, self.mu, self.gamma * factor, self.allow_nonphysical)


def _check_J(J):
    J = np.asarray(J, dtype=float)
    if np.any(~(J > 0.0)):
        raise InadmissibleStateError(f"non-positive Jacobian (min {np.min(J):.3e})")
    return J


def volume_energy(F, f, J, mat):
    J = _check_J(J)
    lnJ = np.log(J)
    FF = np.einsum("...ij,...ij->...", F, F)
    return 0.5 * mat.lam * lnJ**2 + 0.5 * mat.mu * (FF - 3.0 - 2.0 * lnJ)


def volume_stress(F, f, J, mat):
    J = _check_J(J)
    fT = transpose(f)
    return mat.lam * np.log(J)[..., None, None] * fT + mat.mu * (F - fT)


def volume_tangent(F, f, J, mat):
    J = _check_J(J)
    fT = transpose(f)
    lnJ = np.log(J)[..., None, None, None, None]
    D = -otimes_under(fT, f)
    I4 = otimes_over(np.broadcast_to(np.eye(3), F.shape), np.broadcast_to(np.eye(3), F.shape))
    return mat.lam * (otimes(fT, fT) + lnJ * D) + mat.mu * (I4 - D)


def surface_energy(F, f, J, mat):
    J = _check_J(J)
    lnJ = np.log(J)
    FF = np.einsum("...ij,...ij->...", F, F)
    return 0.5 * mat.lam * lnJ**2 + 0.5 * mat.mu * (FF - 2.0 - 2.0 * lnJ) + mat.gamma * J


def surface_stress(F, f, J, mat):
    J = _check_J(J)
    fT = transpose(f)
    lnJ = np.log(J)[..., None, None]
    return (mat.lam * lnJ + mat.gamma * J[..., None, None]) * fT + mat.mu * (F - fT)


def surface_tangent(F, f, J, N, n, mat):
    """Surface Piola stress tangent for superficial increments of ``F^``.

    ``N`` and ``n`` are the material and spatial unit normals.
    """
    J = _check_J(J)
    fT = transpose(f)
    lnJ = np.log(J)[..., None, None, None, None]
    Jx = J[..., None, None, None, None]
    nn = n[..., :, None] * n[..., None, :]
    I_hat = np.eye(3) - N[..., :, None] * N[..., None, :]
    D = -otimes_under(fT, f) + otimes_over(nn, f @ fT)
    I4 = otimes_over(np.broadcast_to(np.eye(3), F.shape), I_hat)
    ff = otimes(fT, fT)
    return mat.lam * (ff + lnJ * D) + mat.mu * (I4 - D) + mat.gamma * Jx * (ff + D)


@dataclass
class ContinuumPoints:
    """Kinematic and kinetic state at the quadrature points of one locus.

    ``locus`` is ``"volume"`` or ``"surface"``; arrays are indexed
    ``[cell, qp, ...]``.  Tangents are not retained (they are formed chunk by
    chunk during assembly).
    """

    locus: str
    F: np.ndarray
    f: np.ndarray
    J: np.ndarray
    psi: np.ndarray
    P: np.ndarray
    JxW: np.ndarray
    N: np.ndarray = None
    n: np.ndarray = None

    @classmethod
    def empty(cls, locus, nq):
        z = np.zeros((0, nq))
        t = np.zeros((0, nq, 3, 3))
        return cls(locus, t, t.copy(), z, z.copy(), t.copy(), z.copy())
