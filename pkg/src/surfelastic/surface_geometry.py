"""Differential geometry of the surface embedded in 3D.

Every quantity is computed from the covariant tangent vectors
``g_alpha = d r / d xi^alpha`` of the bilinear parametrisation.  The
contravariant vectors come from inverting the 2x2 metric; the surface
deformation gradient ``F^ = g_alpha (x) G^alpha`` and its inverse
``f^ = G_alpha (x) g^alpha`` are assembled from the material and spatial frames,
so the rank-deficient ``F^`` is never inverted.  Cross products are taken in
the embedding space; no surface permutation tensor is formed.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSurfaceCellError

__all__ = [
    "SurfacePointFrame",
    "build_frame",
    "shape_gradients",
    "surface_deformation_gradient",
    "surface_inverse",
    "surface_determinant",
    "surface_det_formula",
    "surface_gradient",
    "SurfaceCellValues",
    "reinit_surface",
]

_DEGENERATE_RTOL = 1e-12


@dataclass
class SurfacePointFrame:
    """Surface frames at the quadrature points of a batch of surface cells.

    ``cov[..., alpha, :]`` is ``g_alpha``, ``contra[..., alpha, :]`` is
    ``g^alpha``.
    """

    cov: np.ndarray          # (ns, nq, 2, 3)
    contra: np.ndarray       # (ns, nq, 2, 3)
    metric: np.ndarray       # (ns, nq, 2, 2)
    metric_inv: np.ndarray   # (ns, nq, 2, 2)
    normal: np.ndarray       # (ns, nq, 3), unit, oriented
    area: np.ndarray         # (ns, nq) |g_1 x g_2|

    @property
    def projector(self):
        """In-plane identity ``i - n (x) n``."""
        n = self.normal
        return np.eye(3) - n[..., :, None] * n[..., None, :]


def build_frame(coords, dN, orientation=None, cells=None):
    """Frames from nodal coordinates ``(ns, 4, 3)`` and reference gradients ``(nq, 4, 2)``.

    ``orientation`` (+1/-1 per cell) flips the normal so it points out of the
    volume.
    """
    coords = np.asarray(coords, dtype=float)
    cov = np.einsum("sai,qad->sqdi", coords, dN)
    metric = np.einsum("sqai,sqbi->sqab", cov, cov)
    c = np.cross(cov[..., 0, :], cov[..., 1, :])
    area = np.linalg.norm(c, axis=-1)
    scale = np.linalg.norm(cov[..., 0, :], axis=-1) * np.linalg.norm(cov[..., 1, :], axis=-1)
    bad = ~(area > _DEGENERATE_RTOL * scale)
    if np.any(bad):
        s, q = np.argwhere(bad)[0]
        cid = s if cells is None else cells[s]
        raise DegenerateSurfaceCellError(cid, q)
    det = metric[..., 0, 0] * metric[..., 1, 1] - metric[..., 0, 1] * metric[..., 1, 0]
    metric_inv = np.empty_like(metric)
    metric_inv[..., 0, 0] = metric[..., 1, 1] / det
    metric_inv[..., 1, 1] = metric[..., 0, 0] / det
    metric_inv[..., 0, 1] = -metric[..., 0, 1] / det
    metric_inv[..., 1, 0] = -metric[..., 1, 0] / det
    contra = np.einsum("sqab,sqbi->sqai", metric_inv, cov)
    normal = c / area[..., None]
    if orientation is not None:
        normal = normal * np.asarray(orientation, dtype=float)[:, None, None]
    return SurfacePointFrame(cov, contra, metric, metric_inv, normal, area)


def shape_gradients(frame, dN):
    """Surface gradients of the bilinear shape functions, ``(ns, nq, 4, 3)``.

    ``Grad^ Phi^I = dPhi^I/dxi^alpha g^alpha``; superficial by construction.
    """
    return np.einsum("qad,sqdi->sqai", dN, frame.contra)


def surface_deformation_gradient(material, spatial):
    """``F^ = g_alpha (x) G^alpha`` (spatial covariant, material contravariant)."""
    return np.einsum("sqai,sqaj->sqij", spatial.cov, material.contra)


def surface_inverse(material, spatial):
    """``f^ = G_alpha (x) g^alpha``."""
    return np.einsum("sqai,sqaj->sqij", material.cov, spatial.contra)


def surface_determinant(material, spatial):
    """Area ratio ``J^ = |g_1 x g_2| / |G_1 x G_2|``."""
    return spatial.area / material.area


def surface_det_formula(T, frame):
    """``det^ T = |(T.g_1) x (T.g_2)| / |g_1 x g_2|`` for tensors ``T`` on ``frame``."""
    a = np.einsum("sqij,sqj->sqi", T, frame.cov[..., 0, :])
    b = np.einsum("sqij,sqj->sqi", T, frame.cov[..., 1, :])
    return np.linalg.norm(np.cross(a, b), axis=-1) / frame.area


def surface_gradient(values, frame, dN):
    """Surface gradient of a nodal field.

    ``values`` is ``(ns, 4)`` for a scalar field (result ``(ns, nq, 3)``) or
    ``(ns, 4, k)`` for a vector field (result ``(ns, nq, k, 3)``).
    """
    grads = shape_gradients(frame, dN)
    values = np.asarray(values, dtype=float)
    if values.ndim == 2:
        return np.einsum("sa,sqaj->sqj", values, grads)
    return np.einsum("sai,sqaj->sqij", values, grads)


@dataclass
class SurfaceCellValues:
    """Surface kinematics at the quadrature points of a batch of surface cells."""

    cells: np.ndarray
    N: np.ndarray            # (nq, 4)
    grad0: np.ndarray        # (ns, nq, 4, 3) material surface gradients
    gradt: np.ndarray        # (ns, nq, 4, 3) spatial surface gradients
    material: SurfacePointFrame
    spatial: SurfacePointFrame
    F: np.ndarray            # (ns, nq, 3, 3)
    f: np.ndarray
    J: np.ndarray            # (ns, nq)
    JxW: np.ndarray          # (ns, nq) material area element times weight

    @property
    def N_normal(self):
        return self.material.normal

    @property
    def n_normal(self):
        return self.spatial.normal


def reinit_surface(X, u, orientation, rule, cells=None):
    """Evaluate surface kinematics for a batch of surface cells.

    Parameters
    ----------
    X, u : ndarray (ns, 4, 3)
        Material coordinates and displacements of the surface cell vertices.
    orientation : ndarray (ns,)
    rule : QuadratureRule (2D)
    """
    from .fem_basis import shape_bilinear

    N, dN = shape_bilinear(rule.points)
    X = np.asarray(X, dtype=float)
    mat = build_frame(X, dN, orientation, cells)
    spa = build_frame(X + u, dN, orientation, cells)
    return SurfaceCellValues(
        cells=np.arange(len(X)) if cells is None else np.asarray(cells),
        N=N,
        grad0=shape_gradients(mat, dN),
        gradt=shape_gradients(spa, dN),
        material=mat,
        spatial=spa,
        F=surface_deformation_gradient(mat, spa),
        f=surface_inverse(mat, spa),
        J=surface_determinant(mat, spa),
        JxW=mat.area * rule.weights,
    )
