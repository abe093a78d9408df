"""Isoparametric shape functions, Gauss rules and volume cell kinematics.

Vertex ordering is lexicographic in the reference coordinates (the deal.II
convention): vertex ``a`` of the reference hexahedron sits at
``xi_d = -1 + 2 * bit_d(a)`` with bit 0 the x-bit, bit 1 the y-bit and bit 2 the
z-bit.  The bilinear quadrilateral uses the same rule with two bits.

Cell kinematics are evaluated for a whole batch of cells at once.  Besides
the material gradients, the spatial gradients are computed from the deformed
(Eulerian) view of the cell, so that ``f = dX/dx`` is interpolated directly
and ``J`` is the ratio of the isoparametric Jacobians, never ``det F``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvertedCellError, MeshError

__all__ = [
    "QuadratureRule",
    "gauss_rule",
    "shape_trilinear",
    "shape_bilinear",
    "CellValues",
    "reinit_material",
    "interpolate_F",
    "interpolate_f",
    "jacobian_determinants",
    "spatial_view",
    "HEX_CORNERS",
    "QUAD_CORNERS",
]

HEX_CORNERS = np.array(
    [[-1 + 2 * ((a >> d) & 1) for d in range(3)] for a in range(8)], dtype=float
)
QUAD_CORNERS = np.array(
    [[-1 + 2 * ((a >> d) & 1) for d in range(2)] for a in range(4)], dtype=float
)


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray

    @property
    def n_points(self):
        return len(self.weights)

    @property
    def dim(self):
        return self.points.shape[1]


def gauss_rule(dim, n=2):
    """Tensor-product Gauss-Legendre rule on ``[-1, 1]**dim``.

    Points are ordered lexicographically (first coordinate fastest).
    """
    x, w = np.polynomial.legendre.leggauss(n)
    grids = np.meshgrid(*([x] * dim), indexing="ij")
    wgrids = np.meshgrid(*([w] * dim), indexing="ij")
    # reverse so that the first coordinate varies fastest
    pts = np.stack([g.transpose().ravel() for g in grids], axis=-1)
    wts = np.prod(np.stack([g.transpose().ravel() for g in wgrids], axis=-1), axis=-1)
    return QuadratureRule(pts, wts)


def _tensor_shape(xi, corners):
    xi = np.asarray(xi, dtype=float)
    dim = corners.shape[1]
    # factors[..., a, d] = (1 + c_ad xi_d) / 2
    factors = 0.5 * (1.0 + xi[..., None, :] * corners)
    N = np.prod(factors, axis=-1)
    dN = np.empty(xi.shape[:-1] + corners.shape)
    for d in range(dim):
        others = np.delete(factors, d, axis=-1)
        dN[..., d] = 0.5 * corners[:, d] * np.prod(others, axis=-1)
    return N, dN


def shape_trilinear(xi):
    """Trilinear shape values ``(..., 8)`` and reference gradients ``(..., 8, 3)``."""
    return _tensor_shape(xi, HEX_CORNERS)


def shape_bilinear(xi):
    """Bilinear shape values ``(..., 4)`` and reference gradients ``(..., 4, 2)``."""
    return _tensor_shape(xi, QUAD_CORNERS)


@dataclass
class CellValues:
    """Shape data of a batch of volume cells at the quadrature points.

    Arrays are indexed ``[cell, qp, ...]``; ``N`` is shared by all cells.
    """

    cells: np.ndarray      # global ids of the cells in this batch
    N: np.ndarray          # (nq, 8)
    grad0: np.ndarray      # (nc, nq, 8, 3) material gradients Grad Phi
    gradt: np.ndarray      # (nc, nq, 8, 3) spatial gradients grad Phi_t
    detJ0: np.ndarray      # (nc, nq) isoparametric -> material
    detJt: np.ndarray      # (nc, nq) isoparametric -> spatial
    JxW: np.ndarray        # (nc, nq) material volume element times weight


def _iso_jacobian(coords, dN):
    # jac[c, q, i, d] = d x_i / d xi_d
    return np.einsum("cai,qad->cqid", coords, dN)


def reinit_material(X, u, rule, cells=None):
    """Evaluate material and spatial shape gradients for a batch of cells.

    Parameters
    ----------
    X : ndarray (nc, 8, 3)
        Material vertex coordinates per cell.
    u : ndarray (nc, 8, 3)
        Vertex displacements per cell.
    rule : QuadratureRule
    cells : ndarray, optional
        Global cell ids, only used to label errors.

    Raises
    ------
    MeshError
        If a material Jacobian is non-positive (invalid mesh).
    InvertedCellError
        If the deformed cell is inverted at some quadrature point.
    """
    X = np.asarray(X, dtype=float)
    u = np.asarray(u, dtype=float)
    if cells is None:
        cells = np.arange(len(X))
    N, dN = shape_trilinear(rule.points)

    jac0 = _iso_jacobian(X, dN)
    detJ0 = np.linalg.det(jac0)
    if np.any(detJ0 <= 0.0):
        c, q = np.argwhere(detJ0 <= 0.0)[0]
        raise MeshError(f"cell {cells[c]} has non-positive material Jacobian at qp {q}")
    jact = _iso_jacobian(X + u, dN)
    detJt = np.linalg.det(jact)
    ratio = detJt / detJ0
    if np.any(ratio <= 0.0):
        c, q = np.argwhere(ratio <= 0.0)[0]
        raise InvertedCellError(cells[c], q, ratio[c, q])

    grad0 = np.einsum("qad,cqdi->cqai", dN, np.linalg.inv(jac0))
    gradt = np.einsum("qad,cqdi->cqai", dN, np.linalg.inv(jact))
    return CellValues(
        cells=np.asarray(cells),
        N=N,
        grad0=grad0,
        gradt=gradt,
        detJ0=detJ0,
        detJt=detJt,
        JxW=detJ0 * rule.weights,
    )


def interpolate_F(cv, x):
    """Deformation gradient ``F = sum_I x^I (x) Grad Phi^I`` per quadrature point."""
    return np.einsum("cai,cqaj->cqij", x, cv.grad0)


def interpolate_f(cv, X):
    """Inverse deformation gradient ``f = sum_I X^I (x) grad Phi_t^I``."""
    return np.einsum("cai,cqaj->cqij", X, cv.gradt)


def jacobian_determinants(cv):
    """``(J, j)`` from the ratio of the isoparametric Jacobian determinants."""
    J = cv.detJt / cv.detJ0
    if np.any(J <= 0.0):
        c, q = np.argwhere(J <= 0.0)[0]
        raise InvertedCellError(cv.cells[c], q, J[c, q])
    return J, 1.0 / J


def spatial_view(x, rule, cells=None, detJ0=None):
    """Isoparametric-to-spatial Jacobian determinants and spatial gradients.

    ``x`` holds deformed vertex positions ``(nc, 8, 3)``.  When ``detJ0`` is
    given, cells whose Jacobian ratio is non-positive raise
    :class:`InvertedCellError`.
    """
    if cells is None:
        cells = np.arange(len(x))
    _, dN = shape_trilinear(rule.points)
    jact = _iso_jacobian(x, dN)
    detJt = np.linalg.det(jact)
    ref = 1.0 if detJ0 is None else detJ0
    ratio = detJt / ref
    if np.any(~(ratio > 0.0)):
        c, q = np.argwhere(~(ratio > 0.0))[0]
        raise InvertedCellError(cells[c], q, ratio[c, q])
    gradt = np.einsum("qad,cqdi->cqai", dN, np.linalg.inv(jact))
    return detJt, gradt
