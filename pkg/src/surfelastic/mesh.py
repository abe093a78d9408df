"""Hexahedral volume meshes, extracted surface meshes and DOF numbering.

Local face numbering of the reference hexahedron (fixed, also used by the
mesh file format)::

    face 0: -x    vertices 0 2 4 6
    face 1: +x    vertices 1 3 5 7
    face 2: -y    vertices 0 1 4 5
    face 3: +y    vertices 2 3 6 7
    face 4: -z    vertices 0 1 2 3
    face 5: +z    vertices 4 5 6 7

Face vertices are listed lexicographically in the two in-face reference
coordinates, so they can be fed directly to the bilinear shape functions.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

from .errors import MeshError
from .fem_basis import gauss_rule, reinit_material, shape_bilinear, shape_trilinear

__all__ = [
    "FACE_VERTICES",
    "Triangulation",
    "SurfaceTriangulation",
    "DofMap",
    "SurfaceToVolumeDofMap",
    "exterior_faces",
    "extract_boundary_mesh",
    "build_surface_to_volume_dof_map",
    "mark_dirichlet",
    "face_area",
    "locate_point",
    "PointEvaluator",
]

FACE_VERTICES = np.array(
    [
        [0, 2, 4, 6],
        [1, 3, 5, 7],
        [0, 1, 4, 5],
        [2, 3, 6, 7],
        [0, 1, 2, 3],
        [4, 5, 6, 7],
    ]
)

COMPONENTS = {"x": 0, "y": 1, "z": 2}


def exterior_faces(cells):
    """All ``(cell, local_face)`` pairs whose face belongs to exactly one cell."""
    cells = np.asarray(cells)
    fv = cells[:, FACE_VERTICES]                     # (nc, 6, 4)
    keys = np.sort(fv.reshape(-1, 4), axis=1)
    _, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    if np.any(counts > 2):
        raise MeshError("a face is shared by more than two cells")
    ext = np.flatnonzero(counts[inverse] == 1)
    return np.column_stack([ext // 6, ext % 6])


@dataclass
class Triangulation:
    """Hexahedral volume mesh.

    ``boundary_faces`` rows are ``(cell, local_face, boundary_id)``.
    """

    vertices: np.ndarray
    cells: np.ndarray
    boundary_faces: np.ndarray = field(default_factory=lambda: np.zeros((0, 3), dtype=int))

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=float).reshape(-1, 3)
        self.cells = np.ascontiguousarray(self.cells, dtype=np.int64).reshape(-1, 8)
        self.boundary_faces = np.ascontiguousarray(self.boundary_faces, dtype=np.int64).reshape(-1, 3)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_cells(self):
        return len(self.cells)

    @property
    def boundary_ids(self):
        return set(int(b) for b in np.unique(self.boundary_faces[:, 2]))

    def bounding_box_diagonal(self):
        return float(np.linalg.norm(self.vertices.max(axis=0) - self.vertices.min(axis=0)))

    def cell_coordinates(self, u=None):
        X = self.vertices[self.cells]
        if u is None:
            return X
        return X, np.asarray(u).reshape(-1, 3)[self.cells]

    def faces_with_id(self, boundary_id):
        sel = self.boundary_faces[:, 2] == boundary_id
        return self.boundary_faces[sel, :2]

    def vertices_on_boundary(self, boundary_ids):
        ids = np.atleast_1d(list(boundary_ids) if isinstance(boundary_ids, (set, frozenset)) else boundary_ids)
        sel = np.isin(self.boundary_faces[:, 2], ids)
        bf = self.boundary_faces[sel]
        if len(bf) == 0:
            return np.zeros(0, dtype=np.int64)
        return np.unique(self.cells[bf[:, 0][:, None], FACE_VERTICES[bf[:, 1]]])

    def validate(self):
        """Check the mesh invariants; raises :class:`MeshError` on failure."""
        if self.cells.size and (self.cells.min() < 0 or self.cells.max() >= self.n_vertices):
            raise MeshError("cell references a non-existent vertex")
        srt = np.sort(self.cells, axis=1)
        if np.any(srt[:, 1:] == srt[:, :-1]):
            raise MeshError("cell with repeated vertices")
        if self.n_cells:
            X = self.vertices[self.cells]
            reinit_material(X, np.zeros_like(X), gauss_rule(3))
        ext = {tuple(f) for f in exterior_faces(self.cells)}
        for c, f, _ in self.boundary_faces:
            if (int(c), int(f)) not in ext:
                raise MeshError(f"boundary face ({c}, {f}) is not an exterior face")
        listed = {(int(c), int(f)) for c, f, _ in self.boundary_faces}
        if len(listed) != len(self.boundary_faces):
            raise MeshError("duplicate boundary face entries")
        return True


@dataclass
class SurfaceTriangulation:
    """Quadrilateral surface mesh extracted from a volume mesh.

    ``volume_vertex`` records the volume vertex each surface vertex was taken
    from; ``orientation`` is +1 when the lexicographic parametrisation of the
    face already yields the outward normal and -1 otherwise.
    """

    vertices: np.ndarray
    cells: np.ndarray
    face_origin: np.ndarray
    orientation: np.ndarray
    boundary_ids: np.ndarray
    volume_vertex: np.ndarray

    @property
    def n_cells(self):
        return len(self.cells)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_dofs(self):
        return 3 * self.n_vertices


def _face_normal_at_center(P):
    # P: (nf, 4, 3) lexicographic face vertices
    g1 = 0.5 * ((P[:, 1] - P[:, 0]) + (P[:, 3] - P[:, 2]))
    g2 = 0.5 * ((P[:, 2] - P[:, 0]) + (P[:, 3] - P[:, 1]))
    return np.cross(g1, g2)


def extract_boundary_mesh(tri, boundary_ids):
    """Build the surface triangulation of the faces carrying ``boundary_ids``.

    An empty selection gives an empty surface (a pure volume problem).
    """
    ids = sorted(set(int(b) for b in boundary_ids))
    unknown = set(ids) - tri.boundary_ids
    if unknown:
        raise MeshError(f"boundary ids {sorted(unknown)} are not present in the mesh")
    sel = np.isin(tri.boundary_faces[:, 2], ids)
    bf = tri.boundary_faces[sel]
    if len(bf) == 0:
        empty = np.zeros((0,), dtype=np.int64)
        return SurfaceTriangulation(
            vertices=np.zeros((0, 3)),
            cells=np.zeros((0, 4), dtype=np.int64),
            face_origin=np.zeros((0, 2), dtype=np.int64),
            orientation=empty.astype(float),
            boundary_ids=empty,
            volume_vertex=empty,
        )
    vol_cells = tri.cells[bf[:, 0]]
    face_vol_vertices = np.take_along_axis(vol_cells, FACE_VERTICES[bf[:, 1]], axis=1)
    used, local = np.unique(face_vol_vertices, return_inverse=True)
    local = local.reshape(-1, 4)

    P = tri.vertices[face_vol_vertices]
    normal = _face_normal_at_center(P)
    outward = P.mean(axis=1) - tri.vertices[vol_cells].mean(axis=1)
    orientation = np.where(np.einsum("fi,fi->f", normal, outward) > 0.0, 1.0, -1.0)

    return SurfaceTriangulation(
        vertices=tri.vertices[used].copy(),
        cells=local,
        face_origin=bf[:, :2].copy(),
        orientation=orientation,
        boundary_ids=bf[:, 2].copy(),
        volume_vertex=used,
    )


def face_area(tri, faces, n_gauss=2):
    """Material areas of volume faces given as ``(cell, local_face)`` rows."""
    faces = np.asarray(faces).reshape(-1, 2)
    verts = np.take_along_axis(tri.cells[faces[:, 0]], FACE_VERTICES[faces[:, 1]], axis=1)
    P = tri.vertices[verts]
    rule = gauss_rule(2, n_gauss)
    _, dN = shape_bilinear(rule.points)
    G = np.einsum("fai,qad->fqid", P, dN)
    da = np.linalg.norm(np.cross(G[..., 0], G[..., 1]), axis=-1)
    return da @ rule.weights


@dataclass
class DofMap:
    """Vector-valued displacement numbering: DOF ``3 * vertex + component``.

    ``constraints`` maps a DOF to its total prescribed displacement, reached
    at the end of the loading; intermediate values scale with the load factor.
    """

    n_vertices: int
    constraints: dict = field(default_factory=dict)

    @property
    def n_dofs(self):
        return 3 * self.n_vertices

    def dof(self, vertex, component):
        return 3 * np.asarray(vertex) + np.asarray(component)

    @property
    def constrained_dofs(self):
        return np.array(sorted(self.constraints), dtype=np.int64)

    @property
    def free_mask(self):
        mask = np.ones(self.n_dofs, dtype=bool)
        mask[self.constrained_dofs] = False
        return mask

    def prescribed_values(self, load_factor=1.0):
        dofs = self.constrained_dofs
        vals = np.array([self.constraints[d] for d in dofs], dtype=float)
        return dofs, load_factor * vals


def mark_dirichlet(dofs, vertices, predicate, components, value=0.0):
    """Return a copy of ``dofs`` with additional Dirichlet constraints.

    Parameters
    ----------
    dofs : DofMap
    vertices : ndarray (nv, 3)
        Material vertex coordinates.
    predicate : callable or array_like
        ``predicate(X) -> bool mask`` over vertices, or an explicit array of
        vertex indices.
    components : str or iterable of int
        e.g. ``"xyz"``, ``"z"`` or ``[0, 2]``.
    value : float or callable
        Total prescribed displacement.  A callable receives the selected
        material coordinates ``(n, 3)`` and returns displacement vectors
        ``(n, 3)``.
    """
    vertices = np.asarray(vertices, dtype=float)
    if callable(predicate):
        sel = np.flatnonzero(np.asarray(predicate(vertices), dtype=bool))
    else:
        sel = np.asarray(predicate, dtype=np.int64).ravel()
    if isinstance(components, str):
        comps = [COMPONENTS[c] for c in components.lower()]
    else:
        comps = [int(c) for c in components]
    if callable(value):
        vals = np.asarray(value(vertices[sel]), dtype=float).reshape(len(sel), 3)
    else:
        vals = np.full((len(sel), 3), float(value))

    new = dict(dofs.constraints)
    for k, v in enumerate(sel):
        for c in comps:
            d = int(3 * v + c)
            val = float(vals[k, c])
            if d in new and not np.isclose(new[d], val, rtol=1e-12, atol=1e-14):
                raise MeshError(
                    f"conflicting Dirichlet values for vertex {v} component {c}: "
                    f"{new[d]!r} vs {val!r}"
                )
            new[d] = val
    return replace(dofs, constraints=new)


@dataclass(frozen=True)
class SurfaceToVolumeDofMap:
    """``volume_dof[s]`` is the volume DOF of surface DOF ``s``."""

    volume_dof: np.ndarray

    def __len__(self):
        return len(self.volume_dof)


def build_surface_to_volume_dof_map(tri, surf, dofs=None, surf_dofs=None):
    """Link every surface DOF to the volume DOF at the coincident vertex.

    Vertices are matched geometrically (tolerance ``1e-10`` times the
    bounding-box diagonal).  A surface vertex without a unique coincident
    volume vertex means the mesh is corrupted and raises :class:`MeshError`.
    """
    if surf.n_vertices == 0:
        return SurfaceToVolumeDofMap(np.zeros(0, dtype=np.int64))
    tol = 1e-10 * max(tri.bounding_box_diagonal(), 1e-300)
    tree = cKDTree(tri.vertices)
    k = 2 if tri.n_vertices > 1 else 1
    dist, idx = tree.query(surf.vertices, k=k)
    dist = dist.reshape(len(surf.vertices), k)
    idx = idx.reshape(len(surf.vertices), k)
    if np.any(dist[:, 0] > tol):
        s = int(np.argmax(dist[:, 0]))
        raise MeshError(f"surface vertex {s} has no coincident volume vertex")
    if k == 2 and np.any(dist[:, 1] <= tol):
        s = int(np.flatnonzero(dist[:, 1] <= tol)[0])
        raise MeshError(f"surface vertex {s} coincides with more than one volume vertex")
    vol_vertex = idx[:, 0]
    if len(np.unique(vol_vertex)) != len(vol_vertex):
        raise MeshError("surface-to-volume map is not injective")
    vdofs = (3 * vol_vertex[:, None] + np.arange(3)).ravel()
    return SurfaceToVolumeDofMap(vdofs.astype(np.int64))


def locate_point(tri, point, n_candidates=8, tol=1e-9):
    """Cell containing a material point and its reference coordinates.

    Candidate cells are taken by centroid distance; the isoparametric map
    is inverted with Newton's method.  Raises :class:`MeshError` if the
    point lies outside the mesh.
    """
    point = np.asarray(point, dtype=float)
    centroids = tri.vertices[tri.cells].mean(axis=1)
    k = min(n_candidates, tri.n_cells)
    _, cand = cKDTree(centroids).query(point, k=k)
    for c in np.atleast_1d(cand):
        X = tri.vertices[tri.cells[c]]
        xi = np.zeros(3)
        for _ in range(25):
            N, dN = shape_trilinear(xi)
            r = N @ X - point
            jac = X.T @ dN
            step = np.linalg.solve(jac, r)
            xi -= step
            if np.linalg.norm(step) < 1e-14:
                break
        if np.all(np.abs(xi) <= 1.0 + tol):
            return int(c), np.clip(xi, -1.0, 1.0)
    raise MeshError(f"point {point.tolist()} is not inside the mesh")


class PointEvaluator:
    """Interpolates nodal vector fields at fixed material points."""

    def __init__(self, tri, points):
        self.points = np.asarray(points, dtype=float).reshape(-1, 3)
        located = [locate_point(tri, p) for p in self.points]
        self.vertices = np.array([tri.cells[c] for c, _ in located], dtype=np.int64).reshape(-1, 8)
        self.weights = np.array([shape_trilinear(xi)[0] for _, xi in located]).reshape(-1, 8)

    def __call__(self, u):
        u = np.asarray(u, dtype=float).reshape(-1, 3)
        return np.einsum("pa,pai->pi", self.weights, u[self.vertices])
