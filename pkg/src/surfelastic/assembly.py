"""Global residual and tangent of the coupled volume/surface problem.

The surface is material: its motion is the restriction of the volume motion.
Surface cell contributions are therefore computed on the (independently
numbered) surface mesh and scattered straight into the volume system through
the surface-to-volume DOF map; there is a single global matrix.

Element contributions, with ``B`` the gradient operator of the shape
functions::

    R_e = int  B^t : P  dV           K_e = int  B^t : A : B  dV
    R^_e = int B^^t : P^ dA - int Phi^ b^ dA    K^_e = int B^^t : A^ : B^ dA

Cells are processed in chunks; chunks may be evaluated by a thread pool and
are always scattered in cell order, so parallel and serial assembly give the
same numbers.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .constitutive import (
    ContinuumPoints,
    SurfaceMaterial,
    surface_energy,
    surface_stress,
    surface_tangent,
    volume_energy,
    volume_stress,
    volume_tangent,
)
from .fem_basis import gauss_rule, reinit_material, shape_bilinear, shape_trilinear, spatial_view
from .mesh import (
    FACE_VERTICES,
    build_surface_to_volume_dof_map,
    extract_boundary_mesh,
)
from .surface_geometry import build_frame, shape_gradients

__all__ = ["SurfaceElasticSystem", "apply_constraints", "energy_norms"]


def _element_residual(grad, P, w):
    """``R[c, 3 a + i] = sum_q P[c, q, i, j] grad[c, q, a, j] w[c, q]``."""
    Re = np.einsum("cqaj,cqij,cq->cai", grad, P, w, optimize=True)
    return Re.reshape(len(grad), -1)


def _element_matrix(grad, A, w):
    """``K[c, 3 a + i, 3 b + k] = sum_q grad[a, j] A[i, j, k, l] grad[b, l] w``.

    Two batched matrix products instead of ``B^t A B`` with the sparse
    ``B[3 i + j, 3 a + k] = delta_ik grad[a, j]``.
    """
    c, q, n, _ = grad.shape
    Aw = A * w[..., None, None, None, None]
    # T[a, (i, k, l)] = grad[a, j] A[i, j, k, l]
    T = grad @ Aw.transpose(0, 1, 3, 2, 4, 5).reshape(c, q, 3, 27)
    # K[(a, i, k), b] = T[(a, i, k), l] grad[b, l], summed over quadrature points
    K = (T.reshape(c, q, 9 * n, 3) @ grad.transpose(0, 1, 3, 2)).sum(axis=1)
    K = K.reshape(c, n, 3, 3, n).transpose(0, 1, 2, 4, 3)
    return K.reshape(c, 3 * n, 3 * n)


def _chunks(n, size):
    return [slice(s, min(s + size, n)) for s in range(0, n, size)]


@dataclass
class AssemblyTimes:
    volume: float = 0.0
    surface: float = 0.0


class SurfaceElasticSystem:
    """Discrete coupled problem on a hexahedral mesh with energetic faces.

    Parameters
    ----------
    tri : Triangulation
    dofs : DofMap
    volume_material : VolumeMaterial
    surface_material : SurfaceMaterial
    energetic_ids : iterable of int
        Boundary ids whose faces carry surface energy.
    tractions : dict, optional
        ``{boundary_id: (3,) traction}``, dead load per unit reference area at
        load factor 1.
    body_force : (3,) array, optional
        Dead body force per unit reference volume at load factor 1.
    ramp_surface_tension : bool
        Scale the surface tension with the load factor.
    chunk_size, n_workers : int
        Cells per assembly task and number of threads.
    """

    def __init__(
        self,
        tri,
        dofs,
        volume_material,
        surface_material=None,
        energetic_ids=(),
        tractions=None,
        body_force=None,
        ramp_surface_tension=False,
        chunk_size=1024,
        n_workers=1,
    ):
        self.tri = tri
        self.dofs = dofs
        self.volume_material = volume_material
        self.surface_material = surface_material or SurfaceMaterial()
        self.energetic_ids = sorted(set(int(b) for b in energetic_ids))
        self.tractions = {int(k): np.asarray(v, dtype=float) for k, v in (tractions or {}).items()}
        self.body_force = None if body_force is None else np.asarray(body_force, dtype=float)
        self.ramp_surface_tension = ramp_surface_tension
        self.chunk_size = int(chunk_size)
        self.n_workers = int(n_workers)

        self.rule_v = gauss_rule(3)
        self.rule_s = gauss_rule(2)
        self.surf = extract_boundary_mesh(tri, self.energetic_ids)
        self.s2v = build_surface_to_volume_dof_map(tri, self.surf)

        self._setup_volume()
        self._setup_surface()
        self._setup_sparsity()
        self._setup_external_forces()
        self.volume_points = None
        self.surface_points = None
        self.load_factor = 0.0

    # ------------------------------------------------------------------ setup
    @property
    def n_dofs(self):
        return self.dofs.n_dofs

    def _setup_volume(self):
        tri = self.tri
        X = tri.vertices[tri.cells]
        cv = reinit_material(X, np.zeros_like(X), self.rule_v)
        self.grad0_v = cv.grad0
        self.detJ0_v = cv.detJ0
        self.JxW_v = cv.JxW
        self.N_v = cv.N
        self.edofs_v = (3 * tri.cells[:, :, None] + np.arange(3)).reshape(-1, 24)

    def _setup_surface(self):
        surf = self.surf
        N, dN = shape_bilinear(self.rule_s.points)
        self.N_s = N
        self.dN_s = dN
        if surf.n_cells == 0:
            self.edofs_s = np.zeros((0, 12), dtype=np.int64)
            self.grad0_s = np.zeros((0, len(N), 4, 3))
            self.JxW_s = np.zeros((0, len(N)))
            self.Nrm_s = np.zeros((0, len(N), 3))
            return
        Xs = surf.vertices[surf.cells]
        frame = build_frame(Xs, dN, surf.orientation)
        self.frame0_s = frame
        self.grad0_s = shape_gradients(frame, dN)
        self.JxW_s = frame.area * self.rule_s.weights
        self.Nrm_s = frame.normal
        sdofs = 3 * surf.cells[:, :, None] + np.arange(3)
        self.edofs_s = self.s2v.volume_dof[sdofs].reshape(-1, 12)
        self.svert_vol = self.s2v.volume_dof[0::3] // 3

    def _setup_sparsity(self):
        n = self.n_dofs
        kv = (self.edofs_v[:, :, None] * n + self.edofs_v[:, None, :]).ravel()
        ks = (self.edofs_s[:, :, None] * n + self.edofs_s[:, None, :]).ravel()
        keys, inv = np.unique(np.concatenate([kv, ks]), return_inverse=True)
        inv = inv.ravel()
        self.pos_v = inv[: len(kv)]
        self.pos_s = inv[len(kv):]
        rows = keys // n
        cols = keys % n
        self.pattern_rows = rows
        self.pattern_cols = cols
        self.indptr = np.concatenate([[0], np.cumsum(np.bincount(rows, minlength=n))])
        self.indices = cols
        self.nnz = len(keys)
        self.diag_pos = np.searchsorted(keys, np.arange(n) * n + np.arange(n))

    def _setup_external_forces(self):
        f = np.zeros(self.n_dofs)
        tri = self.tri
        for bid, t in self.tractions.items():
            faces = tri.faces_with_id(bid)
            if len(faces) == 0:
                continue
            verts = np.take_along_axis(tri.cells[faces[:, 0]], FACE_VERTICES[faces[:, 1]], axis=1)
            frame = build_frame(tri.vertices[verts], self.dN_s)
            w = frame.area * self.rule_s.weights            # (nf, nq)
            nodal = np.einsum("fq,qa->fa", w, self.N_s)     # int Phi^a dA
            for k in range(3):
                np.add.at(f, 3 * verts.ravel() + k, (nodal * t[k]).ravel())
        if self.body_force is not None and np.any(self.body_force):
            nodal = np.einsum("cq,qa->ca", self.JxW_v, self.N_v)
            for k in range(3):
                np.add.at(f, 3 * tri.cells.ravel() + k, (nodal * self.body_force[k]).ravel())
        self.f_ext = f

    # ------------------------------------------------------------ evaluation
    def surface_material_at(self, load_factor):
        if self.ramp_surface_tension:
            return self.surface_material.scaled_tension(load_factor)
        return self.surface_material

    def _map(self, fn, n):
        parts = _chunks(n, self.chunk_size)
        if self.n_workers > 1 and len(parts) > 1:
            with ThreadPoolExecutor(self.n_workers) as pool:
                return list(pool.map(fn, parts))
        return [fn(s) for s in parts]

    def update_points(self, u, load_factor=None):
        """Recompute kinematics and stresses at every quadrature point.

        Raises :class:`InvertedCellError` for an inverted volume cell.
        """
        self.update_volume_points(u)
        self.update_surface_points(u, load_factor)

    def update_volume_points(self, u):
        u = np.asarray(u, dtype=float).reshape(-1, 3)
        tri = self.tri
        mat = self.volume_material

        def work(s):
            cells = tri.cells[s]
            X = tri.vertices[cells]
            x = X + u[cells]
            detJt, gradt = spatial_view(x, self.rule_v, np.arange(s.start, s.stop), self.detJ0_v[s])
            F = np.einsum("cai,cqaj->cqij", x, self.grad0_v[s])
            f = np.einsum("cai,cqaj->cqij", X, gradt)
            J = detJt / self.detJ0_v[s]
            return F, f, J, volume_energy(F, f, J, mat), volume_stress(F, f, J, mat)

        parts = self._map(work, tri.n_cells)
        F, f, J, psi, P = (np.concatenate(p) for p in zip(*parts))
        self.volume_points = ContinuumPoints("volume", F, f, J, psi, P, self.JxW_v)
        return self.volume_points

    def update_surface_points(self, u, load_factor=None):
        if load_factor is not None:
            self.load_factor = load_factor
        surf = self.surf
        nq = self.rule_s.n_points
        if surf.n_cells == 0:
            self.surface_points = ContinuumPoints.empty("surface", nq)
            return self.surface_points
        u = np.asarray(u, dtype=float).reshape(-1, 3)
        mat = self.surface_material_at(self.load_factor)
        Xv = surf.vertices
        uv = u[self.svert_vol]

        def work(s):
            cells = surf.cells[s]
            X = Xv[cells]
            x = X + uv[cells]
            spa = build_frame(x, self.dN_s, surf.orientation[s], np.arange(s.start, s.stop))
            gradt = shape_gradients(spa, self.dN_s)
            F = np.einsum("sai,sqaj->sqij", x, self.grad0_s[s])
            f = np.einsum("sai,sqaj->sqij", X, gradt)
            J = spa.area / self.frame0_s.area[s]
            return F, f, J, spa.normal, surface_energy(F, f, J, mat), surface_stress(F, f, J, mat)

        parts = self._map(work, surf.n_cells)
        F, f, J, n, psi, P = (np.concatenate(p) for p in zip(*parts))
        self.surface_points = ContinuumPoints(
            "surface", F, f, J, psi, P, self.JxW_s, N=self.Nrm_s, n=n
        )
        return self.surface_points

    def assemble_volume(self, with_matrix=True):
        """Element residuals (and matrices) of all volume cells, scattered.

        Returns ``(matrix_values, residual)`` where ``matrix_values`` lives on
        the global sparsity pattern (``None`` when ``with_matrix`` is false).
        """
        pts = self.volume_points
        mat = self.volume_material

        def work(s):
            grad, w = self.grad0_v[s], self.JxW_v[s]
            Re = _element_residual(grad, pts.P[s], w)
            if not with_matrix:
                return Re, None
            A = volume_tangent(pts.F[s], pts.f[s], pts.J[s], mat)
            return Re, _element_matrix(grad, A, w)

        return self._scatter(self._map(work, self.tri.n_cells), self.edofs_v, self.pos_v)

    def assemble_surface(self, with_matrix=True):
        """Surface cell residuals (and matrices) injected into volume DOFs."""
        pts = self.surface_points
        if self.surf.n_cells == 0:
            return (np.zeros(self.nnz) if with_matrix else None), np.zeros(self.n_dofs)
        mat = self.surface_material_at(self.load_factor)

        def work(s):
            grad, w = self.grad0_s[s], self.JxW_s[s]
            Re = _element_residual(grad, pts.P[s], w)
            if not with_matrix:
                return Re, None
            A = surface_tangent(pts.F[s], pts.f[s], pts.J[s], pts.N[s], pts.n[s], mat)
            return Re, _element_matrix(grad, A, w)

        return self._scatter(self._map(work, self.surf.n_cells), self.edofs_s, self.pos_s)

    def _scatter(self, parts, edofs, pos):
        Re = np.concatenate([p[0] for p in parts])
        R = np.bincount(edofs.ravel(), weights=Re.ravel(), minlength=self.n_dofs)
        if parts[0][1] is None:
            return None, R
        Ke = np.concatenate([p[1] for p in parts])
        vals = np.bincount(pos, weights=Ke.ravel(), minlength=self.nnz)
        return vals, R

    def matrix(self, values):
        return sp.csr_matrix((values, self.indices, self.indptr), shape=(self.n_dofs, self.n_dofs))

    def assemble(self, u, load_factor=1.0, with_matrix=True):
        """Update the continuum points at ``u`` and assemble ``(A, R)``.

        ``R`` is the full residual (internal minus external forces); ``A`` is
        ``None`` when ``with_matrix`` is false.
        """
        self.update_points(u, load_factor)
        Av, Rv = self.assemble_volume(with_matrix)
        As, Rs = self.assemble_surface(with_matrix)
        R = Rv + Rs - load_factor * self.f_ext
        A = self.matrix(Av + As) if with_matrix else None
        return A, R

    def residual(self, u, load_factor=1.0):
        return self.assemble(u, load_factor, with_matrix=False)[1]

    def energy_norms(self):
        return energy_norms(self.volume_points, self.surface_points)

    def total_energy(self):
        """Stored energy of volume and surface (for post-processing)."""
        Ev = float(np.sum(self.volume_points.psi * self.volume_points.JxW))
        Es = float(np.sum(self.surface_points.psi * self.surface_points.JxW))
        return Ev, Es


def energy_norms(volume_points, surface_points):
    """``(int (F:P)^2 dV)^(1/2)`` and ``(int (F^:P^)^2 dA)^(1/2)``."""

    def norm(pts):
        if pts is None or pts.F.size == 0:
            return 0.0
        fp = np.einsum("cqij,cqij->cq", pts.F, pts.P)
        return float(np.sqrt(np.sum(fp**2 * pts.JxW)))

    return norm(volume_points), norm(surface_points)


def apply_constraints(A, rhs, constrained, increments):
    """Symmetric elimination of prescribed increments.

    Returns a new ``(A, b)``: the columns of constrained DOFs are moved to the
    right-hand side, their rows and columns are replaced by the identity and
    ``b`` holds the prescribed increment there.

    Parameters
    ----------
    A : scipy.sparse matrix
    rhs : ndarray
        Right-hand side before elimination (typically ``-R``).
    constrained : int array
    increments : float array
        Prescribed increments of the constrained DOFs (zero in corrector
        iterations).
    """
    A = sp.csr_matrix(A, copy=True)
    b = np.array(rhs, dtype=float, copy=True)
    constrained = np.asarray(constrained, dtype=np.int64)
    if len(constrained) == 0:
        return A, b
    du = np.zeros(A.shape[0])
    du[constrained] = increments
    if np.any(increments):
        b -= A @ du
    mask = np.zeros(A.shape[0], dtype=bool)
    mask[constrained] = True
    rows = np.repeat(np.arange(A.shape[0]), np.diff(A.indptr))
    kill = mask[rows] | mask[A.indices]
    A.data[kill] = 0.0
    A.setdiag(np.where(mask, 1.0, A.diagonal()))
    b[constrained] = du[constrained]
    return A, b
