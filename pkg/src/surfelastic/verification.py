"""Self-verification suites (also run by ``surfelastic verify``).

Every suite returns a :class:`SuiteResult` holding the number of checks, the
number that failed and the worst measured error against its tolerance.
"""

from dataclasses import dataclass

import numpy as np

from .assembly import SurfaceElasticSystem
from .constitutive import (
    SurfaceMaterial,
    VolumeMaterial,
    surface_energy,
    surface_stress,
    surface_tangent,
    volume_energy,
    volume_stress,
    volume_tangent,
)
from .fem_basis import gauss_rule, interpolate_F, interpolate_f, reinit_material, shape_bilinear
from .io.generators import generate_box
from .mesh import DofMap, mark_dirichlet
from .solver import NewtonSettings, NewtonSolver, TimeStepper
from .surface_geometry import (
    build_frame,
    surface_deformation_gradient,
    surface_det_formula,
    surface_determinant,
    surface_inverse,
)

__all__ = [
    "SuiteResult",
    "random_deformation_gradient",
    "random_rotation",
    "random_surface_state",
    "volume_tangent_errors",
    "surface_tangent_errors",
    "global_consistency_error",
    "kinematics_errors",
    "patch_test",
    "reference_residual",
    "objectivity_errors",
    "self_equilibrium",
    "run_all",
]


@dataclass
class SuiteResult:
    name: str
    checks: int
    failures: int
    worst: float
    tol: float

    @property
    def passed(self):
        return self.failures == 0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (
            f"[{status}] {self.name}: {self.checks - self.failures}/{self.checks} passed "
            f"(worst {self.worst:.3e}, tol {self.tol:.0e})"
        )


def _suite(name, errors, tol):
    errors = np.atleast_1d(np.asarray(errors, dtype=float))
    return SuiteResult(name, len(errors), int(np.sum(~(errors < tol))), float(np.max(errors)), tol)


# ----------------------------------------------------------- random states
def random_deformation_gradient(rng, scale=0.3, min_det=0.2):
    while True:
        F = np.eye(3) + scale * rng.standard_normal((3, 3))
        if np.linalg.det(F) > min_det:
            return F


def random_rotation(rng):
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


def _unit(rng):
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


def _tangent_basis(N):
    a = np.array([1.0, 0.0, 0.0]) if abs(N[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    t1 = np.cross(N, a)
    t1 /= np.linalg.norm(t1)
    return t1, np.cross(N, t1)


def surface_state_from(Fs, N):
    """``(f^, J^, n)`` of a superficial ``F^`` on the plane with normal ``N``.

    Uses the pseudo-inverse and embedded cross products only (an oracle
    independent of the covariant-basis construction).
    """
    t1, t2 = _tangent_basis(N)
    c = np.cross(Fs @ t1, Fs @ t2)
    J = np.linalg.norm(c)
    return np.linalg.pinv(Fs), J, c / J


def random_surface_state(rng):
    N = _unit(rng)
    F = random_deformation_gradient(rng)
    Fs = F @ (np.eye(3) - np.outer(N, N))
    f, J, n = surface_state_from(Fs, N)
    return Fs, f, J, N, n


# ---------------------------------------------------------------- suites
def volume_tangent_errors(samples=100, seed=0):
    """``|A - FD(P)| / |A|`` with central differences over random states."""
    rng = np.random.default_rng(seed)
    errs = []
    for _ in range(samples):
        mat = VolumeMaterial(rng.uniform(0.0, 2.0), rng.uniform(0.1, 2.0))
        F = random_deformation_gradient(rng)
        h = 1e-6 * max(1.0, np.linalg.norm(F))

        def P(Fx):
            return volume_stress(Fx, np.linalg.inv(Fx), np.linalg.det(Fx), mat)

        A = volume_tangent(F, np.linalg.inv(F), np.linalg.det(F), mat)
        fd = np.empty((3, 3, 3, 3))
        for k in range(3):
            for l in range(3):
                E = np.zeros((3, 3))
                E[k, l] = h
                fd[:, :, k, l] = (P(F + E) - P(F - E)) / (2.0 * h)
        errs.append(np.linalg.norm(A - fd) / np.linalg.norm(A))
    return np.array(errs)


def surface_tangent_errors(samples=100, seed=0, directions=3):
    """Directional-derivative mismatch of the surface tangent.

    For random superficial states and moduli in ``(0, 2]`` the tangent
    applied to a random superficial increment is compared with the central
    difference of the surface stress along that increment.
    """
    rng = np.random.default_rng(seed)
    errs = []
    for _ in range(samples):
        mat = SurfaceMaterial(*(2.0 - rng.uniform(0.0, 2.0, 3)))
        Fs, f, J, N, n = random_surface_state(rng)
        Ihat = np.eye(3) - np.outer(N, N)
        A = surface_tangent(Fs, f, np.asarray(J), N, n, mat)
        h = 1e-6 * max(1.0, np.linalg.norm(Fs))

        def P(Fx):
            fx, Jx, _ = surface_state_from(Fx, N)
            return surface_stress(Fx, fx, np.asarray(Jx), mat)

        worst = 0.0
        for _ in range(directions):
            dF = rng.standard_normal((3, 3)) @ Ihat
            exact = np.einsum("ijkl,kl->ij", A, dF)
            fd = (P(Fs + h * dF) - P(Fs - h * dF)) / (2.0 * h)
            worst = max(worst, np.linalg.norm(exact - fd) / np.linalg.norm(exact))
        errs.append(worst)
    return np.array(errs)


def _energetic_cube(n=3, seed=0, gamma=None):
    rng = np.random.default_rng(seed)
    tri = generate_box(1.0, 1.0, 1.0, n, n, n)
    lam, mu, gam = rng.uniform(0.2, 2.0, 3)
    smat = SurfaceMaterial(lam, mu, gam if gamma is None else gamma)
    sysm = SurfaceElasticSystem(
        tri, DofMap(tri.n_vertices), VolumeMaterial(1.5, 1.0), smat, energetic_ids=range(6)
    )
    return sysm, rng


def global_consistency_error(seed=0, amplitude=0.05, directions=3):
    """Relative mismatch of ``A du`` and the central difference of ``R`` on a 3x3x3 cube."""
    sysm, rng = _energetic_cube(3, seed)
    u = amplitude * rng.standard_normal(sysm.n_dofs)
    A, _ = sysm.assemble(u)
    errs = []
    for _ in range(directions):
        du = rng.standard_normal(sysm.n_dofs)
        du /= np.linalg.norm(du)
        h = 1e-6
        fd = (sysm.residual(u + h * du) - sysm.residual(u - h * du)) / (2.0 * h)
        exact = A @ du
        errs.append(np.linalg.norm(fd - exact) / np.linalg.norm(exact))
    return np.array(errs)


def _random_hex(rng, distortion=0.15):
    from .fem_basis import HEX_CORNERS

    return 0.5 * (HEX_CORNERS + 1.0) + distortion * rng.uniform(-1.0, 1.0, (8, 3))


def kinematics_errors(samples=50, seed=0):
    """Worst ``|F.f - i|``, ``|f^.F^ - I^|`` and ``J^`` ratio-vs-formula mismatch."""
    rng = np.random.default_rng(seed)
    rule3, rule2 = gauss_rule(3), gauss_rule(2)
    _, dN2 = shape_bilinear(rule2.points)
    e_vol, e_surf, e_det = [], [], []
    for _ in range(samples):
        X = _random_hex(rng)[None]
        u = 0.1 * rng.standard_normal((1, 8, 3))
        cv = reinit_material(X, u, rule3)
        F = interpolate_F(cv, X + u)
        f = interpolate_f(cv, X)
        e_vol.append(np.abs(F @ f - np.eye(3)).max())

        Xs = X[:, [0, 1, 2, 3]]
        us = u[:, [0, 1, 2, 3]]
        mat = build_frame(Xs, dN2)
        spa = build_frame(Xs + us, dN2)
        Fs = surface_deformation_gradient(mat, spa)
        fs = surface_inverse(mat, spa)
        N = mat.normal
        Ihat = np.eye(3) - N[..., :, None] * N[..., None, :]
        e_surf.append(np.abs(fs @ Fs - Ihat).max())
        ratio = surface_determinant(mat, spa)
        e_det.append(np.abs(ratio - surface_det_formula(Fs, mat)).max() / ratio.max())
    return np.array(e_vol), np.array(e_surf), np.array(e_det)


def patch_test(seed=0):
    """Affine Dirichlet data on a distorted 2x2x2 block.

    Returns ``(max nodal error, number of Newton iterations)``.
    """
    rng = np.random.default_rng(seed)
    tri = generate_box(1.0, 1.0, 1.0, 2, 2, 2)
    centre = np.flatnonzero(np.all(np.isclose(tri.vertices, 0.5), axis=1))
    tri.vertices[centre] += 0.1 * rng.uniform(-1.0, 1.0, 3)
    H = 0.1 * rng.standard_normal((3, 3))
    dofs = DofMap(tri.n_vertices)
    dofs = mark_dirichlet(dofs, tri.vertices, tri.vertices_on_boundary(range(6)), "xyz", lambda X: X @ H.T)
    sysm = SurfaceElasticSystem(
        tri, dofs, VolumeMaterial(1.5, 1.0), SurfaceMaterial(0.5, 0.3, 0.1), energetic_ids=range(6)
    )
    solver = NewtonSolver(sysm, NewtonSettings(linear_solver="direct"), out=None)
    u = solver.solve_timestep(np.zeros(sysm.n_dofs), 1, TimeStepper(1))
    err = np.abs(u.reshape(-1, 3) - tri.vertices @ H.T).max()
    return float(err), len(solver.history)


def reference_residual(seed=0):
    """``|R| / |R_scale|`` at zero load with zero surface tension.

    The scale is the residual norm produced by a unit-size perturbation, so the
    measure is relative.
    """
    rng = np.random.default_rng(seed)
    tri = generate_box(2.0, 1.0, 1.0, 3, 2, 2)
    smat = SurfaceMaterial(rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0), 0.0)
    sysm = SurfaceElasticSystem(
        tri, DofMap(tri.n_vertices), VolumeMaterial(1.5, 1.0), smat, energetic_ids=range(6),
        tractions={1: [0.0, 0.3, 0.0]}, body_force=[0.0, 0.0, -0.1],
    )
    R0 = sysm.residual(np.zeros(sysm.n_dofs), load_factor=0.0)
    scale = np.linalg.norm(sysm.residual(0.01 * rng.standard_normal(sysm.n_dofs), 0.0)) / 0.01
    return float(np.linalg.norm(R0) / scale)


def objectivity_errors(samples=100, seed=0):
    """Relative change of volume and surface energies under random rotations."""
    rng = np.random.default_rng(seed)
    ev, es = [], []
    vmat = VolumeMaterial(1.5, 1.0)
    smat = SurfaceMaterial(0.7, 0.4, 0.3)
    for _ in range(samples):
        Q = random_rotation(rng)
        F = random_deformation_gradient(rng)
        psi = volume_energy(F, np.linalg.inv(F), np.linalg.det(F), vmat)
        QF = Q @ F
        psi_q = volume_energy(QF, np.linalg.inv(QF), np.linalg.det(QF), vmat)
        ev.append(abs(psi_q - psi) / max(abs(psi), 1.0))
        Fs, f, J, N, n = random_surface_state(rng)
        QFs = Q @ Fs
        fq, Jq, _ = surface_state_from(QFs, N)
        a = surface_energy(Fs, f, np.asarray(J), smat)
        b = surface_energy(QFs, fq, np.asarray(Jq), smat)
        es.append(abs(a - b) / max(abs(a), 1.0))
    return np.array(ev), np.array(es)


def self_equilibrium(seed=0, amplitude=0.05):
    """Net force and moment of a pure-tension closed surface, relative to the force scale."""
    rng = np.random.default_rng(seed)
    tri = generate_box(1.0, 1.0, 1.0, 3, 3, 3)
    sysm = SurfaceElasticSystem(
        tri, DofMap(tri.n_vertices), VolumeMaterial(1.5, 1.0), SurfaceMaterial(0.0, 0.0, rng.uniform(0.5, 2.0)),
        energetic_ids=range(6),
    )
    u = amplitude * rng.standard_normal(sysm.n_dofs)
    sysm.update_points(u, 1.0)
    _, Rs = sysm.assemble_surface(with_matrix=False)
    Rs = Rs.reshape(-1, 3)
    x = tri.vertices + u.reshape(-1, 3)
    scale = np.abs(Rs).sum()
    force = np.linalg.norm(Rs.sum(axis=0)) / scale
    moment = np.linalg.norm(np.cross(x, Rs).sum(axis=0)) / (scale * tri.bounding_box_diagonal())
    return float(force), float(moment)


def run_all(samples=100, seed=0):
    """All suites; returns a list of :class:`SuiteResult`."""
    out = [
        _suite("volume tangent", volume_tangent_errors(samples, seed), 1e-5),
        _suite("surface tangent", surface_tangent_errors(samples, seed), 1e-5),
        _suite("global consistency", global_consistency_error(seed), 1e-5),
    ]
    kv, ks, kd = kinematics_errors(max(samples // 2, 1), seed)
    out += [
        _suite("kinematics F.f = i", kv, 1e-10),
        _suite("kinematics f^.F^ = I^", ks, 1e-10),
        _suite("kinematics J^ ratio", kd, 1e-10),
    ]
    err, its = patch_test(seed)
    out.append(_suite("patch test", [err, 0.0 if its <= 2 else 1.0], 1e-10))
    out.append(_suite("reference residual", reference_residual(seed), 1e-12))
    ov, os_ = objectivity_errors(samples, seed)
    out += [_suite("objectivity volume", ov, 1e-12), _suite("objectivity surface", os_, 1e-12)]
    out.append(_suite("self-equilibrium", list(self_equilibrium(seed)), 1e-10))
    return out
