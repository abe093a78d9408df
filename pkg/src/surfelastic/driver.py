"""End-to-end run of a parameter file: mesh, system, load steps, output."""

import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .assembly import SurfaceElasticSystem
from .constitutive import SurfaceMaterial, VolumeMaterial
from .errors import ConfigError, MeshError, SurfelasticError
from .io.generators import build_generator_mesh
from .io.mesh_io import read_mesh
from .io.vtu import write_pvd, write_step
from .mesh import DofMap, PointEvaluator, mark_dirichlet
from .solver import NewtonSettings, NewtonSolver, TimeStepper, Timer, format_timing_table

__all__ = ["RunResult", "build_triangulation", "build_system", "run"]


@dataclass
class RunResult:
    u: np.ndarray
    system: SurfaceElasticSystem
    history: list
    monitors: np.ndarray                 # (n_steps + 1, n_points, 3)
    energy_norms: list = field(default_factory=list)   # per step (volume, surface)
    files: list = field(default_factory=list)
    timer: Timer = None


def build_triangulation(cfg):
    """Mesh from the file or generator named in ``cfg``."""
    if cfg.mesh.file is not None:
        path = cfg.mesh_path()
        if not os.path.isfile(path):
            raise ConfigError(f"mesh file {path!r} does not exist")
        return read_mesh(path)
    try:
        tri = build_generator_mesh(cfg.mesh.generator, cfg.mesh.parameters)
    except MeshError as exc:
        if "parameter" in str(exc):
            raise ConfigError(str(exc)) from None
        raise
    tri.validate()
    return tri


def build_system(cfg, tri):
    """Materials, constraints and the discrete system for ``cfg`` on ``tri``."""
    missing = sorted(set(cfg.referenced_ids()) - tri.boundary_ids)
    if missing:
        raise ConfigError(
            f"boundary id(s) {missing} do not exist on the mesh (available: {sorted(tri.boundary_ids)})"
        )
    vmat = VolumeMaterial(cfg.volume.lam, cfg.volume.mu, allow_nonphysical=cfg.surface.allow_nonphysical)
    lam_s, mu_s = cfg.surface_moduli()
    smat = SurfaceMaterial(lam_s, mu_s, cfg.surface.gamma, allow_nonphysical=cfg.surface.allow_nonphysical)
    dofs = DofMap(tri.n_vertices)
    for d in cfg.boundary.dirichlet:
        dofs = mark_dirichlet(dofs, tri.vertices, tri.vertices_on_boundary([d.boundary_id]), d.components, d.value)
    return SurfaceElasticSystem(
        tri,
        dofs,
        vmat,
        smat,
        energetic_ids=cfg.boundary.energetic,
        tractions={b: t for b, t in cfg.boundary.traction},
        body_force=cfg.boundary.body_force,
        ramp_surface_tension=cfg.surface.ramp_surface_tension,
        chunk_size=cfg.solver.chunk_size,
        n_workers=cfg.solver.threads,
    )


def _settings(cfg):
    s = cfg.solver
    return NewtonSettings(
        tol_nl=s.tol_nl,
        tol_lin=s.tol_lin,
        max_lin_factor=s.max_lin_factor,
        max_newton=s.max_newton,
        divergence_count=s.divergence_count,
        linear_solver=s.linear_solver,
    )


def run(cfg, out=sys.stdout, output_dir=None, write_output=True):
    """Solve all load steps of ``cfg``.

    Writes (unless ``write_output`` is false) the per-step volume/surface
    VTU files, a ``.pvd`` collection and a JSON-lines log to the output
    directory, and prints the convergence tables and the timing summary to
    ``out``.  Solver failures propagate after being logged.
    """
    timer = Timer()
    outdir = output_dir or os.path.join(cfg.base_dir, cfg.output.directory)
    log = None
    if write_output:
        os.makedirs(outdir, exist_ok=True)
        log = open(os.path.join(outdir, cfg.output.log), "w")

    def emit(event, **data):
        if log is not None:
            log.write(json.dumps({"event": event, **data}) + "\n")
            log.flush()

    try:
        with timer.section("Construct grid"):
            tri = build_triangulation(cfg)
        with timer.section("Setup system"):
            system = build_system(cfg, tri)
            monitor = PointEvaluator(tri, cfg.output.monitor) if cfg.output.monitor else None
        emit(
            "setup",
            n_cells=tri.n_cells,
            n_vertices=tri.n_vertices,
            n_surface_cells=system.surf.n_cells,
            n_dofs=system.n_dofs,
            n_constrained=len(system.dofs.constrained_dofs),
        )
        stepper = TimeStepper(cfg.time.steps, cfg.time.end_time)

        def record(rec):
            emit("iteration", **json.loads(rec.to_json()))

        newton = NewtonSolver(system, _settings(cfg), timer, out=out, record=record)
        u = np.zeros(system.n_dofs)
        npts = len(cfg.output.monitor)
        monitors = np.zeros((stepper.n_steps + 1, npts, 3))
        result = RunResult(u, system, newton.history, monitors, timer=timer)
        pvd = []
        for step in range(1, stepper.n_steps + 1):
            u = newton.solve_timestep(u, step, stepper)
            with timer.section("Postprocess results"):
                norms = system.energy_norms()
                result.energy_norms.append(norms)
                if monitor is not None:
                    monitors[step] = monitor(u)
                if write_output and cfg.output.write_vtu:
                    files = write_step(outdir, step, system, u, cfg.output.quadrature_data)
                    result.files.extend(files)
                    pvd.append((stepper.time(step), files))
            emit(
                "step",
                step=step,
                time=stepper.time(step),
                load_factor=stepper.load_factor(step),
                newton_iterations=len(newton.step_history(step)),
                energy_norm_volume=norms[0],
                energy_norm_surface=norms[1],
                monitors=monitors[step].tolist(),
            )
            if out is not None and npts:
                for p, d in zip(cfg.output.monitor, monitors[step]):
                    print(f"  point {p}: displacement {d.tolist()} |u| = {np.linalg.norm(d):.6e}", file=out)
        if write_output and pvd and cfg.output.write_vtu:
            write_pvd(os.path.join(outdir, "solution-volume.pvd"), [(t, f[0]) for t, f in pvd])
            write_pvd(os.path.join(outdir, "solution-surface.pvd"), [(t, f[1]) for t, f in pvd])
        result.u = u
        if out is not None:
            print(format_timing_table(timer), file=out)
        emit("finished", wall_time=timer.total())
        return result
    except SurfelasticError as exc:
        info = exc.as_dict() if hasattr(exc, "as_dict") else {}
        emit("error", type=type(exc).__name__, message=str(exc), **info)
        raise
    finally:
        if log is not None:
            log.close()
