"""Incremental Newton-Raphson driver with Jacobi-preconditioned CG.

Each time step ``n`` moves the load factor from ``(n-1)/N`` to ``n/N``.
Within a step the Newton iterations are::

    CST    prescribed increments (first iteration only, zero afterwards)
    ASS_v  assemble volume residual and tangent
    ASS_s  assemble surface residual and tangent (through the DOF map)
    SLV    solve the condensed linear system
    UCP_v  update volume continuum points at the new displacement
    UCP_s  update surface continuum points

The step has converged when the residual norm and the increment norm, both
restricted to unconstrained DOFs and normalised by their values in the
first iteration of the step, are below ``tol_nl``.  In the first iteration
the residual norm is that of the condensed right-hand side, so a purely
displacement-driven step starts from a non-zero reference.  A reference norm
at round-off level (below ``1e-13`` of its natural scale: largest stiffness
entry times mesh size, or mesh size) is replaced by that scale, so an
unloaded step converges at once instead of comparing round-off with
round-off.
"""

import json
import sys
import time
from collections import OrderedDict
from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse.linalg as spla

from .assembly import apply_constraints
from .errors import ConvergenceError, InvertedCellError, LinearSolverError

__all__ = [
    "TimeStepper",
    "NewtonSettings",
    "IterationRecord",
    "Timer",
    "solve_linear",
    "NewtonSolver",
    "format_timing_table",
]


@dataclass(frozen=True)
class TimeStepper:
    """Uniform pseudo-time stepping on ``[0, T]`` with ``n_steps`` intervals."""

    n_steps: int = 1
    end_time: float = 1.0

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("number of steps must be >= 1")
        if not self.end_time > 0.0:
            raise ValueError("end time must be positive")

    @property
    def dt(self):
        return self.end_time / self.n_steps

    def time(self, step):
        return step * self.dt

    def load_factor(self, step):
        return step / self.n_steps


@dataclass
class NewtonSettings:
    tol_nl: float = 1e-9
    tol_lin: float = 1e-6
    max_lin_factor: int = 10
    max_newton: int = 15
    divergence_count: int = 3
    linear_solver: str = "cg"

    def __post_init__(self):
        if self.linear_solver not in ("cg", "direct"):
            raise ValueError(f"unknown linear solver {self.linear_solver!r}")


@dataclass
class IterationRecord:
    step: int
    iteration: int
    lin_it: int
    lin_res: float
    r_norm: float
    du_norm: float

    def to_json(self):
        return json.dumps(asdict(self))


class Timer:
    """Accumulated wall time and call counts per named section."""

    def __init__(self):
        self.sections = OrderedDict()
        self.start = time.perf_counter()

    def section(self, name):
        timer = self

        class _Ctx:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                calls, wall = timer.sections.get(name, (0, 0.0))
                timer.sections[name] = (calls + 1, wall + time.perf_counter() - self.t0)

        return _Ctx()

    def total(self):
        return time.perf_counter() - self.start


def format_timing_table(timer):
    """Wall-time summary per section, sorted by name."""
    total = timer.total()
    top = "+" + "-" * 45 + "+" + "-" * 12 + "+" + "-" * 12 + "+"
    bar = "+" + "-" * 33 + "+" + "-" * 11 + "+" + "-" * 12 + "+" + "-" * 12 + "+"
    lines = [
        top,
        f"| {'Total wallclock time elapsed since start':<44}| {total:9.3e}s |{'':12}|",
        f"|{'':45}|{'':12}|{'':12}|",
        f"| {'Section':<32}| {'no. calls':>9} | {'wall time':>10} | {'% of total':>10} |",
        bar,
    ]
    for name in sorted(timer.sections):
        calls, wall = timer.sections[name]
        pct = 100.0 * wall / total if total > 0 else 0.0
        lines.append(f"| {name:<32}| {calls:9d} | {wall:9.3e}s | {pct:9.2f}% |")
    lines.append(bar)
    return "\n".join(lines)


def _pcg(A, b, tol, max_iter):
    bnorm = np.linalg.norm(b)
    x = np.zeros_like(b)
    if bnorm == 0.0:
        return x, 0, 0.0
    diag = A.diagonal()
    minv = np.where(diag != 0.0, 1.0 / np.where(diag != 0.0, diag, 1.0), 1.0)
    r = b.copy()
    z = minv * r
    p = z.copy()
    rz = r @ z
    rnorm = bnorm
    for k in range(1, max_iter + 1):
        Ap = A @ p
        alpha = rz / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        rnorm = np.linalg.norm(r)
        if rnorm <= tol * bnorm:
            return x, k, rnorm
        z = minv * r
        rz_new = r @ z
        p *= rz_new / rz
        p += z
        rz = rz_new
    raise LinearSolverError(max_iter, rnorm / bnorm)


def solve_linear(A, b, tol=1e-6, max_iter=None, method="cg"):
    """Solve ``A x = b`` for symmetric positive definite ``A``.

    Returns ``(x, iterations, final_residual_norm)``.  ``method="cg"`` is
    conjugate gradients with Jacobi preconditioning, stopped at
    ``|r| <= tol |b|``; ``method="direct"`` uses a sparse LU factorisation
    (SuperLU, minimum-degree ordering on ``A + A^t``) and reports one
    iteration.
    """
    b = np.asarray(b, dtype=float)
    if method == "direct":
        # symmetric fill-reducing ordering; far cheaper than COLAMD here
        lu = spla.splu(A.tocsc(), permc_spec="MMD_AT_PLUS_A", options=dict(SymmetricMode=True))
        x = lu.solve(b)
        return x, 1, float(np.linalg.norm(A @ x - b))
    if max_iter is None:
        max_iter = 10 * len(b)
    return _pcg(A, b, tol, max_iter)


HEADER = (
    "_" * 85
    + "\n               SOLVER STEP                 |  LIN_IT  LIN_RES   | |R_NORM|  |dU_NORM|\n"
    + "_" * 85
)


class NewtonSolver:
    """Drive a :class:`~surfelastic.assembly.SurfaceElasticSystem` through load steps.

    ``out`` receives the Listing-style convergence table; ``record`` is
    called with every :class:`IterationRecord` (e.g. to write JSON lines).
    """

    def __init__(self, system, settings=None, timer=None, out=sys.stdout, record=None):
        self.system = system
        self.settings = settings or NewtonSettings()
        self.timer = timer or Timer()
        self.out = out
        self.record = record
        self.history = []

    def _print(self, text):
        if self.out is not None:
            print(text, file=self.out)

    def solve_timestep(self, u, step, stepper):
        """Advance ``u`` (converged at ``step - 1``) to ``step``; returns the new ``u``.

        Raises :class:`ConvergenceError` with the step history when Newton
        diverges or reaches its iteration cap, and propagates
        :class:`InvertedCellError` with step and iteration context.
        """
        sys_ = self.system
        s = self.settings
        u = np.array(u, dtype=float, copy=True)
        load = stepper.load_factor(step)
        cdofs, targets = sys_.dofs.prescribed_values(load)
        free = sys_.dofs.free_mask
        steps_hist = []

        self._print(f"\nTimestep {step} @ {stepper.time(step):g}s")
        self._print(HEADER)
        iteration = 0
        length = sys_.tri.bounding_box_diagonal()
        try:
            with self.timer.section("Update CP data"):
                sys_.update_points(u, load)
            r0 = du0 = None
            increases = 0
            for iteration in range(s.max_newton + 1):
                incr = targets - u[cdofs] if iteration == 0 else np.zeros(len(cdofs))
                with self.timer.section("Assemble system volume"):
                    Av, Rv = sys_.assemble_volume()
                with self.timer.section("Assemble tangent surface"):
                    As, Rs = sys_.assemble_surface()
                R = Rv + Rs - load * sys_.f_ext
                A, b = apply_constraints(sys_.matrix(Av + As), -R, cdofs, incr)
                r = float(np.linalg.norm(b[free]))
                if r0 is None:
                    scale = abs(A.data).max() * length
                    r0 = r if r > 1e-13 * scale else scale
                with self.timer.section("Linear solver"):
                    du, lin_it, lin_res = solve_linear(
                        A, b, s.tol_lin, s.max_lin_factor * len(b), s.linear_solver
                    )
                du[cdofs] = incr
                dun = float(np.linalg.norm(du[free]))
                if du0 is None:
                    du0 = dun if dun > 1e-13 * length else length
                u += du
                with self.timer.section("Update CP data"):
                    sys_.update_volume_points(u)
                    sys_.update_surface_points(u)
                rec = IterationRecord(step, iteration, lin_it, lin_res, r / r0, dun / du0)
                steps_hist.append(rec)
                self.history.append(rec)
                if self.record is not None:
                    self.record(rec)
                self._print(
                    f"{iteration:3d}  CST  ASS_v  ASS_s  SLV  UCP_v  UCP_s  | "
                    f"{lin_it:7d}  {lin_res:.3e}  {rec.r_norm:.3e}  {rec.du_norm:.3e}"
                )
                if rec.r_norm < s.tol_nl and rec.du_norm < s.tol_nl:
                    self._print(" CONVERGED! ")
                    self._print("_" * 85)
                    self._print(
                        f"Relative errors:\n\tSolution: |dU_NORM|\t{rec.du_norm:.3e}"
                        f"\n\tResidual: |R_NORM|\t{rec.r_norm:.3e}"
                    )
                    return u
                if len(steps_hist) > 1 and rec.r_norm > steps_hist[-2].r_norm:
                    increases += 1
                    if increases >= s.divergence_count:
                        raise ConvergenceError(
                            f"Newton diverged in step {step}", steps_hist, step
                        )
                else:
                    increases = 0
        except InvertedCellError as exc:
            raise exc.with_context(step=step, iteration=iteration)
        raise ConvergenceError(
            f"Newton did not converge in {s.max_newton + 1} iterations in step {step}",
            steps_hist,
            step,
        )

    def step_history(self, step):
        return [r for r in self.history if r.step == step]
