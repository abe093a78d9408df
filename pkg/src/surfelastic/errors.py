"""Exception types shared across the package."""


class SurfelasticError(Exception):
    """Base class for all package errors."""


class MeshError(SurfelasticError):
    """Invalid or corrupted mesh data."""


class InvertedCellError(SurfelasticError):
    """A volume cell has a non-positive Jacobian at a quadrature point.

    Carries enough context to locate the failure: the cell index, the
    quadrature point index and the offending Jacobian ratio.  The solver adds
    the time step and Newton iteration when it propagates the error.
    """

    def __init__(self, cell, qp, value, step=None, iteration=None):
        self.cell = int(cell)
        self.qp = int(qp)
        self.value = float(value)
        self.step = step
        self.iteration = iteration
        super().__init__(self._message())

    def _message(self):
        msg = (
            f"negative Jacobian determinant at quadrature point {self.qp} "
            f"of cell {self.cell} (J = {self.value:.3e})"
        )
        if self.step is not None:
            msg += f" in time step {self.step}"
        if self.iteration is not None:
            msg += f", Newton iteration {self.iteration}"
        return msg

    def with_context(self, step=None, iteration=None):
        self.step = step
        self.iteration = iteration
        self.args = (self._message(),)
        return self

    def as_dict(self):
        return {
            "error": "inverted_cell",
            "cell": self.cell,
            "qp": self.qp,
            "J": self.value,
            "step": self.step,
            "iteration": self.iteration,
        }


class DegenerateSurfaceCellError(SurfelasticError):
    """A surface cell has (numerically) zero area in some configuration."""

    def __init__(self, cell, qp):
        self.cell = int(cell)
        self.qp = int(qp)
        super().__init__(f"degenerate surface cell {self.cell} at quadrature point {self.qp}")


class InadmissibleStateError(SurfelasticError):
    """A constitutive routine was called with J <= 0."""


class LinearSolverError(SurfelasticError):
    """The iterative linear solver did not reach its tolerance."""

    def __init__(self, iterations, residual):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"linear solver did not converge in {iterations} iterations "
            f"(relative residual {residual:.3e})"
        )


class ConvergenceError(SurfelasticError):
    """The Newton scheme diverged or hit its iteration cap."""

    def __init__(self, message, history=None, step=None):
        self.history = list(history or [])
        self.step = step
        super().__init__(message)


class ConfigError(SurfelasticError):
    """Invalid parameter file; ``line`` is 1-based when known."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)

    def as_dict(self):
        return {"line": self.line, "path": self.path}
