"""Small dense tensor algebra in 3D.

All functions accept stacked arrays: a second-order tensor is any array whose
trailing shape is ``(3, 3)``, a fourth-order tensor has trailing shape
``(3, 3, 3, 3)``.  Leading axes are treated as batch axes, which is how the
assembly routines evaluate every quadrature point of a chunk of cells at once.

Fourth-order tensors are kept dense (81 entries).  The Piola tangents carry
``otimes_over``/``otimes_under`` terms and have no minor symmetry, so a Voigt
representation would be wrong.
"""

import numpy as np

__all__ = [
    "SingularTensorError",
    "identity",
    "otimes",
    "otimes_over",
    "otimes_under",
    "ddot",
    "ddot2",
    "det",
    "inv",
    "transpose",
    "outer",
    "cross",
    "identity4",
]

_SINGULAR_RTOL = 1e-14


class SingularTensorError(np.linalg.LinAlgError):
    """Raised when a second-order tensor cannot be inverted."""


def identity(shape=()):
    """Stack of 3x3 identity tensors with leading ``shape``."""
    return np.broadcast_to(np.eye(3), tuple(shape) + (3, 3)).copy()


def otimes(A, B):
    """Standard dyadic product ``[A x B]_ijkl = A_ij B_kl``."""
    return np.einsum("...ij,...kl->...ijkl", A, B)


def otimes_over(A, B):
    """``[A (x-over) B]_ijkl = A_ik B_jl``; maps X to ``A.X.B^t``."""
    return np.einsum("...ik,...jl->...ijkl", A, B)


def otimes_under(A, B):
    """``[A (x-under) B]_ijkl = A_il B_jk``; maps X to ``A.X^t.B^t``."""
    return np.einsum("...il,...jk->...ijkl", A, B)


def identity4(shape=()):
    """Fourth-order identity on second-order tensors, ``I (x-over) I``."""
    I = identity(shape)
    return otimes_over(I, I)


def ddot(C, X):
    """Double contraction of a fourth-order with a second-order tensor."""
    return np.einsum("...ijkl,...kl->...ij", C, X)


def ddot2(A, B):
    """Scalar product ``A:B = A_ij B_ij``."""
    return np.einsum("...ij,...ij->...", A, B)


def transpose(A):
    return np.swapaxes(A, -1, -2)


def outer(a, b):
    return np.einsum("...i,...j->...ij", a, b)


def cross(a, b):
    return np.cross(a, b)


def det(A):
    return np.linalg.det(A)


def inv(A):
    """Inverse of a (stack of) 3x3 tensor(s).

    A tensor is rejected as singular when ``|det A| < 1e-14 * r**3`` where
    ``r`` is its largest row norm.
    """
    A = np.asarray(A, dtype=float)
    d = np.linalg.det(A)
    scale = np.max(np.linalg.norm(A, axis=-1), axis=-1)
    bad = np.abs(d) < _SINGULAR_RTOL * scale**3
    if np.any(bad):
        raise SingularTensorError(
            f"singular tensor ({int(np.count_nonzero(bad))} of {bad.size} in batch)"
        )
    return np.linalg.inv(A)
