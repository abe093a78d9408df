"""Gaussian random rough surfaces with exponential auto-covariance.

Heights are sampled on a square ``(divisions + 1)**2`` grid by circulant
embedding: the target covariance ``C(r) = rms**2 exp(-r / corr)`` is laid out on
a periodic grid at least twice the size of the requested one, its FFT gives
the eigenvalues of the circulant covariance matrix, and white noise filtered
by their square roots has exactly that covariance on the cropped window.
The realisation is fixed by ``seed``.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["RoughSurfaceSpec", "rough_surface_heights", "exponential_covariance"]


@dataclass(frozen=True)
class RoughSurfaceSpec:
    """Parameters of the rough surface before and after uniform scaling.

    Defaults: 100 divisions over a length of 2 with RMS height 0.05 and
    correlation length 0.25, scaled to a length of 8.
    """

    divisions: int = 100
    length: float = 2.0
    rms: float = 0.05
    correlation_length: float = 0.25
    seed: int = 0
    scaled_length: float = 8.0

    def __post_init__(self):
        if self.divisions < 1 or not self.length > 0 or not self.correlation_length > 0:
            raise ValueError("divisions, length and correlation length must be positive")
        if self.rms < 0 or not self.scaled_length > 0:
            raise ValueError("rms height must be non-negative and scaled length positive")

    @property
    def scale(self):
        return self.scaled_length / self.length


def exponential_covariance(r, rms, corr):
    return rms**2 * np.exp(-np.asarray(r) / corr)


def _circulant_eigenvalues(m, dx, rms, corr):
    i = np.arange(m)
    d = np.minimum(i, m - i) * dx
    r = np.hypot(d[:, None], d[None, :])
    return np.fft.fft2(exponential_covariance(r, rms, corr)).real


def rough_surface_heights(spec, unscaled=False):
    """Height field ``(divisions + 1, divisions + 1)``.

    Grid point ``(i, j)`` sits at ``(i, j) * length / divisions``.  Unless
    ``unscaled`` is set, coordinates and heights are multiplied by
    ``scaled_length / length``.
    """
    n = spec.divisions + 1
    dx = spec.length / spec.divisions
    if spec.rms == 0.0:
        return np.zeros((n, n))
    m = 2 * n
    while True:
        lam = _circulant_eigenvalues(m, dx, spec.rms, spec.correlation_length)
        if lam.min() >= -1e-10 * lam.max():
            break
        m *= 2
    lam = np.clip(lam, 0.0, None)
    rng = np.random.default_rng(spec.seed)
    noise = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    field = np.fft.fft2(np.sqrt(lam / (m * m)) * noise)
    h = field.real[:n, :n]
    return h if unscaled else h * spec.scale
