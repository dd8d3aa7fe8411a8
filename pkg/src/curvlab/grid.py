"""Collocation grids for even profiles on a slab.

A profile on [0, d] with vanishing endpoint derivatives is the restriction
of an even, 2d-periodic function (the even extension to the circle of
circumference 2d).  The natural discretisation is the uniform grid
z_j = j d/(N-1), j = 0..N-1, with differentiation either by cosine
collocation (exact endpoint symmetry, spectral accuracy) or by 4th-order
finite differences with even-reflection ghost points.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

SPECTRAL = "spectral-cosine"
FD4 = "finite-difference-4th"


def _cosine_operators(n_points: int, d: float):
    """Analysis/synthesis matrices of the cosine interpolant.

    Samples are expanded as sums of cos(m pi z / d), m = 0..N-1, via the
    type-I DCT; derivatives are synthesised back on the grid from the
    scaled coefficients (never as a single dense product, which would
    lose accuracy to cancellation).  The first derivative is a sine
    series, so it vanishes identically at z = 0, d.
    """
    n = n_points
    j = np.arange(n)
    m = np.arange(n)
    # fold the phase index into one period exactly (integer arithmetic)
    # before evaluating, so large arguments lose no precision
    idx = np.outer(m, j) % (2 * (n - 1))
    phase = np.pi * idx / (n - 1)
    analysis = np.cos(phase)
    analysis[:, 1:-1] *= 2.0
    analysis /= 2 * (n - 1)
    analysis[1:-1, :] *= 2.0
    cos_syn = np.cos(phase).T
    sin_syn = np.sin(phase).T
    return analysis, cos_syn, sin_syn


def _fd4_operators(n_points: int, d: float):
    """4th-order central differences with even-reflection ghost values."""
    n = n_points
    h = d / (n - 1)

    def pad(idx):
        # reflect indices across 0 and n-1 (even extension)
        idx = np.abs(idx)
        over = idx > n - 1
        idx[over] = 2 * (n - 1) - idx[over]
        return idx

    d1 = np.zeros((n, n))
    d2 = np.zeros((n, n))
    w1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / (12 * h)
    w2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12 * h * h)
    offsets = np.arange(-2, 3)
    for row in range(n):
        cols = pad(row + offsets)
        for c, a, b in zip(cols, w1, w2):
            d1[row, c] += a
            d2[row, c] += b
    return d1, d2


class GridCalculus:
    """Uniform grid on [0, d] with derivative and quadrature operators.

    Parameters
    ----------
    n_points : number of nodes (>= 16), z_j = j d/(N-1)
    d : slab width
    mode : "spectral-cosine" (default) or "finite-difference-4th"
    """

    def __init__(self, n_points: int, d: float, mode: str = SPECTRAL):
        if n_points < 16:
            raise DomainError(f"grid needs at least 16 points, got {n_points}")
        if d <= 0:
            raise DomainError(f"slab width must be positive, got {d}")
        if mode not in (SPECTRAL, FD4):
            raise DomainError(f"unknown grid mode {mode!r}")
        self.n_points = int(n_points)
        self.d = float(d)
        self.mode = mode
        self.z = np.linspace(0.0, self.d, self.n_points)
        self.h = self.d / (self.n_points - 1)
        freq = np.arange(self.n_points) * np.pi / self.d
        if mode == SPECTRAL:
            analysis, cos_syn, sin_syn = _cosine_operators(self.n_points, self.d)
            self._analysis = analysis
            self._syn1 = -sin_syn * freq
            self._syn2 = -cos_syn * freq**2
            self._fd = None
        else:
            self._fd = _fd4_operators(self.n_points, self.d)
        w = np.full(self.n_points, self.h)
        w[0] *= 0.5
        w[-1] *= 0.5
        self._trapz = w

    @property
    def N(self) -> int:
        return self.n_points

    def deriv1(self, values: np.ndarray) -> np.ndarray:
        if self._fd is not None:
            return self._fd[0] @ values
        return self._syn1 @ (self._analysis @ values)

    def deriv2(self, values: np.ndarray) -> np.ndarray:
        if self._fd is not None:
            return self._fd[1] @ values
        return self._syn2 @ (self._analysis @ values)

    def derivs(self, values: np.ndarray):
        """First and second derivative with one shared analysis pass."""
        if self._fd is not None:
            return self._fd[0] @ values, self._fd[1] @ values
        coeff = self._analysis @ values
        return self._syn1 @ coeff, self._syn2 @ coeff

    def second_derivative_matrix(self) -> np.ndarray:
        """Dense second-derivative operator (for implicit solves)."""
        if self._fd is not None:
            return self._fd[1]
        return self._syn2 @ self._analysis

    def integrate_slab(self, values: np.ndarray) -> float:
        """Trapezoid integral over [0, d]; exact for the even-periodic
        trigonometric interpolant."""
        return float(self._trapz @ values)

    def integrate_circle(self, values: np.ndarray) -> float:
        """Integral over the even circle (twice the slab integral)."""
        return 2.0 * self.integrate_slab(values)

    def mean_circle(self, values: np.ndarray) -> float:
        """Average over the circle of circumference 2d."""
        return self.integrate_circle(values) / (2.0 * self.d)

    def compatible_with(self, values: np.ndarray) -> bool:
        return values.shape == (self.n_points,)
