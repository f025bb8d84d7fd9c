"""Grids and field containers.

Grid1D is a uniform periodic grid on [-L, L) with N nodes (N a power of two).
Angular-frequency convention: the continuum transform is
fhat(xi) = int f(x) e^{-i xi x} dx, inverted by f(x) = (2 pi)^{-1} int ...,
so the dual grid has spacing dxi = pi / L and Nyquist frequency pi / dx.

RadialGrid is a uniform grid on [0, r_max] used for profile trajectories and
radial operator discretizations (d = 1 means even functions of |x|).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid1D:
    N: int
    L: float

    def __post_init__(self):
        if not _is_pow2(self.N) or self.N < 16:
            raise ValueError(f"N must be a power of two >= 16, got {self.N}")
        if not (self.L > 0.0) or not np.isfinite(self.L):
            raise ValueError(f"L must be finite and positive, got {self.L}")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def dxi(self) -> float:
        return np.pi / self.L

    @property
    def x(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.N)

    @property
    def xi(self) -> np.ndarray:
        # fft ordering, angular frequencies
        return 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.dx)

    @property
    def xi_max(self) -> float:
        return np.pi / self.dx

    def to_freq(self, values: np.ndarray) -> np.ndarray:
        """Samples of the continuum transform at the fft-ordered nodes xi."""
        return self.dx * np.exp(1j * self.xi * self.L) * np.fft.fft(values)

    def from_freq(self, fhat: np.ndarray) -> np.ndarray:
        return np.fft.ifft(fhat * np.exp(-1j * self.xi * self.L)) / self.dx


@dataclass(frozen=True)
class RadialGrid:
    """Uniform radial nodes r_j = j * dr, j = 0..N-1, with r_max = r[-1]."""

    N: int
    r_max: float

    def __post_init__(self):
        if self.N < 8:
            raise ValueError(f"need at least 8 radial nodes, got {self.N}")
        if not (self.r_max > 0.0) or not np.isfinite(self.r_max):
            raise ValueError(f"r_max must be finite and positive, got {self.r_max}")

    @property
    def dr(self) -> float:
        return self.r_max / (self.N - 1)

    @property
    def r(self) -> np.ndarray:
        return self.dr * np.arange(self.N)


class Field:
    """Complex field sampled on a grid; space is 'physical' or 'frequency'."""

    __slots__ = ("values", "grid", "space")

    def __init__(self, values, grid, space: str = "physical"):
        values = np.asarray(values, dtype=np.complex128)
        n = grid.N
        if values.shape != (n,):
            raise ValueError(f"values shape {values.shape} != ({n},)")
        if not np.all(np.isfinite(values)):
            raise ValueError("field contains non-finite entries")
        if space not in ("physical", "frequency"):
            raise ValueError(f"bad space tag {space!r}")
        self.values = values
        self.grid = grid
        self.space = space

    def copy(self) -> "Field":
        return Field(self.values.copy(), self.grid, self.space)

    def __repr__(self):
        g = self.grid
        tag = f"N={g.N}, L={g.L}" if isinstance(g, Grid1D) else f"N={g.N}, r_max={g.r_max}"
        return f"Field({self.space}, {tag})"


@dataclass
class VectorField2:
    """Two-component stacked field (Z1, Z2); the physically meaningful slice
    is the conjugation-symmetric one Z2 = conj(Z1)."""

    Z1: np.ndarray
    Z2: np.ndarray
    grid: object = field(default=None)

    def __post_init__(self):
        self.Z1 = np.asarray(self.Z1, dtype=np.complex128)
        self.Z2 = np.asarray(self.Z2, dtype=np.complex128)
        if self.Z1.shape != self.Z2.shape:
            raise ValueError("component shapes differ")

    def symmetry_defect(self) -> float:
        """Relative departure from the slice Z2 = conj(Z1)."""
        num = np.linalg.norm(self.Z2 - np.conj(self.Z1))
        den = np.linalg.norm(self.Z1) + np.linalg.norm(self.Z2)
        return 0.0 if den == 0.0 else float(num / den)

    def stack(self) -> np.ndarray:
        return np.concatenate([self.Z1, self.Z2])
