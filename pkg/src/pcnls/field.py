"""Periodic grids, complex fields and the continuum-normalized spectral transform.

A :class:`Grid` discretizes ``[-L, L)^d`` with ``N`` points per axis.  The
spectral transform approximates the unitary Fourier transform

    f_hat(xi) = (2 pi)^(-d/2) * integral exp(-i x.xi) f(x) dx

sampled at the grid frequencies ``xi_k = pi k / L``, so Parseval holds with
cell measure ``h^d`` in space and ``(pi / L)^d`` in frequency.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    dim: int
    points: int
    half_width: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"unsupported dimension {self.dim}; only d = 1, 2")
        if self.points < 8 or not _is_power_of_two(self.points):
            raise ValueError(f"points per axis must be a power of two >= 8, got {self.points}")
        if not (np.isfinite(self.half_width) and self.half_width > 0):
            raise ValueError(f"half_width must be positive and finite, got {self.half_width}")
        object.__setattr__(self, "half_width", float(self.half_width))

    @property
    def spacing(self) -> float:
        # exact: points is a power of two
        return 2.0 * self.half_width / self.points

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points,) * self.dim

    @property
    def cell(self) -> float:
        return self.spacing**self.dim

    @property
    def frequency_cell(self) -> float:
        return (np.pi / self.half_width) ** self.dim

    def axis(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.points)

    def wavenumbers(self) -> np.ndarray:
        """Integer frequency indices ``k`` in FFT order."""
        return np.fft.fftfreq(self.points, d=1.0 / self.points).round().astype(np.int64)

    def frequency_axis(self) -> np.ndarray:
        return np.pi * self.wavenumbers() / self.half_width

    def coordinates(self) -> tuple[np.ndarray, ...]:
        ax = self.axis()
        if self.dim == 1:
            return (ax,)
        return tuple(np.meshgrid(ax, ax, indexing="ij"))

    def frequencies(self) -> tuple[np.ndarray, ...]:
        ax = self.frequency_axis()
        if self.dim == 1:
            return (ax,)
        return tuple(np.meshgrid(ax, ax, indexing="ij"))

    def radius_squared(self) -> np.ndarray:
        return sum(c * c for c in self.coordinates())

    def frequency_squared(self) -> np.ndarray:
        return sum(k * k for k in self.frequencies())

    def rescaled(self, factor: float) -> "Grid":
        return Grid(self.dim, self.points, self.half_width * factor)

    def close_to(self, other: "Grid", rtol: float = 1e-12) -> bool:
        return (
            self.dim == other.dim
            and self.points == other.points
            and abs(self.half_width - other.half_width) <= rtol * self.half_width
        )


@dataclass(frozen=True)
class Field:
    """Complex samples of ``u(t, .)`` on a grid, stamped with a physical time."""

    grid: Grid
    time: float
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = np.array(self.samples, dtype=np.complex128, order="C")
        if data.size != self.grid.points**self.grid.dim:
            raise ValueError(
                f"expected {self.grid.points ** self.grid.dim} samples, got {data.size}"
            )
        data = data.reshape(self.grid.shape)
        if not np.all(np.isfinite(data)):
            raise ValueError("field samples must be finite")
        data.setflags(write=False)
        object.__setattr__(self, "samples", data)
        object.__setattr__(self, "time", float(self.time))

    @classmethod
    def from_function(cls, grid: Grid, func: Callable[..., np.ndarray], time: float = 0.0) -> "Field":
        return cls(grid, time, func(*grid.coordinates()))

    @classmethod
    def zeros(cls, grid: Grid, time: float = 0.0) -> "Field":
        return cls(grid, time, np.zeros(grid.shape, dtype=np.complex128))

    def with_samples(self, samples: np.ndarray, time: float | None = None) -> "Field":
        return Field(self.grid, self.time if time is None else time, samples)

    def with_time(self, time: float) -> "Field":
        return Field(self.grid, time, self.samples)

    def conj(self) -> "Field":
        return Field(self.grid, self.time, np.conj(self.samples))

    def reflected(self) -> "Field":
        """Samples of ``u(-x)``; exact on the periodic lattice (index j -> -j mod N)."""
        data = self.samples
        for axis in range(self.grid.dim):
            data = np.roll(np.flip(data, axis=axis), 1, axis=axis)
        return Field(self.grid, self.time, data)

    def __add__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return self.with_samples(self.samples + other.samples)

    def __sub__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return self.with_samples(self.samples - other.samples)

    def __mul__(self, scalar: complex) -> "Field":
        return self.with_samples(scalar * self.samples)

    __rmul__ = __mul__


def _check_same_grid(a: Field, b: Field) -> None:
    if not a.grid.close_to(b.grid):
        raise ValueError(f"fields live on different grids: {a.grid} vs {b.grid}")


@dataclass(frozen=True)
class Spectrum:
    grid: Grid
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = np.array(self.coefficients, dtype=np.complex128).reshape(self.grid.shape)
        data.setflags(write=False)
        object.__setattr__(self, "coefficients", data)

    def coefficient(self, *k: int) -> complex:
        """Coefficient at integer frequency vector ``k`` (negative indices allowed)."""
        return complex(self.coefficients[tuple(int(i) % self.grid.points for i in k)])


def _alternating_sign(grid: Grid) -> np.ndarray:
    # exp(i xi_k L) = (-1)^k accounts for the lattice starting at x = -L
    sign = np.where(grid.wavenumbers() % 2 == 0, 1.0, -1.0)
    if grid.dim == 1:
        return sign
    return np.multiply.outer(sign, sign)


def spectral_transform(f: Field) -> Spectrum:
    g = f.grid
    norm = g.cell / (2.0 * np.pi) ** (g.dim / 2.0)
    coeffs = norm * _alternating_sign(g) * np.fft.fftn(f.samples)
    return Spectrum(g, coeffs)


def inverse_spectral_transform(s: Spectrum, time: float = 0.0) -> Field:
    g = s.grid
    norm = (2.0 * np.pi) ** (g.dim / 2.0) / g.cell
    samples = np.fft.ifftn(norm * _alternating_sign(g) * s.coefficients)
    return Field(g, time, samples)


def fourier_at(f: Field, xi: np.ndarray) -> np.ndarray:
    """Riemann-sum Fourier transform of ``f`` evaluated on an arbitrary tensor
    grid of frequencies ``xi`` (one 1-D array reused on every axis).

    Agrees with :func:`spectral_transform` when ``xi`` is the grid's own
    frequency axis; elsewhere it is the same quadrature, not an interpolant.
    """
    g = f.grid
    xi = np.asarray(xi, dtype=float)
    x = g.axis()
    norm = g.cell / (2.0 * np.pi) ** (g.dim / 2.0)
    data = f.samples
    # contract one axis at a time, in row blocks to bound memory
    for axis in range(g.dim):
        moved = np.moveaxis(data, axis, 0).reshape(g.points, -1)
        out = np.empty((len(xi), moved.shape[1]), dtype=np.complex128)
        for start in range(0, len(xi), _FOURIER_BLOCK):
            block = xi[start : start + _FOURIER_BLOCK]
            out[start : start + len(block)] = np.exp(-1j * np.outer(block, x)) @ moved
        shape = (len(xi),) + tuple(np.delete(np.array(data.shape), axis))
        data = np.moveaxis(out.reshape(shape), 0, axis)
    return norm * data


_FOURIER_BLOCK = 512


def apply_multiplier(f: Field, multiplier: np.ndarray) -> Field:
    """Apply a Fourier multiplier given on the grid's frequency lattice."""
    data = np.fft.ifftn(multiplier * np.fft.fftn(f.samples))
    return f.with_samples(data)


def rescale_grid(f: Field, factor: float) -> Field:
    if not factor > 0:
        raise ValueError(f"rescale factor must be positive, got {factor}")
    return Field(f.grid.rescaled(factor), f.time, f.samples)


def boundary_magnitude(f: Field) -> float:
    """Largest |sample| on the outermost lattice layer, relative to the peak."""
    a = np.abs(f.samples)
    peak = a.max()
    if peak == 0:
        return 0.0
    edge = 0.0
    for axis in range(f.grid.dim):
        edge = max(edge, np.take(a, 0, axis=axis).max(), np.take(a, -1, axis=axis).max())
    return float(edge / peak)


def check_boundary_decay(f: Field, tol: float = 1e-12) -> float:
    mag = boundary_magnitude(f)
    if mag > tol:
        raise BoundaryDecayError(
            f"boundary samples reach {mag:.3e} of the peak (> {tol:.1e}); "
            f"enlarge half_width (currently {f.grid.half_width})"
        )
    return mag


class BoundaryDecayError(ValueError):
    pass
