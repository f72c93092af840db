"""Exact free Schrodinger flow and the closed-form Gaussian solutions.

Everything here is exact up to roundoff and serves as the oracle layer for
the split-step solver and the transform checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .field import Field, Grid, apply_multiplier


def free_propagate(f: Field, dt: float) -> Field:
    """``e^{i dt Delta} f`` through the exact multiplier ``exp(-i |xi|^2 dt)``."""
    if dt == 0:
        return f
    mult = np.exp(-1j * dt * f.grid.frequency_squared())
    return apply_multiplier(f, mult).with_time(f.time + dt)


@dataclass(frozen=True)
class GaussianParams:
    A: float
    a: float

    def __post_init__(self):
        if not (self.A > 0 and self.a > 0):
            raise ValueError(f"Gaussian needs A > 0 and a > 0, got A={self.A}, a={self.a}")

    def peak(self, dim: int) -> float:
        return self.A * (self.a / math.pi) ** (dim / 4.0)


def gaussian_profile(p: GaussianParams, t: float, r2: np.ndarray, dim: int) -> np.ndarray:
    """``e^{it Delta} u0[A, a]`` evaluated at squared radii ``r2``."""
    z = 1.0 + 2j * p.a * t
    return p.peak(dim) * z ** (-dim / 2.0) * np.exp(-p.a * r2 / (2.0 * z))


def gaussian_initial(p: GaussianParams, g: Grid) -> Field:
    if p.a * g.half_width**2 <= 60.0:
        raise ValueError(
            f"grid half-width {g.half_width} too small for a={p.a}: need a*L^2 > 60"
        )
    r2 = g.radius_squared()
    return Field(g, 0.0, p.peak(g.dim) * np.exp(-p.a * r2 / 2.0))


def gaussian_exact(p: GaussianParams, t: float, g: Grid) -> Field:
    return Field(g, t, gaussian_profile(p, t, g.radius_squared(), g.dim))


def r_width(a: float, t: float) -> float:
    if not a > 0:
        raise ValueError(f"a must be positive, got {a}")
    return math.sqrt((1.0 + 4.0 * a * a * t * t) / a)


def _radial_measure(dim: int) -> float:
    # surface factor of the unit sphere in R^d, for radial integrals
    return 2.0 if dim == 1 else 2.0 * math.pi


def _c_squared(dim: int, s: float, upper: float) -> float:
    if dim not in (1, 2):
        raise ValueError(f"unsupported dimension {dim}")
    if not 0.0 < s <= 1.0:
        raise ValueError(f"s must lie in (0, 1], got {s}")
    integrand = lambda r: r ** (2.0 * s + dim - 1) * math.exp(-r * r)
    val, _ = integrate.quad(integrand, 0.0, upper, epsabs=0.0, epsrel=1e-12, limit=200)
    return _radial_measure(dim) * val / math.pi ** (dim / 2.0)


def c_ds(dim: int, s: float) -> float:
    """``C_{d,s}``: the |x|^s moment of the unit Gaussian density, by quadrature."""
    return math.sqrt(_c_squared(dim, s, math.inf))


def c_prime_ds(dim: int, s: float) -> float:
    """``C'_{d,s}``: the same moment restricted to ``|x| < 1``."""
    return math.sqrt(_c_squared(dim, s, 1.0))


def c_ds_closed_form(dim: int, s: float) -> float:
    return math.sqrt(special.gamma(s + dim / 2.0) / special.gamma(dim / 2.0))


def c_prime_ds_closed_form(dim: int, s: float) -> float:
    return math.sqrt(
        special.gammainc(s + dim / 2.0, 1.0) * special.gamma(s + dim / 2.0) / special.gamma(dim / 2.0)
    )


def gaussian_weighted_moment(p: GaussianParams, t: float, s: float, dim: int) -> float:
    """Closed form of ``|| |x|^s e^{it Delta} u0[A, a] ||``."""
    return c_ds(dim, s) * p.A * r_width(p.a, t) ** s
