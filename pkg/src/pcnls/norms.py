"""Spatial norms, energy, Strichartz admissibility and space-time norms.

Spatial integrals use the rectangle rule with cell ``h^d``; time integrals
use the trapezoid rule over a trajectory's snapshot times.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .field import Field, Grid, spectral_transform

INF = math.inf


def _check_exponent(r: float, lower: float = 1.0) -> None:
    if not (r >= lower):
        raise ValueError(f"exponent must be >= {lower}, got {r}")


def lr_norm(f: Field, r: float) -> float:
    _check_exponent(r)
    a = np.abs(f.samples)
    if math.isinf(r):
        return float(a.max())
    return float((np.sum(a**r) * f.grid.cell) ** (1.0 / r))


def l2_norm(f: Field) -> float:
    return float(np.sqrt(np.sum(np.abs(f.samples) ** 2) * f.grid.cell))


def _spectral_mass(f: Field, weight: np.ndarray) -> float:
    c = spectral_transform(f).coefficients
    return float(np.sqrt(np.sum(weight * np.abs(c) ** 2) * f.grid.frequency_cell))


def hs_norm(f: Field, s: float) -> float:
    """Inhomogeneous Sobolev norm with multiplier ``(1 + |xi|^2)^(s/2)``."""
    if s < 0:
        raise ValueError(f"Sobolev index must be >= 0, got {s}")
    return _spectral_mass(f, (1.0 + f.grid.frequency_squared()) ** s)


def homogeneous_hs_norm(f: Field, s: float) -> float:
    """Homogeneous norm with multiplier ``|xi|^s`` (``D^s``)."""
    if s < 0:
        raise ValueError(f"Sobolev index must be >= 0, got {s}")
    if s == 0:
        return l2_norm(f)
    return _spectral_mass(f, f.grid.frequency_squared() ** s)


def fractional_derivative(f: Field, s: float) -> Field:
    """``D^s f`` via the multiplier ``|xi|^s``."""
    if s == 0:
        return f
    mult = f.grid.frequency_squared() ** (s / 2.0)
    return f.with_samples(np.fft.ifftn(mult * np.fft.fftn(f.samples)))


def weighted_norm(f: Field, s: float, weight: str = "bracket") -> float:
    """Weighted L2 norm.

    ``weight="bracket"`` gives the ``H^{0,s}`` norm ``||(1+x^2)^{s/2} f||``;
    ``weight="abs"`` gives ``|| |x|^s f ||``, the form appearing in exact
    Gaussian identities.
    """
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"weight exponent must lie in [0, 1], got {s}")
    r2 = f.grid.radius_squared()
    if weight == "bracket":
        w = (1.0 + r2) ** s
    elif weight == "abs":
        w = r2**s
    else:
        raise ValueError(f"unknown weight {weight!r}")
    return float(np.sqrt(np.sum(w * np.abs(f.samples) ** 2) * f.grid.cell))


def nonlinear_power(dim: int) -> float:
    """Exponent ``4/d`` of the L2-critical nonlinearity."""
    return 4.0 / dim


def energy(f: Field, lam: float) -> float:
    """``E[u] = int 1/2 |grad u|^2 + lam d/(2d+4) |u|^(2+4/d) dx``."""
    g = f.grid
    c = spectral_transform(f).coefficients
    kinetic = 0.5 * float(np.sum(g.frequency_squared() * np.abs(c) ** 2)) * g.frequency_cell
    p = 2.0 + nonlinear_power(g.dim)
    potential = lam * g.dim / (2.0 * g.dim + 4.0) * float(np.sum(np.abs(f.samples) ** p)) * g.cell
    return kinetic + potential


# -- admissibility ---------------------------------------------------------


def _as_fraction(x) -> Fraction | None:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    x = float(x)
    if math.isinf(x):
        return None
    return Fraction(x).limit_denominator(10**6)


def admissible(q, r, dim: int) -> bool:
    """Exact L2-Strichartz admissibility of ``(q, r)`` in dimension ``dim``.

    Infinite exponents are passed as ``math.inf``; finite floats are read as
    the nearest rational with denominator <= 10^6.
    """
    fq, fr = _as_fraction(q), _as_fraction(r)
    inv_q = Fraction(0) if fq is None else 1 / fq
    inv_r = Fraction(0) if fr is None else 1 / fr
    if fq is not None and fq < 2:
        return False
    if fr is not None and fr < 2:
        return False
    if 2 * inv_q + dim * inv_r != Fraction(dim, 2):
        return False
    if dim == 1:
        return True
    if dim == 2:
        return (fq is None or fq > 2) and fr is not None
    # d >= 3: r <= 2 + 4/(d-2)
    return fr is not None and fr <= 2 + Fraction(4, dim - 2)


def balanced_exponent(dim: int) -> float:
    return 2.0 * (dim + 2) / dim


@dataclass(frozen=True)
class AdmissiblePair:
    q: float
    r: float

    def is_admissible(self, dim: int) -> bool:
        return admissible(self.q, self.r, dim)

    def label(self) -> str:
        def fmt(x):
            if math.isinf(x):
                return "inf"
            fx = _as_fraction(x)
            return str(fx.numerator) if fx.denominator == 1 else f"{fx.numerator}/{fx.denominator}"

        return f"({fmt(self.q)},{fmt(self.r)})"


def canonical_pairs(dim: int) -> list[AdmissiblePair]:
    """The finite stand-in for the supremum over all admissible pairs."""
    b = balanced_exponent(dim)
    third = AdmissiblePair(8.0, 4.0) if dim == 1 else AdmissiblePair(8.0 / 3.0, 8.0)
    return [AdmissiblePair(INF, 2.0), AdmissiblePair(b, b), third]


# -- space-time norms ------------------------------------------------------


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered snapshots of one solution on one grid."""

    fields: tuple[Field, ...]

    def __init__(self, fields: Iterable[Field]):
        fields = tuple(fields)
        if fields:
            g = fields[0].grid
            for f in fields[1:]:
                if not f.grid.close_to(g):
                    raise ValueError("trajectory snapshots must share one grid")
            t = np.array([f.time for f in fields])
            if len(t) > 1 and not (np.all(np.diff(t) > 0) or np.all(np.diff(t) < 0)):
                raise ValueError("snapshot times must be strictly monotone")
        object.__setattr__(self, "fields", fields)

    def __len__(self) -> int:
        return len(self.fields)

    def __getitem__(self, i):
        return self.fields[i]

    def __iter__(self):
        return iter(self.fields)

    @property
    def grid(self) -> Grid:
        return self.fields[0].grid

    @property
    def times(self) -> np.ndarray:
        return np.array([f.time for f in self.fields])

    @property
    def interval(self) -> tuple[float, float]:
        return self.fields[0].time, self.fields[-1].time

    @property
    def first(self) -> Field:
        return self.fields[0]

    @property
    def last(self) -> Field:
        return self.fields[-1]


def trapezoid_weights(times: np.ndarray) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    w = np.zeros_like(times)
    if len(times) < 2:
        return w
    dt = np.abs(np.diff(times))
    w[:-1] += 0.5 * dt
    w[1:] += 0.5 * dt
    return w


def lr_profile(fields: Sequence[Field], r: float) -> np.ndarray:
    return np.array([lr_norm(f, r) for f in fields])


def time_norm(values: np.ndarray, times: np.ndarray, q: float) -> float:
    """``L^q`` norm in time of sampled nonnegative values (trapezoid rule)."""
    values = np.asarray(values, dtype=float)
    if math.isinf(q):
        return float(values.max())
    return float(np.sum(trapezoid_weights(times) * values**q) ** (1.0 / q))


def spacetime_norm(tr: Sequence[Field], q: float, r: float, dim: int | None = None) -> float:
    """``||u||_{L^q_t L^r_x}`` over the snapshots of a trajectory.

    Snapshots may sit on different grids (each spatial norm uses its own
    cell), which is how transformed trajectories are measured.
    """
    fields = list(tr)
    if not fields:
        raise ValueError("empty trajectory")
    dim = fields[0].grid.dim if dim is None else dim
    if not admissible(q, r, dim):
        raise ValueError(f"pair (q={q}, r={r}) is not admissible in d={dim}")
    times = np.array([f.time for f in fields])
    return time_norm(lr_profile(fields, r), times, q)


def strichartz_sup_norm(tr: Sequence[Field], pairs: Sequence[AdmissiblePair]) -> float:
    if not pairs:
        raise ValueError("empty pair list")
    fields = list(tr)
    dim = fields[0].grid.dim if fields else 1
    for p in pairs:
        if not p.is_admissible(dim):
            raise ValueError(f"pair {p.label()} is not admissible in d={dim}")
    return max(spacetime_norm(fields, p.q, p.r) for p in pairs)


def homogeneous_strichartz_norm(tr: Sequence[Field], s: float, pairs: Sequence[AdmissiblePair]) -> float:
    """``sup_pairs ||D^s u||_{L^q L^r}`` over the finite pair list."""
    return strichartz_sup_norm([fractional_derivative(f, s) for f in tr], pairs)


def strichartz_s_norm(tr: Sequence[Field], s: float, pairs: Sequence[AdmissiblePair]) -> float:
    """``S^s`` norm with the sup over ``sigma in [0, s]`` sampled at ``{0, s/2, s}``."""
    sigmas = sorted({0.0, s / 2.0, s})
    return max(homogeneous_strichartz_norm(tr, sigma, pairs) for sigma in sigmas)
