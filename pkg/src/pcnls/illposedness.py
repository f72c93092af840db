"""Gaussian cascades with instantly divergent weighted norms, and the NLS
counterpart built from single Gaussians with shrinking mass.

Cascade norms are evaluated without a grid: every term is a closed-form
radial Gaussian, so ``||Psi(t)||_{H^{0,s}}`` is a one-dimensional radial
integral done on log-spaced nodes.  Widths may then span many decades.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .field import Field, Grid, boundary_magnitude
from .linear import (
    GaussianParams,
    c_ds,
    c_ds_closed_form,
    c_prime_ds,
    c_prime_ds_closed_form,
    gaussian_exact,
    gaussian_initial,
    gaussian_profile,
    r_width,
)
from .norms import l2_norm
from .pseudoconformal import pc_transform
from .solver import SolverConfig, evolve_to

MAX_TERMS = 8
MAX_GROWTH = 1e12


class CascadeInfeasibleError(ValueError):
    pass


@dataclass(frozen=True)
class CascadeSchedule:
    terms: tuple[tuple[float, float], ...]  # (A_k, a_k)
    s: float
    dim: int
    t_ref: float = 1.0
    growth: float = math.nan

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([A for A, _ in self.terms])

    @property
    def widths(self) -> np.ndarray:
        return np.array([a for _, a in self.terms])

    def truncated(self, k: int) -> "CascadeSchedule":
        return CascadeSchedule(self.terms[:k], self.s, self.dim, self.t_ref, self.growth)

    def params(self) -> list[GaussianParams]:
        return [GaussianParams(A, a) for A, a in self.terms]


def geometric_terms(k_max: int, s: float, growth: float, a1: float) -> tuple[tuple[float, float], ...]:
    widths = [a1 * growth**k for k in range(k_max)]
    return tuple((a ** (-s / 4.0), a) for a in widths)


def _constraints_hold(terms, s: float, dim: int, t: float) -> bool:
    cp, c = c_prime_ds(dim, s), c_ds(dim, s)
    amps = [A for A, _ in terms]
    n = len(terms)
    suffix = np.concatenate([np.cumsum(amps[::-1])[::-1], [0.0]])
    for k in range(n):
        # worst j for the first condition is the last one
        if suffix[k + 1] > cp * amps[k] / 8.0:
            return False
    prefix = 0.0
    for j, (A, a) in enumerate(terms):
        if j and prefix > 0.25 * cp * A * a ** (s / 2.0) * t**s:
            return False
        prefix += A * (1.0 + c * r_width(a, t) ** s)
    return True


def build_schedule(
    k_max: int,
    s: float,
    dim: int,
    growth: float = 2.0,
    a1: float = 1.0,
    t_ref: float = 1.0,
) -> CascadeSchedule:
    """Geometric schedule ``a_k = a1 G^{k-1}``, ``A_k = a_k^{-s/4}``.

    ``G`` is doubled until both cascade constraints hold at ``t_ref``.
    """
    if not 1 <= k_max <= MAX_TERMS:
        raise ValueError(f"k_max must lie in [1, {MAX_TERMS}], got {k_max}")
    if not growth > 1:
        raise ValueError("growth factor must exceed 1")
    if not 0 < s <= 1:
        raise ValueError("s must lie in (0, 1]")
    while True:
        terms = geometric_terms(k_max, s, growth, a1)
        if _constraints_hold(terms, s, dim, t_ref):
            return CascadeSchedule(terms, s, dim, t_ref, growth)
        growth *= 2.0
        if growth > MAX_GROWTH:
            raise CascadeInfeasibleError(
                f"no growth factor up to {MAX_GROWTH:.0e} satisfies the cascade "
                f"constraints for k_max={k_max}, s={s}, d={dim}"
            )


@dataclass(frozen=True)
class ConstraintReport:
    worst_tail_ratio: float  # max_k,j  sum_{k<i<=j} A_i / (C'/8 A_k)
    worst_growth_ratio: float  # max_j  lhs_j / rhs_j of the second condition
    t: float

    @property
    def ok(self) -> bool:
        return self.worst_tail_ratio <= 1.0 and self.worst_growth_ratio <= 1.0


def check_schedule(sch: CascadeSchedule, t: float | None = None) -> ConstraintReport:
    """Brute-force re-evaluation of both cascade constraints.

    Uses the Gamma-function constants and explicit double loops, sharing no
    code with :func:`build_schedule`.
    """
    t = sch.t_ref if t is None else t
    cp = c_prime_ds_closed_form(sch.dim, sch.s)
    c = c_ds_closed_form(sch.dim, sch.s)
    terms = list(sch.terms)
    n = len(terms)
    tail = 0.0
    for k in range(n):
        for j in range(k + 1, n):
            total = sum(terms[i][0] for i in range(k + 1, j + 1))
            tail = max(tail, total / (cp * terms[k][0] / 8.0))
    growth = 0.0
    for j in range(n):
        lhs = 0.0
        for k in range(j):
            A, a = terms[k]
            lhs += A * (1.0 + c * math.sqrt((1.0 + 4.0 * a * a * t * t) / a) ** sch.s)
        Aj, aj = terms[j]
        growth = max(growth, lhs / (0.25 * cp * Aj * aj ** (sch.s / 2.0) * t**sch.s))
    return ConstraintReport(tail, growth, t)


# -- fields and gridless norms --------------------------------------------------


def linear_cascade_field(sch: CascadeSchedule, t: float, g: Grid) -> Field:
    """``Psi(t) = sum_k e^{it Delta} u0[A_k, a_k]`` sampled on ``g``."""
    a_max = max(sch.widths)
    if g.spacing > a_max**-0.5 / 4.0:
        raise ValueError(
            f"grid spacing {g.spacing:.3g} does not resolve the narrowest term "
            f"(needs <= {a_max ** -0.5 / 4.0:.3g})"
        )
    if g.dim != sch.dim:
        raise ValueError("grid dimension does not match the schedule")
    samples = sum(gaussian_exact(p, t, g).samples for p in sch.params())
    return Field(g, t, samples)


def _radial_nodes(sch: CascadeSchedule, t: float, per_decade: int) -> np.ndarray:
    widths = [1.0 / math.sqrt(a) for a in sch.widths]
    widths += [r_width(a, t) for a in sch.widths]
    lo = min(widths) * 1e-6
    hi = max(widths) * 40.0
    decades = math.log10(hi / lo)
    return np.geomspace(lo, hi, int(decades * per_decade) + 1)


def _radial_integral(values: np.ndarray, r: np.ndarray, dim: int) -> float:
    # int_{R^d} f(|x|) dx = S_d int f(r) r^{d-1} dr = S_d int f(r) r^d dlog r
    # the ball below r[0] contributes about f(r[0]) r[0]^d / d
    surface = 2.0 if dim == 1 else 2.0 * math.pi
    core = values[0] * r[0] ** dim / dim
    return surface * (core + float(np.trapezoid(values * r**dim, np.log(r))))


def cascade_profile(sch: CascadeSchedule, t: float, r: np.ndarray, terms: Sequence[int] | None = None) -> np.ndarray:
    idx = range(len(sch.terms)) if terms is None else terms
    params = sch.params()
    return sum(gaussian_profile(params[k], t, r * r, sch.dim) for k in idx)


def cascade_weighted_norm(
    sch: CascadeSchedule,
    t: float,
    weight: str = "bracket",
    cutoff: float | None = None,
    terms: Sequence[int] | None = None,
    per_decade: int = 400,
) -> float:
    """Gridless ``||w Psi(t)||_{L^2}`` with ``w = <x>^s`` or ``|x|^s``,
    optionally restricted to ``|x| < cutoff`` and to a subset of terms."""
    r = _radial_nodes(sch, t, per_decade)
    if cutoff is not None:
        r = r[r < cutoff]
        r = np.append(r, cutoff)
    w = (1.0 + r * r) ** sch.s if weight == "bracket" else r ** (2.0 * sch.s)
    dens = w * np.abs(cascade_profile(sch, t, r, terms)) ** 2
    return math.sqrt(_radial_integral(dens, r, sch.dim))


@dataclass(frozen=True)
class DivergenceRow:
    k_max: int
    t: float
    norm: float
    lower_bound: float


def linear_divergence_table(sch: CascadeSchedule, times: Sequence[float]) -> list[DivergenceRow]:
    """Weighted norm of every truncated cascade at every time.

    The lower bound column is ``C' A_j a_j^{s/2} t^s`` for the top term ``j``.
    """
    if any(t < 0 for t in times):
        raise ValueError("times must be nonnegative")
    cp = c_prime_ds(sch.dim, sch.s)
    rows = []
    for k in range(1, len(sch.terms) + 1):
        sub = sch.truncated(k)
        A, a = sub.terms[-1]
        for t in times:
            rows.append(DivergenceRow(k, float(t), cascade_weighted_norm(sub, t), cp * A * a ** (sch.s / 2) * t**sch.s))
    return rows


@dataclass(frozen=True)
class DominanceReport:
    j: int
    local_total: float  # || chi_j |x|^s Psi ||
    local_top: float  # || chi_j |x|^s psi_j ||

    @property
    def ok(self) -> bool:
        return self.local_total >= 0.5 * self.local_top


def top_term_dominance(sch: CascadeSchedule, t: float, j: int | None = None) -> DominanceReport:
    """Compare ``Psi`` and its term ``j`` on the ball ``|x| < r(a_j, t)``."""
    j = len(sch.terms) - 1 if j is None else j
    cutoff = r_width(sch.terms[j][1], t)
    total = cascade_weighted_norm(sch, t, weight="abs", cutoff=cutoff)
    top = cascade_weighted_norm(sch, t, weight="abs", cutoff=cutoff, terms=[j])
    return DominanceReport(j, total, top)


# -- NLS demonstration -------------------------------------------------------------


@dataclass(frozen=True)
class IllposedResult:
    k: int
    a: float
    A: float
    norm_in: float
    norm_out: float
    predicted_linear: float  # C_{d,s} A r(a, t)^s
    distance_to_linear: float  # ||u(t) - e^{it Delta} u0||_{L^2}
    data_power: float  # ||u0||^{1 + 4/d}
    boundary: float = 0.0  # worst edge-to-peak ratio over the computed fields

    @property
    def proximity_constant(self) -> float:
        return self.distance_to_linear / self.data_power


def default_demo_grid(dim: int) -> Grid:
    return Grid(1, 4096, 50.0) if dim == 1 else Grid(2, 512, 40.0)


def nls_illposed_demo(
    k: int,
    s: float,
    dim: int,
    t_probe: float,
    cfg: SolverConfig,
    a: float | None = None,
    grid: Grid | None = None,
    weight: str = "bracket",
) -> IllposedResult:
    """Evolve ``u0[A, a]`` with ``a = 10^k`` and ``A = a^{-s/4}`` to ``t_probe``.

    By the L2-critical scaling ``u(t, x) = a^{d/4} U(a t, sqrt(a) x)`` where
    ``U`` starts from ``u0[A, 1]``.  ``U`` is evolved to ``t = 1``, moved to
    the lens frame by the pseudoconformal transform, and evolved there from
    ``tau = -1`` to ``tau = -1/(a t_probe)``; the weighted norm of ``u`` is
    then ``int (1 + a t^2 y^2)^s |V(y)|^2 dy``.
    """
    a = 10.0**k if a is None else a
    if a > 1e4:
        raise ValueError(f"a = {a:g} exceeds the affordable limit 1e4")
    if cfg.lam < 0:
        raise ValueError("the demonstration is for defocusing data")
    if not t_probe > 0:
        raise ValueError("t_probe must be positive")
    grid = default_demo_grid(dim) if grid is None else grid
    A = a ** (-s / 4.0)
    U0 = gaussian_initial(GaussianParams(A, 1.0), grid)
    T = a * t_probe

    def lens_endpoint(c: SolverConfig) -> tuple[Field, Field]:
        if T <= 1.0:
            raise ValueError("need a * t_probe > 1 for the lens-frame route")
        U1 = evolve_to(U0, 1.0, c)
        return U1, evolve_to(pc_transform(U1), -1.0 / T, c)

    U1, V = lens_endpoint(cfg)
    _, V_lin = lens_endpoint(cfg.with_(lam=0.0))
    z2 = grid.radius_squared()
    w_in = (1.0 + z2 / a) ** s if weight == "bracket" else (z2 / a) ** s
    norm_in = math.sqrt(float(np.sum(w_in * np.abs(U0.samples) ** 2)) * grid.cell)
    # |x|^2 = t^2 a y^2 relates the lens variable to the original one
    r2 = a * t_probe**2 * V.grid.radius_squared()
    w_out = (1.0 + r2) ** s if weight == "bracket" else r2**s
    norm_out = math.sqrt(float(np.sum(w_out * np.abs(V.samples) ** 2)) * V.grid.cell)
    return IllposedResult(
        k=k,
        a=a,
        A=A,
        norm_in=norm_in,
        norm_out=norm_out,
        predicted_linear=c_ds(dim, s) * A * r_width(a, t_probe) ** s,
        distance_to_linear=l2_norm(V - V_lin),
        data_power=l2_norm(U0) ** (1.0 + 4.0 / dim),
        boundary=max(boundary_magnitude(f) for f in (U0, U1, V)),
    )
