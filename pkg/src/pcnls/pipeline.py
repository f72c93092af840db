"""The composite map ``F_t = S(-1/T, -1/t) o C o S(t, 0)``, its growth
bounds, and scattering-state extraction.

``S`` is the NLS flow and ``C`` the pseudoconformal transform.  Data that
must be compared across different ``t`` are supplied as a factory
``Grid -> Field`` so each run can sample them on its comoving grid; the
transformed outputs then share one lattice and differ only through the
dynamics.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .field import Field, Grid, apply_multiplier, fourier_at
from .linear import free_propagate
from .norms import (
    Trajectory,
    balanced_exponent,
    hs_norm,
    l2_norm,
    spacetime_norm,
    weighted_norm,
)
from .pseudoconformal import T_MIN, comoving_grid, pc_transform
from .solver import SolverConfig, evolve

Factory = Callable[[Grid], Field]


def sobolev_rho(dim: int) -> float:
    """Regularity index ``(d + 1)/2`` used for the growth bounds."""
    return (dim + 1) / 2.0


@dataclass(frozen=True)
class LedgerRow:
    leg: int
    time: float
    quantity: str
    value: float


@dataclass(frozen=True)
class FMapRun:
    u0: Field
    t_mid: float
    T_lwp: float
    v_out: Field
    ledger: tuple[LedgerRow, ...] = field(repr=False)
    mass_drift: tuple[float, float, float] = (0.0, 0.0, 0.0)
    legs: tuple[Trajectory, Trajectory] | None = field(default=None, repr=False)

    @property
    def total_mass_drift(self) -> float:
        m0 = l2_norm(self.u0)
        return abs(l2_norm(self.v_out) - m0) / m0 if m0 else 0.0

    def values(self, quantity: str, leg: int | None = None) -> np.ndarray:
        return np.array([r.value for r in self.ledger if r.quantity == quantity and (leg is None or r.leg == leg)])


class PipelineError(RuntimeError):
    def __init__(self, leg: int, cause: Exception):
        super().__init__(f"leg {leg} failed: {cause}")
        self.leg = leg
        self.cause = cause


def _leg_rows(leg: int, tr: Trajectory, s: float, rho: float, weighted: bool) -> list[LedgerRow]:
    rows = []
    for f in tr:
        if weighted:
            rows.append(LedgerRow(leg, f.time, "H0s", weighted_norm(f, s)))
        rows.append(LedgerRow(leg, f.time, "Hs", hs_norm(f, s)))
        rows.append(LedgerRow(leg, f.time, "Hrho", hs_norm(f, rho)))
    if len(tr) > 1:
        b = balanced_exponent(tr.grid.dim)
        rows.append(LedgerRow(leg, tr.last.time, "balanced", spacetime_norm(tr, b, b)))
    return rows


def _mass_drift(tr: Trajectory) -> float:
    m0 = l2_norm(tr.first)
    return abs(l2_norm(tr.last) - m0) / m0 if m0 else 0.0


def f_map(
    u0: Field,
    t_mid: float,
    T_lwp: float,
    cfg: SolverConfig,
    s: float = 0.5,
    stride: int = 100,
    t_min: float = T_MIN,
) -> FMapRun:
    """Evolve to ``t_mid``, transform, then evolve to ``tau = -1/T_lwp``."""
    if not 0 < t_mid <= T_lwp:
        raise ValueError(f"need 0 < t_mid <= T_lwp, got t_mid={t_mid}, T_lwp={T_lwp}")
    rho = sobolev_rho(u0.grid.dim)
    try:
        leg1 = evolve(u0, t_mid, cfg, stride=stride)
    except Exception as exc:
        raise PipelineError(1, exc) from exc
    try:
        v_start = pc_transform(leg1.last, t_min=t_min)
    except Exception as exc:
        raise PipelineError(2, exc) from exc
    drift2 = abs(l2_norm(v_start) - l2_norm(leg1.last)) / max(l2_norm(leg1.last), 1e-300)
    try:
        leg3 = evolve(v_start, -1.0 / T_lwp, cfg, stride=stride)
    except Exception as exc:
        raise PipelineError(3, exc) from exc
    rows = _leg_rows(1, leg1, s, rho, weighted=True) + _leg_rows(3, leg3, s, rho, weighted=False)
    return FMapRun(
        u0=u0,
        t_mid=t_mid,
        T_lwp=T_lwp,
        v_out=leg3.last,
        ledger=tuple(rows),
        mass_drift=(_mass_drift(leg1), drift2, _mass_drift(leg3)),
        legs=(leg1, leg3),
    )


def f_map_comoving(
    initial: Factory,
    y_grid: Grid,
    t_mid: float,
    T_lwp: float,
    cfg: SolverConfig,
    **kw,
) -> FMapRun:
    """:func:`f_map` with data sampled on the grid that transforms onto ``y_grid``."""
    return f_map(initial(comoving_grid(y_grid, t_mid)), t_mid, T_lwp, cfg, **kw)


def f_map_t_independence(
    initial: Factory,
    y_grid: Grid,
    t_mids: Sequence[float],
    T_lwp: float,
    cfg: SolverConfig,
) -> float:
    """Largest pairwise ``||v_out(t_i) - v_out(t_j)|| / ||u0||`` over the ``t_mid`` values."""
    runs = [f_map_comoving(initial, y_grid, t, T_lwp, cfg) for t in t_mids]
    mass = l2_norm(runs[0].u0)
    worst = 0.0
    for a, b in itertools.combinations(runs, 2):
        worst = max(worst, l2_norm(a.v_out - b.v_out) / mass)
    return worst


# -- growth bounds -----------------------------------------------------------------


def errata_weight(f: Field, s: float) -> float:
    """``(||f||_{H^{0,s}} + ||f||_{H^rho}) (1 + ||f||_{H^rho}^{4/d})``."""
    d = f.grid.dim
    hr = hs_norm(f, sobolev_rho(d))
    return (weighted_norm(f, s) + hr) * (1.0 + hr ** (4.0 / d))


@dataclass(frozen=True)
class GrowthLedger:
    times: np.ndarray
    hrho_ratio: float  # max_t ||u(t)||_{H^rho} / ||u0||_{H^rho}
    weighted_constant: float  # max_t (||u(t)||_{H^{0,s}} - ||u0||_{H^{0,s}}) / (t ||u0||_{H^rho})
    pair_constant: float  # difference growth over t * (errata weights of both data)
    pair_ratio: float  # max_t ||u'(t) - u''(t)||_{H^{0,s}} / ||u'0 - u''0||_{H^{0,s}}

    @property
    def doubling_ok(self) -> bool:
        return self.hrho_ratio <= 2.0


def growth_bounds_check(
    u0: Field,
    cfg: SolverConfig,
    s: float = 0.5,
    T: float = 1.0,
    perturbation: Field | None = None,
    stride: int = 50,
) -> GrowthLedger:
    """Measure the weighted-norm growth bounds along ``[0, min(T, 1)]``.

    ``perturbation`` is added to ``u0`` to form the second datum of the pair;
    by default it is ``1e-3 u0`` shifted by one grid cell.
    """
    T = min(T, 1.0)
    rho = sobolev_rho(u0.grid.dim)
    if perturbation is None:
        perturbation = 1e-3 * u0.with_samples(np.roll(u0.samples, 1, axis=0))
    u1 = u0 + perturbation
    tr0 = evolve(u0, T, cfg, stride=stride)
    tr1 = evolve(u1, T, cfg, stride=stride)
    times = tr0.times
    hr0 = hs_norm(u0, rho)
    w0 = weighted_norm(u0, s)
    d0 = weighted_norm(u1 - u0, s)
    pair_scale = errata_weight(u0, s) + errata_weight(u1, s)
    hrho_ratio = max(hs_norm(f, rho) for f in tr0) / hr0
    wc = 0.0
    pc = 0.0
    pr = 1.0
    for f0, f1 in zip(tr0, tr1):
        t = f0.time
        diff = weighted_norm(f1 - f0, s)
        pr = max(pr, diff / d0)
        if t > 0:
            wc = max(wc, (weighted_norm(f0, s) - w0) / (t * hr0))
            pc = max(pc, (diff - d0) / (t * pair_scale))
    return GrowthLedger(times, hrho_ratio, wc, pc, pr)


def weighted_growth_rate(u0: Field, cfg: SolverConfig, T: float = 1.0, stride: int = 10) -> float:
    """``max_t |d/dt ||u(t)||_{H^{0,1}}| / ||u(t)||_{H^1}`` by centred differences."""
    tr = evolve(u0, T, cfg, stride=stride)
    t = tr.times
    w = np.array([weighted_norm(f, 1.0) for f in tr])
    h1 = np.array([hs_norm(f, 1.0) for f in tr])
    rate = np.gradient(w, t)
    return float(np.max(np.abs(rate) / h1))


@dataclass(frozen=True)
class PropagationReport:
    ratio: float
    pair_ratio: float
    balanced_norm: float


def hs_propagation_check(
    v_traj: Trajectory,
    s: float,
    other: Trajectory | None = None,
) -> PropagationReport:
    """``||v(end)||_{H^s} / ||v(start)||_{H^s}``, and the same for ``v - other``."""
    ratio = hs_norm(v_traj.last, s) / hs_norm(v_traj.first, s)
    pair = math.nan
    if other is not None:
        pair = hs_norm(v_traj.last - other.last, s) / hs_norm(v_traj.first - other.first, s)
    b = balanced_exponent(v_traj.grid.dim)
    bal = spacetime_norm(v_traj, b, b) if len(v_traj) > 1 else 0.0
    return PropagationReport(ratio, pair, bal)


# -- regularized approximants ------------------------------------------------------


def low_pass(f: Field, cutoff: float) -> Field:
    """Sharp spectral cutoff keeping ``|xi| <= cutoff``."""
    mask = (f.grid.frequency_squared() <= cutoff * cutoff).astype(float)
    return apply_multiplier(f, mask)


def heavy_tail_profile(g: Grid, s: float, amplitude: float = 0.1) -> Field:
    """``amplitude (1 + |x|^2)^{-w/2}`` with ``w = s + 0.6``."""
    w = s + 0.6
    return Field(g, 0.0, amplitude * (1.0 + g.radius_squared()) ** (-w / 2.0))


@dataclass(frozen=True)
class LimitTable:
    cutoffs: tuple[float, ...]
    cauchy: np.ndarray  # ||F(u_i) - F(u_{i+1})||_{H^s}
    data_gaps: np.ndarray  # ||u_i - u_{i+1}||_{H^{0,s}}

    @property
    def constants(self) -> np.ndarray:
        return self.cauchy / self.data_gaps

    @property
    def strictly_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.cauchy) < 0))


def regularized_limit_check(
    u0: Field,
    cutoffs: Sequence[float],
    t_mid: float,
    T_lwp: float,
    cfg: SolverConfig,
    s: float = 0.5,
) -> LimitTable:
    approx = [low_pass(u0, c) for c in cutoffs]
    outs = [f_map(a, t_mid, T_lwp, cfg, s=s, stride=10**12).v_out for a in approx]
    cauchy = np.array([hs_norm(outs[i] - outs[i + 1], s) for i in range(len(outs) - 1)])
    gaps = np.array([weighted_norm(approx[i] - approx[i + 1], s) for i in range(len(approx) - 1)])
    return LimitTable(tuple(cutoffs), cauchy, gaps)


# -- scattering --------------------------------------------------------------------


def scattering_state_from_lens(v0: Field, target: Grid) -> Field:
    """``u_+(x) = (i/2)^{d/2} v0_hat(x/2)`` sampled on ``target``."""
    d = v0.grid.dim
    coeff = (0.5j) ** (d / 2.0)
    return Field(target, 0.0, coeff * fourier_at(v0, target.axis() / 2.0))


@dataclass(frozen=True)
class ScatterReport:
    horizons: tuple[float, ...]
    cauchy: np.ndarray  # ||w(t_i) - w(t_{i+1})||_{H^{0,s}}
    lens_gaps: np.ndarray  # ||w(t_i) - u_plus from lens at t_i|| / ||u0||
    u_plus: Field

    @property
    def cauchy_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.cauchy) < 0))

    @property
    def lens_gap_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.lens_gaps) < 0))


def scatter_extract(
    u0: Field,
    cfg: SolverConfig,
    horizons: Sequence[float] = (2.0, 4.0, 8.0),
    s: float = 0.5,
) -> ScatterReport:
    """Profiles ``w(t) = e^{-it Delta} u(t)`` against the lens-frame state.

    At each horizon ``t`` the solution is transformed and its image evolved
    from ``tau = -1/t`` up to ``tau = 0``; the scattering state is read off
    from the Fourier transform of ``v(0)``.
    """
    horizons = sorted(horizons)
    mass = l2_norm(u0)
    u = u0
    ws, gaps = [], []
    u_plus = None
    for t in horizons:
        u = evolve(u, t, cfg, stride=10**12).last
        ws.append(free_propagate(u, -t).with_time(0.0))
        v0 = evolve(pc_transform(u), 0.0, cfg, stride=10**12).last
        u_plus = scattering_state_from_lens(v0, u0.grid)
        gaps.append(l2_norm(ws[-1] - u_plus) / mass)
    cauchy = np.array([weighted_norm(ws[i] - ws[i + 1], s) for i in range(len(ws) - 1)])
    return ScatterReport(tuple(horizons), cauchy, np.array(gaps), u_plus)
