"""Strang split-step integrator for ``i u_t + Delta u = lam |u|^{4/d} u``.

The nonlinear substep ``u -> exp(-i lam |u|^{4/d} h) u`` is exact because it
leaves ``|u|`` unchanged; the linear substep is the exact spectral
propagator.  Both are modulus/L2 preserving, so mass is conserved to
roundoff.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.fft as sfft

from .field import Field, Grid
from .linear import free_propagate
from .norms import (
    AdmissiblePair,
    Trajectory,
    balanced_exponent,
    canonical_pairs,
    l2_norm,
    time_norm,
    trapezoid_weights,
)


class BlowupError(RuntimeError):
    def __init__(self, step: int, peak: float):
        super().__init__(f"blow-up detected at step {step} (max |u| = {peak:.3e})")
        self.step = step
        self.peak = peak


class LwpError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    lam: float = 1.0
    dt: float = 1e-3
    dealias: bool = False
    snapshot_stride: int = 1
    lambda_cap: float = 1e3
    blowup_threshold: float = 1e8

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if abs(self.lam) > self.lambda_cap:
            raise ValueError(f"|lambda| = {abs(self.lam)} exceeds cap {self.lambda_cap}")
        if self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be >= 1")

    def with_(self, **changes) -> "SolverConfig":
        values = {k: getattr(self, k) for k in self.__dataclass_fields__}
        values.update(changes)
        return SolverConfig(**values)


def dealias_mask(g: Grid) -> np.ndarray:
    keep = np.abs(g.wavenumbers()) <= g.points // 3
    if g.dim == 1:
        return keep.astype(float)
    return np.multiply.outer(keep, keep).astype(float)


class _Stepper:
    """Raw-array Strang stepping on one grid with fixed step size."""

    def __init__(self, grid: Grid, dt: float, cfg: SolverConfig):
        self.grid = grid
        self.dt = dt
        self.lam = cfg.lam
        self.half_power = 2.0 / grid.dim  # |u|^{4/d} = (|u|^2)^{2/d}
        self.limit2 = cfg.blowup_threshold**2
        mult = np.exp(-1j * dt * grid.frequency_squared())
        if cfg.dealias:
            mult = mult * dealias_mask(grid)
        self.mult = mult
        self.step_index = 0

    def kick(self, u: np.ndarray, h: float) -> np.ndarray:
        mod2 = u.real * u.real + u.imag * u.imag
        peak = mod2.max()
        if not math.isfinite(peak) or peak > self.limit2:
            raise BlowupError(self.step_index, math.sqrt(peak) if math.isfinite(peak) else math.inf)
        if self.lam == 0.0:
            return u
        phase = mod2 if self.half_power == 1.0 else mod2**self.half_power
        phase *= self.lam * h
        rot = np.empty_like(u)
        np.cos(phase, out=rot.real)
        np.sin(phase, out=rot.imag)
        np.negative(rot.imag, out=rot.imag)
        rot *= u
        return rot

    def drift(self, u: np.ndarray) -> np.ndarray:
        spec = sfft.fftn(u)
        spec *= self.mult
        return sfft.ifftn(spec, overwrite_x=True)

    def run(self, u: np.ndarray, n: int, record: set[int]):
        """Advance ``n`` steps, yielding ``(step, state)`` after each step in ``record``.

        Consecutive half kicks between unrecorded steps are fused into one.
        """
        u = self.kick(u, 0.5 * self.dt)
        for step in range(1, n + 1):
            self.step_index = step
            u = self.drift(u)
            if step in record or step == n:
                u = self.kick(u, 0.5 * self.dt)
                yield step, u
                if step < n:
                    u = self.kick(u, 0.5 * self.dt)
            else:
                u = self.kick(u, self.dt)


def strang_step(f: Field, cfg: SolverConfig) -> Field:
    stepper = _Stepper(f.grid, cfg.dt, cfg)
    (_, u), = stepper.run(np.array(f.samples), 1, {1})
    return f.with_samples(u, time=f.time + cfg.dt)


def _step_plan(span: float, dt: float) -> tuple[int, float]:
    n = max(1, math.ceil(abs(span) / dt - 1e-9))
    return n, abs(span) / n


def evolve(f: Field, t_target: float, cfg: SolverConfig, stride: int | None = None) -> Trajectory:
    """Solve from ``f.time`` to ``t_target``; snapshots every ``stride`` steps
    plus both endpoints.

    The step is shrunk so that an integer number of steps spans the interval.
    Backward requests run the forward solver on the conjugate: if ``u(t)``
    solves the equation then so does ``conj(u(-t))``.
    """
    span = t_target - f.time
    if span == 0:
        return Trajectory([f])
    if span < 0:
        mirrored = Field(f.grid, -f.time, np.conj(f.samples))
        tr = evolve(mirrored, -t_target, cfg, stride)
        return Trajectory([Field(s.grid, -s.time, np.conj(s.samples)) for s in tr])
    stride = cfg.snapshot_stride if stride is None else stride
    n, dt = _step_plan(span, cfg.dt)
    record = set(range(stride, n + 1, stride))
    stepper = _Stepper(f.grid, dt, cfg)
    out = [f]
    for step, u in stepper.run(np.array(f.samples), n, record):
        t = t_target if step == n else f.time + step * dt
        out.append(Field(f.grid, t, u))
    return Trajectory(out)


def evolve_to(f: Field, t_target: float, cfg: SolverConfig) -> Field:
    """Endpoint of :func:`evolve` without keeping intermediate snapshots."""
    span = t_target - f.time
    if span == 0:
        return f
    return evolve(f, t_target, cfg, stride=10**12).last


def duhamel_residual(tr: Sequence[Field], lam: float, probes: str = "all") -> float:
    """Sup over snapshot times of ``||u(t) - Phi_{u0}[u](t)|| / ||u0||``.

    ``Phi`` is the integral form ``e^{i s Delta} u0 - i lam int e^{i(s-s')Delta}
    |u|^{4/d} u ds'`` with the time integral done by the trapezoid rule over
    the snapshots and every term moved by the exact free propagator.
    """
    fields = list(tr)
    if len(fields) < 16:
        raise ValueError(f"need at least 16 snapshots, got {len(fields)}")
    g = fields[0].grid
    for f in fields[1:]:
        if not f.grid.close_to(g):
            raise ValueError("Duhamel residual needs all snapshots on one grid")
    k2 = g.frequency_squared()
    p = 4.0 / g.dim
    s = np.array([f.time for f in fields]) - fields[0].time
    u0_hat = np.fft.fftn(fields[0].samples)
    norm0 = np.sqrt(np.sum(np.abs(u0_hat) ** 2))
    if norm0 == 0:
        raise ValueError("initial snapshot is zero")
    integral = np.zeros_like(u0_hat)
    prev = None
    worst = 0.0
    for n, f in enumerate(fields):
        u = f.samples
        nl_hat = np.fft.fftn(lam * np.abs(u) ** p * u)
        g_n = np.exp(1j * s[n] * k2) * nl_hat
        if prev is not None:
            integral += 0.5 * (s[n] - s[n - 1]) * (prev + g_n)
        prev = g_n
        phi_hat = np.exp(-1j * s[n] * k2) * (u0_hat - 1j * integral)
        err = np.sqrt(np.sum(np.abs(np.fft.fftn(u) - phi_hat) ** 2)) / norm0
        worst = max(worst, float(err))
    return worst


# -- local well-posedness time -------------------------------------------


@dataclass(frozen=True)
class LwpEstimate:
    T_lwp: float
    delta1: float
    balanced_norm: float
    strichartz_norm: float
    mass: float
    resolution: float
    pairs: tuple[str, ...] = field(default=())

    @property
    def doubling_ok(self) -> bool:
        return self.strichartz_norm <= 2.0 * self.mass * (1 + 1e-12)


def lwp_time(
    u0: Field,
    delta1: float,
    cfg: SolverConfig,
    T_cap: float = 8.0,
    levels: int = 10,
) -> LwpEstimate:
    """Largest dyadic ``T <= T_cap`` with ``||u||_{L^b_{tx}([0,T])} <= delta1``.

    ``b = 2(d+2)/d`` is the balanced exponent.  The balanced norm is
    accumulated over every solver step and read off at the ``2^levels``
    dyadic probe times; it is nondecreasing in ``T`` so the dyadic bisection
    reduces to locating the last probe below the threshold.  The canonical
    Strichartz norms over ``[0, T_lwp]`` are checked against ``2 ||u0||``.
    """
    if not delta1 > 0:
        raise ValueError("delta1 must be positive")
    dim = u0.grid.dim
    b = balanced_exponent(dim)
    pairs = canonical_pairs(dim)
    probe = T_cap / 2**levels
    sub, dt = _step_plan(probe, cfg.dt)
    n_total = sub * 2**levels
    stepper = _Stepper(u0.grid, dt, cfg)
    cell = u0.grid.cell
    mass = l2_norm(u0)

    def lr_all(u):
        a = np.abs(u)
        return {p.r: (float(a.max()) if math.isinf(p.r) else float((np.sum(a**p.r) * cell) ** (1 / p.r))) for p in pairs}

    def balanced_density(u):
        return float(np.sum(np.abs(u) ** b) * cell)

    profiles = [lr_all(u0.samples)]
    probe_times = [0.0]
    accumulated = 0.0
    prev_density = balanced_density(u0.samples)
    T_lwp = None
    record = set(range(1, n_total + 1))
    last_ok = 0.0
    for step, u in stepper.run(np.array(u0.samples), n_total, record):
        density = balanced_density(u)
        accumulated += 0.5 * dt * (prev_density + density)
        prev_density = density
        if step % sub:
            continue
        if accumulated ** (1.0 / b) > delta1:
            T_lwp = last_ok
            break
        last_ok = step * dt
        probe_times.append(last_ok)
        profiles.append(lr_all(u))
    if T_lwp is None:
        T_lwp = last_ok
    if T_lwp <= 0:
        raise LwpError(
            f"balanced norm exceeds delta1={delta1} already at the smallest probe "
            f"T={probe:.3e}; data too large for this T_cap/levels"
        )
    times = np.array(probe_times)
    strich = 0.0
    for p in pairs:
        vals = np.array([prof[p.r] for prof in profiles])
        strich = max(strich, time_norm(vals, times, p.q))
    balanced = time_norm(np.array([prof[b] for prof in profiles]), times, b)
    est = LwpEstimate(
        T_lwp=float(T_lwp),
        delta1=delta1,
        balanced_norm=min(balanced, delta1),
        strichartz_norm=strich,
        mass=mass,
        resolution=probe,
        pairs=tuple(p.label() for p in pairs),
    )
    if not est.doubling_ok:
        raise LwpError(
            f"Strichartz norm {strich:.4g} on [0, {T_lwp}] exceeds twice the mass {2 * mass:.4g}"
        )
    return est


# -- blow-up diagnostic ------------------------------------------------------


@dataclass(frozen=True)
class BlowupReport:
    times: np.ndarray
    proxy: np.ndarray
    ceiling: float

    @property
    def flagged(self) -> bool:
        return bool(np.any(self.proxy > self.ceiling))

    @property
    def final(self) -> float:
        return float(self.proxy[-1])


def blowup_diagnostic(
    tr: Sequence[Field],
    ceiling: float = 1e3,
    pairs: Sequence[AdmissiblePair] | None = None,
) -> BlowupReport:
    """Running canonical-pair Strichartz norm over ``[t0, t_k]`` for each k."""
    fields = list(tr)
    dim = fields[0].grid.dim
    pairs = canonical_pairs(dim) if pairs is None else list(pairs)
    times = np.array([f.time for f in fields])
    profiles = {p: np.array([_lr(f, p.r) for f in fields]) for p in pairs}
    proxy = np.zeros(len(fields))
    for k in range(len(fields)):
        proxy[k] = max(time_norm(profiles[p][: k + 1], times[: k + 1], p.q) for p in pairs)
    return BlowupReport(times, proxy, ceiling)


def _lr(f: Field, r: float) -> float:
    a = np.abs(f.samples)
    if math.isinf(r):
        return float(a.max())
    return float((np.sum(a**r) * f.grid.cell) ** (1 / r))


# -- small-data proximity ------------------------------------------------------


@dataclass(frozen=True)
class ProximityReport:
    distance: float
    data_power: float
    balanced_norm: float

    @property
    def constant(self) -> float:
        return self.distance / self.data_power


def linear_proximity(u0: Field, t: float, cfg: SolverConfig, stride: int = 10) -> ProximityReport:
    """Measure ``||u(t) - e^{it Delta} u0||`` against ``||u0||^{1+4/d}``."""
    tr = evolve(u0, u0.time + t, cfg, stride=stride)
    lin = free_propagate(u0, t)
    dist = l2_norm(tr.last - lin)
    dim = u0.grid.dim
    b = balanced_exponent(dim)
    bal = time_norm(np.array([_lr(f, b) for f in tr]), tr.times, b)
    return ProximityReport(dist, l2_norm(u0) ** (1.0 + 4.0 / dim), bal)
