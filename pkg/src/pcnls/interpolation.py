"""Real interpolation by the K-method.

``K(lam, f) = inf_{f = f0 + f1} (||f0||_0^2 + lam^2 ||f1||_1^2)^{1/2}`` and

    ||f||_s^2 = 2 s (1 - s) * int_0^inf lam^{-2s-1} K(lam, f)^2 dlam.

The factor ``2 s (1 - s)`` makes ``||f||_s <= ||f||_0^{1-s} ||f||_1^s`` hold
with constant one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .field import Field
from .norms import hs_norm, l2_norm, weighted_norm
from .pseudoconformal import T_MIN, pc_transform

NORMS = {
    "L2": l2_norm,
    "H01": lambda f: weighted_norm(f, 1.0),
    "H1": lambda f: hs_norm(f, 1.0),
    "H01H1": lambda f: weighted_norm(f, 1.0) + hs_norm(f, 1.0),
}


@dataclass(frozen=True)
class NormPair:
    norm0: str = "L2"
    norm1: str = "H01"

    def __post_init__(self):
        for name in (self.norm0, self.norm1):
            if name not in NORMS:
                raise ValueError(f"unknown norm {name!r}; expected one of {sorted(NORMS)}")

    def first(self, f: Field) -> float:
        return NORMS[self.norm0](f)

    def second(self, f: Field) -> float:
        return NORMS[self.norm1](f)

    @property
    def exact(self) -> bool:
        """Whether the pointwise decomposition is the true minimizer."""
        return self.norm0 == "L2" and self.norm1 in ("H01", "H1")


def _check_lam(lam: float) -> None:
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")


def optimal_decomposition(f: Field, lam: float) -> tuple[Field, Field]:
    """Pointwise minimizer for the ``(L2, H^{0,1})`` pair."""
    _check_lam(lam)
    w = lam * lam * (1.0 + f.grid.radius_squared())
    part1 = f.samples / (1.0 + w)
    return f.with_samples(f.samples - part1), f.with_samples(part1)


def spectral_decomposition(f: Field, lam: float) -> tuple[Field, Field]:
    """Minimizer for the ``(L2, H^1)`` pair: the same split on the Fourier side."""
    _check_lam(lam)
    w = lam * lam * (1.0 + f.grid.frequency_squared())
    part1 = np.fft.ifftn(np.fft.fftn(f.samples) / (1.0 + w))
    return f.with_samples(f.samples - part1), f.with_samples(part1)


def decompose(f: Field, lam: float, pair: NormPair) -> tuple[Field, Field]:
    if not pair.exact:
        raise ValueError(f"no optimal decomposition for pair {pair}")
    if pair.norm1 == "H1":
        return spectral_decomposition(f, lam)
    return optimal_decomposition(f, lam)


def k_functional(f: Field, lam: float, pair: NormPair = NormPair(), mode: str = "optimal") -> float:
    """K-functional; an upper bound whenever the decomposition is not exact."""
    _check_lam(lam)
    if mode == "trivial-ends":
        return min(pair.first(f), lam * pair.second(f))
    if mode != "optimal":
        raise ValueError(f"unknown mode {mode!r}")
    if pair.exact:
        candidates = [decompose(f, lam, pair)]
    elif pair.norm0 == "L2":
        # every split is admissible; keep the best of the two pointwise
        # minimizers and the trivial ends
        candidates = [
            optimal_decomposition(f, lam),
            spectral_decomposition(f, lam),
            (f, f.with_samples(np.zeros_like(f.samples))),
            (f.with_samples(np.zeros_like(f.samples)), f),
        ]
    else:
        raise ValueError(f"no optimal decomposition for pair {pair}")
    return min(math.sqrt(pair.first(f0) ** 2 + lam * lam * pair.second(f1) ** 2) for f0, f1 in candidates)


def interp_norm(
    f: Field,
    s: float,
    pair: NormPair = NormPair(),
    nodes: int = 400,
    window: tuple[float, float] = (1e-4, 1e4),
) -> float:
    """Interpolation norm by log-spaced trapezoid quadrature plus tail bounds.

    Outside the window the tails use ``K <= lam ||f||_1`` below and
    ``K <= ||f||_0`` above, integrated in closed form.
    """
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    lo, hi = window
    lams = np.geomspace(lo, hi, nodes)
    k2 = np.array([k_functional(f, lam, pair) ** 2 for lam in lams])
    # d lam / lam = d log lam
    integral = np.trapezoid(lams ** (-2.0 * s) * k2, np.log(lams))
    a0, a1 = pair.first(f), pair.second(f)
    integral += a1 * a1 * lo ** (2.0 - 2.0 * s) / (2.0 - 2.0 * s)
    integral += a0 * a0 * hi ** (-2.0 * s) / (2.0 * s)
    return math.sqrt(2.0 * s * (1.0 - s) * integral)


def weighted_interp_constant(s: float) -> float:
    """Exact ratio ``||f||_{(L2, H^{0,1})_s} / ||f||_{H^{0,s}}`` for the normalized method."""
    return math.sqrt(2.0 * s * (1.0 - s) * math.pi / (2.0 * math.sin(math.pi * s)))


@dataclass(frozen=True)
class TransformedHsReport:
    t: float
    s: float
    transformed_hs: float
    weighted: float
    h1: float

    @property
    def ratio(self) -> float:
        return self.transformed_hs / (self.weighted + self.t * self.h1)


def lemma23_bound_check(u: Field, s: float, t_min: float = T_MIN) -> TransformedHsReport:
    """``||C[u]||_{H^s} / (||u||_{H^{0,s}} + t ||u||_{H^1})`` at the time stamp of ``u``."""
    t = u.time
    if not t_min < t <= 1.0:
        raise ValueError(f"time {t} outside ({t_min}, 1]")
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    if l2_norm(u) == 0:
        raise ValueError("ratio is undefined for the zero field")
    v = pc_transform(u, t_min=t_min)
    return TransformedHsReport(t, s, hs_norm(v, s), weighted_norm(u, s), hs_norm(u, 1.0))
