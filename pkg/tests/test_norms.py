import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from conftest import random_field
from pcnls import Field, Grid, Trajectory
from pcnls.linear import free_propagate
from pcnls.norms import (
    AdmissiblePair,
    admissible,
    balanced_exponent,
    canonical_pairs,
    energy,
    fractional_derivative,
    homogeneous_hs_norm,
    hs_norm,
    l2_norm,
    lr_norm,
    spacetime_norm,
    strichartz_s_norm,
    strichartz_sup_norm,
    time_norm,
    trapezoid_weights,
    weighted_norm,
)

G1 = Grid(1, 512, 20.0)
UNIT = Field.from_function(G1, lambda x: np.exp(-(x**2) / 2.0))


@pytest.mark.parametrize("r", [1.0, 2.0, 3.5, 6.0])
def test_lr_norm_of_gaussian(r):
    assert lr_norm(UNIT, r) == pytest.approx(math.sqrt(2 * math.pi / r) ** (1 / r), rel=1e-13)


def test_lr_norm_inf_and_bad_exponent():
    assert lr_norm(UNIT, math.inf) == 1.0
    with pytest.raises(ValueError):
        lr_norm(UNIT, 0.5)


@pytest.mark.parametrize("s", [0.0, 0.25, 0.5, 1.0, 1.5])
def test_hs_norm_of_gaussian(s):
    # the transform of UNIT is exp(-xi^2/2)
    expected, _ = integrate.quad(lambda k: (1 + k * k) ** s * math.exp(-k * k), -np.inf, np.inf, epsrel=1e-13)
    assert hs_norm(UNIT, s) == pytest.approx(math.sqrt(expected), rel=1e-12)


def test_homogeneous_norm_and_abs_weight_of_gaussian_smooth_case():
    # int |xi|^2 e^{-xi^2} = Gamma(3/2); the Gaussian is its own transform
    expected = math.sqrt(special.gamma(1.5))
    assert homogeneous_hs_norm(UNIT, 1.0) == pytest.approx(expected, rel=1e-12)
    assert weighted_norm(UNIT, 1.0, weight="abs") == pytest.approx(expected, rel=1e-12)


def _gaussian(points, half_width):
    return Field.from_function(Grid(1, points, half_width), lambda x: np.exp(-(x**2) / 2.0))


@pytest.mark.parametrize("s", [0.25, 0.5])
def test_kinked_weights_converge_at_rate_one_plus_2s(s):
    # |xi|^{2s} and |x|^{2s} have a kink at the origin: lattice sums converge like h^{1+2s}
    expected = math.sqrt(special.gamma(s + 0.5))
    spec = [abs(homogeneous_hs_norm(_gaussian(n, L), s) - expected) for n, L in ((512, 20.0), (1024, 40.0), (2048, 80.0))]
    space = [abs(weighted_norm(_gaussian(n, 20.0), s, weight="abs") - expected) for n in (512, 1024, 2048)]
    for errors in (spec, space):
        rates = np.log2(np.array(errors[:-1]) / errors[1:])
        np.testing.assert_allclose(rates, 1 + 2 * s, atol=0.05)


@pytest.mark.parametrize("s", [0.0, 0.3, 0.5, 1.0])
def test_bracket_weight_of_gaussian(s):
    expected, _ = integrate.quad(lambda x: (1 + x * x) ** s * math.exp(-x * x), -np.inf, np.inf, epsrel=1e-13)
    assert weighted_norm(UNIT, s) == pytest.approx(math.sqrt(expected), rel=1e-12)


def test_norm_argument_checks():
    with pytest.raises(ValueError):
        hs_norm(UNIT, -0.1)
    with pytest.raises(ValueError):
        weighted_norm(UNIT, 1.5)
    with pytest.raises(ValueError, match="unknown weight"):
        weighted_norm(UNIT, 0.5, weight="box")


def test_fractional_derivative_order_two_is_minus_laplacian():
    d2 = fractional_derivative(UNIT, 2.0)
    x = G1.axis()
    np.testing.assert_allclose(d2.samples, -(x**2 - 1) * np.exp(-(x**2) / 2), atol=1e-12)


@pytest.mark.parametrize("lam", [0.0, 1.0, -0.5])
def test_energy_of_gaussian(lam):
    kinetic = 0.5 * math.sqrt(math.pi) / 2.0
    potential = lam / 6.0 * math.sqrt(math.pi / 3.0)
    assert energy(UNIT, lam) == pytest.approx(kinetic + potential, rel=1e-12)


def test_energy_of_gaussian_2d():
    g = Grid(2, 128, 12.0)
    u = Field.from_function(g, lambda x, y: np.exp(-(x**2 + y**2) / 2.0))
    # kinetic: 1/2 int |x|^2 e^{-|x|^2} = pi/2; potential: lam/4 int e^{-2|x|^2} = lam pi/8
    assert energy(u, 1.0) == pytest.approx(math.pi / 2 + math.pi / 8, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(t=st.floats(-2.0, 2.0, allow_nan=False))
def test_free_flow_conserves_mass_and_kinetic_energy(t):
    u = free_propagate(UNIT, t)
    assert l2_norm(u) == pytest.approx(l2_norm(UNIT), rel=1e-13)
    assert energy(u, 0.0) == pytest.approx(energy(UNIT, 0.0), rel=1e-12)


@pytest.mark.parametrize(
    "q, r, dim, expected",
    [
        (math.inf, 2, 1, True),
        (4, math.inf, 1, True),
        (6, 6, 1, True),
        (8, 4, 1, True),
        (4, 4, 1, False),
        (1, 2, 1, False),
        (math.inf, 2, 2, True),
        (4, 4, 2, True),
        (8 / 3, 8, 2, True),
        (2, math.inf, 2, False),
        (3, 3, 2, False),
    ],
)
def test_admissibility(q, r, dim, expected):
    assert admissible(q, r, dim) is expected


@pytest.mark.parametrize("dim", [1, 2])
def test_canonical_pairs(dim):
    pairs = canonical_pairs(dim)
    assert all(p.is_admissible(dim) for p in pairs)
    b = balanced_exponent(dim)
    assert AdmissiblePair(b, b) in pairs
    assert balanced_exponent(1) == 6.0 and balanced_exponent(2) == 4.0


def test_pair_labels():
    assert AdmissiblePair(math.inf, 2.0).label() == "(inf,2)"
    assert AdmissiblePair(8 / 3, 8.0).label() == "(8/3,8)"


def test_time_quadrature_is_exact_for_linear_profiles():
    t = np.array([0.0, 0.3, 1.0, 2.0])
    np.testing.assert_allclose(trapezoid_weights(t), [0.15, 0.5, 0.85, 0.5])
    assert time_norm(1.0 + t, t, 1.0) == pytest.approx(4.0)
    assert time_norm(np.full(4, 3.0), t, 2.0) == pytest.approx(3.0 * math.sqrt(2.0))
    assert time_norm(t, t, math.inf) == 2.0


def test_spacetime_norm_mass_pair_and_errors():
    fields = [free_propagate(UNIT, t) for t in np.linspace(0, 1, 5)]
    assert spacetime_norm(fields, math.inf, 2) == pytest.approx(l2_norm(UNIT), rel=1e-13)
    with pytest.raises(ValueError, match="admissible"):
        spacetime_norm(fields, 4, 4)
    with pytest.raises(ValueError):
        spacetime_norm([], math.inf, 2)
    with pytest.raises(ValueError):
        strichartz_sup_norm(fields, [])


def test_strichartz_s_norm_dominates_s_zero():
    fields = [free_propagate(UNIT, t) for t in np.linspace(0, 1, 9)]
    pairs = canonical_pairs(1)
    assert strichartz_s_norm(fields, 0.5, pairs) >= strichartz_sup_norm(fields, pairs)


def test_trajectory_validation(rng):
    f = random_field(rng, G1)
    with pytest.raises(ValueError, match="one grid"):
        Trajectory([f, random_field(rng, Grid(1, 512, 10.0), 1.0)])
    with pytest.raises(ValueError, match="monotone"):
        Trajectory([f, f.with_time(1.0), f.with_time(0.5)])
    tr = Trajectory([f, f.with_time(-1.0)])
    assert tr.interval == (0.0, -1.0)
    assert len(tr) == 2 and tr.first is f
