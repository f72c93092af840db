import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from conftest import random_field
from pcnls import Grid, GaussianParams, free_propagate, gaussian_exact, gaussian_initial
from pcnls.field import apply_multiplier
from pcnls.linear import (
    c_ds,
    c_ds_closed_form,
    c_prime_ds,
    c_prime_ds_closed_form,
    gaussian_weighted_moment,
    r_width,
)
from pcnls.norms import l2_norm


@pytest.mark.parametrize("dim, points", [(1, 512), (2, 128)])
@pytest.mark.parametrize("t", [-0.7, 0.5, 1.0])
def test_free_propagation_matches_closed_form(dim, points, t):
    g = Grid(dim, points, 20.0)
    p = GaussianParams(1.3, 0.8)
    u = free_propagate(gaussian_initial(p, g), t)
    exact = gaussian_exact(p, t, g)
    assert u.time == t
    assert l2_norm(u - exact) / l2_norm(exact) < 1e-12


def test_gaussian_has_unit_mass_per_amplitude():
    for dim, points in ((1, 512), (2, 128)):
        g = Grid(dim, points, 16.0)
        assert l2_norm(gaussian_initial(GaussianParams(2.5, 1.7), g)) == pytest.approx(2.5, rel=1e-13)


def test_closed_form_solves_the_free_equation():
    # i u_t + u_xx = 0 with a centred time difference and the exact second derivative
    g = Grid(1, 512, 20.0)
    p = GaussianParams(1.0, 1.0)
    t, eps = 0.4, 1e-5
    ut = (gaussian_exact(p, t + eps, g).samples - gaussian_exact(p, t - eps, g).samples) / (2 * eps)
    uxx = apply_multiplier(gaussian_exact(p, t, g), -g.frequency_squared()).samples
    assert np.max(np.abs(1j * ut + uxx)) < 1e-8


@settings(max_examples=20, deadline=None)
@given(s=st.floats(-2, 2), t=st.floats(-2, 2), seed=st.integers(0, 2**31))
def test_group_property_and_unitarity(s, t, seed):
    f = random_field(np.random.default_rng(seed), Grid(1, 64, 5.0))
    lhs = free_propagate(free_propagate(f, s), t)
    rhs = free_propagate(f, s + t)
    assert l2_norm(lhs - rhs) <= 1e-12 * l2_norm(f)
    assert l2_norm(lhs) == pytest.approx(l2_norm(f), rel=1e-13)


def test_gaussian_parameter_validation():
    with pytest.raises(ValueError):
        GaussianParams(0.0, 1.0)
    with pytest.raises(ValueError):
        GaussianParams(1.0, -1.0)
    with pytest.raises(ValueError, match="too small"):
        gaussian_initial(GaussianParams(1.0, 0.1), Grid(1, 64, 10.0))
    with pytest.raises(ValueError):
        r_width(0.0, 1.0)


@pytest.mark.parametrize("dim", [1, 2])
@pytest.mark.parametrize("s", [0.1, 0.5, 0.75, 1.0])
def test_constants_quadrature_vs_gamma(dim, s):
    assert c_ds(dim, s) == pytest.approx(c_ds_closed_form(dim, s), rel=1e-12)
    assert c_prime_ds(dim, s) == pytest.approx(c_prime_ds_closed_form(dim, s), rel=1e-12)
    assert c_prime_ds(dim, s) < c_ds(dim, s)


def test_known_constant_values():
    # C_{1,1/2}^2 = Gamma(1)/Gamma(1/2); C_{2,1}^2 = Gamma(2)/Gamma(1)
    assert c_ds(1, 0.5) == pytest.approx(math.pi**-0.25, rel=1e-13)
    assert c_ds(2, 1.0) == pytest.approx(1.0, rel=1e-13)


@pytest.mark.parametrize("a, t, s", [(1.0, 0.0, 0.5), (0.5, 1.0, 0.75), (2.0, 0.5, 1.0), (1.0, -1.5, 0.3)])
def test_weighted_moment_against_direct_quadrature(a, t, s):
    p = GaussianParams(1.3, a)
    # |u(t,x)|^2 = A^2 (a/pi)^{1/2} |z|^{-1} exp(-a x^2 / |z|^2), z = 1 + 2iat
    z2 = 1 + 4 * a * a * t * t
    dens = lambda x: p.A**2 * math.sqrt(a / math.pi) / math.sqrt(z2) * math.exp(-a * x * x / z2)
    val, _ = integrate.quad(lambda x: abs(x) ** (2 * s) * dens(x), -np.inf, np.inf, epsrel=1e-12)
    assert gaussian_weighted_moment(p, t, s, 1) == pytest.approx(math.sqrt(val), rel=1e-10)
