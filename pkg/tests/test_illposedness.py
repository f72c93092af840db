import math

import numpy as np
import pytest
from scipy import integrate

from pcnls import Grid, SolverConfig
from pcnls.illposedness import (
    CascadeInfeasibleError,
    CascadeSchedule,
    build_schedule,
    cascade_profile,
    cascade_weighted_norm,
    check_schedule,
    geometric_terms,
    linear_cascade_field,
    linear_divergence_table,
    nls_illposed_demo,
    top_term_dominance,
)
from pcnls.linear import c_ds, r_width
from pcnls.norms import weighted_norm

# moderate widths so that a grid can resolve every term
SMALL = CascadeSchedule(((1.0, 1.0), (0.5, 16.0)), s=0.5, dim=1)


@pytest.mark.parametrize("s, dim", [(0.5, 1), (0.5, 2), (0.75, 1)])
def test_built_schedules_pass_the_brute_force_check(s, dim):
    sch = build_schedule(4, s, dim)
    rep = check_schedule(sch)
    assert rep.ok
    assert len(sch.terms) == 4
    assert np.all(np.diff(sch.widths) > 0)
    np.testing.assert_allclose(sch.amplitudes, sch.widths ** (-s / 4))


def test_low_regularity_cascade_is_infeasible():
    with pytest.raises(CascadeInfeasibleError):
        build_schedule(4, 0.25, 1)


def test_schedule_argument_checks():
    for kw in ({"k_max": 0}, {"k_max": 9}, {"growth": 1.0}, {"s": 0.0}, {"s": 1.5}):
        args = {"k_max": 3, "s": 0.5, "dim": 1} | kw
        with pytest.raises(ValueError):
            build_schedule(**args)


def test_check_schedule_flags_a_slow_schedule():
    slow = CascadeSchedule(geometric_terms(3, 0.5, 2.0, 1.0), 0.5, 1)
    assert not check_schedule(slow).ok


@pytest.mark.parametrize("t", [0.0, 0.7])
def test_grid_field_matches_gridless_profile(t):
    g = Grid(1, 2048, 40.0)
    f = linear_cascade_field(SMALL, t, g)
    r = np.abs(g.axis())
    np.testing.assert_allclose(f.samples, cascade_profile(SMALL, t, r), atol=1e-14)
    assert cascade_weighted_norm(SMALL, t) == pytest.approx(weighted_norm(f, 0.5), rel=1e-6)


def test_grid_must_resolve_the_narrowest_term():
    with pytest.raises(ValueError, match="resolve"):
        linear_cascade_field(SMALL, 0.0, Grid(1, 256, 40.0))
    with pytest.raises(ValueError, match="dimension"):
        linear_cascade_field(SMALL, 0.0, Grid(2, 512, 8.0))


@pytest.mark.parametrize("t", [0.0, 1.0])
def test_single_term_norm_against_quadrature(t):
    sch = CascadeSchedule(((0.8, 3.0),), s=0.5, dim=1)
    # |u(t,x)|^2 = A^2 (a/pi)^{1/2} |z|^{-1} exp(-a x^2/|z|^2), z = 1 + 2iat
    A, a = sch.terms[0]
    z2 = 1 + 4 * a * a * t * t
    dens = lambda x: (1 + x * x) ** 0.5 * A**2 * math.sqrt(a / math.pi / z2) * math.exp(-a * x * x / z2)
    expected, _ = integrate.quad(dens, -np.inf, np.inf, epsrel=1e-12)
    assert cascade_weighted_norm(sch, t) == pytest.approx(math.sqrt(expected), rel=1e-8)


def test_single_term_norm_in_two_dimensions():
    sch = CascadeSchedule(((1.0, 2.0),), s=1.0, dim=2)
    # ||<x> u0||^2 = A^2 (1 + d/(2a)) for the normalized Gaussian
    assert cascade_weighted_norm(sch, 0.0) == pytest.approx(math.sqrt(1 + 1 / 2.0), rel=1e-8)


def test_divergence_table():
    sch = build_schedule(4, 0.5, 1)
    times = (0.0, 0.5, 1.0)
    rows = linear_divergence_table(sch, times)
    assert len(rows) == 12
    for t in times:
        norms = [r.norm for r in rows if r.t == t]
        if t == 0.0:
            # bounded data: the weighted norm of u0 stays near its first term
            assert max(norms) < 2.0
        else:
            assert np.all(np.diff(norms) > 0)
            assert norms[-1] > 100 * norms[0]
    for r in rows:
        if r.t > 0:
            assert r.norm >= r.lower_bound
    with pytest.raises(ValueError):
        linear_divergence_table(sch, (-1.0,))


def test_top_term_dominates_locally():
    sch = build_schedule(3, 0.5, 1)
    rep = top_term_dominance(sch, 1.0)
    assert rep.j == 2
    assert rep.ok


def test_nls_demo_single_level():
    cfg = SolverConfig(lam=1.0, dt=1e-3)
    res = nls_illposed_demo(1, 0.5, 1, 1.0, cfg)
    assert res.a == 10.0 and res.A == pytest.approx(10 ** -0.125)
    assert res.boundary < 1e-12
    assert res.norm_out > res.norm_in
    # the NLS weighted norm tracks the linear prediction
    assert res.norm_out == pytest.approx(res.predicted_linear * math.sqrt(1 + r_width(10.0, 1.0) ** -1), rel=0.5)
    assert res.predicted_linear == pytest.approx(c_ds(1, 0.5) * res.A * r_width(10.0, 1.0) ** 0.5)
    assert 0 < res.proximity_constant < 2 ** (1 + 4)


@pytest.mark.parametrize(
    "kw, match",
    [
        ({"a": 1e5}, "affordable"),
        ({"t_probe": 0.0}, "positive"),
        ({"t_probe": 0.05}, "lens-frame"),
    ],
)
def test_nls_demo_argument_checks(kw, match):
    args = {"k": 1, "s": 0.5, "dim": 1, "t_probe": 1.0, "cfg": SolverConfig(lam=1.0, dt=1e-3)} | kw
    with pytest.raises(ValueError, match=match):
        nls_illposed_demo(**args)
    with pytest.raises(ValueError, match="defocusing"):
        nls_illposed_demo(1, 0.5, 1, 1.0, SolverConfig(lam=-1.0))
