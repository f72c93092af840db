import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcnls import Field, GaussianParams, Grid, SolverConfig, evolve, gaussian_exact, gaussian_initial
from pcnls.norms import energy, l2_norm
from pcnls.solver import (
    BlowupError,
    LwpError,
    blowup_diagnostic,
    dealias_mask,
    duhamel_residual,
    evolve_to,
    linear_proximity,
    lwp_time,
    strang_step,
)


def plane_wave(g: Grid, c: complex, k: int, lam: float, t: float) -> Field:
    """Exact periodic solution c exp(i(xi x - (xi^2 + lam |c|^{4/d}) t)) along the first axis."""
    xi = math.pi * k / g.half_width
    omega = xi * xi + lam * abs(c) ** (4.0 / g.dim)
    return Field.from_function(g, lambda *x: c * np.exp(1j * (xi * x[0] - omega * t)), time=t)


@pytest.mark.parametrize("dim", [1, 2])
@pytest.mark.parametrize("lam", [1.0, -0.5])
def test_plane_waves_are_reproduced(dim, lam):
    g = Grid(dim, 32, 4.0)
    u0 = plane_wave(g, 0.7 - 0.2j, 3, lam, 0.0)
    u = evolve_to(u0, 1.3, SolverConfig(lam=lam, dt=0.01))
    assert l2_norm(u - plane_wave(g, 0.7 - 0.2j, 3, lam, 1.3)) / l2_norm(u0) < 1e-12


def test_free_evolution_matches_closed_form():
    g = Grid(1, 512, 20.0)
    p = GaussianParams(1.0, 1.0)
    u = evolve_to(gaussian_initial(p, g), 1.0, SolverConfig(lam=0.0, dt=1e-3))
    exact = gaussian_exact(p, 1.0, g)
    assert l2_norm(u - exact) / l2_norm(exact) < 1e-12


def test_mass_is_conserved():
    g = Grid(1, 512, 30.0)
    u0 = gaussian_initial(GaussianParams(1.5, 1.0), g)
    tr = evolve(u0, 2.0, SolverConfig(lam=1.0, dt=1e-3), stride=200)
    masses = np.array([l2_norm(f) for f in tr])
    assert np.max(np.abs(masses / masses[0] - 1)) < 1e-12


def test_energy_error_is_second_order():
    g = Grid(1, 1024, 40.0)
    u0 = gaussian_initial(GaussianParams(1.0, 1.0), g)
    e0 = energy(u0, 1.0)
    drifts = [abs(energy(evolve_to(u0, 1.0, SolverConfig(lam=1.0, dt=dt)), 1.0) - e0) for dt in (0.02, 0.01, 0.005)]
    ratios = np.array(drifts[:-1]) / drifts[1:]
    assert np.all((ratios > 3.5) & (ratios < 4.5))


@pytest.mark.parametrize("dim", [1, 2])
def test_time_reversal(dim):
    g = Grid(dim, 256 if dim == 1 else 64, 16.0)
    u0 = gaussian_initial(GaussianParams(1.0, 1.0), g)
    cfg = SolverConfig(lam=1.0, dt=1e-2)
    back = evolve_to(evolve_to(u0, 1.0, cfg), 0.0, cfg)
    assert back.time == 0.0
    assert l2_norm(back - u0) / l2_norm(u0) < 1e-12


def test_backward_evolution_is_conjugate_of_forward():
    g = Grid(1, 256, 16.0)
    u0 = Field.from_function(g, lambda x: np.exp(-(x**2) + 0.5j * x))
    cfg = SolverConfig(lam=1.0, dt=1e-2)
    backward = evolve_to(u0, -0.5, cfg)
    forward = evolve_to(u0.conj(), 0.5, cfg).conj()
    assert backward.time == -0.5
    np.testing.assert_array_equal(backward.samples, forward.samples)


def test_step_plan_and_snapshots():
    g = Grid(1, 64, 8.0)
    u0 = gaussian_initial(GaussianParams(1.0, 1.0), g)
    tr = evolve(u0, 0.0105, SolverConfig(lam=1.0, dt=1e-3), stride=5)
    # 11 steps of 0.0105/11: snapshots after steps 5, 10 and the endpoint
    np.testing.assert_allclose(tr.times, [0.0, 5 * 0.0105 / 11, 10 * 0.0105 / 11, 0.0105])
    assert tr.last.time == 0.0105
    assert len(evolve(u0, 0.0, SolverConfig())) == 1


def test_strang_step_advances_time():
    g = Grid(1, 32, 4.0)
    u0 = plane_wave(g, 0.5, 1, 1.0, 0.0)
    u1 = strang_step(u0, SolverConfig(lam=1.0, dt=0.1))
    assert u1.time == pytest.approx(0.1)
    assert l2_norm(u1 - plane_wave(g, 0.5, 1, 1.0, 0.1)) < 1e-13


@pytest.mark.parametrize("kw", [{"dt": 0.0}, {"dt": -1.0}, {"lam": 2e3}, {"snapshot_stride": 0}])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SolverConfig(**kw)


def test_blowup_is_reported_with_step():
    g = Grid(1, 64, 8.0)
    u0 = gaussian_initial(GaussianParams(3.0, 1.0), g)
    with pytest.raises(BlowupError) as info:
        evolve(u0, 1.0, SolverConfig(lam=-1.0, dt=1e-3, blowup_threshold=2.0))
    assert info.value.step >= 0
    assert info.value.peak > 2.0


def test_dealias_mask_keeps_two_thirds():
    g = Grid(1, 64, 4.0)
    mask = dealias_mask(g)
    k = np.abs(g.wavenumbers())
    np.testing.assert_array_equal(mask.astype(bool), k <= 64 // 3)
    # a band-limited plane wave passes unchanged
    u0 = plane_wave(g, 0.4, 2, 1.0, 0.0)
    u = evolve_to(u0, 0.5, SolverConfig(lam=1.0, dt=0.01, dealias=True))
    assert l2_norm(u - plane_wave(g, 0.4, 2, 1.0, 0.5)) < 1e-12


def test_duhamel_residual_detects_the_equation():
    g = Grid(1, 256, 16.0)
    u0 = gaussian_initial(GaussianParams(0.8, 1.0), g)
    tr = evolve(u0, 0.5, SolverConfig(lam=1.0, dt=1e-3), stride=25)
    good = duhamel_residual(tr, 1.0)
    assert good < 1e-3
    assert duhamel_residual(tr, -1.0) > 100 * good
    assert duhamel_residual(tr, 0.0) > 10 * good


def test_duhamel_residual_converges_with_snapshot_density():
    g = Grid(1, 256, 16.0)
    u0 = gaussian_initial(GaussianParams(0.8, 1.0), g)
    cfg = SolverConfig(lam=1.0, dt=1e-3)
    coarse = duhamel_residual(evolve(u0, 0.5, cfg, stride=25), 1.0)
    fine = duhamel_residual(evolve(u0, 0.5, cfg, stride=10), 1.0)
    # trapezoid in time: 2.5x more snapshots gives about 6x less error
    assert 4.0 < coarse / fine < 8.0


def test_duhamel_residual_argument_checks():
    g = Grid(1, 64, 8.0)
    u0 = gaussian_initial(GaussianParams(1.0, 1.0), g)
    short = evolve(u0, 0.1, SolverConfig(lam=1.0, dt=0.01), stride=2)
    with pytest.raises(ValueError, match="16"):
        duhamel_residual(short, 1.0)


def test_lwp_time_decreases_with_amplitude():
    g = Grid(1, 512, 24.0)
    cfg = SolverConfig(lam=1.0, dt=1e-3)
    small = lwp_time(gaussian_initial(GaussianParams(0.1, 1.0), g), 0.1, cfg)
    larger = lwp_time(gaussian_initial(GaussianParams(0.14, 1.0), g), 0.1, cfg)
    assert small.T_lwp == 8.0
    assert 0 < larger.T_lwp < small.T_lwp
    assert larger.balanced_norm <= 0.1
    assert larger.doubling_ok
    assert larger.pairs == ("(inf,2)", "(6,6)", "(8,4)")
    # dyadic resolution
    assert (larger.T_lwp / larger.resolution) == int(larger.T_lwp / larger.resolution)


def test_lwp_time_rejects_large_data():
    g = Grid(1, 512, 24.0)
    with pytest.raises(LwpError):
        lwp_time(gaussian_initial(GaussianParams(0.5, 1.0), g), 0.1, SolverConfig(lam=1.0, dt=1e-3), levels=4)
    with pytest.raises(ValueError):
        lwp_time(gaussian_initial(GaussianParams(0.1, 1.0), g), 0.0, SolverConfig())


def test_blowup_diagnostic():
    g = Grid(1, 256, 16.0)
    u0 = gaussian_initial(GaussianParams(1.0, 1.0), g)
    tr = evolve(u0, 1.0, SolverConfig(lam=1.0, dt=1e-2), stride=5)
    rep = blowup_diagnostic(tr)
    assert np.all(np.diff(rep.proxy) >= 0)
    assert not rep.flagged
    assert rep.final == rep.proxy[-1]
    assert blowup_diagnostic(tr, ceiling=0.5).flagged


@settings(max_examples=5, deadline=None)
@given(A=st.floats(0.02, 0.08))
def test_linear_proximity_scales_with_data_power(A):
    # for small data u - e^{it Delta} u0 is cubic-order in u0 (quintic power here)
    g = Grid(1, 256, 16.0)
    cfg = SolverConfig(lam=1.0, dt=1e-2)
    ref = linear_proximity(gaussian_initial(GaussianParams(0.01, 1.0), g), 0.5, cfg).constant
    rep = linear_proximity(gaussian_initial(GaussianParams(A, 1.0), g), 0.5, cfg)
    assert rep.constant == pytest.approx(ref, rel=0.05)
