import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_field
from pcnls import Field, GaussianParams, Grid, gaussian_exact
from pcnls.interpolation import (
    NormPair,
    decompose,
    interp_norm,
    k_functional,
    lemma23_bound_check,
    optimal_decomposition,
    spectral_decomposition,
    weighted_interp_constant,
)
from pcnls.norms import hs_norm, l2_norm, weighted_norm

G = Grid(1, 256, 12.0)
BUMP = Field.from_function(G, lambda x: np.exp(-(x**2) / 2.0) * (1 + 0.5j * x))


@pytest.mark.parametrize("lam", [1e-2, 0.3, 1.0, 7.0])
def test_k_functional_closed_form(lam):
    # pointwise minimization gives K^2 = int |f|^2 w / (1 + w), w = lam^2 <x>^2
    w = lam**2 * (1 + G.axis() ** 2)
    expected = math.sqrt(np.sum(np.abs(BUMP.samples) ** 2 * w / (1 + w)) * G.cell)
    assert k_functional(BUMP, lam) == pytest.approx(expected, rel=1e-13)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), lam=st.floats(1e-3, 1e3), which=st.sampled_from(["H01", "H1"]))
def test_optimal_split_beats_random_splits(seed, lam, which):
    rng = np.random.default_rng(seed)
    f = random_field(rng, Grid(1, 64, 5.0))
    pair = NormPair("L2", which)
    k = k_functional(f, lam, pair)
    f1 = random_field(rng, f.grid)
    trial = math.sqrt(pair.first(f - f1) ** 2 + lam**2 * pair.second(f1) ** 2)
    assert k <= trial * (1 + 1e-12)
    assert k <= k_functional(f, lam, pair, mode="trivial-ends") * (1 + 1e-12)


def test_decompositions_sum_to_input():
    for split in (optimal_decomposition, spectral_decomposition):
        f0, f1 = split(BUMP, 0.7)
        np.testing.assert_allclose((f0 + f1).samples, BUMP.samples, atol=1e-15)
    with pytest.raises(ValueError):
        optimal_decomposition(BUMP, 0.0)
    with pytest.raises(ValueError, match="no optimal"):
        decompose(BUMP, 1.0, NormPair("L2", "H01H1"))


def test_k_functional_is_monotone():
    lams = np.geomspace(1e-3, 1e3, 40)
    k = np.array([k_functional(BUMP, lam) for lam in lams])
    assert np.all(np.diff(k) > 0)
    assert np.all(np.diff(k / lams) < 0)
    assert k[-1] < l2_norm(BUMP)


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_equivalence_constants(s):
    # the weighted pair interpolates to H^{0,s}, the Sobolev pair to H^s, both with the same constant
    c = weighted_interp_constant(s)
    assert interp_norm(BUMP, s) == pytest.approx(c * weighted_norm(BUMP, s), rel=1e-6)
    assert interp_norm(BUMP, s, NormPair("L2", "H1")) == pytest.approx(c * hs_norm(BUMP, s), rel=1e-6)


def test_constant_at_one_half():
    assert weighted_interp_constant(0.5) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-15)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), s=st.floats(0.1, 0.9), which=st.sampled_from(["H01", "H1", "H01H1"]))
def test_interpolation_inequality(seed, s, which):
    f = random_field(np.random.default_rng(seed), Grid(1, 64, 5.0))
    pair = NormPair("L2", which)
    bound = pair.first(f) ** (1 - s) * pair.second(f) ** s
    assert interp_norm(f, s, pair, nodes=200) <= bound * (1 + 1e-6)


def test_sum_norm_dominates_its_parts():
    for lam in (0.1, 1.0, 10.0):
        both = k_functional(BUMP, lam, NormPair("L2", "H01H1"))
        assert both >= k_functional(BUMP, lam) * (1 - 1e-12)
        assert both >= k_functional(BUMP, lam, NormPair("L2", "H1")) * (1 - 1e-12)


def test_argument_checks():
    with pytest.raises(ValueError, match="unknown norm"):
        NormPair("L2", "H2")
    with pytest.raises(ValueError):
        interp_norm(BUMP, 1.0)
    with pytest.raises(ValueError, match="unknown mode"):
        k_functional(BUMP, 1.0, mode="best")
    with pytest.raises(ValueError):
        k_functional(BUMP, 1.0, NormPair("H1", "H01"))


def test_transformed_hs_ratio_is_bounded():
    g = Grid(1, 4096, 16.0)
    for t in (0.3, 0.5, 1.0):
        rep = lemma23_bound_check(gaussian_exact(GaussianParams(1.0, 1.0), t, g), 0.5)
        assert rep.t == t
        assert 0 < rep.ratio < 1


@pytest.mark.parametrize("t, s", [(0.2, 0.5), (1.5, 0.5), (0.5, 0.0), (0.5, 1.0)])
def test_transformed_hs_ratio_argument_checks(t, s):
    u = gaussian_exact(GaussianParams(1.0, 1.0), t, Grid(1, 512, 12.0))
    with pytest.raises(ValueError):
        lemma23_bound_check(u, s)


def test_transformed_hs_ratio_rejects_zero():
    with pytest.raises(ValueError, match="zero"):
        lemma23_bound_check(Field.zeros(G).with_time(0.5), 0.5)
