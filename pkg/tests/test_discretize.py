import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import W_H1, pw
from hardybounds.discretize import (
    HypothesisError,
    MassError,
    build_blocks,
    build_levels,
    effective_theta,
    normalize_mass,
    prop3_check,
    prop4_check,
    prop59_check,
    prop89_bound,
    prop89_check,
    segment_weights,
    verify_block_properties,
)
from hardybounds.kernels import KernelSpec
from hardybounds.weights import INF, WeightSpec, exp_piece


def levels_for(w, U, q, depth=6):
    Theta = 2.0 * U.theta**q
    wn, K = normalize_mass(w, Theta)
    return wn, build_levels(wn, Theta, K - depth, K)


def test_normalize_mass():
    wn, K = normalize_mass(W_H1, 2.0)
    assert K == 1
    assert wn.total() == pytest.approx(2.0, rel=1e-14)
    with pytest.raises(MassError):
        normalize_mass(WeightSpec.power(1, 0), 2.0)


def test_exponential_levels_closed_form():
    w = WeightSpec((exp_piece(0, INF, 1.0, 1.0),))
    lv = build_levels(w, 2.0, -6, 0)
    for k in range(-7, 0):
        assert lv.t(k) == pytest.approx(-math.log(1 - 2.0**k), rel=1e-12)
    assert lv.t(0) == INF
    assert lv.indices == list(range(-6, 0))


def test_level_errors():
    w = WeightSpec((exp_piece(0, INF, 1.0, 1.0),))
    with pytest.raises(ValueError):
        build_levels(w, 2.0, -1, 0)
    with pytest.raises(MassError):
        build_levels(w.scaled(1.5), 2.0, -4, 0)
    with pytest.raises(ValueError):
        build_levels(w, 1.0, -4, 0)


def test_constant_kernel_blocks_are_single_segments():
    U = KernelSpec.constant()
    wn, lv = levels_for(W_H1, U, 0.5)
    a = segment_weights(lv, U, 0.5)
    assert a == pytest.approx([2.0**k for k in lv.indices], rel=1e-15)
    bl = build_blocks(lv, U, 0.5)
    assert bl.block_indices == list(range(lv.mu, lv.K + 1))
    assert bl.A_set == []
    assert not bl.infinite_last_segment


def test_unbounded_kernel_flags_last_segment():
    U = KernelSpec.riemann_liouville(1.0)
    wn, lv = levels_for(W_H1, U, 1.0)
    bl = build_blocks(lv, U, 1.0)
    assert bl.infinite_last_segment
    assert verify_block_properties(lv, bl, U, 1.0, wn).ok


def test_measured_constants_finite():
    U = KernelSpec.riemann_liouville(0.5)
    wn, lv = levels_for(W_H1, U, 0.5, depth=8)
    rep = verify_block_properties(lv, build_blocks(lv, U, 0.5), U, 0.5, wn)
    assert rep.ok, rep.violations
    assert rep.identity_18_error < 1e-9
    for c in (rep.const_15, rep.const_57, rep.const_16):
        assert 0 < c < INF
    assert set(rep.to_dict()) >= {"ok", "worst_12", "const_16"}


kernels = st.sampled_from(
    [KernelSpec.constant(), KernelSpec.riemann_liouville(0.5), KernelSpec.riemann_liouville(1.0),
     KernelSpec.riemann_liouville(2.0), KernelSpec.logarithmic(1.0)]
)


@settings(max_examples=30, deadline=None)
@given(
    U=kernels,
    q=st.floats(0.3, 3.0),
    e0=st.floats(-0.9, 2.0),
    e1=st.floats(-4.0, -1.1),
    c1=st.floats(0.1, 10.0),
    cut=st.floats(0.1, 10.0),
    depth=st.integers(3, 12),
)
def test_block_properties_random(U, q, e0, e1, c1, cut, depth):
    w = pw((0, cut, 1.0, e0), (cut, INF, c1, e1))
    wn, lv = levels_for(w, U, q, depth)
    bl = build_blocks(lv, U, q)
    rep = verify_block_properties(lv, bl, U, q, wn, t_samples=2)
    assert rep.ok, rep.violations
    assert rep.level_ok
    assert rep.worst_13 <= rep.bound_13 * (1 + 1e-9)
    assert rep.identity_18_error < 1e-9


def test_prop89_examples():
    assert prop89_bound(1.0, 2.0) == 2.0
    rep = prop89_check(1.0, 2.0, [1, 2, 4], [1, 0, 0])
    assert rep.ratio == 1.0 and rep.ok
    with pytest.raises(HypothesisError):
        prop89_check(1.0, 2.0, [1, 1.5, 4], [1, 1, 1])


@settings(max_examples=200, deadline=None)
@given(
    alpha=st.floats(0.1, 4.0),
    D=st.floats(1.05, 10.0),
    c=st.lists(st.floats(0.0, 1e3), min_size=1, max_size=20),
    growth=st.floats(1.0, 3.0),
)
def test_prop89_random(alpha, D, c, growth):
    b = (D * growth) ** np.arange(len(c))
    rep = prop89_check(alpha, D, b, c)
    assert rep.ok or not any(c)


def test_prop3_and_prop4_ratios_at_least_one():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(2, 15))
        c = rng.exponential(size=n)
        b = 2.0 ** np.arange(n)
        rep = prop3_check(float(rng.uniform(0.2, 3)), 2.0, b, c)
        assert rep.ok and rep.details["sum"] >= 1 - 1e-12 and rep.details["sup"] >= 1 - 1e-12
    U = KernelSpec.riemann_liouville(2.0)
    t = np.cumsum(rng.exponential(size=8))
    a = (2.0 * U.theta**1.5) ** np.arange(7)
    rep = prop4_check(1.5, U.theta, t, a, U)
    assert rep.ok and rep.ratio >= 1.0
    with pytest.raises(HypothesisError):
        prop4_check(1.5, U.theta, t, np.ones(7), U)
    with pytest.raises(ValueError):
        prop4_check(1.5, U.theta, t, a[:-1], U)


def test_effective_theta():
    assert effective_theta(0.5, 2.0) == 2.0
    assert effective_theta(2.0, 2.0) == 8.0


def test_prop59_examples():
    one = lambda z: np.ones_like(np.asarray(z, dtype=float))
    rep = prop59_check(1.0, 1.0, 0.0, 1.0, 2.0, KernelSpec.constant(), one)
    assert rep.ratio == pytest.approx(0.5) and rep.ok
    # RL(2) with psi = 1: sup (z - a)^2 = 4, split 1 + 1
    rep = prop59_check(1.0, 2.0, 0.0, 1.0, 2.0, KernelSpec.riemann_liouville(2.0), one)
    assert rep.ratio == pytest.approx(2.0, rel=1e-6)
    assert rep.bound == 3.0 and rep.ok
    with pytest.raises(HypothesisError):
        prop59_check(1.0, 1.0, 1.0, 1.0, 2.0, KernelSpec.constant(), one)


def test_prop59_hand_example_and_psi_guard():
    inv = lambda z: 1.0 / np.asarray(z, dtype=float)
    rep = prop59_check(1.0, 1.0, 1.0, 2.0, 4.0, KernelSpec.riemann_liouville(1.0), inv)
    assert rep.details["lhs"] == pytest.approx(0.75, rel=1e-6)
    assert rep.details["split"] == pytest.approx(1.0, rel=1e-6)
    assert rep.bound == 2.0 and rep.ok
    with pytest.raises(HypothesisError):
        prop59_check(1.0, 1.0, 1.0, 2.0, 4.0, KernelSpec.constant(), lambda z: np.asarray(z, dtype=float))


def test_prop89_geometric_example():
    D, n = 3.0, 12
    b = D ** np.arange(n)
    rep = prop89_check(1.0, D, b, np.ones(n))
    assert rep.bound == pytest.approx(D / (D - 1))
    assert rep.ok
    single = np.zeros(n)
    single[4] = 2.5
    assert prop89_check(0.7, D, b, single).ratio == pytest.approx(1.0, rel=1e-14)


def test_prop4_rl1_regression():
    U = KernelSpec.riemann_liouville(1.0)
    t = 2.0 ** np.arange(11)
    a = (2.0 * U.theta) ** np.arange(10)
    assert prop4_check(1.0, U.theta, t, a, U).ratio == pytest.approx(698027 / 349525, rel=1e-14)


@pytest.mark.parametrize(
    "U,q", [(KernelSpec.riemann_liouville(0.5), 0.5), (KernelSpec.constant(), 2.0), (KernelSpec.riemann_liouville(2.0), 1.5)]
)
def test_measured_constants_do_not_grow_with_depth(U, q):
    consts = []
    for depth in (2, 6, 12):
        wn, lv = levels_for(W_H1, U, q, depth)
        rep = verify_block_properties(lv, build_blocks(lv, U, q), U, q, wn)
        assert rep.ok
        consts.append((rep.const_15, rep.const_57, rep.const_16))
    for j in range(3):
        assert consts[2][j] <= 1.05 * consts[1][j]


@settings(max_examples=40, deadline=None)
@given(
    alpha=st.floats(0.2, 3.0),
    kalpha=st.floats(0.2, 3.0),
    a=st.floats(0.0, 2.0),
    d1=st.floats(0.01, 5.0),
    d2=st.floats(0.01, 5.0),
    beta=st.floats(0.0, 3.0),
    jump=st.floats(0.0, 0.9),
)
def test_prop59_random(alpha, kalpha, a, d1, d2, beta, jump):
    U = KernelSpec.riemann_liouville(kalpha)
    cut = a + 0.5 * (d1 + d2)
    psi = lambda z: (1.0 + np.asarray(z, dtype=float)) ** -beta * np.where(np.asarray(z) < cut, 1.0, 1.0 - jump)
    rep = prop59_check(alpha, U.theta, a, a + d1, a + d1 + d2, U, psi)
    assert rep.ok, rep
