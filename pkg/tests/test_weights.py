import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardybounds.weights import (
    INF,
    ExponentTriple,
    WeightError,
    WeightSpec,
    dual_density,
    eval_weight,
    exp_piece,
    polynomial_piece,
    power_piece,
    primitive,
    reflect,
    tabulated_pieces,
    tail,
)


def two_piece(e1=0.0, e2=-2.0, c2=1.0):
    return WeightSpec((power_piece(0, 1, 1.0, e1), power_piece(1, INF, c2, e2)))


# -- pointwise values, primitives and tails --------------------------------


def test_eval_examples():
    assert eval_weight(WeightSpec.power(1, 0), 5.0) == 1.0
    assert eval_weight(WeightSpec.power(1, 2), 3.0) == 9.0
    assert eval_weight(two_piece(), 2.0) == 0.25


def test_primitive_examples():
    assert primitive(WeightSpec.power(1, 0), 8.0) == pytest.approx(8.0, rel=1e-14)
    for beta in (-0.5, 0.0, 1.5):
        t = 2.7
        assert primitive(WeightSpec.power(1, beta), t) == pytest.approx(t ** (beta + 1) / (beta + 1), rel=1e-13)
    assert primitive(two_piece(), 4.0) == pytest.approx(1.75, rel=1e-14)


def test_tail_examples():
    w = WeightSpec((power_piece(0, 1, 0.0, 0.0), power_piece(1, INF, 1.0, -2.0)), strict=False)
    assert tail(w, 2.0) == pytest.approx(0.5, rel=1e-14)
    assert tail(WeightSpec.power(1, 0), 3.0) == INF
    box = WeightSpec((power_piece(0, 8, 1.0, 0.0),))
    assert tail(box, 3.0) == pytest.approx(5.0, rel=1e-14)


def test_exp_and_polynomial_pieces():
    w = WeightSpec((exp_piece(0, INF, 2.0, 1.5),))
    assert w.total() == pytest.approx(2.0 / 1.5, rel=1e-12)
    g = WeightSpec((exp_piece(0, INF, 1.0, 1.0, 2.0),))  # t^2 e^-t integrates to 2
    assert g.total() == pytest.approx(2.0, rel=1e-10)
    lin = WeightSpec((polynomial_piece(0, INF, [(1, 1), (1, 0)]),))
    assert lin.eval(3.0) == pytest.approx(4.0)
    assert lin.primitive(2.0) == pytest.approx(4.0, rel=1e-10)
    sq = WeightSpec((polynomial_piece(0, INF, [(1, 1), (1, 0)], power=-3.0),))
    assert sq.total() == pytest.approx(0.5, rel=1e-8)


def test_tabulated_pieces_interpolate_log_log():
    pieces = tabulated_pieces(0, INF, [(1.0, 1.0), (4.0, 16.0)])
    w = WeightSpec(tuple(pieces))
    assert w.eval(2.0) == pytest.approx(4.0)
    assert w.eval(0.5) == pytest.approx(1.0)
    assert w.eval(10.0) == pytest.approx(16.0)


def test_invalid_weights_rejected():
    with pytest.raises(WeightError):
        WeightSpec((power_piece(0, INF, 1.0, -1.0),))  # W(t) = inf
    with pytest.raises(WeightError):
        WeightSpec((power_piece(0, 1, 1.0, 0.0), power_piece(2, INF, 1.0, 0.0)))  # gap
    with pytest.raises(WeightError):
        WeightSpec((power_piece(0, 1, 0.0, 0.0), power_piece(1, INF, 1.0, 0.0)))  # W = 0 near 0
    with pytest.raises(WeightError):
        WeightSpec((power_piece(0, INF, 1.0, 0.0),), scale=0.0)


# -- exponents -------------------------------------------------------------


def test_exponent_triple():
    e = ExponentTriple(2.0, 0.5)
    assert e.r == pytest.approx(2.0 / 3.0)
    assert e.p_prime == 2.0
    assert e.q_prime == -1.0
    assert 1.0 / e.r == pytest.approx(1.0 / e.q - 1.0 / e.p)
    assert e.theta_cap(1.0) == 2.0
    one = ExponentTriple(1.0, 0.5)
    assert one.p_prime == INF
    assert one.r == pytest.approx(-one.q_prime)


# -- dual density ------------------------------------------------------------


def test_dual_density_examples():
    t = np.array([0.3, 2.0, 11.0])
    assert np.allclose(dual_density(WeightSpec.power(1, 1.7), 2.0).eval(t), t**-1.7)
    assert np.allclose(dual_density(WeightSpec.power(1, 0), 3.0).eval(t), 1.0)
    dd = dual_density(WeightSpec.power(1, 1), 1.0)
    assert dd.mode == "esssup"
    assert np.allclose(dd.eval(t), 1.0 / t)


# -- reflection --------------------------------------------------------------


def test_reflect_examples():
    s = np.array([0.2, 1.0, 3.0])
    assert np.allclose(reflect(WeightSpec.power(1, 0), "w").eval(s), s**-2.0)
    beta = 0.7
    assert np.allclose(reflect(WeightSpec.power(1, beta), "w").eval(s), s ** (-beta - 2.0))
    p = 3.0
    v = WeightSpec.power(1, 1.5)
    assert np.allclose(reflect(v, "v", p).eval(s), s ** (2 * p - 2) * (1.0 / s) ** 1.5)


def test_reflect_involution_closed_form():
    w = two_piece()
    grid = np.geomspace(1e-3, 1e3, 101)
    back = reflect(reflect(w, "w"), "w")
    np.testing.assert_allclose(back.eval(grid), w.eval(grid), rtol=1e-12)
    v = WeightSpec((power_piece(0, 1, 1.0, -0.5), power_piece(1, INF, 2.0, 3.0)))
    back = reflect(reflect(v, "v", 2.5), "v", 2.5)
    np.testing.assert_allclose(back.eval(grid), v.eval(grid), rtol=1e-12)


# -- properties ----------------------------------------------------------------

exponents = st.floats(-0.9, 3.0)
decays = st.floats(1.1, 4.0)


@settings(max_examples=40, deadline=None)
@given(e1=exponents, e2=decays, c2=st.floats(0.1, 10.0), t=st.floats(1e-3, 1e3))
def test_tail_plus_primitive_is_total(e1, e2, c2, t):
    w = two_piece(e1, -e2, c2)
    assert w.primitive(t) + w.tail(t) == pytest.approx(w.total(), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(e1=exponents, e2=st.floats(-3.0, 3.0))
def test_primitive_increasing_and_vanishing_at_zero(e1, e2):
    w = two_piece(e1, e2)
    ts = np.geomspace(1e-6, 1e6, 200)
    W = w.primitive(ts)
    assert np.all(np.diff(W) > 0)
    for t in (1e-12, 1e-8):
        assert w.primitive(t) == pytest.approx(t ** (e1 + 1) / (e1 + 1), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(e1=exponents, e2=st.floats(-3.0, 3.0), p=st.floats(1.0, 4.0))
def test_reflection_is_involution(e1, e2, p):
    w = two_piece(e1, e2)
    grid = np.geomspace(1e-3, 1e3, 41)
    np.testing.assert_allclose(reflect(reflect(w, "v", p), "v", p).eval(grid), w.eval(grid), rtol=1e-12)


@settings(max_examples=30, deadline=None)
@given(e1=exponents, e2=st.floats(-3.0, 3.0), a=st.floats(0.01, 5.0), b=st.floats(0.01, 5.0))
def test_reflected_w_mass_matches(e1, e2, a, b):
    # int_a^b w~ = int_{1/b}^{1/a} w under s = 1/t
    lo, hi = min(a, b), max(a, b) + 0.01
    w = two_piece(e1, e2)
    wr = reflect(w, "w")
    assert float(wr.integral(lo, hi)) == pytest.approx(float(w.integral(1 / hi, 1 / lo)), rel=1e-9)


def test_scale_is_separate_from_shape():
    w = two_piece().scaled(7.0)
    shape, c = w.shape()
    assert c == 7.0
    assert w.total() == pytest.approx(7.0 * shape.total(), rel=1e-14)
    assert math.isclose(float(w.eval(2.0)), 7.0 * 0.25)
