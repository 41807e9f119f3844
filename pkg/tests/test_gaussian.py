import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adiabreak import gaussian as G
from adiabreak.oracle import quadrature_overlap

complexes = st.builds(complex, st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
widths = st.builds(complex, st.floats(0.2, 3.0), st.floats(-3.0, 3.0))


def test_ground_state():
    assert G.norm_squared(G.GROUND) == pytest.approx(1.0, abs=1e-15)
    assert G.survival_probability(G.GROUND) == pytest.approx(1.0, abs=1e-15)
    assert abs(G.overlap_with_ground(G.GROUND) - 1.0) < 1e-15


def test_overlap_ground_by_quadrature():
    assert abs(quadrature_overlap(G.GROUND, G.GROUND) - 1.0) < 1e-10


@settings(max_examples=40, deadline=None)
@given(m1=complexes, l1=widths, m2=complexes, l2=widths)
def test_bilinear_against_quadrature(m1, l1, m2, l2):
    g, h = G.GaussianState(m1, l1), G.GaussianState(m2, l2)
    exact = G.bilinear(g, h)
    assert abs(quadrature_overlap(g, h) - exact) <= 1e-8 * max(1.0, abs(exact))


@settings(max_examples=60, deadline=None)
@given(m=complexes, l=widths)
def test_survival_in_unit_interval(m, l):
    g = G.GaussianState(m, l)
    if m == 0:
        with pytest.raises(G.NonNormalizableError):
            G.survival_probability(g)
        return
    p = G.survival_probability(g)
    assert 0.0 <= p <= 1.0
    if abs(m) > 1e-100:
        direct = abs(G.overlap_with_ground(g)) ** 2 / G.norm_squared(g)
        assert p == pytest.approx(min(direct, 1.0), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(m=complexes, l=widths, t1=st.floats(0.0, 5.0), t2=st.floats(0.0, 5.0))
def test_free_propagation_group_law(m, l, t1, t2):
    g = G.GaussianState(m, l)
    a = G.free_propagate(G.free_propagate(g, t1), t2)
    b = G.free_propagate(g, t1 + t2)
    assert abs(a.l - b.l) <= 1e-12 * max(1.0, abs(b.l))
    assert abs(a.m - b.m) <= 1e-12 * max(1.0, abs(b.m))
    if abs(m) > 0:
        assert G.norm_squared(b) == pytest.approx(G.norm_squared(g), rel=1e-10)


def test_free_propagation_solves_equation():
    g = G.GaussianState(0.7 + 0.1j, 0.8 - 0.5j)
    x = np.linspace(-4.0, 4.0, 81)
    T, h, dx = 1.3, 1e-4, 1e-3
    v = lambda t, y: G.free_propagate(g, t)(y)  # noqa: E731
    vt = (v(T + h, x) - v(T - h, x)) / (2 * h)
    vxx = (v(T, x + dx) - 2 * v(T, x) + v(T, x - dx)) / dx ** 2
    assert np.max(np.abs(1j * vt + 0.5 * vxx)) < 1e-5


def test_l2_distance():
    g = G.GaussianState(1.0, 1.0 + 1j)
    assert G.l2_distance(g, g) < 1e-7
    h = G.GaussianState(-1.0, 1.0 + 1j)
    assert G.l2_distance(g, h) == pytest.approx(2 * math.sqrt(G.norm_squared(g)))


def test_callable():
    g = G.GaussianState(2.0, 1.0)
    assert g(0.0) == 2.0
    assert g(np.array([1.0, 2.0])).shape == (2,)


def test_errors():
    with pytest.raises(G.NonNormalizableError):
        G.norm_squared(G.GaussianState(1.0, -0.1 + 1j))
    with pytest.raises(G.DivergentOverlapError):
        G.overlap_with_ground(G.GaussianState(1.0, -1.5))
    with pytest.raises(G.DivergentOverlapError):
        G.gaussian_integral(-1.0)
    with pytest.raises(ValueError):
        G.free_propagate(G.GROUND, -1.0)
