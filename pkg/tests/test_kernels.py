"""The compiled loops and the numpy fallbacks must agree."""
import math

import numpy as np
import pytest

from adiabreak import _kernels as K
from adiabreak._accel import backend_name, HAVE_NUMBA


def test_backend_name():
    assert backend_name() in ("numba", "numpy")
    assert HAVE_NUMBA


@pytest.mark.parametrize("nu", [-0.75, -0.25, 0.25, 0.75, 2.0])
def test_series_parity(nu, rng):
    x = np.sort(rng.uniform(0.0, 20.0, 200))
    q = 0.25 * x * x
    lo = np.zeros_like(q)
    s1, t1, e1 = K.series_sum_loop(nu, q, lo)
    s2, t2, e2 = K.series_sum_vec(nu, q, lo)
    np.testing.assert_allclose(s1, s2, rtol=0, atol=1e-15 * np.max(np.abs(s1)))
    assert np.all(np.abs(t1 - t2) <= 1)


@pytest.mark.parametrize("order", [-1, 0, 3, 8])
def test_hankel_parity(order):
    x = np.geomspace(20.0, 1e4, 100)
    p1, q1, l1 = K.hankel_pq_loop(0.25, x, order)
    p2, q2, l2 = K.hankel_pq_vec(0.25, x, order)
    np.testing.assert_allclose(p1, p2, rtol=1e-15, atol=1e-17)
    np.testing.assert_allclose(q1, q2, rtol=1e-14, atol=1e-17)


def test_unwrap_parity_and_anchor(rng):
    true = np.cumsum(rng.uniform(-1.0, 1.0, 500))
    wrapped = np.angle(np.exp(1j * true))
    a = 137
    u1, b1 = K.unwrap_loop(wrapped, a, true[a], 0.5 * math.pi)
    u2, b2 = K.unwrap_vec(wrapped, a, true[a], 0.5 * math.pi)
    assert b1 == b2 == -1
    np.testing.assert_allclose(u1, true, atol=1e-12)
    np.testing.assert_allclose(u2, true, atol=1e-12)


def test_unwrap_reports_jump():
    phase = np.array([0.0, 0.1, 0.2, 2.2, 2.3])
    for fn in (K.unwrap_loop, K.unwrap_vec):
        _, bad = fn(phase, 0, 0.0, 0.5 * math.pi)
        assert bad == 3
        _, bad = fn(phase, 4, 2.3, 0.5 * math.pi)
        assert bad == 2


def test_dopri_parity():
    t_out = np.linspace(-5.0, 5.0, 11)
    args = (0.04, t_out, 1.0 + 0j, 1j, 1e-10, 1e-10, 1e-3, 1e-13, 100000)
    r1 = K.dopri_run_loop(*args)
    r2 = K.dopri_run_py(*args)
    assert r1[4] == r2[4] == 0
    np.testing.assert_allclose(r1[0], r2[0], rtol=1e-12)
    assert r1[2] == r2[2]


def test_dopri_free_motion_is_exact():
    # eps = 0: w is linear in t, which the method integrates exactly
    t_out = np.array([0.0, 3.0])
    w, dw, *_ = K.dopri_run_loop(0.0, t_out, 1.0 + 0j, 0.5j, 1e-10, 1e-10, 1e-2, 1e-13, 1000)
    assert abs(w[-1] - (1.0 + 1.5j)) < 1e-14
    assert abs(dw[-1] - 0.5j) < 1e-15


def test_dd_arithmetic_recovers_rounding():
    a, b = 1.0, 1e-17
    s, e = K._two_sum(a, b)
    assert s == 1.0 and e == 1e-17
    p, e = K._two_prod(1.0 + 2 ** -30, 1.0 + 2 ** -30)
    assert p + e == p and e == 2 ** -60


def test_numpy_fallback_end_to_end():
    import os
    import subprocess
    import sys

    code = (
        "from adiabreak import _accel, scenario, oracle;"
        "r = scenario.run_l0(0.05);"
        "g = oracle.ode_final_state(0.05);"
        "print(_accel.backend_name(), repr(r.survival), repr(g.l))"
    )
    outs = {}
    for flag in ("0", "1"):
        env = dict(os.environ, ADIABREAK_DISABLE_JIT=flag)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        outs[flag] = res.stdout.split()
    assert outs["0"][0] == "numba" and outs["1"][0] == "numpy"
    assert abs(float(outs["0"][1]) - float(outs["1"][1])) < 1e-13
    assert abs(complex(outs["0"][2]) - complex(outs["1"][2])) < 1e-9
