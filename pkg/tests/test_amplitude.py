import math

import numpy as np
import pytest

from adiabreak import amplitude as A
from adiabreak.riccati import RiccatiFamily, riccati_l, star_family
from adiabreak.specfun import GAMMA


@pytest.fixture(scope="module")
def sol():
    return A.star_amplitude(0.1)


def test_initial_value(sol):
    assert abs(A.amplitude_at(sol, -10.0) - math.pi ** -0.25) < 1e-14


def test_value_at_zero(sol):
    expected = -1j * sol.a_const * math.sqrt(GAMMA.gamma_3_4)
    assert abs(A.amplitude_at(sol, 0.0) - expected) < 1e-15


def test_norm_identity(sol):
    t = np.linspace(-10.0, 10.0, 401)
    l = riccati_l(RiccatiFamily(0.1, sol.kappa), t)
    m = A.amplitude_at(sol, t)
    assert np.max(np.abs(math.pi * np.abs(m) ** 4 - l.real)) < 1e-12


def test_amplitude_equation(sol):
    t = np.linspace(-9.5, 9.5, 39)
    h = 1e-3
    m = lambda x: A.amplitude_at(sol, x)  # noqa: E731
    dm = (m(t - 2 * h) - 8 * m(t - h) + 8 * m(t + h) - m(t + 2 * h)) / (12 * h)
    rhs = A.amplitude_at(sol, t) * riccati_l(RiccatiFamily(0.1, sol.kappa), t) / 2
    assert np.max(np.abs(1j * dm - rhs)) < 1e-7


def test_final_value(sol):
    assert abs(A.amplitude_at_final(0.1, sol) - A.amplitude_at(sol, 10.0)) < 1e-13


@pytest.mark.parametrize("eps", [0.05, 0.01, 0.002])
def test_constant_asymptotics(eps):
    a = A.star_amplitude(eps).a_const
    assert abs(abs(a) * math.sqrt(math.pi) * eps ** -0.125 - 1.0) < 0.5 * eps


@pytest.mark.parametrize("eps", [0.02, 0.005])
def test_leading_m0_is_first_order(eps):
    assert abs(A.amplitude_at_final(eps) - A.leading_m0(eps)) < eps


def test_leading_m0_is_continuous_in_eps():
    th = np.linspace(50.0, 60.0, 20001)
    vals = np.array([A.leading_m0(1.0 / x) for x in th])
    assert np.max(np.abs(np.diff(vals))) < 1e-2


def test_from_value_at_zero():
    fam = star_family(0.1)
    m0 = 0.3 - 0.4j
    out = A.AmplitudeSolution.from_value_at_zero(fam, m0, 10.0)
    assert abs(out.at(0.0) - m0) < 1e-15


def test_branch_tracker():
    tr = A.BranchTracker(0.0, 1.0 + 0j, argument=2 * math.pi)
    assert tr.last_argument == pytest.approx(2 * math.pi)
    assert tr.advance(0.1, np.exp(1.2j)) == pytest.approx(2 * math.pi + 1.2)
    tr = A.BranchTracker(0.0, 1.0 + 0j)
    tr.advance(0.1, np.exp(1.0j))
    assert tr.advance(0.2, np.exp(2.0j)) == pytest.approx(2.0)
    with pytest.raises(A.BranchStepError):
        tr.advance(0.3, np.exp(-2.0j))


def test_track_requires_zero():
    with pytest.raises(ValueError):
        A.PhaseTrack.build(star_family(0.1), 1.0, 2.0)


def test_track_outside_interval(sol):
    with pytest.raises(ValueError):
        sol.track.phase_at(11.0)


def test_default_grid_size():
    assert A.default_grid_size(0.1) == 4097
    assert A.default_grid_size(0.001) % 2 == 1


@pytest.mark.parametrize("eps", [0.1, 0.01, 0.001])
def test_small_t_expansion(eps):
    # m(t) = m(0) (1 + C1 kappa sqrt(eps) t + O(t^2)), remainder uniform on |t| <= 1
    from adiabreak.specfun import C1

    s = A.star_amplitude(eps)
    m0 = A.amplitude_at(s, 0.0)
    t = np.linspace(-1.0, 1.0, 41)
    t = t[t != 0.0]
    rem = np.abs(A.amplitude_at(s, t) / m0 - 1 - C1 * s.kappa * math.sqrt(eps) * t) / t ** 2
    assert np.max(rem) < 0.05
