"""Closed-form solutions of the Riccati equation l' + i l^2 = i eps^2 t^2.

Every solution is l(t, kappa) = -i w'(t)/w(t) with

    w(t, kappa) = -M_{-1/4}(s) + (kappa sqrt(eps) t / 2) M_{1/4}(s),  s = eps^2 t^4 / 16,

an entire function of t that has no real zeros when kappa is not real.  Near
t = 0 everything is evaluated through the entire series M_nu; once the Bessel
argument z = eps t^2 / 2 passes the special-function crossover the Bessel form
is used, with negative t mapped through w(-t, kappa) = w(t, -kappa).
"""
import cmath
import math
from dataclasses import dataclass

import numpy as np

from .specfun import C1, CROSSOVER, GAMMA, bessel_j, series_m


class _Infinity:
    """Projective point kappa = infinity (only the J_{1/4} part of w survives)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __neg__(self):
        return self

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()


@dataclass(frozen=True)
class RiccatiFamily:
    epsilon: float
    kappa: object  # complex or INFINITY

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if self.kappa is not INFINITY:
            k = complex(self.kappa)
            if k.imag == 0.0 or not cmath.isfinite(k):
                raise ValueError("kappa must be finite non-real or INFINITY")
            object.__setattr__(self, "kappa", k)

    @property
    def is_infinite(self):
        return self.kappa is INFINITY

    def negated(self):
        return RiccatiFamily(self.epsilon, -self.kappa)


def scaled_argument(epsilon, t):
    """Return (s, z) with s = eps^2 t^4 / 16 and z = 2 sqrt(s) = eps t^2 / 2."""
    t = np.asarray(t, dtype=float)
    z = 0.5 * epsilon * t * t
    return 0.25 * z * z, z


def _split_regimes(epsilon, t):
    t = np.atleast_1d(np.asarray(t, dtype=float)).ravel()
    s, z = scaled_argument(epsilon, t)
    return t, s, z, z <= CROSSOVER


def _bessel_quad(z):
    """J_{-3/4}, J_{-1/4}, J_{1/4}, J_{3/4} at z."""
    return (bessel_j(-0.75, z), bessel_j(-0.25, z), bessel_j(0.25, z), bessel_j(0.75, z))


def _shape_like(values, t):
    t_arr = np.asarray(t)
    return complex(values[0]) if t_arr.ndim == 0 else values.reshape(t_arr.shape)


def w_tilde(fam, t):
    """w(t, kappa) for real t (scalar or array)."""
    eps = fam.epsilon
    ts, s, z, near = _split_regimes(eps, t)
    out = np.empty(ts.shape, dtype=complex)
    se = math.sqrt(eps)
    if np.any(near):
        tn, sn = ts[near], s[near]
        mp = series_m(0.25, sn)
        if fam.is_infinite:
            out[near] = 0.5 * se * tn * mp
        else:
            out[near] = -series_m(-0.25, sn) + 0.5 * fam.kappa * se * tn * mp
    far = ~near
    if np.any(far):
        tf, zf = ts[far], z[far]
        _, jm14, jp14, _ = _bessel_quad(zf)
        pref = (0.5 * zf) ** 0.25
        sign = np.sign(tf)
        if fam.is_infinite:
            out[far] = sign * pref * jp14
        else:
            # w(-t, kappa) = w(t, -kappa)
            out[far] = pref * (-jm14 + sign * fam.kappa * jp14)
    return _shape_like(out, t)


def w_tilde_derivative(fam, t):
    """d/dt w(t, kappa) = i l(t, kappa) w(t, kappa)."""
    return 1j * riccati_l(fam, t) * w_tilde(fam, t)


def riccati_l(fam, t):
    """l(t, kappa) = -i w'/w, evaluated without derivatives."""
    eps = fam.epsilon
    ts, s, z, near = _split_regimes(eps, t)
    out = np.empty(ts.shape, dtype=complex)
    se = math.sqrt(eps)
    if np.any(near):
        tn, sn = ts[near], s[near]
        m_m34 = series_m(-0.75, sn)
        m_m14 = series_m(-0.25, sn)
        m_p14 = series_m(0.25, sn)
        m_p34 = series_m(0.75, sn)
        if fam.is_infinite:
            if np.any(tn == 0.0):
                raise ZeroDivisionError("l(t, INFINITY) has a pole at t = 0")
            out[near] = -1j * (8.0 * se * m_m34) / (2.0 * se * tn * m_p14)
        else:
            k = fam.kappa
            num = -1j * (8.0 * k * se * m_m34 + eps * eps * tn ** 3 * m_p34)
            den = 2.0 * (-2.0 * m_m14 + k * se * tn * m_p14)
            out[near] = num / den
    far = ~near
    if np.any(far):
        tf, zf = ts[far], z[far]
        jm34, jm14, jp14, jp34 = _bessel_quad(zf)
        at = np.abs(tf)
        sign = np.sign(tf)
        if fam.is_infinite:
            val = -1j * eps * at * jm34 / jp14
        else:
            # l(t, kappa) = -l(-t, -kappa): evaluate at |t| with sign(t) kappa
            k = sign * fam.kappa
            val = -1j * eps * at * (k * jm34 + jp34) / (-jm14 + k * jp14)
        out[far] = sign * val
    return _shape_like(out, t)


def solve_kappa_eps(epsilon):
    """kappa_eps with l(-1/eps, kappa_eps) = 1.

    kappa_eps = -(J_{-1/4} + i J_{3/4}) / (J_{1/4} - i J_{-3/4}) at 1/(2 eps).
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    jm34, jm14, jp14, jp34 = _bessel_quad(0.5 / epsilon)
    return complex(-(jm14 + 1j * jp34) / (jp14 - 1j * jm34))


def star_family(epsilon):
    return RiccatiFamily(epsilon, solve_kappa_eps(epsilon))


def l_star(epsilon, t):
    """The solution with l(-1/eps) = 1."""
    return riccati_l(star_family(epsilon), t)


def l_star_at_final(epsilon):
    """l_star(1/eps) from the closed product form at z = 1/(2 eps); eps may be an array."""
    eps = np.asarray(epsilon, dtype=float)
    if np.any(eps <= 0.0) or np.any(eps >= 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    jm34, jm14, jp14, jp34 = _bessel_quad(0.5 / eps)
    num = 2.0 * jp34 * jm34 + 1j * (jp34 * jp14 - jm14 * jm34)
    den = 2.0 * jm14 * jp14 + 1j * (jp14 * jp34 - jm14 * jm34)
    out = num / den
    return complex(out) if eps.ndim == 0 else out


def leading_l0(epsilon):
    """(1 - 2 sqrt(2) i cos(1/eps)) / (3 + 2 sqrt(2) sin(1/eps))."""
    th = 1.0 / epsilon
    r2 = 2.0 * math.sqrt(2.0)
    return complex(1.0 - 1j * r2 * math.cos(th)) / (3.0 + r2 * math.sin(th))


def l_at_zero(fam):
    """l(0, kappa) = 2 i kappa sqrt(eps) Gamma(3/4)/Gamma(1/4)."""
    if fam.is_infinite:
        raise ZeroDivisionError("l(t, INFINITY) has a pole at t = 0")
    return 2j * fam.kappa * math.sqrt(fam.epsilon) * C1


def small_t_coefficient(fam):
    """a = 2 kappa Gamma(3/4)/Gamma(1/4) in l(t) ~ i a sqrt(eps)(1 + a sqrt(eps) t + ...)."""
    return 2.0 * fam.kappa * C1


W_TILDE_AT_ZERO = -1.0 / GAMMA.gamma_3_4
