"""Bessel functions of fractional order on the real half-line.

J_nu is evaluated from its power series (carried in double-double) for
x <= ``CROSSOVER`` and from the Hankel large-argument expansion beyond it.
The entire series M_nu(s), with J_nu(2 sqrt(s)) = s^(nu/2) M_nu(s), is the
form used by the Riccati solution near t = 0.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._accel import USE_NUMBA

CROSSOVER = 20.0
M_SERIES_LIMIT = 100.0  # s at which 2 sqrt(s) reaches CROSSOVER

# 17 significant digits
GAMMA_1_4 = 3.6256099082219083
GAMMA_3_4 = 1.2254167024651776


class BesselDomainError(ValueError):
    """Argument outside the supported real domain."""


class UnsupportedOrderError(ValueError):
    """Order for which the requested function is not defined here."""


class AsymptoticAccuracyError(ValueError):
    """Requested more asymptotic terms than the optimal truncation allows."""


class ZeroSearchError(RuntimeError):
    """Bracketing of a Bessel zero failed."""


@dataclass(frozen=True)
class GammaConstants:
    gamma_1_4: float = GAMMA_1_4
    gamma_3_4: float = GAMMA_3_4

    @property
    def c1(self):
        """Gamma(3/4) / Gamma(1/4)."""
        return self.gamma_3_4 / self.gamma_1_4

    def reflection_residual(self):
        """Relative residual of Gamma(1/4) Gamma(3/4) = pi sqrt(2)."""
        exact = math.pi * math.sqrt(2.0)
        return abs(self.gamma_1_4 * self.gamma_3_4 - exact) / exact


GAMMA = GammaConstants()
C1 = GAMMA.c1


@dataclass(frozen=True)
class SeriesResult:
    value: float
    terms_used: int
    est_rel_error: float


def _series(nu, q, q_lo=None):
    q = np.ascontiguousarray(q, dtype=float)
    lo = np.zeros_like(q) if q_lo is None else np.ascontiguousarray(q_lo, dtype=float)
    if USE_NUMBA:
        return _kernels.series_sum_loop(float(nu), q, lo)
    return _kernels.series_sum_vec(float(nu), q, lo)


def _hankel(nu, x, order):
    x = np.ascontiguousarray(x, dtype=float)
    if USE_NUMBA:
        return _kernels.hankel_pq_loop(float(nu), x, int(order))
    return _kernels.hankel_pq_vec(float(nu), x, int(order))


def _quarter_series_q(x):
    """x^2/4 as an exact double-double pair."""
    hi, lo = _kernels._two_prod(np.asarray(x, dtype=float), np.asarray(x, dtype=float))
    return 0.25 * hi, 0.25 * lo


def _rgamma(a):
    """1/Gamma(a), zero at the poles."""
    if a <= 0.0 and a == math.floor(a):
        return 0.0
    return 1.0 / math.gamma(a)


def _is_integer(nu):
    return float(nu) == math.floor(nu)


def _check_x(x, strict=False):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise BesselDomainError("non-finite argument")
    if strict and np.any(arr <= 0.0):
        raise BesselDomainError("argument must be positive")
    if np.any(arr < 0.0):
        raise BesselDomainError("argument must be nonnegative")
    return arr


def _hankel_eval(nu, x, order):
    p, q, last = _hankel(nu, x, order)
    phi = 0.5 * nu * math.pi + 0.25 * math.pi
    # cos(x - phi) expanded so the large exact x is reduced by libm, not by a
    # rounded subtraction
    cw = np.cos(x) * math.cos(phi) + np.sin(x) * math.sin(phi)
    sw = np.sin(x) * math.cos(phi) - np.cos(x) * math.sin(phi)
    return np.sqrt(2.0 / (math.pi * x)) * (p * cw - q * sw), last


def _series_j(nu, x):
    s, _, err = _series(nu, *_quarter_series_q(x))
    with np.errstate(divide="ignore"):
        pref = np.power(0.5 * x, nu) * _rgamma(nu + 1.0)
    return pref * s, err


def bessel_j(nu, x):
    """J_nu(x) for real order and x >= 0.

    Accepts scalars or arrays; returns the same shape.  For negative integer
    order, J_{-n} = (-1)^n J_n.
    """
    nu = float(nu)
    if not math.isfinite(nu):
        raise BesselDomainError("non-finite order")
    arr = _check_x(x)
    scalar = arr.ndim == 0
    xs = np.atleast_1d(arr).ravel()
    if nu < 0.0 and _is_integer(nu):
        sign = -1.0 if int(-nu) % 2 else 1.0
        out = sign * bessel_j(-nu, xs)
        return float(out[0]) if scalar else out.reshape(arr.shape)
    out = np.empty_like(xs)
    small = xs <= CROSSOVER
    if np.any(small):
        zero = xs == 0.0
        xsm = xs[small]
        vals, _ = _series_j(nu, np.where(xsm == 0.0, 1.0, xsm))
        if np.any(zero[small]):
            at0 = 1.0 if nu == 0.0 else (0.0 if nu > 0.0 else math.inf)
            vals = np.where(xsm == 0.0, at0, vals)
        out[small] = vals
    if np.any(~small):
        out[~small], _ = _hankel_eval(nu, xs[~small], -1)
    return float(out[0]) if scalar else out.reshape(arr.shape)


def bessel_j_series(nu, x):
    """Power-series value of J_nu(x) with its term count and error estimate."""
    x = float(_check_x(x))
    if x == 0.0:
        raise BesselDomainError("series result requires x > 0")
    nu = float(nu)
    s, terms, err = _series(nu, *_quarter_series_q(np.array([x])))
    val = (0.5 * x) ** nu * _rgamma(nu + 1.0) * s[0]
    return SeriesResult(float(val), int(terms[0]), float(err[0]))


def bessel_j_derivative(nu, x):
    """J'_nu(x) = J_{nu-1}(x) - (nu/x) J_nu(x)."""
    arr = _check_x(x, strict=True)
    return bessel_j(nu - 1.0, arr) - (nu / arr) * bessel_j(nu, arr)


def bessel_y(nu, x):
    """Y_nu(x) = (J_nu cos(nu pi) - J_{-nu}) / sin(nu pi), non-integer nu."""
    nu = float(nu)
    if _is_integer(nu):
        raise UnsupportedOrderError("integer-order Y is not provided")
    arr = _check_x(x, strict=True)
    num = bessel_j(nu, arr) * math.cos(nu * math.pi) - bessel_j(-nu, arr)
    return num / math.sin(nu * math.pi)


def hankel_asymptotic_j(nu, x, order):
    """Hankel expansion of J_nu(x) keeping corrections u_1..u_order.

    ``order=1`` is the two-term form
    sqrt(2/(pi x)) (cos w - (4 nu^2 - 1)/(8x) sin w), w = x - nu pi/2 - pi/4.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    arr = _check_x(x, strict=True)
    xs = np.atleast_1d(arr).ravel()
    mu = 4.0 * nu * nu
    # optimal truncation: terms must keep decreasing through u_order
    u = np.ones_like(xs)
    for k in range(1, order + 1):
        c = 2.0 * k - 1.0
        unew = u * (mu - c * c) / (8.0 * k * xs)
        if np.any((np.abs(unew) >= np.abs(u)) & (u != 0.0)):
            raise AsymptoticAccuracyError(
                f"order {order} exceeds the optimal truncation at x={xs.min():g}"
            )
        u = unew
    val, _ = _hankel_eval(float(nu), xs, order)
    return float(val[0]) if arr.ndim == 0 else val.reshape(arr.shape)


def series_m(nu, s):
    """M_nu(s) = sum_k (-s)^k / (k! Gamma(nu+k+1)); entire in s.

    Real s uses the double-double series for s <= 100 and
    J_nu(2 sqrt(s)) / s^(nu/2) beyond; complex s uses a compensated complex
    sum (at most 200 terms).
    """
    nu = float(nu)
    arr = np.asarray(s)
    if np.iscomplexobj(arr):
        if not np.all(np.isfinite(arr)):
            raise BesselDomainError("non-finite argument")
        out = np.array([_series_m_complex(nu, complex(v)) for v in np.atleast_1d(arr).ravel()])
        return complex(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)
    arr = arr.astype(float)
    if not np.all(np.isfinite(arr)):
        raise BesselDomainError("non-finite argument")
    xs = np.atleast_1d(arr).ravel()
    out = np.empty_like(xs)
    near = xs <= M_SERIES_LIMIT
    if np.any(near):
        sv, _, _ = _series(nu, xs[near])
        out[near] = sv * _rgamma(nu + 1.0)
    if np.any(~near):
        far = xs[~near]
        out[~near] = bessel_j(nu, 2.0 * np.sqrt(far)) / far ** (0.5 * nu)
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def _series_m_complex(nu, s, max_terms=200, tol=1e-15):
    term = complex(_rgamma(nu + 1.0))
    total = term
    comp = 0j
    for k in range(1, max_terms):
        denom = k * (nu + k)
        if denom == 0.0:
            term = 0j
        else:
            term = term * (-s) / denom
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if k > abs(s) and abs(term) <= tol * abs(total):
            break
    return total


def bessel_j_zeros(nu, count, step=1.0, tol=1e-10):
    """First ``count`` positive zeros of J_nu, |nu| <= 1, count <= 100."""
    if abs(nu) > 1.0:
        raise UnsupportedOrderError("zero search supports |nu| <= 1")
    if not 1 <= count <= 100:
        raise ValueError("count must be in [1, 100]")
    zeros = []
    a = 1e-6
    fa = bessel_j(nu, a)
    if fa == 0.0:
        a = 1e-3
        fa = bessel_j(nu, a)
    limit = 4.0 * count + 50.0 + (count + 2) * math.pi
    while len(zeros) < count:
        b = a + step
        if b > limit:
            raise ZeroSearchError(f"found only {len(zeros)} zeros below x={limit:g}")
        fb = bessel_j(nu, b)
        if fb == 0.0:
            zeros.append(b)
            a = b + 1e-9
            fa = bessel_j(nu, a)
            continue
        if fa * fb < 0.0:
            lo, hi, flo = a, b, fa
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                fm = bessel_j(nu, mid)
                if fm == 0.0:
                    lo = hi = mid
                    break
                if flo * fm < 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            zeros.append(0.5 * (lo + hi))
        a, fa = b, fb
    return zeros


def self_test(constants=GAMMA):
    """Kernel self-checks; returns ``{name: (passed, detail)}``."""
    report = {}
    res = constants.reflection_residual()
    report["gamma_reflection"] = (res < 1e-15, f"relative residual {res:.3e}")
    c = 2.0 * constants.c1
    report["gamma_c_value"] = (abs(c - 0.676) < 1e-3, f"2*C1 = {c:.6f}")
    z = np.geomspace(0.1, 500.0, 200)
    worst = 0.0
    for nu in (0.25, 0.75):
        w = wronskian_residual(nu, z)
        worst = max(worst, float(np.max(w)))
    report["wronskian"] = (worst <= 1e-10, f"max scaled residual {worst:.3e}")
    zp = bessel_j_zeros(0.25, 20)
    zm = bessel_j_zeros(-0.25, 20)
    merged = sorted([(v, 1) for v in zp] + [(v, -1) for v in zm])
    alternate = all(merged[i][1] != merged[i + 1][1] for i in range(len(merged) - 1))
    report["zero_interlacing"] = (alternate, f"{len(merged)} zeros merged")
    gap = crossover_gap()
    report["crossover"] = (gap <= 1e-11, f"max relative gap {gap:.3e}")
    s = np.linspace(0.01, 100.0, 101)
    mrel = 0.0
    for nu in (-0.75, -0.25, 0.25, 0.75):
        lhs = bessel_j(nu, 2.0 * np.sqrt(s))
        rhs = s ** (0.5 * nu) * _series(nu, s)[0] * _rgamma(nu + 1.0)
        mrel = max(mrel, float(np.max(np.abs(lhs - rhs) / np.abs(lhs))))
    report["m_series_consistency"] = (mrel <= 1e-12, f"max relative gap {mrel:.3e}")
    return report


def wronskian_residual(nu, z):
    """|J_nu J'_{-nu} - J'_nu J_{-nu} + 2 sin(nu pi)/(pi z)| / (2/(pi z))."""
    z = np.asarray(z, dtype=float)
    jp = bessel_j(nu, z)
    jm = bessel_j(-nu, z)
    djp = bessel_j_derivative(nu, z)
    djm = bessel_j_derivative(-nu, z)
    w = jp * djm - djp * jm + 2.0 * math.sin(nu * math.pi) / (math.pi * z)
    return np.abs(w) / (2.0 / (math.pi * z))


def crossover_gap(orders=(-0.75, -0.25, 0.25, 0.75)):
    """Largest relative disagreement of series and Hankel paths at CROSSOVER.

    Measured against the envelope sqrt(2/(pi x)) so that a nearby zero of
    J_nu does not inflate the ratio.
    """
    x = np.array([CROSSOVER])
    worst = 0.0
    for nu in orders:
        ser, _ = _series_j(nu, x)
        asym, _ = _hankel_eval(nu, x, -1)
        env = math.sqrt(2.0 / (math.pi * CROSSOVER))
        worst = max(worst, float(abs(ser[0] - asym[0]) / env))
    return worst
