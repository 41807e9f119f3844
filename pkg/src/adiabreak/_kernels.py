"""Hot inner loops: double-double power series, Hankel expansion, phase unwrap,
and a Dormand-Prince 5(4) stepper for ``w'' = -eps^2 t^2 w``.

Each ``*_loop`` function is numba-compiled; each ``*_vec`` function is the
numpy fallback.  They must agree to rounding; ``tests/test_kernels.py`` checks
that they do.
"""
import math

import numpy as np

from ._accel import njit

SPLITTER = 134217729.0  # 2**27 + 1, Dekker split constant
SERIES_TOL = 1e-17
SERIES_MAX_TERMS = 400
HANKEL_MAX_TERMS = 20


# ---------------------------------------------------------------------------
# double-double primitives; written so they work on scalars and numpy arrays


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _quick_two_sum(a, b):
    s = a + b
    err = b - (s - a)
    return s, err


def _split(a):
    c = SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def _dd_add(ah, al, bh, bl):
    s, e = _two_sum(ah, bh)
    e = e + (al + bl)
    return _quick_two_sum(s, e)


def _dd_mul(ah, al, bh, bl):
    p, e = _two_prod(ah, bh)
    e = e + (ah * bl + al * bh)
    return _quick_two_sum(p, e)


def _dd_div(ah, al, bh, bl):
    q1 = ah / bh
    ph, pl = _dd_mul(q1, 0.0 * q1, bh, bl)
    rh, rl = _dd_add(ah, al, -ph, -pl)
    q2 = rh / bh
    ph, pl = _dd_mul(q2, 0.0 * q2, bh, bl)
    rh, rl = _dd_add(rh, rl, -ph, -pl)
    q3 = rh / bh
    q1, q2 = _quick_two_sum(q1, q2)
    return _dd_add(q1, q2, q3, 0.0 * q3)


two_sum = njit(_two_sum)
quick_two_sum = njit(_quick_two_sum)
split = njit(_split)
# numba resolves globals at compile time, so the jitted chain needs its own
# definitions that call the jitted primitives.


@njit
def _two_prod_j(a, b):
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


@njit
def _dd_add_j(ah, al, bh, bl):
    s, e = two_sum(ah, bh)
    e = e + (al + bl)
    return quick_two_sum(s, e)


@njit
def _dd_mul_j(ah, al, bh, bl):
    p, e = _two_prod_j(ah, bh)
    e = e + (ah * bl + al * bh)
    return quick_two_sum(p, e)


@njit
def _dd_div_j(ah, al, bh, bl):
    q1 = ah / bh
    ph, pl = _dd_mul_j(q1, 0.0, bh, bl)
    rh, rl = _dd_add_j(ah, al, -ph, -pl)
    q2 = rh / bh
    ph, pl = _dd_mul_j(q2, 0.0, bh, bl)
    rh, rl = _dd_add_j(rh, rl, -ph, -pl)
    q3 = rh / bh
    q1, q2 = quick_two_sum(q1, q2)
    return _dd_add_j(q1, q2, q3, 0.0)


# ---------------------------------------------------------------------------
# entire series  S(nu, q) = sum_k (-q)^k / (k! (nu+1)_k)
#
# J_nu(x) = (x/2)^nu / Gamma(nu+1) * S(nu, x^2/4) and M_nu(s) = S(nu, s) / Gamma(nu+1).
# Terms and partial sums are carried in double-double so that the cancellation
# of the alternating series (about 8 digits at x = 20) stays below 1e-16.


@njit
def series_sum_loop(nu, q_hi, q_lo):
    n = q_hi.shape[0]
    out = np.empty(n)
    terms = np.empty(n, dtype=np.int64)
    err = np.empty(n)
    for i in range(n):
        th, tl = 1.0, 0.0
        sh, sl = 1.0, 0.0
        peak = 1.0
        k = 0
        mq_h, mq_l = -q_hi[i], -q_lo[i]
        while k < SERIES_MAX_TERMS:
            k += 1
            nk_h, nk_l = two_sum(nu, float(k))
            den_h, den_l = _dd_mul_j(nk_h, nk_l, float(k), 0.0)
            th, tl = _dd_mul_j(th, tl, mq_h, mq_l)
            th, tl = _dd_div_j(th, tl, den_h, den_l)
            sh, sl = _dd_add_j(sh, sl, th, tl)
            at = abs(th)
            if at > peak:
                peak = at
            if k > abs(q_hi[i]) and at <= SERIES_TOL * abs(sh):
                break
            if th == 0.0:
                break
        out[i] = sh
        terms[i] = k + 1
        # each dd operation carries ~1e-32 relative error; the largest term
        # bounds the absolute error of the sum
        err[i] = (abs(th) + 1e-31 * peak * (k + 1)) / max(abs(sh), 1e-300)
    return out, terms, err


def series_sum_vec(nu, q_hi, q_lo):
    q_hi = np.asarray(q_hi, dtype=float)
    q_lo = np.asarray(q_lo, dtype=float)
    th = np.ones_like(q_hi)
    tl = np.zeros_like(q_hi)
    sh = np.ones_like(q_hi)
    sl = np.zeros_like(q_hi)
    peak = np.ones_like(q_hi)
    active = np.ones(q_hi.shape, dtype=bool)
    terms = np.ones(q_hi.shape, dtype=np.int64)
    mq_h, mq_l = -q_hi, -q_lo
    aq = np.abs(q_hi)
    k = 0
    while k < SERIES_MAX_TERMS and active.any():
        k += 1
        nk_h, nk_l = _two_sum(nu, float(k))
        den_h, den_l = _dd_mul(nk_h, nk_l, float(k), 0.0)
        nth, ntl = _dd_mul(th, tl, mq_h, mq_l)
        nth, ntl = _dd_div(nth, ntl, den_h, den_l)
        nsh, nsl = _dd_add(sh, sl, nth, ntl)
        th = np.where(active, nth, th)
        tl = np.where(active, ntl, tl)
        sh = np.where(active, nsh, sh)
        sl = np.where(active, nsl, sl)
        at = np.abs(th)
        peak = np.where(active, np.maximum(peak, at), peak)
        terms = np.where(active, k + 1, terms)
        done = ((k > aq) & (at <= SERIES_TOL * np.abs(sh))) | (th == 0.0)
        active &= ~done
    err = (np.abs(th) + 1e-31 * peak * terms) / np.maximum(np.abs(sh), 1e-300)
    return sh, terms, err


# ---------------------------------------------------------------------------
# Hankel large-argument expansion:  J_nu(x) = sqrt(2/(pi x)) (P cos w - Q sin w)
# with u_k = a_k(nu)/x^k,  P = u_0 - u_2 + u_4 - ...,  Q = u_1 - u_3 + ...
#
# order < 0 selects the optimal truncation (stop before the smallest term grows,
# at most HANKEL_MAX_TERMS corrections); order >= 0 keeps u_0..u_order exactly.


@njit
def hankel_pq_loop(nu, x, order):
    n = x.shape[0]
    p = np.empty(n)
    q = np.empty(n)
    last = np.empty(n)
    mu = 4.0 * nu * nu
    for i in range(n):
        xi = x[i]
        u = 1.0
        pp = 1.0
        qq = 0.0
        k = 0
        kmax = HANKEL_MAX_TERMS if order < 0 else order
        while k < kmax:
            k += 1
            c = 2.0 * k - 1.0
            unew = u * (mu - c * c) / (8.0 * k * xi)
            if order < 0 and abs(unew) >= abs(u):
                break
            u = unew
            r = k % 4
            if r == 0:
                pp += u
            elif r == 1:
                qq += u
            elif r == 2:
                pp -= u
            else:
                qq -= u
            if u == 0.0:
                break
        p[i] = pp
        q[i] = qq
        last[i] = abs(u)
    return p, q, last


def hankel_pq_vec(nu, x, order):
    x = np.asarray(x, dtype=float)
    mu = 4.0 * nu * nu
    u = np.ones_like(x)
    p = np.ones_like(x)
    q = np.zeros_like(x)
    active = np.ones(x.shape, dtype=bool)
    kmax = HANKEL_MAX_TERMS if order < 0 else order
    signs = (1.0, 1.0, -1.0, -1.0)  # for k % 4 == 0, 1, 2, 3
    for k in range(1, kmax + 1):
        c = 2.0 * k - 1.0
        unew = u * (mu - c * c) / (8.0 * k * x)
        if order < 0:
            active &= np.abs(unew) < np.abs(u)
        if not active.any():
            break
        u = np.where(active, unew, u)
        contrib = np.where(active, signs[k % 4] * u, 0.0)
        if k % 2 == 0:
            p = p + contrib
        else:
            q = q + contrib
        active &= u != 0.0
    return p, q, np.abs(u)


# ---------------------------------------------------------------------------
# phase unwrapping with a jump guard


@njit
def unwrap_loop(phase, anchor_index, anchor_value, max_jump):
    """Unwrap principal arguments outward from ``anchor_index``.

    Returns the unwrapped phase and the index of the first interval whose
    increment reaches ``max_jump`` (or -1).  The offending interval is
    ``(bad-1, bad)`` on the right of the anchor and ``(bad, bad+1)`` on the left.
    """
    n = phase.shape[0]
    out = np.empty(n)
    two_pi = 2.0 * math.pi
    base = phase[anchor_index]
    out[anchor_index] = base + two_pi * math.floor((anchor_value - base) / two_pi + 0.5)
    bad = -1
    for i in range(anchor_index + 1, n):
        d = phase[i] - phase[i - 1]
        d -= two_pi * math.floor(d / two_pi + 0.5)
        if abs(d) >= max_jump and bad < 0:
            bad = i
        out[i] = out[i - 1] + d
    for i in range(anchor_index - 1, -1, -1):
        d = phase[i] - phase[i + 1]
        d -= two_pi * math.floor(d / two_pi + 0.5)
        if abs(d) >= max_jump and bad < 0:
            bad = i
        out[i] = out[i + 1] + d
    return out, bad


def unwrap_vec(phase, anchor_index, anchor_value, max_jump):
    phase = np.asarray(phase, dtype=float)
    two_pi = 2.0 * np.pi
    d = np.diff(phase)
    d -= two_pi * np.round(d / two_pi)
    base = phase[anchor_index]
    start = base + two_pi * np.round((anchor_value - base) / two_pi)
    out = np.empty_like(phase)
    out[0] = 0.0
    out[1:] = np.cumsum(d)
    out += start - out[anchor_index]
    big = np.flatnonzero(np.abs(d) >= max_jump)
    bad = -1
    if big.size:
        right = big[big >= anchor_index]
        left = big[big < anchor_index]
        if right.size:
            bad = int(right[0]) + 1
        elif left.size:
            bad = int(left[-1])
    return out, bad


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4) for y = (w, w'),  w'' = -eps^2 t^2 w, complex valued.

_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)


def _dopri_run(eps2, t_out, w0, dw0, rtol, atol, h0, h_min, max_steps):
    """Integrate through the sorted-by-direction output times ``t_out``.

    Every step is clipped so that each output time is hit exactly.  Returns
    (w, dw, n_accept, n_reject, status, t_nodes, w_nodes, dw_nodes, n_nodes);
    status 0 = success, 1 = step underflow, 2 = too many steps.  The node
    arrays hold every accepted step (length max_steps + 1, first n_nodes valid).
    """
    n_out = t_out.shape[0]
    w_res = np.empty(n_out, dtype=np.complex128)
    dw_res = np.empty(n_out, dtype=np.complex128)
    t_nodes = np.empty(max_steps + 1)
    w_nodes = np.empty(max_steps + 1, dtype=np.complex128)
    dw_nodes = np.empty(max_steps + 1, dtype=np.complex128)
    t = t_out[0]
    w = w0
    dw = dw0
    w_res[0] = w
    dw_res[0] = dw
    t_nodes[0] = t
    w_nodes[0] = w
    dw_nodes[0] = dw
    n_nodes = 1
    direction = 1.0
    if n_out > 1 and t_out[n_out - 1] < t_out[0]:
        direction = -1.0
    h = abs(h0)
    err_prev = 1e-4
    n_acc = 0
    n_rej = 0
    status = 0
    j = 1
    # first stage derivative (FSAL)
    k1w = dw
    k1d = -eps2 * t * t * w
    while j < n_out:
        target = t_out[j]
        remaining = (target - t) * direction
        if remaining <= 0.0:
            w_res[j] = w
            dw_res[j] = dw
            j += 1
            continue
        hit = False
        h_free = h
        if h >= remaining:
            h = remaining
            hit = True
        hs = h * direction
        t2 = t + _C2 * hs
        yw = w + hs * (_A21 * k1w)
        yd = dw + hs * (_A21 * k1d)
        k2w = yd
        k2d = -eps2 * t2 * t2 * yw
        t3 = t + _C3 * hs
        yw = w + hs * (_A31 * k1w + _A32 * k2w)
        yd = dw + hs * (_A31 * k1d + _A32 * k2d)
        k3w = yd
        k3d = -eps2 * t3 * t3 * yw
        t4 = t + _C4 * hs
        yw = w + hs * (_A41 * k1w + _A42 * k2w + _A43 * k3w)
        yd = dw + hs * (_A41 * k1d + _A42 * k2d + _A43 * k3d)
        k4w = yd
        k4d = -eps2 * t4 * t4 * yw
        t5 = t + _C5 * hs
        yw = w + hs * (_A51 * k1w + _A52 * k2w + _A53 * k3w + _A54 * k4w)
        yd = dw + hs * (_A51 * k1d + _A52 * k2d + _A53 * k3d + _A54 * k4d)
        k5w = yd
        k5d = -eps2 * t5 * t5 * yw
        t6 = t + hs
        yw = w + hs * (_A61 * k1w + _A62 * k2w + _A63 * k3w + _A64 * k4w + _A65 * k5w)
        yd = dw + hs * (_A61 * k1d + _A62 * k2d + _A63 * k3d + _A64 * k4d + _A65 * k5d)
        k6w = yd
        k6d = -eps2 * t6 * t6 * yw
        nw = w + hs * (_B1 * k1w + _B3 * k3w + _B4 * k4w + _B5 * k5w + _B6 * k6w)
        nd = dw + hs * (_B1 * k1d + _B3 * k3d + _B4 * k4d + _B5 * k5d + _B6 * k6d)
        k7w = nd
        k7d = -eps2 * t6 * t6 * nw
        ew = hs * (_E1 * k1w + _E3 * k3w + _E4 * k4w + _E5 * k5w + _E6 * k6w + _E7 * k7w)
        ed = hs * (_E1 * k1d + _E3 * k3d + _E4 * k4d + _E5 * k5d + _E6 * k6d + _E7 * k7d)
        sw = atol + rtol * max(abs(w), abs(nw))
        sd = atol + rtol * max(abs(dw), abs(nd))
        err = math.sqrt(0.5 * ((abs(ew) / sw) ** 2 + (abs(ed) / sd) ** 2))
        if err <= 1.0:
            t = t + hs
            if hit:
                t = target
            w = nw
            dw = nd
            k1w = k7w
            k1d = k7d
            n_acc += 1
            if n_nodes <= max_steps:
                t_nodes[n_nodes] = t
                w_nodes[n_nodes] = w
                dw_nodes[n_nodes] = dw
                n_nodes += 1
            # PI controller (Gustafsson), exponents for a 5th order pair
            if err == 0.0:
                fac = 5.0
            else:
                fac = 0.9 * err ** (-0.7 / 5.0) * err_prev ** (0.4 / 5.0)
                fac = min(5.0, max(0.2, fac))
            err_prev = max(err, 1e-4)
            if hit:
                w_res[j] = w
                dw_res[j] = dw
                j += 1
                # a clipped step says little about the natural step size
                h = max(h_free, h * fac)
            else:
                h = h * fac
        else:
            n_rej += 1
            fac = max(0.2, 0.9 * err ** (-1.0 / 5.0))
            h = h * fac
        if h < h_min:
            status = 1
            break
        if n_acc + n_rej > max_steps:
            status = 2
            break
    return w_res, dw_res, n_acc, n_rej, status, t_nodes, w_nodes, dw_nodes, n_nodes


dopri_run_loop = njit(_dopri_run)
dopri_run_py = _dopri_run
