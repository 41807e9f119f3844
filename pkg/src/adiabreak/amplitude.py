"""Amplitude m(t) of the Gaussian, i m' = m l / 2.

For l = -i w'/w the amplitude is m(t) = A w(t)^(-1/2).  The square root is
taken along the trajectory: the argument of w is unwrapped on a grid through
t = 0, where w(0) = -1/Gamma(3/4) and its argument is pinned to pi.  With that
anchor m(0) = -i A Gamma(3/4)^(1/2) exactly.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._accel import USE_NUMBA
from .riccati import RiccatiFamily, _bessel_quad, solve_kappa_eps, w_tilde
from .specfun import GAMMA

MAX_PHASE_STEP = 0.5 * math.pi
ZERO_ANCHOR_PHASE = math.pi
PI_M14 = math.pi ** -0.25


class BranchStepError(RuntimeError):
    """Adjacent samples too far apart to continue the square-root branch."""


class BranchTracker:
    """Continuous argument of a complex function sampled along a path."""

    def __init__(self, t, value, argument=None, max_step=MAX_PHASE_STEP):
        self.last_t = float(t)
        principal = math.atan2(value.imag, value.real)
        if argument is None:
            self.last_argument = principal
        else:
            k = round((argument - principal) / (2.0 * math.pi))
            self.last_argument = principal + 2.0 * math.pi * k
        self.max_step = max_step

    def advance(self, t, value):
        principal = math.atan2(value.imag, value.real)
        d = principal - self.last_argument
        d -= 2.0 * math.pi * round(d / (2.0 * math.pi))
        if abs(d) >= self.max_step:
            raise BranchStepError(
                f"phase step {d:.3f} between t={self.last_t:g} and t={t:g}; refine the path"
            )
        self.last_argument += d
        self.last_t = float(t)
        return self.last_argument


def _unwrap(phase, anchor_index, anchor_value):
    phase = np.ascontiguousarray(phase, dtype=float)
    if USE_NUMBA:
        return _kernels.unwrap_loop(phase, int(anchor_index), float(anchor_value), MAX_PHASE_STEP)
    return _kernels.unwrap_vec(phase, int(anchor_index), float(anchor_value), MAX_PHASE_STEP)


@dataclass
class PhaseTrack:
    """Unwrapped argument of w(t, kappa) on a grid containing t = 0."""

    family: RiccatiFamily
    t: np.ndarray
    phase: np.ndarray
    w: np.ndarray

    @classmethod
    def build(cls, family, t_lo, t_hi, n=None, max_rounds=40):
        if not t_lo <= 0.0 <= t_hi:
            raise ValueError("phase track must contain t = 0")
        if n is None:
            n = default_grid_size(family.epsilon)
        t = np.union1d(np.linspace(t_lo, t_hi, n), [0.0])
        w = w_tilde(family, t)
        for _ in range(max_rounds):
            anchor = int(np.searchsorted(t, 0.0))
            phase, bad = _unwrap(np.angle(w), anchor, ZERO_ANCHOR_PHASE)
            if bad < 0:
                return cls(family, t, phase, w)
            d = np.diff(np.angle(w))
            d -= 2.0 * np.pi * np.round(d / (2.0 * np.pi))
            idx = np.flatnonzero(np.abs(d) >= MAX_PHASE_STEP)
            mids = 0.5 * (t[idx] + t[idx + 1])
            t = np.insert(t, idx + 1, mids)
            w = np.insert(w, idx + 1, w_tilde(family, mids))
        raise BranchStepError("phase unwrapping did not settle after refinement")

    def phase_at(self, t):
        """Unwrapped argument of w at arbitrary t inside the grid."""
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t[0]) or np.any(t > self.t[-1]):
            raise ValueError("t outside the tracked interval")
        w = np.asarray(w_tilde(self.family, t))
        ref = np.interp(t, self.t, self.phase)
        principal = np.angle(w)
        k = np.round((ref - principal) / (2.0 * np.pi))
        out = principal + 2.0 * np.pi * k
        if np.any(np.abs(out - ref) >= MAX_PHASE_STEP):
            raise BranchStepError("evaluation point too far from the tracked grid")
        return out, w


def default_grid_size(epsilon):
    """Uniform grid size on [-1/eps, 1/eps]: max(4096, ceil(40/eps)), odd."""
    n = max(4096, math.ceil(40.0 / epsilon))
    return n + 1 if n % 2 == 0 else n


@dataclass
class AmplitudeSolution:
    """m(t) = const * w(t, kappa)^(-1/2) on a tracked interval."""

    epsilon: float
    kappa: complex
    a_const: complex
    track: PhaseTrack

    def at(self, t):
        phase, w = self.track.phase_at(t)
        return self.a_const * np.abs(w) ** -0.5 * np.exp(-0.5j * phase)

    @classmethod
    def from_value_at_zero(cls, family, m_zero, t_hi, t_lo=0.0, n=None):
        """Outgoing solution fixed by m(0); m(0) = -i B Gamma(3/4)^(1/2)."""
        track = PhaseTrack.build(family, t_lo, t_hi, n)
        b = 1j * m_zero / math.sqrt(GAMMA.gamma_3_4)
        return cls(family.epsilon, family.kappa, complex(b), track)


def amplitude_constant(epsilon, kappa_eps, track=None):
    """A_eps = pi^(-1/4) w(-1/eps, kappa_eps)^(1/2) on the tracked branch."""
    fam = RiccatiFamily(epsilon, kappa_eps)
    if track is None:
        track = PhaseTrack.build(fam, -1.0 / epsilon, 1.0 / epsilon)
    phase, w = track.phase_at(-1.0 / epsilon)
    return complex(PI_M14 * abs(w) ** 0.5 * np.exp(0.5j * phase))


def star_amplitude(epsilon, n=None):
    """AmplitudeSolution for the trajectory starting at the ground state."""
    kappa = solve_kappa_eps(epsilon)
    fam = RiccatiFamily(epsilon, kappa)
    track = PhaseTrack.build(fam, -1.0 / epsilon, 1.0 / epsilon, n)
    a = amplitude_constant(epsilon, kappa, track)
    return AmplitudeSolution(epsilon, kappa, a, track)


def amplitude_at(sol, t):
    """m(t) on the branch continued from t = -1/eps."""
    out = sol.at(t)
    return complex(out) if np.ndim(t) == 0 else out


def amplitude_at_final(epsilon, sol=None):
    """m(1/eps) from the closed ratio at z = 1/(2 eps), branch from the track.

    m(1/eps)^2 = pi^(-1/2) (-J_{-1/4} - kappa J_{1/4}) / (-J_{-1/4} + kappa J_{1/4}).
    """
    if sol is None:
        sol = star_amplitude(epsilon)
    kappa = sol.kappa
    _, jm14, jp14, _ = _bessel_quad(0.5 / epsilon)
    m2 = (-jm14 - kappa * jp14) / (-jm14 + kappa * jp14) / math.sqrt(math.pi)
    root = complex(np.sqrt(complex(m2)))
    tracked = amplitude_at(sol, 1.0 / epsilon)
    return root if abs(root - tracked) <= abs(root + tracked) else -root


def leading_m0(epsilon):
    """pi^(-1/4) (sqrt(2) e^{i/eps} + i)^(-1/2), continuous in 1/eps.

    Written as e^{-i theta/2} (sqrt(2) + i e^{-i theta})^(-1/2): the second
    factor has positive real part, so its principal root is continuous and the
    product equals the principal root at theta = pi/2.
    """
    th = 1.0 / epsilon
    inner = math.sqrt(2.0) + 1j * np.exp(-1j * th)
    return complex(PI_M14 * np.exp(-0.5j * th) / np.sqrt(inner))
