"""Gaussian states v(x) = m exp(-l x^2 / 2) and their closed-form algebra."""
import math
from dataclasses import dataclass

import numpy as np

SQRT_PI = math.sqrt(math.pi)


class NonNormalizableError(ValueError):
    """Re l <= 0: the Gaussian is not square integrable."""


class DivergentOverlapError(ValueError):
    """Re(1 + l) <= 0: the overlap integral with the ground state diverges."""


@dataclass(frozen=True)
class GaussianState:
    m: complex
    l: complex

    def __post_init__(self):
        object.__setattr__(self, "m", complex(self.m))
        object.__setattr__(self, "l", complex(self.l))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.m * np.exp(-0.5 * self.l * x * x)


GROUND = GaussianState(math.pi ** -0.25, 1.0)


def norm_squared(g):
    """|m|^2 sqrt(pi / Re l)."""
    if g.l.real <= 0.0:
        raise NonNormalizableError(f"Re l = {g.l.real:g} <= 0")
    return abs(g.m) ** 2 * math.sqrt(math.pi / g.l.real)


def gaussian_integral(a):
    """Integral of exp(-a x^2 / 2) over the real line, Re a > 0 (principal root)."""
    a = complex(a)
    if a.real <= 0.0:
        raise DivergentOverlapError(f"Re a = {a.real:g} <= 0")
    return math.sqrt(2.0) * SQRT_PI / complex(np.sqrt(a))


def bilinear(g, h):
    """Integral of g(x) h(x) dx, no complex conjugation."""
    return g.m * h.m * gaussian_integral(g.l + h.l)


def inner(g, h):
    """<g, h> = integral of conj(g) h dx."""
    return g.m.conjugate() * h.m * gaussian_integral(g.l.conjugate() + h.l)


def overlap_with_ground(g):
    """sqrt(2) pi^(1/4) m / (1 + l)^(1/2): bilinear overlap with the real ground state."""
    if (1.0 + g.l).real <= 0.0:
        raise DivergentOverlapError("Re(1 + l) <= 0")
    return complex(math.sqrt(2.0) * math.pi ** 0.25 * g.m / np.sqrt(1.0 + g.l))


def survival_probability(g):
    """|<phi_0, g>|^2 / ||g||^2, clipped to [0, 1] against rounding.

    The amplitude cancels: the ratio is 2 (Re l)^(1/2) / |1 + l|.
    """
    if g.m == 0:
        raise NonNormalizableError("the zero state has no survival probability")
    if g.l.real <= 0.0:
        raise NonNormalizableError(f"Re l = {g.l.real:g} <= 0")
    p = 2.0 * math.sqrt(g.l.real) / abs(1.0 + g.l)
    return min(1.0, max(0.0, p))


def l2_distance(g, h):
    """||g - h|| from the closed-form Gaussian inner products."""
    d2 = norm_squared(g) + norm_squared(h) - 2.0 * inner(g, h).real
    return math.sqrt(max(d2, 0.0))


def free_propagate(g, T):
    """Exact free evolution i v_t = -v_xx / 2 for time T >= 0.

    l -> l / (1 + i l T),  m -> m (1 + i l T)^(-1/2).  For Re l > 0 the factor
    1 + i l T has imaginary part T Re l >= 0, so the path from T = 0 stays in
    the closed upper half-plane and the principal root is the continuous one.
    """
    if T < 0.0:
        raise ValueError("T must be nonnegative")
    if g.l.real <= 0.0:
        raise NonNormalizableError(f"Re l = {g.l.real:g} <= 0")
    f = 1.0 + 1j * g.l * T
    return GaussianState(g.m / complex(np.sqrt(f)), g.l / f)
