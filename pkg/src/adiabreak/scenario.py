"""End-to-end runs of the model in microscopic time.

L = 0: the ground state at t = -1/eps evolves under V = eps^2 t^2 x^2 / 2 up to
t = 1/eps.  L > 0: the same incoming stage up to the moment the potential
vanishes, free evolution for 2L/eps, then an outgoing Riccati solution matched
at the moment the potential switches back on.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .amplitude import AmplitudeSolution, PhaseTrack, amplitude_at_final, amplitude_constant, leading_m0, star_amplitude
from .gaussian import GaussianState, free_propagate, l2_distance, survival_probability
from .riccati import RiccatiFamily, l_star_at_final, leading_l0, riccati_l, solve_kappa_eps
from .specfun import C1, GAMMA

SQRT_G34 = math.sqrt(GAMMA.gamma_3_4)


class DegenerateMatchingError(ArithmeticError):
    """The matching denominator -2 a L + sqrt(eps) vanished."""


@dataclass(frozen=True)
class ScenarioConfig:
    epsilon: float
    L: float = 0.0
    delta: float = 0.5
    c_excl: float = 1.0
    n_max: int | None = None

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.L < 0.0:
            raise ValueError("L must be nonnegative")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.c_excl <= 0.0:
            raise ValueError("c_excl must be positive")

    def resolved_n_max(self, eps_min=None):
        if self.n_max is not None:
            return int(self.n_max)
        return default_n_max(self.epsilon if eps_min is None else eps_min)


@dataclass(frozen=True)
class MatchedConstants:
    a_eps: complex
    gamma: complex
    b_eps: complex
    l1: float
    big_b: float
    rho: float
    beta: float
    kappa_eps: complex = 0j
    a_const: complex = 0j
    denominator: complex = 0j

    def big_a(self, epsilon):
        """A(eps) = B^2 + eps + B^2 cos 2 rho - sqrt(2 eps) B sin 2 rho."""
        b = self.big_b
        r = self.rho
        return b * b + epsilon + b * b * math.cos(2 * r) - math.sqrt(2 * epsilon) * b * math.sin(2 * r)


@dataclass
class ScenarioResult:
    final_state: GaussianState
    survival: float
    leading_state: GaussianState
    asymptotic_gap: float
    excluded: bool = False
    diagnostics: dict = field(default_factory=dict)


def run_l0(epsilon, n=None):
    """Exact state at t = 1/eps against the leading-order state."""
    sol = star_amplitude(epsilon, n)
    final = GaussianState(amplitude_at_final(epsilon, sol), l_star_at_final(epsilon))
    lead = GaussianState(leading_m0(epsilon), leading_l0(epsilon))
    return ScenarioResult(
        final_state=final,
        survival=survival_probability(final),
        leading_state=lead,
        asymptotic_gap=l2_distance(final, lead),
        diagnostics={"kappa_eps": sol.kappa, "a_const": sol.a_const, "grid_points": len(sol.track.t)},
    )


def _incoming(epsilon, n=None):
    kappa = solve_kappa_eps(epsilon)
    fam = RiccatiFamily(epsilon, kappa)
    track = PhaseTrack.build(fam, -1.0 / epsilon, 0.0, n)
    return kappa, amplitude_constant(epsilon, kappa, track)


def _beta(epsilon, big_b):
    # sin(beta) = sign(B) sqrt(2 eps) / (B^2 + 2 eps)^(1/2), the sign that makes
    # A(eps) = B^2 (1 + eps/B^2 + (1 + 2 eps/B^2)^(1/2) cos(2 rho + beta)) exact
    return math.atan2(math.sqrt(2.0 * epsilon) * big_b, big_b * big_b)


def matched_constants(cfg, kappa=None, a_const=None):
    """Constants matching the outgoing solution to the freely evolved state."""
    eps = cfg.epsilon
    if kappa is None or a_const is None:
        kappa, a_const = _incoming(eps)
    se = math.sqrt(eps)
    a_eps = 2.0 * kappa * C1
    den = -2.0 * a_eps * cfg.L + se
    if abs(den) < 1e-14:
        raise DegenerateMatchingError("-2 a L + sqrt(eps) vanished")
    gamma = se * kappa / den
    b_eps = a_const * eps ** 0.25 / complex(np.sqrt(den))
    l1 = -4.0 * C1 * cfg.L
    big_b = l1 - math.sqrt(2.0 * eps)
    rho = 0.5 / eps - math.pi / 8.0
    return MatchedConstants(
        a_eps=complex(a_eps),
        gamma=complex(gamma),
        b_eps=complex(b_eps),
        l1=l1,
        big_b=big_b,
        rho=rho,
        beta=_beta(eps, big_b),
        kappa_eps=complex(kappa),
        a_const=complex(a_const),
        denominator=complex(den),
    )


def resonant_leading_l(cfg, mc=None):
    """(eps + i(B^2 sin 2rho + sqrt(2 eps) B cos 2rho)) / A(eps)."""
    eps = cfg.epsilon
    if mc is None:
        l1 = -4.0 * C1 * cfg.L
        big_b = l1 - math.sqrt(2.0 * eps)
        rho = 0.5 / eps - math.pi / 8.0
    else:
        big_b, rho = mc.big_b, mc.rho
    b2 = big_b * big_b
    num = eps + 1j * (b2 * math.sin(2 * rho) + math.sqrt(2 * eps) * big_b * math.cos(2 * rho))
    den = b2 + eps + b2 * math.cos(2 * rho) - math.sqrt(2 * eps) * big_b * math.sin(2 * rho)
    return complex(num / den), den


def run_l_positive(cfg, n=None):
    """Three-stage run: incoming Riccati, free flight 2L/eps, outgoing Riccati."""
    eps = cfg.epsilon
    se = math.sqrt(eps)
    kappa, a_const = _incoming(eps, n)
    mc = matched_constants(cfg, kappa, a_const)

    # (i) exact state when the potential switches off
    state0 = GaussianState(-1j * a_const * SQRT_G34, 2j * kappa * se * C1)
    # (ii) free flight
    state1 = free_propagate(state0, 2.0 * cfg.L / eps)
    # (iii) outgoing solution with l(0, gamma) = state1.l, m(0) = state1.m
    gamma = state1.l / (2j * se * C1)
    fam = RiccatiFamily(eps, gamma)
    out = AmplitudeSolution.from_value_at_zero(fam, state1.m, 1.0 / eps, n=n)
    l_final = complex(riccati_l(fam, 1.0 / eps))
    m_final = complex(out.at(1.0 / eps))
    final = GaussianState(m_final, l_final)

    l_lead, big_a = resonant_leading_l(cfg, mc)
    m_lead = (max(l_lead.real, 0.0) / math.pi) ** 0.25
    excluded = is_excluded(cfg, eps)
    diag = {
        "kappa_eps": kappa,
        "a_const": a_const,
        "gamma": gamma,
        "b_eps": out.a_const,
        "gamma_residual": abs(gamma - mc.gamma),
        "b_residual": abs(out.a_const - mc.b_eps),
        "l_match_residual": abs(riccati_l(fam, 0.0) - 1j * eps * mc.a_eps / mc.denominator),
        "big_a": big_a,
        "state_at_switch_off": state0,
        "state_at_switch_on": state1,
        "outgoing": out,
    }
    return ScenarioResult(
        final_state=final,
        survival=survival_probability(final),
        leading_state=GaussianState(m_lead, l_lead),
        asymptotic_gap=abs(l_final - l_lead) / abs(l_lead),
        excluded=excluded,
        diagnostics=diag,
    )


def run(cfg, n=None):
    return run_l0(cfg.epsilon, n) if cfg.L == 0.0 else run_l_positive(cfg, n)


# ---------------------------------------------------------------------------
# excluded set


def epsilon_n(n):
    """(pi/4 + (2n+1) pi)^(-1/2)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return (math.pi / 4.0 + (2 * n + 1) * math.pi) ** -0.5


def default_n_max(eps_min):
    """Smallest n with epsilon_n(n)^2 < eps_min."""
    n = math.ceil((1.0 / eps_min - 1.25 * math.pi) / (2.0 * math.pi))
    n = max(n, 0)
    while epsilon_n(n) ** 2 >= eps_min:
        n += 1
    return n


def excluded_set(cfg, eps_min=None):
    """Intervals (center, radius) of the covering, n = 0..n_max.

    center_n = 1 / (pi/4 - 2 epsilon_n(n)/L1 + (2n+1) pi),
    radius_n = c_excl n^(-(5-delta)/2), and c_excl for n = 0.
    """
    if cfg.L <= 0.0:
        raise ValueError("the excluded set is defined for L > 0")
    l1 = -4.0 * C1 * cfg.L
    out = []
    for n in range(cfg.resolved_n_max(eps_min) + 1):
        center = 1.0 / (math.pi / 4.0 - 2.0 * epsilon_n(n) / l1 + (2 * n + 1) * math.pi)
        radius = cfg.c_excl if n == 0 else cfg.c_excl * n ** (-(5.0 - cfg.delta) / 2.0)
        out.append((center, radius))
    return out


def resonance_cosine(cfg, epsilon):
    """cos(2 rho + beta) at epsilon for the configuration's L."""
    l1 = -4.0 * C1 * cfg.L
    big_b = l1 - math.sqrt(2.0 * epsilon)
    rho = 0.5 / epsilon - math.pi / 8.0
    return math.cos(2.0 * rho + _beta(epsilon, big_b))


def violates_lower_bound(cfg, epsilon):
    """cos(2 rho + beta) <= -1 + c_excl eps^(1 - delta)."""
    return resonance_cosine(cfg, epsilon) <= -1.0 + cfg.c_excl * epsilon ** (1.0 - cfg.delta)


def in_covering(cfg, epsilon, intervals=None):
    if intervals is None:
        intervals = excluded_set(cfg, eps_min=epsilon)
    return any(abs(epsilon - c) < r for c, r in intervals)


def is_excluded(cfg, epsilon):
    """Whether epsilon fails the lower-bound condition on A(eps).

    The direct cosine condition decides; the interval covering returned by
    :func:`excluded_set` is reported separately by :func:`in_covering`.
    """
    if cfg.L <= 0.0:
        return False
    return violates_lower_bound(cfg, epsilon)


def covering_measure(cfg, eps_lo, eps_hi, intervals=None):
    """Length of (union of covering intervals) intersected with (eps_lo, eps_hi)."""
    if intervals is None:
        intervals = excluded_set(cfg, eps_min=eps_lo)
    segs = sorted((max(c - r, eps_lo), min(c + r, eps_hi)) for c, r in intervals)
    total = 0.0
    cur_lo, cur_hi = None, None
    for lo, hi in segs:
        if hi <= lo:
            continue
        if cur_hi is None or lo > cur_hi:
            if cur_hi is not None:
                total += cur_hi - cur_lo
            cur_lo, cur_hi = lo, hi
        else:
            cur_hi = max(cur_hi, hi)
    if cur_hi is not None:
        total += cur_hi - cur_lo
    return total
