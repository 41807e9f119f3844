"""Independent numerical checks of the closed forms.

Nothing here imports the special-function, Riccati or amplitude modules:

* the Riccati equation is integrated through its linear companion
  w'' = -eps^2 t^2 w with l = -i w'/w (adaptive Dormand-Prince 5(4));
* the Schrodinger equation itself is stepped on a periodic grid with Strang
  split-step Fourier;
* overlaps are brute-force quadratures.
"""
import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson

from . import _kernels
from ._accel import USE_NUMBA
from .gaussian import GaussianState, free_propagate


class StepSizeUnderflowError(RuntimeError):
    pass


class ToleranceNotMetError(RuntimeError):
    pass


class ResolutionError(RuntimeError):
    """The wave reached the grid boundary or is under-resolved."""


class StabilityError(ValueError):
    """Time step too large for the grid's largest kinetic eigenvalue."""


class BranchStepError(RuntimeError):
    pass


@dataclass
class OdeTrajectory:
    epsilon: float
    times: np.ndarray
    w_values: np.ndarray
    wprime_values: np.ndarray
    est_error: float
    n_accepted: int = 0
    n_rejected: int = 0

    @property
    def l_values(self):
        return -1j * self.wprime_values / self.w_values

    def conserved(self):
        """Im(conj(w) w'), constant for the real potential eps^2 t^2."""
        return np.imag(np.conj(self.w_values) * self.wprime_values)

    def index_of(self, t):
        """Node indices of the requested times (which the integrator hit exactly)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        order = np.argsort(self.times)
        pos = np.searchsorted(self.times[order], t)
        pos = np.clip(pos, 0, len(order) - 1)
        idx = order[pos]
        if np.any(np.abs(self.times[idx] - t) > 1e-12 * np.maximum(1.0, np.abs(t))):
            raise KeyError("requested time is not an integration node")
        return idx


def integrate_riccati_linear(
    epsilon, t0, l0, t1, tol=1e-10, t_eval=None, min_nodes=0, h0=1e-3, max_steps=400_000
):
    """Integrate w'' = -eps^2 t^2 w from w(t0) = 1, w'(t0) = i l0 to t1.

    ``t_eval`` points (between t0 and t1) become integration nodes exactly.
    ``min_nodes`` adds that many equispaced nodes, which quadratures along the
    trajectory need; the adaptive steps alone are far apart.
    """
    if tol < 1e-12:
        raise ValueError("tol must be >= 1e-12")
    if t0 == t1:
        raise ValueError("t0 and t1 must differ")
    direction = 1.0 if t1 > t0 else -1.0
    outs = [t0, t1] if t_eval is None else [t0, t1, *np.asarray(t_eval, dtype=float)]
    if min_nodes:
        outs = [*outs, *np.linspace(t0, t1, int(min_nodes))]
    outs = np.unique(np.asarray(outs, dtype=float))
    if direction < 0:
        outs = outs[::-1]
    lo, hi = min(t0, t1), max(t0, t1)
    if outs[0] != t0 or np.any(outs < lo) or np.any(outs > hi):
        raise ValueError("t_eval must lie between t0 and t1")
    run = _kernels.dopri_run_loop if USE_NUMBA else _kernels.dopri_run_py
    res = run(
        float(epsilon) ** 2, np.ascontiguousarray(outs), complex(1.0), complex(1j * l0),
        float(tol), float(tol), float(h0), 1e-14 * max(1.0, abs(t1 - t0)), int(max_steps),
    )
    _, _, n_acc, n_rej, status, t_nodes, w_nodes, dw_nodes, n_nodes = res
    if status == 1:
        raise StepSizeUnderflowError("step size underflow")
    if status == 2:
        raise ToleranceNotMetError(f"more than {max_steps} steps needed")
    times = t_nodes[:n_nodes].copy()
    w = w_nodes[:n_nodes].copy()
    dw = dw_nodes[:n_nodes].copy()
    inv = np.imag(np.conj(w) * dw)
    drift = float(np.max(np.abs(inv - inv[0])) / max(abs(inv[0]), 1e-300))
    return OdeTrajectory(float(epsilon), times, w, dw, drift, int(n_acc), int(n_rej))


def amplitude_by_quadrature(traj, m0):
    """m(t) = m0 exp(int_{t0}^t l / (2i)) by cumulative Simpson on the nodes.

    Accuracy is set by node spacing; build ``traj`` with ``min_nodes``.
    """
    f = traj.l_values / 2j
    integral = cumulative_simpson(f.real, x=traj.times, initial=0.0) + 1j * cumulative_simpson(
        f.imag, x=traj.times, initial=0.0
    )
    return m0 * np.exp(integral)


def amplitude_by_ratio(traj, m0):
    """m(t) = m0 (w(t0)/w(t))^(1/2), argument of w unwrapped along the nodes."""
    phase = np.angle(traj.w_values)
    d = np.diff(phase)
    d -= 2.0 * np.pi * np.round(d / (2.0 * np.pi))
    if np.any(np.abs(d) >= 0.5 * np.pi):
        raise BranchStepError("integration nodes too sparse to follow arg w")
    unwrapped = phase[0] + np.concatenate([[0.0], np.cumsum(d)])
    mod = np.abs(traj.w_values[0] / traj.w_values) ** 0.5
    return m0 * mod * np.exp(-0.5j * (unwrapped - unwrapped[0]))


def ode_final_state(epsilon, L=0.0, tol=1e-10, min_nodes=20001):
    """Final Gaussian state from the ODE oracle alone.

    Harmonic stages are integrated in their own clocks, t in [-1/eps, 0] and
    [0, 1/eps] (one stage over [-1/eps, 1/eps] when L = 0); the free stage of
    length 2L/eps uses the exact Gaussian law.
    """
    m0 = math.pi ** -0.25
    if L == 0.0:
        tr = integrate_riccati_linear(epsilon, -1.0 / epsilon, 1.0, 1.0 / epsilon, tol, min_nodes=min_nodes)
        return GaussianState(amplitude_by_quadrature(tr, m0)[-1], tr.l_values[-1])
    tr = integrate_riccati_linear(epsilon, -1.0 / epsilon, 1.0, 0.0, tol, min_nodes=min_nodes)
    mid = free_propagate(
        GaussianState(amplitude_by_quadrature(tr, m0)[-1], tr.l_values[-1]), 2.0 * L / epsilon
    )
    tr = integrate_riccati_linear(epsilon, 0.0, mid.l, 1.0 / epsilon, tol, min_nodes=min_nodes)
    return GaussianState(amplitude_by_quadrature(tr, mid.m)[-1], tr.l_values[-1])


# ---------------------------------------------------------------------------
# grid solver


@dataclass
class GridState:
    x_min: float
    x_max: float
    n_points: int
    values: np.ndarray
    time: float

    def __post_init__(self):
        n = int(self.n_points)
        if n < 2 or n & (n - 1):
            raise ValueError("n_points must be a power of two")
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (n,):
            raise ValueError("values must have n_points entries")

    @property
    def dx(self):
        return (self.x_max - self.x_min) / self.n_points

    @property
    def x(self):
        return self.x_min + self.dx * np.arange(self.n_points)

    def norm_squared(self):
        return float(np.sum(np.abs(self.values) ** 2) * self.dx)

    def boundary_amplitude(self, width=8):
        v = np.abs(self.values)
        return float(max(v[:width].max(), v[-width:].max()))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "re_v", "im_v"])
            for xi, vi in zip(self.x, self.values):
                w.writerow([f"{xi:.17g}", f"{vi.real:.17g}", f"{vi.imag:.17g}"])


def ground_state_grid(x_max, n_points, time=0.0):
    """pi^(-1/4) exp(-x^2/2) on the periodic grid [-x_max, x_max)."""
    g = GridState(-x_max, x_max, n_points, np.zeros(n_points), time)
    g.values = (math.pi ** -0.25 * np.exp(-0.5 * g.x ** 2)).astype(complex)
    return g


def model_potential_coefficient(epsilon, L, t):
    """c(t) with V(eps t, x) = c(t) x^2: (eps t + L)^2/2, 0, (eps t - L)^2/2."""
    tau = epsilon * t
    if tau < -L:
        return 0.5 * (tau + L) ** 2
    if tau > L:
        return 0.5 * (tau - L) ** 2
    return 0.0


def max_kinetic_eigenvalue(grid):
    return 0.5 * (math.pi / grid.dx) ** 2


def evolve_pde(epsilon, L, grid, t0, t1, dt, potential=None, check_every=2000, boundary_tol=1e-10):
    """Strang split-step Fourier for i v_t = -v_xx/2 + V(eps t, x) v.

    ``potential(t)`` may override the model and must return the coefficient
    c with V = c x^2.  The potential is sampled at each step's midpoint.
    """
    if t1 <= t0:
        raise ValueError("t1 must exceed t0")
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    n_steps = max(1, math.ceil((t1 - t0) / dt - 1e-9))
    h = (t1 - t0) / n_steps
    if h * max_kinetic_eigenvalue(grid) > 0.1:
        raise StabilityError(
            f"dt * max kinetic eigenvalue = {h * max_kinetic_eigenvalue(grid):.3g} > 0.1"
        )
    if potential is None:
        def potential(t):
            return model_potential_coefficient(epsilon, L, t)

    x2 = grid.x ** 2
    k = 2.0 * np.pi * np.fft.fftfreq(grid.n_points, d=grid.dx)
    kinetic = np.exp(-0.5j * h * k * k)
    v = grid.values.copy()
    norm0 = grid.norm_squared()
    # consecutive potential half steps are merged into one phase factor
    c_prev = potential(t0 + 0.5 * h)
    v *= np.exp(-0.5j * h * c_prev * x2)
    for j in range(n_steps):
        v = np.fft.ifft(kinetic * np.fft.fft(v))
        if j + 1 < n_steps:
            c_next = potential(t0 + (j + 1.5) * h)
            v *= np.exp(-0.5j * h * (c_prev + c_next) * x2)
            c_prev = c_next
        else:
            v *= np.exp(-0.5j * h * c_prev * x2)
        if check_every and (j + 1) % check_every == 0:
            edge = max(np.abs(v[:8]).max(), np.abs(v[-8:]).max())
            if edge > boundary_tol:
                raise ResolutionError(f"boundary amplitude {edge:.2e} at t={t0 + (j + 1) * h:g}")
    out = GridState(grid.x_min, grid.x_max, grid.n_points, v, t1)
    if out.boundary_amplitude() > boundary_tol:
        raise ResolutionError(f"boundary amplitude {out.boundary_amplitude():.2e} at t={t1:g}")
    out.norm_drift = abs(out.norm_squared() - norm0)
    return out


def quadrature_overlap(a, b, x=None):
    """Bilinear integral of a(x) b(x) dx.

    ``a`` is a GridState (periodic trapezoid on its grid) or a GaussianState
    (midpoint rule on [-20, 20] with 10^5 cells unless ``x`` is given).
    """
    if isinstance(a, GridState):
        return complex(np.sum(a.values * b(a.x)) * a.dx)
    if x is None:
        n = 100_000
        edges = np.linspace(-20.0, 20.0, n + 1)
        x = 0.5 * (edges[1:] + edges[:-1])
        w = 40.0 / n
        return complex(np.sum(a(x) * b(x)) * w)
    x = np.asarray(x, dtype=float)
    return complex(np.trapezoid(a(x) * b(x), x))


def grid_survival(state):
    """|<phi_0, v>|^2 / ||v||^2 on the grid."""
    phi0 = GaussianState(math.pi ** -0.25, 1.0)
    return abs(quadrature_overlap(state, phi0)) ** 2 / state.norm_squared()


def default_pde_grid(epsilon, refine=1):
    """(x_max, n_points) for the grid solver.

    x_max = 12 max(1, w0) with w0 = (0.47 sqrt(eps))^(-1/2), a width estimate
    for the spread state at the turning point; dx <= 1/8 (the initial width is
    1), divided by ``refine``.
    """
    x_max = 12.0 * max(1.0, (0.47 * math.sqrt(epsilon)) ** -0.5)
    n = 1 << math.ceil(math.log2(2.0 * x_max * 8.0 * refine))
    return x_max, n


def pde_survival(epsilon, L=0.0, n_points=None, x_max=None, dt=None, max_doublings=3):
    """Ground-state survival at t = (L+1)/eps from the grid solver.

    The domain is doubled (with the point count) until the boundary criterion
    holds.  Returns (survival, final GridState).
    """
    x_def, n_def = default_pde_grid(epsilon)
    x_max = x_def if x_max is None else x_max
    n_points = n_def if n_points is None else n_points
    t0 = -(L + 1.0) / epsilon
    t1 = (L + 1.0) / epsilon
    for _ in range(max_doublings + 1):
        grid = ground_state_grid(x_max, n_points, t0)
        step = dt if dt is not None else 0.1 / max_kinetic_eigenvalue(grid)
        try:
            final = evolve_pde(epsilon, L, grid, t0, t1, step)
        except ResolutionError:
            x_max *= 2.0
            n_points *= 2
            continue
        return grid_survival(final), final
    raise ResolutionError("domain doubling did not contain the wave")
