"""
Bound-state Aharonov-Bohm system on a ring of radius R with enclosed flux phi:
lattice paths, the classical action, the Gaussian integrand of the propagator
and its eps-regularized T-transform.
"""
import cmath
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import torch

from .errors import DimensionError, DomainError
from .gaussian import (BlockOperator, GaussianFunctional, Normalization, eps_path, pin_matrix, sqrt_continued,
                       t_transform_lemma)
from .lattice import DTYPE, GridFunction, TimeGrid, indicator, indicator_mask


@dataclass(frozen=True)
class PhysParams:
    m0: float = 1.0
    R: float = 1.0
    hbar: float = 1.0
    c: float = 1.0
    e: float = 1.0
    phi: float = 0.0
    a: Optional[float] = None
    p0: float = 1.0
    p1: float = 1.0
    t0: float = 0.0
    t: float = 1.0
    a_derived: bool = field(default=False, init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ["m0", "R", "hbar", "c"]:
            if not getattr(self, name) > 0:
                raise DomainError("{} must be > 0, got {}".format(name, getattr(self, name)))

        if self.e == 0:
            raise DomainError("e must be nonzero")

        if not (self.t > self.t0 >= 0):
            raise DomainError("need t > t0 >= 0, got t0={} t={}".format(self.t0, self.t))

        if self.a is None:
            object.__setattr__(self, "a", 0.5 * (self.t - self.t0))
            object.__setattr__(self, "a_derived", True)

        if self.a == 0 or abs(self.a) > self.t:
            raise DomainError("need a != 0 and |a| <= t, got a={}".format(self.a))

    @classmethod
    def from_cfg(cls, cfg):
        return cls(m0=cfg.M0, R=cfg.R, hbar=cfg.HBAR, c=cfg.C, e=cfg.E, phi=cfg.PHI, a=cfg.A,
                   p0=cfg.P0, p1=cfg.P1, t0=cfg.T0, t=cfg.T)

    @property
    def alpha(self):
        return -self.e * self.phi / (2 * math.pi * self.hbar * self.c)

    @property
    def C1(self):
        return 1.0 / (2 * self.m0)

    @property
    def C2(self):
        return -self.alpha / (self.m0 * self.R)

    @property
    def D(self):
        return math.sqrt(self.hbar * self.m0)

    @property
    def E(self):
        return math.sqrt(self.hbar / (self.m0 * self.R ** 2))

    @property
    def delta(self):
        return self.t - self.t0

    @property
    def london_unit(self):
        return 2 * math.pi * self.hbar * self.c / self.e

    def with_alpha(self, alpha):
        """ same system with the flux set so that alpha(phi) = alpha """
        return self.replace(phi=-alpha * self.london_unit)

    def with_time(self, t):
        return self.replace(t=t)

    def replace(self, **kwargs):
        """ dataclasses.replace; a derived offset follows the new window """
        if self.a_derived:
            kwargs.setdefault("a", None)
        return replace(self, **kwargs)


@dataclass(frozen=True)
class PropagatorValue:
    """ delta(delta_arg) * phase, with an optional winding comb attached """

    delta_arg: float
    phase: complex
    comb: Optional[object] = None

    @property
    def conserved(self):
        return self.delta_arg == 0

    def value(self):
        """ the phase on the support of the delta, 0 off it """
        return self.phase if self.conserved else 0j


@dataclass
class PathPair:
    """ lattice realization of (theta(s), p_theta(s)) for one noise sample """

    params: PhysParams
    grid: TimeGrid
    theta_nodes: torch.Tensor
    p_cells: torch.Tensor
    omega_theta: torch.Tensor

    def theta(self, s):
        """ p0/(m0 R)(s - t0 + a) + E <omega_theta, 1_[t0,s)> """
        pp, grid = self.params, self.grid
        grid._check_time(s)
        m = int((grid.midpoints() < s).sum().item())
        noise = pp.E * grid.dt * self.omega_theta[:m].sum().item()
        return pp.p0 / (pp.m0 * pp.R) * (s - grid.t0 + pp.a) + noise

    def ptheta(self, s):
        """ p0 + D <omega_theta, delta_s>, pinned to p0 at t0 """
        self.grid._check_time(s)
        if abs(s - self.grid.t0) <= 1e-12 * max(1.0, abs(self.grid.t)):
            return self.params.p0
        return self.p_cells[self.grid.cell_of(s)].item()

    @property
    def p_nodes(self):
        """ p at the nodes, node k+1 closes cell k """
        start = torch.full((1,), self.params.p0, dtype=torch.float64)
        return torch.cat([start, self.p_cells])

    @property
    def p_end(self):
        return self.p_cells[-1].item()


def _check_window(params, grid, exact=False):
    tol = 1e-12 * max(1.0, abs(grid.t))
    if exact:
        if abs(grid.t0 - params.t0) > tol or abs(grid.t - params.t) > tol:
            raise DomainError("grid [{}, {}] does not match params window [{}, {}]".format(
                grid.t0, grid.t, params.t0, params.t))

    elif params.t0 < grid.t0 - tol or params.t > grid.t + tol:
        raise DomainError("params window [{}, {}] outside grid [{}, {}]".format(
            params.t0, params.t, grid.t0, grid.t))


def build_paths(params, omega):
    grid = omega.grid
    _check_window(params, grid, exact=True)

    w = omega.theta
    n = grid.n_cells
    k = torch.arange(n + 1, dtype=torch.float64)

    # <omega_theta, E 1_[t0, s_k)> at every node
    cum = torch.cat([torch.zeros(1, dtype=torch.float64), torch.cumsum(w, 0)])
    theta_nodes = params.p0 / (params.m0 * params.R) * (k * grid.dt + params.a) + params.E * grid.dt * cum
    p_cells = params.p0 + params.D * w

    return PathPair(params, grid, theta_nodes, p_cells, w)


def action_closed(params, omega):
    """ integrated-by-parts action: boundary polynomial + noise terms """
    paths = build_paths(params, omega)
    dt, delta = omega.grid.dt, params.delta
    p0, pt, a = params.p0, paths.p_end, params.a
    w = omega.theta

    boundary = -p0 / (2 * params.m0) * (
        (pt + 2 * params.alpha / params.R) * delta + (pt - p0) * (delta + 2 * a))

    kinetic = 0.5 * params.hbar * (w ** 2).sum().item() * dt
    linear = math.sqrt(params.hbar / params.m0) * (-params.alpha / params.R - (pt - p0)) * w.sum().item() * dt

    return complex(boundary + kinetic + linear)


def action_direct(params, omega):
    """ -sum_k [R theta(mid_k) (p_k+1 - p_k) + H(p_k+1) dt] """
    grid = omega.grid
    if grid.n_cells < 2:
        raise DomainError("action_direct needs n_cells >= 2")

    paths = build_paths(params, omega)
    P = paths.p_nodes
    dP = P[1:] - P[:-1]

    # theta at cell midpoints: node value + half a cell of drift
    theta_mid = paths.theta_nodes[:-1] + params.p0 * grid.dt / (2 * params.m0 * params.R)
    H = hamiltonian(params, P[1:])

    return complex(-(params.R * theta_mid * dP).sum().item() - H.sum().item() * grid.dt)


def hamiltonian(params, p):
    return params.C1 * p ** 2 - params.C2 * p


def g_constant(params):
    """ C = (-alpha/R - (p1 - p0)) / sqrt(hbar m0) """
    return (-params.alpha / params.R - (params.p1 - params.p0)) / params.D


def eta_t(params, grid):
    return (params.D / params.delta) * indicator(grid, params.t0, params.t, component=0)


def build_integrand(params, grid, normalization=None):
    _check_window(params, grid)

    inside = torch.tensor([[-1 - 1j, -1], [1, -1]], dtype=DTYPE)
    outside = torch.zeros(2, 2, dtype=DTYPE)
    K = BlockOperator.from_window(grid, params.t0, params.t, inside, outside)

    g = g_constant(params) * indicator(grid, params.t0, params.t, component=0)
    pins = [(eta_t(params, grid), params.p1 - params.p0)]

    # N = sqrt(det(Id + K)) unless told otherwise
    if normalization is None:
        normalization = Normalization.eliminate_determinant()
    return GaussianFunctional(K, g, pins, normalization)


def n_eps_inverse(params, grid, eps):
    """ regularized (Id + K)^-1: [[eps, 1], [-1, -i]] on the window, diag(1 + eps, 1) off it """
    if eps < 0:
        raise DomainError("eps must be >= 0, got {}".format(eps))

    _check_window(params, grid)
    inside = torch.tensor([[eps, 1], [-1, -1j]], dtype=DTYPE)
    outside = torch.tensor([[1 + eps, 0], [0, 1]], dtype=DTYPE)
    return BlockOperator.from_window(grid, params.t0, params.t, inside, outside)


def quad_form_feps(params, grid, eps, f):
    """ <f + g, N_eps^-1 (f + g)> as the four-term sum """
    _check_window(params, grid)
    if f.grid != grid or f.d != 2:
        raise DimensionError("f must be a 2-component function on the grid")

    win = indicator_mask(grid, params.t0, params.t)
    off = 1 - win
    f_th, f_p = f.values[0], f.values[1]
    C = g_constant(params)

    total = (eps + 1) * (off * f_th ** 2).sum() \
        + eps * (win * (f_th + C) ** 2).sum() \
        - 1j * (win * f_p ** 2).sum() \
        + (off * f_p ** 2).sum()

    return complex(total.item() * grid.dt)


def classical_phase(params):
    """ exp{-i p0/(2 hbar m0) [(p1 + 2 alpha/R) delta + (p1 - p0)(delta + 2a)]} """
    pp = params
    bracket = (pp.p1 + 2 * pp.alpha / pp.R) * pp.delta + (pp.p1 - pp.p0) * (pp.delta + 2 * pp.a)
    return cmath.exp(-1j * pp.p0 / (2 * pp.hbar * pp.m0) * bracket)


def _window_test_function(params, grid, f):
    """ zero by default; the p-component must vanish on the window """
    if f is None:
        return GridFunction.zeros(grid, 2)

    if f.grid != grid or f.d != 2:
        raise DimensionError("f must be a 2-component function on the grid")

    win = indicator_mask(grid, params.t0, params.t)
    if torch.any(win * f.values[1] != 0):
        raise DomainError("f has a p-component on [t0, t); the closed form only covers f_p = 0 there, "
                          "use t_transform_oracle")
    return f


def t_transform_eps(params, grid, eps, f=None, normalization=None):
    """ TI_eps(f) through the lemma with the regularized inverse N_eps^-1

    Inside the window the antisymmetric part of N_eps^-1 couples to f_p,
    which the Gaussian integral does not see; such f are rejected.
    """
    if not eps > 0:
        raise DomainError("eps must be > 0, got {}".format(eps))

    f = _window_test_function(params, grid, f)
    phi = build_integrand(params, grid, normalization)
    Ninv = n_eps_inverse(params, grid, eps)
    return classical_phase(params) * t_transform_lemma(phi, f, Ninv=Ninv)


def t_transform_eps_path(params, grid, target, steps=64, f=None):
    """ TI_eps(f) on eps_path(target, steps) with det(M)^(1/2) continued from eps = 1 """
    f = _window_test_function(params, grid, f)
    path = eps_path(target, steps)
    phi = build_integrand(params, grid)
    Ninvs = [n_eps_inverse(params, grid, float(eps)) for eps in path]

    dets = [complex(torch.linalg.det(pin_matrix(phi, f, Ninv).M).item()) for Ninv in Ninvs]
    roots = sqrt_continued(dets)

    phase = classical_phase(params)
    values = [phase * t_transform_lemma(phi, f, Ninv=Ninv, sqrt_det_M=r) for Ninv, r in zip(Ninvs, roots)]
    return path, np.array(values)


def t_transform_eps_display(params, eps):
    """ the printed f = 0 closed form of the regularized T-transform """
    if not eps > 0:
        raise DomainError("eps must be > 0, got {}".format(eps))

    pp = params
    dp = pp.p1 - pp.p0
    scale = eps * pp.hbar * pp.m0
    bracket = -dp ** 2 + 2j * eps * dp * (-pp.alpha / pp.R - dp)

    return math.sqrt(pp.delta / (2 * math.pi * scale)) * classical_phase(pp) \
        * cmath.exp(pp.delta / (2 * scale) * bracket)


def propagator_limit(params):
    """ eps -> 0: delta(p1 - p0) exp[-i p0 (p1 + 2 alpha/R) delta / (2 hbar m0)] """
    pp = params
    phase = cmath.exp(-1j * pp.p0 * (pp.p1 + 2 * pp.alpha / pp.R) * pp.delta / (2 * pp.hbar * pp.m0))
    return PropagatorValue(pp.p1 - pp.p0, phase)


def nascent_delta_width(params, eps):
    return math.sqrt(eps * params.hbar * params.m0 / params.delta)


def nascent_delta_integral(params, eps, n_points=401, grid=None, width=8.0):
    """ int dp1 of the eps-regularized T-transform at f = 0 over p0 +- width widths """
    if n_points < 2:
        raise DomainError("n_points must be >= 2")

    if grid is None:
        grid = TimeGrid(params.t0, params.t, 8)

    s = nascent_delta_width(params, eps)
    p1 = torch.linspace(params.p0 - width * s, params.p0 + width * s, n_points, dtype=torch.float64)
    values = torch.tensor([t_transform_eps(params.replace(p1=x), grid, eps) for x in p1.tolist()], dtype=DTYPE)

    return complex(torch.trapezoid(values, dx=(p1[1] - p1[0]).item()).item())
