"""
Momentum-space Schroedinger checks for the closed-form propagators. All checks
work on the phase factor with the conservation delta matched on both sides.
"""
import cmath
import math
from dataclasses import dataclass
from typing import Optional

import torch

from .errors import DomainError, PreconditionError
from .perturbation import closed_form_propagator, potential_eval
from .propagators import free_circle_propagator, propagator_no_winding

KINDS = ("ab_bound_state", "circle", "exponential_class")

FD_STENCIL = (0.2, 0.4, 0.6, 0.8, 1.0)

ENERGY_STEP = 1e-6


@dataclass(frozen=True)
class EnergySpec:
    kind: str
    params: object
    measure: Optional[object] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError("unknown propagator kind {!r}".format(self.kind))
        if self.kind == "exponential_class" and self.measure is None:
            raise DomainError("exponential_class needs a measure")

    def potential(self, p_at):
        """ V at theta_dot = p_at/(m0 R) """
        pp = self.params
        if self.kind == "ab_bound_state":
            return complex(pp.alpha * p_at / (pp.m0 * pp.R))

        if self.kind == "circle":
            return 0j

        return potential_eval(self.measure, p_at / (pp.m0 * pp.R))

    def phase(self, t):
        """ phase of the closed-form propagator of this kind over [t0, t] """
        # none of these phases depends on the offset a
        pp = self.params.replace(t=t, a=None)
        if self.kind == "ab_bound_state":
            return propagator_no_winding(pp).phase

        if self.kind == "circle":
            return free_circle_propagator(pp).phase

        return closed_form_propagator(pp, self.measure).phase

    def energy(self):
        """ i hbar d/dt log K, read off the propagator over a step of at most one radian """
        pp = self.params
        h = ENERGY_STEP * pp.delta
        rate = abs(cmath.log(self.phase(pp.t0 + h))) / h
        tau = pp.delta if rate * pp.delta <= 1 else 1.0 / rate
        return 1j * pp.hbar * cmath.log(self.phase(pp.t0 + tau)) / tau


def w_kernel(spec, dp, p_at):
    """ (1/2 pi) int_0^2pi exp(-i dp theta/hbar) dtheta * V(p_at/(m0 R)) """
    V = spec.potential(p_at)
    if dp == 0:
        return V

    z = -2j * math.pi * dp / spec.params.hbar
    return (cmath.exp(z) - 1) / z * V


def winding_residual_term(params, l):
    """ (i l/(m0 R) + i p0/(2 m0 hbar))(p0 - p1) """
    pp = params
    return (1j * l / (pp.m0 * pp.R) + 1j * pp.p0 / (2 * pp.m0 * pp.hbar)) * (pp.p0 - pp.p1)


def _require_conservation(params, l=0):
    if params.p1 != params.p0:
        leftover = winding_residual_term(params, l)
        raise PreconditionError("conservation p1 = p0 not imposed (p0={}, p1={})".format(
            params.p0, params.p1), diagnostic=leftover)


def residual_analytic(spec, l=0):
    """ |E(p0) - p0^2/(2 m0) - W(0)| under p1 = p0 """
    pp = spec.params
    _require_conservation(pp, l)
    return abs(spec.energy() - pp.p0 ** 2 / (2 * pp.m0) - w_kernel(spec, 0, pp.p0))


def residual_fd(spec, dt_fd):
    """ max over the t-stencil of |i hbar dK/dt - (p0^2/(2 m0) + W(0)) K|, central differences """
    if not dt_fd > 0:
        raise DomainError("dt_fd must be > 0, got {}".format(dt_fd))

    pp = spec.params
    _require_conservation(pp)
    coef = pp.p0 ** 2 / (2 * pp.m0) + w_kernel(spec, 0, pp.p0)

    worst = 0.0
    for frac in FD_STENCIL:
        tau = pp.t0 + frac * pp.delta
        deriv = (spec.phase(tau + dt_fd) - spec.phase(tau - dt_fd)) / (2 * dt_fd)
        worst = max(worst, abs(1j * pp.hbar * deriv - coef * spec.phase(tau)))

    return worst


def winding_residual(params, l):
    """ residual of the winding propagator under conservation, plus its leftover term """
    _require_conservation(params, l)
    spec = EnergySpec("ab_bound_state", params)
    return residual_analytic(spec, l) + abs(winding_residual_term(params, l))


def sifting_quadrature(spec, sigma_p, n_points=801, width=8.0):
    """ int dp1 W(p0 - p1) delta_sigma(p1 - p0) by trapezoid, against the sifted W(0) """
    if not sigma_p > 0:
        raise DomainError("sigma_p must be > 0, got {}".format(sigma_p))

    p0 = spec.params.p0
    p1 = torch.linspace(p0 - width * sigma_p, p0 + width * sigma_p, n_points, dtype=torch.float64)
    bump = torch.exp(-(p1 - p0) ** 2 / (2 * sigma_p ** 2)) / (sigma_p * math.sqrt(2 * math.pi))
    W = torch.tensor([w_kernel(spec, p0 - x, x) for x in p1.tolist()], dtype=torch.complex128)

    return complex(torch.trapezoid(W * bump, dx=(p1[1] - p1[0]).item()).item())
