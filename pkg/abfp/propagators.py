"""
Closed-form propagators of the ring (with and without winding) and the
Gaussian-regularized Poisson summation used to trade the winding delta comb
for its Fourier series.
"""
import cmath
import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from .ab_model import PropagatorValue, classical_phase, propagator_limit, t_transform_eps
from .errors import DegenerateError, DomainError
from .gaussian import Normalization


@nb.njit(cache=True)
def _gaussian_comb(xs, T, sigma, L):
    out = np.zeros(xs.size)
    norm = 1.0 / (sigma * np.sqrt(2 * np.pi))
    for i in range(xs.size):
        acc = 0.0
        for l in range(-L, L + 1):
            d = xs[i] - l * T
            acc += np.exp(-d * d / (2 * sigma * sigma))
        out[i] = norm * acc
    return out


@nb.njit(cache=True)
def _fourier_comb(xs, T, sigma, K):
    out = np.zeros(xs.size)
    for i in range(xs.size):
        acc = 1.0
        for k in range(1, K + 1):
            damp = np.exp(-2 * np.pi ** 2 * k * k * sigma * sigma / (T * T))
            acc += 2 * np.cos(2 * np.pi * k * xs[i] / T) * damp
        out[i] = acc / T
    return out


@nb.njit(cache=True)
def _dirichlet_sum(x, L):
    # sum_{|l| <= L} exp(i l x), real by l <-> -l symmetry
    acc = 1.0
    for l in range(1, L + 1):
        acc += 2 * np.cos(l * x)
    return acc


@dataclass(frozen=True)
class WindingComb:
    """ sum_l exp(i l x), x = (t - t0)(p0 - p1)/(m0 R), carried symbolically """

    argument: float
    l0: int = 0
    L_max: int = 0

    def partial_sum(self, L=None):
        L = self.L_max if L is None else L
        if L < 0:
            raise DomainError("L must be >= 0, got {}".format(L))
        return float(_dirichlet_sum(float(self.argument), int(L)))

    def dirichlet(self, L=None):
        """ sin((L + 1/2) x) / sin(x / 2) """
        L = self.L_max if L is None else L
        x = self.argument
        s = math.sin(0.5 * x)
        if abs(s) < 1e-12:
            return float(2 * L + 1)
        return math.sin((L + 0.5) * x) / s


def _as_array(x):
    return np.atleast_1d(np.asarray(x, dtype=np.float64))


def _check_comb(T, sigma):
    if not T > 0:
        raise DomainError("period T must be > 0, got {}".format(T))
    if not sigma > 0:
        raise DomainError("sigma must be > 0, got {}".format(sigma))


def propagator_no_winding(params):
    return propagator_limit(params)


def propagator_winding(params, L_max):
    if L_max < 0:
        raise DomainError("L_max must be >= 0, got {}".format(L_max))

    x = params.delta * (params.p0 - params.p1) / (params.m0 * params.R)
    return PropagatorValue(params.p1 - params.p0, classical_phase(params), WindingComb(x, 0, int(L_max)))


def free_circle_propagator(params):
    phase = cmath.exp(-1j * params.p0 ** 2 * params.delta / (2 * params.m0 * params.hbar))
    return PropagatorValue(params.p1 - params.p0, phase)


def main_theorem_exponent(params):
    """ p0 (p0 - e phi/(pi hbar c R)) (t - t0) / (2 m0 hbar), flux form of the exponent """
    pp = params
    shift = pp.e * pp.phi / (math.pi * pp.hbar * pp.c * pp.R)
    return pp.p0 * (pp.p0 - shift) * pp.delta / (2 * pp.m0 * pp.hbar)


def winding_normalization(params):
    """ (t - t0)/(2 pi m0 R), the Fourier prefactor of the winding comb """
    return params.delta / (2 * math.pi * params.m0 * params.R)


def comb_spacing(params):
    """ 2 pi m0 R/(t - t0), the momentum spacing of the winding deltas """
    return 2 * math.pi * params.m0 * params.R / params.delta


def winding_term_eps(params, grid, eps, l):
    """ TI_eps(0) of the l-th winding sector: pin at p1 - l 2 pi m0 R/(t - t0), Fourier prefactor divided out """
    shifted = params.replace(p1=params.p1 - l * comb_spacing(params))
    norm = Normalization.eliminate_determinant_and(winding_normalization(params))
    return t_transform_eps(shifted, grid, eps, normalization=norm)


def t_transform_winding_eps(params, grid, eps, L_max):
    """ sum of the winding sectors |l| <= L_max """
    if L_max < 0:
        raise DomainError("L_max must be >= 0, got {}".format(L_max))
    return sum(winding_term_eps(params, grid, eps, l) for l in range(-L_max, L_max + 1))


def poisson_comb_lhs(x, T, sigma, L_max):
    """ sum_{|l| <= L_max} G_sigma(x - l T) """
    _check_comb(T, sigma)
    out = _gaussian_comb(_as_array(x), float(T), float(sigma), int(L_max))
    return out if np.ndim(x) > 0 else float(out[0])


def poisson_comb_rhs(x, T, sigma, K_max):
    """ (1/T) sum_{|k| <= K_max} exp(2 pi i k x/T) exp(-2 pi^2 k^2 sigma^2/T^2) """
    _check_comb(T, sigma)
    out = _fourier_comb(_as_array(x), float(T), float(sigma), int(K_max))
    return out if np.ndim(x) > 0 else float(out[0])


def comb_truncation(T, sigma, tol=1e-12):
    """ (L_max, K_max) for |x| <= T such that either side's tail is below tol """
    _check_comb(T, sigma)
    r = math.sqrt(math.log(1.0 / tol))

    # omitted bumps sit >= L_max T away from x
    L_max = int(math.ceil(1 + math.sqrt(2) * r * sigma / T)) + 1
    K_max = int(math.ceil(T * r / (math.sqrt(2) * math.pi * sigma)))
    return L_max, max(K_max, 1)


def alpha_period(params):
    """ shift of alpha that turns the alpha-part of the phase by 2 pi """
    if params.p0 == 0 or params.delta <= 0:
        raise DegenerateError("flux period undefined for p0 = 0 or t = t0")
    return 2 * math.pi * params.hbar * params.m0 * params.R / (abs(params.p0) * params.delta)


def ab_period_check(params):
    """ flux period of the alpha-part of the phase, alpha period times the London unit """
    return alpha_period(params) * abs(params.london_unit)


def alpha_phase(params):
    """ exp(-i p0 alpha (t - t0)/(hbar m0 R)) """
    pp = params
    return cmath.exp(-1j * pp.p0 * pp.alpha * pp.delta / (pp.hbar * pp.m0 * pp.R))
