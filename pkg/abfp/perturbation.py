"""
Potentials V(x) = int exp(beta x) dm(beta) over finite complex atomic measures,
the perturbation series of the ring propagator in V and its truncation bounds,
and the reduction of the AB potential to this class.
"""
import cmath
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .ab_model import PropagatorValue
from .errors import DegenerateError, DimensionError, DomainError, MeasureFormatError, PotentialRangeError
from .lattice import GridFunction, indicator, inner_product

EXP_LIMIT = 700.0


@dataclass(frozen=True)
class AtomicMeasure:
    """ m = sum_j weight_j delta_{beta_j} """

    atoms: Tuple[Tuple[float, complex], ...] = ()
    name: Optional[str] = None

    def __post_init__(self):
        atoms = tuple((float(b), complex(w)) for b, w in self.atoms)
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def point(cls, beta, weight=1.0, name=None):
        return cls(((beta, weight),), name)

    def __len__(self):
        return len(self.atoms)

    @property
    def betas(self):
        return np.array([b for b, _ in self.atoms], dtype=np.float64)

    @property
    def weights(self):
        return np.array([w for _, w in self.atoms], dtype=np.complex128)

    def moment(self, C):
        """ sum_j |w_j| exp(C |beta_j|) """
        if not C >= 0:
            raise DomainError("C must be >= 0, got {}".format(C))

        value = float(np.sum(np.abs(self.weights) * np.exp(C * np.abs(self.betas))))
        assert math.isfinite(value), "moment overflow"
        return value

    def total_variation(self):
        return self.moment(0.0)

    def to_records(self):
        return [{"beta": b, "weight_re": w.real, "weight_im": w.imag} for b, w in self.atoms]

    @classmethod
    def from_records(cls, records, name=None):
        return cls(tuple((r["beta"], complex(r["weight_re"], r["weight_im"])) for r in records), name)

    @classmethod
    def load(cls, path):
        """ one atom per line: beta weight_re weight_im, '#' starts a comment """
        atoms = []
        with open(path, "r") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue

                fields = line.split()
                if len(fields) != 3:
                    raise MeasureFormatError(path, lineno, "expected 'beta weight_re weight_im', got {!r}".format(line))

                try:
                    beta, w_re, w_im = (float(x) for x in fields)
                except ValueError:
                    raise MeasureFormatError(path, lineno, "non-numeric field in {!r}".format(line))

                if not all(math.isfinite(x) for x in (beta, w_re, w_im)):
                    raise MeasureFormatError(path, lineno, "non-finite value in {!r}".format(line))

                atoms.append((beta, complex(w_re, w_im)))

        return cls(tuple(atoms), name=str(path))

    def save(self, path):
        with open(path, "w", newline="\n") as f:
            f.write("# beta weight_re weight_im\n")
            for b, w in self.atoms:
                f.write("{:.16e} {:.16e} {:.16e}\n".format(b, w.real, w.imag))


@dataclass(frozen=True)
class ABReduction:
    k: int
    n: int
    coupling: float
    b: float
    B: float

    @property
    def alpha_frac(self):
        return self.k / self.n

    @property
    def detectable(self):
        return self.k % self.n != 0


@dataclass(frozen=True)
class TruncationReport:
    x_abs: float
    N: int
    remainder_bound: float


def potential_eval(m, x):
    """ V(x) = sum_j w_j exp(beta_j x) """
    for j, (beta, _) in enumerate(m.atoms):
        if abs(beta * x) > EXP_LIMIT:
            raise PotentialRangeError("atom {} (beta={}) overflows at x={}".format(j, beta, x))

    if len(m) == 0:
        return 0j

    return complex(np.sum(m.weights * np.exp(m.betas * x)))


def _window_integral(params, phi):
    """ int_[t0, t) phi_p ds """
    return inner_product(phi, indicator(phi.grid, params.t0, params.t, component=1))


def g_n_eval(params, phi, s_list, beta_list):
    """ exp(p1/(m0 R) sum beta_j) exp(E/(t - t0) int phi_p ds sum beta_j (t - s_j)) """
    if len(s_list) != len(beta_list):
        raise DimensionError("s_list and beta_list differ in length: {} vs {}".format(
            len(s_list), len(beta_list)))

    if len(beta_list) == 0:
        return 1 + 0j

    pp = params
    for s in s_list:
        if not pp.t0 <= s <= pp.t:
            raise DomainError("s={} outside [{}, {}]".format(s, pp.t0, pp.t))

    betas = np.asarray(beta_list, dtype=np.float64)
    lever = np.sum(betas * (pp.t - np.asarray(s_list, dtype=np.float64)))

    first = pp.p1 / (pp.m0 * pp.R) * betas.sum()
    second = pp.E / pp.delta * _window_integral(pp, phi) * lever
    return cmath.exp(first + second)


def bound_constant(params, phi):
    """ C = |p1|/(m0 R) + E sqrt(t - t0) |phi_p on [t0, t)|_0 """
    pp = params
    window = phi.restrict(pp.t0, pp.t)
    phi_p = GridFunction(phi.grid, window.values[1:])
    return abs(pp.p1) / (pp.m0 * pp.R) + pp.E * math.sqrt(pp.delta) * phi_p.norm()


def g_n_bound(params, phi, beta_list):
    if len(beta_list) == 0:
        return 1.0

    C = bound_constant(params, phi)
    return math.exp(C * float(np.sum(np.abs(beta_list))))


def _series_x(params, m):
    pp = params
    V = potential_eval(m, pp.p1 / (pp.m0 * pp.R))
    return -1j / pp.hbar * pp.delta * V


def _energy_phase(params, V):
    """ exp{-i/hbar (t - t0) [p0^2/(2 m0) + V]} """
    pp = params
    return cmath.exp(-1j * pp.delta * (pp.p0 ** 2 / (2 * pp.m0) + V) / pp.hbar)


def _free_phase(params):
    return _energy_phase(params, 0.0)


def series_terms(params, m, N):
    """ x^n / n! for n = 0..N """
    if N < 0:
        raise DomainError("N must be >= 0, got {}".format(N))

    x = _series_x(params, m)
    terms, term = [], 1 + 0j
    for n in range(N + 1):
        if n > 0:
            term = term * x / n
        terms.append(term)
    return terms


def series_propagator(params, m, N):
    """ free phase times the order-N partial sum of exp(x); returns (value, report) """
    x = _series_x(params, m)
    partial = sum(series_terms(params, m, N))

    r = abs(x)
    bound = r ** (N + 1) / math.factorial(N + 1) * math.exp(r)

    value = PropagatorValue(params.p1 - params.p0, _free_phase(params) * partial)
    return value, TruncationReport(r, N, bound)


def closed_form_propagator(params, m):
    pp = params
    V = potential_eval(m, pp.p1 / (pp.m0 * pp.R))
    return PropagatorValue(pp.p1 - pp.p0, _energy_phase(pp, V))


def series_global_bound(params, m, C):
    """ exp((t - t0) moment(C)/hbar) """
    return math.exp(params.delta * m.moment(C) / params.hbar)


def make_ab_reduction(params, k, n):
    """ g = 1, B = k hbar p1/(n c m0 R), b = 1 + 1/B """
    if int(k) != k or int(n) != n or k == 0 or n == 0:
        raise DomainError("k and n must be nonzero integers, got k={} n={}".format(k, n))

    pp = params
    if pp.p1 == 0:
        raise DegenerateError("B is undefined for p1 = 0")

    B = k * pp.hbar * pp.p1 / (n * pp.c * pp.m0 * pp.R)
    return ABReduction(int(k), int(n), 1.0, 1 + 1 / B, B)


def ab_measure(red, sign=1):
    """ g delta_{sign b k/n}; sign=+1 is the exponential form, -1 the alternating series """
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1, got {}".format(sign))
    return AtomicMeasure.point(sign * red.b * red.k / red.n, red.coupling, name="ab")


def theorem_measure(red, params):
    """ g delta_beta with beta = b k hbar/(n c) """
    beta = red.b * red.k * params.hbar / (red.n * params.c)
    return AtomicMeasure.point(beta, red.coupling, name="ab-theorem")


def first_order_potential(red, theta_dot):
    """ g - (g b k/n) theta_dot """
    g = red.coupling
    return g - g * red.b * red.k / red.n * theta_dot


def first_order_series(red, theta_dot, J):
    """ g sum_{j <= J} (-1)^j/j! (b k/n theta_dot)^j """
    y = red.b * red.k / red.n * theta_dot
    acc, term = 0.0, 1.0
    for j in range(J + 1):
        if j > 0:
            term *= -y / j
        acc += term
    return red.coupling * acc


def ab_matching_split(red, params):
    """ split V(theta_dot1) = linear theta_dot1 + constant at theta_dot1 = p1/(m0 R), linear = -g k/n

    With b = 1 + 1/B the constant comes out as g - g c/hbar.
    """
    theta_dot = params.p1 / (params.m0 * params.R)
    linear = -red.coupling * red.k / red.n
    constant = first_order_potential(red, theta_dot) - linear * theta_dot
    return linear, constant


def approx_propagator(red, params):
    """ first-order potential in the free phase: exp{-i/hbar (t-t0)[g + p0^2/(2 m0) - g b k/n p1/(m0 R)]} """
    pp = params
    V = first_order_potential(red, pp.p1 / (pp.m0 * pp.R))
    return PropagatorValue(pp.p1 - pp.p0, _energy_phase(pp, V))
