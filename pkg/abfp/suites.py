"""
Verification suites run by `abfp verify`. Each suite draws its own seeded
random instances and returns a SuiteResult with the worst error it saw.
"""
import math
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
import torch

from . import ab_model, perturbation, propagators, schrodinger
from .errors import ConfigError
from .ab_model import PhysParams
from .gaussian import BlockOperator, GaussianFunctional, Normalization, pin_matrix, t_transform_lemma, t_transform_oracle
from .lattice import GridFunction, TimeGrid, indicator, sample_noise
from .utils import Timer


@dataclass
class SuiteResult:
    name: str
    passed: bool
    worst: float
    detail: str = ""
    elapsed: float = 0.0


def random_params(rng, conserved=False, **kwargs):
    """ draw PhysParams with p0 in [-5, 5] minus 0, alpha in [-2, 2], t - t0 in (0, 5] """
    p0 = rng.uniform(0.2, 5.0) * rng.choice([-1.0, 1.0])
    fields = dict(
        m0=rng.uniform(0.5, 2.0), R=rng.uniform(0.5, 2.0), hbar=rng.uniform(0.5, 2.0),
        p0=p0, p1=rng.uniform(-5.0, 5.0), t0=0.0, t=rng.uniform(0.1, 5.0))
    fields.update(kwargs)
    if conserved:
        fields["p1"] = fields["p0"]

    params = PhysParams(**fields)
    return params.with_alpha(rng.uniform(-2.0, 2.0))


def random_measure(rng, max_atoms=5, beta_max=1.0, weight_max=1.0, complex_weights=True):
    n = rng.integers(1, max_atoms + 1)
    atoms = []
    for _ in range(n):
        w = rng.uniform(-weight_max, weight_max)
        if complex_weights:
            w = complex(w, rng.uniform(-weight_max, weight_max))
        atoms.append((rng.uniform(-beta_max, beta_max), w))
    return perturbation.AtomicMeasure(tuple(atoms))


def random_functional(rng, n_cells, J):
    """ symmetric complex cell blocks with |K| <= 0.5, random real g, eta, y """
    grid = TimeGrid(0.0, rng.uniform(0.5, 2.0), n_cells)

    blocks = rng.uniform(-0.15, 0.15, (n_cells, 2, 2)) + 1j * rng.uniform(-0.15, 0.15, (n_cells, 2, 2))
    blocks = 0.5 * (blocks + blocks.transpose(0, 2, 1))
    K = BlockOperator(grid, torch.from_numpy(blocks))

    g = GridFunction(grid, torch.from_numpy(rng.uniform(-1, 1, (2, n_cells))))
    pins = []
    for _ in range(J):
        eta = rng.uniform(-0.5, 0.5, (2, n_cells))
        eta[0] += rng.uniform(0.5, 1.5)
        pins.append((GridFunction(grid, torch.from_numpy(eta)), rng.uniform(-1, 1)))

    return GaussianFunctional(K, g, pins, Normalization.explicit_constant())


def suite_oracle(cfg, rng):
    sigma = min(cfg.SIGMA_LIST)
    worst = 0.0
    for i in range(50):
        n_cells = int(rng.integers(2, 17))
        phi = random_functional(rng, n_cells, J=i % 3)
        f = GridFunction(phi.grid, torch.from_numpy(rng.uniform(-1, 1, (2, n_cells))))

        lemma = t_transform_lemma(phi, f)
        oracle = t_transform_oracle(phi, f, sigma)
        worst = max(worst, abs(lemma - oracle) / abs(lemma))

    tol = max(1e-4, 100 * sigma ** 2)
    ab_worst = ab_oracle_error(PhysParams(), 32, min(sigma, 1e-3))
    return worst <= tol and ab_worst <= 1e-3, max(worst, ab_worst), \
        "50 instances, sigma={:g}; AB window {:.1e}".format(sigma, ab_worst)


def ab_oracle_error(params, n_cells, sigma, eps_list=(1e-1, 1e-2)):
    """ worst relative gap between t_transform_eps and the dense oracle at f = 0 and f = f_theta """
    grid = TimeGrid(params.t0, params.t, n_cells)
    phi = ab_model.build_integrand(params, grid)
    phase = ab_model.classical_phase(params)

    worst = 0.0
    for f in (GridFunction.zeros(grid), 0.3 * indicator(grid, params.t0, params.t, component=0)):
        for eps in eps_list:
            lemma = ab_model.t_transform_eps(params, grid, eps, f)
            oracle = phase * t_transform_oracle(phi, f, sigma, Ninv=ab_model.n_eps_inverse(params, grid, eps))
            worst = max(worst, abs(lemma - oracle) / abs(lemma))
    return worst


def suite_pin_matrix(cfg, rng):
    worst = 0.0
    for _ in range(20):
        params = random_params(rng)
        grid = TimeGrid(params.t0, params.t, cfg.N_CELLS)
        eps = float(rng.choice(cfg.EPS_LIST))

        phi = ab_model.build_integrand(params, grid)
        f = GridFunction.zeros(grid)
        M = pin_matrix(phi, f, ab_model.n_eps_inverse(params, grid, eps)).M[0, 0].item()

        expected = eps * params.hbar * params.m0 / params.delta
        worst = max(worst, abs(M - expected) / expected)

    return worst <= 1e-14, worst, "20 draws"


def suite_action(cfg, rng):
    """ first-order lattice integration by parts: defect halves per refinement """
    worst = 0.0
    base = TimeGrid(0.0, 1.0, 64)
    seeds = rng.integers(0, 2 ** 31, 100)
    for seed in seeds:
        params = random_params(np.random.default_rng(seed), t=1.0)
        coarse = sample_noise(base, int(seed))

        defects = []
        for factor in (1, 2, 4):
            omega = coarse.refine(factor)
            defects.append(abs(ab_model.action_direct(params, omega) - ab_model.action_closed(params, omega)))

        for d1, d2 in zip(defects[:-1], defects[1:]):
            worst = max(worst, abs(d1 / d2 - 2.0))

    return worst <= 0.3, worst, "100 samples, n_cells 64/128/256"


def suite_nascent_delta(cfg, rng):
    params = PhysParams.from_cfg(cfg)
    params = params.replace(p1=params.p0)
    target = ab_model.propagator_limit(params).phase

    worst, ok = 0.0, True
    for eps in cfg.EPS_LIST:
        value = ab_model.nascent_delta_integral(params, eps)
        err = abs(value - target) / abs(target)
        worst = max(worst, err / eps)
        ok = ok and err <= 10 * eps

    # |TI_eps| ~ eps^(-1/2) on p1 = p0: no sign jumps along eps 1 -> 1e-4
    _, values = ab_model.t_transform_eps_path(params, TimeGrid(params.t0, params.t, 16), 1e-4)
    jump = float(np.max(np.abs(values[1:] / values[:-1] - 1)))
    ok = ok and jump <= 0.1

    return ok, worst, "relative error / eps over EPS_LIST, eps-path step {:.3f}".format(jump)


def suite_propagator(cfg, rng):
    unit = PhysParams(p0=1.0, p1=1.0)
    err = abs(ab_model.propagator_limit(unit).phase - complex(math.cos(0.5), -math.sin(0.5)))

    for _ in range(20):
        params = random_params(rng, conserved=True)
        free = params.replace(phi=0.0)
        err = max(err, abs(propagators.propagator_no_winding(free).phase - propagators.free_circle_propagator(free).phase))

        exponent = params.p0 * (params.p1 + 2 * params.alpha / params.R) * params.delta / (2 * params.m0 * params.hbar)
        err = max(err, abs(exponent - propagators.main_theorem_exponent(params)) / max(1.0, abs(exponent)))
        err = max(err, abs(abs(ab_model.propagator_limit(params).phase) - 1.0))

    return err <= 1e-12, err, "e^(-i/2), alpha = 0, flux form"


def suite_poisson(cfg, rng):
    T, sigma = 1.0, 0.1
    xs = np.linspace(-T, T, 1000)
    worst = np.max(np.abs(propagators.poisson_comb_lhs(xs, T, sigma, 12) - propagators.poisson_comb_rhs(xs, T, sigma, 12)))
    peak = abs(propagators.poisson_comb_lhs(0.0, T, sigma, 12) - 1 / (sigma * math.sqrt(2 * math.pi)))

    for ratio in (0.05, 0.1, 0.25, 0.5):
        L, K = propagators.comb_truncation(T, ratio * T)
        diff = propagators.poisson_comb_lhs(xs, T, ratio * T, L) - propagators.poisson_comb_rhs(xs, T, ratio * T, K)
        worst = max(worst, np.max(np.abs(diff)))

    return worst <= 1e-6 and peak <= 1e-4, float(worst), "1000-point grid, sigma/T in [0.05, 0.5]"


def suite_winding(cfg, rng):
    worst = 0.0
    for _ in range(50):
        params = random_params(rng, conserved=True)
        winding = propagators.propagator_winding(params, cfg.L_MAX)
        worst = max(worst, abs(winding.phase - propagators.propagator_no_winding(params).phase))
        worst = max(worst, abs(winding.comb.partial_sum() - (2 * cfg.L_MAX + 1)))
        worst = max(worst, abs(schrodinger.winding_residual_term(params, int(rng.integers(-5, 6)))))

    ok = worst <= 1e-12
    for _ in range(50):
        params = random_params(rng)
        if params.p1 != params.p0:
            ok = ok and schrodinger.winding_residual_term(params, 0) != 0

        x = float(rng.uniform(0.01, 2 * math.pi - 0.01))
        comb = propagators.WindingComb(x, 0, cfg.L_MAX)
        worst = max(worst, abs(comb.partial_sum() - comb.dirichlet()))

    # the regularized winding sum repeats with the comb spacing in p1
    L = max(cfg.L_MAX, 4)
    for _ in range(10):
        params = random_params(rng, conserved=True, t=rng.uniform(0.1, 2.0))
        grid = TimeGrid(params.t0, params.t, 8)
        base = propagators.t_transform_winding_eps(params, grid, 0.1, L)
        moved = params.replace(p1=params.p1 + propagators.comb_spacing(params))
        shifted = propagators.t_transform_winding_eps(moved, grid, 0.1, L)
        worst = max(worst, abs(shifted - base) / abs(base))

    return ok and worst <= 1e-10, worst, "50 conserved draws, Dirichlet kernels, comb periodicity"


def suite_schrodinger(cfg, rng):
    worst = 0.0
    for _ in range(100):
        params = random_params(rng, conserved=True)
        specs = [
            schrodinger.EnergySpec("ab_bound_state", params),
            schrodinger.EnergySpec("circle", params),
            schrodinger.EnergySpec("exponential_class", params, random_measure(rng, beta_max=0.2)),
        ]
        for spec in specs:
            worst = max(worst, schrodinger.residual_analytic(spec))

    # AB through the mimicking measure, V kept O(100)
    for _ in range(20):
        params = random_params(rng, conserved=True, m0=1.0, R=1.0, hbar=1.0, p0=rng.uniform(0.8, 1.2))
        red = perturbation.make_ab_reduction(params, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        spec = schrodinger.EnergySpec("exponential_class", params, perturbation.theorem_measure(red, params))
        worst = max(worst, schrodinger.residual_analytic(spec))

    orders = []
    hs = [1e-2 * 2.0 ** -k for k in range(7)]
    for spec in [schrodinger.EnergySpec("circle", PhysParams(p0=2.0, p1=2.0)),
                 schrodinger.EnergySpec("ab_bound_state", PhysParams(p0=2.0, p1=2.0).with_alpha(0.5))]:
        res = [schrodinger.residual_fd(spec, h) for h in hs]
        orders += [math.log2(r1 / r2) for r1, r2 in zip(res[:-1], res[1:])]
    order_ok = all(abs(o - 2.0) <= 0.2 for o in orders)

    return worst <= 1e-12 and order_ok, worst, "fd orders " + " ".join("{:.3f}".format(o) for o in orders)


def suite_series(cfg, rng):
    unit = PhysParams(p0=1.0, p1=1.0)
    free = propagators.free_circle_propagator(unit).phase
    value, report = perturbation.series_propagator(unit, perturbation.AtomicMeasure.point(0.0, 1.0), 3)
    exact = free * complex(math.cos(1.0), -math.sin(1.0))
    ok = abs(abs(value.phase - exact) - 0.0411) <= 1e-3 and abs(value.phase - exact) <= report.remainder_bound

    worst = 0.0
    for _ in range(100):
        params = random_params(rng, conserved=True, p0=rng.uniform(0.2, 1.0), t=rng.uniform(0.1, 2.0), hbar=1.0)
        m = random_measure(rng, beta_max=0.5, weight_max=0.3)
        closed = perturbation.closed_form_propagator(params, m).phase
        value, report = perturbation.series_propagator(params, m, cfg.N_MAX)
        if report.x_abs <= 3:
            worst = max(worst, abs(value.phase - closed))

        for N in range(0, 26):
            value, report = perturbation.series_propagator(params, m, N)
            ok = ok and abs(value.phase - closed) <= report.remainder_bound + 1e-12

    violations = 0
    for _ in range(1000):
        params = random_params(rng, m0=1.0, R=1.0)
        grid = TimeGrid(params.t0, params.t, 16)
        phi = GridFunction(grid, torch.from_numpy(rng.normal(size=(2, 16))))
        n = int(rng.integers(0, 5))
        s_list = rng.uniform(params.t0, params.t, n).tolist()
        betas = rng.uniform(-3, 3, n).tolist()
        if abs(perturbation.g_n_eval(params, phi, s_list, betas)) > perturbation.g_n_bound(params, phi, betas) * (1 + 1e-12):
            violations += 1

        m = random_measure(rng, beta_max=0.5, weight_max=0.3)
        C = abs(params.p1) / (params.m0 * params.R)
        bound = perturbation.series_global_bound(params, m, C)
        for term_count in (0, 1, 5, 10):
            partial = sum(perturbation.series_terms(params, m, term_count))
            if abs(partial) > bound * (1 + 1e-12):
                violations += 1

    ok = ok and violations == 0
    return ok and worst <= 1e-12, worst, "{} bound violations".format(violations)


def suite_reduction(cfg, rng):
    unit = PhysParams(p0=2.0, p1=2.0)
    red = perturbation.make_ab_reduction(unit, 1, 3)
    err = max(abs(red.B - 2 / 3), abs(red.b - 2.5))

    ok = True
    for _ in range(100):
        k = int(rng.integers(-12, 13)) or 1
        n = int(rng.integers(-6, 7)) or 1
        red = perturbation.make_ab_reduction(unit, k, n)
        ok = ok and red.detectable == (not float(k / n).is_integer())

        linear, constant = perturbation.ab_matching_split(red, unit)
        err = max(err, abs(linear + k / n), abs(constant - (1 - unit.c / unit.hbar)) / (1 + abs(k / n)))

    return ok and err <= 1e-14, err, "B, b, detectability, linear coefficient and constant"


SUITES = OrderedDict([
    ("oracle", suite_oracle),
    ("pin_matrix", suite_pin_matrix),
    ("action", suite_action),
    ("nascent_delta", suite_nascent_delta),
    ("propagator", suite_propagator),
    ("poisson", suite_poisson),
    ("winding", suite_winding),
    ("schrodinger", suite_schrodinger),
    ("series", suite_series),
    ("reduction", suite_reduction),
])


def select_suites(names):
    if not names or "all" in names:
        return list(SUITES.keys())

    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ConfigError("SUITES", "unknown suite(s) {}, choose from {}".format(unknown, list(SUITES)))

    return list(names)


def run_suites(cfg, names, timeit=True):
    results = []
    for name in select_suites(names):
        rng = np.random.default_rng(cfg.SEED)
        with Timer(name, enabled=timeit) as timer:
            passed, worst, detail = SUITES[name](cfg, rng)
        results.append(SuiteResult(name, bool(passed), float(worst), detail, timer.elapsed))

    return results
