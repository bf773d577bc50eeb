import math

from abfp import perturbation, propagators, schrodinger
from abfp.ab_model import PhysParams
from abfp.errors import DomainError, PreconditionError
from abfp.perturbation import AtomicMeasure
from abfp.schrodinger import EnergySpec


def conserved_params(**kwargs):
    fields = dict(m0=1.3, R=0.9, hbar=0.8, p0=1.4, p1=1.4, t=2.0)
    fields.update(kwargs)
    return PhysParams(**fields).with_alpha(0.45)


def test_energy_spec():
    pp = conserved_params()
    ab = EnergySpec("ab_bound_state", pp)
    assert abs(ab.energy() - (pp.p0 ** 2 / (2 * pp.m0) + ab.potential(pp.p0))) < 1e-13
    assert EnergySpec("circle", pp).potential(pp.p0) == 0

    m = AtomicMeasure(((0.3, 0.2 + 0.1j), (-0.5, 0.4)))
    spec = EnergySpec("exponential_class", pp, m)
    x = pp.p0 / (pp.m0 * pp.R)
    assert abs(spec.potential(pp.p0) - perturbation.potential_eval(m, x)) < 1e-15
    assert abs(abs(EnergySpec("circle", pp).phase(1.3)) - 1.0) < 1e-15

    for kind, measure in [("bogus", None), ("exponential_class", None)]:
        try:
            EnergySpec(kind, pp, measure)
            assert False, "should raise"
        except DomainError:
            pass
    print("\t- Passed energy spec test")


def test_residual_analytic():
    pp = conserved_params()
    m = AtomicMeasure(((0.2, 0.5 - 0.3j), (-0.1, 0.25j), (0.0, 1.0)))
    for spec in [EnergySpec("ab_bound_state", pp), EnergySpec("circle", pp), EnergySpec("exponential_class", pp, m)]:
        assert schrodinger.residual_analytic(spec) <= 1e-12

    for l in (-3, 0, 4):
        assert schrodinger.winding_residual(pp, l) <= 1e-12
    print("\t- Passed analytic residual test")


def test_conservation_required():
    pp = conserved_params(p1=1.9)
    for l in (0, 2):
        try:
            schrodinger.residual_analytic(EnergySpec("ab_bound_state", pp), l)
            assert False, "should raise"
        except PreconditionError as err:
            assert err.diagnostic == schrodinger.winding_residual_term(pp, l)
            assert err.diagnostic != 0

    try:
        schrodinger.residual_fd(EnergySpec("circle", pp), 1e-3)
        assert False, "should raise"
    except PreconditionError:
        pass

    assert schrodinger.winding_residual_term(conserved_params(), 5) == 0
    print("\t- Passed conservation precondition test")


def test_residual_fd():
    """ central differences: residual ~ E^3 h^2/(6 hbar^2) """
    spec = EnergySpec("circle", PhysParams(p0=2.0, p1=2.0))
    E = 2.0

    hs = [1e-2, 5e-3, 2.5e-3, 1.25e-3]
    res = [schrodinger.residual_fd(spec, h) for h in hs]
    for r1, r2 in zip(res[:-1], res[1:]):
        assert abs(math.log2(r1 / r2) - 2.0) <= 0.05

    expected = E ** 3 * hs[-1] ** 2 / 6
    assert abs(res[-1] - expected) <= 1e-2 * expected

    try:
        schrodinger.residual_fd(spec, 0.0)
        assert False, "should raise"
    except DomainError:
        pass
    print("\t- Passed finite difference residual test")


def test_residual_fd_ab():
    """ the AB propagator under central differences: order 2, E = p0 (p0 + 2 alpha/R)/(2 m0) """
    spec = EnergySpec("ab_bound_state", PhysParams(p0=2.0, p1=2.0).with_alpha(0.5))
    E = 3.0

    hs = [1e-2, 5e-3, 2.5e-3, 1.25e-3]
    res = [schrodinger.residual_fd(spec, h) for h in hs]
    for r1, r2 in zip(res[:-1], res[1:]):
        assert abs(r1 / r2 - 4.0) <= 0.2

    expected = E ** 3 * hs[-1] ** 2 / 6
    assert abs(res[-1] - expected) <= 1e-2 * expected
    print("\t- Passed AB finite difference residual test")


def test_residual_uses_propagator():
    """ a propagator with the flux term dropped no longer solves the equation """
    pp = conserved_params()
    spec = EnergySpec("ab_bound_state", pp)
    assert abs(spec.energy() - (pp.p0 ** 2 / (2 * pp.m0) + pp.alpha * pp.p0 / (pp.m0 * pp.R))) < 1e-13

    original = schrodinger.propagator_no_winding
    schrodinger.propagator_no_winding = propagators.free_circle_propagator
    try:
        assert schrodinger.residual_analytic(spec) > 0.1
        assert schrodinger.residual_fd(spec, 1e-3) > 0.1
    finally:
        schrodinger.propagator_no_winding = original

    assert schrodinger.residual_analytic(spec) <= 1e-12
    print("\t- Passed propagator-backed residual test")


def test_w_kernel():
    pp = conserved_params()
    spec = EnergySpec("ab_bound_state", pp)
    V = spec.potential(pp.p0)

    assert schrodinger.w_kernel(spec, 0.0, pp.p0) == V
    assert abs(schrodinger.w_kernel(spec, pp.hbar, pp.p0)) < 1e-15
    assert abs(schrodinger.w_kernel(spec, 3 * pp.hbar, pp.p0)) < 1e-14
    assert abs(schrodinger.w_kernel(spec, 0.5 * pp.hbar, pp.p0)) > 0.1 * abs(V)
    print("\t- Passed W kernel test")


def test_sifting():
    pp = conserved_params(p0=1.0, p1=1.0, hbar=1.0)
    spec = EnergySpec("ab_bound_state", pp)
    target = schrodinger.w_kernel(spec, 0.0, pp.p0)

    value = schrodinger.sifting_quadrature(spec, 1e-3)
    assert abs(value - target) <= 1e-4 * max(1.0, abs(target))

    try:
        schrodinger.sifting_quadrature(spec, 0.0)
        assert False, "should raise"
    except DomainError:
        pass
    print("\t- Passed sifting test")


if __name__ == '__main__':
    print("Testing schrodinger ...")
    test_energy_spec()
    test_residual_analytic()
    test_conservation_required()
    test_residual_fd()
    test_residual_fd_ab()
    test_residual_uses_propagator()
    test_w_kernel()
    test_sifting()
