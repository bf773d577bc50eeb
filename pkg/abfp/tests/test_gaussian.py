import cmath
import math

import numpy as np
import torch

from abfp.errors import DimensionError, DomainError, SingularityError
from abfp.gaussian import (BlockOperator, GaussianFunctional, Normalization, PinMatrix, check_condition, eps_path,
                           forward_consistency, fredholm_det, log_det, pin_matrix, sqrt_continued,
                           t_transform_lemma, t_transform_oracle)
from abfp.lattice import GridFunction, TimeGrid, indicator
from abfp.suites import random_functional


def random_operator(grid, seed, scale=0.3):
    gen = torch.Generator().manual_seed(seed)
    blocks = torch.eye(2, dtype=torch.float64) + scale * torch.randn(grid.n_cells, 2, 2, generator=gen, dtype=torch.float64)
    return BlockOperator(grid, blocks)


def test_block_operator():
    grid = TimeGrid(0.0, 1.0, 6)
    op = random_operator(grid, 0)
    f = GridFunction(grid, torch.randn(2, 6, dtype=torch.float64))

    assert torch.allclose(BlockOperator.identity(grid).apply(f).values, f.values)

    dense = op.dense()
    assert dense.shape == (12, 12)
    assert torch.allclose(dense @ f.values.reshape(-1), op.apply(f).values.reshape(-1))

    assert forward_consistency(op.inverse(), op) < 1e-13
    assert torch.allclose((2 * op).blocks, (op + op).blocks)

    sym = op.symmetric_part()
    assert torch.allclose(sym.blocks, sym.blocks.transpose(-1, -2))
    print("\t- Passed block operator test")


def test_window_operator():
    grid = TimeGrid(0.0, 2.0, 8)
    inside = [[1.0, 2.0], [3.0, 4.0]]
    op = BlockOperator.from_window(grid, 0.5, 1.5, inside, torch.eye(2))

    inside = torch.tensor(inside, dtype=op.blocks.dtype)
    assert torch.equal(op.blocks[2], inside) and torch.equal(op.blocks[5], inside)
    assert torch.equal(op.blocks[0], torch.eye(2, dtype=op.blocks.dtype))
    assert torch.equal(op.blocks[6], torch.eye(2, dtype=op.blocks.dtype))
    print("\t- Passed window operator test")


def test_singular_operator():
    grid = TimeGrid(0.0, 1.0, 4)
    blocks = torch.eye(2, dtype=torch.float64).repeat(4, 1, 1)
    blocks[2] = 0.0
    op = BlockOperator(grid, blocks)

    try:
        op.inverse()
        assert False, "should raise"
    except SingularityError as err:
        assert "cell 2" in str(err)

    try:
        log_det(op)
        assert False, "should raise"
    except SingularityError:
        pass

    try:
        BlockOperator(grid, torch.eye(2).repeat(3, 1, 1))
        assert False, "should raise"
    except DimensionError:
        pass
    print("\t- Passed singular operator test")


def test_determinants():
    grid = TimeGrid(0.0, 1.0, 5)
    op = random_operator(grid, 1)
    det = fredholm_det(op)
    assert abs(cmath.exp(log_det(op)) - det) <= 1e-12 * abs(det)

    assert fredholm_det(BlockOperator.identity(grid)) == 1
    assert abs(fredholm_det(2.0 * BlockOperator.identity(grid)) - 4 ** 5) < 1e-9
    print("\t- Passed determinant test")


def test_normalization():
    assert Normalization.eliminate_determinant().factor(lambda: 1 / 0) == 1.0
    assert Normalization.eliminate_determinant_and(2.0).factor(lambda: 1 / 0) == 0.5
    assert abs(Normalization.explicit_constant(3.0).factor(lambda: math.log(4.0)) - 1.5) < 1e-15

    try:
        Normalization("bogus")
        assert False, "should raise"
    except DomainError:
        pass
    print("\t- Passed normalization test")


def test_functional_validation():
    grid = TimeGrid(0.0, 1.0, 4)
    K = BlockOperator(grid, torch.zeros(4, 2, 2))

    try:
        GaussianFunctional(K, GridFunction.zeros(grid, d=1))
        assert False, "should raise"
    except DimensionError:
        pass

    try:
        GaussianFunctional(K, GridFunction.zeros(grid), [(GridFunction.zeros(grid), 0.0)])
        assert False, "should raise"
    except DomainError:
        pass

    phi = GaussianFunctional(K, GridFunction.zeros(grid))
    assert phi.J == 0 and phi.grid == grid
    print("\t- Passed functional validation test")


def test_free_gaussian():
    """ K = 0, no pins: T(f) = exp(-|f|^2 / 2) """
    grid = TimeGrid(0.0, 2.0, 8)
    K = BlockOperator(grid, torch.zeros(8, 2, 2))
    phi = GaussianFunctional(K, GridFunction.zeros(grid), normalization=Normalization.explicit_constant())

    f = 0.7 * indicator(grid, 0.0, 2.0)
    assert abs(t_transform_lemma(phi, f) - math.exp(-0.5 * 0.49 * 2.0)) < 1e-14
    assert abs(t_transform_lemma(phi, GridFunction.zeros(grid)) - 1.0) < 1e-15
    print("\t- Passed free gaussian test")


def test_pinned_density():
    """ one pin on the endpoint of the theta path gives the heat kernel """
    grid = TimeGrid(0.0, 2.0, 8)
    K = BlockOperator(grid, torch.zeros(8, 2, 2))
    y = 0.3
    phi = GaussianFunctional(K, GridFunction.zeros(grid), [(indicator(grid, 0.0, 2.0), y)],
                             Normalization.explicit_constant())

    expected = math.exp(-y * y / (2 * 2.0)) / math.sqrt(2 * math.pi * 2.0)
    assert abs(t_transform_lemma(phi, GridFunction.zeros(grid)) - expected) < 1e-14

    pins = pin_matrix(phi, GridFunction.zeros(grid), BlockOperator.identity(grid))
    assert pins.J == 1
    assert abs(pins.M[0, 0].item() - 2.0) < 1e-14
    assert abs(pins.u[0].item() - 1j * y) < 1e-14
    print("\t- Passed pinned density test")


def test_lemma_oracle():
    rng = np.random.default_rng(7)
    for i in range(6):
        phi = random_functional(rng, int(rng.integers(2, 9)), J=i % 3)
        f = GridFunction(phi.grid, torch.from_numpy(rng.uniform(-1, 1, (2, phi.grid.n_cells))))

        lemma = t_transform_lemma(phi, f)
        oracle = t_transform_oracle(phi, f, 1e-3)
        assert abs(lemma - oracle) <= 1e-4 * abs(lemma), (lemma, oracle)

    try:
        t_transform_oracle(phi, f, 0.0)
        assert False, "should raise"
    except DomainError:
        pass
    print("\t- Passed lemma vs oracle test")


def test_singular_pins():
    grid = TimeGrid(0.0, 1.0, 4)
    K = BlockOperator(grid, torch.zeros(4, 2, 2))
    eta = indicator(grid, 0.0, 1.0)
    phi = GaussianFunctional(K, GridFunction.zeros(grid), [(eta, 0.1), (eta, 0.2)])

    try:
        t_transform_lemma(phi, GridFunction.zeros(grid))
        assert False, "should raise"
    except SingularityError:
        pass
    print("\t- Passed singular pin matrix test")


def test_determinant_inverse():
    grid = TimeGrid(0.0, 1.0, 12)
    for seed in range(4):
        op = random_operator(grid, 10 + seed)
        assert abs(fredholm_det(op) * fredholm_det(op.inverse()) - 1) <= 1e-10
    print("\t- Passed determinant inverse test")


def test_translation_covariance():
    """ at J = 0 the shift g moves into the argument """
    rng = np.random.default_rng(11)
    for _ in range(4):
        phi = random_functional(rng, int(rng.integers(2, 9)), J=0)
        f = GridFunction(phi.grid, torch.from_numpy(rng.uniform(-1, 1, (2, phi.grid.n_cells))))
        unshifted = GaussianFunctional(phi.K, GridFunction.zeros(phi.grid), [], phi.normalization)

        value = t_transform_lemma(phi, f)
        assert abs(value - t_transform_lemma(unshifted, f + phi.g)) <= 1e-14 * abs(value)
    print("\t- Passed translation covariance test")


def test_unpinned_reduction():
    """ J = 0: det(Id + K)^(-1/2) exp(-1/2 <h, (Id + K)^-1 h>) from the dense matrix """
    rng = np.random.default_rng(12)
    for _ in range(4):
        phi = random_functional(rng, int(rng.integers(2, 9)), J=0)
        f = GridFunction(phi.grid, torch.from_numpy(rng.uniform(-1, 1, (2, phi.grid.n_cells))))

        N = phi.N().dense()
        h = (f + phi.g).values.reshape(-1)
        quad = phi.grid.dt * complex((h * torch.linalg.solve(N, h)).sum().item())
        expected = cmath.exp(-0.5 * quad) / cmath.sqrt(complex(torch.linalg.det(N).item()))

        value = t_transform_lemma(phi, f)
        assert abs(value - expected) <= 1e-12 * abs(expected), (value, expected)
    print("\t- Passed unpinned reduction test")


def test_sqrt_branch():
    grid = TimeGrid(0.0, 2.0, 8)
    K = BlockOperator(grid, torch.zeros(8, 2, 2))
    phi = GaussianFunctional(K, GridFunction.zeros(grid), [(indicator(grid, 0.0, 2.0), 0.3)],
                             Normalization.explicit_constant())

    f = GridFunction.zeros(grid)
    principal = t_transform_lemma(phi, f)
    assert abs(t_transform_lemma(phi, f, sqrt_det_M=-math.sqrt(2.0)) + principal) < 1e-15
    print("\t- Passed sqrt branch test")


def test_check_condition():
    assert check_condition(torch.tensor([[1.0]]))
    assert check_condition(torch.tensor([[1j]]))
    assert check_condition(torch.tensor([[-1j]]))
    assert not check_condition(torch.tensor([[-1.0]]))
    assert not check_condition(torch.tensor([[0.0]]))
    assert not check_condition(torch.tensor([[1.0, 0.0], [0.0, -1.0]]))
    assert check_condition(PinMatrix(torch.zeros(0, 0, dtype=torch.complex128), torch.zeros(0)))
    print("\t- Passed pin condition test")


def test_sqrt_continued():
    thetas = np.linspace(0.0, 1.9 * math.pi, 200)
    roots = sqrt_continued(np.exp(1j * thetas))
    assert abs(roots[-1] - cmath.exp(0.95j * math.pi)) < 1e-12
    assert abs(roots[-1] - cmath.sqrt(cmath.exp(1.9j * math.pi))) > 1.9

    path = eps_path(1e-3, steps=10)
    assert path[0] == 1.0 and abs(path[-1] - 1e-3) < 1e-15
    assert np.all(np.diff(path) < 0)

    try:
        eps_path(0.0)
        assert False, "should raise"
    except DomainError:
        pass
    print("\t- Passed continued sqrt test")


if __name__ == '__main__':
    print("Testing gaussian ...")
    test_block_operator()
    test_window_operator()
    test_singular_operator()
    test_determinants()
    test_normalization()
    test_functional_validation()
    test_free_gaussian()
    test_pinned_density()
    test_lemma_oracle()
    test_singular_pins()
    test_determinant_inverse()
    test_translation_covariance()
    test_unpinned_reduction()
    test_sqrt_branch()
    test_check_condition()
    test_sqrt_continued()
