"""
T-transform of normalized Gaussian functionals with delta pinning,

    Phi_K = N exp(-1/2 <w, K w>) exp(i <w, g>) prod_k delta(<w, eta_k> - y_k)

on the lattice measure, together with a dense finite-dimensional oracle that
integrates the same functional directly.
"""
import cmath
import math
from dataclasses import dataclass, field

import numpy as np
import torch
from einops import rearrange

from .errors import DimensionError, DomainError, SingularityError
from .lattice import DTYPE, GridFunction, indicator_mask, inner_product

DET_TOL = 1e-300


class BlockOperator:
    """ d x d block of multiplication operators, blocks[i] acts on cell i """

    def __init__(self, grid, blocks):
        blocks = torch.as_tensor(blocks).to(DTYPE)
        if blocks.dim() != 3 or blocks.shape[0] != grid.n_cells or blocks.shape[1] != blocks.shape[2]:
            raise DimensionError("blocks must have shape ({}, d, d), got {}".format(
                grid.n_cells, tuple(blocks.shape)))

        self.grid = grid
        self.blocks = blocks

    @classmethod
    def identity(cls, grid, d=2):
        eye = torch.eye(d, dtype=DTYPE)
        return cls(grid, eye.expand(grid.n_cells, d, d).clone())

    @classmethod
    def from_window(cls, grid, a, b, inside, outside):
        """ block `inside` on cells with midpoint in [a, b), `outside` elsewhere """
        inside = torch.as_tensor(inside, dtype=DTYPE)
        outside = torch.as_tensor(outside, dtype=DTYPE)
        mask = indicator_mask(grid, a, b)[:, None, None]
        return cls(grid, mask * inside + (1 - mask) * outside)

    @property
    def d(self):
        return self.blocks.shape[1]

    def _check_compatible(self, other):
        if self.grid != other.grid or self.d != other.d:
            raise DimensionError("operators act on different lattices")

    def __add__(self, other):
        self._check_compatible(other)
        return BlockOperator(self.grid, self.blocks + other.blocks)

    def __mul__(self, a):
        return BlockOperator(self.grid, a * self.blocks)

    __rmul__ = __mul__

    def apply(self, f):
        if f.grid != self.grid or f.d != self.d:
            raise DimensionError("cannot apply {}x{} operator to {}".format(self.d, self.d, f))
        return GridFunction(self.grid, torch.einsum('ijk,ki->ji', self.blocks, f.values))

    def compose(self, other):
        """ (self o other) cell-wise """
        self._check_compatible(other)
        return BlockOperator(self.grid, self.blocks @ other.blocks)

    def cell_dets(self):
        return torch.linalg.det(self.blocks)

    def inverse(self):
        dets = self.cell_dets()
        bad = torch.nonzero(dets.abs() < DET_TOL)
        if len(bad) > 0:
            i = bad[0].item()
            raise SingularityError("block operator singular on cell {} (t in [{:.6g}, {:.6g}))".format(
                i, self.grid.t0 + i * self.grid.dt, self.grid.t0 + (i + 1) * self.grid.dt))

        return BlockOperator(self.grid, torch.linalg.inv(self.blocks))

    def symmetric_part(self):
        return BlockOperator(self.grid, 0.5 * (self.blocks + self.blocks.transpose(-1, -2)))

    def dense(self):
        """ full (d n) x (d n) matrix, component-major like GridFunction.values.reshape(-1) """
        diag = torch.diag_embed(rearrange(self.blocks, 'n j k -> j k n'))
        return rearrange(diag, 'j k a b -> (j a) (k b)')


def fredholm_det(N):
    """ product of the cell block determinants, no dt weighting """
    return complex(torch.prod(N.cell_dets()).item())


def log_det(N):
    """ sum of principal logs of the cell determinants """
    dets = N.cell_dets()
    bad = torch.nonzero(dets.abs() < DET_TOL)
    if len(bad) > 0:
        raise SingularityError("det(Id + K) vanishes on cell {}".format(bad[0].item()))
    return complex(torch.log(dets).sum().item())


def forward_consistency(Ninv, N):
    """ max cell-wise deviation of Ninv (Id+K) from Id """
    eye = torch.eye(N.d, dtype=DTYPE)
    return (Ninv.compose(N).blocks - eye).abs().amax().item()


@dataclass(frozen=True)
class Normalization:
    """ how the constant N of Phi_K treats det(Id + K)^{-1/2} """

    kind: str = "explicit_constant"
    constant: complex = 1.0
    prefactor: complex = 1.0

    KINDS = ("explicit_constant", "eliminate_determinant", "eliminate_determinant_and")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise DomainError("unknown normalization {!r}".format(self.kind))

    @classmethod
    def explicit_constant(cls, c=1.0):
        return cls("explicit_constant", constant=c)

    @classmethod
    def eliminate_determinant(cls):
        return cls("eliminate_determinant")

    @classmethod
    def eliminate_determinant_and(cls, prefactor):
        return cls("eliminate_determinant_and", prefactor=prefactor)

    def factor(self, logdet_fn):
        """ logdet_fn is only called in explicit mode """
        if self.kind == "explicit_constant":
            return self.constant * cmath.exp(-0.5 * logdet_fn())

        if self.kind == "eliminate_determinant":
            return 1.0

        return 1.0 / self.prefactor


@dataclass
class GaussianFunctional:
    K: BlockOperator
    g: GridFunction
    pins: list = field(default_factory=list)
    normalization: Normalization = field(default_factory=Normalization)

    def __post_init__(self):
        if self.g.grid != self.K.grid or self.g.d != self.K.d:
            raise DimensionError("g does not live on the lattice of K")

        for k, (eta, y) in enumerate(self.pins):
            if eta.grid != self.K.grid or eta.d != self.K.d:
                raise DimensionError("pin {} does not live on the lattice of K".format(k))
            if torch.all(eta.values == 0):
                raise DomainError("pin {} has eta = 0".format(k))

    @property
    def grid(self):
        return self.K.grid

    @property
    def J(self):
        return len(self.pins)

    def N(self):
        return BlockOperator.identity(self.grid, self.K.d) + self.K


@dataclass
class PinMatrix:
    M: torch.Tensor
    u: torch.Tensor

    @property
    def J(self):
        return self.M.shape[0]


def pin_matrix(phi, f, Ninv):
    """ M_ij = (eta_i, Ninv eta_j), u_k = i y_k + (eta_k, Ninv (f + g)) """
    if Ninv.grid != phi.grid or Ninv.d != phi.K.d:
        raise DimensionError("Ninv does not act on the lattice of Phi")

    h = f + phi.g
    Nh = Ninv.apply(h)
    Neta = [Ninv.apply(eta) for eta, _ in phi.pins]

    J = phi.J
    M = torch.zeros(J, J, dtype=DTYPE)
    u = torch.zeros(J, dtype=DTYPE)
    for i, (eta, y) in enumerate(phi.pins):
        u[i] = 1j * y + inner_product(eta, Nh)
        for j in range(J):
            M[i, j] = inner_product(eta, Neta[j])

    return PinMatrix(M, u)


def check_condition(pins, tol=1e-14):
    """ Re(M) > 0, or Re(M) = 0 and Im(M) definite """
    M = pins.M if isinstance(pins, PinMatrix) else torch.as_tensor(pins, dtype=DTYPE)
    if M.numel() == 0:
        return True

    re, im = M.real, M.imag
    scale = max(M.abs().max().item(), 1.0)

    re_eigs = torch.linalg.eigvalsh(0.5 * (re + re.T))
    if torch.all(re_eigs > tol * scale):
        return True

    if torch.all(re.abs() <= tol * scale):
        im_eigs = torch.linalg.eigvalsh(0.5 * (im + im.T))
        return bool(torch.all(im_eigs > tol * scale) or torch.all(im_eigs < -tol * scale))

    return False


def t_transform_lemma(phi, f, Ninv=None, sqrt_det_M=None):
    """ closed-form T-transform of Phi_K at f

    Ninv defaults to the cell-wise inverse of Id + K; pass an explicit
    (regularized) inverse to use it as a definition instead. sqrt_det_M
    picks the branch of det(M)^(1/2), principal when None.
    """
    N = phi.N()
    if Ninv is None:
        Ninv = N.inverse()

    h = f + phi.g
    exponent = -0.5 * inner_product(h, Ninv.apply(h))
    prefactor = phi.normalization.factor(lambda: log_det(N))

    if phi.J > 0:
        pins = pin_matrix(phi, f, Ninv)
        detM = complex(torch.linalg.det(pins.M).item())
        if abs(detM) < DET_TOL:
            raise SingularityError("pin matrix M is singular (det M = {})".format(detM))

        Minv_u = torch.linalg.solve(pins.M, pins.u)
        exponent += 0.5 * complex((pins.u * Minv_u).sum().item())
        if sqrt_det_M is None:
            sqrt_det_M = cmath.sqrt(detM)
        prefactor *= (2 * math.pi) ** (-0.5 * phi.J) / sqrt_det_M

    return prefactor * cmath.exp(exponent)


def t_transform_oracle(phi, f, delta_width, Ninv=None):
    """ direct lattice Gaussian integral with Gaussian-regularized pins

    The weight of <w, K w> is its symmetric part; with an explicit Ninv the
    Gaussian operator is (sym Ninv)^{-1}.
    """
    if not delta_width > 0:
        raise DomainError("delta_width must be > 0, got {}".format(delta_width))

    grid = phi.grid
    dt, sigma2 = grid.dt, delta_width ** 2

    if Ninv is None:
        A = phi.N().symmetric_part()
    else:
        A = Ninv.symmetric_part().inverse()

    Adense = A.dense()
    Q = Adense.clone()
    c = 1j * (f + phi.g).values.reshape(-1)
    shift = 0.0
    for eta, y in phi.pins:
        e = eta.values.reshape(-1)
        Q = Q + (dt / sigma2) * torch.outer(e, e)
        c = c + (y / sigma2) * e
        shift += y * y / (2 * sigma2)

    try:
        x = torch.linalg.solve(Q, c)
        ratio = complex(torch.linalg.det(torch.linalg.solve(Adense, Q)).item())
    except RuntimeError as err:
        raise SingularityError("assembled quadratic form is singular: {}".format(err))

    if abs(ratio) < DET_TOL:
        raise SingularityError("assembled quadratic form is singular (det ratio 0)")

    exponent = 0.5 * dt * complex((c * x).sum().item()) - shift
    prefactor = phi.normalization.factor(lambda: log_det(A))
    prefactor *= (2 * math.pi * sigma2) ** (-0.5 * phi.J) / cmath.sqrt(ratio)

    return prefactor * cmath.exp(exponent)


def sqrt_continued(values):
    """ square roots along a path, branch chosen for continuity """
    roots = []
    for z in values:
        r = cmath.sqrt(complex(z))
        if roots and abs(r - roots[-1]) > abs(-r - roots[-1]):
            r = -r
        roots.append(r)
    return roots


def eps_path(target, steps=64):
    """ geometric path 1 -> target """
    if not target > 0:
        raise DomainError("eps target must be > 0, got {}".format(target))
    return np.geomspace(1.0, target, steps)
