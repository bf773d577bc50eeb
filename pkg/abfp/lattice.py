import math
from dataclasses import dataclass

import torch

from .errors import DimensionError, DomainError

DTYPE = torch.complex128


@dataclass(frozen=True)
class TimeGrid:
    """ uniform lattice of n_cells cells on [t0, t] """

    t0: float
    t: float
    n_cells: int

    def __post_init__(self):
        if not (self.t > self.t0 >= 0):
            raise DomainError("need t > t0 >= 0, got t0={} t={}".format(self.t0, self.t))
        if self.n_cells < 1:
            raise DomainError("n_cells must be >= 1, got {}".format(self.n_cells))

    @property
    def delta(self):
        return self.t - self.t0

    @property
    def dt(self):
        return self.delta / self.n_cells

    def nodes(self):
        return self.t0 + self.dt * torch.arange(self.n_cells + 1, dtype=torch.float64)

    def midpoints(self):
        return self.t0 + self.dt * (torch.arange(self.n_cells, dtype=torch.float64) + 0.5)

    def _check_time(self, s, name="s"):
        tol = 1e-12 * max(1.0, abs(self.t))
        if not (self.t0 - tol <= s <= self.t + tol):
            raise DomainError("{}={} outside [{}, {}]".format(name, s, self.t0, self.t))

    def cell_of(self, s):
        """ index of the cell [s_i, s_i+1) holding s; s = t maps to the last cell """
        self._check_time(s)
        # nodes hit by round-off belong to the cell on their right
        i = int(math.floor((s - self.t0) / self.dt + 1e-9))
        return min(max(i, 0), self.n_cells - 1)

    def refine(self, factor):
        return TimeGrid(self.t0, self.t, self.n_cells * factor)


class GridFunction:
    """ d-component step function, values[j, i] on cell i """

    def __init__(self, grid, values):
        values = torch.as_tensor(values).to(DTYPE)
        if values.dim() != 2 or values.shape[1] != grid.n_cells:
            raise DimensionError("values must have shape (d, {}), got {}".format(
                grid.n_cells, tuple(values.shape)))

        self.grid = grid
        self.values = values

    @classmethod
    def zeros(cls, grid, d=2):
        return cls(grid, torch.zeros(d, grid.n_cells, dtype=DTYPE))

    @property
    def d(self):
        return self.values.shape[0]

    def _check_compatible(self, other):
        if self.grid != other.grid or self.d != other.d:
            raise DimensionError("grid functions live on different lattices: {}x{} vs {}x{}".format(
                self.grid, self.d, other.grid, other.d))

    def __add__(self, other):
        self._check_compatible(other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._check_compatible(other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, a):
        return GridFunction(self.grid, a * self.values)

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def __repr__(self):
        return "GridFunction(d={}, grid={})".format(self.d, self.grid)

    def restrict(self, a, b):
        """ zero outside [a, b) (midpoint rule) """
        mask = indicator_mask(self.grid, a, b)
        return GridFunction(self.grid, self.values * mask)

    def refine(self, factor):
        """ same step function on a lattice factor times finer """
        return GridFunction(self.grid.refine(factor), self.values.repeat_interleave(factor, dim=1))

    def norm(self):
        """ |f|_0 with modulus, for complex f """
        return math.sqrt(self.values.abs().pow(2).sum().item() * self.grid.dt)


class NoiseSample(GridFunction):
    """ lattice white noise (omega_theta, omega_p), cell variance 1/dt """

    def __init__(self, grid, values, seed=None):
        super().__init__(grid, values)
        if self.d != 2:
            raise DimensionError("noise samples have d = 2, got {}".format(self.d))
        self.seed = seed

    @property
    def theta(self):
        return self.values[0].real

    @property
    def p(self):
        return self.values[1].real

    def refine(self, factor):
        return NoiseSample(self.grid.refine(factor), self.values.repeat_interleave(factor, dim=1), self.seed)


def inner_product(f, g):
    """ bilinear pairing sum_j int f_j g_j ds, no conjugation """
    f._check_compatible(g)
    return complex((f.values * g.values).sum().item() * f.grid.dt)


def indicator_mask(grid, a, b):
    grid._check_time(a, "a")
    grid._check_time(b, "b")
    if a > b:
        raise DomainError("need a <= b, got a={} b={}".format(a, b))

    mid = grid.midpoints()
    return ((mid >= a) & (mid < b)).to(DTYPE)


def indicator(grid, a, b, component=0, d=2):
    """ 1_[a,b) on one component """
    if not 0 <= component < d:
        raise DimensionError("component {} out of range for d={}".format(component, d))

    values = torch.zeros(d, grid.n_cells, dtype=DTYPE)
    values[component] = indicator_mask(grid, a, b)
    return GridFunction(grid, values)


def point_mass(grid, s, component=0, d=2):
    """ one-cell box of height 1/dt, the lattice delta_s """
    if not 0 <= component < d:
        raise DimensionError("component {} out of range for d={}".format(component, d))

    values = torch.zeros(d, grid.n_cells, dtype=DTYPE)
    values[component, grid.cell_of(s)] = 1.0 / grid.dt
    return GridFunction(grid, values)


def ramp(grid, component=0, d=2):
    """ s -> s - t0 sampled at cell midpoints """
    values = torch.zeros(d, grid.n_cells, dtype=DTYPE)
    values[component] = (grid.midpoints() - grid.t0).to(DTYPE)
    return GridFunction(grid, values)


def sample_noise(grid, seed):
    generator = torch.Generator().manual_seed(int(seed))
    w = torch.randn(2, grid.n_cells, generator=generator, dtype=torch.float64)
    return NoiseSample(grid, w / math.sqrt(grid.dt), seed=seed)


def sample_noise_batch(grid, seeds):
    return [sample_noise(grid, s) for s in seeds]
