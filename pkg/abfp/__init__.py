__all__ = ['lattice', 'gaussian', 'ab_model', 'propagators', 'schrodinger', 'perturbation']
from .ab_model import PhysParams, PropagatorValue
from .lattice import GridFunction, NoiseSample, TimeGrid
