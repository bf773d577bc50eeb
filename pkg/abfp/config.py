import math

from yacs.config import CfgNode as CN

from .errors import ConfigError

_C = CN()

# physical constants (natural units)
_C.M0 = 1.0
_C.R = 1.0
_C.HBAR = 1.0
_C.C = 1.0
_C.E = 1.0

# magnetic flux
_C.PHI = 0.0

# time window [T0, T) and the offset a (None -> (T - T0) / 2)
_C.T0 = 0.0
_C.T = 1.0
_C.A = None

# initial and pinned final conjugate momentum
_C.P0 = 1.0
_C.P1 = 1.0

# lattice controls
_C.N_CELLS = 32
_C.EPS_LIST = [1e-2, 1e-3]
_C.SIGMA_LIST = [1e-2, 1e-3]

# winding comb truncation
_C.L_MAX = 10

# poisson-demo comb: period, bump width, x-grid size
_C.POISSON_T = 1.0
_C.POISSON_SIGMA = 0.1
_C.POISSON_POINTS = 1000

# sweep spec VAR:MIN:MAX:STEPS
_C.SWEEP = "phi:0.0:2.0:100"

# perturbation series
_C.MEASURE_FILE = ""
_C.N_MAX = 25

# output
_C.FORMAT = "csv"
_C.SEED = 1234
_C.WORKERS = 1
_C.LOGDIR = None

# verification suites ('all' or a list of names)
_C.SUITES = ["all"]

cfg = _C


SWEEP_VARS = ("phi", "t", "p0", "p1", "eps", "alpha")


def parse_sweep(spec):
    """ parse VAR:MIN:MAX:STEPS """
    parts = str(spec).split(":")
    if len(parts) != 4:
        raise ConfigError("SWEEP", "expected VAR:MIN:MAX:STEPS, got {!r}".format(spec))

    var, vmin, vmax, steps = parts
    if var not in SWEEP_VARS:
        raise ConfigError("SWEEP", "variable must be one of {}, got {!r}".format(SWEEP_VARS, var))

    try:
        vmin, vmax, steps = float(vmin), float(vmax), int(steps)
    except ValueError:
        raise ConfigError("SWEEP", "bad numeric field in {!r}".format(spec))

    if steps < 1:
        raise ConfigError("SWEEP", "steps must be >= 1")

    return var, vmin, vmax, steps


def validate_config(cfg):
    """ check the run config, raise ConfigError naming the key """

    for key in ["M0", "R", "HBAR", "C"]:
        if not cfg[key] > 0:
            raise ConfigError(key, "must be > 0, got {}".format(cfg[key]))

    if cfg.E == 0:
        raise ConfigError("E", "charge must be nonzero")

    if not 0 <= cfg.T0 < cfg.T:
        raise ConfigError("T", "need 0 <= T0 < T, got T0={} T={}".format(cfg.T0, cfg.T))

    if cfg.A is not None and (cfg.A == 0 or abs(cfg.A) > cfg.T):
        raise ConfigError("A", "need A != 0 and |A| <= T, got {}".format(cfg.A))

    if cfg.N_CELLS < 1:
        raise ConfigError("N_CELLS", "must be >= 1, got {}".format(cfg.N_CELLS))

    for key in ["EPS_LIST", "SIGMA_LIST"]:
        for x in cfg[key]:
            if not (math.isfinite(x) and x > 0):
                raise ConfigError(key, "entries must be > 0, got {}".format(x))

    if cfg.L_MAX < 0:
        raise ConfigError("L_MAX", "must be >= 0")

    for key in ["POISSON_T", "POISSON_SIGMA"]:
        if not cfg[key] > 0:
            raise ConfigError(key, "must be > 0, got {}".format(cfg[key]))

    if cfg.POISSON_POINTS < 1:
        raise ConfigError("POISSON_POINTS", "must be >= 1")

    if cfg.N_MAX < 0:
        raise ConfigError("N_MAX", "must be >= 0")

    if cfg.FORMAT not in ("csv", "json"):
        raise ConfigError("FORMAT", "must be csv or json, got {!r}".format(cfg.FORMAT))

    if cfg.WORKERS < 1:
        raise ConfigError("WORKERS", "must be >= 1")

    parse_sweep(cfg.SWEEP)
    return cfg
