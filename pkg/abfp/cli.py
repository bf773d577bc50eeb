"""
abfp command line: verify | sweep | series | poisson-demo

Exit codes: 0 success, 1 a check or evaluation failed, 2 configuration error.
"""
import argparse
import cmath
import csv
import io
import json
import math
import sys
from multiprocessing import Pool

import numpy as np
from tqdm import tqdm

from . import ab_model, perturbation, propagators
from .ab_model import PhysParams
from .config import cfg as default_cfg
from .config import parse_sweep, validate_config
from .errors import ABFPError, ConfigError, DomainError
from .lattice import TimeGrid
from .logger import Logger
from .suites import run_suites, select_suites

COMMANDS = ("verify", "sweep", "series", "poisson-demo")

SWEEP_COLUMNS = ["index", "var", "value", "phase_re", "phase_im", "phase_arg", "modulus", "detectable"]
SERIES_COLUMNS = ["N", "partial_re", "partial_im", "error", "remainder_bound", "global_bound"]
POISSON_COLUMNS = ["index", "x", "lhs", "rhs", "diff"]
VERIFY_COLUMNS = ["suite", "passed", "worst", "detail"]


def build_parser():
    parser = argparse.ArgumentParser(prog="abfp", description="AB momentum-space propagators: checks and tables")
    parser.add_argument('command', choices=COMMANDS)
    parser.add_argument('--config', default=None, help="yaml preset, e.g. config/default.yaml")
    parser.add_argument('--out', default=None, help="output table path (default: stdout)")
    parser.add_argument('--format', default=None)
    parser.add_argument('--seed', type=int, default=None)
    parser.add_argument('--suite', action='append', default=None)
    parser.add_argument('--sweep', default=None, help="VAR:MIN:MAX:STEPS")
    parser.add_argument('--workers', type=int, default=None)
    parser.add_argument('--logdir', default=None)
    parser.add_argument('--n-max', dest='n_max', type=int, default=None)
    parser.add_argument('--opts', nargs='+', default=[])
    return parser


def load_config(args):
    """ built-in defaults < --config file < --opts < explicit flags """
    cfg = default_cfg.clone()
    try:
        if args.config:
            cfg.merge_from_file(args.config)
        cfg.merge_from_list(args.opts)
    except (KeyError, ValueError, AssertionError, OSError) as err:
        raise ConfigError("config", str(err))

    flags = {"FORMAT": args.format, "SEED": args.seed, "SUITES": args.suite, "SWEEP": args.sweep,
             "WORKERS": args.workers, "LOGDIR": args.logdir, "N_MAX": args.n_max}

    for key, value in flags.items():
        if value is not None:
            cfg[key] = value

    validate_config(cfg)
    cfg.freeze()
    return cfg


def format_value(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        return f"{x:.16e}"
    return str(x)


def write_table(rows, columns, fmt, out=None):
    """ csv with header, or a json array of flat objects; utf-8, LF """
    buf = io.StringIO(newline="")
    if fmt == "csv":
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row[c]) for c in columns])
    else:
        buf.write(json.dumps([{c: row[c] for c in columns} for row in rows], indent=1))
        buf.write("\n")

    text = buf.getvalue()
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)


def status_stream(args):
    return sys.stderr if args.out is None and args.command != "verify" else sys.stdout


def cmd_verify(cfg, args):
    results = run_suites(cfg, cfg.SUITES)

    print("{:<15s} {:<6s} {:>12s} {:>10s}  {}".format("suite", "status", "worst", "ms", "detail"))
    for r in results:
        print("{:<15s} {:<6s} {:>12.3e} {:>10.1f}  {}".format(
            r.name, "PASS" if r.passed else "FAIL", r.worst, r.elapsed, r.detail))

    logger = Logger("verify", cfg.LOGDIR)
    logger.write_dict({"{}/worst".format(r.name): r.worst for r in results}, step=0)
    logger.close()

    if args.out is not None:
        rows = [{"suite": r.name, "passed": r.passed, "worst": r.worst, "detail": r.detail} for r in results]
        write_table(rows, VERIFY_COLUMNS, cfg.FORMAT, args.out)

    n_failed = sum(not r.passed for r in results)
    print("{} / {} suites passed".format(len(results) - n_failed, len(results)))
    return 0 if n_failed == 0 else 1


def sweep_values(vmin, vmax, steps):
    if steps == 1:
        return [vmin]
    return np.linspace(vmin, vmax, steps).tolist()


def apply_sweep(params, var, value):
    if var == "phi":
        return params.replace(phi=value)
    if var == "alpha":
        return params.with_alpha(value)
    if var == "t":
        return params.with_time(value)
    if var == "p0":
        return params.replace(p0=value)
    if var == "p1":
        return params.replace(p1=value)
    return params


def sweep_point(job):
    """ one sweep row; top-level so worker processes can unpickle it """
    index, var, value, base, n_cells, l_max = job
    params = apply_sweep(base, var, value)

    if var == "eps":
        grid = TimeGrid(params.t0, params.t, n_cells)
        z = ab_model.t_transform_eps(params, grid, value)
    elif var == "p1":
        z = propagators.propagator_winding(params, l_max).phase
    else:
        z = propagators.propagator_no_winding(params).phase

    detectable = None
    if var in ("phi", "alpha"):
        detectable = abs(params.alpha - round(params.alpha)) > 1e-12

    return {"index": index, "var": var, "value": float(value), "phase_re": z.real, "phase_im": z.imag,
            "phase_arg": cmath.phase(z), "modulus": abs(z), "detectable": detectable}


def cmd_sweep(cfg, args):
    var, vmin, vmax, steps = parse_sweep(cfg.SWEEP)
    base = PhysParams.from_cfg(cfg)
    jobs = [(i, var, v, base, cfg.N_CELLS, cfg.L_MAX) for i, v in enumerate(sweep_values(vmin, vmax, steps))]

    try:
        if cfg.WORKERS > 1:
            with Pool(cfg.WORKERS) as pool:
                rows = list(tqdm(pool.imap(sweep_point, jobs), total=len(jobs), file=sys.stderr))
        else:
            rows = [sweep_point(job) for job in tqdm(jobs, file=sys.stderr)]
    except DomainError as err:
        raise ConfigError("SWEEP", str(err))

    logger = Logger("sweep", cfg.LOGDIR)
    for row in rows:
        logger.write_dict({"{}/phase_arg".format(var): row["phase_arg"], "{}/modulus".format(var): row["modulus"]},
                          step=row["index"])
    logger.close()

    write_table(rows, SWEEP_COLUMNS, cfg.FORMAT, args.out)
    return 0


def load_measure(cfg):
    """ MEASURE_FILE, or the unit point mass at beta = 0 when unset """
    if not cfg.MEASURE_FILE:
        return perturbation.AtomicMeasure.point(0.0, 1.0, name="delta0")

    try:
        return perturbation.AtomicMeasure.load(cfg.MEASURE_FILE)
    except OSError as err:
        raise ConfigError("MEASURE_FILE", str(err))


def cmd_series(cfg, args):
    params = PhysParams.from_cfg(cfg)
    m = load_measure(cfg)

    closed = perturbation.closed_form_propagator(params, m).phase
    C = abs(params.p1) / (params.m0 * params.R)
    global_bound = perturbation.series_global_bound(params, m, C)

    n_max = 0 if len(m) == 0 else cfg.N_MAX
    rows, ok = [], True
    for N in range(n_max + 1):
        value, report = perturbation.series_propagator(params, m, N)
        rows.append({"N": N, "partial_re": value.phase.real, "partial_im": value.phase.imag,
                     "error": abs(value.phase - closed), "remainder_bound": report.remainder_bound,
                     "global_bound": global_bound})

        # round-off of the partial sum grows like exp|x|
        ok = ok and rows[-1]["error"] <= report.remainder_bound + 1e-13 * math.exp(report.x_abs)

    write_table(rows, SERIES_COLUMNS, cfg.FORMAT, args.out)
    return 0 if ok else 1


def cmd_poisson_demo(cfg, args):
    T, sigma = cfg.POISSON_T, cfg.POISSON_SIGMA
    L, K = propagators.comb_truncation(T, sigma)
    L, K = max(L, 12), max(K, 12)

    xs = np.linspace(-T, T, cfg.POISSON_POINTS)
    lhs = propagators.poisson_comb_lhs(xs, T, sigma, L)
    rhs = propagators.poisson_comb_rhs(xs, T, sigma, K)

    rows = [{"index": i, "x": float(x), "lhs": float(a), "rhs": float(b), "diff": float(a - b)}
            for i, (x, a, b) in enumerate(zip(xs, lhs, rhs))]

    write_table(rows, POISSON_COLUMNS, cfg.FORMAT, args.out)
    return 0


HANDLERS = {
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "series": cmd_series,
    "poisson-demo": cmd_poisson_demo,
}


def main(argv=None):
    args = build_parser().parse_args(argv)

    try:
        cfg = load_config(args)
        if args.command == "verify":
            select_suites(cfg.SUITES)
    except ConfigError as err:
        print("config error: {}".format(err), file=sys.stderr)
        return 2

    stream = status_stream(args)
    print("Running with config...", file=stream)
    print(cfg, file=stream)

    try:
        return HANDLERS[args.command](cfg, args)
    except ConfigError as err:
        print("config error: {}".format(err), file=sys.stderr)
        return 2
    except ABFPError as err:
        print("error: {}".format(err), file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
