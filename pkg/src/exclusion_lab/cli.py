# Copyright 2024 The exclusion-lab authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License"). You
# may not use this file except in compliance with the License. A copy of
# the License is located at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# or in the "license" file accompanying this file. This file is
# distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF
# ANY KIND, either express or implied. See the License for the specific
# language governing permissions and limitations under the License.
"""Command line experiment runner.

Each subcommand resolves a flat config (CLI flags over the ``--config``
file over built-in defaults, with the seed also taken from
``EXLAB_SEED``), runs one experiment and writes ``<subcommand>.csv``,
``<subcommand>.json`` and ``<subcommand>.cfg`` to ``--out``.

Exit codes: 0 ok, 1 usage error, 2 failed check, 3 capacity exceeded.
"""
import argparse
import logging
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import ExperimentConfig, LabConfig
from .cumulants import (
    constant_function,
    cosine_function,
    cumulant_envelope,
    gaussian_bump,
    joint_cumulant,
    stationary_variance_check,
    unrescaled_envelope,
)
from .errors import CapacityError, CheckFailedError, QuadratureError, UsageError
from .estimates import (
    collision_terms,
    comparison_identity_check,
    decay_exponent,
    grad_bound_scan,
    kernel_difference_sum,
    rw_gradient_sum,
    semigroup_composition_bound,
    tv_gradient_sum,
    uniform_gradient_scan,
)
from .exclusion import EventLog, RngStream, sample_bernoulli_field, simulate_unlabelled
from .kernels import KernelEngine, exclusion_kernel_mc, window_for
from .lattice import Geometry, ParticleConfig, SpaceTimePoint
from .pam import PamConfig, convergence_probe, pam_solve, renorm_constant, renorm_constant_spectral
from .results import ResultTable, compare_golden, write_summary

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CHECK_FAILED = 2
EXIT_CAPACITY = 3

VERSION = KernelEngine.__version__


@dataclass
class Outcome:
    """What an experiment hands back to the runner."""

    table: ResultTable
    summary: dict = field(default_factory=dict)
    failure: str = None


def _flag(text):
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {text!r}")


def _geometry(params):
    d = params.get_int("d")
    side = params.get_int("L", 0)
    return Geometry.torus(d, side) if side else Geometry.infinite(d)


def _default_configuration(k, d):
    """Particle i at 2i e_0 in d = 1 and at i e_1 otherwise, so x + e_11 never collides."""
    x = np.zeros((k, d), dtype=np.int64)
    if d == 1:
        x[:, 0] = 2 * np.arange(k)
    else:
        x[:, 1] = np.arange(k)
    return x


def _configuration(params, k, d):
    """Parse ``x`` given as ``k * d`` integers separated by commas or semicolons."""
    text = params.get("x", "")
    if not text:
        return _default_configuration(k, d)
    try:
        values = [int(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"configuration {text!r} is not a list of integers") from None
    if len(values) != k * d:
        raise UsageError(f"configuration {text!r} needs {k * d} integers for k={k}, d={d}")
    return np.asarray(values, dtype=np.int64).reshape(k, d)


def _points(text, d, rescaled):
    """Parse ``t@x1,..,xd;t@x1,..,xd`` into space-time points."""
    points = []
    for item in text.split(";"):
        if not item.strip():
            continue
        if "@" not in item:
            raise UsageError(f"space-time point {item!r} is not written as t@x")
        t, x = item.split("@", 1)
        coords = tuple(float(v) for v in x.split(",") if v.strip())
        if len(coords) != d:
            raise UsageError(f"space-time point {item!r} does not have dimension {d}")
        points.append(SpaceTimePoint(float(t), coords, rescaled=rescaled))
    return points


def _engine_for(params, k, x, t, lab):
    g = _geometry(params)
    window = None if g.is_torus else window_for(x, t, k, g.dimension)
    return KernelEngine(k, g, window, lab)


def _map(workers, fn, items):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def run_simulate_ssep(params, lab, workers):
    g = Geometry.torus(params.get_int("d"), params.get_int("L"))
    rho = lab.rho
    t = params.get_float("t")
    root = RngStream(params.get_int("seed"))

    def replica(r):
        stream = root.child(r)
        log = EventLog(lab.max_events_logged) if lab.max_events_logged else None
        eta0 = sample_bernoulli_field(g, rho, stream.child(0))
        eta = simulate_unlabelled(eta0, t, stream.child(1), event_log=log)
        return eta0.count(), eta.count(), int(eta.bits[(0,) * g.dimension]), log

    results = _map(workers, replica, range(params.get_int("replicas")))
    table = ResultTable("simulate-ssep", ["replica", "count_initial", "count_final", "site0_final"], params, VERSION)
    for r, (before, after, origin, _) in enumerate(results):
        table.add_row(r, before, after, origin)
    densities = np.array([after / g.n_sites for _, after, _, _ in results])
    summary = {
        "mean_density": float(densities.mean()),
        "density_stderr": float(densities.std(ddof=1) / math.sqrt(len(densities))) if len(densities) > 1 else 0.0,
        "site0_frequency": float(np.mean([origin for _, _, origin, _ in results])),
        "events_logged": sum(len(log.events) for *_, log in results if log is not None),
    }
    failure = None
    if any(before != after for before, after, _, _ in results):
        failure = "particle number changed during a run"
    return Outcome(table, summary, failure)


def run_kernel_exact(params, lab, workers):
    k, d, t = params.get_int("k"), params.get_int("d"), params.get_float("t")
    x = _configuration(params, k, d)
    engine = _engine_for(params, k, x, t, lab)
    row = engine.row(x, t)
    table = ResultTable("kernel-exact", ["y", "probability"], params, VERSION)
    for positions, p in zip(engine.index.positions, row.probabilities):
        table.add_row(positions, p)
    summary = {
        "states": len(engine),
        "row_sum": row.total(),
        "tail_bound": row.tail,
        "generator_symmetric": bool(engine.generator.is_symmetric()),
    }
    return Outcome(table, summary)


def _single_moves(x, g):
    """x together with every configuration reached by one particle jump."""
    out = [x]
    occupied = {tuple(p) for p in g.wrap(x).tolist()}
    for i in range(len(x)):
        for site in g.neighbours(x[i]):
            if tuple(site.tolist()) not in occupied:
                moved = x.copy()
                moved[i] = site
                out.append(moved)
    return out


def run_kernel_mc(params, lab, workers):
    k, d, t = params.get_int("k"), params.get_int("d"), params.get_float("t")
    g = _geometry(params)
    x = g.wrap(_configuration(params, k, d))
    samples = params.get_int("samples")
    try:
        window = None if g.is_torus else window_for(x, t, k, d)
        engine = KernelEngine(k, g, window, lab)
        targets = list(engine.index.positions)
        exact = engine.row_vector(x, t)
    except CapacityError as e:
        logger.warning("exact comparison skipped: %s", e)
        targets = _single_moves(x, g)
        exact = np.full(len(targets), np.nan)
    estimates = exclusion_kernel_mc(ParticleConfig(x, g), t, targets, samples, RngStream(params.get_int("seed")))
    table = ResultTable("kernel-mc", ["y", "estimate", "stderr", "exact", "z"], params, VERSION)
    worst = 0.0
    for y, estimate, value in zip(targets, estimates, exact):
        z = (estimate.value - value) / estimate.stderr if estimate.stderr > 0 else 0.0
        if math.isfinite(z):
            worst = max(worst, abs(z))
        table.add_row(y, estimate.value, estimate.stderr, value, z)
    return Outcome(table, {"targets": len(targets), "samples": samples, "max_abs_z": worst})


def run_grad_bound(params, lab, workers):
    k, theta = params.get_int("k"), lab.theta
    times = params.get_floats("times")
    scan = {"spatial": grad_bound_scan, "uniform": uniform_gradient_scan}.get(params.get("envelope"))
    if scan is None:
        raise UsageError(f"envelope must be 'spatial' or 'uniform', got {params.get('envelope')!r}")
    g = _geometry(params)
    if not g.is_torus:
        raise UsageError("grad-bound runs on a torus; set L")
    report = scan(k, theta, g, times, config=lab, workers=workers, radius=params.get_int("radius"), check=False)
    table = ResultTable("grad-bound", ["t", "x", "y", "ratio"], params, VERSION)
    for (t, x, y), ratio in zip(report.grid, report.ratios):
        table.add_row(t, x, y, ratio)
    summary = {"c_fit": report.c_fit, "theta": theta, "skipped": report.skipped, "probed": len(report.ratios),
               "envelope_ratio": report.envelope_ratio}
    summary.update(report.metadata)
    failure = None
    try:
        report.check()
    except CheckFailedError as e:
        failure = str(e)
    return Outcome(table, summary, failure)


def run_tv_sum(params, lab, workers):
    k, d = params.get_int("k"), params.get_int("d")
    times = params.get_floats("times")
    x = _configuration(params, k, d)
    engine = _engine_for(params, k, np.vstack([x, x + 1]), 2 * max(times), lab)
    table = ResultTable("tv-sum", ["t", "tv", "scaled", "composition_violation"], params, VERSION)
    values, failure = [], None
    for t in times:
        tv = tv_gradient_sum(x, t, k, engine.geometry, engine=engine)
        try:
            violation = semigroup_composition_bound(x, t, k, engine.geometry, engine=engine)
        except CapacityError as e:
            logger.debug("composition check skipped: %s", e)
            violation = float("nan")
        if violation > 1e-10:
            failure = f"composition bound violated by {violation:.3g} at t={t}"
        values.append(tv)
        table.add_row(t, tv, tv * (math.sqrt(t) + 1.0), violation)
    summary = {"tv": values}
    if len(times) > 1 and all(v > 0 for v in values):
        slope = decay_exponent(times, values)
        summary.update({"decay_exponent": slope, "theta_probe": -slope})
    return Outcome(table, summary, failure)


def run_rw_grad_sum(params, lab, workers):
    k, d = params.get_int("k"), params.get_int("d")
    g = _geometry(params)
    x = _configuration(params, k, d)
    table = ResultTable("rw-grad-sum", ["t", "value", "scaled"], params, VERSION)
    scaled = []
    for t in params.get_floats("times"):
        value = rw_gradient_sum(x, t, g, lab)
        scaled.append(value * (math.sqrt(t) + 1.0))
        table.add_row(t, value, scaled[-1])
    return Outcome(table, {"plateau_ratio": max(scaled) / min(scaled), "scaled": scaled})


def run_compare_rw(params, lab, workers):
    k, d = params.get_int("k"), params.get_int("d")
    times = params.get_floats("t")
    x = _configuration(params, k, d)
    engine = _engine_for(params, k, x, max(times), lab)
    terms = collision_terms(engine.index)
    table = ResultTable("compare-rw", ["t", "lhs", "rhs", "residual"], params, VERSION)
    worst = 0.0
    for t in times:
        lhs, rhs, residual = comparison_identity_check(x, None, t, k, engine.geometry, lab, engine, terms)
        worst = max(worst, residual)
        table.add_row(t, lhs, rhs, residual)
    failure = None
    if not worst < lab.identity_threshold:
        failure = f"comparison residual {worst:.3g} is not below {lab.identity_threshold:.3g}"
    return Outcome(table, {"max_residual": worst, "threshold": lab.identity_threshold}, failure)


def run_diff_sum(params, lab, workers):
    k, d = params.get_int("k"), params.get_int("d")
    times = params.get_floats("times")
    x = _configuration(params, k, d)
    engine = _engine_for(params, k, x, max(times), lab)
    table = ResultTable("diff-sum", ["t", "value", "normalized"], params, VERSION)
    normalized = []
    for t in times:
        value = kernel_difference_sum(x, t, k, engine.geometry, engine=engine)
        scale = math.sqrt(t) + 1.0
        normalized.append(value * scale / math.log(t + 2.0) if d <= 2 else value * scale)
        table.add_row(t, value, normalized[-1])
    summary = {"normalized": normalized}
    if min(normalized) > 0:
        summary["max_over_min"] = max(normalized) / min(normalized)
    return Outcome(table, summary)


def run_cumulants(params, lab, workers):
    d, rho = params.get_int("d"), lab.rho
    rescaled = _flag(params.get("rescaled"))
    points = _points(params.get("points"), d, rescaled)
    root = RngStream(params.get_int("seed"))
    table = ResultTable("cumulants", ["N", "order", "estimate", "stderr", "envelope", "ratio"], params, VERSION)
    by_level = {}
    for level in params.get_range("N"):
        query = joint_cumulant(points, level, rho, params.get_int("samples"), root.child(level), d=d,
                               rescaled=rescaled, shifts=params.get_int("shifts"), config=lab, workers=workers)
        if rescaled:
            envelope = cumulant_envelope(points, level, d)
        else:
            envelope = unrescaled_envelope(points, d, g=Geometry.dyadic_torus(d, level))
        ratio = (abs(query.estimate) + 2.0 * query.stderr) / envelope
        by_level[level] = ratio
        table.add_row(level, query.order, query.estimate, query.stderr, envelope, ratio)
    fits = list(by_level.values())
    summary = {"c_fit_by_level": by_level, "growth": max(fits) / min(fits) if min(fits) > 0 else float("nan")}
    return Outcome(table, summary)


TEST_FUNCTIONS = {
    "bump": gaussian_bump,
    "cosine": cosine_function,
    "constant": constant_function,
}


def run_fluctuation(params, lab, workers):
    name = params.get("f")
    if name not in TEST_FUNCTIONS:
        raise UsageError(f"test function must be one of {sorted(TEST_FUNCTIONS)}, got {name!r}")
    level = params.get_int("N")
    empirical, limit, z = stationary_variance_check(TEST_FUNCTIONS[name](), level, lab.rho,
                                                    params.get_int("samples"), RngStream(params.get_int("seed")),
                                                    d=params.get_int("d"))
    table = ResultTable("fluctuation", ["N", "empirical", "limit", "z"], params, VERSION)
    table.add_row(level, empirical, limit, z)
    return Outcome(table, {"empirical": empirical, "limit": limit, "z": z})


def run_renorm_const(params, lab, workers):
    d, horizon = params.get_int("d"), params.get_float("T")
    table = ResultTable("renorm-const", ["N", "C_N", "difference", "spectral"], params, VERSION)
    previous = None
    differences = []
    for level in params.get_range("N"):
        value = renorm_constant(level, horizon, d, lab)
        difference = float("nan") if previous is None else value - previous
        if previous is not None:
            differences.append(difference)
        table.add_row(level, value, difference, renorm_constant_spectral(level, horizon, d))
        previous = value
    summary = {"differences": differences}
    if d == 2:
        summary["log_growth_rate"] = math.log(2.0) / (4.0 * math.pi)
    return Outcome(table, summary)


def _pam_config(params, level, seed, lab):
    dt = params.get("dt")
    renorm = params.get("renorm")
    return PamConfig(
        level=level,
        d=params.get_int("d"),
        rho=lab.rho,
        horizon=params.get_float("T"),
        dt=None if dt in (None, "", "auto") else float(dt),
        initial=params.get("initial"),
        renorm="computed" if renorm == "computed" else float(renorm),
        seed=seed,
        snapshot_times=params.get_floats("snapshots") or [],
    )


def run_pam(params, lab, workers):
    cfg = _pam_config(params, params.get_int("N"), params.get_int("seed"), lab)
    snapshots = pam_solve(cfg, config=lab)
    g = cfg.geometry
    coords = g.site_coords(np.arange(g.n_sites))
    table = ResultTable("pam", ["t", "x", "value"], params, VERSION)
    stats, failure = [], None
    for snap in snapshots:
        flat = snap.values.ravel()
        for site, value in zip(coords, flat):
            table.add_row(snap.t, site, value)
        stats.append({"t": snap.t, "min": float(flat.min()), "max": float(flat.max()), "mean": float(flat.mean())})
        if flat.min() < 0:
            failure = f"solution turned negative at t={snap.t}"
    return Outcome(table, {"snapshots": stats, "level": cfg.level, "dt": cfg.dt}, failure)


STATISTICS = ("pairing", "mean", "mean_square", "holder_norm")


def run_probe_convergence(params, lab, workers):
    levels = params.get_range("N")
    if len(levels) != 2:
        raise UsageError(f"probe-convergence compares exactly two levels, got {levels}")
    seed = params.get_int("seed")
    cfg_a = _pam_config(params, levels[0], seed, lab)
    cfg_b = _pam_config(params, levels[1], seed + 1, lab)
    report = convergence_probe(cfg_a, cfg_b, params.get_float("eta"), cfg_a.horizon,
                               replicas=params.get_int("replicas"), frozen=_flag(params.get("frozen")), config=lab)
    table = ResultTable("probe-convergence", ["statistic", "mean_a", "mean_b", "difference"], params, VERSION)
    for name, a, b in zip(STATISTICS, report.means["a"], report.means["b"]):
        table.add_row(name, a, b, abs(a - b))
    summary = {"distance": report.distance, "stderr": report.stderr, "sup_distance": report.sup_distance}
    return Outcome(table, summary)


_RHO = LabConfig.OPTION_DEFAULTS["rho"]
_THETA = LabConfig.OPTION_DEFAULTS["theta"]

EXPERIMENTS = {
    "simulate-ssep": (run_simulate_ssep, "Run the unlabelled process from the product measure.",
                      {"d": 1, "L": 16, "rho": _RHO, "t": 1.0, "replicas": 100}),
    "kernel-exact": (run_kernel_exact, "Exact labelled kernel row p_t(x, .); L = 0 selects a window of Z^d.",
                     {"k": 2, "d": 1, "L": 4, "t": 1.0, "x": ""}),
    "kernel-mc": (run_kernel_mc, "Monte Carlo labelled kernel against the exact row.",
                  {"k": 2, "d": 1, "L": 4, "t": 1.0, "x": "", "samples": 100000}),
    "grad-bound": (run_grad_bound, "Gradient bound ratios and C_fit.",
                   {"k": 2, "d": 2, "L": 8, "theta": _THETA, "times": "0.25,1,4,16", "radius": 2,
                    "envelope": "spatial"}),
    "tv-sum": (run_tv_sum, "Total variation of the kernel under x -> x + e_11.",
               {"k": 2, "d": 2, "L": 16, "times": "1,2,5,10,20,50,100", "x": ""}),
    "rw-grad-sum": (run_rw_grad_sum, "Total variation of the independent-walk kernel under x -> x + e_11.",
                    {"k": 2, "d": 2, "L": 0, "times": "1,10,100,1000", "x": ""}),
    "compare-rw": (run_compare_rw, "Comparison identity between exclusion and independent walks.",
                   {"k": 2, "d": 1, "L": 6, "t": "0.25,1,4", "x": ""}),
    "diff-sum": (run_diff_sum, "Summed difference of the exclusion and independent-walk kernels.",
                 {"k": 2, "d": 2, "L": 8, "times": "1,4,16", "x": ""}),
    "cumulants": (run_cumulants, "Joint cumulants of the fluctuation field against their envelope.",
                  {"d": 2, "N": "2", "rho": _RHO, "points": "0@0.5,0.5;0@0.5,0.5", "samples": 1000,
                   "shifts": 4, "rescaled": "true"}),
    "fluctuation": (run_fluctuation, "Stationary variance of the fluctuation field.",
                    {"d": 1, "N": 6, "rho": _RHO, "samples": 10000, "f": "bump"}),
    "renorm-const": (run_renorm_const, "Renormalization constants C_N and their increments.",
                     {"d": 2, "N": "3..8", "T": 1.0}),
    "pam": (run_pam, "Solve the renormalized level-N equation.",
            {"N": 4, "d": 2, "rho": _RHO, "T": 0.1, "dt": "auto", "initial": "cosine", "renorm": "computed",
             "snapshots": ""}),
    "probe-convergence": (run_probe_convergence, "Compare solution statistics at two levels.",
                          {"N": "3,4", "d": 2, "rho": _RHO, "T": 0.1, "dt": "auto", "replicas": 4,
                           "frozen": "false", "eta": 0.5, "initial": "cosine", "renorm": "computed",
                           "snapshots": ""}),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _option_keys(defaults):
    keys = list(defaults)
    keys.extend(key for key in LabConfig.OPTION_DEFAULTS if key not in defaults and key != "seed")
    return keys


def build_parser():
    parser = _Parser(prog="exlab", description=__doc__.split("\n\n", 1)[0], allow_abbrev=False)
    commands = parser.add_subparsers(dest="subcommand", metavar="subcommand")
    commands.required = True
    for name, (_, description, defaults) in EXPERIMENTS.items():
        sub = commands.add_parser(name, help=description, description=description, allow_abbrev=False)
        sub.add_argument("--config", help="Config file written by a previous run")
        sub.add_argument("--out", default=".", help="Output directory")
        sub.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="Worker threads")
        sub.add_argument("--seed", type=int, default=None, help="Root seed")
        sub.add_argument("--verbose", action="store_true", help="Log at debug level")
        for key in _option_keys(defaults):
            sub.add_argument(f"--{key}", dest=f"opt_{key}", default=None, metavar="VALUE")
    golden = commands.add_parser("compare-golden", help="Compare two result tables byte for byte.")
    golden.add_argument("table_a")
    golden.add_argument("table_b")
    return parser


def resolve_config(args):
    """Merge the config file, CLI flags, ``EXLAB_SEED`` and defaults.

    :rtype: exclusion_lab.config.ExperimentConfig
    """
    _, _, defaults = EXPERIMENTS[args.subcommand]
    allowed = set(_option_keys(defaults)) | {"seed"}
    if args.config:
        params = ExperimentConfig.from_file(args.config)
        if params.subcommand != args.subcommand:
            raise UsageError(f"{args.config} configures {params.subcommand!r}, not {args.subcommand!r}")
        unknown = sorted(set(params.params) - allowed)
        if unknown:
            raise UsageError(f"{args.config} sets unknown keys {unknown}")
    else:
        params = ExperimentConfig(args.subcommand)
    for key in _option_keys(defaults):
        value = getattr(args, f"opt_{key}")
        if value is not None:
            params.set(key, value)
    params.apply_seed_environment(args.seed)
    for key, value in defaults.items():
        if params.get(key) is None:
            params.set(key, value)
    if params.get("seed") is None:
        params.set("seed", LabConfig.OPTION_DEFAULTS["seed"])
    return params


def run(params, out, workers=1):
    """Run the experiment named by ``params`` and write its outputs.

    :raises CheckFailedError: after writing, if the experiment's check failed.

    :rtype: Outcome
    """
    if params.subcommand not in EXPERIMENTS:
        raise UsageError(f"unknown subcommand {params.subcommand!r}")
    runner, _, _ = EXPERIMENTS[params.subcommand]
    try:
        lab = params.lab_config()
    except (TypeError, ValueError) as e:
        raise UsageError(f"invalid numerical option: {e}") from None
    started = time.perf_counter()
    outcome = runner(params, lab, max(1, int(workers)))
    outcome.table.write(out)
    write_summary(out, params.subcommand, outcome.summary, params, VERSION, time.perf_counter() - started)
    if outcome.failure:
        raise CheckFailedError(outcome.failure)
    return outcome


def main(argv=None):
    logging.basicConfig(format='%(asctime)s [%(filename)s:%(lineno)s] %(message)s',
                        datefmt='%Y-%m-%d %H:%M:%S', level=logging.INFO)
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "verbose", False):
            logging.getLogger().setLevel(logging.DEBUG)
        if args.subcommand == "compare-golden":
            if not compare_golden(args.table_a, args.table_b):
                raise CheckFailedError(f"{args.table_a} and {args.table_b} differ")
            return EXIT_OK
        run(resolve_config(args), args.out, args.threads)
    except ValueError as e:
        logger.error("usage error: %s", e)
        return EXIT_USAGE
    except OSError as e:
        logger.error("cannot access file: %s", e)
        return EXIT_USAGE
    except (CheckFailedError, QuadratureError) as e:
        logger.error("check failed: %s", e)
        return EXIT_CHECK_FAILED
    except CapacityError as e:
        logger.error("capacity exceeded: %s", e)
        return EXIT_CAPACITY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
