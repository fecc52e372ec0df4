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
"""Renormalized lattice parabolic Anderson model in an exclusion environment.

The level-N equation on the rescaled torus is

    du/dt = Delta_N u - V u,   V = 2^(Nd/2) (xi^N - rho) - C_N,

with Delta_N = 4^N Delta. Time stepping is Strang splitting with the
potential frozen at the start of each step.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.stats import poisson

from .config import LabConfig
from .errors import QuadratureError, UsageError
from .exclusion import RngStream, sample_bernoulli_field, unlabelled_trajectory
from .kernels.walk import periodic_kernel_1d
from .lattice import Geometry, holder_norm

logger = logging.getLogger(__name__)

INITIAL_CONDITIONS = ("constant", "cosine", "point")


@dataclass(frozen=True)
class FieldSnapshot:
    """u^N(t, .) on the level-N torus."""

    t: float
    values: np.ndarray
    level: int


@dataclass
class PamConfig:
    """Parameters of one level-N solve.

    ``renorm`` is either ``"computed"`` (C_N from :func:`renorm_constant`
    with the solve horizon) or a number used as C_N.
    """

    level: int
    d: int
    rho: float = 0.5
    horizon: float = 1.0
    dt: float = None
    initial: str = "constant"
    renorm: object = "computed"
    seed: int = 0
    snapshot_times: list = field(default_factory=list)

    def __post_init__(self):
        if self.horizon <= 0:
            raise UsageError(f"horizon must be positive, got {self.horizon}")
        if self.dt is None:
            self.dt = 4.0 ** -self.level / 8.0
        if not 0 < self.dt <= 4.0 ** -self.level:
            raise UsageError(f"time step {self.dt} exceeds the environment-freezing bound 4^-N = {4.0 ** -self.level}")
        if self.initial not in INITIAL_CONDITIONS:
            raise UsageError(f"unknown initial condition {self.initial!r}; choose from {INITIAL_CONDITIONS}")
        if not 0.0 < self.rho < 1.0:
            raise UsageError(f"density must lie in (0, 1), got {self.rho}")
        if not self.snapshot_times:
            self.snapshot_times = [self.horizon]
        if min(self.snapshot_times) < 0 or max(self.snapshot_times) > self.horizon:
            raise UsageError("snapshot times must lie in [0, horizon]")

    @property
    def geometry(self):
        return Geometry.dyadic_torus(self.d, self.level)


def _return_probability(s, side, d, tolerance):
    return periodic_kernel_1d(2.0 * s, side, tolerance)[0] ** d


def renorm_constant(level, horizon, d, config=None):
    """C_N = 4^N int_0^T p_(2 4^N t)(0) dt = int_0^(4^N T) p_(2s)(0) ds on the level-N torus.

    The integral is split at powers of two and each piece is integrated
    adaptively.

    :raises QuadratureError: if a piece misses a relative error of 1e-10.
    """
    if horizon <= 0:
        raise UsageError(f"horizon must be positive, got {horizon}")
    config = config or LabConfig()
    side = 2 ** int(level)
    upper = 4.0 ** level * horizon
    edges = [0.0] + [2.0 ** n for n in range(0, int(math.ceil(math.log2(upper))) + 1) if 2.0 ** n < upper] + [upper]
    total = 0.0
    evaluations = 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        value, error, info = quad(_return_probability, lo, hi, args=(side, d, config.image_tolerance),
                                  epsabs=0.0, epsrel=1e-10, limit=200, full_output=True)[:3]
        evaluations += info["neval"]
        if error > 1e-8 * max(abs(value), 1e-300):
            raise QuadratureError(f"renormalization integral on [{lo}, {hi}] did not converge", error)
        total += value
    logger.debug("C_N at level %d, d=%d used %d integrand calls", level, d, evaluations)
    return total


def renorm_constant_spectral(level, horizon, d):
    """Closed form of :func:`renorm_constant` from the torus Fourier modes.

    With lambda_j = sum_c (1 - cos(2 pi j_c / L)),
    C_N = L^-d [S + sum_{j != 0} (1 - exp(-4 S lambda_j)) / (4 lambda_j)], S = 4^N T.
    """
    side = 2 ** int(level)
    upper = 4.0 ** level * horizon
    line = 1.0 - np.cos(2.0 * np.pi * np.arange(side) / side)
    rest = np.zeros(1)
    for _ in range(d - 1):
        rest = np.add.outer(rest, line).ravel()
    total = upper
    # one slab of modes per leading coordinate
    for first in line:
        lam = first + rest
        lam = lam[lam > 0]
        total += float(np.sum(-np.expm1(-4.0 * upper * lam) / (4.0 * lam)))
    return total / side ** d


def _neighbour_mean(values):
    d = values.ndim
    total = np.zeros_like(values)
    for axis in range(d):
        total += np.roll(values, 1, axis=axis) + np.roll(values, -1, axis=axis)
    return total / (2 * d)


def heat_flow(values, dt, level, d=None, tolerance=1e-12):
    """Apply exp(dt Delta_N) by uniformization at rate 2d 4^N."""
    if dt < 0:
        raise UsageError(f"time step must be non-negative, got {dt}")
    values = np.asarray(values, dtype=np.float64)
    d = d or values.ndim
    if values.shape != (2 ** level,) * d:
        raise UsageError(f"field of shape {values.shape} does not live on level {level}")
    rate_time = 2.0 * d * 4.0 ** level * dt
    if rate_time == 0:
        return values.copy()
    depth = int(poisson.isf(tolerance, rate_time)) + 1
    weights = poisson.pmf(np.arange(depth + 1), rate_time)
    out = weights[0] * values
    current = values
    for weight in weights[1:]:
        current = _neighbour_mean(current)
        out = out + weight * current
    return out


def initial_condition(kind, level, d, scale=1.0):
    """Grid initial data: ``constant``, ``cosine`` (smooth bump at the centre) or ``point`` (mass at site 0)."""
    g = Geometry.dyadic_torus(d, level)
    if kind == "constant":
        return np.full(g.shape, float(scale))
    if kind == "cosine":
        x = g.site_coords(np.arange(g.n_sites)) / g.side
        bump = np.prod((1.0 - np.cos(2.0 * np.pi * x)) / 2.0, axis=1)
        return scale * bump.reshape(g.shape)
    if kind == "point":
        out = np.zeros(g.shape)
        out[(0,) * d] = scale
        return out
    raise UsageError(f"unknown initial condition {kind!r}; choose from {INITIAL_CONDITIONS}")


class FrozenEnvironment:
    """A time-independent centred field xi^N - rho."""

    def __init__(self, centred):
        self.centred = np.asarray(centred, dtype=np.float64)

    @classmethod
    def zero(cls, level, d):
        return cls(np.zeros((2 ** level,) * d))

    @classmethod
    def with_potential(cls, potential, level, d):
        """Environment whose potential is ``potential`` when C_N = 0."""
        return cls(np.asarray(potential, dtype=np.float64) / 2.0 ** (level * d / 2.0))

    def centred_fields(self, times):
        return np.broadcast_to(self.centred, (len(times),) + self.centred.shape)


class SsepEnvironment:
    """Stationary exclusion environment run at speed 4^N, centred at ``rho``."""

    def __init__(self, level, d, rho, rng):
        self.level = level
        self.geometry = Geometry.dyadic_torus(d, level)
        self.rho = rho
        self.rng = rng

    def centred_fields(self, times):
        eta0 = sample_bernoulli_field(self.geometry, self.rho, self.rng.child(0))
        lattice_times = 4.0 ** self.level * np.asarray(times, dtype=np.float64)
        fields = unlabelled_trajectory(eta0, lattice_times, self.rng.child(1))
        return fields.astype(np.float64) - self.rho


def _step_schedule(cfg):
    """Step start times, step sizes and the step count reached at each snapshot."""
    marks = sorted(set([0.0] + [float(t) for t in cfg.snapshot_times]))
    starts, sizes, reached = [], [], {0.0: 0}
    for lo, hi in zip(marks[:-1], marks[1:]):
        count = max(1, int(math.ceil((hi - lo) / cfg.dt - 1e-9)))
        size = (hi - lo) / count
        starts.extend(lo + size * n for n in range(count))
        sizes.extend([size] * count)
        reached[hi] = len(starts)
    return np.asarray(starts), np.asarray(sizes), reached


def pam_solve(cfg, environment=None, config=None, initial=None):
    """Solve the level-N equation and return snapshots at ``cfg.snapshot_times``.

    :type cfg: PamConfig
    :param cfg: Level, horizon, step and initial condition.

    :type environment: FrozenEnvironment or SsepEnvironment
    :param environment: Source of xi^N - rho; an exclusion environment
        seeded by ``cfg.seed`` when omitted.

    :type initial: numpy.ndarray
    :param initial: Initial grid data overriding ``cfg.initial``.

    :rtype: list of FieldSnapshot
    """
    config = config or LabConfig()
    if environment is None:
        environment = SsepEnvironment(cfg.level, cfg.d, cfg.rho, RngStream(cfg.seed))
    renorm = renorm_constant(cfg.level, cfg.horizon, cfg.d, config) if cfg.renorm == "computed" else float(cfg.renorm)
    u = initial_condition(cfg.initial, cfg.level, cfg.d) if initial is None else np.array(initial, dtype=np.float64)
    starts, sizes, reached = _step_schedule(cfg)
    fields = environment.centred_fields(starts) if len(starts) else []
    amplitude = 2.0 ** (cfg.level * cfg.d / 2.0)
    wanted = {reached[float(t)]: float(t) for t in cfg.snapshot_times}
    snapshots = []
    if 0 in wanted:
        snapshots.append(FieldSnapshot(0.0, u.copy(), cfg.level))
    for n, (size, centred) in enumerate(zip(sizes, fields)):
        half = np.exp(-(amplitude * centred - renorm) * size / 2.0)
        u = half * heat_flow(half * u, size, cfg.level, cfg.d, config.kernel_tolerance)
        if n + 1 in wanted:
            snapshots.append(FieldSnapshot(wanted[n + 1], u.copy(), cfg.level))
    if not np.all(np.isfinite(u)):
        raise UsageError("solution overflowed; shorten the horizon or supply a smaller C_N")
    logger.debug("solved level %d over %d steps with C_N=%.6g", cfg.level, len(sizes), renorm)
    return snapshots


@dataclass
class ConvergenceReport:
    """Cross-level comparison of solution statistics."""

    distance: float
    stderr: float
    sup_distance: float
    means: dict


def _statistics(values, level, d, eta_bar, test):
    g = Geometry.dyadic_torus(d, level)
    x = g.site_coords(np.arange(g.n_sites)) / g.side
    flat = values.ravel()
    pairing = float(flat @ test(x)) / g.n_sites
    return np.array([pairing, float(flat.mean()), float((flat ** 2).mean()), holder_norm(values, eta_bar)])


def _restrict(values, level, coarse):
    step = 2 ** (level - coarse)
    return values[(slice(None, None, step),) * values.ndim]


def convergence_probe(cfg_a, cfg_b, eta_bar, horizon, replicas=1, frozen=False, config=None, test=None):
    """Compare solutions at two levels through moments of bounded functionals.

    Each replica solves both levels with independent environments; the
    distance is the largest difference of replica means over the
    statistics (pairing with a smooth test function, mean, mean square,
    discrete Hölder norm of u(T)). ``sup_distance`` is the sup over the
    coarse grid of the difference of replica-mean solutions.

    :rtype: ConvergenceReport
    """
    if cfg_a.horizon != horizon or cfg_b.horizon != horizon:
        raise UsageError(f"both solves must share the horizon {horizon}")
    if cfg_a.d != cfg_b.d:
        raise UsageError("both solves must share the dimension")
    test = test or (lambda x: np.prod(np.cos(2.0 * np.pi * x), axis=1))
    coarse = min(cfg_a.level, cfg_b.level)
    stats, finals = {}, {}
    for label, cfg in (("a", cfg_a), ("b", cfg_b)):
        rows, mean_field = [], 0.0
        for r in range(replicas):
            if frozen:
                environment = FrozenEnvironment.zero(cfg.level, cfg.d)
            else:
                environment = SsepEnvironment(cfg.level, cfg.d, cfg.rho, RngStream(cfg.seed).child(r))
            final = pam_solve(_final_only(cfg), environment, config)[-1].values
            rows.append(_statistics(final, cfg.level, cfg.d, eta_bar, test))
            mean_field = mean_field + _restrict(final, cfg.level, coarse) / replicas
        stats[label] = np.array(rows)
        finals[label] = mean_field
    diff = np.abs(stats["a"].mean(axis=0) - stats["b"].mean(axis=0))
    if replicas > 1:
        spread = np.sqrt(stats["a"].var(axis=0, ddof=1) / replicas + stats["b"].var(axis=0, ddof=1) / replicas)
    else:
        spread = np.zeros_like(diff)
    worst = int(np.argmax(diff))
    means = {"a": stats["a"].mean(axis=0).tolist(), "b": stats["b"].mean(axis=0).tolist()}
    return ConvergenceReport(float(diff[worst]), float(spread[worst]),
                             float(np.max(np.abs(finals["a"] - finals["b"]))), means)


def _final_only(cfg):
    return PamConfig(level=cfg.level, d=cfg.d, rho=cfg.rho, horizon=cfg.horizon, dt=cfg.dt,
                     initial=cfg.initial, renorm=cfg.renorm, seed=cfg.seed, snapshot_times=[cfg.horizon])
