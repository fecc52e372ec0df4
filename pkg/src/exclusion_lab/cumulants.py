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
"""Fluctuation fields and joint cumulants of the stationary exclusion process.

Rescaled points follow xi^N_t(x) = 2^(dN/2) xi_(4^N t)(2^N x) on the
torus of side 2^N; unrescaled points are lattice sites and lattice times
on the same torus.
"""
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import LabConfig
from .errors import UsageError
from .estimates import BoundReport
from .exclusion import OccupationField, sample_bernoulli_field, unlabelled_trajectory
from .lattice import Geometry, SpaceTimePoint, minimal_image

logger = logging.getLogger(__name__)

MAX_ESTIMATED_ORDER = 4
MAX_ENVELOPE_ORDER = 6


@dataclass(frozen=True)
class CumulantQuery:
    """An estimated joint cumulant of the field at ``points``."""

    points: tuple
    order: int
    estimate: float
    stderr: float
    samples: int


def set_partitions(items):
    """Yield every partition of ``items`` as a list of blocks.

    >>> sum(1 for _ in set_partitions([0, 1, 2, 3]))
    15
    """
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partition in set_partitions(rest):
        yield [[first]] + partition
        for n in range(len(partition)):
            yield partition[:n] + [[first] + partition[n]] + partition[n + 1:]


def cumulant_from_samples(samples):
    """Joint cumulant of the columns of an ``(n, k)`` sample matrix.

    Uses kappa = sum_pi (-1)^(|pi|-1) (|pi|-1)! prod_B E[prod_{i in B} X_i]
    on the centred columns; cumulants of order >= 2 do not see the centring.
    """
    values = np.asarray(samples, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] == 0:
        raise UsageError("samples must be a non-empty (n, k) matrix")
    k = values.shape[1]
    if k >= 2:
        values = values - values.mean(axis=0)
    moments = {}
    total = 0.0
    for partition in set_partitions(range(k)):
        term = float(math.factorial(len(partition) - 1) * (-1) ** (len(partition) - 1))
        for block in partition:
            key = tuple(block)
            if key not in moments:
                moments[key] = float(np.prod(values[:, list(block)], axis=1).mean())
            term *= moments[key]
        total += term
    return total


def batched_cumulant(samples, batches):
    """Cumulant of all rows with a batch-means standard error.

    :rtype: tuple
    :return: ``(estimate, stderr)``
    """
    values = np.asarray(samples, dtype=np.float64)
    if batches < 2 or values.shape[0] < batches:
        raise UsageError(f"{values.shape[0]} samples cannot form {batches} batches")
    per_batch = [cumulant_from_samples(chunk) for chunk in np.array_split(values, batches)]
    return cumulant_from_samples(values), float(np.std(per_batch, ddof=1) / np.sqrt(batches))


def constant_function(c=1.0):
    return lambda points: np.full(np.asarray(points).shape[0], float(c))


def cosine_function(mode=1, axis=0):
    return lambda points: np.cos(2.0 * np.pi * mode * np.asarray(points)[:, axis])


def gaussian_bump(center=0.5, width=0.1):
    """Periodized-by-minimal-image Gaussian bump on the unit torus."""
    def bump(points):
        diff = minimal_image(np.asarray(points, dtype=np.float64) - center, 1.0)
        return np.exp(-np.sum(diff ** 2, axis=-1) / (2.0 * width ** 2))
    return bump


def _level_geometry(level, d):
    return Geometry.dyadic_torus(d, level)


def _grid(g):
    return g.site_coords(np.arange(g.n_sites)) / g.side


def fluctuation_field(f, eta, level, rho):
    """Y^N(f) = 2^(-Nd) sum_x f(x / 2^N) 2^(Nd/2) (eta(x) - rho).

    ``eta`` is an :class:`OccupationField` or a 0/1 array on the torus of
    side 2^N.
    """
    bits = eta.bits if isinstance(eta, OccupationField) else np.asarray(eta)
    d = bits.ndim
    g = _level_geometry(level, d)
    if bits.shape != g.shape:
        raise UsageError(f"field of shape {bits.shape} does not live on level {level}")
    weights = np.asarray(f(_grid(g)), dtype=np.float64)
    return float(weights @ (bits.ravel() - rho)) / 2.0 ** (level * d / 2.0)


def stationary_variance_check(f, level, rho, samples, rng, d=1, chunk=256):
    """Compare the variance of Y^N_0(f) under the product measure with rho (1 - rho) ||f||^2.

    :rtype: tuple
    :return: ``(empirical, limit, z_score)``
    """
    if samples < 1000:
        raise UsageError(f"stationary_variance_check needs at least 1000 samples, got {samples}")
    if not 0.0 < rho < 1.0:
        raise UsageError(f"density must lie in (0, 1), got {rho}")
    g = _level_geometry(level, d)
    weights = np.asarray(f(_grid(g)), dtype=np.float64)
    if not np.any(weights):
        logger.warning("test function vanishes on the level-%d grid; variance check is trivial", level)
        return 0.0, 0.0, 0.0
    limit = rho * (1.0 - rho) * float(weights @ weights) / g.n_sites
    generator = rng.generator()
    squares = []
    for start in range(0, samples, chunk):
        count = min(chunk, samples - start)
        bits = generator.random((count, g.n_sites)) < rho
        y = (bits - rho) @ weights / 2.0 ** (level * d / 2.0)
        squares.append(y * y)
    squares = np.concatenate(squares)
    empirical = float(squares.mean())
    stderr = float(squares.std(ddof=1) / np.sqrt(samples))
    return empirical, limit, (empirical - limit) / stderr


class _Sampler:
    """Site values of one query across replicas, translates and time shifts."""

    def __init__(self, points, level, d, rescaled, shifts):
        self.geometry = _level_geometry(level, d)
        self.scale = 2.0 ** (d * level / 2.0) if rescaled else 1.0
        side = self.geometry.side
        coords = np.array([np.atleast_1d(p.x) for p in points], dtype=np.float64).reshape(len(points), d)
        times = np.array([p.t for p in points], dtype=np.float64)
        if rescaled:
            coords = np.rint(coords * side)
            times = times * 4.0 ** level
        if np.any(times < 0):
            raise UsageError("cumulant points need non-negative times")
        self.sites = self.geometry.wrap(coords.astype(np.int64))
        times = times - times.min()
        stride = max(10.0 * float(times.max()), 1.0)
        grid = times[None, :] + stride * np.arange(shifts)[:, None]
        self.obs_times, inverse = np.unique(grid, return_inverse=True)
        self.obs_index = inverse.reshape(grid.shape)
        every = self.geometry.site_coords(np.arange(self.geometry.n_sites))
        self.translates = np.stack([self.geometry.site_index(every + s) for s in self.sites], axis=1)

    def rows(self, rho, rng):
        eta0 = sample_bernoulli_field(self.geometry, rho, rng.child(0))
        fields = unlabelled_trajectory(eta0, self.obs_times, rng.child(1))
        flat = fields.reshape(len(self.obs_times), -1).astype(np.float64)
        blocks = []
        for shift in self.obs_index:
            blocks.append(np.stack([flat[shift[i], self.translates[:, i]] for i in range(len(shift))], axis=1))
        return (np.vstack(blocks) - rho) * self.scale


def joint_cumulant(points, level, rho, samples, rng, d=None, rescaled=True, shifts=4, config=None, workers=1):
    """Estimate the joint cumulant of the field at ``points``.

    Each of ``samples`` replicas draws a stationary field, runs one Harris
    trajectory and contributes the field at every torus translate of the
    query and at ``shifts`` time-shifted copies spaced by ten times the
    query's time span. Standard errors come from ``config.batches`` batches
    of whole replicas.

    :type points: list of exclusion_lab.lattice.SpaceTimePoint
    :param points: 2 to 4 query points.

    :type rho: float
    :param rho: Density of the product measure; ``None`` uses ``config.rho``.

    :rtype: CumulantQuery
    """
    config = config or LabConfig()
    rho = config.rho if rho is None else rho
    points = tuple(points)
    k = len(points)
    if not 2 <= k <= MAX_ESTIMATED_ORDER:
        raise UsageError(f"cumulant order must lie in [2, {MAX_ESTIMATED_ORDER}], got {k}")
    if not 0.0 < rho < 1.0:
        raise UsageError(f"density must lie in (0, 1), got {rho}")
    if samples < config.batches:
        raise UsageError(f"{samples} replicas cannot form {config.batches} batches")
    d = d or len(np.atleast_1d(points[0].x))
    sampler = _Sampler(points, level, d, rescaled, shifts)

    def run(r):
        return sampler.rows(rho, rng.child(r))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_replica = list(pool.map(run, range(samples)))
    else:
        per_replica = [run(r) for r in range(samples)]
    estimate = cumulant_from_samples(np.vstack(per_replica))
    per_batch = []
    for members in np.array_split(np.arange(samples), config.batches):
        per_batch.append(cumulant_from_samples(np.vstack([per_replica[r] for r in members])))
    stderr = float(np.std(per_batch, ddof=1) / np.sqrt(config.batches))
    logger.debug("cumulant of order %d from %d replicas x %d rows", k, samples, per_replica[0].shape[0])
    return CumulantQuery(points, k, float(estimate), stderr, int(samples))


def _envelope_sum(points, factor):
    k = len(points)
    if not 2 <= k <= MAX_ENVELOPE_ORDER:
        raise UsageError(f"envelope order must lie in [2, {MAX_ENVELOPE_ORDER}], got {k}")
    total = 0.0
    for order in itertools.permutations(range(k)):
        term = 1.0
        for n in range(k):
            term *= factor(points[order[n]], points[order[(n + 1) % k]])
        total += term
    return total


def cumulant_envelope(points, level, d, c=1.0):
    """C sum_sigma prod_i (|t_sigma(i+1) - t_sigma(i)|^(1/2) + |x_sigma(i+1) - x_sigma(i)| v 2^-N)^(-d/2).

    Points are rescaled; spatial differences use the unit-torus minimal image
    and the product is cyclic.

    >>> p = SpaceTimePoint(0.0, (0.0, 0.0), rescaled=True)
    >>> cumulant_envelope([p, p], 2, 2)
    32.0
    """
    floor = 2.0 ** -level

    def factor(p, q):
        gap = minimal_image(np.asarray(q.x, dtype=np.float64) - np.asarray(p.x, dtype=np.float64), 1.0)
        spread = np.sqrt(abs(q.t - p.t)) + max(float(np.linalg.norm(gap)), floor)
        return spread ** (-d / 2.0)

    return c * _envelope_sum(list(points), factor)


def unrescaled_envelope(points, d, c=1.0, g=None):
    """C sum_sigma prod_i (1 + |t_sigma(i+1) - t_sigma(i)| + |x_sigma(i+1) - x_sigma(i)|^2)^(-d/4) on Z^d."""
    def factor(p, q):
        gap = np.asarray(q.x, dtype=np.float64) - np.asarray(p.x, dtype=np.float64)
        if g is not None:
            gap = g.minimal_image(gap)
        return (1.0 + abs(q.t - p.t) + float(gap @ gap)) ** (-d / 4.0)

    return c * _envelope_sum(list(points), factor)


def envelope_ratio_scan(configurations, levels, rho, samples, rng, d, shifts=4, config=None, workers=1):
    """Ratios of estimated cumulants to the envelope with C = 1, per level.

    Each recorded ratio is |kappa| / envelope + 2 stderr / envelope. A
    configuration whose stderr is not below a fifth of its envelope is
    excluded and listed in the metadata. ``rho=None`` takes the density from
    ``config.rho``.

    :rtype: exclusion_lab.estimates.BoundReport
    """
    config = config or LabConfig()
    report = BoundReport(theta=float("nan"))
    rho = config.rho if rho is None else rho
    by_level = {}
    excluded = []
    for level in levels:
        best = 0.0
        for number, points in enumerate(configurations):
            stream = rng.child(level).child(number)
            query = joint_cumulant(points, level, rho, samples, stream, d=d, shifts=shifts,
                                   config=config, workers=workers)
            envelope = cumulant_envelope(points, level, d)
            if not query.stderr < 0.2 * envelope:
                logger.warning("configuration %d at level %d is noise dominated (stderr %.3g, envelope %.3g)",
                               number, level, query.stderr, envelope)
                excluded.append((level, number))
                continue
            ratio = (abs(query.estimate) + 2.0 * query.stderr) / envelope
            report.grid.append((level, number, tuple((p.t, tuple(np.atleast_1d(p.x))) for p in points)))
            report.ratios.append(float(ratio))
            best = max(best, ratio)
        by_level[level] = best
    fits = [v for v in by_level.values() if v > 0]
    report.metadata = {
        "d": d,
        "rho": rho,
        "c_fit_by_level": by_level,
        "excluded": excluded,
        "growth": max(fits) / min(fits) if fits else float("nan"),
    }
    return report.check()
