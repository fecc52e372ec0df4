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
"""Exclusion kernels by uniformization and by Monte Carlo."""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.stats import poisson

from ..config import LabConfig
from ..errors import UsageError
from ..exclusion import Estimate, simulate_labelled_batch
from ..lattice import ParticleConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KernelRow:
    """The distribution p_t(x, .) over an enumerated state space.

    ``tail`` bounds the probability mass missing from ``probabilities``:
    the uniformization truncation and, on a window of Z^d, the mass killed
    at the window edge.
    """

    base: ParticleConfig
    t: float
    probabilities: np.ndarray
    index: object
    tail: float

    def value(self, y):
        return float(self.probabilities[self.index.index_of(y)])

    def total(self):
        return float(self.probabilities.sum())


def _truncation(rate_time, tolerance):
    """Poisson weights 0..n with a tail beyond n below ``tolerance``."""
    if rate_time == 0:
        return np.ones(1)
    depth = int(poisson.isf(tolerance, rate_time)) + 1
    return poisson.pmf(np.arange(depth + 1), rate_time)


def uniformized_propagate(generator, start, times, tolerance):
    """Row vectors ``start @ exp(t L)`` for every ``t`` in ``times``.

    The jump-chain powers are shared by all requested times.

    :type generator: exclusion_lab.kernels.states.GeneratorMatrix
    :param generator: Generator on the state space of ``start``.

    :type start: numpy.ndarray
    :param start: Initial row vector.

    :rtype: list of numpy.ndarray
    """
    times = [float(t) for t in times]
    if any(t < 0 for t in times):
        raise UsageError(f"times must be non-negative, got {times}")
    rate = generator.uniform_rate
    weights = [_truncation(rate * t, tolerance) for t in times]
    depth = max(len(w) for w in weights)
    jump_t = generator.jump_transpose() if depth > 1 else None
    results = [np.zeros_like(start, dtype=np.float64) for _ in times]
    vector = np.asarray(start, dtype=np.float64)
    for n in range(depth):
        if n:
            vector = jump_t @ vector
        for out, w in zip(results, weights):
            if n < len(w):
                out += w[n] * vector
    logger.debug("uniformized %d states over %d jump steps at rate %g", len(vector), depth, rate)
    return results


def exclusion_kernel_exact(x, t, idx, lmat, config=None):
    """Row p_t(x, .) of the labelled exclusion kernel.

    :type x: exclusion_lab.lattice.ParticleConfig
    :param x: Base configuration, enumerated in ``idx``.

    :type lmat: exclusion_lab.kernels.states.GeneratorMatrix
    :param lmat: Generator built on ``idx``.

    :rtype: KernelRow
    """
    config = config or LabConfig()
    if t < 0:
        raise UsageError(f"time must be non-negative, got {t}")
    start = np.zeros(len(idx))
    start[idx.index_of(x)] = 1.0
    (row,) = uniformized_propagate(lmat, start, [t], config.kernel_tolerance)
    base = x if isinstance(x, ParticleConfig) else ParticleConfig(x, idx.geometry)
    return KernelRow(base, float(t), row, idx, max(0.0, 1.0 - float(row.sum())))


def exclusion_kernel_mc(x, t, targets, samples, rng, g=None):
    """Empirical p_t(x, y) for each target ``y`` from ``samples`` labelled runs.

    :rtype: list of exclusion_lab.exclusion.Estimate
    """
    if samples < 1:
        raise UsageError("exclusion_kernel_mc needs at least one sample")
    base = x if isinstance(x, ParticleConfig) else ParticleConfig(x, g)
    finals, _ = simulate_labelled_batch(base, t, int(samples), rng)
    geometry = base.geometry
    out = []
    for y in targets:
        target = y if isinstance(y, ParticleConfig) else ParticleConfig(y, geometry)
        hits = np.all(geometry.wrap(finals) == target.positions, axis=(1, 2))
        freq = float(hits.mean())
        out.append(Estimate(freq, float(np.sqrt(freq * (1.0 - freq) / samples)), int(samples)))
    return out
