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
"""Monte Carlo simulation of the symmetric exclusion process.

Both the unlabelled occupation process and the labelled k-particle process
are realized by the Harris construction: every unoriented bond carries a
rate-1 Poisson clock and a ring exchanges the contents of its two ends.
All random numbers for a run are drawn up front from a numpy ``Generator``
and the swap sequence is applied by a compiled loop.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import UsageError
from .lattice import Geometry, ParticleConfig

logger = logging.getLogger(__name__)


class RngStream:
    """A reproducible random stream identified by ``(seed, stream_id)``.

    Children derived with :meth:`child` are statistically independent of
    each other and of their parent.

    :type seed: int
    :param seed: Non-negative root seed (up to 64 bits).

    :type stream_id: int
    :param stream_id: Stream number under the root seed.
    """

    def __init__(self, seed, stream_id=0, path=()):
        if int(seed) < 0 or int(stream_id) < 0:
            raise UsageError(f"seed and stream id must be non-negative, got {seed}, {stream_id}")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.path = tuple(int(p) for p in path)

    def generator(self):
        """A fresh ``numpy.random.Generator`` positioned at the start of the stream."""
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,) + self.path)
        return np.random.Generator(np.random.PCG64(sequence))

    def child(self, index):
        return RngStream(self.seed, self.stream_id, self.path + (int(index),))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, path={self.path})"


class OccupationField:
    """Occupation bits of the unlabelled process on a torus.

    :type bits: numpy.ndarray
    :param bits: 0/1 array of shape ``geometry.shape``.

    :type geometry: exclusion_lab.lattice.Geometry
    :param geometry: The torus carrying the field.

    :type rho: float
    :param rho: Density used when the field was sampled, if any.
    """

    def __init__(self, bits, geometry, rho=None):
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.shape != geometry.shape:
            raise UsageError(f"field shape {bits.shape} does not match geometry {geometry!r}")
        if np.any(bits > 1):
            raise UsageError("occupation values must be 0 or 1")
        self.bits = bits
        self.geometry = geometry
        self.rho = rho

    def count(self):
        return int(self.bits.sum())

    def occupied_sites(self):
        """Coordinates of occupied sites in row-major order."""
        return np.argwhere(self.bits == 1).astype(np.int64)

    def copy(self):
        return OccupationField(self.bits.copy(), self.geometry, self.rho)


@dataclass(frozen=True)
class LabelledState:
    """A state of the labelled exclusion process."""

    config: ParticleConfig

    @property
    def positions(self):
        return self.config.positions

    @property
    def geometry(self):
        return self.config.geometry

    @property
    def k(self):
        return self.config.k


@dataclass
class EventLog:
    """Bounded record of simulation events; ``dropped`` counts the overflow."""

    capacity: int
    events: list = field(default_factory=list)
    dropped: int = 0

    def extend(self, rows):
        room = max(self.capacity - len(self.events), 0)
        self.events.extend(rows[:room])
        self.dropped += max(len(rows) - room, 0)


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo estimate with its standard error."""

    value: float
    stderr: float
    samples: int


def _check_rho(rho):
    if not 0.0 < rho < 1.0:
        raise UsageError(f"density must lie in (0, 1), got {rho}")


def _check_time(t):
    if t < 0:
        raise UsageError(f"time must be non-negative, got {t}")


def _as_state(s, g=None):
    if isinstance(s, LabelledState):
        return s
    if isinstance(s, ParticleConfig):
        return LabelledState(s)
    if g is None:
        raise UsageError("a geometry is needed to interpret raw positions")
    return LabelledState(ParticleConfig(s, g))


def sample_bernoulli_field(g, rho, rng):
    """Draw an occupation field from the Bernoulli product measure of density ``rho``.

    :type g: exclusion_lab.lattice.Geometry
    :param g: A torus.

    :type rng: RngStream
    :param rng: Stream supplying the randomness.

    :rtype: OccupationField
    """
    _check_rho(rho)
    if not g.is_torus:
        raise UsageError("stationary fields are only sampled on a torus")
    bits = (rng.generator().random(g.shape) < rho).astype(np.uint8)
    return OccupationField(bits, g, rho)


def swap_sigma(x, y, s):
    """Exchange the contents of the neighbouring sites ``x`` and ``y``.

    :rtype: LabelledState
    """
    s = _as_state(s)
    g = s.geometry
    if not g.are_neighbours(x, y):
        raise UsageError(f"sites {x!r} and {y!r} are not nearest neighbours")
    x = g.check_point(x)
    y = g.check_point(y)
    pos = s.positions
    at_x = np.all(pos == x, axis=1)
    at_y = np.all(pos == y, axis=1)
    new = pos.copy()
    new[at_x] = y
    new[at_y] = x
    return LabelledState(ParticleConfig(new, g))


def map_delta(i, j, s):
    """Overwrite particle ``j``'s position with particle ``i``'s (0-based labels).

    The result may contain a collision and is returned as a plain
    ``(k, d)`` array.
    """
    pos = s.positions if isinstance(s, (LabelledState, ParticleConfig)) else np.asarray(s, dtype=np.int64)
    if pos.ndim == 1:
        pos = pos.reshape(-1, 1)
    k = pos.shape[0]
    if i == j:
        raise UsageError("map_delta needs two different labels")
    if not (0 <= i < k and 0 <= j < k):
        raise UsageError(f"labels {i}, {j} out of range for {k} particles")
    out = np.array(pos, dtype=np.int64, copy=True)
    out[j] = out[i]
    return out


def torus_bonds(g):
    """Unoriented bonds of the torus as an ``(n_sites * d, 2)`` array of site numbers.

    Bond ``c * n_sites + s`` joins site ``s`` with ``s + e_c``.
    """
    sites = np.arange(g.n_sites, dtype=np.int64)
    coords = g.site_coords(sites)
    ends = [g.site_index(coords + g.unit(axis)) for axis in range(g.dimension)]
    return np.stack([np.tile(sites, g.dimension), np.concatenate(ends)], axis=1)


@njit(cache=True)
def _apply_swaps(bits, left, right):
    for n in range(left.shape[0]):
        a = left[n]
        b = right[n]
        tmp = bits[a]
        bits[a] = bits[b]
        bits[b] = tmp


@njit(cache=True)
def _run_labelled(positions, side, offsets, who, axis, sign, coin):
    """Apply proposed particle moves to every replica in ``positions``.

    A proposal moves particle ``who`` one step; when the target is occupied
    the two labels swap with probability 1/2, so that a bond joining two
    particles, proposed from both ends, still rings at rate 1.
    """
    replicas, k, d = positions.shape
    for r in range(replicas):
        for n in range(offsets[r], offsets[r + 1]):
            i = who[n]
            c = axis[n]
            target = positions[r, i, c] + sign[n]
            if side > 0:
                target = target % side
            other = -1
            for j in range(k):
                if j == i:
                    continue
                same = True
                for q in range(d):
                    value = target if q == c else positions[r, i, q]
                    if positions[r, j, q] != value:
                        same = False
                        break
                if same:
                    other = j
                    break
            if other >= 0:
                if coin[n] >= 0.5:
                    continue
                for q in range(d):
                    tmp = positions[r, i, q]
                    positions[r, i, q] = positions[r, other, q]
                    positions[r, other, q] = tmp
            else:
                positions[r, i, c] = target


class _Proposals:
    """Pre-drawn proposal stream for a batch of labelled replicas."""

    def __init__(self, generator, replicas, k, d, t):
        rate = 2.0 * d * k
        counts = generator.poisson(rate * t, size=replicas)
        self.offsets = np.zeros(replicas + 1, dtype=np.int64)
        np.cumsum(counts, out=self.offsets[1:])
        total = int(self.offsets[-1])
        self.times = generator.uniform(0.0, t, size=total) if t > 0 else np.zeros(0)
        for r in range(replicas):
            lo, hi = self.offsets[r], self.offsets[r + 1]
            self.times[lo:hi].sort()
        self.who = generator.integers(0, k, size=total).astype(np.int64)
        self.axis = generator.integers(0, d, size=total).astype(np.int64)
        self.sign = (2 * generator.integers(0, 2, size=total) - 1).astype(np.int64)
        self.coin = generator.random(total)


def simulate_labelled_batch(s0, t, replicas, rng, g=None):
    """Final positions of ``replicas`` independent labelled runs from ``s0``.

    :rtype: numpy.ndarray
    :return: Array of shape ``(replicas, k, d)``.
    """
    _check_time(t)
    s0 = _as_state(s0, g)
    geometry = s0.geometry
    k, d = s0.positions.shape
    proposals = _Proposals(rng.generator(), replicas, k, d, float(t))
    positions = np.repeat(s0.positions[None, :, :], replicas, axis=0).copy()
    side = geometry.side if geometry.is_torus else 0
    _run_labelled(positions, side, proposals.offsets, proposals.who, proposals.axis,
                  proposals.sign, proposals.coin)
    logger.debug("ran %d labelled replicas with %d proposals", replicas, int(proposals.offsets[-1]))
    return positions, proposals


def simulate_labelled(s0, t, rng, g=None, event_log=None):
    """Run the labelled exclusion process from ``s0`` up to time ``t``.

    On Z^d the coordinates are unbounded integers, so no particle ever
    meets a boundary.

    :type s0: LabelledState
    :param s0: Initial state (a ParticleConfig or raw positions with ``g``).

    :type event_log: EventLog
    :param event_log: Optional bounded log receiving ``(time, label, axis, step)``.

    :rtype: LabelledState
    """
    s0 = _as_state(s0, g)
    positions, proposals = simulate_labelled_batch(s0, t, 1, rng)
    final = positions[0]
    assert len({tuple(row) for row in final.tolist()}) == s0.k, "two labelled particles share a site"
    if event_log is not None:
        rows = list(zip(proposals.times.tolist(), proposals.who.tolist(),
                        proposals.axis.tolist(), proposals.sign.tolist()))
        event_log.extend(rows)
    return LabelledState(ParticleConfig(final, s0.geometry))


class _HarrisClocks:
    """Bond rings of the whole torus over [0, t], ordered by (time, bond id)."""

    def __init__(self, generator, n_bonds, t):
        count = generator.poisson(n_bonds * t) if t > 0 else 0
        times = generator.uniform(0.0, t, size=count)
        bonds = generator.integers(0, n_bonds, size=count).astype(np.int64)
        order = np.lexsort((bonds, times))
        self.times = times[order]
        self.bonds = bonds[order]


def unlabelled_trajectory(eta0, times, rng, event_log=None):
    """Occupation fields of one Harris trajectory at the sorted observation ``times``.

    :rtype: numpy.ndarray
    :return: uint8 array of shape ``(len(times),) + geometry.shape``.
    """
    times = np.asarray(times, dtype=np.float64)
    if times.ndim != 1 or times.size == 0:
        raise UsageError("observation times must be a non-empty 1-d sequence")
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise UsageError("observation times must be non-negative and sorted")
    g = eta0.geometry
    bonds = torus_bonds(g)
    clocks = _HarrisClocks(rng.generator(), len(bonds), float(times[-1]))
    left = bonds[clocks.bonds, 0]
    right = bonds[clocks.bonds, 1]
    stops = np.searchsorted(clocks.times, times, side="right")
    flat = eta0.bits.ravel().copy()
    out = np.empty((len(times),) + g.shape, dtype=np.uint8)
    start = 0
    for n, stop in enumerate(stops):
        _apply_swaps(flat, left[start:stop], right[start:stop])
        out[n] = flat.reshape(g.shape)
        start = stop
    if event_log is not None:
        event_log.extend(list(zip(clocks.times.tolist(), left.tolist(), right.tolist())))
    logger.debug("applied %d bond rings on %d bonds", len(clocks.times), len(bonds))
    return out


def simulate_unlabelled(eta0, t, rng, event_log=None):
    """Run the unlabelled process from ``eta0`` up to time ``t``.

    :type eta0: OccupationField
    :param eta0: Initial field on a torus.

    :type t: float
    :param t: Final time, t >= 0.

    :rtype: OccupationField
    """
    _check_time(t)
    bits = unlabelled_trajectory(eta0, [float(t)], rng, event_log=event_log)[0]
    return OccupationField(bits, eta0.geometry, eta0.rho)


def walker_displacements(t, d, samples, generator):
    """Displacements of ``samples`` independent rate-1-per-neighbour walkers at time ``t``."""
    jumps = generator.poisson(2.0 * d * t, size=samples)
    per_axis = generator.multinomial(jumps, [1.0 / d] * d) if d > 1 else jumps[:, None]
    plus = generator.binomial(per_axis, 0.5)
    return 2 * plus - per_axis


def occupancy_covariance_oracle(x, t, rho, samples, rng, g=None):
    """Estimate Cov(eta_t(x), eta_0(0)) = rho (1 - rho) p_t(0, x) with one dual walker.

    :type g: exclusion_lab.lattice.Geometry
    :param g: Geometry of ``x``; defaults to Z^d with d = len(x).

    :rtype: Estimate
    """
    _check_rho(rho)
    _check_time(t)
    if samples < 1:
        raise UsageError("occupancy_covariance_oracle needs at least one sample")
    x = np.atleast_1d(np.asarray(x, dtype=np.int64))
    g = g or Geometry.infinite(len(x))
    x = g.check_point(x)
    steps = walker_displacements(float(t), g.dimension, samples, rng.generator())
    hits = np.all(g.wrap(steps) == x, axis=1)
    freq = float(hits.mean())
    scale = rho * (1.0 - rho)
    stderr = scale * np.sqrt(freq * (1.0 - freq) / samples)
    return Estimate(scale * freq, float(stderr), int(samples))
