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
"""Labelled state spaces and the exclusion generator."""
import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.stats import poisson

from ..config import LabConfig
from ..errors import CapacityError, UsageError
from ..lattice import ParticleConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Window:
    """Inclusive box ``lo <= x <= hi`` of Z^d."""

    lo: tuple
    hi: tuple

    @classmethod
    def around(cls, points, radius):
        points = np.atleast_2d(np.asarray(points, dtype=np.int64))
        return cls(tuple((points.min(axis=0) - radius).tolist()), tuple((points.max(axis=0) + radius).tolist()))

    @property
    def shape(self):
        return tuple(h - l + 1 for l, h in zip(self.lo, self.hi))

    def grow(self, margin):
        return Window(tuple(l - margin for l in self.lo), tuple(h + margin for h in self.hi))


def window_for(x, t, k, d, tail=1e-10):
    """Window around ``x`` that a killed k-particle run leaves with probability < ``tail``.

    Every particle moves at most once per event and events occur at total
    rate at most 2dk, so exiting a box at distance R + 1 needs more than R
    events of a Poisson(2dk t) count.
    """
    if t < 0:
        raise UsageError(f"time must be non-negative, got {t}")
    radius = int(poisson.isf(tail, 2.0 * d * k * t)) if t > 0 else 0
    return Window.around(np.asarray(x, dtype=np.int64).reshape(-1, d), radius)


class StateIndex:
    """Lexicographic enumeration of ordered k-tuples of distinct sites.

    On a torus the sites are all of Z_L^d; on Z^d they are those of a
    :class:`Window`. Site numbers are row-major and a state's code is its
    mixed-radix number, so codes increase with the enumeration order.

    :type k: int
    :param k: Number of labelled particles.

    :type geometry: exclusion_lab.lattice.Geometry
    :param geometry: A torus, or Z^d together with ``window``.
    """

    def __init__(self, k, geometry, window=None, config=None):
        config = config or LabConfig()
        if k < 1:
            raise UsageError(f"need at least one particle, got k={k}")
        if geometry.is_torus:
            if window is not None:
                raise UsageError("a torus state space takes no window")
            shape = geometry.shape
            origin = np.zeros(geometry.dimension, dtype=np.int64)
        else:
            if window is None:
                raise UsageError("states on Z^d need an explicit window")
            if len(window.lo) != geometry.dimension:
                raise UsageError("window dimension does not match the geometry")
            shape = window.shape
            origin = np.asarray(window.lo, dtype=np.int64)
        n_sites = int(np.prod(shape))
        required = math.perm(n_sites, k) if k <= n_sites else 0
        if required > config.max_states:
            raise CapacityError(f"{k}-particle state space on {n_sites} sites", required, config.max_states)
        self.k = k
        self.geometry = geometry
        self.window = window
        self.n_sites = n_sites
        self._shape = np.asarray(shape, dtype=np.int64)
        self._origin = origin
        grids = np.meshgrid(*[np.arange(n) for n in shape], indexing="ij")
        self.site_coords = np.stack([g.ravel() for g in grids], axis=-1) + origin
        self.states = np.array(list(itertools.permutations(range(n_sites), k)), dtype=np.int64).reshape(-1, k)
        self.positions = self.site_coords[self.states]
        self.codes = self._encode(self.states)
        logger.debug("enumerated %d states of %d particles on %d sites", len(self.states), k, n_sites)

    def __len__(self):
        return self.states.shape[0]

    def _encode(self, sites):
        code = np.zeros(sites.shape[:-1], dtype=np.int64)
        for i in range(sites.shape[-1]):
            code = code * self.n_sites + sites[..., i]
        return code

    def site_numbers(self, coords):
        """Site numbers of coordinates ``(..., d)``; -1 outside a window."""
        coords = np.asarray(coords, dtype=np.int64)
        if self.geometry.is_torus:
            local = self.geometry.wrap(coords)
            inside = np.ones(coords.shape[:-1], dtype=bool)
        else:
            local = coords - self._origin
            inside = np.all((local >= 0) & (local < self._shape), axis=-1)
            local = np.where(inside[..., None], local, 0)
        number = np.zeros(coords.shape[:-1], dtype=np.int64)
        for axis in range(coords.shape[-1]):
            number = number * self._shape[axis] + local[..., axis]
        return np.where(inside, number, -1)

    def lookup(self, positions):
        """State numbers of position arrays ``(..., k, d)``; -1 when not enumerated."""
        sites = self.site_numbers(positions)
        valid = np.all(sites >= 0, axis=-1)
        codes = self._encode(np.where(sites >= 0, sites, 0))
        found = np.searchsorted(self.codes, codes)
        found = np.clip(found, 0, len(self.codes) - 1)
        hit = valid & (self.codes[found] == codes)
        return np.where(hit, found, -1)

    def index_of(self, config):
        """State number of one configuration.

        :raises UsageError: if the configuration is not enumerated.
        """
        positions = config.positions if isinstance(config, ParticleConfig) else np.asarray(config)
        positions = np.asarray(positions, dtype=np.int64).reshape(self.k, self.geometry.dimension)
        found = int(self.lookup(positions))
        if found < 0:
            raise UsageError(f"configuration {positions.tolist()} is not in the enumerated state space")
        return found

    def config(self, i):
        return ParticleConfig(self.positions[i], self.geometry)


def enumerate_states(k, g, window=None, config=None):
    """Enumerate S^k on a torus, or on a window of Z^d.

    :raises CapacityError: if the state count exceeds ``config.max_states``.

    :rtype: StateIndex
    """
    return StateIndex(k, g, window, config)


class GeneratorMatrix:
    """Sparse rate matrix of the labelled exclusion process.

    :type matrix: scipy.sparse.csr_matrix
    :param matrix: Generator with unit off-diagonal rates.

    :type exit_rates: numpy.ndarray
    :param exit_rates: Total exit rate per state, counting exits out of a window.
    """

    def __init__(self, matrix, exit_rates, index):
        self.matrix = matrix
        self.exit_rates = exit_rates
        self.index = index
        self.uniform_rate = float(exit_rates.max()) if len(exit_rates) else 0.0
        self._jump_transpose = None

    def __len__(self):
        return self.matrix.shape[0]

    def jump_transpose(self):
        """Transpose of P = I + L / Lambda, the uniformized jump chain."""
        if self._jump_transpose is None:
            n = self.matrix.shape[0]
            jump = sparse.identity(n, format="csr") + self.matrix / self.uniform_rate
            self._jump_transpose = jump.T.tocsr()
        return self._jump_transpose

    def is_symmetric(self):
        return (self.matrix != self.matrix.T).nnz == 0


def build_generator(index):
    """Assemble the generator of the labelled process on ``index``.

    Every bond touching at least one particle contributes one unit-rate
    transition: a move when the far end is empty, a label swap when both
    ends are occupied. On a window, moves that leave the box are killed.

    :rtype: GeneratorMatrix
    """
    g = index.geometry
    if g.is_torus and g.side < 3:
        raise UsageError("exclusion kernels need a torus side of at least 3")
    positions = index.positions
    n, k, d = positions.shape
    rows, cols = [], []
    exit_rates = np.zeros(n, dtype=np.int64)
    for i in range(k):
        for axis in range(d):
            for step in (1, -1):
                target = positions[:, i, :].copy()
                target[:, axis] += step
                target = g.wrap(target)
                occupant = np.full(n, -1, dtype=np.int64)
                for j in range(k):
                    if j != i:
                        occupant[np.all(positions[:, j, :] == target, axis=1)] = j
                new = positions.copy()
                free = occupant < 0
                new[free, i, :] = target[free]
                swap = np.zeros(n, dtype=bool)
                for j in range(i + 1, k):
                    mine = occupant == j
                    new[mine, i, :] = positions[mine, j, :]
                    new[mine, j, :] = positions[mine, i, :]
                    swap |= mine
                moving = free | swap
                exit_rates += moving
                dest = index.lookup(new[moving])
                kept = dest >= 0
                rows.append(np.flatnonzero(moving)[kept])
                cols.append(dest[kept])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    off = sparse.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    matrix = (off - sparse.diags(exit_rates.astype(np.float64))).tocsr()
    logger.debug("generator on %d states has %d transitions, max exit rate %d", n, len(rows), exit_rates.max())
    return GeneratorMatrix(matrix, exit_rates.astype(np.float64), index)
