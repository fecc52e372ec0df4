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
"""High level access to exact labelled and independent-walk kernels."""
import threading
from copy import deepcopy
from importlib.metadata import version, PackageNotFoundError

import numpy as np

from ..config import LabConfig
from ..lattice import ParticleConfig
from .lru import RowCache
from .states import build_generator, enumerate_states
from .uniformization import KernelRow, uniformized_propagate
from .walk import periodic_kernel_1d, torus_walk_table, walk_factors


class KernelEngine:
    """Exact kernels of k labelled exclusion particles on one state space"""

    try:
        __version__ = version('exclusion-lab')
    except PackageNotFoundError:
        __version__ = '0.0.0'

    def __init__(self, k, geometry, window=None, config=LabConfig()):
        """Enumerate the state space and prepare a row cache.

        The generator is built on first use.

        :type k: int
        :param k: Number of labelled particles

        :type geometry: exclusion_lab.lattice.Geometry
        :param geometry: A torus, or Z^d with ``window``

        :type window: exclusion_lab.kernels.states.Window
        :param window: Box of Z^d carrying the killed process

        :type config: exclusion_lab.LabConfig
        :param config: Numerical configuration
        """
        self._config = deepcopy(config)
        self.geometry = geometry
        self.k = k
        self.index = enumerate_states(k, geometry, window, self._config)
        self._cache = RowCache(max_bytes=self._config.row_cache_bytes)
        self._lock = threading.RLock()
        self._generator = None

    @property
    def config(self):
        return self._config

    @property
    def generator(self):
        with self._lock:
            if self._generator is None:
                self._generator = build_generator(self.index)
            return self._generator

    def __len__(self):
        return len(self.index)

    def number_of(self, x):
        return self.index.index_of(x)

    def _get_cached_row(self, i, t):
        """Get the row of state number ``i`` at time ``t``, computing it on a miss.

        :rtype: numpy.ndarray
        """
        key = (int(i), float(t))
        row = self._cache.get(key)
        if row is not None:
            return row
        row = self.propagate(i, [t])[0]
        row.setflags(write=False)
        self._cache.put_if_absent(key, row)
        return row

    def propagate(self, i, times):
        """Uncached rows of state number ``i`` at several times."""
        start = np.zeros(len(self.index))
        start[i] = 1.0
        return uniformized_propagate(self.generator, start, times, self._config.kernel_tolerance)

    def row_vector(self, x, t):
        """p_t(x, .) as a plain array over the state numbers."""
        return self._get_cached_row(self.number_of(x), t)

    def row(self, x, t):
        """p_t(x, .) as a :class:`KernelRow`."""
        probabilities = self.row_vector(x, t)
        base = x if isinstance(x, ParticleConfig) else self.index.config(self.number_of(x))
        return KernelRow(base, float(t), probabilities, self.index, max(0.0, 1.0 - float(probabilities.sum())))

    def rows(self, x, times):
        """Rows of ``x`` at each of ``times``; misses share one propagation."""
        i = self.number_of(x)
        keys = [(i, float(t)) for t in times]
        missing = sorted({t for key, t in zip(keys, times) if self._cache.get(key) is None})
        if missing:
            for t, row in zip(missing, self.propagate(i, missing)):
                row.setflags(write=False)
                self._cache.put_if_absent((i, float(t)), row)
        return [self._get_cached_row(i, t) for t in times]

    def value(self, x, y, t):
        return float(self.row_vector(x, t)[self.number_of(y)])

    def kernel_matrix(self, t):
        """Dense matrix of all rows, ``K[x, y] = p_t(x, y)``."""
        n = len(self.index)
        (columns,) = uniformized_propagate(self.generator, np.eye(n), [t], self._config.kernel_tolerance)
        return columns.T

    def rw_values(self, w, t):
        """Independent-walk kernel p^rw_t(w, y) for every enumerated y.

        ``w`` may be any k-tuple, collisions included.
        """
        w = np.asarray(w, dtype=np.int64).reshape(self.k, self.geometry.dimension)
        return self.rw_matrix(w[None, :, :], t)[0]

    def rw_row(self, x, t):
        x = x.positions if isinstance(x, ParticleConfig) else x
        return self.rw_values(x, t)

    def rw_matrix(self, starts, t):
        """p^rw_t(z, y) for starts ``z`` of shape ``(m, k, d)`` against every enumerated y."""
        starts = np.asarray(starts, dtype=np.int64)
        diff = self.index.positions[None, :, :, :] - starts[:, None, :, :]
        if self.geometry.is_torus:
            line = periodic_kernel_1d(t, self.geometry.side, self._config.image_tolerance)
            factors = line[np.mod(diff, self.geometry.side)]
        else:
            factors = walk_factors(diff, t, self.geometry, self._config)
        return np.prod(factors, axis=(2, 3))

    def walk_table(self, t):
        return torus_walk_table(t, self.geometry, self._config)
