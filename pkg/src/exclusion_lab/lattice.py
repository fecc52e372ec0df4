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
"""Lattice geometry, parabolic norms and discrete Hölder distances.

Sites of the torus Z_L^d are stored as integer coordinates in ``[0, L)``.
Fields on the rescaled torus T_N^d are numpy arrays of shape ``(L,) * d``
with grid spacing ``1 / L``.
"""
import itertools
import logging
from dataclasses import dataclass

import numpy as np

from .config import LabConfig
from .errors import UsageError

logger = logging.getLogger(__name__)


class Geometry:
    """The lattice Z^d, or the torus (Z / L Z)^d when ``side`` is given.

    :type dimension: int
    :param dimension: Spatial dimension d >= 1.

    :type side: int
    :param side: Torus side L >= 2, or None for the infinite lattice.
    """

    def __init__(self, dimension, side=None):
        if int(dimension) != dimension or dimension < 1:
            raise UsageError(f"dimension must be a positive integer, got {dimension}")
        if side is not None and (int(side) != side or side < 2):
            raise UsageError(f"torus side must be an integer >= 2, got {side}")
        self.dimension = int(dimension)
        self.side = None if side is None else int(side)

    @classmethod
    def torus(cls, dimension, side):
        return cls(dimension, side)

    @classmethod
    def dyadic_torus(cls, dimension, level):
        """The torus Z_N^d = (Z / 2^N Z)^d."""
        if level < 1:
            raise UsageError(f"level must be >= 1, got {level}")
        return cls(dimension, 2 ** int(level))

    @classmethod
    def infinite(cls, dimension):
        return cls(dimension, None)

    @property
    def is_torus(self):
        return self.side is not None

    @property
    def level(self):
        """N with side = 2^N, or None when the side is not a power of two."""
        if self.side is None or self.side & (self.side - 1):
            return None
        return self.side.bit_length() - 1

    @property
    def n_sites(self):
        self._require_torus()
        return self.side ** self.dimension

    @property
    def shape(self):
        self._require_torus()
        return (self.side,) * self.dimension

    def _require_torus(self):
        if self.side is None:
            raise UsageError("operation needs a finite torus")

    def check_point(self, x):
        """Return ``x`` as an int64 vector of length d.

        :raises UsageError: if the dimension does not match.
        """
        arr = np.atleast_1d(np.asarray(x, dtype=np.int64))
        if arr.shape != (self.dimension,):
            raise UsageError(f"point {x!r} does not have dimension {self.dimension}")
        return self.wrap(arr)

    def wrap(self, coords):
        coords = np.asarray(coords, dtype=np.int64)
        if self.side is None:
            return coords
        return np.mod(coords, self.side)

    def minimal_image(self, diff):
        """Reduce displacements coordinatewise into (-L/2, L/2]."""
        if self.side is None:
            return np.asarray(diff)
        return minimal_image(diff, self.side)

    def unit(self, axis):
        e = np.zeros(self.dimension, dtype=np.int64)
        e[axis] = 1
        return e

    def neighbours(self, x):
        """The 2d nearest neighbours of ``x``, ordered +e_0, -e_0, +e_1, ..."""
        x = self.check_point(x)
        steps = np.concatenate([np.eye(self.dimension, dtype=np.int64),
                                -np.eye(self.dimension, dtype=np.int64)], axis=1)
        steps = steps.reshape(self.dimension * 2, self.dimension)
        return self.wrap(x[None, :] + steps)

    def are_neighbours(self, x, y):
        diff = self.minimal_image(self.check_point(y) - self.check_point(x))
        return int(np.abs(diff).sum()) == 1

    def site_index(self, coords):
        """Row-major site number of (wrapped) coordinates ``(..., d)``."""
        self._require_torus()
        coords = self.wrap(coords)
        index = np.zeros(coords.shape[:-1], dtype=np.int64)
        for axis in range(self.dimension):
            index = index * self.side + coords[..., axis]
        return index

    def site_coords(self, index):
        self._require_torus()
        index = np.asarray(index, dtype=np.int64)
        coords = np.empty(index.shape + (self.dimension,), dtype=np.int64)
        rest = index.copy()
        for axis in reversed(range(self.dimension)):
            coords[..., axis] = rest % self.side
            rest //= self.side
        return coords

    def __eq__(self, other):
        return isinstance(other, Geometry) and (self.dimension, self.side) == (other.dimension, other.side)

    def __hash__(self):
        return hash((self.dimension, self.side))

    def __repr__(self):
        if self.side is None:
            return f"Geometry.infinite({self.dimension})"
        return f"Geometry.torus({self.dimension}, {self.side})"


class ParticleConfig:
    """k labelled particles at pairwise distinct sites of a geometry.

    :type positions: array-like
    :param positions: ``(k, d)`` coordinates; for d = 1 a flat sequence of
        k sites is accepted.

    :type geometry: Geometry
    :param geometry: The owning geometry.
    """

    __slots__ = ("positions", "geometry")

    def __init__(self, positions, geometry):
        arr = np.asarray(positions, dtype=np.int64)
        if arr.ndim == 1 and geometry.dimension == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or arr.shape[1] != geometry.dimension:
            raise UsageError(f"positions {positions!r} are not k points of dimension {geometry.dimension}")
        arr = geometry.wrap(arr)
        if len({tuple(row) for row in arr.tolist()}) != arr.shape[0]:
            raise UsageError(f"positions {arr.tolist()} are not pairwise distinct")
        arr.setflags(write=False)
        self.positions = arr
        self.geometry = geometry

    @property
    def k(self):
        return self.positions.shape[0]

    def as_tuple(self):
        return tuple(tuple(row) for row in self.positions.tolist())

    def __eq__(self, other):
        return isinstance(other, ParticleConfig) and self.geometry == other.geometry \
            and np.array_equal(self.positions, other.positions)

    def __hash__(self):
        return hash((self.geometry, self.as_tuple()))

    def __repr__(self):
        return f"ParticleConfig({self.as_tuple()})"


@dataclass(frozen=True)
class SpaceTimePoint:
    """A time and a spatial point, in lattice units or rescaled when flagged."""

    t: float
    x: tuple
    rescaled: bool = False


def minimal_image(diff, period):
    """Reduce displacements into (-period/2, period/2] coordinatewise."""
    m = np.mod(np.asarray(diff), period)
    return np.where(m > period / 2, m - period, m)


def torus_distance(x, y, g):
    """Euclidean norm of the minimal representative of ``x - y``.

    >>> g = Geometry.torus(2, 8)
    >>> torus_distance((0, 0), (7, 0), g)
    1.0
    """
    x = np.atleast_1d(np.asarray(x))
    y = np.atleast_1d(np.asarray(y))
    if x.shape != (g.dimension,) or y.shape != (g.dimension,):
        raise UsageError(f"points {x.tolist()} and {y.tolist()} do not match dimension {g.dimension}")
    return float(np.linalg.norm(g.minimal_image(y.astype(np.int64) - x.astype(np.int64))))


def configuration_distance(x, y, g):
    """Distance between k-particle configurations in (Z^d)^k.

    ``y`` may carry leading batch axes, ``(..., k, d)``.
    """
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if x.shape[-1] != g.dimension or y.shape[-2:] != x.shape:
        raise UsageError("configurations do not match in shape")
    diff = g.minimal_image(y - x)
    return np.sqrt(np.sum(diff.astype(np.float64) ** 2, axis=(-2, -1)))


def parabolic_norm(p):
    """max(sqrt|t|, ||x||).

    >>> parabolic_norm(SpaceTimePoint(4.0, (3, 0)))
    3.0
    >>> parabolic_norm(SpaceTimePoint(9.0, (1, 1)))
    3.0
    """
    return float(max(np.sqrt(abs(p.t)), np.linalg.norm(np.asarray(p.x, dtype=np.float64))))


def _check_eta(eta):
    if not 0.0 < eta < 1.0:
        raise UsageError(f"Hölder exponent must lie in (0, 1), got {eta}")


def _field(values):
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise UsageError("field is empty")
    if len(set(arr.shape)) != 1:
        raise UsageError(f"field of shape {arr.shape} is not a cubic torus grid")
    if not np.all(np.isfinite(arr)):
        raise UsageError("field has non-finite values")
    return arr


def _grid_points(side, d):
    axes = np.meshgrid(*([np.arange(side) / side] * d), indexing="ij")
    return np.stack([a.ravel() for a in axes], axis=-1)


def holder_seminorm(values, eta):
    """sup over distinct grid pairs of |f(x) - f(y)| / |x - y|^eta on T_N^d."""
    arr = _field(values)
    side, d = arr.shape[0], arr.ndim
    axes = tuple(range(d))
    best = 0.0
    for disp in itertools.product(range(side), repeat=d):
        if not any(disp):
            continue
        dist = np.linalg.norm(minimal_image(np.array(disp), side)) / side
        jump = np.max(np.abs(arr - np.roll(arr, disp, axis=axes)))
        best = max(best, float(jump) / dist ** eta)
    return best


def holder_norm(values, eta):
    """Discrete Hölder norm sup|f| + Hölder seminorm on the rescaled torus."""
    _check_eta(eta)
    arr = _field(values)
    return float(np.max(np.abs(arr))) + holder_seminorm(arr, eta)


def _fine_displacements(scale, d):
    """Integer vectors with 0 < |v| < scale."""
    span = range(-scale + 1, scale)
    out = [v for v in itertools.product(span, repeat=d) if 0 < np.dot(v, v) < scale * scale]
    return np.array(out, dtype=np.int64).reshape(-1, d)


def small_scale_seminorm(f, eta, side, d, refinement):
    """sup over |x - y| < 1/side of |f(x) - f(y)| / |x - y|^eta.

    The sup is taken on the refinement grid of ``side * 2^refinement``
    points per axis.
    """
    scale = 2 ** int(refinement)
    fine = side * scale
    values = np.asarray(f(_grid_points(fine, d)), dtype=np.float64).reshape((fine,) * d)
    axes = tuple(range(d))
    best = 0.0
    for disp in _fine_displacements(scale, d):
        dist = np.linalg.norm(disp) / fine
        jump = np.max(np.abs(values - np.roll(values, tuple(disp), axis=axes)))
        best = max(best, float(jump) / dist ** eta)
    logger.debug("small-scale sup over %d displacements on a %d^%d grid", scale, fine, d)
    return best


def holder_distance(f, f_n, eta, refinement=None, config=None):
    """Three-term distance ||f; f^N||_eta between a continuum and a grid function.

    :type f: callable
    :param f: Periodic function on [0, 1)^d taking an ``(m, d)`` array of
        points and returning ``m`` values.

    :type f_n: numpy.ndarray
    :param f_n: Grid function of shape ``(2^N,) * d``.

    :type eta: float
    :param eta: Hölder exponent in (0, 1).

    :rtype: float
    """
    _check_eta(eta)
    config = config or LabConfig()
    refinement = config.refinement if refinement is None else refinement
    grid = _field(f_n)
    side, d = grid.shape[0], grid.ndim
    restricted = np.asarray(f(_grid_points(side, d)), dtype=np.float64).reshape(grid.shape)
    error = restricted - grid
    sup_term = float(np.max(np.abs(error)))
    increment_term = holder_seminorm(error, eta)
    small_term = small_scale_seminorm(f, eta, side, d, refinement)
    return sup_term + increment_term + small_term


def spacetime_holder_distance(f, f_n, eta, horizon, times=None, refinement=None, config=None):
    """Three-term parabolic distance ||f; f^N||_{C_N^{eta,T}}.

    The small-scale term samples ``f`` itself on a uniform grid of
    ``config.time_grid_steps`` steps over [0, T]. Time increments of the
    large-scale term are taken pair by pair, so ``times`` need not be
    uniform.

    :type f: callable
    :param f: ``f(ts, xs)`` with ``ts`` of shape ``(m,)`` and ``xs`` of shape
        ``(m, d)``, returning ``m`` values.

    :type f_n: numpy.ndarray
    :param f_n: Values on the time grid times the space grid, shape
        ``(n_t,) + (2^N,) * d``.

    :type horizon: float
    :param horizon: T; the default time grid of ``f_n`` is uniform on [0, T].

    :rtype: float
    """
    _check_eta(eta)
    if horizon <= 0:
        raise UsageError(f"horizon must be positive, got {horizon}")
    config = config or LabConfig()
    refinement = config.refinement if refinement is None else refinement
    grid = np.asarray(f_n, dtype=np.float64)
    if grid.ndim < 2 or not np.all(np.isfinite(grid)):
        raise UsageError("space-time field must have a time axis and finite values")
    n_t, side, d = grid.shape[0], grid.shape[1], grid.ndim - 1
    times = np.linspace(0.0, horizon, n_t) if times is None else np.asarray(times, dtype=np.float64)
    if times.shape != (n_t,):
        raise UsageError("time grid does not match the field")
    points = _grid_points(side, d)
    n_x = points.shape[0]

    def sample(ts):
        tt = np.repeat(ts, n_x)
        xx = np.tile(points, (len(ts), 1))
        return np.asarray(f(tt, xx), dtype=np.float64).reshape((len(ts),) + grid.shape[1:])

    restricted = sample(times)
    error = restricted - grid
    sup_term = float(np.max(np.abs(error)))

    # pairs closer than 2^-N in the parabolic distance share their grid site
    small_term = 0.0
    scale = 2 ** int(refinement)
    continuum_times = np.linspace(0.0, horizon, int(config.time_grid_steps) + 1)
    for m in range(1, scale):
        tau = m / (scale * side * side)
        base = continuum_times[continuum_times + tau <= horizon]
        if base.size == 0:
            continue
        jump = np.max(np.abs(sample(base + tau) - sample(base)))
        small_term = max(small_term, float(jump) / tau ** (eta / 2.0))

    large_term = 0.0
    axes = tuple(range(1, d + 1))
    for lag in range(n_t):
        dt = np.abs(times[lag:] - times[:n_t - lag])
        later = error[lag:]
        earlier = error[:n_t - lag]
        for disp in itertools.product(range(side), repeat=d):
            if lag == 0 and not any(disp):
                continue
            dist = np.maximum(np.sqrt(dt), np.linalg.norm(minimal_image(np.array(disp), side)) / side)
            far = dist >= 1.0 / side
            if not np.any(far):
                continue
            shifted = np.roll(later, tuple(-v for v in disp), axis=axes)
            jump = np.max(np.abs(shifted - earlier), axis=axes)
            large_term = max(large_term, float(np.max(jump[far] / dist[far] ** eta)))
    return sup_term + small_term + large_term
