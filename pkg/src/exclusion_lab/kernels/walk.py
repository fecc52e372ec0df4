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
"""Simple random walk kernels.

The walk jumps to each of its 2d neighbours at rate 1, so its coordinates
are independent one-dimensional walks of total rate 2 and

    p_t(0, x) = prod_c exp(-2t) I_{x_c}(2t).
"""
import logging

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import ive

from ..config import LabConfig
from ..errors import UsageError

logger = logging.getLogger(__name__)


def _check_time(t):
    if t < 0:
        raise UsageError(f"time must be non-negative, got {t}")


def srw_kernel_1d(x, t):
    """One coordinate of the walk kernel, exp(-2t) I_x(2t).

    >>> srw_kernel_1d(0, 0.0)
    1.0
    >>> srw_kernel_1d(3, 0.0)
    0.0
    """
    _check_time(t)
    values = ive(np.abs(np.asarray(x, dtype=np.float64)), 2.0 * t)
    return float(values) if np.ndim(values) == 0 else values


def srw_kernel_1d_forward(x, t, radius=60):
    """The same kernel by integrating the forward equations on [-radius, radius].

    Mass leaving the truncated line is lost, which is negligible while
    ``radius`` is large against ``2t``.
    """
    _check_time(t)
    if abs(x) > radius:
        return 0.0
    size = 2 * radius + 1
    start = np.zeros(size)
    start[radius] = 1.0
    if t == 0:
        return float(start[radius + x])

    def forward(_, p):
        flux = -2.0 * p
        flux[1:] += p[:-1]
        flux[:-1] += p[1:]
        return flux

    solution = solve_ivp(forward, (0.0, t), start, method="DOP853", rtol=1e-13, atol=1e-16)
    if not solution.success:
        raise UsageError(f"forward equation integration failed: {solution.message}")
    return float(solution.y[radius + x, -1])


def periodic_kernel_1d(t, side, tolerance):
    """One coordinate of the torus walk kernel for every displacement ``0..side-1``.

    Images ``r + m * side`` are added shell by shell until a whole shell
    contributes less than ``tolerance``.
    """
    _check_time(t)
    r = minimal_offsets(side)
    values = ive(np.abs(r), 2.0 * t)
    wraps = 0
    while True:
        wraps += 1
        shell = ive(np.abs(r + wraps * side), 2.0 * t) + ive(np.abs(r - wraps * side), 2.0 * t)
        values = values + shell
        if shell.max() < tolerance:
            break
    logger.debug("periodic walk kernel at t=%g on side %d summed %d image shells", t, side, wraps)
    return values


def minimal_offsets(side):
    """Displacements 0..side-1 reduced into (-side/2, side/2]."""
    r = np.arange(side, dtype=np.float64)
    return np.where(r > side / 2, r - side, r)


def walk_factors(diff, t, g, config=None):
    """Coordinate factors of the walk kernel for integer displacements ``diff``."""
    _check_time(t)
    diff = np.asarray(diff, dtype=np.int64)
    if not g.is_torus:
        return ive(np.abs(diff).astype(np.float64), 2.0 * t)
    config = config or LabConfig()
    table = periodic_kernel_1d(t, g.side, config.image_tolerance)
    return table[np.mod(diff, g.side)]


def srw_kernel(x, y, t, g, config=None):
    """p_t(x, y) of the d-dimensional walk on ``g``.

    >>> from exclusion_lab.lattice import Geometry
    >>> srw_kernel((0, 0), (0, 0), 0.0, Geometry.infinite(2))
    1.0
    """
    x = g.check_point(x)
    y = g.check_point(y)
    return float(np.prod(walk_factors(y - x, t, g, config)))


def product_kernel_rw(x, y, t, g, config=None):
    """Kernel of k independent walkers, prod_i p_t(x_i, y_i); collisions allowed.

    ``x`` and ``y`` are ``(k, d)`` arrays (flat sequences when d = 1).
    """
    x = _tuple_array(x, g)
    y = _tuple_array(y, g)
    if x.shape != y.shape:
        raise UsageError(f"configurations of {x.shape[0]} and {y.shape[0]} particles do not match")
    return float(np.prod(walk_factors(y - x, t, g, config)))


def _tuple_array(x, g):
    arr = np.asarray(x, dtype=np.int64)
    if arr.ndim == 1 and g.dimension == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[1] != g.dimension:
        raise UsageError(f"{x!r} is not a tuple of points of dimension {g.dimension}")
    return arr


def torus_walk_table(t, g, config=None):
    """p_t(0, z) for every z of the torus, as an array of shape ``g.shape``."""
    config = config or LabConfig()
    line = periodic_kernel_1d(t, g.side, config.image_tolerance)
    return _outer_power(line, g.dimension)


def torus_walk_spectral(t, g):
    """Fourier form of :func:`torus_walk_table`.

    Per coordinate, q(r) = (1/L) sum_j exp(-2t (1 - cos(2 pi j / L))) cos(2 pi j r / L).
    """
    _check_time(t)
    side = g.side
    j = np.arange(side)
    modes = np.exp(-2.0 * t * (1.0 - np.cos(2.0 * np.pi * j / side)))
    phases = np.cos(2.0 * np.pi * np.outer(np.arange(side), j) / side)
    line = phases @ modes / side
    return _outer_power(line, g.dimension)


def _outer_power(line, d):
    table = line
    for _ in range(d - 1):
        table = np.multiply.outer(table, line)
    return table
