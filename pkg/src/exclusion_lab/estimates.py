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
"""Numerical checks of gradient, total-variation and comparison estimates.

Every function works on exact kernels from :class:`KernelEngine`. Scans
that probe many configurations accept an engine so that rows are shared.
Labels are 0-based; ``e_11`` moves the first coordinate of particle 0.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad_vec
from scipy.optimize import minimize_scalar
from scipy.special import ive
from scipy.stats import poisson

from .config import LabConfig
from .errors import CapacityError, CheckFailedError, QuadratureError, UsageError
from .lattice import ParticleConfig, configuration_distance
from .kernels import KernelEngine, window_for
from .kernels.walk import periodic_kernel_1d

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GradientProbe:
    """Inputs of the two-system gradient nabla_{i,j} P_t^{A,B}(x, y).

    ``x`` and ``y`` hold all particles of A and B; ``a_labels`` and
    ``b_labels`` pick the rows belonging to each system.
    """

    i: int
    j: int
    a_labels: tuple
    b_labels: tuple
    t1: float
    t2: float
    x: np.ndarray
    y: np.ndarray


@dataclass
class BoundReport:
    """Ratios of a measured quantity to its envelope over a probe grid."""

    theta: float
    grid: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    skipped: int = 0
    envelope_ratio: float = 0.0

    @property
    def c_fit(self):
        return float(max(self.ratios)) if self.ratios else 0.0

    def add(self, t, x, y, ratio):
        self.grid.append((float(t), _as_tuple(x), _as_tuple(y)))
        self.ratios.append(float(ratio))

    def check(self):
        """Raise :class:`CheckFailedError` unless every ratio is finite and non-negative.

        Also raised when a measured kernel difference exceeds the off-diagonal
        envelope, that is when ``envelope_ratio`` is above 1.
        """
        values = np.asarray(self.ratios, dtype=np.float64)
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise CheckFailedError(f"bound scan produced invalid ratios (C_fit={self.c_fit})")
        if not self.envelope_ratio <= 1.0:
            raise CheckFailedError(f"kernel differences exceed the off-diagonal envelope "
                                   f"by a factor {self.envelope_ratio:.6g} ({self.metadata.get('envelope_constants')})")
        return self


def _as_tuple(x):
    return tuple(tuple(row) for row in np.asarray(x).reshape(-1, np.asarray(x).shape[-1]).tolist())


def _positions(x, g):
    if isinstance(x, ParticleConfig):
        return x.positions
    arr = np.asarray(x, dtype=np.int64)
    return arr.reshape(-1, 1) if arr.ndim == 1 and g.dimension == 1 else arr


def shift_first(x, g):
    """x + e_11: the first coordinate of particle 0 moved by one."""
    out = np.array(_positions(x, g), dtype=np.int64, copy=True)
    out[0, 0] += 1
    return g.wrap(out)


def _engine(k, geometry, config, engine, x=None, t=0.0):
    if engine is not None:
        return engine
    config = config or LabConfig()
    window = None
    if not geometry.is_torus:
        if x is None:
            raise UsageError("kernels on Z^d need a base configuration to size their window")
        base = np.vstack([_positions(x, geometry), shift_first(x, geometry)])
        window = window_for(base, t, k, geometry.dimension)
    return KernelEngine(k, geometry, window, config)


def default_probes(index, radius=2):
    """Base configurations for gradient scans.

    Particle 0 sits at the lowest site of the state space and the others
    within ``radius`` of it. Configurations whose shift by e_11 collides
    are skipped and counted.

    :rtype: tuple
    :return: ``(probes, skipped)``
    """
    g = index.geometry
    positions = index.positions
    anchor = positions[0, 0]
    near = np.all(positions[:, 0, :] == anchor, axis=1)
    for i in range(1, index.k):
        near &= configuration_distance(anchor[None, :], positions[:, i:i + 1, :], g) <= radius
    candidates = positions[near]
    shifted = candidates.copy()
    shifted[:, 0, 0] += 1
    shifted = g.wrap(shifted)
    keep = index.lookup(shifted) >= 0
    skipped = int(np.count_nonzero(~keep))
    if skipped:
        logger.debug("skipped %d probes whose shift leaves the state space", skipped)
    return [candidates[n] for n in np.flatnonzero(keep)], skipped


def gradient_pair(probe, engine_a, engine_b):
    """nabla_{i,j} P_t^{A,B}(x, y), zero unless x_i and x_j are neighbours.

    :type engine_a: exclusion_lab.kernels.KernelEngine
    :param engine_a: Engine for the particles of A.

    :type engine_b: exclusion_lab.kernels.KernelEngine
    :param engine_b: Engine for the particles of B, on the same geometry.
    """
    if probe.i not in probe.a_labels or probe.j not in probe.b_labels:
        raise UsageError(f"labels {probe.i}, {probe.j} are not in A={probe.a_labels}, B={probe.b_labels}")
    g = engine_a.geometry
    x = _positions(probe.x, g)
    y = _positions(probe.y, g)
    if not g.are_neighbours(x[probe.i], x[probe.j]):
        return 0.0
    swapped = x.copy()
    swapped[[probe.i, probe.j]] = x[[probe.j, probe.i]]
    a = list(probe.a_labels)
    b = list(probe.b_labels)
    first = engine_a.value(swapped[a], y[a], probe.t1) - engine_a.value(x[a], y[a], probe.t1)
    second = engine_b.value(swapped[b], y[b], probe.t2) - engine_b.value(x[b], y[b], probe.t2)
    return first * second


def _gradient_rows(engine, x, times):
    shifted = shift_first(x, engine.geometry)
    if engine.index.lookup(shifted) < 0:
        raise UsageError(f"x + e_11 = {shifted.tolist()} is not in the state space")
    base_rows = engine.rows(x, times)
    shifted_rows = engine.rows(shifted, times)
    return [(t, a - b) for t, a, b in zip(times, base_rows, shifted_rows)]


def _scan(engine, theta, times, probes, workers, weight):
    report = BoundReport(theta=theta)
    g = engine.geometry
    k, d = engine.k, g.dimension
    exponent = k * d + theta
    states = engine.index.positions
    c1, c2 = engine.config.envelope_c1, engine.config.envelope_c2

    def probe_one(x):
        out = []
        distance = configuration_distance(x, states, g)
        for t, diff in _gradient_rows(engine, x, times):
            ratio = np.abs(diff) * weight(t, distance) ** exponent
            worst = int(np.argmax(ratio))
            envelope = envelope_profile(t, distance, k, d, c1, c2)
            # states where the envelope underflows are not compared
            quotient = np.divide(np.abs(diff), envelope, out=np.zeros_like(envelope), where=envelope > 0)
            against_envelope = float(np.max(quotient))
            out.append((t, x, states[worst], ratio[worst], against_envelope))
        return out

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(probe_one, probes))
    else:
        results = [probe_one(x) for x in probes]
    for rows in results:
        for t, x, y, ratio, against_envelope in rows:
            report.add(t, x, y, ratio)
            report.envelope_ratio = max(report.envelope_ratio, against_envelope)
    report.metadata["envelope_constants"] = {"c1": c1, "c2": c2}
    return report


def grad_bound_scan(k, theta, geometry, times, probes=None, config=None, engine=None, workers=1, radius=2,
                    check=True):
    """Ratios |p_t(x, y) - p_t(x + e_11, y)| (sqrt t + |x - y| + 1)^(kd + theta).

    For every probe x and time t the largest ratio over all y is recorded
    together with its maximizer. The same differences are held against
    :func:`landim_envelope` with the configured ``envelope_c1`` and
    ``envelope_c2``; the largest quotient is ``report.envelope_ratio``.

    :type theta: float
    :param theta: Gradient exponent; ``None`` uses ``config.theta``.

    :type probes: list
    :param probes: Base configurations; by default :func:`default_probes`.

    :type check: bool
    :param check: Run :meth:`BoundReport.check` before returning; ``False``
        leaves it to the caller.

    :raises CheckFailedError: if a difference exceeds the envelope.

    :rtype: BoundReport
    """
    engine = _engine(k, geometry, config, engine, None if probes is None else probes[0], max(times))
    theta = engine.config.theta if theta is None else theta
    skipped = 0
    if probes is None:
        probes, skipped = default_probes(engine.index, radius)
    else:
        probes, skipped = _filter_probes(engine, probes)
    report = _scan(engine, theta, times, probes, workers, lambda t, r: np.sqrt(t) + r + 1.0)
    report.skipped = skipped
    report.metadata.update({"k": k, "d": geometry.dimension, "geometry": repr(geometry), "envelope": "spatial"})
    logger.info("gradient scan over %d probes and %d times: C_fit=%.6g, envelope ratio %.3g",
                len(probes), len(times), report.c_fit, report.envelope_ratio)
    return report.check() if check else report


def uniform_gradient_scan(k, theta, geometry, times, probes=None, config=None, engine=None, workers=1, radius=2,
                          check=True):
    """Ratios sup_y |p_t(x, y) - p_t(x + e_11, y)| (sqrt t + 1)^(kd + theta).

    :rtype: BoundReport
    """
    engine = _engine(k, geometry, config, engine, None if probes is None else probes[0], max(times))
    theta = engine.config.theta if theta is None else theta
    if probes is None:
        probes, skipped = default_probes(engine.index, radius)
    else:
        probes, skipped = _filter_probes(engine, probes)
    report = _scan(engine, theta, times, probes, workers, lambda t, r: np.sqrt(t) + 1.0)
    report.skipped = skipped
    report.metadata.update({"k": k, "d": geometry.dimension, "geometry": repr(geometry), "envelope": "uniform"})
    return report.check() if check else report


def _filter_probes(engine, probes):
    kept = []
    for x in probes:
        x = _positions(x, engine.geometry)
        if engine.index.lookup(x) >= 0 and engine.index.lookup(shift_first(x, engine.geometry)) >= 0:
            kept.append(x)
    return kept, len(probes) - len(kept)


def phi_function(u):
    """Phi(u) = sup_w (u w - w^2 cosh w).

    The objective is strictly concave with its maximizer between 0 and
    u / 2, and Phi is even.

    >>> phi_function(0.0)
    0.0
    """
    u = abs(float(u))
    if u == 0.0:
        return 0.0
    result = minimize_scalar(lambda w: w * w * np.cosh(w) - u * w, bounds=(0.0, u / 2.0),
                             method="bounded", options={"xatol": 1e-12})
    return max(0.0, float(-result.fun))


def landim_envelope(t, x, y, k, d, c1=1.0, c2=1.0, g=None):
    """Off-diagonal kernel envelope C1 / (sqrt t + 1)^(kd) exp(-C2 t / (2 log^2 t) Phi(|x - y| log t / (C2^2 t))).

    For t <= 1 the exponential factor is replaced by 1.
    """
    if t < 0:
        raise UsageError(f"time must be non-negative, got {t}")
    prefactor = c1 / (np.sqrt(t) + 1.0) ** (k * d)
    if t <= 1.0:
        return float(prefactor)
    diff = np.asarray(y, dtype=np.float64) - np.asarray(x, dtype=np.float64)
    if g is not None:
        diff = g.minimal_image(diff)
    return float(prefactor * _envelope_decay(float(t), float(np.linalg.norm(diff)), float(c2)))


@lru_cache(maxsize=8192)
def _envelope_decay(t, distance, c2):
    log_t = np.log(t)
    return float(np.exp(-c2 * t / (2.0 * log_t ** 2) * phi_function(distance * log_t / (c2 * c2 * t))))


def envelope_profile(t, distances, k, d, c1=1.0, c2=1.0):
    """:func:`landim_envelope` at an array of configuration distances ``|x - y|``."""
    if t < 0:
        raise UsageError(f"time must be non-negative, got {t}")
    distances = np.asarray(distances, dtype=np.float64)
    prefactor = c1 / (np.sqrt(t) + 1.0) ** (k * d)
    if t <= 1.0:
        return np.full(distances.shape, prefactor)
    unique, inverse = np.unique(distances, return_inverse=True)
    decay = np.array([_envelope_decay(float(t), float(r), float(c2)) for r in unique])
    return prefactor * decay[inverse].reshape(distances.shape)


def tv_gradient_sum(x, t, k, geometry, config=None, engine=None):
    """sum_z |p_t(x, z) - p_t(x + e_11, z)| over the enumerated states.

    :raises UsageError: if x + e_11 collides.
    """
    engine = _engine(k, geometry, config, engine, x, t)
    ((_, diff),) = _gradient_rows(engine, _positions(x, geometry), [t])
    return float(np.abs(diff).sum())


def rw_gradient_sum(x, t, g=None, config=None):
    """sum_z |p^rw_t(x, z) - p^rw_t(x + e_11, z)|, which reduces to one coordinate of one walker.

    On Z the sum runs over a window wide enough that the Poisson tail of the
    jump count is below 1e-16.
    """
    if t < 0:
        raise UsageError(f"time must be non-negative, got {t}")
    if g is not None and g.is_torus:
        config = config or LabConfig()
        line = periodic_kernel_1d(t, g.side, config.image_tolerance)
        return float(np.abs(line - np.roll(line, 1)).sum())
    reach = int(poisson.isf(1e-16, 2.0 * t)) + 2 if t > 0 else 1
    z = np.arange(-reach, reach + 2, dtype=np.float64)
    line = ive(np.abs(z), 2.0 * t)
    return float(np.abs(np.diff(line)).sum())


@dataclass
class CollisionTerms:
    """Start configurations and signs of the independent-walk correction.

    For a state w with m adjacent pairs the terms are delta^{i,j} w for
    each ordered adjacent pair (+1), sigma^{i,j} w for each unordered pair
    (-1), and w itself (-m).
    """

    owners: np.ndarray
    starts: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.owners)


def collision_terms(index):
    """Build the :class:`CollisionTerms` of every state of ``index``."""
    g = index.geometry
    positions = index.positions
    n, k, _ = positions.shape
    owners, starts, weights = [], [], []
    pairs = np.zeros(n, dtype=np.int64)
    for i in range(k):
        for j in range(i + 1, k):
            gap = g.minimal_image(positions[:, j, :] - positions[:, i, :])
            adjacent = np.flatnonzero(np.abs(gap).sum(axis=1) == 1)
            pairs[adjacent] += 1
            base = positions[adjacent]
            to_j = base.copy()
            to_j[:, j, :] = base[:, i, :]
            to_i = base.copy()
            to_i[:, i, :] = base[:, j, :]
            swap = base.copy()
            swap[:, i, :] = base[:, j, :]
            swap[:, j, :] = base[:, i, :]
            for start, sign in ((to_j, 1.0), (to_i, 1.0), (swap, -1.0)):
                owners.append(adjacent)
                starts.append(start)
                weights.append(np.full(len(adjacent), sign))
    involved = np.flatnonzero(pairs)
    owners.append(involved)
    starts.append(positions[involved])
    weights.append(-pairs[involved].astype(np.float64))
    d = positions.shape[2]
    return CollisionTerms(np.concatenate(owners).astype(np.int64),
                          np.concatenate(starts).reshape(-1, k, d),
                          np.concatenate(weights))


def comparison_identity_check(x, y, t, k, geometry, config=None, engine=None, terms=None):
    """Compare p^rw_t - p^l_t with its time-integral representation.

    lhs = p^rw_t(x, y) - p^l_t(x, y); rhs integrates, over s in [0, t],
    sum_w p^l_{t-s}(x, w) [sum_{i != j adj} p^rw_s(delta^{i,j} w, y)
    - sum_{i < j adj} p^rw_s(sigma^{i,j} w, y) - m(w) p^rw_s(w, y)].
    With ``y=None`` every enumerated y is compared and the worst is returned.

    :rtype: tuple
    :return: ``(lhs, rhs, residual)``

    :raises QuadratureError: if adaptive quadrature misses ``quad_tolerance``.
    """
    config = config or LabConfig()
    engine = _engine(k, geometry, config, engine, x, t)
    if t < 0:
        raise UsageError(f"time must be non-negative, got {t}")
    x = _positions(x, geometry)
    start = engine.number_of(x)
    lhs = engine.rw_values(x, t) - engine.row_vector(x, t)
    terms = terms if terms is not None else collision_terms(engine.index)
    if t == 0 or len(terms) == 0:
        rhs = np.zeros(len(engine))
    else:
        def integrand(s):
            occupation = engine.propagate(start, [t - s])[0]
            return (occupation[terms.owners] * terms.weights) @ engine.rw_matrix(terms.starts, s)

        rhs, error, info = quad_vec(integrand, 0.0, float(t), epsabs=config.quad_tolerance,
                                    epsrel=0.0, full_output=True)
        logger.debug("comparison quadrature used %d evaluations, error estimate %.3e", info.neval, error)
        if not info.success:
            raise QuadratureError(f"comparison integral on [0, {t}] did not converge", error)
    residuals = np.abs(lhs - rhs)
    target = int(np.argmax(residuals)) if y is None else engine.number_of(_positions(y, geometry))
    return float(lhs[target]), float(rhs[target]), float(residuals[target])


def kernel_difference_sum(x, t, k, geometry, config=None, engine=None):
    """sum_y |p^rw_t(x, y) - p^l_t(x, y)| over y in S^k."""
    engine = _engine(k, geometry, config, engine, x, t)
    x = _positions(x, geometry)
    return float(np.abs(engine.rw_values(x, t) - engine.row_vector(x, t)).sum())


def semigroup_composition_bound(x, t, k, geometry, config=None, engine=None):
    """Largest violation over y of

    |p_2t(x, y) - p_2t(x', y)| <= sum_z |p_t(x, z) - p_t(x', z)| sup_w p_t(w, y),

    with x' = x + e_11. A correct kernel gives a value <= 0.
    """
    engine = _engine(k, geometry, config, engine, x, 2 * t)
    needed = 8 * len(engine) ** 2
    if needed > engine.config.row_cache_bytes:
        raise CapacityError("dense kernel matrix (bytes)", needed, engine.config.row_cache_bytes)
    x = _positions(x, geometry)
    ((_, diff_2t),) = _gradient_rows(engine, x, [2 * t])
    ((_, diff_t),) = _gradient_rows(engine, x, [t])
    column_sup = engine.kernel_matrix(t).max(axis=0)
    violation = np.abs(diff_2t) - np.abs(diff_t).sum() * column_sup
    return float(violation.max())


def decay_exponent(times, values):
    """Least-squares slope of log(value) against log(sqrt t + 1)."""
    times = np.asarray(times, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if len(times) < 2 or np.any(values <= 0):
        raise UsageError("decay fit needs at least two positive values")
    slope, _ = np.polyfit(np.log(np.sqrt(times) + 1.0), np.log(values), 1)
    return float(slope)
