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
"""Laboratory and experiment configuration objects."""

import hashlib
import os
from copy import deepcopy

from .errors import UsageError

SEED_ENV_VAR = "EXLAB_SEED"


class LabConfig:

    """Numerical configuration shared by the kernel engines and estimators.

    :type max_states: int
    :param max_states: The largest labelled state space that may be enumerated.

    :type kernel_tolerance: float
    :param kernel_tolerance: Poisson tail mass dropped by uniformization.

    :type row_cache_bytes: int
    :param row_cache_bytes: Memory budget of the kernel row cache.

    :type image_tolerance: float
    :param image_tolerance: Image contribution below which torus image
        summation stops.

    :type refinement: int
    :param refinement: Extra dyadic levels R of the grid used for continuum
        sups in the Hölder distances.

    :type time_grid_steps: int
    :param time_grid_steps: Number of steps of the uniform time grid on which
        space-time distances sample the continuum field.

    :type quad_tolerance: float
    :param quad_tolerance: Absolute tolerance of adaptive quadrature.

    :type identity_threshold: float
    :param identity_threshold: Largest accepted residual of the comparison
        identity between exclusion and independent walks.

    :type envelope_c1: float
    :param envelope_c1: Prefactor of the off-diagonal kernel envelope that
        gradient scans hold measured kernel differences against.

    :type envelope_c2: float
    :param envelope_c2: Spreading constant of the off-diagonal kernel envelope.

    :type theta: float
    :param theta: Gradient exponent of bound scans called with ``theta=None``.

    :type rho: float
    :param rho: Particle density of cumulant queries called with ``rho=None``
        and of every command-line experiment.

    :type batches: int
    :param batches: Number of replica batches behind every Monte Carlo
        standard error.

    :type max_events_logged: int
    :param max_events_logged: Bound on recorded simulation events, 0 disables
        the event log.

    :type seed: int
    :param seed: Default root seed.
    """

    OPTION_DEFAULTS = {
        "max_states": 200000,
        "kernel_tolerance": 1e-12,
        "row_cache_bytes": 256 * 1024 * 1024,
        "image_tolerance": 1e-17,
        "refinement": 4,
        "time_grid_steps": 256,
        "quad_tolerance": 1e-8,
        "identity_threshold": 1e-6,
        "envelope_c1": 4.0,
        "envelope_c2": 1.0,
        "theta": 0.5,
        "rho": 0.5,
        "batches": 30,
        "max_events_logged": 0,
        "seed": 0,
    }

    def __init__(self, **kwargs):
        options = deepcopy(self.OPTION_DEFAULTS)

        if kwargs:
            for key, value in kwargs.items():
                if key in options:
                    options[key] = value
                else:
                    raise TypeError(f"Unexpected keyword argument {key}")

        for key, value in options.items():
            setattr(self, key, value)

    def options(self):
        """Return the current options as a plain dictionary."""
        return {key: getattr(self, key) for key in self.OPTION_DEFAULTS}


class ExperimentConfig:
    """A named experiment with a flat, serializable parameter mapping.

    Values are stored as the strings that appear in the config file so
    that a config round-trips byte-identically through ``to_text`` and
    ``from_text``.

    :type subcommand: str
    :param subcommand: Name of the experiment to run.

    :type params: dict
    :param params: Parameter name to value.
    """

    def __init__(self, subcommand, params=None):
        self.subcommand = subcommand
        self.params = {}
        for key, value in (params or {}).items():
            self.set(key, value)

    def set(self, key, value):
        """Store ``value`` under ``key`` in its canonical text form."""
        key = key.replace("-", "_").strip()
        if not key or any(c in key for c in " =\n#"):
            raise UsageError(f"invalid config key {key!r}")
        text = _canonical(value)
        if "\n" in text:
            raise UsageError(f"config value for {key} spans several lines")
        self.params[key] = text

    def get(self, key, default=None):
        """Return the raw text value of ``key``."""
        return self.params.get(key, default)

    def get_int(self, key, default=None):
        value = self.params.get(key)
        return default if value is None else int(value)

    def get_float(self, key, default=None):
        value = self.params.get(key)
        return default if value is None else float(value)

    def get_floats(self, key, default=None):
        """Parse a comma-separated list of floats."""
        value = self.params.get(key)
        if value is None:
            return default
        return [float(item) for item in value.split(",") if item.strip()]

    def get_range(self, key, default=None):
        """Parse ``a..b`` (inclusive) or a comma-separated list of integers."""
        value = self.params.get(key)
        if value is None:
            return default
        if ".." in value:
            lo, hi = value.split("..", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(item) for item in value.split(",") if item.strip()]

    def to_text(self):
        """Serialize to ``key = value`` lines, sorted by key."""
        lines = [f"subcommand = {self.subcommand}"]
        lines.extend(f"{key} = {self.params[key]}" for key in sorted(self.params))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        """Parse the output of ``to_text`` (comments and blank lines allowed)."""
        subcommand = None
        params = {}
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"config line {number} is not 'key = value': {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key == "subcommand":
                subcommand = value
            else:
                params[key] = value
        if subcommand is None:
            raise UsageError("config file does not name a subcommand")
        return cls(subcommand, params)

    @classmethod
    def from_file(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    def apply_seed_environment(self, cli_seed=None):
        """Resolve the seed with precedence CLI > environment > file."""
        if cli_seed is not None:
            self.set("seed", int(cli_seed))
            return
        env_seed = os.environ.get(SEED_ENV_VAR)
        if env_seed:
            try:
                self.set("seed", int(env_seed))
            except ValueError:
                raise UsageError(f"{SEED_ENV_VAR} is not an integer: {env_seed!r}") from None

    def digest(self):
        """SHA-256 of the canonical text form."""
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()

    def lab_config(self):
        """Build a :class:`LabConfig` from the keys it recognizes."""
        overrides = {}
        for key, default in LabConfig.OPTION_DEFAULTS.items():
            if key in self.params:
                overrides[key] = _parse_like(default, self.params[key])
        return LabConfig(**overrides)


def _parse_like(default, text):
    if isinstance(default, int):
        try:
            return int(text)
        except ValueError:
            return int(float(text))
    return type(default)(text)


def _canonical(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ",".join(_canonical(item) for item in value)
    return str(value).strip()
