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
"""Result tables and summaries written by the experiment runner.

Every CSV starts with comment lines carrying the config digest, the
package version and the full config, so a table can be replayed and
checked against a golden copy.
"""
import json
import logging
import math
import os

import numpy as np

from .errors import CheckFailedError, UsageError

logger = logging.getLogger(__name__)

DIGEST_PREFIX = "# config_digest="


class ResultTable:
    """Rows of results in a fixed column order.

    :type name: str
    :param name: Base name of the files written.

    :type columns: list of str
    :param columns: Column schema.

    :type config: exclusion_lab.config.ExperimentConfig
    :param config: The resolved config embedded in the header.

    :type version: str
    :param version: Package version embedded in the header.
    """

    def __init__(self, name, columns, config, version="0.0.0"):
        self.name = name
        self.columns = list(columns)
        self.config = config
        self.version = version
        self.rows = []

    def __len__(self):
        return len(self.rows)

    def add_row(self, *values):
        if len(values) != len(self.columns):
            raise UsageError(f"row has {len(values)} values for {len(self.columns)} columns")
        self.rows.append(tuple(format_cell(v) for v in values))

    def to_csv(self):
        """The table as text with LF line endings."""
        lines = [f"{DIGEST_PREFIX}{self.config.digest()}", f"# version={self.version}"]
        lines.extend(f"# {line}" for line in self.config.to_text().splitlines())
        lines.append(",".join(self.columns))
        lines.extend(",".join(row) for row in self.rows)
        return "\n".join(lines) + "\n"

    def write(self, directory):
        """Write ``<name>.csv`` and ``<name>.cfg`` under ``directory``.

        :rtype: str
        :return: Path of the CSV file.
        """
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(directory, f"{self.name}.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())
        with open(os.path.join(directory, f"{self.name}.cfg"), "w", encoding="utf-8", newline="") as fh:
            fh.write(self.config.to_text())
        logger.info("wrote %d rows to %s", len(self.rows), path)
        return path


def format_cell(value):
    """Render one value: floats with 17 significant digits, arrays as
    space-separated entries with ``;`` between rows.

    >>> format_cell(0.1)
    '0.10000000000000001'
    >>> format_cell([[0, 1], [2, 3]])
    '0 1;2 3'
    """
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    if isinstance(value, str):
        if any(c in value for c in ",\n\r"):
            raise UsageError(f"table cell {value!r} contains a separator")
        return value
    arr = np.asarray(value)
    if arr.ndim == 0:
        return format_cell(arr.item())
    if arr.ndim == 1:
        return " ".join(format_cell(v) for v in arr.tolist())
    return ";".join(format_cell(row) for row in arr.reshape(-1, arr.shape[-1]))


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def _finite_or_text(value):
    if isinstance(value, dict):
        return {str(k): _finite_or_text(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite_or_text(v) for v in value]
    if isinstance(value, (float, np.floating)) and not math.isfinite(value):
        return str(float(value))
    return value


def write_summary(directory, name, summary, config, version="0.0.0", wall_time=None):
    """Write ``<name>.json``: a single object with sorted keys.

    Non-finite numbers are written as strings so the file stays valid JSON.

    :rtype: str
    :return: Path of the JSON file.
    """
    payload = dict(summary)
    payload.update({
        "config_digest": config.digest(),
        "subcommand": config.subcommand,
        "version": version,
    })
    if wall_time is not None:
        payload["wall_time_seconds"] = float(wall_time)
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, f"{name}.json")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(_finite_or_text(payload), fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def table_digest(text):
    """The config digest embedded in a table, or None."""
    first = text.split("\n", 1)[0]
    if first.startswith(DIGEST_PREFIX):
        digest = first[len(DIGEST_PREFIX):].strip()
        return digest or None
    return None


def compare_golden(path_a, path_b):
    """Compare two result tables byte for byte.

    :raises CheckFailedError: if either table carries no config digest.

    :rtype: bool
    :return: True when the tables are identical.
    """
    texts = []
    for path in (path_a, path_b):
        with open(path, "rb") as fh:
            text = fh.read().decode("utf-8")
        if table_digest(text) is None:
            raise CheckFailedError(f"{path} carries no config digest")
        texts.append(text)
    if table_digest(texts[0]) != table_digest(texts[1]):
        logger.warning("tables were produced from different configs")
        return False
    return texts[0] == texts[1]
