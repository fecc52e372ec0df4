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
"""
Unit test suite for config module
"""
import os
import tempfile
import unittest
from unittest.mock import patch

import pytest

from exclusion_lab.config import SEED_ENV_VAR, ExperimentConfig, LabConfig
from exclusion_lab.errors import UsageError

pytestmark = [pytest.mark.unit, pytest.mark.local]


class TestLabConfig(unittest.TestCase):

    def test_simple_config(self):
        self.assertRaises(TypeError, LabConfig, no='one')

    def test_config_override(self):
        config = LabConfig(max_states=10, kernel_tolerance=1e-14)
        self.assertEqual(config.max_states, 10)
        self.assertEqual(config.kernel_tolerance, 1e-14)
        self.assertEqual(config.quad_tolerance, 1e-8)

    def test_default_typing(self):
        config = LabConfig()
        self.assertIsInstance(config.max_states, int)
        self.assertIsInstance(config.row_cache_bytes, int)
        self.assertIsInstance(config.image_tolerance, float)

    def test_options(self):
        options = LabConfig(batches=12).options()
        self.assertEqual(set(options), set(LabConfig.OPTION_DEFAULTS))
        self.assertEqual(options["batches"], 12)

    def test_defaults_are_not_shared(self):
        LabConfig(theta=0.9)
        self.assertEqual(LabConfig().theta, 0.5)


class TestExperimentConfig(unittest.TestCase):

    def setUp(self):
        self.config = ExperimentConfig("grad-bound", {"k": 2, "d": 2, "L": 8, "theta": 0.5, "times": [0.25, 1.0]})

    def test_text_round_trip(self):
        text = self.config.to_text()
        again = ExperimentConfig.from_text(text)
        self.assertEqual(again.to_text(), text)
        self.assertEqual(again.digest(), self.config.digest())

    def test_text_layout(self):
        self.assertEqual(self.config.to_text(),
                         "subcommand = grad-bound\nL = 8\nd = 2\nk = 2\ntheta = 0.5\ntimes = 0.25,1.0\n")

    def test_digest_tracks_values(self):
        before = self.config.digest()
        self.config.set("theta", 0.4)
        self.assertNotEqual(before, self.config.digest())
        self.assertEqual(len(before), 64)

    def test_typed_getters(self):
        self.assertEqual(self.config.get_int("k"), 2)
        self.assertEqual(self.config.get_float("theta"), 0.5)
        self.assertEqual(self.config.get_floats("times"), [0.25, 1.0])
        self.assertEqual(self.config.get_int("missing", 7), 7)

    def test_ranges(self):
        self.config.set("N", "3..8")
        self.assertEqual(self.config.get_range("N"), [3, 4, 5, 6, 7, 8])
        self.config.set("N", "2,4")
        self.assertEqual(self.config.get_range("N"), [2, 4])

    def test_comments_and_blank_lines(self):
        text = "# golden\n\nsubcommand = pam\nN = 4\n"
        config = ExperimentConfig.from_text(text)
        self.assertEqual(config.subcommand, "pam")
        self.assertEqual(config.get_int("N"), 4)

    def test_missing_subcommand(self):
        self.assertRaises(UsageError, ExperimentConfig.from_text, "k = 2\n")

    def test_malformed_line(self):
        self.assertRaises(UsageError, ExperimentConfig.from_text, "subcommand = pam\nnonsense\n")

    def test_invalid_key(self):
        self.assertRaises(UsageError, self.config.set, "a key", 1)

    def test_dashes_become_underscores(self):
        self.config.set("max-states", 5)
        self.assertEqual(self.config.get_int("max_states"), 5)

    def test_from_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "run.cfg")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(self.config.to_text())
            self.assertEqual(ExperimentConfig.from_file(path).digest(), self.config.digest())

    def test_lab_config(self):
        self.config.set("max_states", "1e5")
        self.config.set("quad_tolerance", "1e-10")
        lab = self.config.lab_config()
        self.assertEqual(lab.max_states, 100000)
        self.assertEqual(lab.quad_tolerance, 1e-10)
        self.assertEqual(lab.theta, 0.5)

    def test_seed_cli_wins(self):
        self.config.set("seed", 1)
        with patch.dict(os.environ, {SEED_ENV_VAR: "2"}):
            self.config.apply_seed_environment(3)
        self.assertEqual(self.config.get_int("seed"), 3)

    def test_seed_environment_over_file(self):
        self.config.set("seed", 1)
        with patch.dict(os.environ, {SEED_ENV_VAR: "2"}):
            self.config.apply_seed_environment()
        self.assertEqual(self.config.get_int("seed"), 2)

    def test_seed_file_kept(self):
        self.config.set("seed", 1)
        with patch.dict(os.environ, {}, clear=True):
            self.config.apply_seed_environment()
        self.assertEqual(self.config.get_int("seed"), 1)

    def test_bad_seed_environment(self):
        with patch.dict(os.environ, {SEED_ENV_VAR: "abc"}):
            self.assertRaises(UsageError, self.config.apply_seed_environment)
