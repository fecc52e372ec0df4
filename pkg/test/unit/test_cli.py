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
Unit test suite for the command line runner
"""
import json
import os
import shutil
import tempfile
import unittest
from unittest.mock import patch

import pytest

from exclusion_lab import cli
from exclusion_lab.config import SEED_ENV_VAR, ExperimentConfig

pytestmark = [pytest.mark.unit, pytest.mark.local]


class CliTestCase(unittest.TestCase):

    def setUp(self):
        self.dir = tempfile.mkdtemp()
        self.env = patch.dict(os.environ)
        self.env.start()
        os.environ.pop(SEED_ENV_VAR, None)

    def tearDown(self):
        self.env.stop()
        shutil.rmtree(self.dir)

    def out(self, name="out"):
        return os.path.join(self.dir, name)

    def read(self, *parts):
        with open(os.path.join(self.dir, *parts), "rb") as fh:
            return fh.read()

    def summary(self, folder, name):
        return json.loads(self.read(folder, f"{name}.json").decode("utf-8"))


class TestExitCodes(CliTestCase):

    def test_success(self):
        code = cli.main(["renorm-const", "--N", "2..3", "--d", "2", "--T", "0.5", "--out", self.out()])
        self.assertEqual(cli.EXIT_OK, code)
        lines = self.read("out", "renorm-const.csv").decode("utf-8").splitlines()
        self.assertTrue(lines[0].startswith("# config_digest="))
        self.assertIn("N,C_N,difference,spectral", lines)
        self.assertTrue(lines[-2].startswith("2,"))
        self.assertTrue(lines[-1].startswith("3,"))
        summary = self.summary("out", "renorm-const")
        self.assertEqual(1, len(summary["differences"]))
        self.assertIn("log_growth_rate", summary)
        self.assertIn("wall_time_seconds", summary)

    def test_usage_errors(self):
        self.assertEqual(cli.EXIT_USAGE, cli.main([]))
        self.assertEqual(cli.EXIT_USAGE, cli.main(["no-such-experiment"]))
        self.assertEqual(cli.EXIT_USAGE, cli.main(["renorm-const", "--bogus", "1", "--out", self.out()]))
        self.assertEqual(cli.EXIT_USAGE, cli.main(["renorm-const", "--d", "two", "--out", self.out()]))
        self.assertEqual(cli.EXIT_USAGE, cli.main(["grad-bound", "--L", "0", "--out", self.out()]))
        self.assertEqual(cli.EXIT_USAGE, cli.main(["fluctuation", "--f", "nope", "--out", self.out()]))
        self.assertEqual(cli.EXIT_USAGE, cli.main(["compare-golden", self.out("a.csv"), self.out("b.csv")]))

    def test_failed_check_still_writes_outputs(self):
        code = cli.main(["compare-rw", "--t", "0.5", "--identity_threshold", "0", "--out", self.out()])
        self.assertEqual(cli.EXIT_CHECK_FAILED, code)
        self.assertIn("max_residual", self.summary("out", "compare-rw"))

    def test_comparison_identity_passes(self):
        self.assertEqual(cli.EXIT_OK, cli.main(["compare-rw", "--t", "1.0", "--out", self.out()]))
        self.assertLess(self.summary("out", "compare-rw")["max_residual"], 1e-6)

    def test_capacity(self):
        code = cli.main(["kernel-exact", "--L", "6", "--max_states", "10", "--out", self.out()])
        self.assertEqual(cli.EXIT_CAPACITY, code)


class TestReplay(CliTestCase):

    def test_config_replays_byte_identically(self):
        first = ["simulate-ssep", "--L", "8", "--replicas", "5", "--t", "0.5", "--seed", "11"]
        self.assertEqual(cli.EXIT_OK, cli.main(first + ["--out", self.out("a"), "--threads", "1"]))
        config = os.path.join(self.out("a"), "simulate-ssep.cfg")
        self.assertEqual(cli.EXIT_OK, cli.main(["simulate-ssep", "--config", config, "--out", self.out("b"),
                                                "--threads", "2"]))
        self.assertEqual(self.read("a", "simulate-ssep.csv"), self.read("b", "simulate-ssep.csv"))
        self.assertEqual(cli.EXIT_OK, cli.main(["compare-golden", os.path.join(self.out("a"), "simulate-ssep.csv"),
                                                os.path.join(self.out("b"), "simulate-ssep.csv")]))

    def test_different_configs_do_not_compare_equal(self):
        for name, horizon in (("a", "0.5"), ("b", "0.25")):
            self.assertEqual(cli.EXIT_OK, cli.main(["renorm-const", "--N", "2", "--T", horizon, "--out", self.out(name)]))
        code = cli.main(["compare-golden", os.path.join(self.out("a"), "renorm-const.csv"),
                         os.path.join(self.out("b"), "renorm-const.csv")])
        self.assertEqual(cli.EXIT_CHECK_FAILED, code)

    def test_config_must_match_the_subcommand(self):
        path = os.path.join(self.dir, "other.cfg")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(ExperimentConfig("pam", {"N": 2}).to_text())
        self.assertEqual(cli.EXIT_USAGE, cli.main(["renorm-const", "--config", path, "--out", self.out()]))

    def test_config_rejects_unknown_keys(self):
        path = os.path.join(self.dir, "extra.cfg")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(ExperimentConfig("renorm-const", {"N": 2, "colour": "red"}).to_text())
        self.assertEqual(cli.EXIT_USAGE, cli.main(["renorm-const", "--config", path, "--out", self.out()]))


class TestResolveConfig(CliTestCase):

    def resolve(self, *argv):
        return cli.resolve_config(cli.build_parser().parse_args(list(argv)))

    def test_defaults_fill_in(self):
        params = self.resolve("pam")
        self.assertEqual("pam", params.subcommand)
        self.assertEqual(4, params.get_int("N"))
        self.assertEqual("auto", params.get("dt"))
        self.assertEqual(0, params.get_int("seed"))

    def test_flags_override_defaults(self):
        params = self.resolve("pam", "--N", "3", "--kernel_tolerance", "1e-14")
        self.assertEqual(3, params.get_int("N"))
        self.assertEqual(1e-14, params.lab_config().kernel_tolerance)

    def test_seed_precedence(self):
        os.environ[SEED_ENV_VAR] = "7"
        self.assertEqual(7, self.resolve("pam").get_int("seed"))
        self.assertEqual(3, self.resolve("pam", "--seed", "3").get_int("seed"))

    def test_abbreviations_are_not_accepted(self):
        self.assertRaises(ValueError, self.resolve, "pam", "--renor", "0")


class TestExperiments(CliTestCase):

    def test_kernel_row(self):
        self.assertEqual(cli.EXIT_OK, cli.main(["kernel-exact", "--t", "0.5", "--out", self.out()]))
        summary = self.summary("out", "kernel-exact")
        self.assertEqual(12, summary["states"])
        self.assertAlmostEqual(1.0, summary["row_sum"], places=10)
        self.assertTrue(summary["generator_symmetric"])

    def test_pam(self):
        code = cli.main(["pam", "--N", "2", "--d", "1", "--T", "0.05", "--snapshots", "0.025,0.05",
                         "--out", self.out()])
        self.assertEqual(cli.EXIT_OK, code)
        summary = self.summary("out", "pam")
        self.assertEqual([0.025, 0.05], [s["t"] for s in summary["snapshots"]])
        self.assertGreater(summary["snapshots"][-1]["min"], 0.0)

    def test_frozen_convergence_probe(self):
        code = cli.main(["probe-convergence", "--N", "2,3", "--d", "1", "--T", "0.05", "--frozen", "true",
                         "--renorm", "0", "--replicas", "1", "--out", self.out()])
        self.assertEqual(cli.EXIT_OK, code)
        lines = self.read("out", "probe-convergence.csv").decode("utf-8").splitlines()
        self.assertEqual(["pairing", "mean", "mean_square", "holder_norm"], [line.split(",")[0] for line in lines[-4:]])

    def test_probe_needs_two_levels(self):
        self.assertEqual(cli.EXIT_USAGE, cli.main(["probe-convergence", "--N", "3", "--out", self.out()]))

    def test_gradient_bound_holds_differences_against_the_envelope(self):
        argv = ["grad-bound", "--d", "1", "--L", "6", "--times", "0", "--threads", "1"]
        self.assertEqual(cli.EXIT_OK, cli.main(argv + ["--out", self.out("a")]))
        summary = self.summary("a", "grad-bound")
        self.assertAlmostEqual(0.25, summary["envelope_ratio"])
        self.assertEqual({"c1": 4.0, "c2": 1.0}, summary["envelope_constants"])
        code = cli.main(argv + ["--envelope_c1", "0.5", "--out", self.out("b")])
        self.assertEqual(cli.EXIT_CHECK_FAILED, code)
        self.assertAlmostEqual(2.0, self.summary("b", "grad-bound")["envelope_ratio"])
        self.assertTrue(self.read("b", "grad-bound.csv"))
