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
Unit test suite for results module
"""
import json
import os
import shutil
import tempfile
import unittest

import numpy as np
import pytest

from exclusion_lab.config import ExperimentConfig
from exclusion_lab.errors import CheckFailedError, UsageError
from exclusion_lab.results import ResultTable, compare_golden, format_cell, table_digest, write_summary

pytestmark = [pytest.mark.unit, pytest.mark.local]


class TestFormatCell(unittest.TestCase):

    def test_scalars(self):
        self.assertEqual("true", format_cell(True))
        self.assertEqual("false", format_cell(np.bool_(False)))
        self.assertEqual("3", format_cell(np.int64(3)))
        self.assertEqual("1", format_cell(1.0))
        self.assertEqual("0.5", format_cell(np.float32(0.5)))
        self.assertEqual("nan", format_cell(float("nan")))
        self.assertEqual("abc", format_cell("abc"))

    def test_arrays(self):
        self.assertEqual("1 2 3", format_cell(np.array([1, 2, 3])))
        self.assertEqual("0 1;2 3", format_cell(np.array([[0, 1], [2, 3]])))
        self.assertEqual("7", format_cell(np.array(7)))

    def test_separators_are_rejected(self):
        self.assertRaises(UsageError, format_cell, "a,b")
        self.assertRaises(UsageError, format_cell, "a\nb")


class TestResultTable(unittest.TestCase):

    def setUp(self):
        self.dir = tempfile.mkdtemp()
        self.config = ExperimentConfig("demo", {"d": 2, "t": 0.5})

    def tearDown(self):
        shutil.rmtree(self.dir)

    def table(self, *rows):
        table = ResultTable("demo", ["t", "value"], self.config, "1.2.3")
        for row in rows:
            table.add_row(*row)
        return table

    def test_layout(self):
        text = self.table((0.5, 1), (1.0, 2)).to_csv()
        lines = text.split("\n")
        self.assertEqual("# config_digest=" + self.config.digest(), lines[0])
        self.assertEqual("# version=1.2.3", lines[1])
        self.assertEqual(["# subcommand = demo", "# d = 2", "# t = 0.5"], lines[2:5])
        self.assertEqual(["t,value", "0.5,1", "1,2", ""], lines[5:])
        self.assertNotIn("\r", text)

    def test_row_width(self):
        table = self.table()
        self.assertRaises(UsageError, table.add_row, 1.0)
        self.assertEqual(0, len(table))

    def test_write(self):
        path = self.table((0.5, 1)).write(self.dir)
        self.assertEqual(os.path.join(self.dir, "demo.csv"), path)
        with open(os.path.join(self.dir, "demo.cfg"), encoding="utf-8") as fh:
            self.assertEqual(self.config.to_text(), fh.read())
        with open(path, "rb") as fh:
            self.assertEqual(self.table((0.5, 1)).to_csv().encode("utf-8"), fh.read())

    def test_digest(self):
        self.assertEqual(self.config.digest(), table_digest(self.table().to_csv()))
        self.assertIsNone(table_digest("t,value\n1,2\n"))


class TestSummary(unittest.TestCase):

    def setUp(self):
        self.dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.dir)

    def test_sorted_and_finite(self):
        config = ExperimentConfig("demo", {"d": 1})
        summary = {"ratio": float("inf"), "values": np.array([1.0, 2.0]), "count": np.int64(4), "pair": (1, 2)}
        path = write_summary(self.dir, "demo", summary, config, "1.0", wall_time=0.25)
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        data = json.loads(text)
        self.assertEqual("inf", data["ratio"])
        self.assertEqual([1.0, 2.0], data["values"])
        self.assertEqual(4, data["count"])
        self.assertEqual([1, 2], data["pair"])
        self.assertEqual(config.digest(), data["config_digest"])
        self.assertEqual("demo", data["subcommand"])
        self.assertEqual(0.25, data["wall_time_seconds"])
        self.assertEqual(sorted(data), list(data))
        self.assertTrue(text.endswith("}\n"))


class TestCompareGolden(unittest.TestCase):

    def setUp(self):
        self.dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.dir)

    def write(self, name, text):
        path = os.path.join(self.dir, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        return path

    def csv(self, config, value):
        table = ResultTable("demo", ["value"], config)
        table.add_row(value)
        return table.to_csv()

    def test_identical(self):
        config = ExperimentConfig("demo", {"d": 1})
        a = self.write("a.csv", self.csv(config, 1.0))
        b = self.write("b.csv", self.csv(config, 1.0))
        self.assertTrue(compare_golden(a, b))

    def test_same_config_different_rows(self):
        config = ExperimentConfig("demo", {"d": 1})
        a = self.write("a.csv", self.csv(config, 1.0))
        b = self.write("b.csv", self.csv(config, 2.0))
        self.assertFalse(compare_golden(a, b))

    def test_different_configs(self):
        a = self.write("a.csv", self.csv(ExperimentConfig("demo", {"d": 1}), 1.0))
        b = self.write("b.csv", self.csv(ExperimentConfig("demo", {"d": 2}), 1.0))
        with self.assertLogs("exclusion_lab.results", level="WARNING"):
            self.assertFalse(compare_golden(a, b))

    def test_needs_a_digest(self):
        a = self.write("a.csv", "value\n1\n")
        self.assertRaises(CheckFailedError, compare_golden, a, a)
