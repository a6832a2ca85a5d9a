#
# Copyright (c) cliquepaths authors and others. All rights reserved.
# SPDX-License-Identifier: Apache-2.0
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
#

import csv
import json

import pytest
from commoncode.testcase import FileDrivenTesting

from cliquepaths.errors import ParameterError
from cliquepaths.ledger import CostModel
from cliquepaths.ledger import RoundLedger
from cliquepaths.ledger import ensure_ledger

test_env = FileDrivenTesting()


class TestRoundFormulas:
    def test_source_detection(self):
        ledger = RoundLedger(8)
        assert ledger.charge_source_detection(m=8, s=8, d=2) == pytest.approx(4.0)

    def test_source_detection_without_sources_is_free(self):
        ledger = RoundLedger(8)
        assert ledger.charge_source_detection(m=8, s=0, d=5) == 0.0

    def test_filtered_mm(self):
        ledger = RoundLedger(8)
        assert ledger.charge_filtered_mm(8, 8, 8, 4) == pytest.approx(4.0)

    def test_sparse_mm(self):
        ledger = RoundLedger(8)
        assert ledger.charge_sparse_mm(8, 8) == pytest.approx(3.0)

    def test_distance_through(self):
        ledger = RoundLedger(8)
        assert ledger.charge_distance_through(8) == pytest.approx(3.0)

    def test_broadcast_learn(self):
        ledger = RoundLedger(8)
        assert ledger.charge_broadcast_learn(17) == 6

    def test_cost_model_scales_charges(self):
        ledger = RoundLedger(8, CostModel(constants={"flat": 2.0}))
        assert ledger.charge_flat("announcement", 3) == 6.0
        assert ledger.charge_broadcast_learn(8) == 2

    def test_negative_parameters_are_rejected(self):
        with pytest.raises(ParameterError):
            RoundLedger(8).charge_sparse_mm(-1, 2)

    def test_word_bits(self):
        assert CostModel.word_bits(1024) == 10
        assert CostModel.word_bits(1) == 1


class TestCostModel:
    def test_unknown_primitive_is_rejected(self):
        with pytest.raises(ParameterError):
            CostModel(constants={"teleport": 1.0})

    def test_non_positive_constant_is_rejected(self):
        with pytest.raises(ParameterError):
            CostModel(constants={"flat": 0})

    def test_missing_constants_default_to_one(self):
        assert CostModel().constant("sparse_mm") == 1.0


class TestLedger:
    def test_phases_nest_and_total(self):
        ledger = RoundLedger(8)
        with ledger.phase("outer"):
            ledger.charge_flat("a", 1)
            with ledger.phase("inner"):
                ledger.charge_flat("b", 2)
        ledger.charge_flat("c", 4)

        assert [entry.phase for entry in ledger.entries] == ["outer", "outer/inner", ""]
        assert ledger.total == 7
        assert ledger.totals_by_phase() == {"outer": 1.0, "outer/inner": 2.0, "-": 4.0}
        assert ledger.totals_by_primitive() == {"flat": 7.0}

    def test_dump_json_and_csv(self):
        ledger = RoundLedger(8)
        ledger.charge_flat("a", 1)
        ledger.charge_sparse_mm(8, 8)

        json_location = test_env.get_temp_file("ledger.json")
        ledger.dump_json(json_location)
        with open(json_location) as f:
            entries = json.load(f)
        assert [entry["primitive"] for entry in entries] == ["flat", "sparse_mm"]

        csv_location = test_env.get_temp_file("ledger.csv")
        ledger.dump_csv(csv_location)
        with open(csv_location, newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["index", "primitive", "phase", "params", "rounds"]
        assert len(rows) == 3

    def test_ensure_ledger(self):
        ledger = RoundLedger(4)
        assert ensure_ledger(ledger, 10) is ledger
        assert ensure_ledger(None, 10).n == 10
