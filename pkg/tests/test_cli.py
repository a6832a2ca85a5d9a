#
# Copyright (c) cliquepaths authors and others. All rights reserved.
# SPDX-License-Identifier: Apache-2.0
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
#

import csv
import json
import os
from unittest import mock

import pytest
from click.testing import CliRunner
from commoncode.testcase import FileDrivenTesting

from cliquepaths import cli
from cliquepaths.cli_test_utils import check_report
from cliquepaths.cli_test_utils import load_report
from cliquepaths.cli_test_utils import streamline_headers
from cliquepaths.errors import SeedExhaustionError
from cliquepaths.graphs import Graph
from cliquepaths.graphs import dump_edge_list
from cliquepaths.graphs import dump_label_table

test_env = FileDrivenTesting()
test_env.test_data_dir = os.path.join(os.path.dirname(__file__), "data")


def invoke(command, options):
    runner = CliRunner()
    log_file = test_env.get_temp_file("log")
    return runner.invoke(command, options + ["--log-file", log_file], catch_exceptions=False)


def load_json(location):
    with open(location, encoding="utf-8") as f:
        return json.load(f)


class TestRun:
    def test_knearest_matches_bfs(self):
        config_location = test_env.get_test_loc("cli/knearest.yml")
        report = test_env.get_temp_file("json")
        result = invoke(cli.run, ["--config", config_location, "--report", report])
        assert result.exit_code == 0, result.output

        results = load_report(report)
        assert results["summary"] == dict(repetitions=1, passed=True, failures=[])
        row = results["runs"][0]
        assert row["n"] == 16
        assert row["k"] == 2
        assert row["d"] == 4
        assert row["oracle_equal"]
        assert row["mismatches"] == []
        assert row["ledger"]["by_primitive"]["filtered_mm"] > 0

    def test_headers(self):
        config_location = test_env.get_test_loc("cli/knearest.yml")
        report = test_env.get_temp_file("json")
        invoke(cli.run, ["--config", config_location, "--seed", "3", "--report", report])

        headers = load_json(report)["headers"]
        streamline_headers(headers)
        assert headers == [
            dict(
                tool_name="cliquepaths",
                report_version=cli.REPORT_VERSION,
                options={
                    "command": "run",
                    "--config": "knearest.yml",
                    "--seed": 3,
                    "--report": os.path.basename(report),
                },
                errors=[],
                warnings=[],
            )
        ]

    def test_emulator_repetitions_and_histogram_csv(self):
        config_location = test_env.get_test_loc("cli/emulator_cycle.yml")
        report = test_env.get_temp_file("json")
        csv_location = test_env.get_temp_file("csv")
        result = invoke(
            cli.run, ["--config", config_location, "--report", report, "--csv", csv_location]
        )
        assert result.exit_code == 0, result.output
        assert "repetition 1 (seed 1): passed" in result.output

        results = load_json(report)
        assert [row["seed"] for row in results["runs"]] == [0, 1]
        assert all(row["stretch"]["stretch_ok"] for row in results["runs"])
        assert results["config"]["mode"] == "ideal"

        with open(csv_location, encoding="utf-8", newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == cli.HISTOGRAM_COLUMNS
        # 16 * 15 / 2 pairs per repetition
        assert sum(int(row[3]) for row in rows[1:]) == 2 * 120

    def test_invalid_eps_is_a_usage_error(self):
        result = invoke(cli.run, ["--algorithm", "emulator", "--eps", "1.5"])
        assert result.exit_code == 2
        assert "eps must be in (0, 1)" in result.output

    def test_unknown_algorithm_is_a_usage_error(self):
        result = invoke(cli.run, ["--algorithm", "dijkstra"])
        assert result.exit_code == 2

    def test_oracle_cap_below_the_graph_size(self):
        report = test_env.get_temp_file("json")
        result = invoke(
            cli.run,
            ["--algorithm", "emulator", "--n", "32", "--oracle-cap", "8", "--report", report],
        )
        assert result.exit_code == 3
        assert "capped at 8 vertices" in result.output

    def test_bad_config_is_a_usage_error(self):
        config_location = test_env.get_test_loc("config/unknown_key.yml")
        result = invoke(cli.run, ["--config", config_location])
        assert result.exit_code == 2
        assert "graph.colour" in result.output

    def test_dump_writes_the_first_repetition(self):
        config_location = test_env.get_test_loc("cli/knearest.yml")
        dump = test_env.get_temp_dir()
        report = test_env.get_temp_file("json")
        result = invoke(
            cli.run,
            ["--config", config_location, "--repetitions", "2", "--dump", dump, "--report", report],
        )
        assert result.exit_code == 0, result.output
        assert sorted(os.listdir(dump)) == ["graph.txt", "labels.txt", "nearest.json"]

    def test_seed_exhaustion_fails_the_repetition(self):
        def exhausted(config, seed, dump=None):
            raise SeedExhaustionError("no qualifying run among 4 sampling runs")

        config_location = test_env.get_test_loc("cli/knearest.yml")
        report = test_env.get_temp_file("json")
        with mock.patch.dict(cli.RUNNERS, {"knearest": exhausted}):
            result = invoke(cli.run, ["--config", config_location, "--report", report])
        assert result.exit_code == 1

        results = load_json(report)
        assert results["summary"] == dict(repetitions=1, passed=False, failures=[0])
        assert results["runs"][0]["error"] == "no qualifying run among 4 sampling runs"
        errors = results["headers"][0]["errors"]
        assert len(errors) == 1
        assert errors[0].startswith("ERROR - cliquepaths.cli - repetition 0:")


class TestSweep:
    def test_single_point_has_no_slope(self):
        report = test_env.get_temp_file("json")
        result = invoke(
            cli.sweep,
            ["--algorithm", "knearest", "--n", "16", "--report", report],
        )
        assert result.exit_code == 0, result.output

        results = load_json(report)
        assert results["slope"] is None
        point = results["points"][0]
        assert point["n"] == 16
        assert point["repetitions"] == 1
        assert point["mean_rounds"] > 0
        assert point["size_constant"] is None

    def test_sweep_from_config_writes_csv(self):
        config_location = test_env.get_test_loc("config/sweep.yml")
        report = test_env.get_temp_file("json")
        csv_location = test_env.get_temp_file("csv")
        result = invoke(
            cli.sweep,
            ["--config", config_location, "--report", report, "--csv", csv_location],
        )
        assert result.exit_code == 0, result.output

        results = load_json(report)
        assert [point["n"] for point in results["points"]] == [16, 32]
        assert all(point["mean_size"] is None for point in results["points"])
        # no sizes: the slope is fitted on the rounds
        assert results["slope"] is not None

        with open(csv_location, encoding="utf-8", newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == cli.SWEEP_COLUMNS
        assert len(rows) == 3

    def test_nominal_budget(self):
        report = test_env.get_temp_file("json")
        result = invoke(
            cli.sweep,
            ["--algorithm", "mssp", "--nominal", "--n", "256", "--n", "1024", "--report", report],
        )
        assert result.exit_code == 0, result.output
        results = load_json(report)
        assert [point["n"] for point in results["points"]] == [256, 1024]
        assert all(point["mean_rounds"] > 0 for point in results["points"])
        assert results["slope"] is not None

    def test_nominal_needs_mssp(self):
        result = invoke(cli.sweep, ["--algorithm", "hopset", "--nominal", "--n", "64"])
        assert result.exit_code == 2

    def test_needs_at_least_one_n(self):
        result = invoke(cli.sweep, ["--algorithm", "hopset"])
        assert result.exit_code == 2
        assert "at least one n" in result.output


class TestVerify:
    def test_exact_emulator_passes(self):
        report = test_env.get_temp_file("json")
        options = [
            "--graph",
            test_env.get_test_loc("cli/path4.txt"),
            "--emulator",
            test_env.get_test_loc("cli/exact_emulator.txt"),
            "--eps",
            "1/2",
            "--additive",
            "0",
            "--report",
            report,
        ]
        result = invoke(cli.verify, options)
        assert result.exit_code == 0, result.output

        results = load_json(report)
        assert results["result"]["artifact"] == "emulator"
        assert results["result"]["stretch_ok"]
        assert results["headers"][0]["options"]["--eps"] == "1/2"

    def test_shortcut_below_the_distance_fails(self):
        report = test_env.get_temp_file("json")
        options = [
            "--graph",
            test_env.get_test_loc("cli/path4.txt"),
            "--emulator",
            test_env.get_test_loc("cli/shortcut_emulator.txt"),
            "--eps",
            "0.5",
            "--additive",
            "0",
            "--report",
            report,
        ]
        result = invoke(cli.verify, options)
        assert result.exit_code == 1
        assert [0, 3, 3, 1] in load_json(report)["result"]["violations"]
        expected = test_env.get_test_loc("cli/verify_shortcut-expected.json")
        check_report(expected, report)

    def test_exactly_one_artifact(self):
        options = [
            "--graph",
            test_env.get_test_loc("cli/path4.txt"),
            "--emulator",
            test_env.get_test_loc("cli/exact_emulator.txt"),
            "--hopset",
            test_env.get_test_loc("cli/exact_emulator.txt"),
        ]
        result = invoke(cli.verify, options)
        assert result.exit_code == 2

    def test_emulator_needs_its_guarantee(self):
        options = [
            "--graph",
            test_env.get_test_loc("cli/path4.txt"),
            "--emulator",
            test_env.get_test_loc("cli/exact_emulator.txt"),
        ]
        result = invoke(cli.verify, options)
        assert result.exit_code == 2
        assert "--emulator needs --eps and --additive" in result.output

    def test_invalid_fraction(self):
        options = [
            "--graph",
            test_env.get_test_loc("cli/path4.txt"),
            "--emulator",
            test_env.get_test_loc("cli/exact_emulator.txt"),
            "--eps",
            "half",
        ]
        result = invoke(cli.verify, options)
        assert result.exit_code == 2
        assert "Invalid number" in result.output

    def test_dumped_hopset_verifies_like_the_run(self):
        dump = test_env.get_temp_dir()
        report = test_env.get_temp_file("json")
        invoke(
            cli.run,
            ["--algorithm", "hopset", "--n", "30", "--seed", "2", "--dump", dump, "--report", report],
        )
        row = load_json(report)["runs"][0]

        verify_report = test_env.get_temp_file("json")
        options = [
            "--graph",
            os.path.join(dump, "graph.txt"),
            "--labels",
            os.path.join(dump, "labels.txt"),
            "--hopset",
            os.path.join(dump, "hopset.txt"),
            "--eps",
            "0.5",
            "--beta",
            str(row["beta"]),
            "--t",
            "8",
            "--report",
            verify_report,
        ]
        result = invoke(cli.verify, options)
        verified = load_json(verify_report)["result"]
        assert verified["passed"] == row["hopset"]["passed"]
        assert result.exit_code == (0 if row["passed"] else 1)
        assert verified["pairs_checked"] == row["hopset"]["pairs_checked"]

    def test_dumped_estimates_verify_like_the_run(self):
        dump = test_env.get_temp_dir()
        report = test_env.get_temp_file("json")
        invoke(
            cli.run,
            ["--algorithm", "mssp", "--mode", "ideal", "--n", "25", "--dump", dump, "--report", report],
        )
        row = load_json(report)["runs"][0]
        assert row["sources"] == 5

        verify_report = test_env.get_temp_file("json")
        options = [
            "--graph",
            os.path.join(dump, "graph.txt"),
            "--labels",
            os.path.join(dump, "labels.txt"),
            "--estimates",
            os.path.join(dump, "estimates.csv"),
            "--multiplicative",
            "3/2",
            "--report",
            verify_report,
        ]
        invoke(cli.verify, options)
        verified = load_json(verify_report)["result"]
        assert verified["artifact"] == "estimates"
        assert verified["stretch_ok"] == row["estimates"]["stretch_ok"]
        assert verified["pairs_checked"] == row["estimates"]["pairs_checked"]

    def test_dumped_graph_keeps_ids_and_isolated_vertices(self):
        # vertex 5 is isolated and first-appearance order differs from the ids
        g = Graph.from_edges(6, [(3, 1), (1, 4), (4, 0), (0, 2)])
        dump = test_env.get_temp_dir()
        dump_edge_list(g, os.path.join(dump, "graph.txt"))
        dump_label_table(g, os.path.join(dump, "labels.txt"))
        emulator = os.path.join(dump, "emulator.txt")
        with open(emulator, "w") as f:
            for u, v in g.edges():
                f.write(f"{u} {v} 1 0 sparse-clique\n")

        report = test_env.get_temp_file("json")
        options = [
            "--graph",
            os.path.join(dump, "graph.txt"),
            "--emulator",
            emulator,
            "--eps",
            "1/2",
            "--additive",
            "0",
            "--report",
            report,
        ]
        result = invoke(cli.verify, options)
        assert result.exit_code == 0, result.output
        results = load_json(report)
        assert results["result"]["stretch_ok"]
        assert results["result"]["violations"] == []
        assert results["result"]["pairs_checked"] == 10
        assert results["headers"][0]["options"]["--labels"] == os.path.join(dump, "labels.txt")

        alone = test_env.get_temp_dir()
        with open(os.path.join(dump, "graph.txt")) as source:
            with open(os.path.join(alone, "graph.txt"), "w") as target:
                target.write(source.read())
        options[1] = os.path.join(alone, "graph.txt")
        result = invoke(cli.verify, options)
        assert result.exit_code == 2
        assert "needs its label table" in result.output

    def test_artifact_ids_outside_the_graph(self):
        emulator = test_env.get_temp_file("txt")
        with open(emulator, "w") as f:
            f.write("0 9 1 0 sparse-clique\n")
        options = [
            "--graph",
            test_env.get_test_loc("cli/path4.txt"),
            "--emulator",
            emulator,
            "--eps",
            "1/2",
            "--additive",
            "0",
        ]
        result = invoke(cli.verify, options)
        assert result.exit_code == 2
        assert "outside the graph" in result.output


class TestSoftHitCommand:
    def test_independent_generator(self):
        report = test_env.get_temp_file("json")
        result = invoke(cli.run, ["--algorithm", "softhit", "--report", report])
        assert result.exit_code == 0, result.output
        row = load_json(report)["runs"][0]
        assert row["generator"] == "independent"
        assert row["monotone"]
        assert row["expectation_bound_ok"]


@pytest.mark.slow
class TestAcceptance:
    @pytest.mark.parametrize("algorithm", ["emulator", "apsp-additive", "mssp", "apsp-2eps"])
    def test_deterministic_pipelines(self, algorithm):
        report = test_env.get_temp_file("json")
        result = invoke(
            cli.run,
            [
                "--algorithm",
                algorithm,
                "--mode",
                "deterministic",
                "--n",
                "256",
                "--repetitions",
                "3",
                "--report",
                report,
            ],
        )
        assert result.exit_code == 0, result.output
        assert load_json(report)["summary"]["passed"]
