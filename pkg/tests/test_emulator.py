#
# Copyright (c) cliquepaths authors and others. All rights reserved.
# SPDX-License-Identifier: Apache-2.0
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
#

from fractions import Fraction

import numpy as np
import pytest
from commoncode.testcase import FileDrivenTesting

from cliquepaths import graphs
from cliquepaths.emulator import DENSE_LINK
from cliquepaths.emulator import SPARSE_CLIQUE
from cliquepaths.emulator import SR_APPROX
from cliquepaths.emulator import LevelHierarchy
from cliquepaths.emulator import build_emulator
from cliquepaths.emulator import check_stretch
from cliquepaths.emulator import clique_table_size
from cliquepaths.emulator import compute_params
from cliquepaths.emulator import exact_limits
from cliquepaths.emulator import level_probabilities
from cliquepaths.emulator import load_emulator_edges
from cliquepaths.emulator import sample_levels
from cliquepaths.emulator import verify_clustering
from cliquepaths.emulator import verify_emulator
from cliquepaths.emulator import verify_level_stretch
from cliquepaths.emulator import verify_provenance
from cliquepaths.errors import ContractError
from cliquepaths.errors import GraphParseError
from cliquepaths.errors import ParameterError
from cliquepaths.graphs import INFINITY
from cliquepaths.graphs import Graph
from cliquepaths.ledger import RoundLedger

test_env = FileDrivenTesting()


def path_graph(n):
    return Graph.from_edges(n, [(v, v + 1) for v in range(n - 1)])


def random_graph(seed=4):
    return graphs.generate(dict(kind="gnp", n=40, p=0.1), seed=seed)


class TestParams:
    def test_exact_level_values(self):
        params = compute_params(16, 0.5, 2)
        assert params.eps0 == Fraction(1, 160)
        assert params.deltas == (1, 162, 25926)
        assert params.radius_sums == (0, 1, 163, 26089)
        assert params.betas == (0, 4, 660)
        assert params.hopset_eps == Fraction(1, 8)
        assert params.additive_bound("ideal") == 660
        assert params.additive_bound("clique") == 1320
        assert params.radius(1) == 162
        assert params.rounded_radius_sum(2) == 163

    def test_level_probabilities_multiply_to_inverse_root(self):
        assert level_probabilities(16, 2) == pytest.approx((0.5, 0.5))
        assert np.prod(level_probabilities(81, 3)) == pytest.approx(1 / 9)
        assert level_probabilities(1, 2) == (1.0, 1.0)

    def test_size_bound(self):
        assert compute_params(16, 0.5, 2).size_bound() == pytest.approx(64)

    def test_base_epsilon(self):
        params = compute_params(16, None, 2, base_epsilon=Fraction(1, 20))
        assert params.eps0 == Fraction(1, 20)
        assert params.eps_user == 4.0

    def test_invalid_params(self):
        with pytest.raises(ParameterError):
            compute_params(16, 0.5, 1)
        with pytest.raises(ParameterError):
            compute_params(16, 1.0, 2)
        with pytest.raises(ParameterError):
            compute_params(16, None, 2, base_epsilon=0.2)

    def test_clique_table_size(self):
        assert clique_table_size(1) == 1
        assert clique_table_size(8) == 4
        assert clique_table_size(27) == 9
        assert clique_table_size(10) == 5


class TestLevels:
    def test_levels_must_nest(self):
        with pytest.raises(ContractError):
            LevelHierarchy.from_sets(3, [{0, 1, 2}, {0}, {1}])

    def test_sample_levels_with_forced_probabilities(self):
        params = compute_params(6, 0.5, 2)
        hierarchy = sample_levels(params, 6, seed=0, probabilities=(1.0, 0.0))
        assert hierarchy.sizes() == [6, 6, 0]
        assert hierarchy.top_levels == (1,) * 6
        assert hierarchy.level(3) == frozenset()

    def test_sample_levels_rejects_wrong_probability_count(self):
        params = compute_params(6, 0.5, 2)
        with pytest.raises(ContractError):
            sample_levels(params, 6, seed=0, probabilities=(1.0,))

    def test_sample_levels_is_reproducible(self):
        params = compute_params(40, 0.5, 2)
        assert sample_levels(params, 40, 3).levels == sample_levels(params, 40, 3).levels


class TestIdealEmulator:
    def test_single_level_pairs_are_exact(self):
        # no vertex reaches S_1: every vertex links to all its neighbors
        emulator = build_emulator(path_graph(5), 0.5, 2, mode="ideal", probabilities=(0.0, 0.0))
        assert emulator.edge_list == ((0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 4, 1))
        assert emulator.edge_counts_by_rule() == {DENSE_LINK: 0, SPARSE_CLIQUE: 4, SR_APPROX: 0}

    def test_top_level_is_a_clique(self):
        emulator = build_emulator(path_graph(5), 0.5, 2, mode="ideal", probabilities=(1.0, 1.0))
        assert emulator.edge_count == 10
        assert emulator.edges[(0, 4)].weight == 4

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_all_checks_pass(self, seed):
        g = random_graph(seed)
        oracle = graphs.exact_apsp(g)
        emulator = build_emulator(g, 0.5, 2, mode="ideal", seed=seed)

        report = verify_emulator(g, emulator, oracle=oracle)
        assert report.passed, report.to_dict()
        assert report.edge_count == emulator.edge_count
        assert verify_clustering(emulator).passed
        assert verify_provenance(g, emulator, oracle=oracle).passed
        assert verify_level_stretch(g, emulator).passed

    def test_dense_vertices_add_one_link(self):
        emulator = build_emulator(random_graph(), 0.5, 2, mode="ideal", seed=7)
        for record in emulator.records:
            if record.dense:
                assert record.added == (record.dense_target,)
            assert record.chain[0] == record.vertex

    def test_distances_never_underestimate(self):
        g = random_graph()
        emulator = build_emulator(g, 0.5, 3, mode="ideal")
        exact = graphs.exact_apsp(g).matrix
        assert (emulator.distances >= exact).all()


class TestCliqueEmulator:
    def test_clique_mode_checks_pass(self):
        g = random_graph()
        oracle = graphs.exact_apsp(g)
        emulator = build_emulator(g, 0.5, 2, mode="clique", seed=2, probabilities=(0.8, 0.8))

        assert emulator.flags == []
        assert emulator.details["table_k"] == clique_table_size(40)
        assert emulator.additive_bound == 2 * emulator.params.betas[2]
        assert verify_emulator(g, emulator, oracle=oracle).passed
        assert verify_clustering(emulator).passed
        assert verify_provenance(g, emulator, oracle=oracle).passed

    def test_clique_mode_charges_phases(self):
        ledger = RoundLedger(40)
        build_emulator(random_graph(), 0.5, 2, mode="clique", seed=2, ledger=ledger)
        phases = ledger.totals_by_phase()
        assert "nearest" in phases

    def test_whp_mode_selects_a_run(self):
        g = random_graph()
        emulator = build_emulator(g, 0.5, 2, mode="clique_whp", seed=2, probabilities=(0.55, 0.5))
        runs = emulator.details["runs"]
        assert any(run["qualifies"] for run in runs)
        selected = runs[emulator.details["selected_run"]]
        assert selected["qualifies"]
        assert selected["edges"] == min(run["edges"] for run in runs if run["qualifies"])
        assert verify_emulator(g, emulator).passed

    def test_deterministic_mode(self):
        g = random_graph()
        oracle = graphs.exact_apsp(g)
        emulator = build_emulator(g, 0.5, 2, mode="deterministic")

        assert emulator.flags == []
        assert "heavy_hitting_set_size" in emulator.details
        assert verify_emulator(g, emulator, oracle=oracle).passed
        assert verify_provenance(g, emulator, oracle=oracle).passed
        assert build_emulator(g, 0.5, 2, mode="deterministic").edge_list == emulator.edge_list

    def test_unknown_mode(self):
        with pytest.raises(ParameterError):
            build_emulator(path_graph(3), 0.5, 2, mode="magic")


class TestStretch:
    def test_exact_limits(self):
        dg = np.array([1, 2, INFINITY], dtype=np.int64)
        assert exact_limits(dg, Fraction(3, 2), 0).tolist() == [1, 3, -1]
        assert exact_limits(dg, 1, Fraction(1, 2)).tolist() == [1, 2, -1]

    def test_exact_edges_pass(self):
        report = check_stretch(path_graph(3), [(0, 1, 1), (1, 2, 1)], 0.1, 0)
        assert report.passed
        assert report.residual_histogram == {0: 3}
        assert report.max_stretch == 1.0

    def test_underestimate_is_a_violation(self):
        report = check_stretch(path_graph(3), [(0, 1, 1), (1, 2, 1), (0, 2, 1)], 0.1, 0)
        assert report.violations == [(0, 2, 2, 1)]

    def test_missing_connection_is_a_violation(self):
        report = check_stretch(path_graph(3), [(0, 1, 1)], 0.1, 5)
        assert not report.passed
        assert report.max_stretch == float("inf")
        assert (1, 2, 1, INFINITY) in report.violations

    def test_additive_slack(self):
        edges = [(0, 1, 1), (1, 2, 2)]
        assert check_stretch(path_graph(3), edges, 0.0, 1).passed
        assert not check_stretch(path_graph(3), edges, 0.0, 0).passed


class TestSerialization:
    def test_dump_and_load_edges(self):
        emulator = build_emulator(path_graph(5), 0.5, 2, mode="ideal", probabilities=(1.0, 1.0))
        location = test_env.get_temp_file("emulator.txt")
        emulator.dump(location)
        edges = load_emulator_edges(location)
        assert len(edges) == 10
        assert [(u, v, w) for u, v, w, _, _ in edges] == list(emulator.edge_list)
        assert {rule for _, _, _, _, rule in edges} == {SPARSE_CLIQUE}

    def test_load_rejects_unknown_rule(self):
        location = test_env.get_temp_file("emulator.txt")
        with open(location, "w") as f:
            f.write("0 1 1 0 dense-link\n0 2 2 0 teleport\n")
        with pytest.raises(GraphParseError) as excinfo:
            load_emulator_edges(location)
        assert excinfo.value.line_number == 2

    def test_to_dict(self):
        emulator = build_emulator(path_graph(5), 0.5, 2, mode="ideal", probabilities=(1.0, 1.0))
        data = emulator.to_dict()
        assert data["level_sizes"] == [5, 5, 5]
        assert data["additive_bound"] == "660"
