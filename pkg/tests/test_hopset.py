#
# Copyright (c) cliquepaths authors and others. All rights reserved.
# SPDX-License-Identifier: Apache-2.0
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
#

import pytest
from commoncode.testcase import FileDrivenTesting

from cliquepaths import graphs
from cliquepaths.errors import ParameterError
from cliquepaths.graphs import Graph
from cliquepaths.hopset import build_bounded_hopset
from cliquepaths.hopset import hopset_params
from cliquepaths.hopset import verify_basis
from cliquepaths.hopset import verify_hopset
from cliquepaths.ledger import RoundLedger

test_env = FileDrivenTesting()


def path_graph(n):
    return Graph.from_edges(n, [(v, v + 1) for v in range(n - 1)])


class TestHopsetParams:
    def test_params(self):
        params = hopset_params(64, 0.5, 2)
        assert params.eps_inner == 0.5
        assert params.delta == 0.125
        assert params.beta == 24
        assert params.k == 48
        assert params.iterations == 1

    def test_eps_is_capped_at_one(self):
        assert hopset_params(16, 3.0, 2).eps_inner == 1.0

    def test_invalid_params(self):
        with pytest.raises(ParameterError):
            hopset_params(16, 0, 4)
        with pytest.raises(ParameterError):
            hopset_params(16, 0.5, 0)


class TestBuildHopset:
    def test_small_graph_links_whole_tables(self):
        # k = 7 > n: no table is full and no pivot is needed
        hopset = build_bounded_hopset(path_graph(5), 0.5, 2)
        assert hopset.pivots == frozenset()
        assert hopset.edges == (
            (0, 1, 1),
            (0, 2, 2),
            (1, 2, 1),
            (1, 3, 2),
            (2, 3, 1),
            (2, 4, 2),
            (3, 4, 1),
        )
        assert hopset.passed

    @pytest.mark.parametrize("mode", ["randomized", "deterministic"])
    def test_stretch_and_basis_on_random_graphs(self, mode):
        g = graphs.generate(dict(kind="gnp", n=60, p=0.08), seed=2)
        oracle = graphs.exact_apsp(g)
        hopset = build_bounded_hopset(g, 0.5, 8, mode=mode, seed=1)

        assert hopset.passed
        assert hopset.pivots
        report = verify_hopset(g, hopset, hopset.beta, 0.5, 8, oracle=oracle)
        assert report.passed, report.to_dict()
        assert report.worst_slack <= 1.5
        assert verify_basis(g, hopset, oracle=oracle).passed

    def test_weights_never_underestimate(self):
        g = graphs.generate(dict(kind="grid", width=8, height=8))
        oracle = graphs.exact_apsp(g)
        hopset = build_bounded_hopset(g, 0.25, 6, seed=3)
        for u, v, weight in hopset.edges:
            assert u < v
            assert weight >= oracle.distance(u, v)

    def test_is_reproducible(self):
        g = graphs.generate(dict(kind="gnp", n=60, p=0.08), seed=2)
        first = build_bounded_hopset(g, 0.5, 8, seed=5)
        assert first.edges == build_bounded_hopset(g, 0.5, 8, seed=5).edges

    def test_charges_nearest_table_and_detection(self):
        ledger = RoundLedger(60)
        g = graphs.generate(dict(kind="gnp", n=60, p=0.08), seed=2)
        build_bounded_hopset(g, 0.5, 8, ledger=ledger)
        totals = ledger.totals_by_primitive()
        assert "filtered_mm" in totals
        assert "source_detection" in totals

    def test_unknown_mode(self):
        with pytest.raises(ParameterError):
            build_bounded_hopset(path_graph(3), 0.5, 2, mode="quantum")

    def test_dump_loads_as_weighted_edges(self):
        hopset = build_bounded_hopset(path_graph(5), 0.5, 2)
        location = test_env.get_temp_file("hopset.txt")
        hopset.dump(location)
        assert tuple(graphs.load_weighted_edges(location)) == hopset.edges

    def test_to_dict(self):
        hopset = build_bounded_hopset(path_graph(5), 0.5, 2)
        data = hopset.to_dict()
        assert data["edge_count"] == 7
        assert data["pivot_count"] == 0
        assert data["params"]["beta"] == 24


class TestVerifyHopset:
    def test_shortcut_below_the_distance_is_a_violation(self):
        g = path_graph(5)
        report = verify_hopset(g, [(0, 4, 1)], beta=4, eps=0.5, t=4)
        assert not report.passed
        assert (0, 4, 4, 1) in report.violations

    def test_too_few_hops_is_a_violation(self):
        report = verify_hopset(path_graph(5), [], beta=2, eps=0.5, t=4)
        assert (0, 3, 3, graphs.INFINITY) in report.violations
        assert report.worst_slack == float("inf")

    def test_empty_overlay_with_enough_hops(self):
        report = verify_hopset(path_graph(5), [], beta=4, eps=0.1, t=4)
        assert report.passed
        assert report.pairs_checked == 10
        assert report.worst_slack == 1.0
