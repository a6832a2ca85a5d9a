#
# Copyright (c) cliquepaths authors and others. All rights reserved.
# SPDX-License-Identifier: Apache-2.0
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
#

import pytest

from cliquepaths import graphs
from cliquepaths.errors import ContractError
from cliquepaths.errors import ParameterError
from cliquepaths.graphs import INFINITY
from cliquepaths.graphs import Graph
from cliquepaths.graphs import WeightedGraphView
from cliquepaths.ledger import RoundLedger
from cliquepaths.primitives import HittingSetInstance
from cliquepaths.primitives import distance_through_sets
from cliquepaths.primitives import random_hitting_set
from cliquepaths.primitives import sampling_probability
from cliquepaths.primitives import source_detection
from cliquepaths.primitives import verify_hitting_set
from cliquepaths.randomness import child_seed
from cliquepaths.randomness import label_key
from cliquepaths.randomness import stream


def path_graph(n):
    return Graph.from_edges(n, [(v, v + 1) for v in range(n - 1)])


def window_targets(n, size):
    return {v: [(v + j) % n for j in range(size)] for v in range(n)}


class TestRandomness:
    def test_same_seed_and_labels_give_the_same_stream(self):
        assert stream(7, "a", 1).random(4).tolist() == stream(7, "a", 1).random(4).tolist()

    def test_labels_separate_streams(self):
        assert stream(7, "a").random(4).tolist() != stream(7, "b").random(4).tolist()

    def test_label_key_is_stable_and_masks_integers(self):
        assert label_key(5) == 5
        assert label_key(2**32 + 5) == 5
        assert label_key("sources") == label_key("sources")

    def test_child_seed_is_a_plain_int(self):
        seed = child_seed(3, "graph")
        assert isinstance(seed, int)
        assert seed == child_seed(3, "graph")
        assert 0 <= seed < 2**63


class TestSourceDetection:
    def test_hop_bound_hides_far_sources(self):
        result = source_detection(path_graph(5), [0, 4], d=2)
        assert result.sources == (0, 4)
        assert result.distance(0, 2) == 2
        assert result.distance(0, 3) is None
        assert result.for_vertex(2) == {0: 2, 4: 2}
        assert result.for_vertex(1) == {0: 1}

    def test_duplicate_sources_are_merged(self):
        result = source_detection(path_graph(3), [1, 1, 0], d=1)
        assert result.sources == (1, 0)
        assert result.distances.shape == (2, 3)

    def test_weighted_overlay_edges(self):
        view = WeightedGraphView(base=path_graph(6), extra_edges=((0, 5, 2),))
        result = source_detection(view, [0], d=2)
        assert result.distance(0, 5) == 2
        assert result.distance(0, 4) == 3

    def test_matches_bfs_with_a_large_hop_bound(self):
        g = graphs.generate(dict(kind="gnp", n=50, p=0.08), seed=11)
        result = source_detection(g, [3, 17], d=g.n)
        assert result.distances[0].tolist() == graphs.bfs_from(g, 3).tolist()
        assert result.distances[1].tolist() == graphs.bfs_from(g, 17).tolist()

    def test_charges_the_ledger(self):
        ledger = RoundLedger(5)
        source_detection(path_graph(5), [0], d=2, ledger=ledger)
        assert [entry.primitive for entry in ledger.entries] == ["source_detection"]

    def test_rejects_zero_hop_bound(self):
        with pytest.raises(ParameterError):
            source_detection(path_graph(3), [0], d=0)


class TestDistanceThroughSets:
    def test_common_witness_with_array_estimates(self):
        oracle = graphs.exact_apsp(path_graph(4))
        witnesses = [{1}, {1}, {1, 2}, {2}]
        result = distance_through_sets(witnesses, oracle.matrix)
        assert result.values[0, 2] == 2
        # 0 and 3 share no witness
        assert result.values[0, 3] == INFINITY
        assert result.values[2, 3] == 1

    def test_mapping_estimates(self):
        delta = {0: {2: 5}, 1: {2: 1}}
        result = distance_through_sets([{2}, {2}, set()], delta)
        assert result.values[:2, :2].tolist() == [[10, 6], [6, 2]]
        assert result.values[2].tolist() == [INFINITY] * 3

    def test_missing_estimate_is_a_contract_error(self):
        with pytest.raises(ContractError):
            distance_through_sets([{1}, {0}], {0: {1: 1}})

    def test_empty_witness_sets(self):
        result = distance_through_sets([set(), {0}], {1: {0: 1}})
        assert result.values[0].tolist() == [INFINITY, INFINITY]

    def test_charges_average_witness_count(self):
        ledger = RoundLedger(2)
        distance_through_sets([{0, 1}, {1}], {0: {0: 0, 1: 1}, 1: {1: 0}}, ledger=ledger)
        assert ledger.entries[0].primitive == "distance_through"


class TestRandomHittingSet:
    def test_sampling_probability(self):
        assert sampling_probability(1, 1, 3) == 1.0
        assert sampling_probability(1000, 10**6, 3) < 1.0

    def test_instance_checks(self):
        with pytest.raises(ParameterError):
            HittingSetInstance.from_sets({0: [0]}, k=0, n=2)
        with pytest.raises(ContractError):
            HittingSetInstance.from_sets({0: [0]}, k=2, n=2)

    def test_hits_every_window(self):
        inst = HittingSetInstance.from_sets(window_targets(256, 64), k=64, n=256)
        members = random_hitting_set(inst, 256, seed=4)
        assert members <= set(range(256))
        assert verify_hitting_set(inst, members).passed

    def test_is_reproducible(self):
        inst = HittingSetInstance.from_sets(window_targets(64, 16), k=16, n=64)
        first = random_hitting_set(inst, 64, seed=9, label="x")
        assert first == random_hitting_set(inst, 64, seed=9, label="x")

    def test_rejects_small_constant(self):
        inst = HittingSetInstance.from_sets(window_targets(8, 2), k=2, n=8)
        with pytest.raises(ParameterError):
            random_hitting_set(inst, 8, c=2.0)

    def test_verify_reports_misses(self):
        inst = HittingSetInstance.from_sets({0: [0, 1], 1: [2, 3]}, k=2, n=4)
        report = verify_hitting_set(inst, {1})
        assert report.misses == [1]
        assert not report.passed
        assert report.to_dict() == dict(misses=[1], size=1, passed=False)

    def test_announcement_is_charged(self):
        ledger = RoundLedger(8)
        inst = HittingSetInstance.from_sets(window_targets(8, 4), k=4, n=8)
        random_hitting_set(inst, 8, ledger=ledger)
        assert ledger.total == 1
