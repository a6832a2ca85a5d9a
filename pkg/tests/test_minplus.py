#
# Copyright (c) cliquepaths authors and others. All rights reserved.
# SPDX-License-Identifier: Apache-2.0
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
#

import json

import numpy as np
import pytest
from commoncode.testcase import FileDrivenTesting

from cliquepaths import graphs
from cliquepaths.errors import CapacityError
from cliquepaths.errors import ContractError
from cliquepaths.errors import ParameterError
from cliquepaths.graphs import INFINITY
from cliquepaths.graphs import Graph
from cliquepaths.ledger import RoundLedger
from cliquepaths.minplus import MinPlusMatrix
from cliquepaths.minplus import NearestTable
from cliquepaths.minplus import SPARSE_THRESHOLD
from cliquepaths.minplus import filter_rows
from cliquepaths.minplus import k_nearest_bounded
from cliquepaths.minplus import k_nearest_iterations
from cliquepaths.minplus import minplus_product
from cliquepaths.minplus import nearest_by_bfs

test_env = FileDrivenTesting()

INF = INFINITY


def path_graph(n):
    return Graph.from_edges(n, [(v, v + 1) for v in range(n - 1)])


class TestMinPlusMatrix:
    def test_rejects_non_square_and_negative_values(self):
        with pytest.raises(ContractError):
            MinPlusMatrix(np.zeros((2, 3)))
        with pytest.raises(ContractError):
            MinPlusMatrix([[0, -1], [1, 0]])

    def test_from_graph_and_square(self):
        adjacency = MinPlusMatrix.from_graph(path_graph(3))
        assert adjacency.values.tolist() == [[0, 1, INF], [1, 0, 1], [INF, 1, 0]]
        squared = minplus_product(adjacency, adjacency)
        assert squared.values.tolist() == [[0, 1, 2], [1, 0, 1], [2, 1, 0]]

    def test_identity_is_neutral(self):
        adjacency = MinPlusMatrix.from_graph(path_graph(4))
        assert minplus_product(MinPlusMatrix.identity(4), adjacency) == adjacency

    def test_product_of_infinite_rows_stays_infinite(self):
        empty = MinPlusMatrix(np.full((2, 2), INF))
        assert minplus_product(empty, MinPlusMatrix.identity(2)) == empty

    def test_dimension_mismatch(self):
        with pytest.raises(ContractError):
            minplus_product(MinPlusMatrix.identity(2), MinPlusMatrix.identity(3))

    def test_filter_rows_keeps_smallest_by_column(self):
        matrix = MinPlusMatrix([[5, 1, 1, INF], [INF, INF, INF, 0], [2, 2, 2, 2], [0, 0, 0, 0]])
        filtered = filter_rows(matrix, 2)
        assert filtered.values.tolist() == [
            [INF, 1, 1, INF],
            [INF, INF, INF, 0],
            [2, 2, INF, INF],
            [0, 0, INF, INF],
        ]
        assert filtered.row_counts.tolist() == [2, 1, 2, 2]
        assert filtered.density == 1.75

    def test_filter_rows_rejects_negative_rho(self):
        with pytest.raises(ParameterError):
            filter_rows(MinPlusMatrix.identity(2), -1)

    def test_transpose(self):
        matrix = MinPlusMatrix([[0, 3], [INF, 0]])
        assert matrix.transpose().values.tolist() == [[0, INF], [3, 0]]


class TestNearest:
    def test_path_tables_include_self(self):
        table = k_nearest_bounded(path_graph(5), k=2, d=4)
        assert table.entries(0) == ((0, 0), (1, 1))
        # ties at distance 1 go to the smaller id
        assert table.entries(2) == ((2, 0), (1, 1))

    def test_distance_bound_truncates_tables(self):
        table = k_nearest_bounded(path_graph(6), k=6, d=2)
        assert table.vertices(0) == [0, 1, 2]
        assert not table.is_full(0)
        assert table.distance(0, 2) == 2
        assert table.distance(0, 3) is None

    def test_ball_and_holds_ball(self):
        table = k_nearest_bounded(path_graph(5), k=3, d=4)
        assert table.entries(0) == ((0, 0), (1, 1), (2, 2))
        assert table.ball(0, 1) == ((0, 0), (1, 1))
        assert table.holds_ball(0, 1)
        assert not table.holds_ball(0, 2)

    @pytest.mark.parametrize("seed", [1, 2, 3, 4])
    @pytest.mark.parametrize("k,d", [(1, 3), (3, 2), (5, 4), (8, 7), (64, 64)])
    def test_matches_truncated_bfs(self, seed, k, d):
        g = graphs.generate(dict(kind="gnp", n=60, p=0.06), seed=seed)
        assert k_nearest_bounded(g, k, d) == nearest_by_bfs(g, k, d)

    def test_matches_truncated_bfs_on_grid(self):
        g = graphs.generate(dict(kind="grid", width=6, height=7))
        assert k_nearest_bounded(g, 9, 5) == nearest_by_bfs(g, 9, 5)

    def test_ledger_charges_every_squaring(self):
        ledger = RoundLedger(5)
        k_nearest_bounded(path_graph(5), k=2, d=4, ledger=ledger)
        assert [entry.primitive for entry in ledger.entries] == ["filtered_mm", "filtered_mm"]

    def test_iterations_stop_at_fixpoint(self):
        tables = list(k_nearest_iterations(path_graph(3), k=3, d=1024))
        assert len(tables) < 1 + 10
        assert tables[-1].entries(0) == ((0, 0), (1, 1), (2, 2))

    def test_invalid_parameters(self):
        with pytest.raises(ParameterError):
            k_nearest_bounded(path_graph(3), k=0, d=1)
        with pytest.raises(ParameterError):
            k_nearest_bounded(path_graph(3), k=1, d=0)

    def test_as_matrix_and_dump_json(self):
        table = k_nearest_bounded(path_graph(3), k=2, d=2)
        matrix = table.as_matrix()
        assert matrix.values[0].tolist() == [0, 1, INF]

        location = test_env.get_temp_file("nearest.json")
        table.dump_json(location)
        with open(location) as f:
            data = json.load(f)
        assert data["k"] == 2
        assert data["rows"][0] == [[0, 0], [1, 1]]

    def test_as_sparse_keeps_the_self_entries(self):
        table = k_nearest_bounded(path_graph(3), k=2, d=2)
        matrix = table.as_sparse()
        assert matrix.shape == (3, 3)
        assert matrix.nnz == 6
        assert matrix.indices[matrix.indptr[0] : matrix.indptr[1]].tolist() == [0, 1]
        assert matrix.data[matrix.indptr[0] : matrix.indptr[1]].tolist() == [0, 1]

    def test_large_tables_only_have_a_sparse_view(self):
        n = SPARSE_THRESHOLD + 1
        table = NearestTable(k=1, d=1, rows=tuple(((v, 0),) for v in range(n)))
        with pytest.raises(CapacityError):
            table.as_matrix()
        matrix = table.as_sparse()
        assert matrix.nnz == n
        assert matrix.indices.tolist() == list(range(n))
