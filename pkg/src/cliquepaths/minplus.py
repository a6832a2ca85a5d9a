#
# Copyright (c) cliquepaths authors and others. All rights reserved.
# SPDX-License-Identifier: Apache-2.0
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
#

"""
Min-plus (distance product) linear algebra: products, row filtering and the
filtered squaring solver for the (k, d)-nearest problem.
"""

import csv
import json
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from cliquepaths.errors import CapacityError
from cliquepaths.errors import ContractError
from cliquepaths.errors import ParameterError
from cliquepaths.graphs import DISTANCE_DTYPE
from cliquepaths.graphs import INFINITY
from cliquepaths.graphs import ceil_log2
from cliquepaths.graphs import format_distance
from cliquepaths.graphs import saturating_add
from cliquepaths.graphs import to_distances

logger = logging.getLogger(__name__)

# upper bound on the candidate entries materialized by one squaring batch
_CANDIDATE_BUDGET = 2_000_000

# largest vertex count with a dense view of a nearest table
SPARSE_THRESHOLD = 4096


class MinPlusMatrix:
    """
    A square matrix over the (min, +) semiring. INFINITY is the zero element.
    """

    def __init__(self, values):
        values = np.array(values, dtype=DISTANCE_DTYPE)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ContractError(f"a min-plus matrix must be square, got shape {values.shape}")
        if (values < 0).any():
            raise ContractError("min-plus matrix entries must be >= 0")
        values.setflags(write=False)
        self.values = values

    @classmethod
    def identity(cls, n):
        values = np.full((n, n), INFINITY, dtype=DISTANCE_DTYPE)
        np.fill_diagonal(values, 0)
        return cls(values)

    @classmethod
    def from_graph(cls, g):
        """
        Return the adjacency of `g` with a 0 diagonal and 1 for each edge.
        """
        values = np.full((g.n, g.n), INFINITY, dtype=DISTANCE_DTYPE)
        for u, v in g.edges():
            values[u, v] = 1
            values[v, u] = 1
        np.fill_diagonal(values, 0)
        return cls(values)

    @classmethod
    def from_rows(cls, n, rows):
        """
        Return a matrix from a mapping of {row: {column: value}}.
        """
        values = np.full((n, n), INFINITY, dtype=DISTANCE_DTYPE)
        for row, entries in rows.items():
            for column, value in entries.items():
                values[row, column] = value
        return cls(values)

    @property
    def n(self):
        return self.values.shape[0]

    @cached_property
    def row_counts(self):
        return (self.values != INFINITY).sum(axis=1)

    @property
    def density(self):
        """
        Return the average number of non-INFINITY entries per row.
        """
        if not self.n:
            return 0.0
        return float(self.row_counts.mean())

    def transpose(self):
        return MinPlusMatrix(self.values.T)

    def __eq__(self, other):
        if not isinstance(other, MinPlusMatrix):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def __repr__(self):
        return f"MinPlusMatrix(n={self.n}, density={self.density:.2f})"

    def dump_csv(self, location):
        with open(location, "w", encoding="utf-8", newline="") as output:
            writer = csv.writer(output)
            writer.writerow(["row"] + list(range(self.n)))
            for index, row in enumerate(self.values):
                writer.writerow([index] + [format_distance(value) for value in row])


def minplus_product(left, right):
    """
    Return the min-plus product of two MinPlusMatrix: entry (i, j) is the
    minimum over k of left[i, k] + right[k, j], with saturating addition.
    Each row only visits the finite entries of the left row.
    """
    if left.n != right.n:
        raise ContractError(f"dimension mismatch: {left.n} x {left.n} by {right.n} x {right.n}")
    n = left.n
    product = np.full((n, n), INFINITY, dtype=DISTANCE_DTYPE)
    right_values = right.values
    for row in range(n):
        support = np.flatnonzero(left.values[row] != INFINITY)
        if not len(support):
            continue
        sums = saturating_add(left.values[row, support][:, None], right_values[support])
        product[row] = sums.min(axis=0)
    return MinPlusMatrix(product)


def filter_rows(matrix, rho):
    """
    Return a MinPlusMatrix keeping in each row only its `rho` smallest finite
    entries, ties broken by smaller column id. Other entries become INFINITY.
    """
    if rho < 0:
        raise ParameterError(f"rho must be >= 0, got {rho}")
    n = matrix.n
    filtered = np.full((n, n), INFINITY, dtype=DISTANCE_DTYPE)
    if rho == 0 or n == 0:
        return MinPlusMatrix(filtered)
    # a stable sort keeps equal values in column order
    order = np.argsort(matrix.values, axis=1, kind="stable")[:, :rho]
    rows = np.repeat(np.arange(n), order.shape[1])
    columns = order.ravel()
    kept = matrix.values[rows, columns]
    finite = kept != INFINITY
    filtered[rows[finite], columns[finite]] = kept[finite]
    return MinPlusMatrix(filtered)


@dataclass(frozen=True)
class NearestTable:
    """
    For each vertex v, the (k, d)-nearest set N_{k,d}(v) as a tuple of
    (vertex, distance) pairs sorted by (distance, vertex). The self entry
    (v, 0) is included.
    """

    k: int
    d: int
    rows: tuple

    @classmethod
    def from_arrays(cls, k, d, indptr, columns, distances):
        rows = tuple(
            tuple(
                zip(
                    columns[indptr[v] : indptr[v + 1]].tolist(),
                    distances[indptr[v] : indptr[v + 1]].tolist(),
                )
            )
            for v in range(len(indptr) - 1)
        )
        return cls(k=k, d=d, rows=rows)

    @property
    def n(self):
        return len(self.rows)

    def entries(self, vertex):
        return self.rows[vertex]

    def vertices(self, vertex):
        return [u for u, _ in self.rows[vertex]]

    @cached_property
    def _lookup(self):
        return tuple(dict(row) for row in self.rows)

    def distance(self, vertex, other):
        """
        Return the distance from `vertex` to `other` if `other` is in the table
        of `vertex`, None otherwise.
        """
        return self._lookup[vertex].get(other)

    def is_full(self, vertex):
        return len(self.rows[vertex]) >= self.k

    def max_distance(self, vertex):
        row = self.rows[vertex]
        return row[-1][1] if row else 0

    def ball(self, vertex, radius):
        """
        Return the entries of `vertex` at distance at most `radius`.
        """
        return tuple((u, dist) for u, dist in self.rows[vertex] if dist <= radius)

    def holds_ball(self, vertex, radius):
        """
        Return True if the table of `vertex` provably contains the whole
        radius-`radius` ball: either the table is not full or some entry lies
        beyond `radius`.
        """
        return not self.is_full(vertex) or self.max_distance(vertex) > radius

    @property
    def density(self):
        if not self.rows:
            return 0.0
        return sum(len(row) for row in self.rows) / len(self.rows)

    def as_matrix(self):
        """
        Return the table as a dense MinPlusMatrix, INFINITY outside the
        tables. Refused above SPARSE_THRESHOLD vertices: use as_sparse().
        """
        if self.n > SPARSE_THRESHOLD:
            raise CapacityError(
                f"a dense view of {self.n} vertices exceeds {SPARSE_THRESHOLD}: use as_sparse()"
            )
        return MinPlusMatrix.from_rows(self.n, {v: dict(row) for v, row in enumerate(self.rows)})

    def as_sparse(self):
        """
        Return the table as a row-compressed scipy CSR matrix. Absent entries
        mean "not in the table" and the 0 self entries are stored explicitly.
        """
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(row) for row in self.rows])
        columns = np.fromiter((u for row in self.rows for u, _ in row), dtype=np.int64)
        distances = np.fromiter(
            (dist for row in self.rows for _, dist in row), dtype=DISTANCE_DTYPE
        )
        return sparse.csr_matrix((distances, columns, indptr), shape=(self.n, self.n))

    def to_dict(self):
        return dict(
            k=self.k,
            d=self.d,
            rows=[[[u, dist] for u, dist in row] for row in self.rows],
        )

    def dump_json(self, location):
        with open(location, "w", encoding="utf-8") as output:
            json.dump(self.to_dict(), output, indent=2)


def _initial_rows(g, k):
    """
    Return the row-compressed adjacency with a 0 diagonal, filtered to the k
    smallest entries per row: the vertex itself first, then neighbors by id.
    """
    indptr = [0]
    columns = []
    distances = []
    for v in range(g.n):
        row = [v] + list(g.adjacency[v][: k - 1])
        columns.extend(row)
        distances.extend([0] + [1] * (len(row) - 1))
        indptr.append(len(columns))
    return (
        np.asarray(indptr, dtype=np.int64),
        np.asarray(columns, dtype=np.int64),
        np.asarray(distances, dtype=DISTANCE_DTYPE),
    )


def _filtered_square(n, k, d, indptr, columns, distances):
    """
    Return the row-compressed filtered square of a row-compressed matrix:
    the min-plus square, with entries above `d` dropped and each row cut to its
    k smallest entries by (distance, column).
    """
    row_lengths = np.diff(indptr)
    # number of candidates produced by each row: sum of the lengths of the
    # rows it points to
    entry_lengths = row_lengths[columns]
    per_row = np.add.reduceat(entry_lengths, indptr[:-1]) if len(columns) else np.zeros(n)
    per_row = np.where(row_lengths > 0, per_row, 0)

    new_indptr = [0]
    new_columns = []
    new_distances = []

    start = 0
    while start < n:
        stop = start + 1
        budget = per_row[start]
        while stop < n and budget + per_row[stop] <= _CANDIDATE_BUDGET:
            budget += per_row[stop]
            stop += 1

        lo, hi = indptr[start], indptr[stop]
        owners = np.repeat(np.arange(start, stop), row_lengths[start:stop])
        middle = columns[lo:hi]
        first_leg = distances[lo:hi]
        lengths = row_lengths[middle]
        total = int(lengths.sum())

        cand_owner = np.repeat(owners, lengths)
        cand_first = np.repeat(first_leg, lengths)
        within = np.arange(total) - np.repeat(np.cumsum(lengths) - lengths, lengths)
        positions = np.repeat(indptr[middle], lengths) + within
        cand_column = columns[positions]
        cand_distance = saturating_add(cand_first, distances[positions])

        order = np.lexsort((cand_column, cand_distance, cand_owner))
        cand_owner = cand_owner[order]
        cand_column = cand_column[order]
        cand_distance = cand_distance[order]

        # the first occurrence of each (owner, column) holds its minimum
        keys = cand_owner * n + cand_column
        _, first = np.unique(keys, return_index=True)
        first.sort()
        cand_owner = cand_owner[first]
        cand_column = cand_column[first]
        cand_distance = cand_distance[first]

        within_d = cand_distance <= d
        cand_owner = cand_owner[within_d]
        cand_column = cand_column[within_d]
        cand_distance = cand_distance[within_d]

        owner_starts = np.searchsorted(cand_owner, np.arange(start, stop))
        rank = np.arange(len(cand_owner)) - owner_starts[cand_owner - start]
        keep = rank < k
        cand_owner = cand_owner[keep]
        new_columns.append(cand_column[keep])
        new_distances.append(cand_distance[keep])
        counts = np.bincount(cand_owner - start, minlength=stop - start)
        new_indptr.extend((new_indptr[-1] + np.cumsum(counts)).tolist())
        start = stop

    return (
        np.asarray(new_indptr, dtype=np.int64),
        np.concatenate(new_columns) if new_columns else np.zeros(0, dtype=np.int64),
        np.concatenate(new_distances) if new_distances else np.zeros(0, dtype=DISTANCE_DTYPE),
    )


def k_nearest_iterations(g, k, d):
    """
    Yield the NearestTable after each filtered squaring, starting with the
    filtered adjacency. There are at most ⌈log₂ d⌉ squarings; iteration stops
    early once a squaring leaves the table unchanged since every later
    squaring would too.
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if d < 1:
        raise ParameterError(f"d must be >= 1, got {d}")

    arrays = _initial_rows(g, k)
    yield NearestTable.from_arrays(k, d, *arrays)

    for iteration in range(ceil_log2(d)):
        squared = _filtered_square(g.n, k, d, *arrays)
        if all(np.array_equal(old, new) for old, new in zip(arrays, squared)):
            logger.debug(f"k_nearest: fixpoint after {iteration} squarings")
            return
        arrays = squared
        yield NearestTable.from_arrays(k, d, *arrays)


def k_nearest_bounded(g, k, d, ledger=None):
    """
    Return the NearestTable of the (k, d)-nearest vertices of every vertex of
    `g` with exact distances, computed by ⌈log₂ d⌉ filtered min-plus
    squarings of the adjacency. Charge each squaring to the `ledger`.
    """
    table = None
    densities = []
    for table in k_nearest_iterations(g, k, d):
        densities.append(table.density)

    if ledger is not None:
        squarings = ceil_log2(d)
        for iteration in range(squarings):
            # after a fixpoint, every remaining squaring sees the final table
            density = densities[min(iteration, len(densities) - 1)]
            ledger.charge_filtered_mm(density, density, k, d)

    logger.debug(
        f"k_nearest_bounded: n={g.n} k={k} d={d} density={table.density:.2f}"
    )
    return table


def nearest_by_bfs(g, k, d, batch_size=256):
    """
    Return the NearestTable of `g` computed from truncated BFS rows, ordering
    each ball by (distance, vertex id) and keeping the first `k`.
    """
    if k < 1 or d < 1:
        raise ParameterError("k and d must be >= 1")
    rows = []
    for start in range(0, g.n, batch_size):
        sources = np.arange(start, min(g.n, start + batch_size))
        distances = csgraph.dijkstra(
            g.csr, directed=False, unweighted=True, indices=sources, limit=d
        )
        distances = to_distances(np.atleast_2d(distances))
        for row in distances:
            inside = np.flatnonzero(row <= d)
            order = np.lexsort((inside, row[inside]))[:k]
            rows.append(tuple(zip(inside[order].tolist(), row[inside][order].tolist())))
    return NearestTable(k=k, d=d, rows=tuple(rows))
