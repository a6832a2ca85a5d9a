#
# Copyright (c) cliquepaths authors and others. All rights reserved.
# SPDX-License-Identifier: Apache-2.0
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
#

"""
Graph representation, generators, exact distance oracles and serialization.
This is the ground-truth layer every other module verifies against.
"""

import csv
import logging
import math
import re
from dataclasses import dataclass
from dataclasses import field
from functools import cached_property
from typing import NamedTuple
from typing import Optional

import networkx as nx
import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from cliquepaths.errors import CapacityError
from cliquepaths.errors import ContractError
from cliquepaths.errors import GraphParseError
from cliquepaths.errors import ParameterError
from cliquepaths.randomness import SEED_MASK

logger = logging.getLogger(__name__)

DISTANCE_DTYPE = np.int64
INFINITY = int(np.iinfo(DISTANCE_DTYPE).max)
# sums of two finite distances stay below this value
_SATURATION = INFINITY // 2

DEFAULT_ORACLE_CAP = 8192

# upper bound on the scratch entries of one Bellman-Ford relaxation batch
_RELAXATION_BUDGET = 4_000_000

# first line written by dump_edge_list(); such files name vertices by label
DUMP_HEADER = re.compile(r"^# n=(\d+) m=(\d+)$")

GRAPH_KINDS = ("gnp", "path", "cycle", "grid", "complete", "barbell", "file")


def saturating_add(left, right):
    """
    Return the element-wise sum of two distance arrays where any operand equal
    to INFINITY yields INFINITY.
    """
    left = np.asarray(left, dtype=DISTANCE_DTYPE)
    right = np.asarray(right, dtype=DISTANCE_DTYPE)
    total = np.minimum(left, _SATURATION) + np.minimum(right, _SATURATION)
    return np.where(total >= _SATURATION, INFINITY, total)


def to_distances(values):
    """
    Return an int64 distance array from a float array using inf for
    unreachable entries, as scipy's csgraph routines return.
    """
    values = np.asarray(values)
    distances = np.full(values.shape, INFINITY, dtype=DISTANCE_DTYPE)
    finite = np.isfinite(values)
    distances[finite] = np.rint(values[finite]).astype(DISTANCE_DTYPE)
    return distances


def format_distance(value):
    return "INF" if value >= INFINITY else str(int(value))


def ceil_log2(value):
    """
    Return ⌈log₂ value⌉ for a positive number, and 0 for values up to 1.
    """
    if value <= 1:
        return 0
    return math.ceil(math.log2(value))


@dataclass(frozen=True)
class Graph:
    """
    An unweighted undirected simple graph over the dense vertex ids 0..n-1.
    `adjacency` holds one sorted tuple of neighbors per vertex. `labels`
    optionally maps each vertex id to the external label it was loaded from.
    """

    n: int
    adjacency: tuple
    labels: Optional[tuple] = None

    def __post_init__(self):
        if self.n < 0:
            raise ContractError(f"vertex count must be >= 0, got {self.n}")
        if len(self.adjacency) != self.n:
            raise ContractError("adjacency must have one neighbor list per vertex")
        if self.labels is not None and len(self.labels) != self.n:
            raise ContractError("labels must have one entry per vertex")
        for vertex, neighbors in enumerate(self.adjacency):
            previous = -1
            for neighbor in neighbors:
                if not 0 <= neighbor < self.n:
                    raise ContractError(f"neighbor {neighbor} of {vertex} out of range")
                if neighbor == vertex:
                    raise ContractError(f"self-loop at vertex {vertex}")
                if neighbor <= previous:
                    raise ContractError(f"neighbors of {vertex} must be sorted and unique")
                previous = neighbor
        for vertex, neighbors in enumerate(self.adjacency):
            for neighbor in neighbors:
                if vertex not in self.neighbor_sets[neighbor]:
                    raise ContractError(f"edge {vertex}-{neighbor} is not symmetric")

    @classmethod
    def from_edges(cls, n, edges, labels=None):
        """
        Return a Graph with `n` vertices from an iterable of (u, v) `edges`.
        Duplicate edges and self-loops are dropped.
        """
        neighbor_sets = [set() for _ in range(n)]
        for u, v in edges:
            u = int(u)
            v = int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise ContractError(f"edge {u}-{v} has an endpoint outside [0, {n})")
            if u == v:
                continue
            neighbor_sets[u].add(v)
            neighbor_sets[v].add(u)
        adjacency = tuple(tuple(sorted(neighbors)) for neighbors in neighbor_sets)
        if labels is not None:
            labels = tuple(labels)
        return cls(n=n, adjacency=adjacency, labels=labels)

    @classmethod
    def from_networkx(cls, graph):
        """
        Return a Graph from a networkx `graph`, numbering nodes in sorted order
        and keeping the original node names as labels.
        """
        relabeled = nx.convert_node_labels_to_integers(
            graph, ordering="sorted", label_attribute="label"
        )
        labels = tuple(
            str(relabeled.nodes[node]["label"]).replace(" ", "")
            for node in range(len(relabeled))
        )
        return cls.from_edges(len(relabeled), relabeled.edges(), labels=labels)

    @cached_property
    def neighbor_sets(self):
        return tuple(frozenset(neighbors) for neighbors in self.adjacency)

    @cached_property
    def degrees(self):
        return np.array([len(neighbors) for neighbors in self.adjacency], dtype=np.int64)

    @property
    def num_edges(self):
        return int(self.degrees.sum()) // 2

    def neighbors(self, vertex):
        return self.adjacency[vertex]

    def has_edge(self, u, v):
        return v in self.neighbor_sets[u]

    def edges(self):
        """
        Yield each undirected edge once as (u, v) with u < v.
        """
        for u, neighbors in enumerate(self.adjacency):
            for v in neighbors:
                if u < v:
                    yield u, v

    def subgraph_of_edges(self, keep):
        """
        Return a new Graph on the same vertices with the edges for which the
        `keep` callable returns True.
        """
        return Graph.from_edges(
            self.n, [(u, v) for u, v in self.edges() if keep(u, v)], labels=self.labels
        )

    def label(self, vertex):
        if self.labels is None:
            return str(vertex)
        return self.labels[vertex]

    @cached_property
    def csr(self):
        """
        Return the adjacency as a symmetric scipy CSR matrix with unit weights.
        """
        rows = np.repeat(np.arange(self.n), self.degrees)
        cols = np.fromiter(
            (v for neighbors in self.adjacency for v in neighbors),
            dtype=np.int64,
            count=int(self.degrees.sum()),
        )
        data = np.ones(len(cols), dtype=np.float64)
        return sparse.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))


class Arcs(NamedTuple):
    """
    Directed arcs of a weighted view, sorted by head, with the grouping
    needed for a vectorized relaxation.
    """

    tails: np.ndarray
    heads: np.ndarray
    weights: np.ndarray
    unique_heads: np.ndarray
    starts: np.ndarray


def _arcs_from_edges(n, unit_edges, weighted_edges):
    tails = []
    heads = []
    weights = []
    for u, v in unit_edges:
        tails.extend((u, v))
        heads.extend((v, u))
        weights.extend((1, 1))
    for u, v, weight in weighted_edges:
        tails.extend((u, v))
        heads.extend((v, u))
        weights.extend((weight, weight))

    tails = np.asarray(tails, dtype=np.int64)
    heads = np.asarray(heads, dtype=np.int64)
    weights = np.asarray(weights, dtype=DISTANCE_DTYPE)
    order = np.argsort(heads, kind="stable")
    tails = tails[order]
    heads = heads[order]
    weights = weights[order]
    unique_heads, starts = np.unique(heads, return_index=True)
    return Arcs(tails, heads, weights, unique_heads, starts)


@dataclass(frozen=True)
class WeightedGraphView:
    """
    The union G ∪ H of an unweighted base Graph and a weighted overlay H given
    as (u, v, weight) edges with integer weights >= 1.
    """

    base: Graph
    extra_edges: tuple = field(default_factory=tuple)

    def __post_init__(self):
        n = self.base.n
        for u, v, weight in self.extra_edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ContractError(f"overlay edge {u}-{v} has an endpoint outside [0, {n})")
            if u == v:
                raise ContractError(f"overlay self-loop at vertex {u}")
            if weight < 1:
                raise ContractError(f"overlay edge {u}-{v} has weight {weight} < 1")

    @property
    def n(self):
        return self.base.n

    @property
    def num_edges(self):
        return self.base.num_edges + len(self.extra_edges)

    @cached_property
    def arcs(self):
        return _arcs_from_edges(self.n, list(self.base.edges()), self.extra_edges)


def as_view(graph):
    """
    Return a WeightedGraphView for a Graph or a WeightedGraphView.
    """
    if isinstance(graph, WeightedGraphView):
        return graph
    return WeightedGraphView(base=graph)


@dataclass(frozen=True)
class DistanceOracle:
    """
    Exact pairwise distances as an n x n int64 matrix, INFINITY for
    disconnected pairs. `hop_bound` is None for true distances and the hop
    limit for hop-bounded distances.
    """

    matrix: np.ndarray
    hop_bound: Optional[int] = None

    @property
    def n(self):
        return self.matrix.shape[0]

    def distance(self, u, v):
        return int(self.matrix[u, v])

    def row(self, source):
        return self.matrix[source]

    def dump_csv(self, location):
        dump_distance_rows(location, range(self.n), self.matrix)


def _check_vertex(g, vertex):
    if not 0 <= vertex < g.n:
        raise ContractError(f"vertex {vertex} is out of range for a graph with {g.n} vertices")


def bfs_from(g, source):
    """
    Return the exact unweighted distances from `source` to every vertex of `g`
    as an int64 vector, INFINITY for unreachable vertices.
    """
    _check_vertex(g, source)
    distances = csgraph.shortest_path(
        g.csr, method="D", directed=False, unweighted=True, indices=source
    )
    return to_distances(distances)


def exact_apsp(g, oracle_cap=DEFAULT_ORACLE_CAP):
    """
    Return a DistanceOracle with exact all-pairs distances of `g`, one BFS per
    vertex. Raise a CapacityError if `g` has more than `oracle_cap` vertices.
    """
    if g.n > oracle_cap:
        raise CapacityError(
            f"exact oracle is capped at {oracle_cap} vertices, the graph has {g.n}"
        )
    if g.n == 0:
        return DistanceOracle(matrix=np.zeros((0, 0), dtype=DISTANCE_DTYPE))
    logger.debug(f"exact_apsp: running {g.n} BFS")
    distances = csgraph.shortest_path(g.csr, method="D", directed=False, unweighted=True)
    return DistanceOracle(matrix=to_distances(distances))


def weighted_distances(n, edges, sources=None):
    """
    Return Dijkstra distances over the weighted (u, v, weight) `edges` only,
    from `sources` (all vertices if None) as an int64 matrix.
    """
    sources = np.arange(n) if sources is None else np.asarray(list(sources), dtype=np.int64)
    if n == 0 or len(sources) == 0:
        return np.zeros((len(sources), n), dtype=DISTANCE_DTYPE)
    lightest = {}
    for u, v, weight in edges:
        key = (min(u, v), max(u, v))
        if key not in lightest or weight < lightest[key]:
            lightest[key] = weight
    rows = [u for u, _ in lightest] + [v for _, v in lightest]
    cols = [v for _, v in lightest] + [u for u, _ in lightest]
    data = [float(w) for w in lightest.values()] * 2
    matrix = sparse.csr_matrix((data, (rows, cols)), shape=(n, n))
    distances = csgraph.dijkstra(matrix, directed=True, indices=sources)
    return to_distances(np.atleast_2d(distances))


def hop_bounded_matrix(gv, sources, hop_bound):
    """
    Return an int64 matrix with one row per vertex of `sources` holding the
    minimum weight of a path using at most `hop_bound` edges in the weighted
    view `gv`, computed with a Bellman-Ford truncated at `hop_bound`
    synchronous relaxation rounds. Rounds stop early once nothing changes.
    """
    if hop_bound < 0:
        raise ParameterError(f"hop_bound must be >= 0, got {hop_bound}")
    gv = as_view(gv)
    n = gv.n
    sources = np.asarray(list(sources), dtype=np.int64)
    for source in sources:
        _check_vertex(gv, int(source))

    result = np.full((len(sources), n), INFINITY, dtype=DISTANCE_DTYPE)
    if len(sources) == 0:
        return result

    arcs = gv.arcs
    num_arcs = max(1, len(arcs.tails))
    batch_size = max(1, min(len(sources), _RELAXATION_BUDGET // num_arcs))
    weights = arcs.weights[:, None]

    for start in range(0, len(sources), batch_size):
        batch = sources[start : start + batch_size]
        columns = np.arange(len(batch))
        # vertices x sources, so that relaxations index rows by vertex
        distances = np.full((n, len(batch)), INFINITY, dtype=DISTANCE_DTYPE)
        distances[batch, columns] = 0
        for _ in range(hop_bound):
            if not len(arcs.tails):
                break
            candidates = saturating_add(distances[arcs.tails], weights)
            best = np.minimum.reduceat(candidates, arcs.starts, axis=0)
            updated = distances.copy()
            updated[arcs.unique_heads] = np.minimum(distances[arcs.unique_heads], best)
            if np.array_equal(updated, distances):
                break
            distances = updated
        result[start : start + len(batch)] = distances.T
    return result


def hop_bounded_distances(gv, sources, hop_bound):
    """
    Return a mapping of {source: distance vector} of hop-bounded distances in
    the weighted view `gv`. See hop_bounded_matrix().
    """
    sources = list(dict.fromkeys(int(s) for s in sources))
    matrix = hop_bounded_matrix(gv, sources, hop_bound)
    return {source: matrix[index] for index, source in enumerate(sources)}


@dataclass(frozen=True)
class GraphSpec:
    """
    A graph generator configuration.
    """

    kind: str
    n: Optional[int] = None
    p: Optional[float] = None
    width: Optional[int] = None
    height: Optional[int] = None
    clique_size: Optional[int] = None
    path_length: int = 0
    path: Optional[str] = None
    labels_path: Optional[str] = None

    @classmethod
    def from_mapping(cls, mapping):
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(mapping) - known)
        if unknown:
            raise ParameterError(f"unknown graph option(s): {', '.join(unknown)}")
        return cls(**mapping)

    def to_dict(self):
        return {key: value for key, value in self.__dict__.items() if value is not None}


def generate(spec, seed=0):
    """
    Return a Graph for the generator `spec` (a GraphSpec or a mapping) and an
    integer `seed`. The result is deterministic for a fixed (spec, seed).
    """
    if not isinstance(spec, GraphSpec):
        spec = GraphSpec.from_mapping(dict(spec))

    kind = spec.kind
    if kind not in GRAPH_KINDS:
        raise ParameterError(f"unknown graph kind: {kind!r}, expected one of {GRAPH_KINDS}")

    if kind == "file":
        if not spec.path:
            raise ParameterError("graph kind 'file' requires a path")
        return load_edge_list(spec.path, labels_location=spec.labels_path)

    if kind == "grid":
        if not spec.width or not spec.height:
            raise ParameterError("graph kind 'grid' requires width and height")
        return Graph.from_networkx(nx.grid_2d_graph(spec.width, spec.height))

    if kind == "barbell":
        clique_size = spec.clique_size or 5
        if clique_size < 2 or spec.path_length < 0:
            raise ParameterError("barbell requires clique_size >= 2 and path_length >= 0")
        return Graph.from_networkx(nx.barbell_graph(clique_size, spec.path_length))

    n = spec.n
    if n is None or n < 0:
        raise ParameterError(f"graph kind {kind!r} requires n >= 0")

    if kind == "gnp":
        p = spec.p if spec.p is not None else 0.0
        if not 0.0 <= p <= 1.0:
            raise ParameterError(f"gnp requires 0 <= p <= 1, got {p}")
        graph = nx.fast_gnp_random_graph(n, p, seed=int(seed) & SEED_MASK)
    elif kind == "path":
        graph = nx.path_graph(n)
    elif kind == "cycle":
        graph = nx.cycle_graph(n)
    else:
        graph = nx.complete_graph(n)

    return Graph.from_edges(n, graph.edges())


def load_edge_list(location, labels_location=None):
    """
    Return a Graph loaded from the edge-list file at `location`: one
    whitespace-separated "u v" pair per line, '#' starts a comment,
    duplicate edges are merged. Labels are numbered in order of first
    appearance unless a label table from dump_label_table() is given with
    `labels_location`, which also fixes isolated vertices.

    A file written by dump_edge_list() starts with a "# n=... m=..." header
    and is refused without its label table.
    """
    index_by_label = {}
    if labels_location:
        with open(labels_location, encoding="utf-8") as table:
            for line_number, line in enumerate(table, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                tokens = line.split()
                if len(tokens) != 2 or not tokens[0].isdigit():
                    raise GraphParseError(
                        "expected 'id label'", path=labels_location, line_number=line_number
                    )
                index_by_label[tokens[1]] = int(tokens[0])
        if sorted(index_by_label.values()) != list(range(len(index_by_label))):
            raise GraphParseError("label ids must be dense 0..n-1", path=labels_location)

    fixed = bool(index_by_label)
    edges = []
    with open(location, encoding="utf-8") as edge_list:
        for line_number, line in enumerate(edge_list, 1):
            header = DUMP_HEADER.match(line.strip()) if line_number == 1 else None
            if header and not labels_location:
                raise GraphParseError(
                    "this edge list was written by a dump and needs its label table",
                    path=location,
                    line_number=1,
                )
            if header and int(header.group(1)) != len(index_by_label):
                raise GraphParseError(
                    f"the header has n={header.group(1)}, "
                    f"the label table has {len(index_by_label)} vertices",
                    path=location,
                    line_number=1,
                )
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            if len(tokens) != 2:
                raise GraphParseError(
                    f"expected 'u v', got {len(tokens)} field(s)",
                    path=location,
                    line_number=line_number,
                )
            ids = []
            for token in tokens:
                if token not in index_by_label:
                    if fixed:
                        raise GraphParseError(
                            f"label {token!r} is missing from the label table",
                            path=location,
                            line_number=line_number,
                        )
                    index_by_label[token] = len(index_by_label)
                ids.append(index_by_label[token])
            edges.append(tuple(ids))

    labels = [None] * len(index_by_label)
    for label, index in index_by_label.items():
        labels[index] = label
    graph = Graph.from_edges(len(labels), edges, labels=labels)
    logger.debug(f"load_edge_list: {location}: n={graph.n} m={graph.num_edges}")
    return graph


def dump_edge_list(g, location):
    with open(location, "w", encoding="utf-8") as output:
        output.write(f"# n={g.n} m={g.num_edges}\n")
        for u, v in g.edges():
            output.write(f"{g.label(u)} {g.label(v)}\n")


def dump_label_table(g, location):
    with open(location, "w", encoding="utf-8") as output:
        for vertex in range(g.n):
            output.write(f"{vertex} {g.label(vertex)}\n")


def dump_distance_rows(location, sources, rows):
    """
    Write one CSV row per source with its distances, using "INF" for
    unreachable vertices.
    """
    rows = np.asarray(rows)
    n = rows.shape[1] if rows.ndim == 2 else 0
    with open(location, "w", encoding="utf-8", newline="") as output:
        writer = csv.writer(output)
        writer.writerow(["source"] + list(range(n)))
        for source, row in zip(sources, rows):
            writer.writerow([source] + [format_distance(value) for value in row])


def load_distance_rows(location):
    """
    Return (sources, rows) from a CSV written by dump_distance_rows(), with
    "INF" read back as INFINITY.
    """
    sources = []
    rows = []
    with open(location, encoding="utf-8", newline="") as source:
        reader = csv.reader(source)
        header = next(reader, None)
        if not header or header[0] != "source":
            raise GraphParseError("expected a 'source' header", path=location, line_number=1)
        width = len(header) - 1
        for line_number, row in enumerate(reader, 2):
            if len(row) != width + 1:
                raise GraphParseError(
                    f"expected {width + 1} fields, got {len(row)}",
                    path=location,
                    line_number=line_number,
                )
            try:
                sources.append(int(row[0]))
                rows.append([INFINITY if value == "INF" else int(value) for value in row[1:]])
            except ValueError as e:
                raise GraphParseError(str(e), path=location, line_number=line_number) from e
    values = np.array(rows, dtype=DISTANCE_DTYPE).reshape(len(rows), width)
    return tuple(sources), values


def load_weighted_edges(location):
    """
    Return a list of (u, v, weight) from a file of "u v w" lines.
    """
    edges = []
    with open(location, encoding="utf-8") as source:
        for line_number, line in enumerate(source, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) != 3:
                raise GraphParseError("expected 'u v w'", path=location, line_number=line_number)
            try:
                u, v, weight = (int(f) for f in fields)
            except ValueError as e:
                raise GraphParseError(str(e), path=location, line_number=line_number) from e
            edges.append((u, v, weight))
    return edges
