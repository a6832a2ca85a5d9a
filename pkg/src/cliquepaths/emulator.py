#
# Copyright (c) cliquepaths authors and others. All rights reserved.
# SPDX-License-Identifier: Apache-2.0
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
#

"""
Near-additive (1 + eps, beta) emulators of unweighted graphs.

Vertices are sampled into nested levels V = S_0 ⊇ S_1 ⊇ ... ⊇ S_r. A vertex
whose top level is i either links once to its closest S_{i+1} vertex within
radius δ_i (dense) or links to every S_i vertex within δ_i (sparse).

Four realizations are available:

- "ideal": exact balls by truncated BFS.
- "clique": balls read from a (k, δ_r)-nearest table with k = ⌈n^{2/3}⌉,
  heavy vertices link through the table and S_r pairs get (1 + eps')
  approximate weights from a bounded hopset and source detection.
- "clique_whp": as "clique" on the best of several sampled runs.
- "deterministic": levels built with soft hitting sets plus a deterministic
  hitting set of the heavy tables, and a deterministic hopset.
"""

import logging
import math
from dataclasses import dataclass
from dataclasses import field
from fractions import Fraction
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.sparse import csgraph

from cliquepaths.errors import ContractError
from cliquepaths.errors import GraphParseError
from cliquepaths.errors import ParameterError
from cliquepaths.errors import SeedExhaustionError
from cliquepaths.graphs import INFINITY
from cliquepaths.graphs import ceil_log2
from cliquepaths.graphs import exact_apsp
from cliquepaths.graphs import to_distances
from cliquepaths.graphs import weighted_distances
from cliquepaths.hopset import build_bounded_hopset
from cliquepaths.ledger import ensure_ledger
from cliquepaths.minplus import k_nearest_bounded
from cliquepaths.primitives import HittingSetInstance
from cliquepaths.primitives import source_detection
from cliquepaths.randomness import child_seed
from cliquepaths.randomness import stream
from cliquepaths.softhit import FLOAT_SLACK
from cliquepaths.softhit import HashFamilyConfig
from cliquepaths.softhit import SoftHitInstance
from cliquepaths.softhit import derandomize_soft_hitting
from cliquepaths.softhit import deterministic_hitting_set
from cliquepaths.softhit import size_constant

logger = logging.getLogger(__name__)

EMULATOR_MODES = ("ideal", "clique", "clique_whp", "deterministic")

DENSE_LINK = "dense-link"
SPARSE_CLIQUE = "sparse-clique"
SR_APPROX = "Sr-approx"
EDGE_RULES = (DENSE_LINK, SPARSE_CLIQUE, SR_APPROX)

# candidate runs are WHP_RUN_FACTOR * ⌈log₂ n⌉
WHP_RUN_FACTOR = 4
# a run qualifies with at most WHP_EDGE_FACTOR * r * n^{1 + 1/2^r} non-S_r edges
WHP_EDGE_FACTOR = 4
# and with |S_r| <= SR_SIZE_FACTOR * √n
SR_SIZE_FACTOR = 2

_BALL_BATCH = 256


@dataclass(frozen=True)
class EmulatorParams:
    """
    Exact per-level values for `n` vertices and `r` levels, with deltas[i] =
    δ_i, radius_sums[i] = R_i and betas[i] = β_i as Fractions, and
    probabilities[i - 1] = p_i.
    """

    n: int
    r: int
    eps_user: float
    eps0: Fraction
    deltas: tuple
    radius_sums: tuple
    betas: tuple
    probabilities: tuple

    def delta(self, i):
        return self.deltas[i]

    def R(self, i):
        return self.radius_sums[i]

    def beta(self, i):
        return self.betas[i]

    def p(self, i):
        return self.probabilities[i - 1]

    def radius(self, i):
        """
        Return the integer ball radius ⌈δ_i⌉ of level `i`.
        """
        return math.ceil(self.deltas[i])

    def rounded_radius_sum(self, i):
        """
        Return the sum of the rounded radii of the levels below `i`, the bound
        on the weight of the path from v to c_i(v).
        """
        return sum(self.radius(j) for j in range(i))

    @property
    def hopset_eps(self):
        return 20 * self.eps0 * (self.r - 1)

    def additive_bound(self, mode):
        """
        Return the exact additive term of the stretch guarantee: β_r when
        every edge weight is exact and 2β_r when S_r pairs are approximate.
        """
        if mode == "ideal":
            return self.betas[self.r]
        return 2 * self.betas[self.r]

    def expected_level_size(self, i):
        if i == 0:
            return float(self.n)
        if i == self.r:
            return math.sqrt(self.n)
        return self.n ** (1 - (2**i - 1) / 2**self.r)

    def size_bound(self):
        """
        Return r·n^{1 + 1/2^r}.
        """
        return self.r * self.n ** (1 + 1 / 2**self.r)

    def to_dict(self):
        return dict(
            n=self.n,
            r=self.r,
            eps_user=self.eps_user,
            eps0=str(self.eps0),
            hopset_eps=str(self.hopset_eps),
            deltas=[str(d) for d in self.deltas],
            radii=[self.radius(i) for i in range(self.r + 1)],
            radius_sums=[str(value) for value in self.radius_sums],
            betas=[str(b) for b in self.betas],
            probabilities=list(self.probabilities),
        )


def _as_fraction(value):
    if isinstance(value, Fraction):
        return value
    return Fraction(str(value))


def level_probabilities(n, r):
    """
    Return (p_1, ..., p_r) with p_i = n^{-2^{i-1}/2^r} for i < r and
    p_r = n^{-1/2^r}. Their product is n^{-1/2}.
    """
    if n <= 1:
        return tuple(1.0 for _ in range(r))
    probabilities = [n ** (-(2 ** (i - 1)) / 2**r) for i in range(1, r)]
    probabilities.append(n ** (-1 / 2**r))
    return tuple(probabilities)


def compute_params(n, eps_user, r, base_epsilon=None):
    """
    Return the EmulatorParams for `n` vertices, a target stretch `eps_user`
    in (0, 1) and `r` >= 2 levels, with base epsilon eps0 = eps_user/(80(r-1)).

    `base_epsilon` sets eps0 directly instead; it must be in (0, 1/10].
    """
    if r < 2:
        raise ParameterError(f"emulator level count r must be >= 2, got {r}")

    if base_epsilon is not None:
        eps0 = _as_fraction(base_epsilon)
        if not 0 < eps0 <= Fraction(1, 10):
            raise ParameterError(f"base epsilon must be in (0, 1/10], got {base_epsilon}")
        eps_user = float(80 * (r - 1) * eps0)
    else:
        if not 0 < eps_user < 1:
            raise ParameterError(f"eps must be in (0, 1), got {eps_user}")
        eps0 = _as_fraction(eps_user) / (80 * (r - 1))

    deltas = []
    sums = [Fraction(0)]
    for i in range(r + 1):
        delta = eps0 ** (-i) + 2 * sums[i]
        deltas.append(delta)
        sums.append(sums[i] + delta)

    betas = [Fraction(0)]
    for i in range(1, r + 1):
        betas.append(4 * sum(2 ** (i - j) * sums[j] for j in range(1, i + 1)))

    return EmulatorParams(
        n=n,
        r=r,
        eps_user=eps_user,
        eps0=eps0,
        deltas=tuple(deltas),
        radius_sums=tuple(sums),
        betas=tuple(betas),
        probabilities=level_probabilities(n, r),
    )


@dataclass(frozen=True)
class LevelHierarchy:
    """
    Nested vertex sets S_0 = V ⊇ S_1 ⊇ ... ⊇ S_r and the top level of each
    vertex. S_{r+1} is empty.
    """

    levels: tuple
    top_levels: tuple

    def __post_init__(self):
        for i in range(1, len(self.levels)):
            if not self.levels[i] <= self.levels[i - 1]:
                raise ContractError(f"level {i} is not nested in level {i - 1}")

    @classmethod
    def from_sets(cls, n, sets):
        levels = tuple(frozenset(s) for s in sets)
        top = [0] * n
        for i, members in enumerate(levels):
            for v in members:
                top[v] = i
        return cls(levels=levels, top_levels=tuple(top))

    @property
    def r(self):
        return len(self.levels) - 1

    @property
    def n(self):
        return len(self.top_levels)

    def level(self, i):
        if i >= len(self.levels):
            return frozenset()
        return self.levels[i]

    @cached_property
    def _masks(self):
        masks = []
        for members in self.levels:
            mask = np.zeros(self.n, dtype=bool)
            mask[list(members)] = True
            masks.append(mask)
        masks.append(np.zeros(self.n, dtype=bool))
        return tuple(masks)

    def mask(self, i):
        return self._masks[min(i, len(self.levels))]

    def top_level(self, vertex):
        return self.top_levels[vertex]

    def sizes(self):
        return [len(members) for members in self.levels]

    def to_dict(self):
        return dict(sizes=self.sizes(), top_level_members=sorted(self.levels[-1]))


def sample_levels(params, n, seed, probabilities=None):
    """
    Return a LevelHierarchy where each vertex of S_{i-1} stays in S_i
    independently with probability p_i, from the `seed` stream "levels".
    `probabilities` replaces (p_1, ..., p_r).
    """
    probabilities = params.probabilities if probabilities is None else tuple(probabilities)
    if len(probabilities) != params.r:
        raise ContractError(f"expected {params.r} level probabilities, got {len(probabilities)}")
    draws = stream(seed, "levels").random((params.r, n))
    alive = np.ones(n, dtype=bool)
    levels = [frozenset(range(n))]
    for i, probability in enumerate(probabilities):
        alive &= draws[i] < probability
        levels.append(frozenset(np.flatnonzero(alive).tolist()))
    return LevelHierarchy.from_sets(n, levels)


@dataclass(frozen=True)
class EmulatorEdge:
    weight: int
    level: int
    rule: str


@dataclass(frozen=True)
class VertexRecord:
    """
    The decision of `vertex` at its top `level`: `dense_target` is c_{i+1}
    for a dense vertex and None for a sparse one, `added` lists the vertices
    it linked to and `chain` is c_0(v), c_1(v), ... `heavy` is None when no
    nearest table was used.
    """

    vertex: int
    level: int
    heavy: Optional[bool]
    dense_target: Optional[int]
    added: tuple
    chain: tuple

    @property
    def dense(self):
        return self.dense_target is not None

    @property
    def cluster_level(self):
        return len(self.chain) - 1


@dataclass(frozen=True)
class EmulatorGraph:
    """
    A weighted emulator over the vertices 0..n-1 with one EmulatorEdge per
    pair (u, v), u < v. `flags` lists the vertices whose heavy table had no
    S_r vertex, `details` holds mode-specific diagnostics.
    """

    n: int
    params: EmulatorParams
    mode: str
    hierarchy: LevelHierarchy
    edges: dict = field(repr=False)
    records: tuple = field(repr=False)
    flags: list = field(default_factory=list)
    details: dict = field(default_factory=dict, repr=False)
    ledger: object = field(default=None, repr=False, compare=False)

    @property
    def edge_count(self):
        return len(self.edges)

    @property
    def additive_bound(self):
        return self.params.additive_bound(self.mode)

    @property
    def edge_list(self):
        return tuple((u, v, edge.weight) for (u, v), edge in sorted(self.edges.items()))

    @property
    def size_ratio(self):
        bound = self.params.size_bound()
        return self.edge_count / bound if bound else 0.0

    @cached_property
    def distances(self):
        """
        Return the all-pairs distances within the emulator alone.
        """
        return weighted_distances(self.n, self.edge_list)

    def edge_counts_by_rule(self):
        counts = {rule: 0 for rule in EDGE_RULES}
        for edge in self.edges.values():
            counts[edge.rule] += 1
        return counts

    def to_dict(self):
        return dict(
            n=self.n,
            mode=self.mode,
            params=self.params.to_dict(),
            level_sizes=self.hierarchy.sizes(),
            edge_count=self.edge_count,
            edges_by_rule=self.edge_counts_by_rule(),
            additive_bound=str(self.additive_bound),
            size_ratio=self.size_ratio,
            flags=list(self.flags),
            details=dict(self.details),
        )

    def dump(self, location):
        """
        Write one "u v w level rule" line per edge.
        """
        with open(location, "w", encoding="utf-8") as output:
            for (u, v), edge in sorted(self.edges.items()):
                output.write(f"{u} {v} {edge.weight} {edge.level} {edge.rule}\n")


def load_emulator_edges(location):
    """
    Return a list of (u, v, weight, level, rule) from an emulator dump.
    """
    edges = []
    with open(location, encoding="utf-8") as source:
        for line_number, line in enumerate(source, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            if len(fields) != 5 or fields[4] not in EDGE_RULES:
                raise GraphParseError(
                    "expected 'u v weight level rule'", path=location, line_number=line_number
                )
            try:
                u, v, weight, level = (int(f) for f in fields[:4])
            except ValueError as e:
                raise GraphParseError(str(e), path=location, line_number=line_number) from e
            edges.append((u, v, weight, level, fields[4]))
    return edges


def _add_edge(edges, u, v, weight, level, rule):
    key = (min(u, v), max(u, v))
    existing = edges.get(key)
    if existing is None or weight < existing.weight:
        edges[key] = EmulatorEdge(weight=int(weight), level=level, rule=rule)


def _ordered_ball(row, radius):
    inside = np.flatnonzero(row <= radius)
    order = np.lexsort((inside, row[inside]))
    return inside[order], row[inside][order]


def _exact_balls(g, vertices, radius):
    """
    Yield (v, ball vertices, ball distances) sorted by (distance, vertex) for
    every vertex of `vertices`.
    """
    limit = min(radius, max(g.n - 1, 0))
    for start in range(0, len(vertices), _BALL_BATCH):
        batch = vertices[start : start + _BALL_BATCH]
        rows = csgraph.dijkstra(g.csr, directed=False, unweighted=True, indices=batch, limit=limit)
        for v, row in zip(batch, to_distances(np.atleast_2d(rows))):
            yield v, *_ordered_ball(row, radius)


def _table_arrays(entries):
    vertices = np.fromiter((u for u, _ in entries), dtype=np.int64, count=len(entries))
    distances = np.fromiter((d for _, d in entries), dtype=np.int64, count=len(entries))
    return vertices, distances


def _classify(v, level, ball_vertices, ball_distances, hierarchy):
    """
    Return (dense target or None, [(u, distance), ...] links) for vertex `v`
    with top level `level` given its ball sorted by (distance, vertex).
    """
    if level < hierarchy.r:
        upper = hierarchy.mask(level + 1)[ball_vertices]
        if upper.any():
            first = int(np.argmax(upper))
            target = int(ball_vertices[first])
            return target, [(target, int(ball_distances[first]))]
    same = hierarchy.mask(level)[ball_vertices] & (ball_vertices != v)
    return None, list(zip(ball_vertices[same].tolist(), ball_distances[same].tolist()))


@dataclass
class _Links:
    edges: dict = field(default_factory=dict)
    decisions: dict = field(default_factory=dict)
    heavy_misses: list = field(default_factory=list)

    def record(self, v, level, heavy, target, links):
        rule = SPARSE_CLIQUE if target is None else DENSE_LINK
        for u, dist in links:
            _add_edge(self.edges, v, u, dist, level, rule)
        self.decisions[v] = (heavy, target, tuple(u for u, _ in links))


def _exact_links(g, params, hierarchy):
    links = _Links()
    for level in range(params.r + 1):
        vertices = [v for v in range(g.n) if hierarchy.top_level(v) == level]
        for v, ball_vertices, ball_distances in _exact_balls(g, vertices, params.radius(level)):
            target, found = _classify(v, level, ball_vertices, ball_distances, hierarchy)
            links.record(v, level, None, target, found)
    return links


def _table_links(params, hierarchy, table):
    """
    Return the links of every vertex below S_r read from the nearest `table`.
    A light vertex's table holds its whole ball. A heavy vertex's table holds
    its closest S_{i+1} vertex whenever the table hits S_r.
    """
    links = _Links()
    top_mask = hierarchy.mask(params.r)
    for v in range(hierarchy.n):
        level = hierarchy.top_level(v)
        if level == params.r:
            continue
        radius = params.radius(level)
        heavy = not table.holds_ball(v, radius)
        if heavy:
            ball_vertices, ball_distances = _table_arrays(table.entries(v))
            if not top_mask[ball_vertices].any():
                links.heavy_misses.append(v)
        else:
            ball_vertices, ball_distances = _table_arrays(table.ball(v, radius))
        target, found = _classify(v, level, ball_vertices, ball_distances, hierarchy)
        links.record(v, level, heavy, target, found)
    return links


def _top_level_links(g, params, hierarchy, links, hopset_mode, seed, ledger):
    """
    Link every pair of S_r vertices whose approximate distance is within
    (1 + eps')·δ_r, using a bounded hopset with t = δ_r and source detection
    over G ∪ H.
    """
    r = params.r
    top = sorted(hierarchy.level(r))
    for v in top:
        links.decisions[v] = (None, None, ())
    if len(top) < 2:
        return None

    radius = params.radius(r)
    hopset = build_bounded_hopset(
        g,
        float(params.hopset_eps),
        radius,
        mode=hopset_mode,
        seed=child_seed(seed, "hopset"),
        ledger=ledger,
    )
    detection = source_detection(hopset.view(g), top, hopset.beta, ledger=ledger)
    threshold = math.floor((1 + params.hopset_eps) * radius)
    block = detection.distances[:, np.asarray(top)]
    partners = {v: [] for v in top}
    for row, a in enumerate(top):
        for col in range(row + 1, len(top)):
            dist = int(block[row, col])
            if dist <= threshold:
                b = top[col]
                _add_edge(links.edges, a, b, dist, r, SR_APPROX)
                partners[a].append(b)
                partners[b].append(a)
    for v in top:
        links.decisions[v] = (None, None, tuple(partners[v]))
    return hopset


def _chains(hierarchy, links):
    r = hierarchy.r
    chains = []
    for v in range(hierarchy.n):
        chain = [v]
        current = v
        for i in range(r):
            if current in hierarchy.level(i + 1):
                following = current
            else:
                _, target, _ = links.decisions[current]
                if target is None:
                    break
                following = target
            chain.append(following)
            current = following
        chains.append(tuple(chain))
    return chains


def _records(hierarchy, links):
    chains = _chains(hierarchy, links)
    records = []
    for v in range(hierarchy.n):
        heavy, target, added = links.decisions[v]
        records.append(
            VertexRecord(
                vertex=v,
                level=hierarchy.top_level(v),
                heavy=heavy,
                dense_target=target,
                added=added,
                chain=chains[v],
            )
        )
    return tuple(records)


def clique_table_size(n):
    """
    Return k = ⌈n^{2/3}⌉, the smallest k with k³ >= n².
    """
    target = n * n
    k = max(1, round(n ** (2 / 3)))
    while k**3 < target:
        k += 1
    while k > 1 and (k - 1) ** 3 >= target:
        k -= 1
    return k


def _whp_run_count(n):
    return max(1, math.ceil(WHP_RUN_FACTOR * ceil_log2(n)))


def _run_announcement_rounds(n):
    value = float(max(n, 2))
    for _ in range(3):
        value = math.log2(value) if value > 1 else 1.0
    return max(1, math.ceil(value))


def _select_run(g, params, table, seed, probabilities):
    """
    Return (hierarchy, links, run index, run log) of the qualifying run with
    the fewest non-S_r edges. Raise a SeedExhaustionError if none qualifies.
    """
    n = g.n
    edge_cap = WHP_EDGE_FACTOR * params.size_bound()
    top_cap = SR_SIZE_FACTOR * math.sqrt(n)
    best = None
    runs = []
    for run in range(_whp_run_count(n)):
        hierarchy = sample_levels(params, n, child_seed(seed, "run", run), probabilities)
        links = _table_links(params, hierarchy, table)
        top_size = len(hierarchy.level(params.r))
        qualifies = (
            len(links.edges) <= edge_cap and top_size <= top_cap and not links.heavy_misses
        )
        runs.append(
            dict(
                run=run,
                edges=len(links.edges),
                top_level_size=top_size,
                heavy_misses=len(links.heavy_misses),
                qualifies=qualifies,
            )
        )
        if qualifies and (best is None or len(links.edges) < len(best[1].edges)):
            best = (hierarchy, links, run)
    if best is None:
        raise SeedExhaustionError(
            f"none of {len(runs)} sampled runs qualifies for seed={seed}: "
            f"edge cap {edge_cap:.1f}, top level cap {top_cap:.1f}"
        )
    hierarchy, links, run = best
    logger.info(f"build_emulator: selected run {run} of {len(runs)} with {len(links.edges)} edges")
    return hierarchy, links, run, runs


def _deterministic_levels(params, table, c_prime, ledger):
    """
    Return (hierarchy, diagnostics) with S_i = S'_i ∪ A, where S'_{i+1} is a
    derandomized soft hitting set over the light vertices of S'_i and A hits
    the full tables of every vertex that is heavy in some iteration.
    """
    n = table.n
    r = params.r
    c_det = size_constant(c_prime)
    primes = [frozenset(range(n))]
    heavy_tables = {}
    sizes = []

    for i in range(r):
        members = primes[-1]
        radius = params.radius(i)
        p_next = params.p(i + 1)
        delta = c_det / p_next
        light_sets = {}
        for v in sorted(members):
            if not table.holds_ball(v, radius):
                heavy_tables.setdefault(v, table.vertices(v))
                continue
            ball = [u for u, _ in table.ball(v, radius) if u in members]
            if len(ball) >= delta:
                light_sets[v] = ball

        if light_sets:
            inst = SoftHitInstance.from_sets(light_sets, sorted(members), delta)
            cfg = HashFamilyConfig(N=inst.N, delta=delta, c_prime=c_prime)
            chosen = derandomize_soft_hitting(inst, cfg, ledger=ledger).members
        else:
            chosen = frozenset()

        bound = len(members) * p_next
        if len(chosen) > bound * (1 + FLOAT_SLACK):
            raise ContractError(
                f"level {i + 1} has {len(chosen)} vertices above the bound {bound:.3f}"
            )
        sizes.append(dict(level=i + 1, size=len(chosen), bound=bound, holders=len(light_sets)))
        ledger.charge_flat("level_announcement", 1)
        primes.append(frozenset(chosen))

    if heavy_tables:
        inst = HittingSetInstance.from_sets(heavy_tables, k=table.k, n=n)
        hitting = deterministic_hitting_set(inst, n, ledger=ledger)
    else:
        hitting = frozenset()

    hierarchy = LevelHierarchy.from_sets(n, [members | hitting for members in primes])
    diagnostics = dict(
        soft_hitting_levels=sizes,
        heavy_hitting_set_size=len(hitting),
        heavy_vertices=len(heavy_tables),
    )
    return hierarchy, diagnostics


def build_emulator(
    g,
    eps_user,
    r,
    mode="ideal",
    seed=0,
    base_epsilon=None,
    probabilities=None,
    c_prime=1.0,
    ledger=None,
):
    """
    Return an EmulatorGraph for the Graph `g` whose distances satisfy
    d_G <= d_H <= (1 + eps_user)·d_G + B, with B = β_r in "ideal" mode and
    2β_r otherwise. `probabilities` replaces the sampling probabilities of
    the randomized modes.
    """
    if mode not in EMULATOR_MODES:
        raise ParameterError(f"unknown emulator mode: {mode!r}, expected one of {EMULATOR_MODES}")
    n = g.n
    params = compute_params(n, eps_user, r, base_epsilon=base_epsilon)
    ledger = ensure_ledger(ledger, n)
    details = {}

    if mode == "ideal":
        hierarchy = sample_levels(params, n, seed, probabilities)
        links = _exact_links(g, params, hierarchy)
    else:
        k = clique_table_size(n)
        radius = params.radius(r)
        with ledger.phase("nearest"):
            table = k_nearest_bounded(g, k, radius, ledger=ledger)
        details["table_k"] = k

        if mode == "clique":
            hierarchy = sample_levels(params, n, seed, probabilities)
            links = _table_links(params, hierarchy, table)
        elif mode == "clique_whp":
            hierarchy, links, run, runs = _select_run(g, params, table, seed, probabilities)
            ledger.charge_flat("run_announcement", _run_announcement_rounds(n))
            details["selected_run"] = run
            details["runs"] = runs
        else:
            with ledger.phase("levels"):
                hierarchy, diagnostics = _deterministic_levels(params, table, c_prime, ledger)
            links = _table_links(params, hierarchy, table)
            details.update(diagnostics)

        hopset_mode = "deterministic" if mode == "deterministic" else "randomized"
        with ledger.phase("top-level"):
            hopset = _top_level_links(g, params, hierarchy, links, hopset_mode, seed, ledger)
        if hopset is not None:
            details["hopset"] = hopset.to_dict()

    if links.heavy_misses:
        logger.warning(
            f"build_emulator: {len(links.heavy_misses)} heavy vertices have no top level "
            f"vertex in their table for seed={seed}"
        )

    emulator = EmulatorGraph(
        n=n,
        params=params,
        mode=mode,
        hierarchy=hierarchy,
        edges=links.edges,
        records=_records(hierarchy, links),
        flags=list(links.heavy_misses),
        details=details,
        ledger=ledger,
    )
    logger.info(
        f"build_emulator: mode={mode} n={n} r={r} levels={hierarchy.sizes()} "
        f"edges={emulator.edge_count}"
    )
    return emulator


@dataclass(frozen=True)
class StretchReport:
    """
    The result of checking d_G <= d_H <= (1 + eps)·d_G + additive over all
    pairs. Violations are (u, v, d_G, d_H) tuples with d_G or d_H possibly
    INFINITY. `residual_histogram` counts pairs by d_H - d_G.
    """

    pairs_checked: int
    eps: float
    additive: Fraction
    max_stretch: float
    max_additive_residual: float
    residual_histogram: dict
    violations: list = field(default_factory=list)
    edge_count: Optional[int] = None
    size_ratio: Optional[float] = None

    @property
    def passed(self):
        return not self.violations

    def to_dict(self):
        return dict(
            pairs_checked=self.pairs_checked,
            eps=self.eps,
            additive=str(self.additive),
            max_stretch=self.max_stretch,
            max_additive_residual=self.max_additive_residual,
            edge_count=self.edge_count,
            size_ratio=self.size_ratio,
            violation_count=len(self.violations),
            violations=[list(v) for v in self.violations[:20]],
            stretch_ok=self.passed,
        )


def exact_limits(dg, multiplicative, additive):
    """
    Return floor(multiplicative·d + additive) for each finite distance of
    `dg`, and -1 for unreachable entries, computed exactly.
    """
    multiplicative = _as_fraction(multiplicative)
    additive = _as_fraction(additive)
    finite = dg < INFINITY
    limits = np.full(dg.shape, -1, dtype=np.int64)
    if finite.any():
        values = np.unique(dg[finite])
        lookup = {
            int(d): math.floor(multiplicative * int(d) + additive) for d in values.tolist()
        }
        limits[finite] = np.fromiter(
            (lookup[int(d)] for d in dg[finite].tolist()), dtype=np.int64, count=int(finite.sum())
        )
    return limits


def check_stretch(g, edges, eps, additive, oracle=None):
    """
    Return a StretchReport comparing the distances within the weighted
    (u, v, weight) `edges` against the exact distances of `g`.
    """
    oracle = oracle or exact_apsp(g)
    n = g.n
    estimated = weighted_distances(n, edges)
    upper_rows, upper_cols = np.triu_indices(n, 1)
    dg = oracle.matrix[upper_rows, upper_cols]
    dh = estimated[upper_rows, upper_cols]
    connected = dg < INFINITY

    limits = exact_limits(dg, 1 + _as_fraction(eps), additive)
    lower = dh < dg
    upper = connected & (dh > limits)
    bad = np.flatnonzero(lower | upper)
    violations = [
        (int(upper_rows[i]), int(upper_cols[i]), int(dg[i]), int(dh[i])) for i in bad
    ]

    reached = connected & (dh < INFINITY)
    max_stretch = 1.0
    max_residual = 0.0
    histogram = {}
    if connected.any():
        if (connected & ~reached).any():
            max_stretch = math.inf
            max_residual = math.inf
        if reached.any():
            ratios = dh[reached] / dg[reached]
            max_stretch = max(max_stretch, float(ratios.max()))
            residuals = dh[reached] - (1 + float(eps)) * dg[reached]
            max_residual = max(max_residual, float(residuals.max()))
            values, counts = np.unique(dh[reached] - dg[reached], return_counts=True)
            histogram = dict(zip(values.tolist(), counts.tolist()))

    return StretchReport(
        pairs_checked=int(connected.sum()),
        eps=float(eps),
        additive=_as_fraction(additive),
        max_stretch=max_stretch,
        max_additive_residual=max_residual,
        residual_histogram=histogram,
        violations=violations,
    )


def verify_emulator(g, emulator, eps_user=None, oracle=None):
    """
    Return a StretchReport for the emulator against exact distances of `g`
    with its own additive bound, and eps_user from its parameters unless
    given.
    """
    eps = emulator.params.eps_user if eps_user is None else eps_user
    report = check_stretch(g, emulator.edge_list, eps, emulator.additive_bound, oracle=oracle)
    return StretchReport(
        pairs_checked=report.pairs_checked,
        eps=report.eps,
        additive=report.additive,
        max_stretch=report.max_stretch,
        max_additive_residual=report.max_additive_residual,
        residual_histogram=report.residual_histogram,
        violations=report.violations,
        edge_count=emulator.edge_count,
        size_ratio=emulator.size_ratio,
    )


@dataclass(frozen=True)
class CheckReport:
    """
    A generic list of failures found by a structural check.
    """

    checked: int
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures

    def to_dict(self):
        return dict(
            checked=self.checked,
            failure_count=len(self.failures),
            failures=[list(f) if isinstance(f, tuple) else f for f in self.failures[:20]],
            passed=self.passed,
        )


def verify_clustering(emulator):
    """
    Return a CheckReport checking that for every vertex v and every c_i(v) of
    its chain, the emulator links v to c_i(v) by at most i edges of total
    weight at most the sum of the rounded radii below i. Failures are
    (vertex, i, edges, weight) tuples.
    """
    params = emulator.params
    failures = []
    for record in emulator.records:
        hops = 0
        weight = 0
        for i in range(1, len(record.chain)):
            previous, current = record.chain[i - 1], record.chain[i]
            if previous != current:
                edge = emulator.edges.get((min(previous, current), max(previous, current)))
                if edge is None:
                    failures.append((record.vertex, i, None, None))
                    break
                hops += 1
                weight += edge.weight
            if hops > i or weight > params.rounded_radius_sum(i):
                failures.append((record.vertex, i, hops, weight))
                break
    return CheckReport(checked=len(emulator.records), failures=failures)


def verify_provenance(g, emulator, oracle=None):
    """
    Return a CheckReport of the per-edge and per-vertex provenance rules:
    every weight is at least the true distance, dense-link and sparse-clique
    weights are exact, S_r weights are within (1 + eps')·d_G, a dense vertex
    adds exactly one link and a sparse vertex only links to S_i vertices
    within radius δ_i. Vertices flagged as heavy misses are skipped.
    """
    oracle = oracle or exact_apsp(g)
    params = emulator.params
    hierarchy = emulator.hierarchy
    failures = []

    for (u, v), edge in sorted(emulator.edges.items()):
        distance = oracle.distance(u, v)
        if edge.weight < distance:
            failures.append(("underestimate", u, v, edge.weight, distance))
        elif edge.rule == SR_APPROX:
            if edge.weight > (1 + params.hopset_eps) * distance:
                failures.append(("approximation", u, v, edge.weight, distance))
        elif edge.weight != distance:
            failures.append(("inexact", u, v, edge.weight, distance))

    flagged = set(emulator.flags)
    for record in emulator.records:
        if record.vertex in flagged:
            continue
        v = record.vertex
        level = record.level
        if record.dense:
            if record.added != (record.dense_target,):
                failures.append(("dense-links", v, level, len(record.added)))
            elif record.dense_target not in hierarchy.level(level + 1):
                failures.append(("dense-target", v, level, record.dense_target))
            continue
        for u in record.added:
            if u not in hierarchy.level(level):
                failures.append(("sparse-level", v, level, u))
            elif level < params.r or emulator.mode == "ideal":
                if oracle.distance(v, u) > params.radius(level):
                    failures.append(("sparse-radius", v, level, u))

    return CheckReport(checked=emulator.edge_count + emulator.n, failures=failures)


@dataclass(frozen=True)
class LevelStretchReport:
    pairs_checked: int
    pairs_by_level: dict
    violations: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.violations

    def to_dict(self):
        return dict(
            pairs_checked=self.pairs_checked,
            pairs_by_level=dict(self.pairs_by_level),
            violation_count=len(self.violations),
            violations=[list(v) for v in self.violations[:20]],
            passed=self.passed,
        )


def verify_level_stretch(g, emulator):
    """
    Return a LevelStretchReport checking d_H <= (1 + 20·eps0·i)·d_G + β_i for
    every connected pair, where i is the second highest cluster level along
    a BFS shortest path between them. Only the "ideal" mode has exact S_r
    weights, so other modes only check pairs with i < r.

    Violations are (u, v, i, d_G, d_H) tuples.
    """
    n = g.n
    params = emulator.params
    exact, predecessors = csgraph.shortest_path(
        g.csr, method="D", directed=False, unweighted=True, return_predecessors=True
    )
    exact = to_distances(exact)
    estimated = emulator.distances
    cluster = [record.cluster_level for record in emulator.records]
    max_level = params.r if emulator.mode == "ideal" else params.r - 1

    limits = {}
    violations = []
    by_level = {}
    checked = 0
    for u in range(n):
        order = np.argsort(exact[u], kind="stable")
        first = np.full(n, -1, dtype=np.int64)
        second = np.full(n, -1, dtype=np.int64)
        for v in order.tolist():
            if exact[u, v] >= INFINITY:
                break
            if v == u:
                first[v] = cluster[u]
                continue
            parent = predecessors[u, v]
            candidates = sorted((first[parent], second[parent], cluster[v]), reverse=True)
            first[v], second[v] = candidates[0], candidates[1]
            if v < u:
                continue
            level = int(second[v])
            if level > max_level:
                continue
            distance = int(exact[u, v])
            key = (level, distance)
            if key not in limits:
                factor = 1 + 20 * params.eps0 * level
                limits[key] = math.floor(factor * distance + params.beta(level))
            checked += 1
            by_level[level] = by_level.get(level, 0) + 1
            if estimated[u, v] > limits[key]:
                violations.append((u, v, level, distance, int(estimated[u, v])))

    return LevelStretchReport(pairs_checked=checked, pairs_by_level=by_level, violations=violations)
