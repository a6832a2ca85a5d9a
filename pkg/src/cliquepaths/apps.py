#
# Copyright (c) cliquepaths authors and others. All rights reserved.
# SPDX-License-Identifier: Apache-2.0
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
#

"""
Distance estimation pipelines built on emulators, hopsets and the clique
primitives: near-additive APSP, (1 + eps) multi-source shortest paths and
(2 + eps) APSP.
"""

import logging
import math
from dataclasses import dataclass
from dataclasses import field
from fractions import Fraction

import numpy as np
from scipy.sparse import csgraph

from cliquepaths.emulator import EMULATOR_MODES
from cliquepaths.emulator import build_emulator
from cliquepaths.emulator import clique_table_size
from cliquepaths.emulator import compute_params
from cliquepaths.emulator import exact_limits
from cliquepaths.errors import ParameterError
from cliquepaths.graphs import INFINITY
from cliquepaths.graphs import ceil_log2
from cliquepaths.graphs import dump_distance_rows
from cliquepaths.graphs import saturating_add
from cliquepaths.graphs import to_distances
from cliquepaths.graphs import weighted_distances
from cliquepaths.hopset import PIVOT_HOP_FACTOR
from cliquepaths.hopset import build_bounded_hopset
from cliquepaths.hopset import hopset_params
from cliquepaths.ledger import RoundLedger
from cliquepaths.ledger import ensure_ledger
from cliquepaths.minplus import MinPlusMatrix
from cliquepaths.minplus import k_nearest_bounded
from cliquepaths.minplus import minplus_product
from cliquepaths.primitives import HittingSetInstance
from cliquepaths.primitives import distance_through_sets
from cliquepaths.primitives import random_hitting_set
from cliquepaths.primitives import source_detection
from cliquepaths.primitives import verify_hitting_set
from cliquepaths.randomness import child_seed
from cliquepaths.softhit import deterministic_hitting_set

logger = logging.getLogger(__name__)

# default cap on the number of MSSP sources, as a multiple of √n
SOURCE_FACTOR = 2

NEAR_ADDITIVE_PHASES = ("emulator",)
MSSP_PHASES = ("init", "emulator", "hopset")
TWO_EPS_PHASES = ("init", "long", "high_degree", "low_degree")


def application_levels(n):
    """
    Return the emulator level count r = max(2, ⌈log₂ ⌈log₂ n⌉⌉).
    """
    return max(2, ceil_log2(ceil_log2(n)))


def _check_eps(eps):
    if not 0 < eps < 1:
        raise ParameterError(f"eps must be in (0, 1), got {eps}")


def _check_mode(mode):
    if mode not in EMULATOR_MODES:
        raise ParameterError(f"unknown mode: {mode!r}, expected one of {EMULATOR_MODES}")


@dataclass(frozen=True)
class EstimateTable:
    """
    Distance estimates with one row per vertex of `sources` and one column
    per vertex, each entry tagged with the index in `phase_names` of the
    phase that last improved it. The estimates are guaranteed to be within
    `multiplicative`·d + `additive` of the true distance d.
    """

    sources: tuple
    values: np.ndarray = field(repr=False)
    phases: np.ndarray = field(repr=False)
    phase_names: tuple
    multiplicative: Fraction
    additive: Fraction
    details: dict = field(default_factory=dict, repr=False)
    ledger: object = field(default=None, repr=False, compare=False)

    @property
    def n(self):
        return self.values.shape[1]

    def estimate(self, source, vertex):
        return int(self.values[self.sources.index(source), vertex])

    def phase_of(self, source, vertex):
        return self.phase_names[self.phases[self.sources.index(source), vertex]]

    def phase_histogram(self):
        """
        Return a mapping of {phase name: count} of the finite off-diagonal
        estimates attributed to each phase.
        """
        rows = np.asarray(self.sources, dtype=np.int64)
        mask = self.values < INFINITY
        if len(rows):
            mask[np.arange(len(rows)), rows] = False
        counts = np.bincount(self.phases[mask].ravel(), minlength=len(self.phase_names))
        return {name: int(count) for name, count in zip(self.phase_names, counts)}

    def to_dict(self):
        return dict(
            sources=len(self.sources),
            n=self.n,
            multiplicative=str(self.multiplicative),
            additive=str(self.additive),
            phase_histogram=self.phase_histogram(),
            details=dict(self.details),
        )

    def dump_csv(self, location):
        dump_distance_rows(location, self.sources, self.values)


def _improve(values, phases, candidate, phase):
    """
    Lower `values` to `candidate` where it is strictly smaller and tag those
    entries with `phase`. Return the number of improved entries.
    """
    better = candidate < values
    values[better] = candidate[better]
    phases[better] = phase
    return int(better.sum())


def _make_hitting_set(holders, k, n, mode, seed, label, ledger):
    """
    Return (members, misses) of a hitting set for the `holders` target sets,
    deterministic in "deterministic" mode and randomized otherwise.
    """
    if not holders:
        return frozenset(), []
    inst = HittingSetInstance.from_sets(holders, k=k, n=n)
    if mode == "deterministic":
        members = deterministic_hitting_set(inst, n, ledger=ledger)
    else:
        members = random_hitting_set(inst, n, seed=seed, label=label, ledger=ledger)
    misses = verify_hitting_set(inst, members).misses
    if misses:
        logger.warning(f"{label}: hitting set misses {len(misses)} holders for seed={seed}")
    return members, misses


def _hopset_mode(mode):
    return "deterministic" if mode == "deterministic" else "randomized"


def apsp_near_additive(g, eps, mode="clique", seed=0, ledger=None):
    """
    Return an EstimateTable of all-pairs estimates within (1 + eps)·d + B,
    read from the distances within an emulator every vertex learns.
    """
    _check_eps(eps)
    _check_mode(mode)
    n = g.n
    ledger = ensure_ledger(ledger, n)
    r = application_levels(n)
    with ledger.phase("emulator"):
        emulator = build_emulator(g, eps, r, mode=mode, seed=seed, ledger=ledger)
        ledger.charge_broadcast_learn(emulator.edge_count)

    values = emulator.distances.copy()
    phases = np.zeros(values.shape, dtype=np.int8)
    return EstimateTable(
        sources=tuple(range(n)),
        values=values,
        phases=phases,
        phase_names=NEAR_ADDITIVE_PHASES,
        multiplicative=1 + Fraction(str(eps)),
        additive=emulator.additive_bound,
        details=dict(r=r, emulator=emulator.to_dict()),
        ledger=ledger,
    )


def mssp(g, sources, eps, mode="clique", seed=0, source_factor=SOURCE_FACTOR, ledger=None):
    """
    Return an EstimateTable of (1 + eps)-approximate distances from each of
    `sources` to every vertex. Pairs beyond t = ⌈2B/eps⌉ are covered by a
    (1 + eps/2, B) emulator and the others by source detection over a
    (beta, eps, t)-hopset.
    """
    _check_eps(eps)
    _check_mode(mode)
    n = g.n
    sources = tuple(dict.fromkeys(int(s) for s in sources))
    cap = source_factor * math.sqrt(n)
    if len(sources) > cap:
        raise ParameterError(
            f"mssp supports at most {source_factor}·√n = {cap:.1f} sources, got {len(sources)}"
        )
    ledger = ensure_ledger(ledger, n)
    r = application_levels(n)

    with ledger.phase("emulator"):
        emulator = build_emulator(g, eps / 2, r, mode=mode, seed=seed, ledger=ledger)
        ledger.charge_broadcast_learn(emulator.edge_count)
    bound = emulator.additive_bound
    t = math.ceil(2 * bound / Fraction(str(eps)))

    with ledger.phase("hopset"):
        hopset = build_bounded_hopset(
            g, eps, t, mode=_hopset_mode(mode), seed=child_seed(seed, "mssp-hopset"), ledger=ledger
        )
        detection = source_detection(hopset.view(g), sources, hopset.beta, ledger=ledger)

    values = np.full((len(sources), n), INFINITY, dtype=np.int64)
    phases = np.zeros(values.shape, dtype=np.int8)
    if sources:
        values[np.arange(len(sources)), np.asarray(sources)] = 0
        _improve(values, phases, weighted_distances(n, emulator.edge_list, sources), 1)
        _improve(values, phases, detection.distances, 2)

    return EstimateTable(
        sources=sources,
        values=values,
        phases=phases,
        phase_names=MSSP_PHASES,
        multiplicative=1 + Fraction(str(eps)),
        additive=Fraction(0),
        details=dict(
            r=r,
            t=t,
            beta=hopset.beta,
            emulator=emulator.to_dict(),
            hopset=hopset.to_dict(),
        ),
        ledger=ledger,
    )


def _detect_into(values, phases, view, members, hop_bound, phase, ledger):
    """
    Lower the estimates between every vertex of `members` and every vertex to
    the hop-bounded distances over `view`, in both directions.
    """
    if not members:
        return 0
    members = sorted(members)
    detection = source_detection(view, members, hop_bound, ledger=ledger)
    rows = np.asarray(members)
    candidate = values.copy()
    candidate[rows] = np.minimum(candidate[rows], detection.distances)
    candidate[:, rows] = np.minimum(candidate[:, rows], detection.distances.T)
    return _improve(values, phases, candidate, phase)


def _through_product(left, right):
    """
    Return the min-plus product of two arrays as a plain array.
    """
    return minplus_product(MinPlusMatrix(left), MinPlusMatrix(right)).values


def _restricted(values, mask):
    restricted = np.full(values.shape, INFINITY, dtype=np.int64)
    restricted[mask] = values[mask]
    return restricted


def _high_degree_phase(g, values, phases, eps, t, mode, seed, ledger, details):
    n = g.n
    threshold = max(1, math.ceil(math.sqrt(n) * ceil_log2(n)))
    holders = {v: g.neighbors(v) for v in range(n) if g.degrees[v] >= threshold}
    members, misses = _make_hitting_set(
        holders, threshold, n, mode, child_seed(seed, "high-degree"), "high-degree", ledger
    )
    details["high_degree"] = dict(
        threshold=threshold, holders=len(holders), hitting_set=len(members), misses=misses
    )
    if not members:
        return

    hopset = build_bounded_hopset(
        g, eps / 2, 2 * t, mode=_hopset_mode(mode), seed=child_seed(seed, "high-hopset"), ledger=ledger
    )
    phase = TWO_EPS_PHASES.index("high_degree")
    _detect_into(values, phases, hopset.view(g), members, hopset.beta, phase, ledger)

    witnesses = [members] * n
    through = distance_through_sets(witnesses, values, ledger=ledger)
    _improve(values, phases, through.values, phase)


def _low_degree_phase(g, values, phases, eps, t, mode, seed, ledger, details):
    n = g.n
    phase = TWO_EPS_PHASES.index("low_degree")
    log_n = ceil_log2(n)
    high = max(1, math.ceil(math.sqrt(n) * log_n))
    degrees = g.degrees
    sparse_part = g.subgraph_of_edges(lambda u, v: degrees[u] <= high or degrees[v] <= high)

    k = max(1, math.ceil(n**0.25 * log_n**2))
    table = k_nearest_bounded(sparse_part, k, t, ledger=ledger)
    near = np.zeros((n, n), dtype=bool)
    table_values = np.full((n, n), INFINITY, dtype=np.int64)
    for u in range(n):
        for w, dist in table.entries(u):
            near[u, w] = True
            table_values[u, w] = dist
    candidate = np.minimum(table_values, table_values.T)
    _improve(values, phases, candidate, phase)

    # common nearest witnesses
    witnesses = [table.vertices(u) for u in range(n)]
    through = distance_through_sets(witnesses, values, ledger=ledger)
    _improve(values, phases, through.values, phase)

    holders = {v: table.vertices(v) for v in range(n) if table.is_full(v)}
    pivots, pivot_misses = _make_hitting_set(
        holders, k, n, mode, child_seed(seed, "low-degree-pivots"), "low-degree-pivots", ledger
    )

    sparse_degrees = sparse_part.degrees
    neighbor_threshold = max(1, math.ceil(n / k**2))
    neighbor_holders = {
        v: sparse_part.neighbors(v) for v in range(n) if sparse_degrees[v] >= neighbor_threshold
    }
    neighbor_hits, neighbor_misses = _make_hitting_set(
        neighbor_holders,
        neighbor_threshold,
        n,
        mode,
        child_seed(seed, "low-degree-neighbors"),
        "low-degree-neighbors",
        ledger,
    )

    details["low_degree"] = dict(
        high_threshold=high,
        k=k,
        neighbor_threshold=neighbor_threshold,
        sparse_edges=sparse_part.num_edges,
        pivots=len(pivots),
        pivot_misses=pivot_misses,
        neighbor_hitting_set=len(neighbor_hits),
        neighbor_misses=neighbor_misses,
    )

    if pivots or neighbor_hits:
        hopset = build_bounded_hopset(
            sparse_part,
            eps / 2,
            2 * t,
            mode=_hopset_mode(mode),
            seed=child_seed(seed, "low-hopset"),
            ledger=ledger,
        )
        view = hopset.view(sparse_part)
        _detect_into(values, phases, view, pivots, hopset.beta, phase, ledger)

        # detours through the closest pivot of either endpoint
        pivot_of = np.full(n, -1, dtype=np.int64)
        for u in range(n):
            for w, _ in table.entries(u):
                if w in pivots:
                    pivot_of[u] = w
                    break
        has_pivot = np.flatnonzero(pivot_of >= 0)
        if len(has_pivot):
            chosen = pivot_of[has_pivot]
            detour = np.full((n, n), INFINITY, dtype=np.int64)
            detour[has_pivot] = saturating_add(
                values[has_pivot, chosen][:, None], values[chosen]
            )
            _improve(values, phases, np.minimum(detour, detour.T), phase)

        _detect_into(values, phases, view, neighbor_hits, hopset.beta, phase, ledger)

    if neighbor_hits:
        # one A' neighbor, the smallest id, for each nearest vertex
        hit_mask = np.zeros(n, dtype=bool)
        hit_mask[list(neighbor_hits)] = True
        representative = np.full(n, -1, dtype=np.int64)
        for v in range(n):
            for w in sparse_part.neighbors(v):
                if hit_mask[w]:
                    representative[v] = w
                    break
        chosen = np.zeros((n, n), dtype=bool)
        for u in range(n):
            reps = representative[table.vertices(u)]
            reps = reps[reps >= 0]
            chosen[u, reps] = True
        first = _restricted(values, chosen)
        second = _restricted(values, np.broadcast_to(hit_mask[:, None], (n, n)))
        product = _through_product(first, second)
        ledger.charge_sparse_mm(MinPlusMatrix(first).density, MinPlusMatrix(second).density)
        _improve(values, phases, product, phase)

    # paths with one edge between the two nearest sets and a low degree endpoint
    low = sparse_degrees <= neighbor_threshold
    edge_matrix = np.full((n, n), INFINITY, dtype=np.int64)
    for u, v in sparse_part.edges():
        if low[u] or low[v]:
            edge_matrix[u, v] = 1
            edge_matrix[v, u] = 1
    first = _restricted(values, near)
    last = _restricted(values, near.T)
    inner = _through_product(edge_matrix, last)
    ledger.charge_sparse_mm(MinPlusMatrix(edge_matrix).density, MinPlusMatrix(last).density)
    through_edges = _through_product(first, inner)
    ledger.charge_sparse_mm(MinPlusMatrix(first).density, MinPlusMatrix(inner).density)
    _improve(values, phases, np.minimum(through_edges, through_edges.T), phase)


def apsp_2eps(g, eps, mode="clique", seed=0, ledger=None):
    """
    Return an EstimateTable of all-pairs estimates within (2 + eps)·d.

    Estimates start from the edges and the distances within a (1 + eps/2, B)
    emulator, which handle pairs at distance >= t = ⌈2B/eps⌉. Shorter pairs
    are improved by detours through a hitting set of the high degree
    neighborhoods, then by the low degree phase on the subgraph of edges
    with a low degree endpoint.
    """
    _check_eps(eps)
    _check_mode(mode)
    n = g.n
    ledger = ensure_ledger(ledger, n)
    r = application_levels(n)
    details = dict(r=r)

    with ledger.phase("long"):
        emulator = build_emulator(g, eps / 2, r, mode=mode, seed=seed, ledger=ledger)
        ledger.charge_broadcast_learn(emulator.edge_count)
    bound = emulator.additive_bound
    t = math.ceil(2 * bound / Fraction(str(eps)))
    details["t"] = t
    details["emulator"] = emulator.to_dict()

    values = emulator.distances.copy()
    phases = np.full(values.shape, TWO_EPS_PHASES.index("long"), dtype=np.int8)
    init = np.full(values.shape, INFINITY, dtype=np.int64)
    for u, v in g.edges():
        init[u, v] = 1
        init[v, u] = 1
    np.fill_diagonal(init, 0)
    phases[init <= values] = TWO_EPS_PHASES.index("init")
    values = np.minimum(values, init)

    with ledger.phase("high_degree"):
        _high_degree_phase(g, values, phases, eps, t, mode, seed, ledger, details)
    with ledger.phase("low_degree"):
        _low_degree_phase(g, values, phases, eps, t, mode, seed, ledger, details)

    transposed = values.T < values
    values = np.where(transposed, values.T, values)
    phases = np.where(transposed, phases.T, phases)

    table = EstimateTable(
        sources=tuple(range(n)),
        values=values,
        phases=phases,
        phase_names=TWO_EPS_PHASES,
        multiplicative=2 + Fraction(str(eps)),
        additive=Fraction(0),
        details=details,
        ledger=ledger,
    )
    logger.info(f"apsp_2eps: n={n} t={t} phases={table.phase_histogram()}")
    return table


@dataclass(frozen=True)
class ApspReport:
    """
    The result of checking d <= estimate <= multiplicative·d + additive for
    every defined pair. Violations are (source, vertex, d, estimate, phase).
    """

    pairs_checked: int
    multiplicative: Fraction
    additive: Fraction
    max_stretch: float
    mean_stretch: float
    max_additive_residual: float
    phase_histogram: dict
    worst_by_phase: dict
    residual_histogram: dict
    violations: list = field(default_factory=list)
    ledger_totals: dict = field(default_factory=dict)

    @property
    def passed(self):
        return not self.violations

    def to_dict(self):
        return dict(
            pairs_checked=self.pairs_checked,
            multiplicative=str(self.multiplicative),
            additive=str(self.additive),
            max_stretch=self.max_stretch,
            mean_stretch=self.mean_stretch,
            max_additive_residual=self.max_additive_residual,
            phase_histogram=dict(self.phase_histogram),
            worst_by_phase=dict(self.worst_by_phase),
            violation_count=len(self.violations),
            violations=[list(v) for v in self.violations[:20]],
            ledger_totals=dict(self.ledger_totals),
            stretch_ok=self.passed,
        )


def _exact_rows(g, sources, oracle):
    if oracle is not None:
        return oracle.matrix[list(sources)]
    if not len(sources):
        return np.zeros((0, g.n), dtype=np.int64)
    distances = csgraph.shortest_path(
        g.csr, method="D", directed=False, unweighted=True, indices=list(sources)
    )
    return to_distances(np.atleast_2d(distances))


def verify_estimates(g, table, multiplicative=None, additive=None, oracle=None):
    """
    Return an ApspReport checking d <= estimate <= multiplicative·d +
    additive for every pair of a source and another vertex, using the
    table's own guarantee unless given.
    """
    multiplicative = table.multiplicative if multiplicative is None else multiplicative
    additive = table.additive if additive is None else additive
    multiplicative = Fraction(str(multiplicative))
    additive = Fraction(str(additive))

    exact = _exact_rows(g, table.sources, oracle)
    values = table.values
    off_diagonal = np.ones(values.shape, dtype=bool)
    if len(table.sources):
        off_diagonal[np.arange(len(table.sources)), np.asarray(table.sources)] = False
    connected = off_diagonal & (exact < INFINITY)

    limits = exact_limits(exact, multiplicative, additive)
    lower = off_diagonal & (values < exact)
    upper = connected & (values > limits)
    violations = [
        (
            int(table.sources[i]),
            int(v),
            int(exact[i, v]),
            int(values[i, v]),
            table.phase_names[table.phases[i, v]],
        )
        for i, v in np.argwhere(lower | upper)
    ]

    reached = connected & (values < INFINITY)
    max_stretch = 1.0
    mean_stretch = 1.0
    max_residual = 0.0
    worst = {}
    histogram = {}
    if reached.any():
        ratios = values[reached] / exact[reached]
        max_stretch = float(ratios.max())
        mean_stretch = float(ratios.mean())
        residuals = values[reached] - float(multiplicative) * exact[reached]
        max_residual = float(residuals.max())
        names = np.asarray(table.phase_names)[table.phases[reached]]
        for name in table.phase_names:
            picked = ratios[names == name]
            if len(picked):
                worst[name] = float(picked.max())
        gaps, counts = np.unique(values[reached] - exact[reached], return_counts=True)
        histogram = dict(zip(gaps.tolist(), counts.tolist()))
    if (connected & ~reached).any():
        max_stretch = math.inf
        max_residual = math.inf

    ledger_totals = {}
    if table.ledger is not None:
        ledger_totals = dict(total=table.ledger.total, **table.ledger.totals_by_primitive())

    return ApspReport(
        pairs_checked=int(connected.sum()),
        multiplicative=multiplicative,
        additive=additive,
        max_stretch=max_stretch,
        mean_stretch=mean_stretch,
        max_additive_residual=max_residual,
        phase_histogram=table.phase_histogram(),
        worst_by_phase=worst,
        residual_histogram=histogram,
        violations=violations,
        ledger_totals=ledger_totals,
    )


def _charge_nominal_hopset(ledger, n, eps, t):
    """
    Charge the rounds of a hopset build at its nominal sizes: a √n·log n
    nearest table, one hitting set announcement and ⌈log₂ t⌉ detections from
    √n pivots over n^{3/2}·log n edges.
    """
    params = hopset_params(n, eps, t)
    for _ in range(ceil_log2(t)):
        ledger.charge_filtered_mm(params.k, params.k, params.k, t)
    ledger.charge_flat("hitting_set_announcement", 1)
    edges = n**1.5 * max(1, math.log2(n))
    for _ in range(params.iterations):
        ledger.charge_source_detection(edges, math.sqrt(n), PIVOT_HOP_FACTOR * params.beta)
    return params, edges


def mssp_round_budget(n, eps, num_sources=None, cost_model=None):
    """
    Return a RoundLedger charged with the MSSP pipeline's charge sequence for
    `n` vertices using nominal sizes instead of a built graph, so round
    totals can be compared across n without running the pipeline.
    """
    _check_eps(eps)
    ledger = RoundLedger(n, cost_model)
    r = application_levels(n)
    params = compute_params(n, eps / 2, r)
    num_sources = math.ceil(math.sqrt(n)) if num_sources is None else num_sources

    with ledger.phase("emulator"):
        k = clique_table_size(n)
        radius = params.radius(r)
        for _ in range(ceil_log2(radius)):
            ledger.charge_filtered_mm(k, k, k, radius)
        _, edges = _charge_nominal_hopset(ledger, n, float(params.hopset_eps), radius)
        hop_bound = hopset_params(n, float(params.hopset_eps), radius).beta
        ledger.charge_source_detection(edges, math.sqrt(n), hop_bound)
        ledger.charge_broadcast_learn(params.size_bound())

    bound = params.additive_bound("clique")
    t = math.ceil(2 * bound / Fraction(str(eps)))
    with ledger.phase("hopset"):
        hopset, edges = _charge_nominal_hopset(ledger, n, eps, t)
        ledger.charge_source_detection(edges, num_sources, hopset.beta)
    return ledger
