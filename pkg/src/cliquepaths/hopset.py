#
# Copyright (c) cliquepaths authors and others. All rights reserved.
# SPDX-License-Identifier: Apache-2.0
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
#

"""
Bounded (beta, eps, t)-hopsets: a weighted overlay H such that for every pair
with d_G(u, v) <= t, d_G(u, v) <= d^beta_{G ∪ H}(u, v) <= (1 + eps) d_G(u, v).
"""

import logging
import math
from dataclasses import dataclass
from dataclasses import field

import numpy as np

from cliquepaths.errors import ParameterError
from cliquepaths.graphs import INFINITY
from cliquepaths.graphs import WeightedGraphView
from cliquepaths.graphs import ceil_log2
from cliquepaths.graphs import exact_apsp
from cliquepaths.graphs import hop_bounded_matrix
from cliquepaths.minplus import k_nearest_bounded
from cliquepaths.primitives import HittingSetInstance
from cliquepaths.primitives import random_hitting_set
from cliquepaths.primitives import source_detection
from cliquepaths.primitives import verify_hitting_set
from cliquepaths.softhit import deterministic_hitting_set

logger = logging.getLogger(__name__)

HOPSET_MODES = ("randomized", "deterministic")

# multiple of beta used as the hop bound when closing distances over A1
PIVOT_HOP_FACTOR = 4


@dataclass(frozen=True)
class HopsetParams:
    eps: float
    t: int
    eps_inner: float
    delta: float
    beta: int
    k: int

    @property
    def iterations(self):
        return ceil_log2(self.t)

    def to_dict(self):
        return dict(
            eps=self.eps,
            t=self.t,
            eps_inner=self.eps_inner,
            delta=self.delta,
            beta=self.beta,
            k=self.k,
            iterations=self.iterations,
        )


def hopset_params(n, eps, t):
    """
    Return the HopsetParams for `n` vertices: eps0 = min(eps, 1)/⌈log₂ t⌉,
    delta = eps0/4, beta = ⌈3/delta⌉ and k = ⌈√n·⌈log₂ n⌉⌉.
    """
    if not eps > 0:
        raise ParameterError(f"hopset eps must be > 0, got {eps}")
    if t < 1:
        raise ParameterError(f"hopset distance bound t must be >= 1, got {t}")
    eps_inner = min(eps, 1.0) / max(1, ceil_log2(t))
    delta = eps_inner / 4
    beta = math.ceil(3 / delta)
    k = max(1, math.ceil(math.sqrt(n) * ceil_log2(n)))
    return HopsetParams(eps=eps, t=t, eps_inner=eps_inner, delta=delta, beta=beta, k=k)


@dataclass(frozen=True)
class BoundedHopset:
    """
    The overlay `edges` as sorted (u, v, weight) triples with u < v. `pivots`
    is the set A1, `pivot` maps each vertex outside A1 to its closest A1
    vertex when its table holds one, and `base_edges` are the bunch edges H⁰
    with exact weights. `misses` lists the full tables A1 did not hit.
    """

    n: int
    params: HopsetParams
    mode: str
    pivots: frozenset
    pivot: dict
    base_edges: dict = field(repr=False)
    edges: tuple = field(repr=False)
    misses: list = field(default_factory=list)

    @property
    def beta(self):
        return self.params.beta

    @property
    def eps(self):
        return self.params.eps

    @property
    def t(self):
        return self.params.t

    @property
    def passed(self):
        return not self.misses

    @property
    def size_constant(self):
        """
        Return C such that |H| = C·n^{3/2}·log₂ n.
        """
        if self.n < 2:
            return 0.0
        return len(self.edges) / (self.n**1.5 * math.log2(self.n))

    def view(self, g):
        return WeightedGraphView(base=g, extra_edges=self.edges)

    def to_dict(self):
        return dict(
            n=self.n,
            mode=self.mode,
            params=self.params.to_dict(),
            edge_count=len(self.edges),
            base_edge_count=len(self.base_edges),
            pivot_count=len(self.pivots),
            size_constant=self.size_constant,
            misses=list(self.misses),
        )

    def dump(self, location):
        """
        Write the overlay as "u v w" lines.
        """
        with open(location, "w", encoding="utf-8") as output:
            for u, v, weight in self.edges:
                output.write(f"{u} {v} {weight}\n")


def _bunches(table, pivots):
    """
    Yield (v, pivot or None, bunch entries) for every vertex outside `pivots`.
    The bunch holds the table entries strictly closer than the first pivot
    entry plus that pivot, or the whole table when it holds no pivot.
    """
    for v in range(table.n):
        if v in pivots:
            continue
        entries = table.entries(v)
        pivot = None
        for u, dist in entries:
            if u in pivots:
                pivot = (u, dist)
                break
        if pivot is None:
            bunch = [(u, dist) for u, dist in entries if u != v]
        else:
            bunch = [(u, dist) for u, dist in entries if dist < pivot[1] and u != v]
            bunch.append(pivot)
        yield v, pivot, bunch


def build_bounded_hopset(g, eps, t, mode="randomized", seed=0, c=3.0, ledger=None):
    """
    Return a BoundedHopset for the Graph `g`.

    A1 hits the full (k, t)-nearest tables; every vertex outside A1 links to
    its bunch with exact weights; then ⌈log₂ t⌉ rounds of source detection
    from A1 over G ∪ H with 4·beta hops link every A1 pair that sees each
    other, keeping the lightest weight for a pair.
    """
    if mode not in HOPSET_MODES:
        raise ParameterError(f"unknown hopset mode: {mode!r}, expected one of {HOPSET_MODES}")
    n = g.n
    params = hopset_params(n, eps, t)

    table = k_nearest_bounded(g, params.k, t, ledger=ledger)
    holders = {v: table.vertices(v) for v in range(n) if table.is_full(v)}

    misses = []
    if not holders:
        pivots = frozenset()
    else:
        inst = HittingSetInstance.from_sets(holders, k=params.k, n=n)
        if mode == "deterministic":
            pivots = deterministic_hitting_set(inst, n, c=c, ledger=ledger)
        else:
            pivots = random_hitting_set(inst, n, c=c, seed=seed, label="hopset-pivots", ledger=ledger)
        misses = verify_hitting_set(inst, pivots).misses
        if misses:
            logger.warning(
                f"build_bounded_hopset: pivot set misses {len(misses)} full tables for seed={seed}"
            )

    base_edges = {}
    pivot_of = {}
    for v, pivot, bunch in _bunches(table, pivots):
        if pivot is not None:
            pivot_of[v] = pivot[0]
        for u, dist in bunch:
            key = (min(u, v), max(u, v))
            base_edges[key] = min(dist, base_edges.get(key, INFINITY))

    weights = dict(base_edges)
    ordered_pivots = sorted(pivots)
    hop_bound = PIVOT_HOP_FACTOR * params.beta
    for iteration in range(params.iterations):
        view = WeightedGraphView(base=g, extra_edges=_as_edges(weights))
        if not ordered_pivots:
            break
        detection = source_detection(view, ordered_pivots, hop_bound, ledger=ledger)
        columns = np.asarray(ordered_pivots)
        block = detection.distances[:, columns]
        changed = False
        for row, a in enumerate(ordered_pivots):
            for col in range(row + 1, len(ordered_pivots)):
                dist = int(block[row, col])
                if dist >= INFINITY:
                    continue
                key = (a, ordered_pivots[col])
                if dist < weights.get(key, INFINITY):
                    weights[key] = dist
                    changed = True
        if not changed:
            remaining = params.iterations - iteration - 1
            if ledger is not None:
                for _ in range(remaining):
                    ledger.charge_source_detection(view.num_edges, len(ordered_pivots), hop_bound)
            logger.debug(f"build_bounded_hopset: fixpoint after {iteration + 1} iterations")
            break

    hopset = BoundedHopset(
        n=n,
        params=params,
        mode=mode,
        pivots=pivots,
        pivot=pivot_of,
        base_edges=base_edges,
        edges=_as_edges(weights),
        misses=misses,
    )
    logger.debug(
        f"build_bounded_hopset: n={n} t={t} beta={params.beta} |A1|={len(pivots)} "
        f"|H0|={len(base_edges)} |H|={len(hopset.edges)}"
    )
    return hopset


def _as_edges(weights):
    return tuple((u, v, int(weight)) for (u, v), weight in sorted(weights.items()))


@dataclass(frozen=True)
class HopsetReport:
    pairs_checked: int
    worst_slack: float
    violations: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.violations

    def to_dict(self):
        return dict(
            pairs_checked=self.pairs_checked,
            worst_slack=self.worst_slack,
            violation_count=len(self.violations),
            violations=[list(v) for v in self.violations[:20]],
            passed=self.passed,
        )


def verify_hopset(g, hopset, beta, eps, t, oracle=None):
    """
    Return a HopsetReport checking d_G <= d^beta_{G ∪ H} <= (1 + eps)·d_G for
    every pair with 1 <= d_G <= t. `hopset` is a BoundedHopset or an iterable
    of (u, v, weight) edges. Violations are (u, v, d_G, d^beta) tuples.
    """
    edges = hopset.edges if isinstance(hopset, BoundedHopset) else tuple(hopset)
    oracle = oracle or exact_apsp(g)
    view = WeightedGraphView(base=g, extra_edges=edges)
    bounded = hop_bounded_matrix(view, range(g.n), beta)

    exact = oracle.matrix
    mask = (exact >= 1) & (exact <= t)
    upper = mask & (bounded > (1 + eps) * exact)
    lower = mask & (bounded < exact)
    bad = np.argwhere(upper | lower)
    violations = [
        (int(u), int(v), int(exact[u, v]), int(bounded[u, v])) for u, v in bad if u < v
    ]

    slack = 1.0
    if mask.any():
        reached = bounded[mask]
        ratios = np.where(reached >= INFINITY, math.inf, reached / exact[mask])
        slack = float(ratios.max())
    return HopsetReport(
        pairs_checked=int(mask.sum()) // 2,
        worst_slack=slack,
        violations=violations,
    )


@dataclass(frozen=True)
class BasisReport:
    pairs_checked: int
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures

    def to_dict(self):
        return dict(
            pairs_checked=self.pairs_checked,
            failure_count=len(self.failures),
            failures=[list(f) for f in self.failures[:20]],
            passed=self.passed,
        )


def verify_basis(g, hopset, oracle=None):
    """
    Return a BasisReport checking that for every ordered pair (x, y) with
    1 <= d_G(x, y) <= t, either G ∪ H⁰ has an edge x-y of weight d_G(x, y),
    or x reaches some pivot z by one edge of weight at most d_G(x, y).
    A pivot x counts as reaching itself.
    """
    oracle = oracle or exact_apsp(g)
    n = g.n
    direct = np.full((n, n), INFINITY, dtype=np.int64)
    for (u, v), weight in hopset.base_edges.items():
        direct[u, v] = min(direct[u, v], weight)
        direct[v, u] = min(direct[v, u], weight)
    for u, v in g.edges():
        direct[u, v] = 1
        direct[v, u] = 1

    pivot_distance = np.full(n, INFINITY, dtype=np.int64)
    for x in range(n):
        if x in hopset.pivots:
            pivot_distance[x] = 0
        elif x in hopset.pivot:
            z = hopset.pivot[x]
            key = (min(x, z), max(x, z))
            pivot_distance[x] = hopset.base_edges.get(key, INFINITY)

    exact = oracle.matrix
    mask = (exact >= 1) & (exact <= hopset.t)
    covered = (direct == exact) | (pivot_distance[:, None] <= exact)
    failures = [(int(x), int(y), int(exact[x, y])) for x, y in np.argwhere(mask & ~covered)]
    return BasisReport(pairs_checked=int(mask.sum()), failures=failures)
