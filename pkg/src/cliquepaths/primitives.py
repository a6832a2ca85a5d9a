#
# Copyright (c) cliquepaths authors and others. All rights reserved.
# SPDX-License-Identifier: Apache-2.0
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
#

"""
Functional versions of the Congested Clique primitives the pipelines use:
source detection, distance through sets and randomized hitting sets.
"""

import logging
import math
from dataclasses import dataclass
from dataclasses import field
from typing import Mapping

import numpy as np

from cliquepaths.errors import ContractError
from cliquepaths.errors import ParameterError
from cliquepaths.graphs import INFINITY
from cliquepaths.graphs import as_view
from cliquepaths.graphs import hop_bounded_matrix
from cliquepaths.minplus import MinPlusMatrix
from cliquepaths.minplus import minplus_product
from cliquepaths.randomness import stream

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SourceDetectionResult:
    """
    Hop-bounded distances from each source (rows, in `sources` order) to every
    vertex. Sources beyond the hop bound of a vertex are absent for it.
    """

    sources: tuple
    hop_bound: int
    distances: np.ndarray = field(repr=False)

    def distance(self, source, vertex):
        """
        Return the distance from `source` to `vertex`, None if it is not
        within the hop bound.
        """
        value = self.distances[self.sources.index(source), vertex]
        return None if value >= INFINITY else int(value)

    def for_vertex(self, vertex):
        """
        Return a mapping of {source: distance} for the sources `vertex` sees.
        """
        column = self.distances[:, vertex]
        return {
            source: int(value)
            for source, value in zip(self.sources, column.tolist())
            if value < INFINITY
        }


def source_detection(gv, sources, d, ledger=None):
    """
    Return a SourceDetectionResult of the exact `d`-hop-bounded weighted
    distances from every vertex of `sources` in the weighted view `gv`.
    """
    if d < 1:
        raise ParameterError(f"source detection hop bound must be >= 1, got {d}")
    gv = as_view(gv)
    sources = tuple(dict.fromkeys(int(s) for s in sources))
    distances = hop_bounded_matrix(gv, sources, d)
    if ledger is not None:
        ledger.charge_source_detection(gv.num_edges, len(sources), d)
    return SourceDetectionResult(sources=sources, hop_bound=d, distances=distances)


def distance_through_sets(witnesses, delta, ledger=None):
    """
    Return a MinPlusMatrix where entry (u, v) is the minimum over shared
    witnesses w of W_u and W_v of delta(u, w) + delta(w, v), INFINITY when
    they share none.

    `witnesses` is a sequence with one iterable of witness vertices per
    vertex. `delta` is either a mapping of {v: {w: estimate}} that must define
    every declared witness, or a square array of symmetric estimates.
    """
    n = len(witnesses)
    values = np.full((n, n), INFINITY, dtype=np.int64)
    total = 0
    for v, witness_set in enumerate(witnesses):
        witness_list = sorted(set(witness_set))
        total += len(witness_list)
        if not witness_list:
            continue
        if isinstance(delta, Mapping):
            estimates = delta.get(v, {})
            try:
                values[v, witness_list] = [estimates[w] for w in witness_list]
            except KeyError as e:
                raise ContractError(f"missing estimate for witness {e.args[0]} of {v}") from e
        else:
            values[v, witness_list] = np.asarray(delta)[v, witness_list]

    through = MinPlusMatrix(values)
    result = minplus_product(through, through.transpose())
    if ledger is not None:
        ledger.charge_distance_through(total / n if n else 0)
    return result


@dataclass(frozen=True)
class HittingSetInstance:
    """
    Target sets S_v over the vertices 0..n-1 for each holder v, each of size
    at least `k`.
    """

    targets: dict
    k: int
    n: int

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError(f"hitting set k must be >= 1, got {self.k}")
        for holder, target in self.targets.items():
            if len(target) < self.k:
                raise ContractError(
                    f"target set of holder {holder} has {len(target)} < k={self.k} members"
                )

    @classmethod
    def from_sets(cls, targets, k, n):
        targets = {
            int(holder): frozenset(int(v) for v in target) for holder, target in targets.items()
        }
        return cls(targets=targets, k=k, n=n)

    @property
    def holders(self):
        return sorted(self.targets)


@dataclass(frozen=True)
class HittingReport:
    misses: list
    size: int

    @property
    def passed(self):
        return not self.misses

    def to_dict(self):
        return dict(misses=list(self.misses), size=self.size, passed=self.passed)


def sampling_probability(n, k, c):
    """
    Return min(1, c·ln n / k). ln n is taken at max(n, 2) so that a single
    vertex universe is still sampled.
    """
    return min(1.0, c * math.log(max(n, 2)) / k)


def random_hitting_set(inst, n, c=3.0, seed=0, label="hitting-set", ledger=None):
    """
    Return a frozenset of vertices where each vertex of 0..n-1 is included
    independently with probability min(1, c·ln n / k), drawn from the `seed`
    stream named `label`.
    """
    if not c > 2:
        raise ParameterError(f"hitting set constant c must be > 2, got {c}")
    probability = sampling_probability(n, inst.k, c)
    draws = stream(seed, label).random(n)
    members = frozenset(np.flatnonzero(draws < probability).tolist())
    if ledger is not None:
        ledger.charge_flat("hitting_set_announcement", 1)
    logger.debug(
        f"random_hitting_set: {label}: p={probability:.4f} |A|={len(members)} "
        f"holders={len(inst.targets)}"
    )
    return members


def verify_hitting_set(inst, members):
    """
    Return a HittingReport listing the holders whose target set misses `members`.
    """
    members = frozenset(members)
    misses = [holder for holder in inst.holders if members.isdisjoint(inst.targets[holder])]
    return HittingReport(misses=misses, size=len(members))
