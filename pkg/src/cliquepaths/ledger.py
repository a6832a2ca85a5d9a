#
# Copyright (c) cliquepaths authors and others. All rights reserved.
# SPDX-License-Identifier: Apache-2.0
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
#

"""
Simulated Congested Clique round accounting. Each primitive a pipeline invokes
is charged the number of rounds its cost formula gives, with a configurable
leading constant per primitive. Nothing is simulated at the message level.
"""

import csv
import json
import logging
import math
from contextlib import contextmanager
from dataclasses import dataclass
from dataclasses import field

from cliquepaths.errors import ParameterError

logger = logging.getLogger(__name__)

PRIMITIVES = (
    "source_detection",
    "filtered_mm",
    "sparse_mm",
    "distance_through",
    "broadcast_learn",
    "flat",
)


@dataclass(frozen=True)
class CostModel:
    """
    Leading constants of the round formulas, keyed by primitive name. Missing
    primitives use 1.0.
    """

    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        for primitive, constant in self.constants.items():
            if primitive not in PRIMITIVES:
                raise ParameterError(
                    f"unknown cost model primitive: {primitive!r}, expected one of {PRIMITIVES}"
                )
            if not constant > 0:
                raise ParameterError(f"cost constant for {primitive!r} must be > 0")

    def constant(self, primitive):
        return float(self.constants.get(primitive, 1.0))

    @staticmethod
    def word_bits(n):
        """
        Return the message word size in bits for `n` vertices.
        """
        return max(1, math.ceil(math.log2(n))) if n > 1 else 1

    def to_dict(self):
        return {primitive: self.constant(primitive) for primitive in PRIMITIVES}


@dataclass(frozen=True)
class LedgerEntry:
    primitive: str
    phase: str
    params: dict
    rounds: float

    def to_dict(self):
        return dict(
            primitive=self.primitive,
            phase=self.phase,
            params=dict(self.params),
            rounds=self.rounds,
        )


class RoundLedger:
    """
    An append-only log of charged rounds for one pipeline run over `n`
    vertices. Entries are tagged with the current phase, see phase().
    """

    def __init__(self, n, cost_model=None):
        self.n = n
        self.cost_model = cost_model or CostModel()
        self.entries = []
        self._phases = []

    @property
    def total(self):
        return sum(entry.rounds for entry in self.entries)

    @property
    def current_phase(self):
        return "/".join(self._phases)

    @contextmanager
    def phase(self, name):
        """
        Tag every entry charged inside this context with `name`, nested under
        any enclosing phase.
        """
        self._phases.append(name)
        try:
            yield self
        finally:
            self._phases.pop()

    def _charge(self, primitive, params, rounds):
        rounds = float(rounds)
        if rounds < 0:
            rounds = 0.0
        entry = LedgerEntry(
            primitive=primitive,
            phase=self.current_phase,
            params=params,
            rounds=rounds,
        )
        self.entries.append(entry)
        logger.debug(f"ledger: {entry.phase or '-'}: {primitive} {params} -> {rounds:.3f}")
        return rounds

    def charge_source_detection(self, m, s, d):
        """
        Charge an (S, d)-source detection over a graph with `m` edges and `s`
        sources: (m^{1/3}·s^{2/3}/n + 1)·d.
        """
        _check_non_negative(m=m, s=s, d=d)
        if s == 0 or d == 0:
            rounds = 0.0
        else:
            n = max(self.n, 1)
            rounds = (m ** (1 / 3) * s ** (2 / 3) / n + 1) * d
        rounds *= self.cost_model.constant("source_detection")
        return self._charge("source_detection", dict(m=m, s=s, d=d), rounds)

    def charge_filtered_mm(self, rho_s, rho_t, rho, w_values):
        """
        Charge one filtered min-plus product: (ρ_S·ρ_T·ρ)^{1/3}/n^{2/3} + log₂ W.
        """
        _check_non_negative(rho_s=rho_s, rho_t=rho_t, rho=rho, w_values=w_values)
        n = max(self.n, 1)
        log_term = math.log2(w_values) if w_values > 1 else 0.0
        rounds = (rho_s * rho_t * rho) ** (1 / 3) / n ** (2 / 3) + log_term
        rounds *= self.cost_model.constant("filtered_mm")
        params = dict(rho_s=rho_s, rho_t=rho_t, rho=rho, w_values=w_values)
        return self._charge("filtered_mm", params, rounds)

    def charge_sparse_mm(self, rho_s, rho_t):
        """
        Charge one sparse min-plus product: (ρ_S·ρ_T)^{1/3}/n^{1/3} + 1.
        """
        _check_non_negative(rho_s=rho_s, rho_t=rho_t)
        n = max(self.n, 1)
        rounds = (rho_s * rho_t) ** (1 / 3) / n ** (1 / 3) + 1
        rounds *= self.cost_model.constant("sparse_mm")
        return self._charge("sparse_mm", dict(rho_s=rho_s, rho_t=rho_t), rounds)

    def charge_distance_through(self, rho):
        """
        Charge a distance-through-sets computation with average set size
        `rho`: ρ^{2/3}/n^{1/3} + 1.
        """
        _check_non_negative(rho=rho)
        n = max(self.n, 1)
        rounds = rho ** (2 / 3) / n ** (1 / 3) + 1
        rounds *= self.cost_model.constant("distance_through")
        return self._charge("distance_through", dict(rho=rho), rounds)

    def charge_broadcast_learn(self, total_words):
        """
        Charge letting every vertex learn `total_words` words: one gather and
        one scatter of ⌈total_words/n⌉ rounds each.
        """
        _check_non_negative(total_words=total_words)
        n = max(self.n, 1)
        rounds = 2 * math.ceil(total_words / n)
        rounds *= self.cost_model.constant("broadcast_learn")
        return self._charge("broadcast_learn", dict(total_words=total_words), rounds)

    def charge_flat(self, name, rounds):
        _check_non_negative(rounds=rounds)
        rounds = rounds * self.cost_model.constant("flat")
        return self._charge("flat", dict(name=name), rounds)

    def totals_by_primitive(self):
        totals = {}
        for entry in self.entries:
            totals[entry.primitive] = totals.get(entry.primitive, 0.0) + entry.rounds
        return totals

    def totals_by_phase(self):
        totals = {}
        for entry in self.entries:
            key = entry.phase or "-"
            totals[key] = totals.get(key, 0.0) + entry.rounds
        return totals

    def to_list(self):
        return [entry.to_dict() for entry in self.entries]

    def to_dict(self):
        return dict(
            n=self.n,
            cost_model=self.cost_model.to_dict(),
            total=self.total,
            by_primitive=self.totals_by_primitive(),
            entries=self.to_list(),
        )

    def dump_json(self, location):
        with open(location, "w", encoding="utf-8") as output:
            json.dump(self.to_list(), output, indent=2)

    def dump_csv(self, location):
        with open(location, "w", encoding="utf-8", newline="") as output:
            writer = csv.writer(output)
            writer.writerow(["index", "primitive", "phase", "params", "rounds"])
            for index, entry in enumerate(self.entries):
                params = json.dumps(entry.params, sort_keys=True)
                writer.writerow([index, entry.primitive, entry.phase, params, entry.rounds])


def _check_non_negative(**values):
    for name, value in values.items():
        if value < 0:
            raise ParameterError(f"{name} must be >= 0, got {value}")


def ensure_ledger(ledger, n):
    """
    Return `ledger` or a fresh RoundLedger for `n` vertices when None.
    """
    if ledger is None:
        return RoundLedger(n)
    return ledger
