#
# Copyright (c) cliquepaths authors and others. All rights reserved.
# SPDX-License-Identifier: Apache-2.0
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
#

"""
Soft hitting sets and their derandomization.

A candidate set Z is chosen with a hash h_s(i) that is the AND of the i-th
block of l bits of a generator output G(s). The seed s is fixed chunk by
chunk, each time picking the chunk value that minimizes the conditional
expectation of cost(Z) = |Z| + chi * sum of SH(S_u, Z).

Three ways to compute the conditional expectations are supported:

- "independent": the seed is the full N*l bit string. Expectations have a
  closed form and the derandomization guarantees cost(Z) <= E[cost].
- "small_seed": any generator with a seed of at most `seed_cap` bits.
  Expectations are exact, by enumerating every seed completion.
- "monte_carlo": expectations are sampled. There is no hard guarantee.
"""

import hashlib
import json
import logging
import math
from dataclasses import dataclass
from dataclasses import field
from functools import cached_property

import numpy as np

from cliquepaths.errors import CapacityError
from cliquepaths.errors import ContractError
from cliquepaths.errors import ParameterError
from cliquepaths.primitives import sampling_probability
from cliquepaths.randomness import stream

logger = logging.getLogger(__name__)

GENERATOR_MODES = ("independent", "small_seed", "monte_carlo")
DEFAULT_SEED_CAP = 20
DEFAULT_SAMPLES = 64

# relative slack for comparing float expectations that are equal in exact arithmetic
FLOAT_SLACK = 1e-9

# seeds evaluated at once when enumerating a small seed space
_ENUMERATION_BATCH = 4096


def sh_value(first, second):
    """
    Return 0 if the sets `first` and `second` intersect and |first| otherwise.
    """
    first = set(first)
    if first.isdisjoint(second):
        return len(first)
    return 0


@dataclass(frozen=True)
class SoftHitInstance:
    """
    Holder sets S_u, each a subset of the candidate universe R, with
    |S_u| >= delta. The holder ids and the universe may overlap.
    """

    holders: dict
    universe: tuple
    delta: float

    def __post_init__(self):
        if len(set(self.universe)) != len(self.universe):
            raise ContractError("soft hitting universe has duplicate elements")
        if not self.delta > 0:
            raise ParameterError(f"delta must be > 0, got {self.delta}")
        if self.holders and self.delta > len(self.universe):
            raise ContractError(f"delta={self.delta} exceeds the universe size {self.N}")
        universe = set(self.universe)
        for holder, members in self.holders.items():
            if len(members) < self.delta:
                raise ContractError(
                    f"set of holder {holder} has {len(members)} < delta={self.delta} members"
                )
            if not universe.issuperset(members):
                raise ContractError(f"set of holder {holder} is not within the universe")

    @classmethod
    def from_sets(cls, holders, universe, delta):
        holders = {int(holder): frozenset(int(e) for e in members) for holder, members in holders.items()}
        return cls(holders=holders, universe=tuple(int(e) for e in universe), delta=delta)

    @property
    def N(self):
        return len(self.universe)

    @property
    def holder_ids(self):
        return sorted(self.holders)

    @cached_property
    def position(self):
        return {element: index for index, element in enumerate(self.universe)}

    @cached_property
    def membership(self):
        """
        Return a boolean matrix with one row per holder (in holder_ids order)
        and one column per universe position.
        """
        matrix = np.zeros((len(self.holders), self.N), dtype=bool)
        for row, holder in enumerate(self.holder_ids):
            matrix[row, [self.position[e] for e in self.holders[holder]]] = True
        return matrix

    @cached_property
    def set_sizes(self):
        return self.membership.sum(axis=1).astype(np.float64)

    @property
    def chi(self):
        if not self.holders:
            return 0.0
        return self.N / (self.delta**2 * len(self.holders))

    def elements(self, positions):
        return frozenset(self.universe[int(i)] for i in positions)

    def to_dict(self):
        data = dict(
            N=self.N,
            Delta=self.delta,
            holders=[dict(id=h, set=sorted(self.holders[h])) for h in self.holder_ids],
        )
        if self.universe != tuple(range(self.N)):
            data["universe"] = list(self.universe)
        return data

    @classmethod
    def from_dict(cls, data):
        universe = data.get("universe") or range(data["N"])
        holders = {entry["id"]: entry["set"] for entry in data["holders"]}
        return cls.from_sets(holders, universe, data["Delta"])

    def dump_json(self, location):
        with open(location, "w", encoding="utf-8") as output:
            json.dump(self.to_dict(), output, indent=2)

    @classmethod
    def load_json(cls, location):
        with open(location, encoding="utf-8") as source:
            return cls.from_dict(json.load(source))


def random_instance(N, delta, holders, seed=0):
    """
    Return a SoftHitInstance over the universe 0..N-1 with `holders` holder
    sets, each a uniform random subset of size between ⌈delta⌉ and
    min(N, 2⌈delta⌉).
    """
    size = math.ceil(delta)
    if not 1 <= size <= N:
        raise ParameterError(f"delta must be in (0, N={N}], got {delta}")
    if holders < 0:
        raise ParameterError(f"holder count must be >= 0, got {holders}")
    rng = stream(seed, "soft-hit-instance")
    sets = {}
    for holder in range(holders):
        count = int(rng.integers(size, min(N, 2 * size) + 1))
        sets[holder] = rng.choice(N, size=count, replace=False).tolist()
    return SoftHitInstance.from_sets(sets, range(N), delta)


@dataclass(frozen=True)
class HashFamilyConfig:
    """
    The block-AND hash family for a universe of `N` elements and minimum set
    size `delta`: p = c'/delta and blocks of l = floor(log2(1/p)) bits.
    """

    N: int
    delta: float
    c_prime: float = 1.0
    mode: str = "independent"
    seed_cap: int = DEFAULT_SEED_CAP
    samples: int = DEFAULT_SAMPLES
    sample_seed: int = 0

    def __post_init__(self):
        if self.mode not in GENERATOR_MODES:
            raise ParameterError(f"unknown generator mode: {self.mode!r}")
        if not self.c_prime > 0:
            raise ParameterError(f"c_prime must be > 0, got {self.c_prime}")
        if not self.delta > 0:
            raise ParameterError(f"delta must be > 0, got {self.delta}")

    @property
    def p(self):
        return self.c_prime / self.delta

    @property
    def block_length(self):
        if self.p >= 1:
            return 0
        return int(math.floor(math.log2(1 / self.p)))

    @property
    def total_bits(self):
        return self.N * self.block_length

    @property
    def chunk_bits(self):
        return max(1, int(math.floor(math.log2(self.N)))) if self.N > 1 else 1

    @property
    def inclusion_probability(self):
        return 0.5**self.block_length


def size_constant(c_prime=1.0):
    """
    Return c such that a derandomized soft hitting set in independent mode
    has |Z| <= c * N / delta: the expected size is below 2c'N/delta and the
    expected SH mass term below N/(e c' delta).
    """
    return 2 * c_prime + 1 / (math.e * c_prime)


def seed_bits(seed, length):
    """
    Return the `length` bits of the integer `seed`, most significant first.
    """
    return np.array([(seed >> (length - 1 - j)) & 1 for j in range(length)], dtype=np.uint8)


class IndependentBits:
    """
    The identity generator: the seed is the output bit string.
    """

    def __init__(self, length):
        self.seed_length = length
        self.output_length = length

    def expand_bits(self, bits):
        return np.asarray(bits, dtype=np.uint8)


class ShakeGenerator:
    """
    A generator stretching a `seed_length` bit seed to `output_length` bits
    with SHAKE-128.
    """

    def __init__(self, seed_length, output_length):
        self.seed_length = seed_length
        self.output_length = output_length

    def _expand_one(self, bits):
        packed = np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()
        prefix = self.seed_length.to_bytes(2, "big")
        digest = hashlib.shake_128(prefix + packed).digest((self.output_length + 7) // 8)
        return np.unpackbits(np.frombuffer(digest, dtype=np.uint8))[: self.output_length]

    def expand_bits(self, bits):
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.ndim == 1:
            return self._expand_one(bits)
        return np.array([self._expand_one(row) for row in bits], dtype=np.uint8).reshape(
            len(bits), self.output_length
        )


def expand(gen, seed):
    """
    Return the output bits of `gen` for an integer `seed`.
    """
    return gen.expand_bits(seed_bits(seed, gen.seed_length))


def _check_generator(cfg, gen):
    if gen.output_length != cfg.total_bits:
        raise ContractError(
            f"generator output has {gen.output_length} bits, the hash needs {cfg.total_bits}"
        )


def evaluate_hash(cfg, gen, seed, i):
    """
    Return h_seed(i): 1 if every bit of block `i` of gen(seed) is 1, else 0.
    """
    if not 0 <= i < cfg.N:
        raise ContractError(f"element index {i} is out of range [0, {cfg.N})")
    length = cfg.block_length
    if length == 0:
        return 1
    _check_generator(cfg, gen)
    bits = expand(gen, seed)[i * length : (i + 1) * length]
    return int(bits.all())


def _members_from_outputs(cfg, outputs):
    """
    Return a boolean (rows x N) matrix of hash membership from generator
    output rows.
    """
    outputs = np.atleast_2d(outputs)
    if cfg.block_length == 0:
        return np.ones((len(outputs), cfg.N), dtype=bool)
    blocks = outputs.reshape(len(outputs), cfg.N, cfg.block_length)
    return blocks.all(axis=2)


def cost(inst, members):
    """
    Return |Z| + chi * sum over holders u of SH(S_u, Z) for the candidate set
    `members` (elements of the universe). With no holders, return |Z|.
    """
    members = set(members)
    total = float(len(members))
    if not inst.holders:
        return total
    mass = sum(sh_value(inst.holders[h], members) for h in inst.holder_ids)
    return total + inst.chi * mass


def _costs(inst, membership_rows):
    """
    Return the cost of each boolean membership row over universe positions.
    """
    membership_rows = np.atleast_2d(membership_rows)
    sizes = membership_rows.sum(axis=1).astype(np.float64)
    if not inst.holders:
        return sizes
    hits = (membership_rows.astype(np.int32) @ inst.membership.T.astype(np.int32)) > 0
    mass = ((~hits) * inst.set_sizes[None, :]).sum(axis=1)
    return sizes + inst.chi * mass


@dataclass(frozen=True)
class SeedPrefix:
    """
    The seed bits fixed so far, out of `total_length`.
    """

    bits: tuple = ()
    total_length: int = 0

    def __post_init__(self):
        if len(self.bits) > self.total_length:
            raise ContractError("a seed prefix cannot be longer than the seed")

    @property
    def remaining(self):
        return self.total_length - len(self.bits)

    def extended(self, value, width):
        return SeedPrefix(
            bits=self.bits + tuple(int(b) for b in seed_bits(value, width)),
            total_length=self.total_length,
        )

    @property
    def value(self):
        result = 0
        for bit in self.bits:
            result = (result << 1) | bit
        return result


def _probabilities_from_prefix(cfg, fixed):
    """
    Return the per-element probability of h(i) = 1 when the first bits of
    the N*l bit string are `fixed` and the others are uniform.
    """
    length = cfg.block_length
    if length == 0:
        return np.ones(cfg.N)
    bits = np.full(cfg.total_bits, -1, dtype=np.int8)
    bits[: len(fixed)] = fixed
    blocks = bits.reshape(cfg.N, length)
    has_zero = (blocks == 0).any(axis=1)
    unfixed = (blocks == -1).sum(axis=1)
    return np.where(has_zero, 0.0, 0.5**unfixed)


def _expectation_from_probabilities(inst, probabilities):
    expected = float(probabilities.sum())
    if not inst.holders:
        return expected
    miss = np.prod(np.where(inst.membership, 1.0 - probabilities[None, :], 1.0), axis=1)
    return expected + inst.chi * float((inst.set_sizes * miss).sum())


def _enumerated_costs(inst, cfg, gen, lo, hi):
    """
    Return the costs of every seed in [lo, hi) for a seed short enough to
    enumerate.
    """
    length = gen.seed_length
    shifts = np.arange(length - 1, -1, -1, dtype=np.int64)
    costs = []
    for start in range(lo, hi, _ENUMERATION_BATCH):
        seeds = np.arange(start, min(hi, start + _ENUMERATION_BATCH), dtype=np.int64)
        bits = ((seeds[:, None] >> shifts[None, :]) & 1).astype(np.uint8)
        outputs = gen.expand_bits(bits)
        costs.append(_costs(inst, _members_from_outputs(cfg, outputs)))
    return np.concatenate(costs) if costs else np.zeros(0)


def _sampled_expectation(inst, cfg, gen, prefix_bits, rng):
    remaining = gen.seed_length - len(prefix_bits)
    completions = rng.integers(0, 2, size=(cfg.samples, remaining), dtype=np.uint8)
    fixed = np.broadcast_to(np.asarray(prefix_bits, dtype=np.uint8), (cfg.samples, len(prefix_bits)))
    outputs = gen.expand_bits(np.concatenate([fixed, completions], axis=1))
    return float(_costs(inst, _members_from_outputs(cfg, outputs)).mean())


def conditional_cost_expectation(inst, cfg, gen, prefix):
    """
    Return E[cost(inst, Z_h)] when the seed starts with the `prefix` bits and
    the remaining bits are uniform.
    """
    _check_generator(cfg, gen)
    if prefix.total_length != gen.seed_length:
        raise ContractError("seed prefix length does not match the generator seed length")

    if cfg.mode == "independent":
        if gen.seed_length != cfg.total_bits:
            raise ContractError("independent mode needs a seed as long as the hash bit string")
        probabilities = _probabilities_from_prefix(cfg, np.asarray(prefix.bits, dtype=np.int8))
        return _expectation_from_probabilities(inst, probabilities)

    if cfg.mode == "small_seed":
        if prefix.remaining > cfg.seed_cap:
            raise CapacityError(
                f"cannot enumerate 2^{prefix.remaining} seed completions above the cap of "
                f"2^{cfg.seed_cap}: use the monte_carlo generator mode"
            )
        lo = prefix.value << prefix.remaining
        hi = (prefix.value + 1) << prefix.remaining
        return float(_enumerated_costs(inst, cfg, gen, lo, hi).mean())

    rng = stream(cfg.sample_seed, "monte-carlo", len(prefix.bits))
    return _sampled_expectation(inst, cfg, gen, prefix.bits, rng)


@dataclass(frozen=True)
class SoftHitResult:
    """
    A derandomized soft hitting set `members` with the seed that produced it.
    `steps` records the (before, after) conditional expectation of each
    chunk-fixing step.
    """

    members: frozenset
    seed: tuple
    initial_expectation: float
    final_cost: float
    steps: list = field(default_factory=list, repr=False)

    @property
    def monotone(self):
        return all(after <= before * (1 + FLOAT_SLACK) + FLOAT_SLACK for before, after in self.steps)

    def to_dict(self):
        return dict(
            members=sorted(self.members),
            initial_expectation=self.initial_expectation,
            final_cost=self.final_cost,
            chunks=len(self.steps),
            monotone=self.monotone,
        )


def _derandomize_independent(inst, cfg):
    """
    Fix the N*l independent bits chunk by chunk with closed-form conditional
    expectations, only recomputing the elements and holders a chunk touches.
    """
    length = cfg.block_length
    total = cfg.total_bits
    chunk = cfg.chunk_bits
    membership = inst.membership
    sizes = inst.set_sizes
    chi = inst.chi

    fixed = np.full(total, -1, dtype=np.int8)
    probabilities = np.full(cfg.N, 0.5**length)
    miss = np.prod(np.where(membership, 1.0 - probabilities[None, :], 1.0), axis=1)
    current = float(probabilities.sum()) + chi * float((sizes * miss).sum())
    initial = current
    steps = []

    position = 0
    while position < total:
        width = min(chunk, total - position)
        candidates = np.arange(2**width, dtype=np.int64)
        shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
        candidate_bits = ((candidates[:, None] >> shifts[None, :]) & 1).astype(np.int8)

        elements = np.arange(position // length, (position + width - 1) // length + 1)
        element_probabilities = np.empty((len(candidates), len(elements)))
        for column, element in enumerate(elements):
            block = fixed[element * length : (element + 1) * length].copy()
            block_start = element * length
            in_chunk = [
                j for j in range(length) if position <= block_start + j < position + width
            ]
            outside = np.delete(block, in_chunk)
            outside_zero = (outside == 0).any()
            # bits after this chunk are still unfixed
            unfixed = int((outside == -1).sum())
            chunk_columns = [block_start + j - position for j in in_chunk]
            chunk_zero = (candidate_bits[:, chunk_columns] == 0).any(axis=1)
            element_probabilities[:, column] = np.where(
                outside_zero | chunk_zero, 0.0, 0.5**unfixed
            )

        touched = np.flatnonzero(membership[:, elements].any(axis=1))
        sub = membership[touched]
        other_factor = 1.0 - probabilities
        other_factor[elements] = 1.0
        other = np.prod(np.where(sub, other_factor[None, :], 1.0), axis=1)
        factors = np.ones((len(candidates), len(touched)))
        for column, element in enumerate(elements):
            contains = sub[:, element]
            factors *= np.where(
                contains[None, :], 1.0 - element_probabilities[:, column][:, None], 1.0
            )

        constant = float(probabilities.sum() - probabilities[elements].sum())
        constant += chi * float((sizes * miss).sum() - (sizes[touched] * miss[touched]).sum())
        values = constant + element_probabilities.sum(axis=1)
        values = values + chi * (factors * (sizes[touched] * other)[None, :]).sum(axis=1)

        # argmin returns the first minimum, the numerically smallest chunk value
        choice = int(np.argmin(values))
        steps.append((current, float(values[choice])))
        current = float(values[choice])

        fixed[position : position + width] = candidate_bits[choice]
        probabilities[elements] = element_probabilities[choice]
        miss[touched] = other * factors[choice]
        position += width

    members = np.flatnonzero(fixed.reshape(cfg.N, length).all(axis=1)) if length else np.arange(cfg.N)
    return members, tuple(int(b) for b in fixed), initial, steps


def _derandomize_enumerated(inst, cfg, gen):
    length = gen.seed_length
    if length > cfg.seed_cap:
        raise CapacityError(
            f"cannot enumerate 2^{length} seeds above the cap of 2^{cfg.seed_cap}: "
            "use the monte_carlo generator mode"
        )
    costs = _enumerated_costs(inst, cfg, gen, 0, 2**length)
    initial = float(costs.mean())
    current = initial
    steps = []
    prefix = SeedPrefix(total_length=length)
    while prefix.remaining:
        width = min(cfg.chunk_bits, prefix.remaining)
        lo = prefix.value << prefix.remaining
        hi = (prefix.value + 1) << prefix.remaining
        values = costs[lo:hi].reshape(2**width, -1).mean(axis=1)
        choice = int(np.argmin(values))
        steps.append((current, float(values[choice])))
        current = float(values[choice])
        prefix = prefix.extended(choice, width)
    outputs = gen.expand_bits(np.asarray(prefix.bits, dtype=np.uint8))
    members = np.flatnonzero(_members_from_outputs(cfg, outputs)[0])
    return members, prefix.bits, initial, steps


def _derandomize_sampled(inst, cfg, gen):
    prefix = SeedPrefix(total_length=gen.seed_length)
    initial = conditional_cost_expectation(inst, cfg, gen, prefix)
    current = initial
    steps = []
    while prefix.remaining:
        width = min(cfg.chunk_bits, prefix.remaining)
        values = np.array(
            [
                conditional_cost_expectation(inst, cfg, gen, prefix.extended(value, width))
                for value in range(2**width)
            ]
        )
        choice = int(np.argmin(values))
        steps.append((current, float(values[choice])))
        current = float(values[choice])
        prefix = prefix.extended(choice, width)
    outputs = gen.expand_bits(np.asarray(prefix.bits, dtype=np.uint8))
    members = np.flatnonzero(_members_from_outputs(cfg, outputs)[0])
    return members, prefix.bits, initial, steps


def derandomize_soft_hitting(inst, cfg, gen=None, ledger=None):
    """
    Return a SoftHitResult with a soft hitting set Z for `inst`, fixing the
    seed of generator `gen` by the method of conditional expectations. In
    independent and small_seed modes cost(Z) <= E[cost] of the empty prefix.
    """
    if cfg.N != inst.N:
        raise ContractError(f"hash family is for N={cfg.N}, the instance has N={inst.N}")

    if not inst.holders:
        return SoftHitResult(
            members=frozenset(), seed=(), initial_expectation=0.0, final_cost=0.0
        )

    if cfg.block_length == 0:
        members = frozenset(inst.universe)
        value = cost(inst, members)
        return SoftHitResult(
            members=members, seed=(), initial_expectation=value, final_cost=value
        )

    if gen is None:
        if cfg.mode != "independent":
            raise ContractError(f"generator mode {cfg.mode!r} needs an explicit generator")
        gen = IndependentBits(cfg.total_bits)
    _check_generator(cfg, gen)

    if cfg.mode == "independent":
        if gen.seed_length != cfg.total_bits:
            raise ContractError("independent mode needs a seed as long as the hash bit string")
        positions, seed, initial, steps = _derandomize_independent(inst, cfg)
    elif cfg.mode == "small_seed":
        positions, seed, initial, steps = _derandomize_enumerated(inst, cfg, gen)
    else:
        positions, seed, initial, steps = _derandomize_sampled(inst, cfg, gen)

    members = inst.elements(positions)
    result = SoftHitResult(
        members=members,
        seed=tuple(seed),
        initial_expectation=initial,
        final_cost=cost(inst, members),
        steps=steps,
    )

    if ledger is not None:
        chunks = len(steps)
        ledger.charge_flat("soft_hitting_chunks", chunks)
        ledger.charge_flat("soft_hitting_aggregation", chunks)

    logger.debug(
        f"derandomize_soft_hitting: mode={cfg.mode} N={inst.N} delta={inst.delta} "
        f"|L|={len(inst.holders)} |Z|={len(members)} E={initial:.3f} cost={result.final_cost:.3f}"
    )
    return result


@dataclass(frozen=True)
class SoftHitReport:
    size: int
    size_bound: float
    mass: int
    mass_bound: float

    @property
    def size_ok(self):
        return self.size <= self.size_bound

    @property
    def mass_ok(self):
        return self.mass <= self.mass_bound

    @property
    def passed(self):
        return self.size_ok and self.mass_ok

    def to_dict(self):
        return dict(
            size=self.size,
            size_bound=self.size_bound,
            size_margin=self.size_bound - self.size,
            mass=self.mass,
            mass_bound=self.mass_bound,
            mass_margin=self.mass_bound - self.mass,
            passed=self.passed,
        )


def verify_soft_hitting(inst, members, c_size=8.0, c_mass=8.0):
    """
    Return a SoftHitReport checking |Z| <= c_size * N / delta and
    sum of SH(S_u, Z) <= c_mass * |L| * delta.
    """
    members = set(members)
    mass = sum(sh_value(inst.holders[h], members) for h in inst.holder_ids)
    return SoftHitReport(
        size=len(members),
        size_bound=c_size * inst.N / inst.delta,
        mass=mass,
        mass_bound=c_mass * len(inst.holders) * inst.delta,
    )


def deterministic_hitting_set(inst, n, c=3.0, ledger=None):
    """
    Return a frozenset of vertices of 0..n-1 hitting every target set of the
    HittingSetInstance `inst`, of size below 3c * n * ln n / k.

    Vertices are decided ⌊log₂ n⌋ at a time by conditional expectations of
    the pessimistic estimator E[|A|]/(3pn) + sum over holders of P[miss],
    for independent inclusion with p = c * ln n / k. The estimator starts
    below 1 and never increases, so the final set has no miss and
    |A| < 3pn.
    """
    if not c > 1:
        raise ParameterError(f"hitting set constant c must be > 1, got {c}")
    probability = sampling_probability(n, inst.k, c)

    if ledger is not None:
        loglog = max(1, math.ceil(math.log2(max(2.0, math.log2(max(n, 2))))))
        ledger.charge_flat("deterministic_hitting_set", loglog**3)

    if probability >= 1:
        return frozenset(range(n))
    if not inst.targets:
        return frozenset()

    holders = inst.holders
    membership = np.zeros((len(holders), n), dtype=bool)
    for row, holder in enumerate(holders):
        membership[row, sorted(inst.targets[holder])] = True

    scale = 3 * probability * n
    included = np.zeros(n, dtype=bool)
    hit = np.zeros(len(holders), dtype=bool)
    undecided_counts = membership.sum(axis=1)
    miss = (1 - probability) ** undecided_counts

    root = probability * n / scale + float(miss.sum())
    if root >= 1:
        raise ParameterError(
            f"hitting set estimator starts at {root:.3f} >= 1: use a larger constant c"
        )

    chunk = max(1, int(math.floor(math.log2(n)))) if n > 1 else 1
    decided = 0
    for start in range(0, n, chunk):
        vertices = np.arange(start, min(n, start + chunk))
        width = len(vertices)
        candidates = np.arange(2**width, dtype=np.int64)
        shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
        candidate_bits = ((candidates[:, None] >> shifts[None, :]) & 1).astype(bool)

        touched = np.flatnonzero(membership[:, vertices].any(axis=1))
        sub = membership[touched][:, vertices]
        hits_now = (candidate_bits.astype(np.int32) @ sub.T.astype(np.int32)) > 0
        remaining = undecided_counts[touched] - sub.sum(axis=1)
        new_miss = np.where(
            hits_now | hit[touched][None, :], 0.0, (1 - probability) ** remaining[None, :]
        )

        undecided_after = n - decided - width
        size_term = (
            included.sum() + candidate_bits.sum(axis=1) + probability * undecided_after
        ) / scale
        untouched = float(miss.sum() - miss[touched].sum())
        values = size_term + untouched + new_miss.sum(axis=1)

        choice = int(np.argmin(values))
        included[vertices] = candidate_bits[choice]
        hit[touched] |= hits_now[choice]
        undecided_counts[touched] = remaining
        miss[touched] = new_miss[choice]
        decided += width

    members = frozenset(np.flatnonzero(included).tolist())
    logger.debug(
        f"deterministic_hitting_set: n={n} k={inst.k} holders={len(holders)} |A|={len(members)}"
    )
    return members
