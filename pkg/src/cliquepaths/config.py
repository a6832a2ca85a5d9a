#
# Copyright (c) cliquepaths authors and others. All rights reserved.
# SPDX-License-Identifier: Apache-2.0
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
#

"""
Experiment configuration: a single YAML document with optional nested
`graph`, `cost_model`, `softhit` and `output` sections, overridden by
command line options.

For example::

    algorithm: emulator
    eps: 0.5
    r: 2
    mode: clique
    seed: 7
    repetitions: 20
    graph:
        kind: gnp
        n: 256
        p: 0.03
    output:
        report: report.json
"""

import logging
import math
from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
from typing import Optional

import saneyaml
import yaml

from cliquepaths.emulator import EMULATOR_MODES
from cliquepaths.errors import ConfigError
from cliquepaths.errors import ParameterError
from cliquepaths.graphs import DEFAULT_ORACLE_CAP
from cliquepaths.graphs import GraphSpec
from cliquepaths.hopset import HOPSET_MODES
from cliquepaths.ledger import PRIMITIVES
from cliquepaths.ledger import CostModel
from cliquepaths.softhit import GENERATOR_MODES

logger = logging.getLogger(__name__)

ALGORITHMS = (
    "emulator",
    "hopset",
    "knearest",
    "softhit",
    "apsp-additive",
    "mssp",
    "apsp-2eps",
)

MODES = EMULATOR_MODES + tuple(mode for mode in HOPSET_MODES if mode not in EMULATOR_MODES)

# algorithms whose mode selects an emulator construction
EMULATOR_ALGORITHMS = ("emulator", "apsp-additive", "mssp", "apsp-2eps")

TOP_LEVEL_KEYS = {
    "algorithm": str,
    "eps": float,
    "r": int,
    "mode": str,
    "seed": int,
    "repetitions": int,
    "oracle_cap": int,
    "k": int,
    "d": int,
    "t": int,
    "sources": int,
}

SECTION_KEYS = {
    "graph": {
        "kind": str,
        "n": int,
        "p": float,
        "width": int,
        "height": int,
        "clique_size": int,
        "path_length": int,
        "path": str,
        "labels_path": str,
    },
    "cost_model": {primitive: float for primitive in PRIMITIVES},
    "softhit": {
        "N": int,
        "Delta": float,
        "holders": int,
        "generator": str,
        "seed_bits": int,
        "samples": int,
        "c_prime": float,
    },
    "output": {
        "report": str,
        "csv": str,
        "dump": str,
    },
}

SOFTHIT_DEFAULTS = dict(
    N=64,
    Delta=8.0,
    holders=32,
    generator="independent",
    seed_bits=16,
    samples=64,
    c_prime=1.0,
)


def _default_graph():
    return dict(kind="gnp", n=64, p=0.1)


@dataclass(frozen=True)
class ExperimentConfig:
    """
    A fully resolved experiment: one graph generator, one algorithm and its
    parameters. `sources` is the MSSP source count, ⌈√n⌉ when None.
    """

    graph: dict = field(default_factory=_default_graph)
    algorithm: str = "emulator"
    eps: float = 0.5
    r: int = 2
    mode: str = "clique"
    seed: int = 0
    repetitions: int = 1
    oracle_cap: int = DEFAULT_ORACLE_CAP
    k: int = 4
    d: int = 4
    t: int = 8
    sources: Optional[int] = None
    n_list: tuple = ()
    cost_model: dict = field(default_factory=dict)
    softhit: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    @property
    def graph_spec(self):
        return GraphSpec.from_mapping(self.graph)

    @property
    def cost(self):
        return CostModel(constants=dict(self.cost_model))

    @property
    def hopset_mode(self):
        return "deterministic" if self.mode == "deterministic" else "randomized"

    @property
    def softhit_options(self):
        return dict(SOFTHIT_DEFAULTS, **self.softhit)

    def source_count(self, n):
        if self.sources is None:
            return math.ceil(math.sqrt(n))
        return self.sources

    def for_n(self, n):
        """
        Return a copy of this config with a graph of `n` vertices.
        """
        return replace(self, graph=dict(self.graph, n=n))

    def validate(self):
        """
        Return this config, raising a ParameterError naming the first invalid
        parameter.
        """
        if self.algorithm not in ALGORITHMS:
            raise ParameterError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if not 0 < self.eps < 1:
            raise ParameterError(f"eps must be in (0, 1), got {self.eps}")
        if self.r < 2:
            raise ParameterError(f"r must be >= 2, got {self.r}")
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.algorithm in EMULATOR_ALGORITHMS and self.mode not in EMULATOR_MODES:
            raise ParameterError(
                f"mode {self.mode!r} is not an emulator mode, expected one of {EMULATOR_MODES}"
            )
        for name in ("repetitions", "oracle_cap", "k", "d", "t"):
            value = getattr(self, name)
            if value < 1:
                raise ParameterError(f"{name} must be >= 1, got {value}")
        if self.sources is not None and self.sources < 0:
            raise ParameterError(f"sources must be >= 0, got {self.sources}")
        if any(n < 1 for n in self.n_list):
            raise ParameterError(f"n_list values must be >= 1, got {list(self.n_list)}")

        self.graph_spec
        self.cost
        generator = self.softhit_options["generator"]
        if generator not in GENERATOR_MODES:
            raise ParameterError(
                f"softhit generator must be one of {GENERATOR_MODES}, got {generator!r}"
            )
        return self

    def to_dict(self):
        return dict(
            graph=dict(self.graph),
            algorithm=self.algorithm,
            eps=self.eps,
            r=self.r,
            mode=self.mode,
            seed=self.seed,
            repetitions=self.repetitions,
            oracle_cap=self.oracle_cap,
            k=self.k,
            d=self.d,
            t=self.t,
            sources=self.sources,
            n_list=list(self.n_list),
            cost_model=dict(self.cost_model),
            softhit=self.softhit_options,
            output=dict(self.output),
        )


def _coerce(key, value, kind, path=None):
    """
    Return `value` converted to `kind`. saneyaml loads every scalar as a
    string.
    """
    if isinstance(value, (dict, list)) or isinstance(value, bool):
        raise ConfigError(f"invalid value for {key!r}: {value!r}", path=path)
    try:
        return kind(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid value for {key!r}: {value!r}", path=path) from e


def _is_empty(value):
    return value is None or value == ""


def config_from_mapping(data, path=None):
    """
    Return an ExperimentConfig from a mapping of raw configuration values.
    Raise a ConfigError naming the first unknown key.
    """
    if not isinstance(data, dict):
        raise ConfigError("expected a mapping at the top level", path=path)

    values = {}
    for key, value in data.items():
        if _is_empty(value):
            continue

        if key in TOP_LEVEL_KEYS:
            values[key] = _coerce(key, value, TOP_LEVEL_KEYS[key], path)

        elif key == "n_list":
            if not isinstance(value, list):
                raise ConfigError(f"'n_list' must be a list, got {value!r}", path=path)
            values[key] = tuple(_coerce("n_list", n, int, path) for n in value)

        elif key in SECTION_KEYS:
            if not isinstance(value, dict):
                raise ConfigError(f"{key!r} must be a mapping, got {value!r}", path=path)
            known = SECTION_KEYS[key]
            section = {}
            for name, item in value.items():
                if name not in known:
                    raise ConfigError(f"unknown configuration key: '{key}.{name}'", path=path)
                if _is_empty(item):
                    continue
                section[name] = _coerce(f"{key}.{name}", item, known[name], path)
            values[key] = section

        else:
            raise ConfigError(f"unknown configuration key: {key!r}", path=path)

    return ExperimentConfig(**values)


def load_config(location):
    """
    Return an ExperimentConfig loaded from the YAML file at `location`.
    """
    with open(location, encoding="utf-8") as source:
        text = source.read()

    try:
        data = saneyaml.load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None) or getattr(e, "context_mark", None)
        line_number = mark.line + 1 if mark is not None else None
        problem = getattr(e, "problem", None) or str(e)
        raise ConfigError(f"invalid YAML: {problem}", path=location, line_number=line_number) from e

    if data is None:
        data = {}
    config = config_from_mapping(data, path=location)
    logger.debug(f"load_config: {location}: {config.to_dict()}")
    return config


def resolve(
    config=None,
    algorithm=None,
    eps=None,
    r=None,
    mode=None,
    seed=None,
    repetitions=None,
    oracle_cap=None,
    n=None,
    n_list=None,
    report=None,
    csv=None,
    dump=None,
):
    """
    Return a validated ExperimentConfig from `config` with every non-None
    override applied.
    """
    config = config or ExperimentConfig()
    overrides = dict(
        algorithm=algorithm,
        eps=eps,
        r=r,
        mode=mode,
        seed=seed,
        repetitions=repetitions,
        oracle_cap=oracle_cap,
    )
    changes = {key: value for key, value in overrides.items() if value is not None}

    if n is not None:
        changes["graph"] = dict(config.graph, n=n)
    if n_list:
        changes["n_list"] = tuple(n_list)

    outputs = dict(report=report, csv=csv, dump=dump)
    outputs = {key: value for key, value in outputs.items() if value is not None}
    if outputs:
        changes["output"] = dict(config.output, **outputs)

    return replace(config, **changes).validate()
