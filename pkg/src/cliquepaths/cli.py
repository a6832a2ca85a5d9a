#
# Copyright (c) cliquepaths authors and others. All rights reserved.
# SPDX-License-Identifier: Apache-2.0
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
#

import csv
import json
import logging
import math
import multiprocessing
import os
from contextlib import contextmanager
from fractions import Fraction
from importlib.metadata import version
from pathlib import Path

import click
import numpy as np

from cliquepaths import apps
from cliquepaths.config import ALGORITHMS
from cliquepaths.config import MODES
from cliquepaths.config import load_config
from cliquepaths.config import resolve
from cliquepaths.emulator import build_emulator
from cliquepaths.emulator import check_stretch
from cliquepaths.emulator import load_emulator_edges
from cliquepaths.emulator import verify_clustering
from cliquepaths.emulator import verify_emulator
from cliquepaths.emulator import verify_provenance
from cliquepaths.errors import CapacityError
from cliquepaths.errors import ConfigError
from cliquepaths.errors import ContractError
from cliquepaths.errors import GraphParseError
from cliquepaths.errors import ParameterError
from cliquepaths.errors import SeedExhaustionError
from cliquepaths.graphs import dump_edge_list
from cliquepaths.graphs import dump_label_table
from cliquepaths.graphs import exact_apsp
from cliquepaths.graphs import generate
from cliquepaths.graphs import load_distance_rows
from cliquepaths.graphs import load_edge_list
from cliquepaths.graphs import load_weighted_edges
from cliquepaths.hopset import build_bounded_hopset
from cliquepaths.hopset import verify_basis
from cliquepaths.hopset import verify_hopset
from cliquepaths.ledger import RoundLedger
from cliquepaths.minplus import k_nearest_bounded
from cliquepaths.minplus import nearest_by_bfs
from cliquepaths.randomness import stream
from cliquepaths.softhit import FLOAT_SLACK
from cliquepaths.softhit import HashFamilyConfig
from cliquepaths.softhit import ShakeGenerator
from cliquepaths.softhit import derandomize_soft_hitting
from cliquepaths.softhit import random_instance
from cliquepaths.softhit import verify_soft_hitting

logger = logging.getLogger(__name__)

LOG_FILE_LOCATION = os.path.join(os.path.expanduser("~"), "cliquepaths.log")

REPORT_VERSION = "1.0"

EXIT_FAILURE = 1
EXIT_CAPACITY = 3

HISTOGRAM_COLUMNS = ["repetition", "seed", "residual", "count"]
SWEEP_COLUMNS = ["n", "repetitions", "mean_size", "mean_rounds", "size_constant", "slope"]


class CapacityExceeded(click.ClickException):
    exit_code = EXIT_CAPACITY


class VerificationAborted(click.ClickException):
    exit_code = EXIT_FAILURE


@click.group()
def cliquepaths():
    """
    Build and verify Congested Clique distance structures on generated graphs.
    """


def experiment_options(function):
    """
    Add the options shared by the run and sweep commands to `function`.
    """
    options = [
        click.option(
            "--config",
            "config_location",
            type=click.Path(exists=True, dir_okay=False, readable=True),
            metavar="FILE",
            help="Read the experiment configuration from a YAML FILE.",
        ),
        click.option("--algorithm", type=click.Choice(ALGORITHMS), help="Algorithm to run."),
        click.option("--eps", type=float, help="Target stretch eps in (0, 1)."),
        click.option("--r", type=int, help="Number of emulator levels, at least 2."),
        click.option("--mode", type=click.Choice(MODES), help="Construction mode."),
        click.option("--seed", type=int, help="Base seed. Repetition i uses seed + i."),
        click.option("--repetitions", type=int, help="Number of repetitions."),
        click.option(
            "--oracle-cap", type=int, help="Largest graph checked against exact distances."
        ),
        click.option(
            "--report",
            metavar="FILE",
            help="Write the JSON report to FILE. Default is to print on screen.",
        ),
        click.option("--csv", "csv_location", metavar="FILE", help="Write CSV data to FILE."),
        click.option(
            "--processes",
            type=int,
            default=1,
            show_default=True,
            help="Run repetitions in this many processes.",
        ),
        click.option(
            "--log-file",
            metavar="FILE",
            default=LOG_FILE_LOCATION,
            show_default=True,
            help="Write the log to FILE. It is cleared at the start of each command.",
        ),
        click.option("--verbose", is_flag=True, help="Log debug messages."),
    ]
    for option in reversed(options):
        function = option(function)
    return function


def setup_logging(log_file, verbose):
    clear_log_file(log_file)
    logging.basicConfig(
        filename=log_file,
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s - %(name)s - %(message)s",
        filemode="w",
        force=True,
    )


def clear_log_file(log_file=LOG_FILE_LOCATION):
    log_file = Path(log_file)

    if log_file.is_file():
        os.remove(log_file)


@contextmanager
def translate_errors():
    """
    Map library errors to click exceptions and their exit codes.
    """
    try:
        yield
    except (ParameterError, ConfigError, GraphParseError) as e:
        logger.error(str(e))
        raise click.UsageError(str(e)) from e
    except CapacityError as e:
        logger.error(str(e))
        raise CapacityExceeded(str(e)) from e
    except ContractError as e:
        logger.error(str(e))
        raise VerificationAborted(str(e)) from e
    except ValueError as e:
        logger.error(str(e))
        raise click.UsageError(str(e)) from e


def construct_headers(command_name, options, warnings=None, log_file=LOG_FILE_LOCATION):
    """
    Return a list comprising the `headers` content of a report.
    """
    headers = []
    headers_content = {}
    errors = []

    headers_content["tool_name"] = "cliquepaths"
    headers_content["tool_version"] = version("cliquepaths")
    headers_content["report_version"] = REPORT_VERSION

    options = {key: value for key, value in options.items() if value not in (None, False)}
    headers_content["options"] = dict(command=command_name, **options)

    log_file = Path(log_file)
    if log_file.is_file():
        with open(log_file, "r") as f:
            for line in f:
                if line.startswith("ERROR"):
                    errors.append(line)

    headers_content["errors"] = errors
    headers_content["warnings"] = list(warnings or [])
    headers.append(headers_content)

    return headers


def write_report(report, location):
    with click.open_file(location or "-", mode="w", encoding="utf-8") as output:
        json.dump(report, output, indent=4)
        output.write("\n")


def ledger_summary(ledger):
    return dict(
        total=ledger.total,
        by_primitive=ledger.totals_by_primitive(),
        by_phase=ledger.totals_by_phase(),
    )


def build_graph(config, seed):
    return generate(config.graph_spec, seed=seed)


def dump_graph(g, dump):
    os.makedirs(dump, exist_ok=True)
    dump_edge_list(g, os.path.join(dump, "graph.txt"))
    dump_label_table(g, os.path.join(dump, "labels.txt"))


def run_emulator(config, seed, dump=None):
    g = build_graph(config, seed)
    oracle = exact_apsp(g, config.oracle_cap)
    ledger = RoundLedger(g.n, config.cost)
    emulator = build_emulator(
        g,
        config.eps,
        config.r,
        mode=config.mode,
        seed=seed,
        c_prime=config.softhit_options["c_prime"],
        ledger=ledger,
    )
    stretch = verify_emulator(g, emulator, oracle=oracle)
    clustering = verify_clustering(emulator)
    provenance = verify_provenance(g, emulator, oracle=oracle)

    warnings = []
    if emulator.flags:
        warnings.append(
            f"seed {seed}: {len(emulator.flags)} heavy vertices have no top level vertex "
            "in their table"
        )
    if dump:
        dump_graph(g, dump)
        emulator.dump(os.path.join(dump, "emulator.txt"))
        ledger.dump_csv(os.path.join(dump, "ledger.csv"))

    row = dict(
        passed=stretch.passed,
        n=g.n,
        m=g.num_edges,
        edge_count=emulator.edge_count,
        size_ratio=emulator.size_ratio,
        edges_by_rule=emulator.edge_counts_by_rule(),
        level_sizes=emulator.hierarchy.sizes(),
        additive_bound=str(emulator.additive_bound),
        stretch=stretch.to_dict(),
        clustering_ok=clustering.passed,
        provenance_ok=provenance.passed,
        ledger=ledger_summary(ledger),
        warnings=warnings,
    )
    return row, stretch.residual_histogram


def run_hopset(config, seed, dump=None):
    g = build_graph(config, seed)
    oracle = exact_apsp(g, config.oracle_cap)
    ledger = RoundLedger(g.n, config.cost)
    hopset = build_bounded_hopset(
        g, config.eps, config.t, mode=config.hopset_mode, seed=seed, ledger=ledger
    )
    report = verify_hopset(g, hopset, hopset.beta, config.eps, config.t, oracle=oracle)
    basis = verify_basis(g, hopset, oracle=oracle)

    warnings = []
    if hopset.misses:
        warnings.append(f"seed {seed}: pivots miss {len(hopset.misses)} full tables")
    if dump:
        dump_graph(g, dump)
        hopset.dump(os.path.join(dump, "hopset.txt"))
        ledger.dump_csv(os.path.join(dump, "ledger.csv"))

    row = dict(
        passed=report.passed,
        n=g.n,
        m=g.num_edges,
        beta=hopset.beta,
        edge_count=len(hopset.edges),
        pivots=len(hopset.pivots),
        size_constant=hopset.size_constant,
        hopset=report.to_dict(),
        basis_ok=basis.passed,
        ledger=ledger_summary(ledger),
        warnings=warnings,
    )
    return row, {}


def run_knearest(config, seed, dump=None):
    g = build_graph(config, seed)
    ledger = RoundLedger(g.n, config.cost)
    table = k_nearest_bounded(g, config.k, config.d, ledger=ledger)
    expected = nearest_by_bfs(g, config.k, config.d)
    mismatches = [v for v in range(g.n) if table.entries(v) != expected.entries(v)]

    if dump:
        dump_graph(g, dump)
        table.dump_json(os.path.join(dump, "nearest.json"))

    row = dict(
        passed=not mismatches,
        n=g.n,
        m=g.num_edges,
        k=config.k,
        d=config.d,
        oracle_equal=not mismatches,
        mismatches=mismatches[:20],
        density=table.density,
        ledger=ledger_summary(ledger),
        warnings=[],
    )
    return row, {}


def run_softhit(config, seed, dump=None):
    options = config.softhit_options
    inst = random_instance(options["N"], options["Delta"], options["holders"], seed=seed)
    hash_config = HashFamilyConfig(
        N=inst.N,
        delta=inst.delta,
        c_prime=options["c_prime"],
        mode=options["generator"],
        samples=options["samples"],
        sample_seed=seed,
    )
    generator = None
    if hash_config.mode != "independent":
        generator = ShakeGenerator(options["seed_bits"], hash_config.total_bits)

    ledger = RoundLedger(inst.N, config.cost)
    result = derandomize_soft_hitting(inst, hash_config, generator, ledger=ledger)
    report = verify_soft_hitting(inst, result.members)
    bound_ok = (
        result.final_cost <= result.initial_expectation * (1 + FLOAT_SLACK) + FLOAT_SLACK
    )

    warnings = []
    if hash_config.mode == "monte_carlo" and not bound_ok:
        warnings.append(f"seed {seed}: sampled derandomization ended above the expectation")
    if dump:
        os.makedirs(dump, exist_ok=True)
        inst.dump_json(os.path.join(dump, "softhit.json"))

    passed = report.passed and (bound_ok or hash_config.mode == "monte_carlo")
    row = dict(
        passed=passed,
        n=inst.N,
        holders=len(inst.holders),
        generator=hash_config.mode,
        size=len(result.members),
        initial_expectation=result.initial_expectation,
        final_cost=result.final_cost,
        expectation_bound_ok=bound_ok,
        monotone=result.monotone,
        softhit=report.to_dict(),
        ledger=ledger_summary(ledger),
        warnings=warnings,
    )
    return row, {}


def pick_sources(n, count, seed):
    count = min(count, n)
    chosen = stream(seed, "sources").choice(n, size=count, replace=False)
    return sorted(int(s) for s in chosen)


def run_application(config, seed, dump=None):
    g = build_graph(config, seed)
    oracle = exact_apsp(g, config.oracle_cap)
    ledger = RoundLedger(g.n, config.cost)

    if config.algorithm == "mssp":
        sources = pick_sources(g.n, config.source_count(g.n), seed)
        table = apps.mssp(g, sources, config.eps, mode=config.mode, seed=seed, ledger=ledger)
    elif config.algorithm == "apsp-additive":
        table = apps.apsp_near_additive(g, config.eps, mode=config.mode, seed=seed, ledger=ledger)
    else:
        table = apps.apsp_2eps(g, config.eps, mode=config.mode, seed=seed, ledger=ledger)

    report = apps.verify_estimates(g, table, oracle=oracle)
    if dump:
        dump_graph(g, dump)
        table.dump_csv(os.path.join(dump, "estimates.csv"))
        ledger.dump_csv(os.path.join(dump, "ledger.csv"))

    row = dict(
        passed=report.passed,
        n=g.n,
        m=g.num_edges,
        sources=len(table.sources),
        estimates=report.to_dict(),
        ledger=ledger_summary(ledger),
        warnings=[],
    )
    return row, report.residual_histogram


RUNNERS = {
    "emulator": run_emulator,
    "hopset": run_hopset,
    "knearest": run_knearest,
    "softhit": run_softhit,
    "apsp-additive": run_application,
    "mssp": run_application,
    "apsp-2eps": run_application,
}


def run_repetition(config, index, dump=None):
    """
    Return a (row, residual histogram) tuple for repetition `index` of
    `config`, run with seed = config.seed + index.
    """
    seed = config.seed + index
    runner = RUNNERS[config.algorithm]
    try:
        row, histogram = runner(config, seed, dump)
    except SeedExhaustionError as e:
        logger.error(f"repetition {index}: {e}")
        row, histogram = dict(passed=False, error=str(e), warnings=[]), {}
    return dict(repetition=index, seed=seed, **row), histogram


def run_repetitions(config, processes=1):
    dump = config.output.get("dump")
    arguments = [
        (config, index, dump if index == 0 else None) for index in range(config.repetitions)
    ]
    if processes > 1 and len(arguments) > 1:
        with multiprocessing.Pool(processes) as pool:
            return pool.starmap(run_repetition, arguments)

    results = []
    for args in arguments:
        row, histogram = run_repetition(*args)
        status = "passed" if row["passed"] else "FAILED"
        click.echo(f"repetition {row['repetition']} (seed {row['seed']}): {status}", err=True)
        results.append((row, histogram))
    return results


def write_histogram_csv(location, rows, histograms):
    with open(location, "w", encoding="utf-8", newline="") as output:
        writer = csv.writer(output)
        writer.writerow(HISTOGRAM_COLUMNS)
        for row, histogram in zip(rows, histograms):
            for residual, count in sorted(histogram.items()):
                writer.writerow([row["repetition"], row["seed"], residual, count])


def summarize(rows):
    failures = [row["repetition"] for row in rows if not row["passed"]]
    return dict(repetitions=len(rows), passed=not failures, failures=failures)


@cliquepaths.command(name="run")
@experiment_options
@click.option("--n", type=int, help="Override the number of graph vertices.")
@click.option(
    "--dump",
    metavar="DIR",
    help="Write the graph and the built structure of the first repetition to DIR.",
)
def run(
    config_location,
    algorithm,
    eps,
    r,
    mode,
    seed,
    repetitions,
    oracle_cap,
    report,
    csv_location,
    processes,
    log_file,
    verbose,
    n,
    dump,
):
    """
    Run an experiment and verify every repetition against exact distances.

    Exit with 0 when every repetition passes, 1 on a verification failure,
    2 on a usage error and 3 when the exact distance oracle cap is exceeded.
    """
    setup_logging(log_file, verbose)

    with translate_errors():
        config = load_config(config_location) if config_location else None
        config = resolve(
            config,
            algorithm=algorithm,
            eps=eps,
            r=r,
            mode=mode,
            seed=seed,
            repetitions=repetitions,
            oracle_cap=oracle_cap,
            n=n,
            report=report,
            csv=csv_location,
            dump=dump,
        )
        results = run_repetitions(config, processes)

    rows = [row for row, _ in results]
    histograms = [histogram for _, histogram in results]
    warnings = [warning for row in rows for warning in row.pop("warnings", [])]

    options = {
        "--config": config_location,
        "--algorithm": algorithm,
        "--eps": eps,
        "--r": r,
        "--mode": mode,
        "--seed": seed,
        "--repetitions": repetitions,
        "--oracle-cap": oracle_cap,
        "--n": n,
        "--report": report,
        "--csv": csv_location,
        "--dump": dump,
    }
    summary = summarize(rows)
    results_report = dict(
        headers=construct_headers("run", options, warnings, log_file),
        config=config.to_dict(),
        summary=summary,
        runs=rows,
    )
    write_report(results_report, config.output.get("report"))

    csv_output = config.output.get("csv")
    if csv_output:
        write_histogram_csv(csv_output, rows, histograms)

    if not summary["passed"]:
        click.get_current_context().exit(EXIT_FAILURE)


def sweep_point(config, index, nominal=False):
    """
    Return (size, rounds) for repetition `index` of `config` without
    verification. Size is None for the distance estimation pipelines.
    """
    seed = config.seed + index
    n = config.graph.get("n")
    if nominal:
        ledger = apps.mssp_round_budget(n, config.eps, config.source_count(n), config.cost)
        return None, ledger.total

    if config.algorithm == "softhit":
        options = config.softhit_options
        inst = random_instance(n, options["Delta"], options["holders"], seed=seed)
        ledger = RoundLedger(n, config.cost)
        hash_config = HashFamilyConfig(N=n, delta=inst.delta, c_prime=options["c_prime"])
        result = derandomize_soft_hitting(inst, hash_config, ledger=ledger)
        return len(result.members), ledger.total

    g = build_graph(config, seed)
    ledger = RoundLedger(g.n, config.cost)
    if config.algorithm == "emulator":
        emulator = build_emulator(g, config.eps, config.r, mode=config.mode, seed=seed, ledger=ledger)
        return emulator.edge_count, ledger.total
    if config.algorithm == "hopset":
        hopset = build_bounded_hopset(
            g, config.eps, config.t, mode=config.hopset_mode, seed=seed, ledger=ledger
        )
        return len(hopset.edges), ledger.total
    if config.algorithm == "knearest":
        table = k_nearest_bounded(g, config.k, config.d, ledger=ledger)
        return sum(len(table.entries(v)) for v in range(g.n)), ledger.total

    if config.algorithm == "mssp":
        sources = pick_sources(g.n, config.source_count(g.n), seed)
        apps.mssp(g, sources, config.eps, mode=config.mode, seed=seed, ledger=ledger)
    elif config.algorithm == "apsp-additive":
        apps.apsp_near_additive(g, config.eps, mode=config.mode, seed=seed, ledger=ledger)
    else:
        apps.apsp_2eps(g, config.eps, mode=config.mode, seed=seed, ledger=ledger)
    return None, ledger.total


def size_scale(config, n):
    """
    Return the size the algorithm's size bound predicts up to its constant,
    or None when it has none.
    """
    if config.algorithm == "emulator":
        return config.r * n ** (1 + 1 / 2**config.r)
    if config.algorithm == "hopset":
        return n**1.5 * max(1.0, math.log2(n))
    return None


def fit_slope(ns, values):
    """
    Return the slope of the least squares fit of log(values) on log(ns), or
    None with fewer than two points or a non-positive value.
    """
    if len(ns) < 2 or any(value is None or value <= 0 for value in values):
        return None
    slope, _ = np.polyfit(np.log(ns), np.log(values), 1)
    return float(slope)


def run_sweep(config, nominal=False, processes=1):
    points = []
    for n in config.n_list:
        point_config = config.for_n(n)
        arguments = [(point_config, index, nominal) for index in range(config.repetitions)]
        if processes > 1 and len(arguments) > 1:
            with multiprocessing.Pool(processes) as pool:
                results = pool.starmap(sweep_point, arguments)
        else:
            results = [sweep_point(*args) for args in arguments]

        sizes = [size for size, _ in results]
        rounds = [total for _, total in results]
        mean_size = None if any(size is None for size in sizes) else float(np.mean(sizes))
        scale = size_scale(config, n)
        constant = mean_size / scale if mean_size is not None and scale else None
        points.append(
            dict(
                n=n,
                repetitions=len(results),
                mean_size=mean_size,
                mean_rounds=float(np.mean(rounds)),
                size_constant=constant,
            )
        )
        click.echo(f"n={n}: size={mean_size} rounds={points[-1]['mean_rounds']:.2f}", err=True)

    ns = [point["n"] for point in points]
    if all(point["mean_size"] is not None for point in points):
        slope = fit_slope(ns, [point["mean_size"] for point in points])
    else:
        slope = fit_slope(ns, [point["mean_rounds"] for point in points])
    return points, slope


def write_sweep_csv(location, points, slope):
    with open(location, "w", encoding="utf-8", newline="") as output:
        writer = csv.writer(output)
        writer.writerow(SWEEP_COLUMNS)
        for point in points:
            writer.writerow(
                [
                    point["n"],
                    point["repetitions"],
                    "" if point["mean_size"] is None else point["mean_size"],
                    point["mean_rounds"],
                    "" if point["size_constant"] is None else point["size_constant"],
                    "" if slope is None else slope,
                ]
            )


@cliquepaths.command(name="sweep")
@experiment_options
@click.option(
    "--n",
    "n_list",
    type=int,
    multiple=True,
    help="Number of vertices of one sweep point. Repeat for several points.",
)
@click.option(
    "--nominal",
    is_flag=True,
    help="Charge the MSSP round budget at nominal sizes instead of building graphs.",
)
def sweep(
    config_location,
    algorithm,
    eps,
    r,
    mode,
    seed,
    repetitions,
    oracle_cap,
    report,
    csv_location,
    processes,
    log_file,
    verbose,
    n_list,
    nominal,
):
    """
    Build the structure for each n of a list and report the mean size and
    charged rounds per n with the fitted log-log slope.
    """
    setup_logging(log_file, verbose)

    with translate_errors():
        config = load_config(config_location) if config_location else None
        config = resolve(
            config,
            algorithm=algorithm,
            eps=eps,
            r=r,
            mode=mode,
            seed=seed,
            repetitions=repetitions,
            oracle_cap=oracle_cap,
            n_list=n_list,
            report=report,
            csv=csv_location,
        )
        if not config.n_list:
            raise click.UsageError("sweep needs at least one n: use --n or n_list")
        if nominal and config.algorithm != "mssp":
            raise click.UsageError("--nominal is only supported with the mssp algorithm")
        points, slope = run_sweep(config, nominal=nominal, processes=processes)

    options = {
        "--config": config_location,
        "--algorithm": algorithm,
        "--eps": eps,
        "--r": r,
        "--mode": mode,
        "--seed": seed,
        "--repetitions": repetitions,
        "--n": list(n_list) or None,
        "--nominal": nominal,
        "--report": report,
        "--csv": csv_location,
    }
    sweep_report = dict(
        headers=construct_headers("sweep", options, log_file=log_file),
        config=config.to_dict(),
        points=points,
        slope=slope,
    )
    write_report(sweep_report, config.output.get("report"))

    csv_output = config.output.get("csv")
    if csv_output:
        write_sweep_csv(csv_output, points, slope)


def parse_fraction(ctx, param, value):
    """
    Return the ``value`` of a number option as an exact Fraction.
    """
    if value is None:
        return None
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise click.BadParameter(f"Invalid number: {value!r}. Use an integer, decimal or a/b.")


def check_artifact_ids(g, ids, artifact):
    """
    Raise a UsageError if any vertex id of `artifact` is not a vertex of `g`.
    """
    outside = sorted({int(vertex) for vertex in ids if not 0 <= int(vertex) < g.n})
    if outside:
        raise click.UsageError(
            f"{artifact} names vertex ids {outside[:5]} outside the graph's 0..{g.n - 1}: "
            "check that --graph and --labels come from the same dump"
        )


def default_labels(graph_location):
    """
    Return the label table written next to a dumped `graph_location`, or None.
    """
    location = os.path.join(os.path.dirname(graph_location), "labels.txt")
    return location if os.path.isfile(location) else None


def verify_artifact(g, emulator, hopset, estimates, eps, additive, multiplicative, beta, t, oracle):
    """
    Return a (report mapping, passed) tuple for the one given artifact.
    """
    if emulator:
        if eps is None or additive is None:
            raise click.UsageError("--emulator needs --eps and --additive.")
        edges = [(u, v, weight) for u, v, weight, _, _ in load_emulator_edges(emulator)]
        check_artifact_ids(g, [vertex for u, v, _ in edges for vertex in (u, v)], "--emulator")
        report = check_stretch(g, edges, eps, additive, oracle=oracle)
        return dict(artifact="emulator", **report.to_dict()), report.passed

    if hopset:
        if eps is None or beta is None or t is None:
            raise click.UsageError("--hopset needs --eps, --beta and --t.")
        edges = load_weighted_edges(hopset)
        check_artifact_ids(g, [vertex for u, v, _ in edges for vertex in (u, v)], "--hopset")
        report = verify_hopset(g, edges, beta, float(eps), t, oracle=oracle)
        return dict(artifact="hopset", **report.to_dict()), report.passed

    if multiplicative is None:
        raise click.UsageError("--estimates needs --multiplicative.")
    sources, values = load_distance_rows(estimates)
    if values.shape[1] != g.n:
        raise click.UsageError(f"estimates have {values.shape[1]} columns, the graph has {g.n} vertices")
    check_artifact_ids(g, sources, "--estimates")
    table = apps.EstimateTable(
        sources=sources,
        values=values,
        phases=np.zeros(values.shape, dtype=np.int8),
        phase_names=("loaded",),
        multiplicative=multiplicative,
        additive=additive or Fraction(0),
    )
    report = apps.verify_estimates(g, table, oracle=oracle)
    return dict(artifact="estimates", **report.to_dict()), report.passed


@cliquepaths.command(name="verify")
@click.option(
    "--graph",
    "graph_location",
    type=click.Path(exists=True, dir_okay=False, readable=True),
    required=True,
    metavar="FILE",
    help="Edge list of the graph, as written by run --dump.",
)
@click.option(
    "--labels",
    "labels_location",
    type=click.Path(exists=True, dir_okay=False, readable=True),
    metavar="FILE",
    help="Label table of the graph, as written by run --dump. "
    "Default to the labels.txt next to the --graph FILE.",
)
@click.option(
    "--emulator",
    type=click.Path(exists=True, dir_okay=False, readable=True),
    metavar="FILE",
    help="Emulator dump with 'u v w level rule' lines.",
)
@click.option(
    "--hopset",
    type=click.Path(exists=True, dir_okay=False, readable=True),
    metavar="FILE",
    help="Hopset dump with 'u v w' lines.",
)
@click.option(
    "--estimates",
    type=click.Path(exists=True, dir_okay=False, readable=True),
    metavar="FILE",
    help="Distance estimate CSV.",
)
@click.option("--eps", callback=parse_fraction, help="Multiplicative slack eps.")
@click.option("--additive", callback=parse_fraction, help="Additive term of the guarantee.")
@click.option(
    "--multiplicative", callback=parse_fraction, help="Multiplicative factor for estimates."
)
@click.option("--beta", type=int, help="Hop bound of a hopset.")
@click.option("--t", type=int, help="Distance bound of a hopset.")
@click.option("--oracle-cap", type=int, default=8192, show_default=True)
@click.option(
    "--report",
    metavar="FILE",
    help="Write the JSON report to FILE. Default is to print on screen.",
)
@click.option("--log-file", metavar="FILE", default=LOG_FILE_LOCATION, show_default=True)
@click.option("--verbose", is_flag=True, help="Log debug messages.")
def verify(
    graph_location,
    labels_location,
    emulator,
    hopset,
    estimates,
    eps,
    additive,
    multiplicative,
    beta,
    t,
    oracle_cap,
    report,
    log_file,
    verbose,
):
    """
    Check a dumped emulator, hopset or estimate table against a dumped graph.
    """
    setup_logging(log_file, verbose)

    given = [artifact for artifact in (emulator, hopset, estimates) if artifact]
    if len(given) != 1:
        raise click.UsageError("Use exactly one of --emulator, --hopset or --estimates.")

    labels_location = labels_location or default_labels(graph_location)
    with translate_errors():
        g = load_edge_list(graph_location, labels_location=labels_location)
        oracle = exact_apsp(g, oracle_cap)
        result, passed = verify_artifact(
            g, emulator, hopset, estimates, eps, additive, multiplicative, beta, t, oracle
        )

    options = {
        "--graph": graph_location,
        "--labels": labels_location,
        "--emulator": emulator,
        "--hopset": hopset,
        "--estimates": estimates,
        "--eps": None if eps is None else str(eps),
        "--additive": None if additive is None else str(additive),
        "--multiplicative": None if multiplicative is None else str(multiplicative),
        "--beta": beta,
        "--t": t,
        "--report": report,
    }
    verify_report = dict(
        headers=construct_headers("verify", options, log_file=log_file),
        result=result,
    )
    write_report(verify_report, report)

    if not passed:
        click.get_current_context().exit(EXIT_FAILURE)
