#
# Copyright (c) cliquepaths authors and others. All rights reserved.
# SPDX-License-Identifier: Apache-2.0
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
#

import json
import os

import saneyaml

REGEN_TEST_FIXTURES = os.environ.get("CLIQUEPATHS_TEST_FIXTURES_REGEN", False)

# options holding paths that differ between test runs
PATH_OPTIONS = ("--config", "--report", "--csv", "--dump", "--graph", "--labels")


def streamline_headers(headers):
    """
    Modify the `headers` list of mappings in place to make it easier to test.
    """
    for hle in headers:
        hle.pop("tool_version", None)
        options = hle.get("options", {})
        options.pop("--verbose", None)
        for option in PATH_OPTIONS:
            if option in options:
                options[option] = os.path.basename(options[option])
        streamline_errors(hle.get("errors", []))


def streamline_errors(errors):
    """
    Modify the `errors` list in place to make it easier to test.
    """
    for i, error in enumerate(errors[:]):
        error_lines = error.splitlines(True)
        if len(error_lines) <= 1:
            continue
        # keep only first and last line
        errors[i] = "".join([error_lines[0] + error_lines[-1]])


def streamline_report(report):
    """
    Return the `report` mapping with variable data removed: header tool
    versions and paths, and the configured output paths.
    """
    streamline_headers(report.get("headers", []))
    config = report.get("config")
    if config:
        config["output"] = {key: os.path.basename(value) for key, value in config["output"].items()}
        path = config.get("graph", {}).get("path")
        if path:
            config["graph"]["path"] = os.path.basename(path)
    return report


def load_report(location):
    with open(location, encoding="utf-8") as res:
        return streamline_report(json.load(res))


def check_json(expected, results, regen=REGEN_TEST_FIXTURES):
    """
    Assert if the `results` mapping is the same as the expected JSON file.

    If `regen` is True the `expected` file WILL BE overwritten with the
    `results`. This is convenient for updating tests expectations. But use
    with caution.
    """
    if regen:
        with open(expected, "w") as ex:
            json.dump(results, ex, indent=2, separators=(",", ": "))
    with open(expected) as ex:
        expected = json.load(ex)

    # NOTE we redump the JSON as a YAML string for easier display of
    # the failures comparison/diff
    if results != expected:
        expected = saneyaml.dump(expected)
        results = saneyaml.dump(results)
        assert results == expected


def check_report(expected, result_file, regen=REGEN_TEST_FIXTURES, check_headers=False):
    """
    Check the report `result_file` JSON against the `expected` JSON file,
    ignoring the headers unless `check_headers` is True.
    """
    results = load_report(result_file)
    if not check_headers:
        results.pop("headers", None)
    check_json(expected, results, regen=regen)
