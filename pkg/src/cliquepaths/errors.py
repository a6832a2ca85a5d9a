#
# Copyright (c) cliquepaths authors and others. All rights reserved.
# SPDX-License-Identifier: Apache-2.0
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
#


class CliquePathsError(Exception):
    """
    Base class for all errors raised by cliquepaths.
    """


class ParameterError(CliquePathsError, ValueError):
    """
    Raised when a numeric parameter is outside its accepted range.
    """


class CapacityError(CliquePathsError):
    """
    Raised when an input exceeds a configured capacity such as the oracle cap.
    """


class ContractError(CliquePathsError):
    """
    Raised when a caller breaks a documented precondition.
    """


class SeedExhaustionError(CliquePathsError):
    """
    Raised when none of the independent randomized runs qualifies.
    """


class GraphParseError(CliquePathsError, ValueError):
    """
    Raised for a malformed edge-list file. Carries the file `path` and the
    1-based `line_number` of the offending line.
    """

    def __init__(self, message, path=None, line_number=None):
        self.path = path
        self.line_number = line_number
        location = ""
        if path is not None:
            location = f"{path}:{line_number}: " if line_number else f"{path}: "
        super().__init__(f"{location}{message}")


class ConfigError(CliquePathsError, ValueError):
    """
    Raised for an invalid experiment configuration file or value. Carries the
    file `path` and the 1-based `line_number` when known.
    """

    def __init__(self, message, path=None, line_number=None):
        self.path = path
        self.line_number = line_number
        location = ""
        if path is not None:
            location = f"{path}:{line_number}: " if line_number else f"{path}: "
        super().__init__(f"{location}{message}")
