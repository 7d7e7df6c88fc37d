#!/usr/bin/env python3
"""
Exception hierarchy for the partition-matroid greedy toolkit
Library code raises these; the CLI maps them to exit codes
"""

from typing import List, Optional


class SubmodularToolkitError(Exception):
    """Base class for every error raised by the toolkit"""


class ConstructionError(SubmodularToolkitError, ValueError):
    """A model object could not be built from the given arguments"""


class DimensionError(SubmodularToolkitError, ValueError):
    """Vector length or element index does not match the ground set"""


class ParameterError(SubmodularToolkitError, ValueError):
    """A numeric parameter is outside its domain"""


class CapacityError(SubmodularToolkitError, RuntimeError):
    """An exhaustive computation would exceed its enumeration cap"""


class PreconditionError(SubmodularToolkitError, ValueError):
    """An input violates the documented precondition of an operation"""


class CapabilityError(SubmodularToolkitError, RuntimeError):
    """The input lacks data the requested analysis needs"""


class DegenerateObjectiveError(SubmodularToolkitError, ValueError):
    """The objective cannot support the requested quantity"""


class FormatError(SubmodularToolkitError, ValueError):
    """Malformed input file or trace"""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
            location += ": "
        elif line is not None:
            location = f"line {line}: "
        super().__init__(f"{location}{message}")


class ConfigError(SubmodularToolkitError, ValueError):
    """Experiment configuration failed validation"""

    def __init__(self, messages: List[str]):
        self.messages = list(messages)
        super().__init__("; ".join(self.messages) or "invalid configuration")
