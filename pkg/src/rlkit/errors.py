"""Exception hierarchy shared by every rlkit module.

The CLI maps these onto exit codes: format and usage problems exit 2,
internal consistency failures exit 3.
"""

import os


class RLKitError(Exception):
    """Base class for all toolkit errors."""


class FormatError(RLKitError):
    """Malformed input: bad tables, bad JSON, bad formula syntax."""


class SizeError(RLKitError):
    """A configured size cap would be exceeded."""


class PreconditionError(RLKitError):
    """An operation was called outside its documented domain."""


class UnsupportedError(RLKitError):
    """The request is well-formed but deliberately not supported."""


class ConsistencyError(RLKitError):
    """Two independent computations disagree.

    Raised when a verified construction fails its own cross-check.  On a
    correct build this never happens.
    """


DEFAULT_CARRIER_CAP = 4096
DEFAULT_EVAL_CAP = 10**7


def carrier_cap(cap=None):
    """Largest carrier an enumeration may build (``RLKIT_CAP`` overrides)."""
    if cap is not None:
        return int(cap)
    env = os.environ.get("RLKIT_CAP", "").strip()
    if env:
        return int(env.split(",")[0])
    return DEFAULT_CARRIER_CAP


def eval_cap(cap=None):
    """Largest number of assignments a single exhaustive check may visit.

    ``RLKIT_CAP=<carrier>,<evaluations>`` sets both caps at once.
    """
    if cap is not None:
        return int(cap)
    env = os.environ.get("RLKIT_CAP", "").strip()
    if "," in env:
        return int(env.split(",")[1])
    return DEFAULT_EVAL_CAP
