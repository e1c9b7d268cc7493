"""Exception hierarchy shared by every module of the workbench."""

from __future__ import annotations


class FanError(Exception):
    """Base class for all workbench errors."""


class DepthExceeded(FanError):
    def __init__(self, requested: int, bound: int, what: str = "probe depth"):
        super().__init__(f"{what} {requested} exceeds bound {bound}")
        self.requested = requested
        self.bound = bound


class NoCommit(FanError):
    """An associate did not commit along a path within the depth budget."""

    def __init__(self, depth: int, path: object = None):
        super().__init__(f"no commit up to depth {depth}" + (f" on {path}" if path is not None else ""))
        self.depth = depth
        self.path = path


class FuelExhausted(FanError):
    """A search ran out of depth or step budget before finishing.

    ``where`` carries the node (bit string) that could not be closed, or the
    exact measure reached so far for weak covers.
    """

    def __init__(self, message: str, where: object = None):
        super().__init__(message)
        self.where = where


class NonPositiveGauge(FanError):
    def __init__(self, point: object):
        super().__init__(f"gauge is not positive at {point}")
        self.point = point


class OutOfPrefix(FanError):
    """Raised by an instrumented argument that was queried beyond its prefix."""

    def __init__(self, index: int):
        super().__init__(f"bit {index} lies beyond the available prefix")
        self.index = index


class Diverged(FanError):
    """A fuel-bounded computation ran out of steps."""

    def __init__(self, reason: str = "steps"):
        super().__init__(f"diverged ({reason})")
        self.reason = reason


class EvalError(FanError):
    """An evaluation fault: bad arity, missing oracle, non-total S8 argument."""

    def __init__(self, kind: str, location: str = "", detail: str = ""):
        msg = kind if not location else f"{kind} at {location}"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)
        self.kind = kind
        self.location = location
        self.detail = detail


class NoHeader(EvalError):
    def __init__(self, window: int):
        super().__init__("NoHeader", detail=f"no 1 among the first {window} bits")
        self.window = window


class ParseError(FanError):
    def __init__(self, line: int, column: int, expected: str, found: str = ""):
        got = f", found {found!r}" if found else ""
        super().__init__(f"line {line}, column {column}: expected {expected}{got}")
        self.line = line
        self.column = column
        self.expected = expected
        self.found = found


class NotWellOrderedDetected(FanError):
    pass


class CoverContradiction(FanError):
    """The cover handed to the ATR extraction misses an explicit path."""

    def __init__(self, witness: object, uncovered: bool):
        state = "verified uncovered" if uncovered else "NOT verified"
        super().__init__(f"cover misses {witness} ({state})")
        self.witness = witness
        self.uncovered = uncovered
