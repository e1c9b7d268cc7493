from __future__ import annotations

from dataclasses import dataclass
from typing import Any


@dataclass(frozen=True)
class Verdict:
    """Outcome of a checking routine: truthy when the check passed.

    ``witness`` pinpoints the failure (an uncovered string, a violating pair,
    a failing entry index...) and ``reason`` says in words what went wrong.
    """

    ok: bool
    reason: str = ""
    witness: Any = None

    def __bool__(self) -> bool:
        return self.ok

    @classmethod
    def yes(cls) -> "Verdict":
        return cls(True)

    @classmethod
    def no(cls, reason: str, witness: Any = None) -> "Verdict":
        return cls(False, reason, witness)
