"""Bit strings, cylinders, binary trees and exact dyadic measure on Cantor space.

Everything here is exact: measures are :class:`Dyadic` values with integer
numerators, and tree statistics are obtained by exhaustive (pruned)
enumeration up to a declared probe depth.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Iterator, Optional

from .errors import DepthExceeded
from .verdict import Verdict


class BitString(tuple):
    """An immutable finite sequence of bits.

    Tuple ordering is the lexicographic order used for every tie-break.
    """

    __slots__ = ()

    def __new__(cls, bits: Iterable[int] = ()):
        values = tuple(int(b) for b in bits)
        for b in values:
            if b not in (0, 1):
                raise ValueError(f"not a bit: {b!r}")
        return super().__new__(cls, values)

    @classmethod
    def parse(cls, text: str) -> "BitString":
        text = text.strip()
        if text in ("", "ε", "e", "eps"):
            return EMPTY
        return cls(int(ch) for ch in text)

    @classmethod
    def _trusted(cls, bits: tuple) -> "BitString":
        return tuple.__new__(cls, bits)

    def __add__(self, other) -> "BitString":
        return BitString(tuple(self) + tuple(other))

    def child(self, bit: int) -> "BitString":
        return BitString._trusted(tuple(self) + (bit,))

    def is_prefix_of(self, other: tuple) -> bool:
        return len(self) <= len(other) and tuple(other[: len(self)]) == tuple(self)

    def prefixes(self) -> Iterator["BitString"]:
        """All initial segments, shortest first, including the empty one."""
        for n in range(len(self) + 1):
            yield BitString._trusted(tuple(self[:n]))

    def __getitem__(self, item):
        got = tuple.__getitem__(self, item)
        if isinstance(item, slice):
            return BitString._trusted(got)
        return got

    def __str__(self) -> str:
        return "".join(map(str, self)) if self else "ε"

    def __repr__(self) -> str:
        return f"BitString({str(self)!r})"


EMPTY = BitString()


def all_strings(n: int) -> Iterator[BitString]:
    """Every bit string of length ``n`` in lexicographic order."""
    for bits in product((0, 1), repeat=n):
        yield BitString._trusted(bits)


@functools.total_ordering
class Dyadic:
    """An exact dyadic rational ``numerator / 2**exponent`` in canonical form.

    Canonical means the numerator is odd, or the exponent is zero.
    """

    __slots__ = ("numerator", "exponent")

    def __init__(self, numerator: int, exponent: int = 0):
        if exponent < 0:
            numerator, exponent = numerator << -exponent, 0
        while exponent and not numerator & 1:
            numerator >>= 1
            exponent -= 1
        if numerator == 0:
            exponent = 0
        object.__setattr__(self, "numerator", int(numerator))
        object.__setattr__(self, "exponent", int(exponent))

    def __setattr__(self, key, value):
        raise AttributeError("Dyadic is immutable")

    @classmethod
    def pow2(cls, e: int) -> "Dyadic":
        """2**e for any integer ``e``."""
        return cls(1, -e)

    @classmethod
    def threshold(cls, k: int) -> "Dyadic":
        """The weak-cover target 1 - 2**-k."""
        return cls((1 << k) - 1, k)

    @classmethod
    def from_fraction(cls, value) -> "Dyadic":
        q = Fraction(value)
        den = q.denominator
        exp = den.bit_length() - 1
        if den != 1 << exp:
            raise ValueError(f"{value} is not dyadic")
        return cls(q.numerator, exp)

    @classmethod
    def parse(cls, text: str) -> "Dyadic":
        return cls.from_fraction(Fraction(text.strip()))

    def to_fraction(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.exponent)

    def as_pair(self) -> tuple[int, int]:
        return (self.numerator, self.exponent)

    def _aligned(self, other: "Dyadic") -> tuple[int, int, int]:
        e = max(self.exponent, other.exponent)
        return self.numerator << (e - self.exponent), other.numerator << (e - other.exponent), e

    @staticmethod
    def _coerce(other) -> "Dyadic":
        if isinstance(other, Dyadic):
            return other
        if isinstance(other, int):
            return Dyadic(other)
        if isinstance(other, Fraction):
            return Dyadic.from_fraction(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b, e = self._aligned(other)
        return Dyadic(a + b, e)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b, e = self._aligned(other)
        return Dyadic(a - b, e)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Dyadic(self.numerator * other.numerator, self.exponent + other.exponent)

    __rmul__ = __mul__

    def __neg__(self) -> "Dyadic":
        return Dyadic(-self.numerator, self.exponent)

    def __abs__(self) -> "Dyadic":
        return -self if self.numerator < 0 else self

    def half(self) -> "Dyadic":
        return Dyadic(self.numerator, self.exponent + 1)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self.numerator == other.numerator and self.exponent == other.exponent

    def __lt__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b, _ = self._aligned(other)
        return a < b

    def __hash__(self):
        return hash((self.numerator, self.exponent))

    def __str__(self) -> str:
        if self.exponent == 0:
            return str(self.numerator)
        return f"{self.numerator}/{1 << self.exponent}"

    def __repr__(self) -> str:
        return f"Dyadic({self.numerator}, {self.exponent})"


ZERO = Dyadic(0)
ONE = Dyadic(1)


@dataclass(frozen=True)
class Cylinder:
    """The basic clopen set of all paths extending ``prefix``."""

    prefix: BitString

    def contains(self, path_prefix: tuple) -> bool:
        return self.prefix.is_prefix_of(path_prefix)

    def __str__(self) -> str:
        return f"[{self.prefix}]"


def cylinder(text: str) -> Cylinder:
    return Cylinder(BitString.parse(text))


def cylinder_measure(c: Cylinder) -> Dyadic:
    return Dyadic(1, len(c.prefix))


def _minimal_prefixes(cs: Iterable[Cylinder]) -> list[BitString]:
    """Distinct prefixes none of which extends another, in lexicographic order."""
    out: list[BitString] = []
    for p in sorted({c.prefix for c in cs}):
        # sorted order puts every proper prefix before its extensions
        if out and out[-1].is_prefix_of(p):
            continue
        out.append(p)
    return out


def union_measure(cs: Iterable[Cylinder]) -> Dyadic:
    """Exact measure of a union of cylinders.

    Equal to the number of covered leaves at the deepest prefix length over
    2**depth; computed by summing the inclusion-minimal cylinders, which are
    pairwise disjoint.
    """
    minimal = _minimal_prefixes(cs)
    if not minimal:
        return ZERO
    depth = max(len(p) for p in minimal)
    leaves = sum(1 << (depth - len(p)) for p in minimal)
    return Dyadic(leaves, depth)


def uncovered_witness(cs: Iterable[Cylinder]) -> Optional[BitString]:
    """Lexicographically least string of the common depth missed by ``cs``.

    The common depth is the longest prefix length; returns None when the
    cylinders cover Cantor space.
    """
    cs = list(cs)
    minimal = _minimal_prefixes(cs)
    depth = max((len(c.prefix) for c in cs), default=0)
    covered = set(minimal)
    internal = {q for p in minimal for q in list(p.prefixes())[:-1]}
    stack = [EMPTY]
    while stack:
        node = stack.pop()
        if node in covered:
            continue
        if node not in internal:
            return node + (0,) * (depth - len(node))
        stack.append(node.child(1))
        stack.append(node.child(0))
    return None


def covers_cantor(cs: Iterable[Cylinder]) -> Verdict:
    witness = uncovered_witness(cs)
    if witness is None:
        return Verdict.yes()
    return Verdict.no(f"{witness} is not covered", witness)


class BinaryTree:
    """A decidable, prefix-closed set of bit strings probed up to a depth.

    ``membership`` is any predicate on :class:`BitString`.  Enumeration prunes
    at non-members, which is exact for prefix-closed predicates; use
    :meth:`check_prefix_closed` to validate a presentation.
    """

    def __init__(self, membership: Callable[[BitString], bool], max_probe_depth: int, name: str = "tree"):
        if max_probe_depth < 0:
            raise ValueError("probe depth must be non-negative")
        self.membership = membership
        self.max_probe_depth = max_probe_depth
        self.name = name

    def __contains__(self, s) -> bool:
        return bool(self.membership(s if isinstance(s, BitString) else BitString(s)))

    def __repr__(self) -> str:
        return f"BinaryTree({self.name}, depth={self.max_probe_depth})"

    def _guard(self, n: int) -> None:
        if n > self.max_probe_depth:
            raise DepthExceeded(n, self.max_probe_depth)

    def members(self, n: int) -> Iterator[BitString]:
        """Members of length ``n`` in lexicographic order."""
        self._guard(n)
        if EMPTY not in self:
            return
        stack = [EMPTY]
        while stack:
            node = stack.pop()
            if len(node) == n:
                yield node
                continue
            for b in (1, 0):
                c = node.child(b)
                if c in self:
                    stack.append(c)

    def check_prefix_closed(self, depth: Optional[int] = None) -> Verdict:
        """Exhaustive prefix-closure test over all strings up to ``depth``."""
        depth = self.max_probe_depth if depth is None else depth
        self._guard(depth)
        for n in range(1, depth + 1):
            for s in all_strings(n):
                if s in self and s[:-1] not in self:
                    return Verdict.no(f"{s} is a member but {s[:-1]} is not", (s, s[:-1]))
        return Verdict.yes()

    # --- stock presentations ---

    @classmethod
    def full(cls, depth: int) -> "BinaryTree":
        return cls(lambda s: True, depth, "full")

    @classmethod
    def empty(cls, depth: int) -> "BinaryTree":
        return cls(lambda s: False, depth, "empty")

    @classmethod
    def no_pattern(cls, pattern: str, depth: int) -> "BinaryTree":
        """Strings that do not contain ``pattern`` as a contiguous block."""
        pat = tuple(BitString.parse(pattern))
        m = len(pat)

        def member(s: BitString) -> bool:
            return not any(tuple(s[i:i + m]) == pat for i in range(len(s) - m + 1))

        return cls(member, depth, f"no-pattern {BitString(pat)}")

    @classmethod
    def only_ones(cls, depth: int) -> "BinaryTree":
        return cls(lambda s: all(s), depth, "only-ones")

    @classmethod
    def from_nodes(cls, nodes: Iterable, depth: Optional[int] = None) -> "BinaryTree":
        """An explicit finite tree; the node list must be prefix-closed."""
        keep = frozenset(n if isinstance(n, BitString) else BitString.parse(n) for n in nodes)
        for n in keep:
            if n and n[:-1] not in keep:
                raise ValueError(f"node list is not prefix-closed at {n}")
        if depth is None:
            depth = max((len(n) for n in keep), default=0) + 1
        return cls(keep.__contains__, depth, "nodes{" + ", ".join(str(n) for n in sorted(keep)) + "}")

    @classmethod
    def avoiding(cls, cylinders: Iterable[Cylinder], depth: int) -> "BinaryTree":
        """Strings extending none of the given prefixes."""
        cs = tuple(cylinders)
        return cls(lambda s: not any(c.contains(s) for c in cs), depth, "avoiding")

    @classmethod
    def path_tree(cls, prefix: BitString, depth: int) -> "BinaryTree":
        """Initial segments of one path known up to ``len(prefix)``."""
        return cls(lambda s: s.is_prefix_of(prefix), depth, f"path {prefix}")

    def intersect(self, other: "BinaryTree") -> "BinaryTree":
        return BinaryTree(lambda s: s in self and s in other,
                          min(self.max_probe_depth, other.max_probe_depth),
                          f"({self.name} & {other.name})")


def level_density(T: BinaryTree, n: int) -> Dyadic:
    """Fraction of length-``n`` strings that belong to ``T``."""
    return Dyadic(sum(1 for _ in T.members(n)), n)


def leftmost_deep(T: BinaryTree, n: int) -> Optional[BitString]:
    """Lexicographically least member of ``T`` of length ``n``, if any."""
    return next(T.members(n), None)
