"""Continuous type-2 functionals on Cantor space, presented by associates.

An associate answers, for every finite bit string, either a committed value
(an ``int``) or ``None`` ("not yet").  Commitments persist along extensions,
so a total associate determines a continuous functional: the value at a path
is the first commitment met along its prefixes.

Paths are presented finitely (eventually periodic words, packed lists,
Kleene terms, plain callables) so that every algorithm here can pick a
concrete representative through a node.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

from .cantor import EMPTY, BitString, all_strings
from .errors import DepthExceeded, Diverged, NoCommit, OutOfPrefix
from .verdict import Verdict


# ---------------------------------------------------------------- paths


def _bits(x) -> BitString:
    if isinstance(x, BitString):
        return x
    if isinstance(x, str):
        return BitString.parse(x)
    return BitString(x)


class Path(ABC):
    """A total binary sequence; ``path(i)`` is its i-th bit."""

    kind = "path"

    @abstractmethod
    def bit(self, i: int) -> int: ...

    def __call__(self, i: int) -> int:
        return self.bit(i)

    def prefix(self, n: int) -> BitString:
        return BitString._trusted(tuple(self.bit(i) for i in range(n)))

    def describe(self) -> str:
        return repr(self)


class Periodic(Path):
    """``prefix`` followed by ``period`` repeated forever."""

    kind = "periodic"

    def __init__(self, prefix, period):
        self.head = _bits(prefix)
        self.period = _bits(period)
        if not self.period:
            raise ValueError("period must be non-empty")

    def bit(self, i: int) -> int:
        h = len(self.head)
        if i < h:
            return self.head[i]
        return self.period[(i - h) % len(self.period)]

    def prefix(self, n: int) -> BitString:
        h = len(self.head)
        if n <= h:
            return self.head[:n]
        p = len(self.period)
        reps = (n - h) // p + 1
        return BitString._trusted((tuple(self.head) + tuple(self.period) * reps)[:n])

    def canonical(self) -> tuple[BitString, BitString]:
        """Shortest (prefix, period) presentation of the same sequence."""
        period = tuple(self.period)
        for size in range(1, len(period) + 1):
            if len(period) % size == 0 and period[:size] * (len(period) // size) == period:
                period = period[:size]
                break
        head = tuple(self.head)
        while head and head[-1] == period[-1]:
            head = head[:-1]
            period = period[-1:] + period[:-1]
        return BitString._trusted(head), BitString._trusted(period)

    def __eq__(self, other):
        if isinstance(other, Periodic):
            return self.canonical() == other.canonical()
        return NotImplemented

    def __hash__(self):
        return hash(self.canonical())

    def describe(self) -> str:
        head, period = self.canonical()
        return f"{''.join(map(str, head))}({''.join(map(str, period))})"

    def __repr__(self) -> str:
        return f"path {self.describe()}"


class EventuallyZero(Periodic):
    """The canonical representative ``prefix·0^ω`` of a cylinder."""

    kind = "eventually-zero"

    def __init__(self, prefix):
        super().__init__(prefix, (0,))


def zeros_after(prefix) -> EventuallyZero:
    return EventuallyZero(prefix)


def parse_path(text: str) -> Periodic:
    """Parse ``01(0)``-style notation: a head and a parenthesized period.

    A bare bit string means that string followed by zeros.
    """
    text = text.strip().replace(" ", "")
    if "(" not in text:
        return EventuallyZero(BitString.parse(text))
    if not text.endswith(")") or text.count("(") != 1:
        raise ValueError(f"malformed path {text!r}")
    head, period = text[:-1].split("(")
    period = BitString.parse(period)
    if period == (0,):
        return EventuallyZero(BitString.parse(head))
    return Periodic(BitString.parse(head), period)


class FunctionPath(Path):
    kind = "function"

    def __init__(self, fn: Callable[[int], int], label: str = "fn"):
        self.fn = fn
        self.label = label

    def bit(self, i: int) -> int:
        b = self.fn(i)
        if b not in (0, 1):
            raise ValueError(f"{self.label}({i}) = {b} is not a bit")
        return b

    def __repr__(self) -> str:
        return f"FunctionPath({self.label})"


class TermPath(Path):
    """The path ``i ↦ {e}(g..., i, b...)`` of a Kleene index."""

    kind = "term-defined"

    def __init__(self, index, env, fuel: "Fuel"):
        self.index = index
        self.env = env
        self.fuel = fuel

    def bit(self, i: int) -> int:
        from .kleene import evaluate

        v = evaluate(self.index, self.env.with_numbers((i,) + tuple(self.env.b_args)), self.fuel)
        if v not in (0, 1):
            raise ValueError(f"term path value {v} at {i} is not a bit")
        return v

    def describe(self) -> str:
        from .kleene import render

        return f"term {render(self.index)}"

    __repr__ = describe


# ---------------------------------------------------------------- fuel


@dataclass(frozen=True)
class Fuel:
    """Partiality control: the deepest prefix an evaluation may query and
    the interpreter's step budget."""

    max_depth: int = 32
    max_steps: int = 200_000

    def __post_init__(self):
        if self.max_depth <= 0 or self.max_steps <= 0:
            raise ValueError("fuel components must be positive")


DEFAULT_FUEL = Fuel()


# ---------------------------------------------------------------- associates


class Associate(ABC):
    """Neighbourhood-function code of a continuous functional on Cantor space."""

    description = "associate"

    @abstractmethod
    def query(self, s: BitString) -> Optional[int]:
        """Committed value at ``s`` or None."""

    def commit(self, f: Path, max_depth: int) -> tuple[int, int]:
        """(value, depth) for the first committing prefix of ``f``."""
        for m in range(max_depth + 1):
            v = self.query(f.prefix(m))
            if v is not None:
                return v, m
        raise NoCommit(max_depth, f)

    def __call__(self, f: Path, fuel: Optional[Fuel] = None) -> int:
        return apply(self, f, fuel or DEFAULT_FUEL)


def apply(G: Associate, f: Path, fuel: Fuel = DEFAULT_FUEL) -> int:
    """Value of the coded functional at ``f``; NoCommit if none within depth."""
    return G.commit(f, fuel.max_depth)[0]


def commit_depth(G: Associate, f: Path, fuel: Fuel = DEFAULT_FUEL) -> int:
    return G.commit(f, fuel.max_depth)[1]


class TableAssociate(Associate):
    """Finite committed-prefix table; a string inherits its longest listed prefix."""

    description = "table"

    def __init__(self, table: Mapping):
        self.table = {(k if isinstance(k, BitString) else BitString.parse(k)): int(v) for k, v in table.items()}
        for v in self.table.values():
            if v < 0:
                raise ValueError("associate values are natural numbers")
        self.depth = max((len(k) for k in self.table), default=0)

    def query(self, s: BitString) -> Optional[int]:
        for n in range(min(len(s), self.depth), -1, -1):
            v = self.table.get(s[:n])
            if v is not None:
                return v
        return None

    def commit(self, f: Path, max_depth: int) -> tuple[int, int]:
        bits = f.prefix(min(self.depth, max_depth))
        for n in range(len(bits) + 1):
            v = self.table.get(bits[:n])
            if v is not None:
                return v, n
        raise NoCommit(max_depth, f)

    def __repr__(self) -> str:
        return "TableAssociate({" + ", ".join(f"{k}: {v}" for k, v in sorted(self.table.items())) + "})"


def depth_table(d: int, values: Sequence[int]) -> TableAssociate:
    """Functional read off the first ``d`` bits: ``values`` is indexed by the
    length-``d`` strings in lexicographic order."""
    strings = list(all_strings(d))
    if len(values) != len(strings):
        raise ValueError(f"need {len(strings)} values for depth {d}")
    return TableAssociate(dict(zip(strings, values)))


class NeverAssociate(Associate):
    """Everywhere not-yet: the code of the nowhere-defined functional."""

    description = "table"

    def query(self, s: BitString) -> Optional[int]:
        return None

    def commit(self, f: Path, max_depth: int) -> tuple[int, int]:
        raise NoCommit(max_depth, f)


# ---------------------------------------------------------------- combinators


class Expr(ABC):
    """Functional combinator over the bits of the argument path."""

    prec = 100

    @abstractmethod
    def evaluate(self, read: Callable[[int], int]) -> int: ...

    @abstractmethod
    def render(self) -> str: ...

    @abstractmethod
    def bound(self) -> int:
        """Upper bound on the value."""

    @abstractmethod
    def reach(self) -> int:
        """One more than the largest bit index this expression can read."""

    def _wrap(self, child: "Expr", tight: bool = False) -> str:
        s = child.render()
        if child.prec < self.prec or (tight and child.prec == self.prec):
            return f"({s})"
        return s

    def __str__(self):
        return self.render()

    def __eq__(self, other):
        return type(self) is type(other) and self.__dict__ == other.__dict__

    def __hash__(self):
        return hash((type(self).__name__, tuple(sorted(self.__dict__.items(), key=lambda kv: kv[0]))))

    def __repr__(self):
        return f"Expr({self.render()!r})"


class Const(Expr):
    def __init__(self, value: int):
        if value < 0:
            raise ValueError("constants are natural numbers")
        self.value = value

    def evaluate(self, read):
        return self.value

    def render(self):
        return str(self.value)

    def bound(self):
        return self.value

    def reach(self):
        return 0


class Bit(Expr):
    def __init__(self, index: int):
        if index < 0:
            raise ValueError("bit index must be natural")
        self.index = index

    def evaluate(self, read):
        return read(self.index)

    def render(self):
        return f"bit({self.index})"

    def bound(self):
        return 1

    def reach(self):
        return self.index + 1


class _Binary(Expr):
    symbol = "?"

    def __init__(self, left: Expr, right: Expr):
        self.left = left
        self.right = right

    def evaluate(self, read):
        a = self.left.evaluate(read)
        return self.op(a, self.right.evaluate(read))

    def render(self):
        return f"{self._wrap(self.left)} {self.symbol} {self._wrap(self.right, tight=True)}"

    def reach(self):
        return max(self.left.reach(), self.right.reach())


class Add(_Binary):
    symbol, prec = "+", 20

    @staticmethod
    def op(a, b):
        return a + b

    def bound(self):
        return self.left.bound() + self.right.bound()


class Mul(_Binary):
    symbol, prec = "*", 30

    @staticmethod
    def op(a, b):
        return a * b

    def bound(self):
        return self.left.bound() * self.right.bound()


class Xor(_Binary):
    symbol, prec = "xor", 10

    @staticmethod
    def op(a, b):
        return a ^ b

    def bound(self):
        m = max(self.left.bound(), self.right.bound())
        return (1 << m.bit_length()) - 1


class _Call(Expr):
    name = "?"

    def __init__(self, left: Expr, right: Expr):
        self.left = left
        self.right = right

    def evaluate(self, read):
        a = self.left.evaluate(read)
        return self.op(a, self.right.evaluate(read))

    def render(self):
        return f"{self.name}({self.left.render()}, {self.right.render()})"

    def reach(self):
        return max(self.left.reach(), self.right.reach())


class Max(_Call):
    name = "max"
    op = staticmethod(max)

    def bound(self):
        return max(self.left.bound(), self.right.bound())


class Min(_Call):
    name = "min"
    op = staticmethod(min)

    def bound(self):
        return min(self.left.bound(), self.right.bound())


class IfPrefix(Expr):
    """``if σ then A else B``: A when the argument extends σ."""

    prec = 0

    def __init__(self, prefix: BitString, then: Expr, orelse: Expr):
        self.prefix = BitString(prefix)
        self.then = then
        self.orelse = orelse

    def evaluate(self, read):
        for i, b in enumerate(self.prefix):
            if read(i) != b:
                return self.orelse.evaluate(read)
        return self.then.evaluate(read)

    def render(self):
        p = "".join(map(str, self.prefix)) or "ε"
        return f"if {p} then {self._wrap(self.then, tight=True)} else {self.orelse.render()}"

    def bound(self):
        return max(self.then.bound(), self.orelse.bound())

    def reach(self):
        return max(len(self.prefix), self.then.reach(), self.orelse.reach())


class CombinatorAssociate(Associate):
    """Associate of a combinator expression, committing once every bit the
    (left-to-right, short-circuiting) evaluation reads is available."""

    description = "combinator"

    def __init__(self, expr: Expr):
        self.expr = expr

    def query(self, s: BitString) -> Optional[int]:
        def read(i: int) -> int:
            if i >= len(s):
                raise OutOfPrefix(i)
            return s[i]

        try:
            return self.expr.evaluate(read)
        except OutOfPrefix:
            return None

    def commit(self, f: Path, max_depth: int) -> tuple[int, int]:
        deepest = [0]

        def read(i: int) -> int:
            if i >= max_depth:
                raise OutOfPrefix(i)
            deepest[0] = max(deepest[0], i + 1)
            return f.bit(i)

        try:
            value = self.expr.evaluate(read)
        except OutOfPrefix:
            raise NoCommit(max_depth, f) from None
        return value, deepest[0]

    def __repr__(self) -> str:
        return f"CombinatorAssociate({self.expr.render()!r})"


# ---------------------------------------------------------------- instrumented terms


class _PrefixOracle:
    """Type-1 argument answering bits of a finite prefix."""

    __slots__ = ("bits", "limit", "deepest")

    def __init__(self, bits, limit: int):
        self.bits = bits
        self.limit = limit
        self.deepest = 0

    def __call__(self, i: int) -> int:
        if i >= self.limit:
            raise OutOfPrefix(i)
        if i + 1 > self.deepest:
            self.deepest = i + 1
        return self.bits(i)


class TermAssociate(Associate):
    """Associate of ``g ↦ {e}(g, env.g_args..., env.b_args...)``.

    Each query re-runs the interpreter with the argument instrumented to
    answer the bits of the prefix and to raise OutOfPrefix beyond it.
    """

    description = "instrumented-term"

    def __init__(self, index, env, fuel: Fuel):
        self.index = index
        self.env = env
        self.fuel = fuel
        self._memo: dict[BitString, Optional[int]] = {}

    def _run(self, oracle: _PrefixOracle) -> int:
        from .kleene import evaluate

        return evaluate(self.index, self.env.with_functions((oracle,) + tuple(self.env.g_args)), self.fuel)

    def query(self, s: BitString) -> Optional[int]:
        if s in self._memo:
            return self._memo[s]
        try:
            v = self._run(_PrefixOracle(s.__getitem__, len(s)))
        except (OutOfPrefix, Diverged):
            v = None
        self._memo[s] = v
        return v

    def commit(self, f: Path, max_depth: int) -> tuple[int, int]:
        oracle = _PrefixOracle(f.bit, max_depth)
        try:
            v = self._run(oracle)
        except (OutOfPrefix, Diverged):
            raise NoCommit(max_depth, f) from None
        return v, oracle.deepest

    def __repr__(self) -> str:
        from .kleene import render

        return f"TermAssociate({render(self.index)})"


def associate_from_term(e, env, fuel: Fuel = DEFAULT_FUEL) -> TermAssociate:
    """The associate of the functional an index computes in its first
    type-1 argument slot, the remaining arguments taken from ``env``."""
    return TermAssociate(e, env, fuel)


# ---------------------------------------------------------------- validation


def check_monotone(G: Associate, depth: int) -> Verdict:
    """Exhaustive commit-monotonicity check over all strings up to ``depth``.

    Returns the first violating (committed string, extension) pair in
    lexicographic order.
    """
    stack = [EMPTY]
    while stack:
        s = stack.pop()
        if len(s) >= depth:
            continue
        v = G.query(s)
        for b in (0, 1):
            t = s.child(b)
            if v is not None:
                w = G.query(t)
                if w != v:
                    return Verdict.no(f"{s} commits {v} but {t} gives {w}", (s, t))
        stack.append(s.child(1))
        stack.append(s.child(0))
    return Verdict.yes()


def commit_bar(G: Associate, max_depth: int) -> list[tuple[BitString, int]]:
    """Minimal committing strings (a bar of the tree), lexicographic order.

    DepthExceeded if some branch does not commit by ``max_depth``.
    """
    out: list[tuple[BitString, int]] = []
    stack = [EMPTY]
    while stack:
        s = stack.pop()
        v = G.query(s)
        if v is not None:
            out.append((s, v))
            continue
        if len(s) >= max_depth:
            raise DepthExceeded(len(s) + 1, max_depth, f"commit depth along {s}")
        stack.append(s.child(1))
        stack.append(s.child(0))
    return out


def to_table(G: Associate, max_depth: int) -> TableAssociate:
    """Finite table equivalent of a total associate."""
    return TableAssociate(dict(commit_bar(G, max_depth)))
