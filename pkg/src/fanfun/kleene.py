"""Fuel-bounded interpreter for the mixed-type Kleene schemes S1-S9.

Arguments are kept native: type-1 arguments are callables ``int -> int``,
numeric arguments are ints, and the fan functionals enter as oracles on
associates (S8.2 for Θ, S8.3 for Λ) next to Feferman's μ (S8.1).

Index codes::

    <1>  <2,a>  <3>  <4,e1,e2>  <5,e1,e2>  <6,e1,τ1,τ2>  <7>
    <8,1,e1>  <8,2,e1>  <8,3,e1>  <9,i,j>

The numeric code of an index is ``coding.seq`` applied to its tuple, child
indices replaced by their codes and permutations by ``seq`` of the 1-based
image list.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

from .coding import seq, unseq
from .errors import Diverged, EvalError, FanError, FuelExhausted, NoCommit, NoHeader
from .functionals import DEFAULT_FUEL, Associate, Fuel, Path, TermAssociate
from .verdict import Verdict

MAX_NESTING = 400

TAGS = ("S1", "S2", "S3", "S4", "S5", "S6", "S7", "S8.1", "S8.2", "S8.3", "S9")


@dataclass(frozen=True)
class Index:
    """A Kleene index as a tagged tree.

    ``args`` per tag: S2 ``(a,)``; S4/S5 ``(e1, e2)``; S6 ``(e1, τ1, τ2)``
    with τ's as 1-based tuples; S8.x ``(e1,)``; S9 ``(i, j)``; else ``()``.
    """

    tag: str
    args: tuple = ()

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown scheme {self.tag!r}")

    def __str__(self) -> str:
        return render(self)


def S1() -> Index:
    return Index("S1")


def S2(a: int) -> Index:
    return Index("S2", (a,))


def S3() -> Index:
    return Index("S3")


def S4(e1: Index, e2: Index) -> Index:
    return Index("S4", (e1, e2))


def S5(e1: Index, e2: Index) -> Index:
    return Index("S5", (e1, e2))


def S6(e1: Index, tau1: Sequence[int], tau2: Sequence[int]) -> Index:
    return Index("S6", (e1, tuple(tau1), tuple(tau2)))


def S7() -> Index:
    return Index("S7")


def S8(kind: int, e1: Index) -> Index:
    return Index(f"S8.{kind}", (e1,))


def S9(i: int, j: int) -> Index:
    return Index("S9", (i, j))


# ---------------------------------------------------------------- codec


def to_tuple(e: Index):
    """Nested tuple literal of an index, as written in the scheme table."""
    t, a = e.tag, e.args
    if t in ("S1", "S3", "S7"):
        return (int(t[1]),)
    if t == "S2":
        return (2, a[0])
    if t in ("S4", "S5"):
        return (int(t[1]), to_tuple(a[0]), to_tuple(a[1]))
    if t == "S6":
        return (6, to_tuple(a[0]), tuple(a[1]), tuple(a[2]))
    if t.startswith("S8"):
        return (8, int(t[3]), to_tuple(a[0]))
    return (9, a[0], a[1])


def from_tuple(t) -> Index:
    if not isinstance(t, tuple) or not t:
        raise EvalError("BadIndex", detail=f"{t!r} is not an index literal")
    head = t[0]
    try:
        if head in (1, 3, 7) and len(t) == 1:
            return Index(f"S{head}")
        if head == 2 and len(t) == 2 and _nat(t[1]):
            return S2(t[1])
        if head in (4, 5) and len(t) == 3:
            return Index(f"S{head}", (from_tuple(t[1]), from_tuple(t[2])))
        if head == 6 and len(t) == 4:
            return S6(from_tuple(t[1]), _perm_tuple(t[2]), _perm_tuple(t[3]))
        if head == 8 and len(t) == 3 and t[1] in (1, 2, 3):
            return S8(t[1], from_tuple(t[2]))
        if head == 9 and len(t) == 3 and _nat(t[1]) and _nat(t[2]):
            return S9(t[1], t[2])
    except TypeError:
        pass
    raise EvalError("BadIndex", detail=f"{t!r} is not an index literal")


def _nat(x) -> bool:
    return isinstance(x, int) and x >= 0


def _perm_tuple(x) -> tuple:
    if not isinstance(x, tuple) or not all(_nat(v) for v in x):
        raise TypeError
    return x


def encode(e: Index) -> int:
    t, a = e.tag, e.args
    if t in ("S1", "S3", "S7"):
        return seq([int(t[1])])
    if t == "S2":
        return seq([2, a[0]])
    if t in ("S4", "S5"):
        return seq([int(t[1]), encode(a[0]), encode(a[1])])
    if t == "S6":
        return seq([6, encode(a[0]), seq(a[1]), seq(a[2])])
    if t.startswith("S8"):
        return seq([8, int(t[3]), encode(a[0])])
    return seq([9, a[0], a[1]])


def decode(code: int) -> Index:
    parts = unseq(code)
    if not parts:
        raise EvalError("BadIndex", detail=f"{code} codes the empty sequence")
    head = parts[0]
    if head in (1, 3, 7) and len(parts) == 1:
        return Index(f"S{head}")
    if head == 2 and len(parts) == 2:
        return S2(parts[1])
    if head in (4, 5) and len(parts) == 3:
        return Index(f"S{head}", (decode(parts[1]), decode(parts[2])))
    if head == 6 and len(parts) == 4:
        return S6(decode(parts[1]), unseq(parts[2]), unseq(parts[3]))
    if head == 8 and len(parts) == 3 and parts[1] in (1, 2, 3):
        return S8(parts[1], decode(parts[2]))
    if head == 9 and len(parts) == 3:
        return S9(parts[1], parts[2])
    raise EvalError("BadIndex", detail=f"{code} decodes to {parts}, not an index")


def render(e: Index) -> str:
    def walk(e: Index) -> str:
        t, a = e.tag, e.args
        if t in ("S1", "S3", "S7"):
            return f"<{t[1]}>"
        if t == "S2":
            return f"<2, {a[0]}>"
        if t in ("S4", "S5"):
            return f"<{t[1]}, {walk(a[0])}, {walk(a[1])}>"
        if t == "S6":
            return f"<6, {walk(a[0])}, [{', '.join(map(str, a[1]))}], [{', '.join(map(str, a[2]))}]>"
        if t.startswith("S8"):
            return f"<8, {t[3]}, {walk(a[0])}>"
        return f"<9, {a[0]}, {a[1]}>"

    return walk(e)


_TOKEN = re.compile(r"\s*(?:(\d+)|(.))")


def parse_index(text: str) -> Index:
    """Parse the ``<4, <2, 0>, <1>>`` literal syntax (τ's as ``[..]`` lists)."""
    toks = []
    for m in _TOKEN.finditer(text):
        if m.group(1) is not None:
            toks.append(int(m.group(1)))
        elif m.group(2).strip():
            toks.append(m.group(2))
    pos = 0

    def expect(tok):
        nonlocal pos
        if pos >= len(toks) or toks[pos] != tok:
            got = toks[pos] if pos < len(toks) else "end of input"
            raise ValueError(f"expected {tok!r}, found {got!r}")
        pos += 1

    def item():
        nonlocal pos
        if pos >= len(toks):
            raise ValueError("unexpected end of index literal")
        t = toks[pos]
        if isinstance(t, int):
            pos += 1
            return t
        if t == "<":
            pos += 1
            parts = [item()]
            while pos < len(toks) and toks[pos] == ",":
                pos += 1
                parts.append(item())
            expect(">")
            return tuple(parts)
        if t == "[":
            pos += 1
            parts = []
            if toks[pos] != "]":
                parts.append(item())
                while toks[pos] == ",":
                    pos += 1
                    parts.append(item())
            expect("]")
            return tuple(parts)
        raise ValueError(f"unexpected {t!r} in index literal")

    lit = item()
    if pos != len(toks):
        raise ValueError(f"trailing input after index literal: {toks[pos]!r}")
    return from_tuple(lit)


# ---------------------------------------------------------------- environment


@dataclass(frozen=True)
class Env:
    """Oracles and arguments for one evaluation.

    ``theta`` maps an associate to a special cover, ``lam`` maps an associate
    and a precision to a weak cover; at most one of them is supplied.
    """

    theta: Optional[Callable] = None
    lam: Optional[Callable] = None
    mu: bool = True
    g_args: tuple = ()
    b_args: tuple = ()

    def __post_init__(self):
        if self.theta is not None and self.lam is not None:
            raise ValueError("an evaluation uses either the Θ or the Λ schemes, not both")
        object.__setattr__(self, "g_args", tuple(self.g_args))
        object.__setattr__(self, "b_args", tuple(int(b) for b in self.b_args))
        for b in self.b_args:
            if b < 0:
                raise ValueError("numeric arguments are natural numbers")

    def with_numbers(self, b_args) -> "Env":
        return replace(self, b_args=tuple(b_args))

    def with_functions(self, g_args) -> "Env":
        return replace(self, g_args=tuple(g_args))


def theta_env(fuel: Fuel = DEFAULT_FUEL, **kw) -> Env:
    """Env whose Θ oracle is the bar-search special fan functional."""
    from .fan import theta_cont

    return Env(theta=lambda G: theta_cont(G, fuel), **kw)


def lambda_env(fuel: Fuel = DEFAULT_FUEL, **kw) -> Env:
    from .weakfan import lambda_cont

    return Env(lam=lambda G, k: lambda_cont(G, k, fuel), **kw)


# ---------------------------------------------------------------- packed lists


class PackedPath(Path):
    """One binary sequence coding a non-empty list of them.

    The first 1 sits at index k-1 for a list of length k; after it the
    bits interleave the list: bit k + m·k + (i-1) is bit m of the i-th path.
    """

    kind = "packed"

    def __init__(self, paths: Sequence):
        if not paths:
            raise ValueError("cannot pack an empty list")
        self.paths = tuple(paths)

    def bit(self, j: int) -> int:
        k = len(self.paths)
        if j < k - 1:
            return 0
        if j == k - 1:
            return 1
        m, r = divmod(j - k, k)
        return self.paths[r](m)

    def describe(self) -> str:
        return "pack[" + ", ".join(p.describe() for p in self.paths) + "]"

    __repr__ = describe


class SlicePath(Path):
    kind = "slice"

    def __init__(self, source, k: int, i: int):
        self.source, self.k, self.i = source, k, i

    def bit(self, m: int) -> int:
        return self.source(self.k + m * self.k + self.i - 1)

    def __repr__(self):
        return f"SlicePath({self.source!r}, k={self.k}, i={self.i})"


def pack_list(paths: Sequence) -> PackedPath:
    return PackedPath(paths)


def unpack(f, fuel: Fuel = DEFAULT_FUEL) -> list[SlicePath]:
    for j in range(fuel.max_depth):
        if f(j) == 1:
            k = j + 1
            return [SlicePath(f, k, i) for i in range(1, k + 1)]
    raise NoHeader(fuel.max_depth)


# ---------------------------------------------------------------- evaluation


def mu_search(f: Callable[[int], int], fuel: Fuel = DEFAULT_FUEL) -> int:
    """Least ``n <= fuel.max_steps`` with ``f(n) == 0``; Diverged beyond."""
    for n in range(fuel.max_steps + 1):
        if f(n) == 0:
            return n
    raise Diverged("mu-search")


def _is_perm(tau, n: int) -> bool:
    return sorted(tau) == list(range(1, n + 1))


class _OutOfSteps(Exception):
    """Raised through an oracle's search when its queries exhaust the
    evaluating machine's step budget."""


class _Charged(Associate):
    """Associate whose every query costs the evaluating machine one step,
    so oracle searches share the budget of the evaluation that calls them."""

    def __init__(self, inner: TermAssociate, machine: "_Machine"):
        self.inner = inner
        self.machine = machine
        self.description = inner.description

    def _charge(self) -> None:
        self.machine.steps -= 1
        if self.machine.steps < 0:
            raise _OutOfSteps()

    def query(self, s):
        self._charge()
        return self.inner.query(s)

    def commit(self, f: Path, max_depth: int) -> tuple[int, int]:
        self._charge()
        return self.inner.commit(f, max_depth)

    def __repr__(self) -> str:
        return repr(self.inner)


class _Machine:
    def __init__(self, env: Env, fuel: Fuel):
        self.env = env
        self.fuel = fuel
        self.steps = fuel.max_steps
        self.nesting = 0
        self.covers: dict = {}

    def tick(self) -> None:
        self.steps -= 1
        if self.steps < 0:
            raise Diverged("steps")

    def run(self, e: Index, gs: tuple, bs: tuple) -> int:
        self.tick()
        self.nesting += 1
        if self.nesting > MAX_NESTING:
            raise Diverged("nesting")
        try:
            return getattr(self, "_" + e.tag.replace(".", "_"))(e, gs, bs)
        finally:
            self.nesting -= 1

    @staticmethod
    def _need(e: Index, gs, bs, k: int = 0, m: int = 0) -> None:
        if len(gs) < k or len(bs) < m:
            raise EvalError("BadArity", render(e),
                            f"needs {k} function and {m} numeric arguments, got {len(gs)} and {len(bs)}")

    def _S1(self, e, gs, bs):
        self._need(e, gs, bs, m=1)
        return bs[0] + 1

    def _S2(self, e, gs, bs):
        return e.args[0]

    def _S3(self, e, gs, bs):
        self._need(e, gs, bs, m=1)
        return bs[0]

    def _S4(self, e, gs, bs):
        e1, e2 = e.args
        b = self.run(e1, gs, bs)
        return self.run(e2, gs, (b,) + bs)

    def _S5(self, e, gs, bs):
        self._need(e, gs, bs, m=1)
        e1, e2 = e.args
        x, rest = bs[0], bs[1:]
        v = self.run(e1, gs, rest)
        for a in range(x):
            self.tick()
            v = self.run(e2, gs, (a, v) + rest)
        return v

    def _S6(self, e, gs, bs):
        e1, t1, t2 = e.args
        if len(t1) != len(gs) or len(t2) != len(bs):
            raise EvalError("BadArity", render(e), f"permutations of sizes {len(t1)}, {len(t2)} "
                                                   f"for {len(gs)} function and {len(bs)} numeric arguments")
        if not (_is_perm(t1, len(gs)) and _is_perm(t2, len(bs))):
            raise EvalError("BadIndex", render(e), "τ is not a permutation")
        return self.run(e1, tuple(gs[t - 1] for t in t1), tuple(bs[t - 1] for t in t2))

    def _S7(self, e, gs, bs):
        self._need(e, gs, bs, k=1, m=1)
        v = gs[0](bs[0])
        if not isinstance(v, int) or v < 0:
            raise EvalError("BadArgument", render(e), f"type-1 argument returned {v!r}")
        return v

    def _S8_1(self, e, gs, bs):
        if not self.env.mu:
            raise EvalError("OracleMissing", render(e), "μ is disabled")
        (e1,) = e.args

        def probe(a: int) -> int:
            return 0 if self.run(e1, gs, (a,) + bs) > 0 else 1

        return mu_search(probe, self.fuel)

    def _functional(self, e1: Index, gs, rest) -> Associate:
        inner = replace(self.env, g_args=gs, b_args=rest)
        return _Charged(TermAssociate(e1, inner, self.fuel), self)

    def _oracle_cover(self, e, key, call):
        if key not in self.covers:
            try:
                self.covers[key] = pack_list(call().paths())
            except _OutOfSteps:
                raise Diverged("steps") from None
            except (NoCommit, FuelExhausted) as exc:
                raise EvalError("NoCommit-in-S8", render(e), str(exc)) from None
        return self.covers[key]

    def _S8_2(self, e, gs, bs):
        if self.env.theta is None:
            raise EvalError("OracleMissing", render(e), "no Θ oracle")
        self._need(e, gs, bs, m=1)
        (e1,) = e.args
        a, rest = bs[0], bs[1:]
        packed = self._oracle_cover(e, ("Θ", e1, gs, rest),
                                    lambda: self.env.theta(self._functional(e1, gs, rest)))
        return packed(a)

    def _S8_3(self, e, gs, bs):
        if self.env.lam is None:
            raise EvalError("OracleMissing", render(e), "no Λ oracle")
        self._need(e, gs, bs, m=2)
        (e1,) = e.args
        i, a, rest = bs[0], bs[1], bs[2:]
        packed = self._oracle_cover(e, ("Λ", e1, gs, rest, i),
                                    lambda: self.env.lam(self._functional(e1, gs, rest), i))
        return packed(a)

    def _S9(self, e, gs, bs):
        i, j = e.args
        if not bs:
            raise EvalError("BadArity", render(e), "S9 needs the index argument")
        d, rest = bs[0], bs[1:]
        if i > len(gs) or j > len(rest):
            raise EvalError("BadArity", render(e), f"i={i}, j={j} against {len(gs)} and {len(rest)} arguments")
        return self.run(decode(d), gs[:i], rest[:j])


def evaluate(e: Index, env: Env, fuel: Fuel = DEFAULT_FUEL) -> int:
    """Value of ``{e}(oracles, env.g_args, env.b_args)``.

    Raises Diverged when the step budget runs out and EvalError on faults.
    """
    return _Machine(env, fuel).run(e, env.g_args, env.b_args)


@dataclass(frozen=True)
class EvalOutcome:
    kind: str  # "value" | "diverged" | "error"
    value: Optional[int] = None
    detail: str = ""
    location: str = ""

    def __str__(self):
        if self.kind == "value":
            return f"Value({self.value})"
        return f"{self.kind.capitalize()}({self.detail})"


def outcome(e: Index, env: Env, fuel: Fuel = DEFAULT_FUEL) -> EvalOutcome:
    """Total wrapper around :func:`evaluate` for reports and comparisons."""
    try:
        return EvalOutcome("value", evaluate(e, env, fuel))
    except Diverged as exc:
        return EvalOutcome("diverged", detail=exc.reason)
    except EvalError as exc:
        return EvalOutcome("error", detail=exc.kind, location=exc.location)
    except FanError as exc:
        return EvalOutcome("error", detail=type(exc).__name__)


# ---------------------------------------------------------------- static checks


def check_index(e: Index, arity: tuple[int, int]) -> Verdict:
    """Shape and arity validation without evaluation.

    ``arity`` is (number of type-1 arguments, number of numeric arguments).
    """
    k, m = arity
    t, a = e.tag, e.args
    where = render(e)

    def bad(msg: str) -> Verdict:
        return Verdict.no(f"{msg} in {where}", e)

    if t in ("S1", "S3") and m < 1:
        return bad("needs a numeric argument")
    if t == "S2" and not _nat(a[0]):
        return bad("constant must be natural")
    if t == "S7" and (k < 1 or m < 1):
        return bad("needs a function and a numeric argument")
    if t == "S4":
        return check_index(a[0], (k, m)) and check_index(a[1], (k, m + 1))
    if t == "S5":
        if m < 1:
            return bad("needs the recursion argument")
        return check_index(a[0], (k, m - 1)) and check_index(a[1], (k, m + 1))
    if t == "S6":
        e1, t1, t2 = a
        if len(t1) != k or not _is_perm(t1, k):
            return bad(f"τ1 = {list(t1)} is not a permutation of 1..{k}")
        if len(t2) != m or not _is_perm(t2, m):
            return bad(f"τ2 = {list(t2)} is not a permutation of 1..{m}")
        return check_index(e1, (k, m))
    if t == "S8.1":
        return check_index(a[0], (k, m + 1))
    if t == "S8.2":
        if m < 1:
            return bad("needs the position argument")
        return check_index(a[0], (k + 1, m - 1))
    if t == "S8.3":
        if m < 2:
            return bad("needs precision and position arguments")
        return check_index(a[0], (k + 1, m - 2))
    if t == "S9":
        i, j = a
        if m < 1:
            return bad("needs the index argument")
        if i > k:
            return bad(f"i ≤ k fails ({i} > {k})")
        if j > m - 1:
            return bad(f"j ≤ m fails ({j} > {m - 1})")
    return Verdict.yes()


# ---------------------------------------------------------------- a small library

#: x + y on (x, y)
ADD = S5(S3(), S6(S1(), (), (2, 1, 3)))
#: x ∸ 1
PRED = S5(S2(0), S3())
#: g(0) + 1 on (g)
G0_PLUS_1 = S4(S4(S2(0), S7()), S1())


def const_bit_reader(c: int) -> Index:
    """{e}(g) = g(c)."""
    return S4(S2(c), S7())
