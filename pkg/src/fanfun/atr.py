"""Arithmetical transfinite recursion at desk scale.

An instance is an order presentation (A, <_A), a bounded operator Γ with
Γ̂(X, Z) = {n < n_bound | Γ(n, X, Z)}, and a finite parameter set Z.
``iterate_H`` runs the recursion directly; ``atr_realiser`` instead asks
the special fan functional for a cover of the separation functional
``sep_G`` and extracts either a set Y with H(Y, Z) or a <_A-descending
sequence from it.

A path g decodes to Y[g] = {(b, k) | g(pos(b, k)) = 0}.  Three position
layouts are offered: ``cantor`` (pos = Cantor pair of b and k),
``ranked`` (pos = rank_A(b)·n_bound + k, for finite orders) and
``numeric`` (pos = b·n_bound + k).  ``ranked`` is the default for finite
orders and ``numeric`` for lazy ones; the Cantor layout leaves positions
unused inside the decoded region, and every unused position below the
commit depth doubles the special cover.
"""

from __future__ import annotations

import functools
import random
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .cantor import BitString
from .coding import pair
from .errors import CoverContradiction, DepthExceeded, FuelExhausted, NoCommit, NotWellOrderedDetected
from .fan import SpecialCover, theta_cont
from .functionals import DEFAULT_FUEL, Associate, Fuel, Path, zeros_after
from .verdict import Verdict


# ---------------------------------------------------------------- orders


class Order(ABC):
    lazy = False

    @abstractmethod
    def less(self, a: int, b: int) -> bool: ...

    @abstractmethod
    def contains(self, a: int) -> bool: ...

    @abstractmethod
    def window(self) -> tuple[int, ...]:
        """The explored elements in increasing <_A order."""

    def leq(self, a: int, b: int) -> bool:
        return a == b or self.less(a, b)

    def check(self) -> Verdict:
        """Exhaustive total-order test on the window."""
        w = self.window()
        for a in w:
            if self.less(a, a):
                return Verdict.no(f"{a} <_A {a}", (a, a))
        for i, a in enumerate(w):
            for b in w[i + 1:]:
                if self.less(a, b) == self.less(b, a):
                    return Verdict.no(f"{a} and {b} are not comparable exactly one way", (a, b))
                for c in w:
                    if self.less(a, c) and self.less(c, b) and not self.less(a, b):
                        return Verdict.no(f"transitivity fails on {a}, {c}, {b}", (a, c, b))
        return Verdict.yes()


def _sorted(elements: Iterable[int], less: Callable[[int, int], bool]) -> tuple[int, ...]:
    key = functools.cmp_to_key(lambda a, b: -1 if less(a, b) else (1 if less(b, a) else 0))
    return tuple(sorted(elements, key=key))


class FiniteOrder(Order):
    """A finite total order.  Without ``less`` the element list is taken to
    be in increasing order (``FiniteOrder([2, 0, 1])`` means 2 < 0 < 1)."""

    def __init__(self, elements: Sequence[int], less: Optional[Callable[[int, int], bool]] = None):
        elements = tuple(int(a) for a in elements)
        if len(set(elements)) != len(elements) or any(a < 0 for a in elements):
            raise ValueError("order elements must be distinct naturals")
        if less is None:
            self.ranked = elements
        else:
            self.ranked = _sorted(elements, less)
        self.rank = {a: i for i, a in enumerate(self.ranked)}
        self._less = less
        if less is not None:
            verdict = self.check()
            if not verdict:
                raise NotWellOrderedDetected(f"not a total order: {verdict.reason}")

    def less(self, a, b):
        if self._less is not None:
            return self._less(a, b)
        return self.rank[a] < self.rank[b]

    def contains(self, a):
        return a in self.rank

    def window(self):
        return self.ranked

    def describe(self) -> str:
        return "order [" + ", ".join(map(str, self.ranked)) + "]"

    __repr__ = describe


class LazyOrder(Order):
    """An order on a decidable set of naturals, explored below ``probe_bound``.

    An explored element is *anchored* when no element of the horizon
    [probe_bound, 2·probe_bound) precedes it; the window counts as
    well-founded only when every element is anchored.
    """

    lazy = True

    def __init__(self, domain: Callable[[int], bool], less: Callable[[int, int], bool],
                 probe_bound: int, name: str = "lazy"):
        if probe_bound <= 0:
            raise ValueError("probe bound must be positive")
        self.domain = domain
        self._less = less
        self.probe_bound = probe_bound
        self.name = name
        self._window = _sorted((n for n in range(probe_bound) if domain(n)), less)
        self._anchored = {a: self._find_anchor(a) for a in self._window}

    def _find_anchor(self, a: int) -> bool:
        return not any(self.domain(b) and self._less(b, a)
                       for b in range(self.probe_bound, 2 * self.probe_bound))

    @classmethod
    def natural(cls, probe_bound: int) -> "LazyOrder":
        return cls(lambda n: True, lambda a, b: a < b, probe_bound, f"lazy natural {probe_bound}")

    @classmethod
    def reverse(cls, probe_bound: int) -> "LazyOrder":
        """ℕ ordered backwards: ill-founded, every element has predecessors."""
        return cls(lambda n: True, lambda a, b: a > b, probe_bound, f"lazy reverse {probe_bound}")

    def less(self, a, b):
        return self._less(a, b)

    def contains(self, a):
        return a >= 0 and bool(self.domain(a))

    def window(self):
        return self._window

    def anchored(self, a: int) -> bool:
        if a in self._anchored:
            return self._anchored[a]
        return self._find_anchor(a)

    def describe(self) -> str:
        return self.name

    __repr__ = describe


# ---------------------------------------------------------------- Γ formulas


class Formula(ABC):
    """Bounded formula Γ(n, X, Z); X is a membership test on pairs and the
    quantifier "exists b in A" ranges over the explored window."""

    prec = 100

    @abstractmethod
    def holds(self, n: int, X: Callable[[int, int], bool], Z: frozenset, A: tuple) -> bool: ...

    @abstractmethod
    def render(self) -> str: ...

    def _wrap(self, child: "Formula", tight: bool = False) -> str:
        if child.prec < self.prec or (tight and child.prec == self.prec):
            return f"({child.render()})"
        return child.render()

    def __eq__(self, other):
        return type(self) is type(other) and self.__dict__ == other.__dict__

    def __hash__(self):
        return hash((type(self).__name__, self.render()))

    def __repr__(self):
        return f"Formula({self.render()!r})"


class Truth(Formula):
    def __init__(self, value: bool):
        self.value = bool(value)

    def holds(self, n, X, Z, A):
        return self.value

    def render(self):
        return "true" if self.value else "false"


class NumIs(Formula):
    def __init__(self, c: int):
        self.c = c

    def holds(self, n, X, Z, A):
        return n == self.c

    def render(self):
        return f"n = {self.c}"


class InZ(Formula):
    def __init__(self, offset: int = 0):
        self.offset = offset

    def holds(self, n, X, Z, A):
        return n - self.offset >= 0 and (n - self.offset) in Z

    def render(self):
        return f"{_nterm(self.offset)} in Z"


def _nterm(offset: int) -> str:
    return "n" if offset == 0 else f"n - {offset}"


class SomeInX(Formula):
    """exists b in A: (b, n - offset) in X."""

    def __init__(self, offset: int = 0):
        self.offset = offset

    def holds(self, n, X, Z, A):
        m = n - self.offset
        return m >= 0 and any(X(b, m) for b in A)

    def render(self):
        return f"exists b in A: (b, {_nterm(self.offset)}) in X"


class AllInX(Formula):
    """forall b in A: (b, n - offset) in X."""

    def __init__(self, offset: int = 0):
        self.offset = offset

    def holds(self, n, X, Z, A):
        m = n - self.offset
        return m >= 0 and all(X(b, m) for b in A)

    def render(self):
        return f"forall b in A: (b, {_nterm(self.offset)}) in X"


class PairInX(Formula):
    """(b, n - offset) in X for a fixed element b."""

    def __init__(self, b: int, offset: int = 0):
        self.b = b
        self.offset = offset

    def holds(self, n, X, Z, A):
        m = n - self.offset
        return m >= 0 and X(self.b, m)

    def render(self):
        return f"({self.b}, {_nterm(self.offset)}) in X"


class Not(Formula):
    prec = 30

    def __init__(self, body: Formula):
        self.body = body

    def holds(self, n, X, Z, A):
        return not self.body.holds(n, X, Z, A)

    def render(self):
        return f"not {self._wrap(self.body)}"


class And(Formula):
    prec = 20

    def __init__(self, left: Formula, right: Formula):
        self.left, self.right = left, right

    def holds(self, n, X, Z, A):
        return self.left.holds(n, X, Z, A) and self.right.holds(n, X, Z, A)

    def render(self):
        return f"{self._wrap(self.left)} and {self._wrap(self.right, tight=True)}"


class Or(Formula):
    prec = 10

    def __init__(self, left: Formula, right: Formula):
        self.left, self.right = left, right

    def holds(self, n, X, Z, A):
        return self.left.holds(n, X, Z, A) or self.right.holds(n, X, Z, A)

    def render(self):
        return f"{self._wrap(self.left)} or {self._wrap(self.right, tight=True)}"


@dataclass(frozen=True)
class GammaSpec:
    formula: Formula
    n_bound: int

    def hat(self, X: Callable[[int, int], bool], Z: frozenset, A: tuple) -> frozenset:
        return frozenset(n for n in range(self.n_bound) if self.formula.holds(n, X, Z, A))

    def render(self) -> str:
        return f"formula {self.formula.render()} bound {self.n_bound}"


def random_formula(rng: random.Random, depth: int = 2, elements: Sequence[int] = (0,), n_bound: int = 4) -> Formula:
    """Random bounded Γ over the atoms above (used by the test generators)."""
    if depth <= 0 or rng.random() < 0.3:
        kind = rng.randrange(6)
        if kind == 0:
            return Truth(rng.random() < 0.5)
        if kind == 1:
            return NumIs(rng.randrange(n_bound))
        if kind == 2:
            return InZ(rng.randrange(2))
        if kind == 3:
            return SomeInX(rng.randrange(2))
        if kind == 4:
            return AllInX(rng.randrange(2))
        return PairInX(rng.choice(list(elements)), rng.randrange(2))
    op = rng.randrange(3)
    if op == 0:
        return Not(random_formula(rng, depth - 1, elements, n_bound))
    cls = And if op == 1 else Or
    return cls(random_formula(rng, depth - 1, elements, n_bound), random_formula(rng, depth - 1, elements, n_bound))


# ---------------------------------------------------------------- stage sets


@dataclass(frozen=True)
class StageSet:
    pairs: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "pairs", frozenset((int(a), int(n)) for a, n in self.pairs))

    def section(self, a: int) -> frozenset:
        """Y_a."""
        return frozenset(n for b, n in self.pairs if b == a)

    def below(self, a: int, order: Order) -> "StageSet":
        """Y^a."""
        return StageSet(frozenset((b, n) for b, n in self.pairs if order.less(b, a)))

    def restrict(self, elements: Iterable[int]) -> "StageSet":
        keep = set(elements)
        return StageSet(frozenset(p for p in self.pairs if p[0] in keep))

    def __contains__(self, p) -> bool:
        return tuple(p) in self.pairs

    def as_sections(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for a, n in sorted(self.pairs):
            out.setdefault(a, []).append(n)
        return out

    def __str__(self) -> str:
        return "{" + ", ".join(f"({a}, {n})" for a, n in sorted(self.pairs)) + "}"


# ---------------------------------------------------------------- direct iteration and H


def iterate_H(order: Order, gamma: GammaSpec, Z: Iterable[int] = (), stage_bound: int = 64) -> StageSet:
    """Y_a := Γ̂(Y^a, Z) along <_A, stage by stage."""
    Z = frozenset(Z)
    w = order.window()
    if len(w) > stage_bound:
        raise NotWellOrderedDetected(f"{len(w)} stages exceed the stage bound {stage_bound}")
    if order.lazy:
        loose = [a for a in w if not order.anchored(a)]
        if loose:
            raise NotWellOrderedDetected(f"{loose[0]} has a <_A-predecessor beyond the explored window")
    verdict = order.check()
    if not verdict:
        raise NotWellOrderedDetected(verdict.reason)
    built: set[tuple[int, int]] = set()
    for a in w:
        section = gamma.hat(lambda b, m: (b, m) in built, Z, w)
        built.update((a, n) for n in section)
    return StageSet(frozenset(built))


def _first_discrepancy(Y: Callable[[int, int], bool], order: Order, gamma: GammaSpec, Z: frozenset):
    """<_A-least window element a with Y_a ≠ Γ̂(Y^a, Z), with the least k
    in the symmetric difference; None when there is none."""
    w = order.window()
    below: set[tuple[int, int]] = set()
    for a in w:
        ya = frozenset(m for m in range(gamma.n_bound) if Y(a, m))
        expected = gamma.hat(lambda b, m: (b, m) in below, Z, w)
        if ya != expected:
            return a, min(ya ^ expected)
        below.update((a, m) for m in ya)
    return None


def check_H(Y: StageSet, order: Order, gamma: GammaSpec, Z: Iterable[int] = ()) -> Verdict:
    """(∀a ∈ A)(Y_a = Γ̂(Y^a, Z)); a failure names (a, n), first in <_A
    then numeric order."""
    Z = frozenset(Z)
    w = order.window()
    for a in w:
        ya = Y.section(a)
        expected = gamma.hat(lambda b, m: order.less(b, a) and (b, m) in Y.pairs, Z, w)
        if ya != expected:
            n = min(ya ^ expected)
            return Verdict.no(f"Y_{a} and Γ̂(Y^{a}) differ at {n}", (a, n))
    return Verdict.yes()


# ---------------------------------------------------------------- separation functional


class SepInstance:
    """(A, <_A, Γ, Z) together with the position layout of Y[g]."""

    def __init__(self, order: Order, gamma: GammaSpec, Z: Iterable[int] = (), layout: Optional[str] = None):
        self.order = order
        self.gamma = gamma
        self.Z = frozenset(Z)
        if layout is None:
            layout = "numeric" if order.lazy else "ranked"
        if layout == "ranked" and order.lazy:
            raise ValueError("ranked layout needs a finite order")
        if layout not in ("cantor", "ranked", "numeric"):
            raise ValueError(f"unknown layout {layout!r}")
        self.layout = layout
        w = order.window()
        self.region = [(self.position(b, k), b, k) for b in w for k in range(gamma.n_bound)]
        self.depth = max((p for p, _, _ in self.region), default=-1) + 1

    def position(self, b: int, k: int) -> int:
        if self.layout == "cantor":
            return pair(b, k)
        if self.layout == "ranked":
            return self.order.rank[b] * self.gamma.n_bound + k
        return b * self.gamma.n_bound + k

    def decode(self, bits) -> StageSet:
        """Y[g] on A × [0, n_bound) from the first ``depth`` bits of g."""
        return StageSet(frozenset((b, k) for p, b, k in self.region if bits[p] == 0))

    def member(self, g: Path) -> Callable[[int, int], bool]:
        """Y[g] as a membership test on all of dom(A) × [0, n_bound)."""
        def Y(b: int, k: int) -> bool:
            return 0 <= k < self.gamma.n_bound and self.order.contains(b) and g(self.position(b, k)) == 0
        return Y

    def value(self, Y: StageSet) -> int:
        hit = _first_discrepancy(lambda b, m: (b, m) in Y.pairs, self.order, self.gamma, self.Z)
        if hit is None:
            return 0
        a, k = hit
        if self.order.lazy and not self.order.anchored(a):
            # a is least only within the window: no certified minimal bad stage
            return 0
        return self.position(a, k) + 1

    def bad(self, Y: Callable[[int, int], bool], a: int) -> bool:
        """Y_a ≠ Γ̂(Y^a, Z) for an arbitrary element a."""
        ya = frozenset(m for m in range(self.gamma.n_bound) if Y(a, m))
        below = lambda b, m: self.order.less(b, a) and Y(b, m)
        return ya != self.gamma.hat(below, self.Z, self.order.window())

    def describe(self) -> str:
        return f"{self.order.describe()}; {self.gamma.render()}; Z = {sorted(self.Z)}; layout {self.layout}"


def sep_G(g: Path, order: Order, gamma: GammaSpec, Z: Iterable[int] = (), fuel: Fuel = DEFAULT_FUEL,
          layout: Optional[str] = None) -> int:
    """0 if H(Y[g], Z) or there is no <_A-minimal bad stage; otherwise
    ⟨a, k⟩ + 1 for a the minimal bad stage and k least in the symmetric
    difference of Y[g]_a and Γ̂(Y[g]^a, Z)."""
    inst = order if isinstance(order, SepInstance) else SepInstance(order, gamma, Z, layout)
    if inst.depth > fuel.max_depth:
        raise DepthExceeded(inst.depth, fuel.max_depth, "decoded region depth")
    return inst.value(inst.decode(g.prefix(inst.depth)))


class SepAssociate(Associate):
    """Associate of ``sep_G``: commits exactly at the decoded region's depth."""

    description = "combinator"

    def __init__(self, inst: SepInstance):
        self.inst = inst
        self._memo: dict = {}

    def _value(self, bits: BitString) -> int:
        v = self._memo.get(bits)
        if v is None:
            v = self._memo[bits] = self.inst.value(self.inst.decode(bits))
        return v

    def query(self, s: BitString) -> Optional[int]:
        d = self.inst.depth
        if len(s) < d:
            return None
        return self._value(s[:d])

    def commit(self, f: Path, max_depth: int) -> tuple[int, int]:
        d = self.inst.depth
        if d > max_depth:
            raise NoCommit(max_depth, f)
        return self._value(f.prefix(d)), d

    def __repr__(self):
        return f"SepAssociate({self.inst.describe()})"


# ---------------------------------------------------------------- extraction


class HResult:
    pass


@dataclass(frozen=True)
class FixedSet(HResult):
    Y: StageSet
    entry: int
    verdict: Verdict

    kind = "fixed"


@dataclass(frozen=True)
class Descending(HResult):
    h: tuple[int, ...]
    verdict: Verdict
    source: str = ""

    kind = "descending"


def verify_descending(h: Sequence[int], order: Order) -> Verdict:
    for i in range(len(h) - 1):
        if not order.less(h[i + 1], h[i]):
            return Verdict.no(f"h({i + 1}) = {h[i + 1]} is not <_A h({i}) = {h[i]}", i)
    for a in h:
        if not order.contains(a):
            return Verdict.no(f"{a} is not in A", a)
    return Verdict.yes()


def _descent(pred: Callable[[int], bool], order: Order, length: int, search: int) -> tuple[int, ...]:
    """h(0) = μa. pred(a); h(i+1) = μb. [pred(b) ∧ b <_A h(i)], each search
    bounded by ``search``."""
    h: list[int] = []
    while len(h) < length:
        for b in range(search):
            if order.contains(b) and pred(b) and (not h or order.less(b, h[-1])):
                h.append(b)
                break
        else:
            raise FuelExhausted(f"descent stalled after {len(h)} elements (search bound {search})", tuple(h))
    return tuple(h)


def _lex_key(g: Path, width: int) -> tuple:
    return tuple(g.prefix(width))


def extract_from_cover(cover: SpecialCover, inst: SepInstance, descent_len: int = 20,
                       fuel: Fuel = DEFAULT_FUEL) -> HResult:
    """Case analysis on a special cover of ``sep_G``.

    An entry with value 0 yields Y = Y[g_i] for the lexicographically least
    such g_i, or a descending sequence of bad stages when H(Y[g_i]) fails.
    If every value is positive, two entries whose decoded sets differ without
    a <_A-minimal difference give a descending sequence; otherwise the path
    that copies the largest a_n's stages below a_n and sets Y_{a_n} to
    Γ̂(Y[g_n]^{a_n}, Z) lies outside every cylinder, refuting the cover.
    """
    order = inst.order
    D = inst.depth
    search = fuel.max_steps
    width = max([D] + [len(g.prefix(n)) for g, n in cover.entries]) + 1

    zeros = [i for i, (_, n) in enumerate(cover.entries) if n == 0]
    if zeros:
        i = min(zeros, key=lambda j: _lex_key(cover.entries[j][0], width))
        g = cover.entries[i][0]
        Y = inst.decode(g.prefix(D))
        verdict = check_H(Y, order, inst.gamma, inst.Z)
        if verdict and not (order.lazy and any(not order.anchored(a) for a in order.window())):
            return FixedSet(Y, i, verdict)
        member = inst.member(g)
        h = _descent(lambda a: inst.bad(member, a), order, descent_len, search)
        return Descending(h, verify_descending(h, order), source=f"bad stages of entry {i}")

    # every entry carries ⟨a_i, k_i⟩ + 1
    decoded = [inst.decode(g.prefix(D)) for g, _ in cover.entries]
    w = order.window()
    for i in range(len(decoded)):
        for j in range(i + 1, len(decoded)):
            diff = [a for a in w if decoded[i].section(a) != decoded[j].section(a)]
            if not diff:
                continue
            least = diff[0]
            if order.lazy and not order.anchored(least):
                mi, mj = inst.member(cover.entries[i][0]), inst.member(cover.entries[j][0])
                n_b = inst.gamma.n_bound
                pred = lambda b: any(mi(b, m) != mj(b, m) for m in range(n_b))
                h = _descent(pred, order, descent_len, search)
                return Descending(h, verify_descending(h, order), source=f"differences of entries {i}, {j}")

    stages = {p: (b, k) for p, b, k in inst.region}
    culprits = []
    for idx, (_, n) in enumerate(cover.entries):
        if n - 1 not in stages:
            raise CoverContradiction(f"entry {idx} value {n} decodes to no stage", False)
        culprits.append((stages[n - 1][0], idx))
    a_n, idx_n = max(culprits, key=lambda t: (order.window().index(t[0]), t[1]))
    g_n = cover.entries[idx_n][0]
    Yn = decoded[idx_n]
    target = inst.gamma.hat(lambda b, m: order.less(b, a_n) and (b, m) in Yn.pairs, inst.Z, w)
    bits = list(g_n.prefix(D))
    for p, b, k in inst.region:
        if b == a_n:
            bits[p] = 0 if k in target else 1
    witness = zeros_after(BitString(bits))
    covered = any(c.contains(witness.prefix(len(c.prefix))) for c in cover.cylinders())
    raise CoverContradiction(witness, uncovered=not covered)


def atr_realiser(order: Order, gamma: GammaSpec, Z: Iterable[int] = (), fuel: Fuel = DEFAULT_FUEL,
                 descent_len: int = 20, layout: Optional[str] = None) -> HResult:
    """theta_cont on the associate of sep_G, then extract_from_cover."""
    inst = SepInstance(order, gamma, Z, layout)
    cover = theta_cont(SepAssociate(inst), fuel)
    return extract_from_cover(cover, inst, descent_len, fuel)
