"""Codes of countable Θ-structures, a sampling falsifier for their axioms,
and the extension of Θ_M to all continuous inputs.

A code is kept finite: ``f1`` lists the members of M1 (binary paths),
``f2[j][i]`` is F_j(f1[i]), ``f3[j]`` holds the bits of Θ_M(F_j) (a packed
list, zero beyond the stored bits) and ``f4`` is a decidable relation on
tuples (e, (i1..ik), (b1..bm), a) standing for [e]_R(Θ_M, μ, f_i.., b..) = a.

Axiom tags used in reports: ``i`` (shapes), ``ii`` (μ), ``iii`` (the cover
condition for Θ_M), ``iv-a`` (functionality of R), ``iv-b`` / ``iv-c``
(closure of M1 / M2, only at explicitly supplied probes), ``iv-d`` (the
fixed-point clauses of the schemes) and ``code-1-1`` (injectivity of the
enumerations).  An empty report means nothing was found within budget.
"""

from __future__ import annotations

import itertools
import json
import random
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

from .cantor import BitString, Cylinder, covers_cantor
from .errors import EvalError, FanError
from .fan import SpecialCover, theta_cont
from .functionals import DEFAULT_FUEL, Associate, Fuel, Path, Periodic, apply, parse_path, zeros_after
from .kleene import (ADD, PRED, Env, Index, S1, S2, S3, S4, S6, S7, S8, S9, check_index,
                     const_bit_reader, decode, evaluate, pack_list, parse_index, render, unpack)


# ---------------------------------------------------------------- relations


class Relation(ABC):
    """The relation R of a structure, as a decision procedure."""

    @abstractmethod
    def holds(self, e: Index, gi: tuple, bs: tuple, a: int) -> bool: ...

    def value(self, e: Index, gi: tuple, bs: tuple, bound: int) -> Optional[int]:
        """Least accepted a below ``bound``, if any."""
        for a in range(bound):
            if self.holds(e, gi, bs, a):
                return a
        return None

    @abstractmethod
    def to_json(self) -> dict: ...


class InterpreterRelation(Relation):
    """R read off the interpreter with Θ replaced by the code's extension
    Θ1; attach the code through ``bind`` before use."""

    def __init__(self, fuel: Fuel = DEFAULT_FUEL):
        self.fuel = fuel
        self.code: Optional[StructureCode] = None
        self._memo: dict = {}

    def bind(self, code: "StructureCode") -> None:
        self.code = code
        self._memo.clear()

    def _theta(self, F: Associate):
        out = extend_theta(self.code, F, self.fuel)
        if isinstance(out, Indeterminate):
            raise EvalError("Indeterminate", detail=out.reason)
        return out

    def _eval(self, e, gi, bs) -> Optional[int]:
        key = (e, gi, bs)
        if key not in self._memo:
            env = Env(theta=self._theta, g_args=tuple(self.code.f1[i] for i in gi), b_args=bs)
            try:
                self._memo[key] = evaluate(e, env, self.fuel)
            except FanError:
                self._memo[key] = None
        return self._memo[key]

    def holds(self, e, gi, bs, a):
        return self._eval(e, tuple(gi), tuple(bs)) == a

    def value(self, e, gi, bs, bound):
        v = self._eval(e, tuple(gi), tuple(bs))
        return v if v is not None and v < bound else None

    def to_json(self):
        return {"kind": "interpreter"}


class TableRelation(Relation):
    def __init__(self, accepted: Iterable):
        self.accepted = frozenset((e, tuple(gi), tuple(bs), int(a)) for e, gi, bs, a in accepted)

    def holds(self, e, gi, bs, a):
        return (e, tuple(gi), tuple(bs), a) in self.accepted

    def to_json(self):
        rows = sorted([render(e), list(gi), list(bs), a] for e, gi, bs, a in self.accepted)
        return {"kind": "table", "accepted": rows}


class MutatedRelation(Relation):
    """``base`` with extra accepted tuples and whole schemes denied."""

    def __init__(self, base: Relation, extra: Iterable = (), deny_tags: Iterable[str] = ()):
        self.base = base
        self.extra = frozenset((e, tuple(gi), tuple(bs), int(a)) for e, gi, bs, a in extra)
        self.deny_tags = frozenset(deny_tags)

    def holds(self, e, gi, bs, a):
        if (e, tuple(gi), tuple(bs), a) in self.extra:
            return True
        return e.tag not in self.deny_tags and self.base.holds(e, gi, bs, a)

    def to_json(self):
        return {"kind": "mutated", "base": self.base.to_json(),
                "extra": sorted([render(e), list(gi), list(bs), a] for e, gi, bs, a in self.extra),
                "deny_tags": sorted(self.deny_tags)}


# ---------------------------------------------------------------- codes


@dataclass(frozen=True)
class StructureCode:
    f1: tuple[Path, ...]
    f2: tuple[tuple[int, ...], ...]
    f3: tuple[tuple[int, ...], ...]
    f4: Relation
    mu_index: Optional[int] = None

    def theta_path(self, j: int) -> Path:
        """Θ_M(F_j) as a path: the stored bits followed by zeros."""
        return zeros_after(BitString(self.f3[j]))

    def theta_list(self, j: int) -> list:
        """Θ_M(F_j) unpacked; the header is looked for among the stored bits."""
        return unpack(self.theta_path(j), Fuel(max_depth=max(len(self.f3[j]), 1)))


@dataclass(frozen=True)
class Budget:
    """Sampling bounds for :func:`check_code`.

    Indices are tried at every arity (k <= max_functions, m <= max_numbers)
    they are well-shaped for, with function arguments among the first
    ``member_bound`` members of M1 and numbers below ``number_bound``.
    """

    indices: tuple[Index, ...] = ()
    max_functions: int = 1
    max_numbers: int = 2
    member_bound: int = 3
    number_bound: int = 3
    value_bound: int = 8
    probe_depth: int = 16
    closure_probes: tuple = ()

    def describe(self) -> dict:
        return {
            "indices": [render(e) for e in self.indices],
            "max_functions": self.max_functions,
            "max_numbers": self.max_numbers,
            "member_bound": self.member_bound,
            "number_bound": self.number_bound,
            "value_bound": self.value_bound,
            "probe_depth": self.probe_depth,
            "closure_probes": len(self.closure_probes),
        }


DEFAULT_INDICES = (
    S1(), S2(0), S2(2), S3(), S7(),
    S4(S2(1), S1()), S4(S2(0), S7()),
    ADD, PRED,
    S6(S3(), (), (2, 1)),
    S8(1, S7()),
    S8(2, const_bit_reader(0)),
    S8(2, S4(S2(1), S7())),
    S9(0, 1),
)

DEFAULT_BUDGET = Budget(indices=DEFAULT_INDICES)


@dataclass(frozen=True)
class StructureReport:
    violations: tuple[tuple[str, object], ...]
    checked_budget: dict = field(default_factory=dict)

    @property
    def clean(self) -> bool:
        return not self.violations

    def tags(self) -> set[str]:
        return {t for t, _ in self.violations}


@dataclass(frozen=True)
class Indeterminate:
    candidates: tuple[int, ...]
    reason: str


def _same(p: Path, q: Path, depth: int) -> bool:
    if isinstance(p, Periodic) and isinstance(q, Periodic):
        return p == q
    return p.prefix(depth) == q.prefix(depth)


def _member_index(code: StructureCode, g: Path, depth: int) -> Optional[int]:
    for i, f in enumerate(code.f1):
        if _same(f, g, depth):
            return i
    return None


def mu_value(f: Path, depth: int = 64) -> int:
    """Feferman's μ on a binary path: least n with f(n) = 0, else 0.

    Exact for periodic presentations, probed to ``depth`` otherwise."""
    if isinstance(f, Periodic):
        head, period = f.canonical()
        bits = tuple(head) + tuple(period)
        return bits.index(0) if 0 in bits else 0
    for n in range(depth):
        if f(n) == 0:
            return n
    return 0


# ---------------------------------------------------------------- the extension Θ1


def extend_theta(code: StructureCode, F: Associate, fuel: Fuel = DEFAULT_FUEL,
                 test_points: Optional[int] = None, index_bound: Optional[int] = None,
                 probe_depth: int = 64):
    """Θ_M(G) when F extends exactly one coded G at the tested members of
    M1, the bar-search cover of F when it extends none, Indeterminate when
    several coded G's fit."""
    points = range(len(code.f1) if test_points is None else min(test_points, len(code.f1)))
    rows = range(len(code.f2) if index_bound is None else min(index_bound, len(code.f2)))
    values = [apply(F, code.f1[i], fuel) for i in points]
    matches = tuple(j for j in rows if all(code.f2[j][i] == v for i, v in zip(points, values)))
    if not matches:
        return theta_cont(F, fuel)
    if len(matches) > 1:
        return Indeterminate(matches, f"coded functionals {list(matches)} all agree with F on {len(points)} points")
    entries = []
    for s in code.theta_list(matches[0]):
        i = _member_index(code, s, probe_depth)
        g = code.f1[i] if i is not None else s
        entries.append((g, apply(F, g, fuel)))
    return SpecialCover(tuple(entries))


# ---------------------------------------------------------------- construction


def _packed_bits(paths: Sequence[Path]) -> tuple[int, ...]:
    k = len(paths)
    width = max(len(p.canonical()[0]) if isinstance(p, Periodic) else 64 for p in paths) + 1
    return tuple(pack_list(paths).prefix(k + k * width))


def build_code(associates: Sequence[Associate], extra_paths: Iterable[Path] = (),
               fuel: Fuel = DEFAULT_FUEL) -> StructureCode:
    """A code from finitely many total associates plus μ.

    M1 holds 0^ω, the extra paths and every path of the associates' special
    covers; M2 holds μ (index 0) and the associates' restrictions to M1,
    duplicates dropped; Θ_M is the bar-search cover.  R is the interpreter
    relative to the extension Θ1 of the resulting Θ_M.
    """
    covers = [theta_cont(G, fuel) for G in associates]
    members: list[Periodic] = []
    for p in itertools.chain([zeros_after("")], extra_paths, *(c.paths() for c in covers)):
        if not any(_same(p, q, 64) for q in members):
            members.append(p)
    f1 = tuple(members)
    rows = [tuple(mu_value(f) for f in f1)]
    thetas = [_packed_bits([f1[0]])]
    for G, cover in zip(associates, covers):
        row = tuple(apply(G, f, fuel) for f in f1)
        if row in rows:
            continue
        rows.append(row)
        thetas.append(_packed_bits(cover.paths()))
    relation = InterpreterRelation(fuel)
    code = StructureCode(f1, tuple(rows), tuple(thetas), relation, mu_index=0)
    relation.bind(code)
    return code


# ---------------------------------------------------------------- the falsifier


def _tuples(budget: Budget, code: StructureCode):
    """(e, gi, bs) triples within budget, deterministic order."""
    members = range(min(budget.member_bound, len(code.f1)))
    for e in budget.indices:
        for k in range(budget.max_functions + 1):
            for m in range(budget.max_numbers + 1):
                if not check_index(e, (k, m)):
                    continue
                for gi in itertools.product(members, repeat=k):
                    for bs in itertools.product(range(budget.number_bound), repeat=m):
                        yield e, gi, bs


class _Clauses:
    """One unfolding of the schemes with subcomputations read from R."""

    def __init__(self, code: StructureCode, budget: Budget):
        self.code = code
        self.R = code.f4
        self.V = budget.value_bound
        self.depth = budget.probe_depth
        self.members = range(min(budget.member_bound, len(code.f1)))

    def val(self, e, gi, bs):
        return self.R.value(e, tuple(gi), tuple(bs), self.V)

    def expected(self, e: Index, gi: tuple, bs: tuple) -> Optional[int]:
        """Value the clause for e forces, or None when R leaves it open."""
        t, a = e.tag, e.args
        f1 = self.code.f1
        if t == "S1":
            return bs[0] + 1
        if t == "S2":
            return a[0]
        if t == "S3":
            return bs[0]
        if t == "S7":
            return f1[gi[0]](bs[0])
        if t == "S4":
            b = self.val(a[0], gi, bs)
            return None if b is None else self.val(a[1], gi, (b,) + bs)
        if t == "S5":
            x, rest = bs[0], bs[1:]
            if x == 0:
                return self.val(a[0], gi, rest)
            prev = self.val(e, gi, (x - 1,) + rest)
            return None if prev is None else self.val(a[1], gi, (x - 1, prev) + rest)
        if t == "S6":
            _, t1, t2 = a
            return self.val(a[0], tuple(gi[i - 1] for i in t1), tuple(bs[i - 1] for i in t2))
        if t == "S8.1":
            for n in range(self.V):
                v = self.val(a[0], gi, (n,) + bs)
                if v is None:
                    return None
                if v > 0:
                    return n
            return None
        if t == "S8.2":
            pos, rest = bs[0], bs[1:]
            graph = []
            for i in range(len(f1)):
                v = self.val(a[0], (i,) + gi, rest)
                if v is None:
                    return None
                graph.append(v)
            rows = [j for j, row in enumerate(self.code.f2) if list(row) == graph]
            if len(rows) != 1:
                return None
            return self.code.theta_path(rows[0])(pos)
        if t == "S9":
            i, j = a
            try:
                inner = decode(bs[0])
            except FanError:
                return None
            return self.val(inner, gi[:i], bs[1:][:j])
        return None


def check_code(code: StructureCode, budget: Budget = DEFAULT_BUDGET, fuel: Fuel = DEFAULT_FUEL) -> StructureReport:
    """Sampled refutation of the structure and code axioms."""
    found: list[tuple[str, object]] = []
    f1, f2, f3 = code.f1, code.f2, code.f3
    depth = budget.probe_depth

    # (i) shapes
    for j, row in enumerate(f2):
        if len(row) != len(f1) or any(not isinstance(v, int) or v < 0 for v in row):
            found.append(("i", ("f2", j)))
    for j, bits in enumerate(f3):
        if any(b not in (0, 1) for b in bits):
            found.append(("i", ("f3", j)))
    if len(f3) != len(f2):
        found.append(("i", ("f3-length", len(f3), len(f2))))

    # code clauses: both enumerations 1-1
    for i, j in itertools.combinations(range(len(f1)), 2):
        if _same(f1[i], f1[j], depth):
            found.append(("code-1-1", ("f1", i, j)))
    for i, j in itertools.combinations(range(len(f2)), 2):
        if f2[i] == f2[j]:
            found.append(("code-1-1", ("f2", i, j)))

    # (ii) μ
    if code.mu_index is None or not 0 <= code.mu_index < len(f2):
        found.append(("ii", "no member of M2 is designated as μ"))
    else:
        for i, f in enumerate(f1):
            if i < len(f2[code.mu_index]) and f2[code.mu_index][i] != mu_value(f, depth):
                found.append(("ii", (i, f2[code.mu_index][i], mu_value(f, depth))))

    # (iii) Θ_M(F_j) lists members of M1 whose F_j-cylinders cover C
    for j in range(min(len(f2), len(f3))):
        try:
            slices = code.theta_list(j)
        except FanError:
            found.append(("iii", (j, "Θ_M value is constant zero")))
            continue
        cylinders = []
        for s in slices:
            i = _member_index(code, s, depth)
            if i is None:
                found.append(("iii", (j, f"{s.prefix(8)}... is not a member of M1")))
                break
            cylinders.append(Cylinder(f1[i].prefix(f2[j][i])))
        else:
            verdict = covers_cantor(cylinders)
            if not verdict:
                found.append(("iii", (j, str(verdict.witness))))

    # (iv-a) and (iv-d) over the sampled tuples
    clauses = _Clauses(code, budget)
    for e, gi, bs in _tuples(budget, code):
        accepted = [a for a in range(budget.value_bound) if code.f4.holds(e, gi, bs, a)]
        if len(accepted) > 1:
            found.append(("iv-a", (render(e), gi, bs, tuple(accepted))))
        want = clauses.expected(e, gi, bs)
        if want is None:
            continue
        if not code.f4.holds(e, gi, bs, want) or (accepted and accepted[0] != want):
            found.append(("iv-d", (render(e), gi, bs, want, tuple(accepted))))

    # (iv-b), (iv-c) only where the caller names a probe
    for probe in budget.closure_probes:
        kind, e, gi, bs = probe
        if kind == "iv-b":
            vals = [clauses.val(e, gi, (b,) + tuple(bs)) for b in range(depth)]
            if None in vals:
                continue
            if not any(all(f(b) == v for b, v in enumerate(vals)) for f in f1):
                found.append(("iv-b", (render(e), gi, bs)))
        else:
            vals = [clauses.val(e, (i,) + tuple(gi), bs) for i in range(len(f1))]
            if None in vals:
                continue
            if tuple(vals) not in set(f2):
                found.append(("iv-c", (render(e), gi, bs)))

    return StructureReport(tuple(found), budget.describe())


# ---------------------------------------------------------------- mutations


def mutate(code: StructureCode, kind: str, seed=0, budget: Budget = DEFAULT_BUDGET) -> StructureCode:
    """Seeded corruptions: ``1-1`` (f1(1) := f1(0)), ``functional`` (R
    accepts a second value at a sampled tuple), ``s2`` (R denies S2)."""
    rng = random.Random(f"mutate/{kind}/{seed}")
    if kind == "1-1":
        if len(code.f1) < 2:
            raise ValueError("need two members of M1")
        return replace(code, f1=(code.f1[0], code.f1[0]) + code.f1[2:])
    if kind == "functional":
        candidates = []
        for e, gi, bs in _tuples(budget, code):
            v = code.f4.value(e, gi, bs, budget.value_bound)
            if v is not None and v + 1 < budget.value_bound:
                candidates.append((e, gi, bs, v + 1))
        return replace(code, f4=MutatedRelation(code.f4, extra=[rng.choice(candidates)]))
    if kind == "s2":
        return replace(code, f4=MutatedRelation(code.f4, deny_tags=["S2"]))
    raise ValueError(f"unknown mutation {kind!r}")


# ---------------------------------------------------------------- serialization


def code_to_json(code: StructureCode) -> dict:
    return {
        "f1": [p.describe() for p in code.f1],
        "f2": [list(r) for r in code.f2],
        "f3": [list(b) for b in code.f3],
        "f4": code.f4.to_json(),
        "mu_index": code.mu_index,
    }


def _relation_from_json(data: dict, fuel: Fuel) -> Relation:
    kind = data.get("kind")
    if kind == "interpreter":
        return InterpreterRelation(fuel)
    if kind == "table":
        return TableRelation((parse_index(e), gi, bs, a) for e, gi, bs, a in data["accepted"])
    if kind == "mutated":
        return MutatedRelation(_relation_from_json(data["base"], fuel),
                               ((parse_index(e), gi, bs, a) for e, gi, bs, a in data.get("extra", [])),
                               data.get("deny_tags", []))
    raise ValueError(f"unknown relation kind {kind!r}")


def code_from_json(data, fuel: Fuel = DEFAULT_FUEL) -> StructureCode:
    if isinstance(data, str):
        data = json.loads(data)
    relation = _relation_from_json(data["f4"], fuel)
    code = StructureCode(
        tuple(parse_path(p) for p in data["f1"]),
        tuple(tuple(r) for r in data["f2"]),
        tuple(tuple(b) for b in data["f3"]),
        relation,
        data.get("mu_index"),
    )
    for r in (relation, getattr(relation, "base", None)):
        if isinstance(r, InterpreterRelation):
            r.bind(code)
    return code
