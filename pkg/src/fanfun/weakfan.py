"""Weak fan functional: covers of measure at least 1 - 2^-k, the WFF/WCF
terms, and the finite-precision suffices/fails verdicts."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .cantor import EMPTY, ZERO, BinaryTree, BitString, Cylinder, Dyadic, level_density, union_measure
from .errors import FuelExhausted, NoCommit
from .fan import _antecedent
from .functionals import DEFAULT_FUEL, Associate, Fuel, Path, apply, zeros_after
from .verdict import Verdict


class _Union:
    """Running exact measure of a growing union of cylinders."""

    def __init__(self):
        self.minimal: set[BitString] = set()
        self.measure = ZERO

    def add(self, p: BitString) -> None:
        if any(p[:n] in self.minimal for n in range(len(p) + 1)):
            return
        inside = [q for q in self.minimal if p.is_prefix_of(q)]
        for q in inside:
            self.minimal.discard(q)
            self.measure = self.measure - Dyadic(1, len(q))
        self.minimal.add(p)
        self.measure = self.measure + Dyadic(1, len(p))


@dataclass(frozen=True)
class WeakCover:
    entries: tuple[tuple[Path, int], ...]
    k: int
    measure: Dyadic

    def paths(self) -> list[Path]:
        return [g for g, _ in self.entries]

    def values(self) -> list[int]:
        return [n for _, n in self.entries]

    def cylinders(self) -> list[Cylinder]:
        return [Cylinder(g.prefix(n)) for g, n in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


def lambda_cont(G: Associate, k: int, fuel: Fuel = DEFAULT_FUEL) -> WeakCover:
    """Breadth-first, lexicographic within a level; nodes close as in the
    special bar search and closed cylinders accumulate until the exact
    union measure reaches 1 - 2^-k.  At least one entry is returned.

    Nodes where G does not commit stay open.  Each visited node costs one
    step of ``fuel.max_steps``; FuelExhausted carries the measure reached
    if the threshold is missed within the depth or step budget.
    """
    target = Dyadic.threshold(k)
    union = _Union()
    entries: list[tuple[Path, int]] = []
    queue = deque([EMPTY])
    visits = 0
    while queue:
        visits += 1
        if visits > fuel.max_steps:
            break
        node = queue.popleft()
        g = zeros_after(node)
        try:
            n = apply(G, g, fuel)
        except NoCommit:
            n = None
        if n is not None and n <= len(node):
            entries.append((g, n))
            union.add(g.prefix(n))
            if union.measure >= target:
                return WeakCover(tuple(entries), k, union.measure)
            continue
        if len(node) < fuel.max_depth:
            queue.append(node.child(0))
            queue.append(node.child(1))
    raise FuelExhausted(f"measure {union.measure} is short of {target} by {target - union.measure}",
                        union.measure)


@dataclass(frozen=True)
class WcfOutput:
    level: int
    witnesses: tuple[Path, ...]


def wcf_from_wff(lam: Callable[[Associate, int], WeakCover],
                 fuel: Fuel = DEFAULT_FUEL) -> Callable[[Associate, int], WcfOutput]:
    """η(g, k) = (max{g(α) : α ∈ Λ(g, k)} + 1, Λ(g, k))."""

    def eta(G: Associate, k: int) -> WcfOutput:
        ws = tuple(lam(G, k).paths())
        return WcfOutput(max((apply(G, a, fuel) for a in ws), default=0) + 1, ws)

    return eta


def check_wcf(out: WcfOutput, g: Associate, T: BinaryTree, k: int, fuel: Fuel = DEFAULT_FUEL) -> Verdict:
    """If no witness chain ᾱg(α) lies in T then L_level(T) <= 2^-k."""
    T._guard(out.level)
    if not _antecedent(out.witnesses, g, T, fuel):
        return Verdict(True, "antecedent false")
    density = level_density(T, out.level)
    if density > Dyadic(1, k):
        return Verdict.no(f"L_{out.level}(T) = {density} exceeds 2^-{k}", density)
    return Verdict.yes()


# ---------------------------------------------------------------- sufficiency


@dataclass(frozen=True)
class Sufficiency:
    kind: str  # "suffices" | "fails" | "undetermined"
    index: Optional[int] = None
    measure: Optional[Dyadic] = None

    def __str__(self) -> str:
        if self.kind == "fails":
            return f"fails({self.index})"
        if self.kind == "undetermined":
            return f"undetermined({self.measure})"
        return "suffices"


def suffices(seq: Sequence[Path], F: Associate, k: int, fuel: Fuel = DEFAULT_FUEL) -> Sufficiency:
    """fails(j) for the first path where F does not commit; otherwise
    suffices when the induced cylinders reach measure 1 - 2^-k."""
    cylinders = []
    for j, f in enumerate(seq):
        try:
            n = apply(F, f, fuel)
        except NoCommit:
            return Sufficiency("fails", index=j)
        cylinders.append(Cylinder(f.prefix(n)))
    m = union_measure(cylinders)
    if m >= Dyadic.threshold(k):
        return Sufficiency("suffices", measure=m)
    return Sufficiency("undetermined", measure=m)


def random_path(rng: random.Random, length: int) -> Path:
    return zeros_after(BitString._trusted(tuple(rng.getrandbits(1) for _ in range(length))))


def sample_sufficiency(F: Associate, m: int, k: int, trials: int, seed=0,
                       prefix_len: int = 16, fuel: Fuel = DEFAULT_FUEL) -> float:
    """Fraction of seeded random length-``m`` sequences that suffice for F
    at precision k.  Paths are uniform random prefixes of ``prefix_len``
    bits followed by zeros; trial t draws from its own derived seed."""
    if trials <= 0:
        raise ValueError("need at least one trial")
    hits = 0
    for t in range(trials):
        rng = random.Random(f"{seed}/{t}")
        seq = [random_path(rng, prefix_len) for _ in range(m)]
        if suffices(seq, F, k, fuel).kind == "suffices":
            hits += 1
    return hits / trials
