"""Special fan functional on associate-coded inputs, its conversion terms,
the uniform-continuity modulus and the interval subcover sweep."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .cantor import EMPTY, ONE, ZERO, BinaryTree, BitString, Cylinder, Dyadic, covers_cantor
from .errors import DepthExceeded, FuelExhausted, NoCommit, NonPositiveGauge
from .functionals import DEFAULT_FUEL, Associate, Fuel, Path, apply, commit_bar, zeros_after
from .verdict import Verdict


@dataclass(frozen=True)
class SpecialCover:
    """Finite list of (path, value) pairs; each contributes the cylinder
    of the path's first ``value`` bits."""

    entries: tuple[tuple[Path, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple((g, int(n)) for g, n in self.entries))

    def paths(self) -> list[Path]:
        return [g for g, _ in self.entries]

    def values(self) -> list[int]:
        return [n for _, n in self.entries]

    def cylinders(self) -> list[Cylinder]:
        return [Cylinder(g.prefix(n)) for g, n in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class ScfOutput:
    bound: int
    witnesses: tuple[Path, ...]


def _value_at(G: Associate, g: Path, fuel: Fuel, node: BitString) -> int:
    try:
        return apply(G, g, fuel)
    except NoCommit:
        raise FuelExhausted(f"no commit on {g.describe()} within depth {fuel.max_depth}", node) from None


def theta_cont(G: Associate, fuel: Fuel = DEFAULT_FUEL) -> SpecialCover:
    """Bar search for a special cover of a total continuous ``G``.

    Depth first, 0 before 1: at node σ take g = σ·0^ω and close the node
    once G(g) <= |σ|, contributing [ḡG(g)] ⊇ [σ].
    """
    entries: list[tuple[Path, int]] = []
    stack = [EMPTY]
    while stack:
        node = stack.pop()
        g = zeros_after(node)
        n = _value_at(G, g, fuel, node)
        if n <= len(node):
            entries.append((g, n))
            continue
        if len(node) >= fuel.max_depth:
            raise FuelExhausted(f"branch {node} still open at depth {fuel.max_depth}", node)
        stack.append(node.child(1))
        stack.append(node.child(0))
    return SpecialCover(tuple(entries))


def verify_sff(cover: SpecialCover, G: Associate, fuel: Fuel = DEFAULT_FUEL) -> Verdict:
    """Entry values agree with G, and the induced cylinders cover Cantor space."""
    for i, (g, n) in enumerate(cover.entries):
        actual = apply(G, g, fuel)
        if actual != n:
            return Verdict.no(f"value mismatch at entry {i}: recorded {n}, G gives {actual}", i)
    return covers_cantor(cover.cylinders())


# ---------------------------------------------------------------- SFF <-> SCF


def scf_from_sff(theta: Callable[[Associate], SpecialCover],
                 fuel: Fuel = DEFAULT_FUEL) -> Callable[[Associate], ScfOutput]:
    """ν(g) = (max{g(α) : α ∈ Θ(g)} + 1, Θ(g))."""

    def nu(G: Associate) -> ScfOutput:
        ws = tuple(theta(G).paths())
        return ScfOutput(max((apply(G, a, fuel) for a in ws), default=0) + 1, ws)

    return nu


def sff_from_scf(nu: Callable[[Associate], ScfOutput],
                 fuel: Fuel = DEFAULT_FUEL) -> Callable[[Associate], SpecialCover]:
    """Θ(g) = second component of ν(g), values recomputed from g."""

    def theta(G: Associate) -> SpecialCover:
        return SpecialCover(tuple((a, apply(G, a, fuel)) for a in nu(G).witnesses))

    return theta


def _antecedent(witnesses: Sequence[Path], g: Associate, T: BinaryTree, fuel: Fuel) -> Verdict:
    for i, a in enumerate(witnesses):
        s = a.prefix(apply(g, a, fuel))
        if s in T:
            return Verdict.no(f"witness {i} chain {s} lies in the tree", i)
    return Verdict.yes()


def check_scf(out: ScfOutput, g: Associate, T: BinaryTree, fuel: Fuel = DEFAULT_FUEL) -> Verdict:
    """If no witness chain ᾱg(α) is in T then every β leaves T by length
    ``out.bound``; a failure carries a length-``bound`` chain inside T."""
    T._guard(out.bound)
    if not _antecedent(out.witnesses, g, T, fuel):
        return Verdict(True, "antecedent false")
    beta = next(T.members(out.bound), None)
    if beta is not None:
        return Verdict.no(f"{beta} stays in the tree for all {out.bound} steps", beta)
    return Verdict.yes()


# ---------------------------------------------------------------- modulus


def muc_cont(Y: Associate, fuel: Fuel = DEFAULT_FUEL) -> int:
    """Least N such that every length-N string determines Y's value.

    Read off the commit bar: N is one more than the deepest internal bar
    node whose subtree still carries two different values.
    """
    try:
        bar = commit_bar(Y, fuel.max_depth)
    except DepthExceeded as exc:
        raise FuelExhausted(str(exc)) from None
    values: dict[BitString, set[int]] = {}
    for s, v in bar:
        for n in range(len(s)):
            values.setdefault(s[:n], set()).add(v)
    return max((len(node) + 1 for node, vs in values.items() if len(vs) > 1), default=0)


# ---------------------------------------------------------------- interval subcover


Gauge = Callable[[Dyadic], Dyadic]


def hbu_subcover(psi: Gauge, fuel: Fuel = DEFAULT_FUEL) -> list[tuple[Dyadic, Dyadic]]:
    """Greedy sweep 0 = y0 < y1 < ... with y_{i+1} = min(y_i + Ψ(y_i), 1),
    stopping at anchor 1; returns the (center, radius) pairs."""
    out: list[tuple[Dyadic, Dyadic]] = []
    y = ZERO
    while len(out) < fuel.max_steps:
        r = psi(y)
        if r <= ZERO:
            raise NonPositiveGauge(y)
        out.append((y, r))
        if y == ONE:
            return out
        y = min(y + r, ONE)
    raise FuelExhausted(f"sweep stopped at {y} after {len(out)} anchors", y)


def uncovered_point(intervals: Sequence[tuple[Dyadic, Dyadic]]):
    """Endpoint chaining for open intervals (c - r, c + r) against [0, 1].

    Returns None when [0, 1] is covered, else the least uncovered point
    reached by the chain.
    """
    spans = [(c - r, c + r) for c, r in intervals]
    x = ZERO
    while True:
        reach = max((hi for lo, hi in spans if lo < x < hi), default=None)
        if reach is None:
            return x
        if reach > ONE:
            return None
        x = reach


def verify_hbu(intervals: Sequence[tuple[Dyadic, Dyadic]]) -> Verdict:
    x = uncovered_point(intervals)
    if x is None:
        return Verdict.yes()
    return Verdict.no(f"{x} is not covered", x)
