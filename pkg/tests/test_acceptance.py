"""End-to-end acceptance checks, one test per criterion.

The terminal summary prints one PASS/FAIL line per test (see conftest.py).
"""

from __future__ import annotations

import itertools
import random
import time

from fanfun.atr import (Descending, FiniteOrder, FixedSet, GammaSpec, LazyOrder, NumIs, Or, SomeInX, Truth,
                        atr_realiser, check_H, iterate_H, random_formula, sep_G, verify_descending)
from fanfun.cantor import BinaryTree, BitString, Cylinder, Dyadic, all_strings, covers_cantor, union_measure
from fanfun.cli.main import main
from fanfun.coding import pair
from fanfun.errors import Diverged
from fanfun.fan import check_scf, muc_cont, scf_from_sff, sff_from_scf, theta_cont, verify_sff
from fanfun.functionals import (Add, Bit, CombinatorAssociate, Const, Fuel, apply, depth_table, parse_path,
                                zeros_after)
from fanfun.kleene import S4, S8, evaluate, lambda_env, mu_search, outcome, theta_env
from fanfun.structures import DEFAULT_BUDGET, build_code, check_code, mutate
from fanfun.weakfan import check_wcf, lambda_cont, sample_sufficiency, wcf_from_wff

from .kleene_oracle import random_index, reference_eval, small_numbers, sum_of_first_two
from .strategies import random_combinator

FUEL = Fuel(max_depth=64, max_steps=200_000)


def small_tables():
    """Every functional read off its first d <= 3 bits with values in {0, 1, 2}."""
    for d in range(4):
        for values in itertools.product(range(3), repeat=2 ** d):
            yield d, values, depth_table(d, values)


# ---------------------------------------------------------------- 1


def test_criterion_01_cover_soundness_sweep(record_property):
    rng = random.Random(101)
    exprs = [random_combinator(rng, depth=4, max_bit=12, max_value=10) for _ in range(200)]
    start = time.perf_counter()
    failures, branching = [], 0
    for e in exprs:
        G = CombinatorAssociate(e)
        cover = theta_cont(G, FUEL)
        branching += len(cover) > 1
        if not verify_sff(cover, G, FUEL):
            failures.append(e.render())
    elapsed = time.perf_counter() - start
    record_property("seconds", f"{elapsed:.2f}")
    record_property("multi-entry covers", branching)
    assert not failures, failures[:5]
    assert elapsed < 60


# ---------------------------------------------------------------- 2


def canonical_cylinders(G, width: int) -> set[BitString]:
    """{f̄G(f)} over all f, read off the length-``width`` strings."""
    return {s[:apply(G, zeros_after(s), FUEL)] for s in all_strings(width)}


def minimal(prefixes) -> set[BitString]:
    ps = set(prefixes)
    return {p for p in ps if not any(q != p and q.is_prefix_of(p) for q in ps)}


def covered_strings(prefixes, width: int) -> set[BitString]:
    return {s for s in all_strings(width) if any(p.is_prefix_of(s) for p in prefixes)}


def test_criterion_02_exhaustive_small_table_oracle(record_property):
    failures = []
    count = 0
    for d, values, G in small_tables():
        count += 1
        width = max(d, max(values))
        canonical = canonical_cylinders(G, width)
        bar = minimal(canonical)
        got = [c.prefix for c in theta_cont(G, FUEL).cylinders()]
        everything = set(all_strings(width))
        if not set(got) <= canonical:
            failures.append((d, values, "cylinder outside the canonical cover"))
        elif not all(any(b.is_prefix_of(p) or p.is_prefix_of(b) for b in bar) for p in got):
            failures.append((d, values, "cylinder unrelated to the minimal bar"))
        elif covered_strings(got, width) != covered_strings(bar, width) or covered_strings(bar, width) != everything:
            failures.append((d, values, "coverage differs at depth d"))
        elif not covers_cantor([Cylinder(p) for p in got]):
            failures.append((d, values, "no cover"))
    record_property("tables", count)
    assert not failures, failures[:5]


# ---------------------------------------------------------------- 3


def test_criterion_03_weak_fan_threshold_exactness(record_property):
    below, nontrivial, loose = 0, 0, []
    for d, values, G in small_tables():
        for k in range(21):
            wc = lambda_cont(G, k, FUEL)
            cs = wc.cylinders()
            if union_measure(cs) < Dyadic.threshold(k) or union_measure(cs) != wc.measure:
                below += 1
            if len(cs) >= 2:
                nontrivial += 1
                if union_measure(cs[:-1]) >= Dyadic.threshold(k):
                    loose.append((d, values, k))
    tight = 1 - len(loose) / nontrivial
    record_property("tight", f"{tight:.4f} of {nontrivial}")
    if loose:
        print("not greedy-tight:", loose[:20])
    assert below == 0
    assert tight >= 0.95


# ---------------------------------------------------------------- 4


def random_tree(rng: random.Random) -> BinaryTree:
    kind = rng.randrange(5)
    if kind == 0:
        return BinaryTree.full(16)
    if kind == 1:
        return BinaryTree.empty(16)
    if kind == 2:
        return BinaryTree.only_ones(16)
    if kind == 3:
        pattern = "".join(rng.choice("01") for _ in range(rng.randint(1, 3)))
        return BinaryTree.no_pattern(pattern, 16)
    height = rng.randint(0, 4)
    leaves = [BitString([rng.getrandbits(1) for _ in range(rng.randint(0, height))]) for _ in range(3)]
    return BinaryTree.from_nodes({leaf[:n] for leaf in leaves for n in range(len(leaf) + 1)}, 16)


def test_criterion_04_scf_and_wcf_conversions(record_property):
    rng = random.Random(404)
    theta = lambda G: theta_cont(G, FUEL)
    nu = scf_from_sff(theta, FUEL)
    eta = wcf_from_wff(lambda G, k: lambda_cont(G, k, FUEL), FUEL)
    back = sff_from_scf(nu, FUEL)
    failures, live = [], 0
    for i in range(100):
        G = CombinatorAssociate(random_combinator(rng))
        T = random_tree(rng)
        k = rng.randrange(7)
        scf = check_scf(nu(G), G, T, FUEL)
        wcf = check_wcf(eta(G, k), G, T, k, FUEL)
        live += scf.reason != "antecedent false"
        if not scf or not wcf or not verify_sff(back(G), G, FUEL):
            failures.append((i, scf.reason, wcf.reason))
    record_property("non-vacuous scf", live)
    assert not failures, failures[:5]


# ---------------------------------------------------------------- 5

PATHS = [parse_path(p) for p in ("(0)", "(1)", "1(0)", "01(1)", "(01)", "110(0)")]


def test_criterion_05_interpreter_oracle_equivalence(record_property):
    rng = random.Random(505)
    mismatches, stuck = [], []
    most_steps = 0
    for i in range(100):
        oracle = rng.choice(["theta", "lambda"])
        k, m = rng.randrange(3), rng.randrange(4)
        e = random_index(rng, k, m, 5, oracle)
        gs = tuple(rng.choice(PATHS) for _ in range(k))
        bs = small_numbers(rng, m)
        make = theta_env if oracle == "theta" else lambda_env
        expected = reference_eval(e, gs, bs)
        for steps in (10 ** 2, 10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6):
            fuel = Fuel(max_depth=32, max_steps=steps)
            got = outcome(e, make(fuel, g_args=gs, b_args=bs), fuel)
            if got.kind == "value":
                most_steps = max(most_steps, steps)
                if got.value != expected:
                    mismatches.append((i, got.value, expected))
                break
        else:
            stuck.append(i)

    mu_checked = 0
    for i in range(100):
        k, m = rng.randrange(2), rng.randrange(3)
        body = S4(random_index(rng, k, m + 1, 3), sum_of_first_two(k, m)) if i % 2 else random_index(rng, k, m + 1, 3)
        gs = tuple(rng.choice(PATHS) for _ in range(k))
        bs = small_numbers(rng, m)
        env = theta_env(FUEL, g_args=gs, b_args=bs)
        bound = Fuel(max_depth=32, max_steps=300)
        try:
            want = mu_search(lambda a: 0 if evaluate(body, env.with_numbers((a,) + bs), FUEL) > 0 else 1, bound)
        except Diverged:
            want = None
        if want is None:
            continue  # no witness below the bound: both searches are partial here
        mu_checked += 1
        got = outcome(S8(1, body), env, FUEL)
        if got.kind != "value" or got.value != want:
            mismatches.append(("S8.1", i, str(got), want))
    record_property("most steps", most_steps)
    record_property("mu witnesses", mu_checked)
    assert not mismatches, mismatches[:5]
    assert not stuck, stuck
    assert mu_checked >= 50


# ---------------------------------------------------------------- 6

FALSE = GammaSpec(Truth(False), 3)
SUCCESSOR = GammaSpec(Or(NumIs(0), SomeInX(1)), 3)


def test_criterion_06_atr_end_to_end(record_property):
    rng = random.Random(606)
    failures, worst, count = [], 0.0, 0
    for n in range(7):
        for perm in itertools.permutations(range(n)):
            A = FiniteOrder(perm)
            for _ in range(50):
                n_bound = rng.randint(1, 4)
                gamma = GammaSpec(random_formula(rng, 3, A.window() or (0,), n_bound), n_bound)
                Z = frozenset(z for z in range(2) if rng.random() < 0.5)
                start = time.perf_counter()
                res = atr_realiser(A, gamma, Z, FUEL)
                worst = max(worst, time.perf_counter() - start)
                count += 1
                if not (isinstance(res, FixedSet) and check_H(res.Y, A, gamma, Z)
                        and res.Y == iterate_H(A, gamma, Z)):
                    failures.append((perm, gamma.render(), sorted(Z)))
    record_property("instances", count)
    record_property("worst seconds", f"{worst:.3f}")
    assert not failures, failures[:5]
    assert worst < 5

    rev = LazyOrder.reverse(16)
    for gamma in (FALSE, SUCCESSOR):
        res = atr_realiser(rev, gamma, (), FUEL, descent_len=21)
        assert isinstance(res, Descending)
        assert len(res.h) - 1 == 20
        assert verify_descending(res.h, rev)


# ---------------------------------------------------------------- 7


def symmetric_difference_case(bits, order: FiniteOrder, gamma: GammaSpec, Z) -> int:
    """0 when every stage matches Γ̂ of the stages below it; otherwise
    ⟨a, k⟩ + 1 for the first bad stage a and the least k where they differ."""
    Y = {(b, k) for b in order.ranked for k in range(gamma.n_bound) if bits[pair(b, k)] == 0}
    for a in order.ranked:
        lower = {(b, k) for b, k in Y if order.rank[b] < order.rank[a]}
        wanted = {n for n in range(gamma.n_bound)
                  if gamma.formula.holds(n, lambda b, m: (b, m) in lower, frozenset(Z), order.ranked)}
        have = {k for b, k in Y if b == a}
        if have != wanted:
            return pair(a, min(have ^ wanted)) + 1
    return 0


def test_criterion_07_sep_case_fidelity(record_property):
    rng = random.Random(707)
    cases = {"fixed point": 0, "bad stage": 0}
    failures = []
    for i in range(50):
        size = rng.randint(1, 4)
        order = FiniteOrder(rng.sample(range(6), size))
        n_bound = rng.randint(1, 3)
        gamma = GammaSpec(random_formula(rng, 2, order.ranked, n_bound), n_bound)
        Z = frozenset(z for z in range(2) if rng.random() < 0.5)
        width = max(pair(b, k) for b in order.ranked for k in range(n_bound)) + 1
        bits = [rng.getrandbits(1) for _ in range(width + 8)]
        if i % 2 == 0:
            # write the true fixed point into the region, junk everywhere else
            Y = iterate_H(order, gamma, Z)
            for b in order.ranked:
                for k in range(n_bound):
                    bits[pair(b, k)] = 0 if (b, k) in Y else 1
            if i % 4 == 2:
                b, k = rng.choice(order.ranked), rng.randrange(n_bound)
                bits[pair(b, k)] ^= 1
        want = symmetric_difference_case(bits, order, gamma, Z)
        got = sep_G(zeros_after(BitString(bits)), order, gamma, Z, FUEL, layout="cantor")
        cases["fixed point" if want == 0 else "bad stage"] += 1
        if got != want:
            failures.append((i, order.ranked, gamma.render(), got, want))
    record_property("cases", cases)
    assert not failures, failures[:5]
    assert all(cases.values())


# ---------------------------------------------------------------- 8


def determination_depth(G, d: int) -> int:
    """Least N such that the value on the length-d strings depends only on
    their first N bits."""
    values = {s: apply(G, zeros_after(s), FUEL) for s in all_strings(d)}
    for n in range(d + 1):
        seen: dict[BitString, int] = {}
        if all(seen.setdefault(s[:n], v) == v for s, v in values.items()):
            return n
    return d


def test_criterion_08_muc_exhaustiveness(record_property):
    rng = random.Random(808)
    checked = 0
    for d in range(9):
        family = []
        for _ in range(5):
            values = [rng.randrange(4) for _ in range(2 ** d)]
            if d:
                values[0], values[1] = 0, 1  # 0^{d-1}0 and 0^{d-1}1 differ
            family.append(depth_table(d, values))
        expr = Const(0)
        for b in range(d):
            expr = Add(expr, Bit(b))
        family.append(CombinatorAssociate(expr))
        for Y in family:
            assert determination_depth(Y, d) == d
            n = muc_cont(Y, FUEL)
            assert n == d
            for s in all_strings(n):
                completions = [zeros_after(s), parse_path(f"{s}(1)"), parse_path(f"{s}(01)")]
                assert len({apply(Y, f, FUEL) for f in completions}) == 1
            checked += 1
    record_property("functionals", checked)


# ---------------------------------------------------------------- 9


def test_criterion_09_sufficiency_rate_grows(record_property):
    rates = {}
    for c in range(4):
        F = CombinatorAssociate(Const(c))
        row = [sample_sufficiency(F, m, 3, 500, seed=909) for m in (4, 16, 64)]
        rates[c] = row
        drops = [row[i] - row[i + 1] for i in range(2) if row[i + 1] < row[i]]
        assert len(drops) <= 1 and all(x <= 0.02 for x in drops), row
        assert row[-1] >= 0.99, row
    record_property("rates", rates)


# ---------------------------------------------------------------- 10

STRUCTURE_FUEL = Fuel(max_depth=24, max_steps=50_000)


def test_criterion_10_structure_falsifier(record_property):
    bit0 = CombinatorAssociate(Add(Bit(0), Const(1)))
    bit1 = CombinatorAssociate(Add(Bit(1), Const(1)))
    code = build_code([bit0, bit1], fuel=STRUCTURE_FUEL)
    clean = check_code(code, DEFAULT_BUDGET, STRUCTURE_FUEL)
    assert clean.clean, clean.violations
    found = {}
    for kind in ("1-1", "functional", "s2"):
        report = check_code(mutate(code, kind, seed=1010), DEFAULT_BUDGET, STRUCTURE_FUEL)
        found[kind] = sorted({tag for tag, _ in report.violations})
        assert report.violations, kind
    record_property("violations", found)


# ---------------------------------------------------------------- 11

CLI_RUNS = [
    ["cover", "-e", "G := bit(1) + bit(0)"],
    ["weakcover", "-e", "G := bit(0) + bit(1) + 1", "--k", "2"],
    ["measure", "-e", "C := cylinders [0, 10, 11]"],
    ["eval", "-e", "E := <1>", "--numbers", "41"],
    ["atr", "-e", "A := order [0, 1, 2]", "-e", f"Gamma := {SUCCESSOR.render()}"],
    ["atr", "-e", "A := lazy reverse 16", "-e", f"Gamma := {FALSE.render()}", "--fuel-depth", "64"],
    ["muc", "-e", "Y := bit(3) xor bit(1)"],
    ["hbu", "-e", "Psi := gauge x*x + 1/8"],
    ["suffices", "-e", "F := 1", "-e", "seq := paths [(0), (1)]", "--k", "3"],
    ["sample", "-e", "F := 2", "--m", "16", "--k", "3", "--trials", "100", "--seed", "11"],
    ["check-structure", "-e", "G := bit(0) + 1", "-e", "H := bit(1) + 1",
     "--fuel-depth", "24", "--fuel-steps", "50000"],
]


def test_criterion_11_certificate_determinism(tmp_path, capsys, record_property):
    codes = {}
    for i, args in enumerate(CLI_RUNS):
        first, second = tmp_path / f"{i}a.json", tmp_path / f"{i}b.json"
        code_a = main(args + ["--out", str(first)])
        code_b = main(args + ["--out", str(second)])
        assert code_a == code_b
        assert first.read_bytes() == second.read_bytes(), args[0]
        assert main(["verify", str(first)]) == 0, args[0]
        codes[args[0]] = code_a
    capsys.readouterr()
    record_property("exit codes", codes)
    assert all(c == 0 for c in codes.values()), codes
