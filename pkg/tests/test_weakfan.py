from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from fanfun.cantor import ONE, BinaryTree, Dyadic, union_measure
from fanfun.errors import FuelExhausted
from fanfun.fan import theta_cont
from fanfun.functionals import (Add, Bit, CombinatorAssociate, Const, Fuel, NeverAssociate,
                                TableAssociate, apply, parse_path, zeros_after)
from fanfun.weakfan import (Sufficiency, WcfOutput, check_wcf, lambda_cont, sample_sufficiency,
                            suffices, wcf_from_wff)

from .strategies import combinator_associates

CONST_0 = CombinatorAssociate(Const(0))
CONST_1 = CombinatorAssociate(Const(1))
CONST_2 = CombinatorAssociate(Const(2))


def prefixes(wc):
    return [str(c.prefix) for c in wc.cylinders()]


# ------------------------------------------------------------ lambda_cont


@pytest.mark.parametrize("k", [0, 1, 5, 20])
def test_lambda_constant_zero(k):
    wc = lambda_cont(CONST_0, k)
    assert len(wc) == 1 and wc.measure == ONE


def test_lambda_constant_two_k1():
    wc = lambda_cont(CONST_2, 1)
    assert prefixes(wc) == ["00", "01"]
    assert wc.measure == Dyadic(1, 1)


def test_lambda_sum_of_two_bits():
    G = CombinatorAssociate(Add(Add(Bit(0), Bit(1)), Const(1)))
    wc = lambda_cont(G, 2)
    assert wc.measure >= Dyadic(3, 2)
    assert union_measure(wc.cylinders()) == wc.measure
    # Greedy: dropping the last entry falls below 3/4.
    assert union_measure(wc.cylinders()[:-1]) < Dyadic(3, 2)


def test_lambda_keeps_non_committing_nodes_open():
    # Undefined on the 1 side; the 0 side alone reaches measure 1/2.
    G = TableAssociate({"0": 1})
    wc = lambda_cont(G, 1, Fuel(max_depth=6))
    assert prefixes(wc) == ["0"]
    with pytest.raises(FuelExhausted) as info:
        lambda_cont(G, 2, Fuel(max_depth=6))
    assert info.value.where == Dyadic(1, 1)


def test_lambda_never_commits():
    with pytest.raises(FuelExhausted):
        lambda_cont(NeverAssociate(), 1, Fuel(max_depth=4))


def test_lambda_node_budget_stops_open_search():
    # nothing ever commits: without a node budget this visits 2^32 nodes
    with pytest.raises(FuelExhausted):
        lambda_cont(NeverAssociate(), 1, Fuel(max_depth=32, max_steps=1000))


@given(combinator_associates(), st.integers(0, 12))
def test_lambda_threshold_exact(G, k):
    wc = lambda_cont(G, k)
    assert union_measure(wc.cylinders()) >= Dyadic.threshold(k)
    for g, n in wc.entries:
        assert apply(G, g) == n


@given(combinator_associates(), st.integers(0, 10))
def test_lambda_monotone_accumulation(G, k):
    small, large = lambda_cont(G, k), lambda_cont(G, k + 1)
    assert large.entries[:len(small)] == small.entries


@given(combinator_associates())
def test_lambda_entries_come_from_special_cover_nodes(G):
    # Both searches close the same nodes, only in a different order.
    special = set(theta_cont(G).entries)
    assert set(lambda_cont(G, 30).entries) <= special


# ------------------------------------------------------------ WFF -> WCF


def test_wcf_examples():
    out = wcf_from_wff(lambda_cont)(CONST_2, 1)
    assert out.level == 3 and len(out.witnesses) == 2
    assert wcf_from_wff(lambda_cont)(CONST_0, 4).level == 1
    v = check_wcf(out, CONST_2, BinaryTree.full(6), 1)
    assert v and v.reason == "antecedent false"


def test_check_wcf_holds_when_tree_dies():
    out = WcfOutput(2, (parse_path("(0)"), parse_path("(1)")))
    assert check_wcf(out, CONST_1, BinaryTree.from_nodes([""], depth=4), 3)


def test_check_wcf_exposes_bad_lambda():
    # Witnesses avoid a tree that is full from depth 1 on the 1 side only.
    T = BinaryTree.from_nodes(["", "1", "10", "11"], depth=4)
    bogus = WcfOutput(2, (parse_path("(0)"),))
    v = check_wcf(bogus, CONST_1, T, 2)
    assert not v and v.witness == Dyadic(1, 1)


trees = st.sets(st.lists(st.integers(0, 1), max_size=6).map(lambda b: "".join(map(str, b))), max_size=12)


def closed_tree(nodes):
    out = set()
    for s in nodes:
        out.update(s[:i] for i in range(len(s) + 1))
    return BinaryTree.from_nodes(out, depth=24)


@given(combinator_associates(max_bit=4), trees, st.integers(0, 8))
def test_wcf_from_lambda_holds(G, nodes, k):
    out = wcf_from_wff(lambda_cont)(G, k)
    assert check_wcf(out, G, closed_tree(nodes), k)


# ------------------------------------------------------------ sufficiency


def test_suffices_examples():
    reps = [zeros_after(""), zeros_after("1")]
    for k in range(10):
        assert suffices(reps, CONST_1, k).kind == "suffices"
    assert suffices([zeros_after("")], NeverAssociate(), 1) == Sufficiency("fails", index=0)
    res = suffices([zeros_after("")], CONST_2, 2)
    assert res.kind == "undetermined" and res.measure == Dyadic(1, 2)
    assert str(res) == "undetermined(1/4)"


def test_failure_takes_precedence():
    F = TableAssociate({"0": 0})
    res = suffices([zeros_after("0"), zeros_after("1")], F, 1, Fuel(max_depth=4))
    assert res == Sufficiency("fails", index=1)


def exact_rate_two_cells(m):
    # Both depth-1 cells drawn among m uniform draws.
    return 1 - 2 * 0.5 ** m


def test_sample_constant_one():
    rate = sample_sufficiency(CONST_1, 8, 3, 200, seed=0)
    assert abs(rate - exact_rate_two_cells(8)) <= 0.03
    assert rate >= 0.97


def test_sample_empty_sequences():
    assert sample_sufficiency(CONST_1, 0, 1, 50) == 0.0
    # At k = 0 the threshold is 0, which the empty union meets.
    assert sample_sufficiency(CONST_0, 0, 0, 10) == 1.0


def test_sample_constant_two():
    assert sample_sufficiency(CONST_2, 64, 4, 200, seed=3) >= 0.95


def test_sample_is_reproducible():
    a = sample_sufficiency(CONST_2, 6, 2, 100, seed="abc")
    assert a == sample_sufficiency(CONST_2, 6, 2, 100, seed="abc")


def test_sample_needs_trials():
    with pytest.raises(ValueError):
        sample_sufficiency(CONST_1, 4, 1, 0)


@pytest.mark.parametrize("c", [1, 2, 3])
def test_sample_rate_trend(c):
    # Averaged over seeds, longer sequences suffice at least as often.
    def mean(m):
        return sum(sample_sufficiency(CombinatorAssociate(Const(c)), m, 3, 100, seed=s) for s in range(5)) / 5

    rates = [mean(m) for m in (2, 8, 32)]
    assert all(b >= a - 0.02 for a, b in zip(rates, rates[1:]))
