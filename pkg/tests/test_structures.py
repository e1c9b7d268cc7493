from __future__ import annotations

from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from fanfun.fan import SpecialCover, theta_cont, verify_sff
from fanfun.functionals import (Add, Bit, CombinatorAssociate, Const, Fuel, IfPrefix, Xor, parse_path,
                                zeros_after)
from fanfun.kleene import S1, S2, S4, S7, const_bit_reader
from fanfun.structures import (DEFAULT_BUDGET, Indeterminate, TableRelation, build_code, check_code,
                               code_from_json, code_to_json, extend_theta, mu_value, mutate)

from .strategies import combinator_associates

FUEL = Fuel(max_depth=24, max_steps=50_000)
# g(0) + 1 and g(1) + 1: their covers give M1 = {0^ω, 10^ω, 110^ω}.
BIT0 = CombinatorAssociate(Add(Bit(0), Const(1)))
BIT1 = CombinatorAssociate(Add(Bit(1), Const(1)))


@pytest.fixture(scope="module")
def code():
    return build_code([BIT0, BIT1], fuel=FUEL)


def test_build_code_layout(code):
    assert code.f1[0] == zeros_after("")
    assert code.mu_index == 0
    assert code.f2[0] == tuple(mu_value(f) for f in code.f1)
    assert code.f1 == (zeros_after(""), zeros_after("1"), zeros_after("11"))
    assert code.f2 == ((0, 1, 2), (1, 2, 2), (1, 1, 2))
    assert len(code.f3) == 3


def test_mu_value():
    assert mu_value(parse_path("1101(1)")) == 2
    assert mu_value(parse_path("(1)")) == 0
    assert mu_value(parse_path("(0)")) == 0


def test_own_code_is_clean(code):
    report = check_code(code, DEFAULT_BUDGET, FUEL)
    assert report.clean, report.violations
    assert report.checked_budget == DEFAULT_BUDGET.describe()


def test_report_is_deterministic(code):
    assert check_code(code, DEFAULT_BUDGET, FUEL) == check_code(code, DEFAULT_BUDGET, FUEL)


def test_duplicate_member_is_reported(code):
    report = check_code(mutate(code, "1-1"), DEFAULT_BUDGET, FUEL)
    assert ("code-1-1", ("f1", 0, 1)) in report.violations


def test_denied_s2_is_reported(code):
    report = check_code(mutate(code, "s2"), DEFAULT_BUDGET, FUEL)
    assert "iv-d" in report.tags()
    assert any(t == "iv-d" and w[0].startswith("<2,") for t, w in report.violations)


@pytest.mark.parametrize("seed", range(3))
def test_second_value_is_reported(code, seed):
    report = check_code(mutate(code, "functional", seed=seed), DEFAULT_BUDGET, FUEL)
    assert "iv-a" in report.tags()


def test_unknown_mutation(code):
    with pytest.raises(ValueError):
        mutate(code, "nonsense")


def test_mu_row_checked(code):
    rows = (tuple(v + 1 for v in code.f2[0]),) + code.f2[1:]
    report = check_code(replace(code, f2=rows), DEFAULT_BUDGET, FUEL)
    assert "ii" in report.tags()


def test_cover_condition_checked(code):
    # Θ_M(F_1) replaced by the one-element list of 0^ω: [f̄F(f)] misses 1.
    f3 = (code.f3[0], code.f3[0]) + code.f3[2:]
    report = check_code(replace(code, f3=f3), DEFAULT_BUDGET, FUEL)
    assert ("iii", (1, "1")) in report.violations


def probed(code, *probes):
    return check_code(code, replace(DEFAULT_BUDGET, closure_probes=probes), FUEL)


def test_closure_of_m2(code):
    # g ↦ g(0) + 1 is a row of f2; the constant 1 is not.
    assert probed(code, ("iv-c", S4(const_bit_reader(0), S1()), (), ())).clean
    assert probed(code, ("iv-c", S2(1), (), ())).tags() == {"iv-c"}


def test_closure_of_m1(code):
    # b ↦ f1[1](b) is a member; b ↦ 1 is not.
    assert probed(code, ("iv-b", S7(), (1,), ())).clean
    assert probed(code, ("iv-b", S2(1), (), ())).tags() == {"iv-b"}


def test_table_relation_round_trip(code):
    table = TableRelation([(S2(3), (), (), 3)])
    c = replace(code, f4=table)
    back = code_from_json(code_to_json(c), FUEL)
    assert back.f4.holds(S2(3), (), (), 3)
    assert not back.f4.holds(S2(3), (), (), 4)


def test_json_round_trip(code):
    back = code_from_json(code_to_json(code), FUEL)
    assert code_to_json(back) == code_to_json(code)
    assert check_code(back, DEFAULT_BUDGET, FUEL).clean
    mutated = mutate(code, "functional", seed=1)
    again = code_from_json(code_to_json(mutated), FUEL)
    assert check_code(again, DEFAULT_BUDGET, FUEL) == check_code(mutated, DEFAULT_BUDGET, FUEL)


# ------------------------------------------------------------ extension


def test_extend_matches_coded_functional(code):
    cover = extend_theta(code, CombinatorAssociate(Add(Bit(0), Const(1))), FUEL)
    assert isinstance(cover, SpecialCover)
    assert cover.paths() == theta_cont(BIT0, FUEL).paths()
    assert verify_sff(cover, BIT0, FUEL)


def test_extend_falls_back_to_bar_search(code):
    F = CombinatorAssociate(Add(Bit(0), Const(2)))
    assert extend_theta(code, F, FUEL).entries == theta_cont(F, FUEL).entries


def test_extend_indeterminate(code):
    # Only 0^ω is tested, where both coded functionals give 1.
    F = CombinatorAssociate(Add(Xor(Bit(0), Bit(1)), Const(1)))
    res = extend_theta(code, F, FUEL, test_points=1, index_bound=3)
    assert isinstance(res, Indeterminate)
    assert res.candidates == (1, 2)


@settings(max_examples=25)
@given(combinator_associates(max_bit=3))
def test_extension_output_is_sound_when_values_agree(F):
    code = build_code([BIT0, BIT1, CombinatorAssociate(IfPrefix(zeros_after("1").prefix(1), Bit(1), Const(1)))],
                      fuel=FUEL)
    res = extend_theta(code, F, FUEL)
    if isinstance(res, SpecialCover):
        assert verify_sff(res, F, FUEL)


# Each check spends the full step budget on μ-searches without a witness.
@settings(max_examples=5)
@given(st.lists(combinator_associates(max_bit=3), min_size=1, max_size=3))
def test_built_codes_are_clean(assocs):
    code = build_code(assocs, fuel=FUEL)
    small = replace(DEFAULT_BUDGET, member_bound=2, number_bound=2)
    assert check_code(code, small, FUEL).clean
