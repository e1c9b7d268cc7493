from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fanfun.atr import GammaSpec, NumIs, Or, SomeInX
from fanfun.cantor import BitString
from fanfun.cli.grammar import CombinatorExpr, CylindersExpr, OrderExpr, TreeExpr, parse_expr, parse_spec
from fanfun.cli.jobs import JobRequest, run_job, verify_certificate
from fanfun.cli.main import EXIT_FUEL, EXIT_OK, EXIT_PARSE, EXIT_VERIFY, main
from fanfun.errors import ParseError
from fanfun.functionals import Add, Bit, Const

from .strategies import bitstrings, combinators

SUCCESSOR = GammaSpec(Or(NumIs(0), SomeInX(1)), 3)
ATR_SPEC = f"A := order [0, 1, 2]\nGamma := {SUCCESSOR.render()}\nZ := {{}}"


# ---------------------------------------------------------------- grammar


def test_combinator_definition():
    d = parse_expr("bit(0) + 1")
    assert d.sort == "functional"
    assert d.expr == CombinatorExpr(Add(Bit(0), Const(1)))


def test_tree_definition():
    d = parse_expr("no-pattern 11")
    assert d.sort == "tree"
    assert d.expr == TreeExpr("no-pattern", pattern=BitString("11"))


def test_unfinished_call_reports_expected_token():
    with pytest.raises(ParseError) as info:
        parse_spec("G := bit(")
    err = info.value
    assert err.line == 1
    assert err.expected and err.column > 0


def test_duplicate_name_rejected():
    with pytest.raises(ParseError):
        parse_spec("G := 1\nG := 2")


def test_comments_and_blank_lines():
    spec = parse_spec("# header\n\nG := 2   # constant\n")
    assert list(spec) == ["G"]
    assert spec["G"].line == 3


def test_gamma_round_trip():
    d = parse_expr(SUCCESSOR.render())
    assert d.sort == "gamma"
    assert d.expr.spec == SUCCESSOR


@given(combinators(max_bit=8, depth=4))
def test_combinator_render_parse_round_trip(e):
    assert parse_expr(e.render()).expr == CombinatorExpr(e)


@given(st.lists(bitstrings, max_size=5))
def test_cylinders_round_trip(prefixes):
    expr = CylindersExpr(tuple(prefixes))
    assert parse_expr(expr.render()).expr == expr


@given(st.lists(st.integers(0, 30), unique=True, max_size=6))
def test_order_round_trip(elements):
    expr = OrderExpr("finite", tuple(elements))
    assert parse_expr(expr.render()).expr == expr


# ---------------------------------------------------------------- jobs


def test_cover_job_on_constant_two():
    r = run_job(JobRequest("cover", "G := 2"))
    assert r.status == "ok"
    assert r.certificate["verdict"]["ok"]
    assert r.certificate["outputs"]["cylinders"] == ["00", "01", "10", "11"]


def test_weakcover_measure_is_an_integer_pair():
    r = run_job(JobRequest("weakcover", "G := 2", k=1))
    assert r.status == "ok"
    assert r.certificate["outputs"]["measure"] == [1, 1]


def test_atr_job_on_three_stage_instance():
    r = run_job(JobRequest("atr", ATR_SPEC))
    out = r.certificate["outputs"]
    assert r.status == "ok" and out["outcome"] == "fixed"
    assert out["Y"] == [[0, 0], [1, 0], [1, 1], [2, 0], [2, 1], [2, 2]]
    assert out["matches_iteration"]


def test_measure_job():
    out = run_job(JobRequest("measure", "C := cylinders [0, 10]")).certificate["outputs"]
    assert out == {"measure": [3, 2], "covers": False, "witness": "11"}


def test_eval_job():
    out = run_job(JobRequest("eval", "E := <1>", numbers=(4,))).certificate["outputs"]
    assert out["outcome"] == "value" and out["value"] == 5


def test_resource_error_is_fuel_status():
    r = run_job(JobRequest("muc", "Y := table {0: 1}"))
    assert r.status == "fuel"
    assert r.certificate["outputs"] == {"error": "FuelExhausted"}


def test_non_resource_error_is_verification_status():
    r = run_job(JobRequest("hbu", "Psi := gauge x - 1/2"))
    assert r.status == "verification"


def test_missing_definition_raises_key_error():
    with pytest.raises(KeyError):
        run_job(JobRequest("cover", "T := full"))


# ---------------------------------------------------------------- certificates

CERT_JOBS = [
    JobRequest("cover", "G := bit(1) + bit(0)"),
    JobRequest("weakcover", "G := max(bit(2), 1)", k=3),
    JobRequest("measure", "C := cylinders [0, 10, 11]"),
    JobRequest("eval", "E := <1>", numbers=(7,)),
    JobRequest("atr", ATR_SPEC),
    JobRequest("muc", "Y := bit(2) + bit(0)"),
    JobRequest("hbu", "Psi := gauge 1/4"),
    JobRequest("suffices", "F := 2\nseq := paths [(0), 1(0), (1)]", k=1),
    JobRequest("sample", "F := 1", k=2, m=8, trials=20),
    JobRequest("muc", "Y := table {0: 1}"),
    JobRequest("eval", "E := <1>"),
]


@pytest.mark.parametrize("req", CERT_JOBS, ids=lambda r: r.kind)
def test_certificates_reproduce(req):
    r = run_job(req)
    assert verify_certificate(r.dumps()), r.certificate


@pytest.mark.parametrize("req", CERT_JOBS, ids=lambda r: r.kind)
def test_certificates_are_byte_identical(req):
    assert run_job(req).dumps() == run_job(req).dumps()


def test_certificates_have_no_floats():
    def walk(x):
        if isinstance(x, dict):
            for v in x.values():
                walk(v)
        elif isinstance(x, list):
            for v in x:
                walk(v)
        else:
            assert not isinstance(x, float)

    for req in CERT_JOBS:
        walk(json.loads(run_job(req).dumps()))


def tamper(cert: dict, path: tuple, value) -> str:
    node = cert
    for key in path[:-1]:
        node = node[key]
    node[path[-1]] = value
    return json.dumps(cert)


def test_tampered_cover_is_rejected():
    cert = run_job(JobRequest("cover", "G := 2")).certificate
    assert not verify_certificate(tamper(cert, ("outputs", "entries"), [["(0)", 2], ["1(0)", 2]]))


def test_tampered_measure_is_rejected():
    cert = run_job(JobRequest("weakcover", "G := 2", k=1)).certificate
    assert not verify_certificate(tamper(cert, ("outputs", "measure"), [3, 2]))


def test_tampered_eval_value_is_rejected():
    cert = run_job(JobRequest("eval", "E := <1>", numbers=(4,))).certificate
    assert not verify_certificate(tamper(cert, ("outputs", "value"), 6))


def test_tampered_atr_set_is_rejected():
    cert = run_job(JobRequest("atr", ATR_SPEC)).certificate
    assert not verify_certificate(tamper(cert, ("outputs", "Y"), [[0, 0], [1, 0]]))


def test_flipped_verdict_is_rejected():
    cert = run_job(JobRequest("muc", "Y := bit(2)")).certificate
    assert not verify_certificate(tamper(cert, ("verdict", "ok"), False))


# ---------------------------------------------------------------- command line


def test_exit_ok(capsys):
    assert main(["cover", "-e", "G := 2"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["status"] == "ok"


def test_exit_parse(capsys):
    assert main(["cover", "-e", "G := bit("]) == EXIT_PARSE
    assert "parse error" in capsys.readouterr().err


def test_exit_missing_definition(capsys):
    assert main(["cover", "-e", "T := full"]) == EXIT_PARSE


def test_exit_fuel(capsys):
    assert main(["muc", "-e", "Y := table {0: 1}", "--fuel-depth", "8"]) == EXIT_FUEL


def test_exit_verification(capsys):
    assert main(["hbu", "-e", "Psi := gauge x - 1/2"]) == EXIT_VERIFY


def test_spec_file_out_file_and_verify(tmp_path, capsys):
    spec = tmp_path / "job.fan"
    spec.write_text("G := bit(0) + 1\n")
    out = tmp_path / "cert.json"
    assert main(["cover", str(spec), "--out", str(out)]) == EXIT_OK
    assert main(["verify", str(out)]) == EXIT_OK
    assert "reproduced" in capsys.readouterr().out
    cert = json.loads(out.read_text())
    cert["verdict"]["ok"] = False
    out.write_text(json.dumps(cert))
    assert main(["verify", str(out)]) == EXIT_VERIFY


def test_cli_output_is_deterministic(capsys):
    args = ["sample", "-e", "F := 2", "--m", "16", "--k", "2", "--trials", "30", "--seed", "7"]
    main(args)
    first = capsys.readouterr().out
    main(args)
    assert capsys.readouterr().out == first
