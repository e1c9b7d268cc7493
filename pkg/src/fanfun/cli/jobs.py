"""Job dispatch and self-verifying certificates.

A certificate is a JSON object with the canonical inputs, the outputs, a
verification verdict and a version stamp.  Dyadics are written as
``[numerator, exponent]``.  :func:`verify_certificate` recomputes the
verdict from the certificate alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .. import __version__
from ..atr import FixedSet, StageSet, atr_realiser, check_H, iterate_H, verify_descending
from ..cantor import BitString, Cylinder, Dyadic, all_strings, covers_cantor, union_measure
from ..errors import DepthExceeded, Diverged, FanError, FuelExhausted, NoCommit
from ..fan import SpecialCover, hbu_subcover, muc_cont, verify_hbu, verify_sff
from ..functionals import Fuel, apply, commit_bar, parse_path
from ..kleene import Env, lambda_env, outcome, theta_env
from ..verdict import Verdict
from ..weakfan import lambda_cont, sample_sufficiency, suffices
from .grammar import Spec, parse_spec

JOB_KINDS = ("cover", "weakcover", "measure", "eval", "atr", "muc", "hbu",
             "check-structure", "suffices", "sample")


@dataclass(frozen=True)
class JobRequest:
    kind: str
    spec_text: str
    fuel: Fuel = Fuel()
    k: int = 1
    seed: int = 0
    descent_len: int = 20
    numbers: tuple[int, ...] = ()
    oracle: str = "theta"
    m: int = 16
    trials: int = 200
    code_json: Optional[str] = None
    names: dict = field(default_factory=dict)


def _dy(d: Dyadic) -> list[int]:
    return [d.numerator, d.exponent]


def _pick(spec: Spec, sort: str, names: tuple[str, ...], override: Optional[str] = None):
    if override:
        d = spec.get(override)
        if d is None or d.sort != sort:
            raise KeyError(f"no {sort} named {override!r}")
        return d
    for n in names:
        if n in spec and spec[n].sort == sort:
            return spec[n]
    found = spec.of_sort(sort)
    if len(found) == 1:
        return found[0]
    raise KeyError(f"spec needs a {sort} definition (looked for {', '.join(names)})")


def _functional(spec, req, names=("G", "F", "Y")):
    d = _pick(spec, "functional", names, req.names.get("functional"))
    if d.expr.__class__.__name__ == "TermExpr":
        return d, d.expr.elaborate(fuel=req.fuel)
    return d, d.elaborate()


def _entries_json(entries):
    return [[g.describe(), n] for g, n in entries]


def _verdict_json(v: Verdict) -> dict:
    return {"ok": bool(v.ok), "reason": v.reason}


def _inputs(req: JobRequest, spec: Spec, used) -> dict:
    return {
        "spec": "\n".join(d.render() for d in used),
        "fuel": [req.fuel.max_depth, req.fuel.max_steps],
        **_params(req),
    }


def _params(req: JobRequest) -> dict:
    p = {}
    if req.kind in ("weakcover", "suffices", "sample"):
        p["k"] = req.k
    if req.kind == "sample":
        p.update(seed=req.seed, m=req.m, trials=req.trials)
    if req.kind == "atr":
        p["descent_len"] = req.descent_len
    if req.kind == "eval":
        p.update(numbers=list(req.numbers), oracle=req.oracle)
    if req.kind == "check-structure":
        p["code"] = json.loads(req.code_json) if req.code_json else None
    return p


# ---------------------------------------------------------------- jobs


def _cover(req, spec):
    from ..fan import theta_cont

    d, G = _functional(spec, req)
    cover = theta_cont(G, req.fuel)
    out = {"entries": _entries_json(cover.entries),
           "cylinders": [str(c.prefix) for c in cover.cylinders()]}
    return [d], out, verify_sff(cover, G, req.fuel)


def _weakcover(req, spec):
    d, G = _functional(spec, req)
    wc = lambda_cont(G, req.k, req.fuel)
    out = {"entries": _entries_json(wc.entries), "k": req.k, "measure": _dy(wc.measure),
           "cylinders": [str(c.prefix) for c in wc.cylinders()]}
    return [d], out, _check_weak(wc.entries, G, req.k, req.fuel)


def _check_weak(entries, G, k, fuel) -> Verdict:
    for i, (g, n) in enumerate(entries):
        if apply(G, g, fuel) != n:
            return Verdict.no(f"value mismatch at entry {i}", i)
    m = union_measure(Cylinder(g.prefix(n)) for g, n in entries)
    if m < Dyadic.threshold(k):
        return Verdict.no(f"measure {m} below 1 - 2^-{k}", _dy(m))
    return Verdict.yes()


def _measure(req, spec):
    d = _pick(spec, "cylinders", ("C",), req.names.get("cylinders"))
    cs = d.elaborate()
    m = union_measure(cs)
    cov = covers_cantor(cs)
    out = {"measure": _dy(m), "covers": bool(cov),
           "witness": None if cov else str(cov.witness)}
    return [d], out, Verdict.yes()


def _eval(req, spec):
    d = _pick(spec, "index", ("E", "e"), req.names.get("index"))
    used = [d]
    gs = ()
    if "gs" in spec and spec["gs"].sort == "paths":
        used.append(spec["gs"])
        gs = tuple(spec["gs"].elaborate())
    if req.oracle == "theta":
        env = theta_env(req.fuel, g_args=gs, b_args=req.numbers)
    elif req.oracle == "lambda":
        env = lambda_env(req.fuel, g_args=gs, b_args=req.numbers)
    else:
        env = Env(g_args=gs, b_args=req.numbers)
    res = outcome(d.elaborate(), env, req.fuel)
    out = {"outcome": res.kind, "value": res.value, "detail": res.detail}
    if res.kind == "diverged":
        raise _Fuel(used, out, f"evaluation diverged ({res.detail})")
    v = Verdict.yes() if res.kind == "value" else Verdict.no(f"evaluation error {res.detail}")
    return used, out, v


def _atr_parts(spec, req):
    dA = _pick(spec, "order", ("A",), req.names.get("order"))
    dG = _pick(spec, "gamma", ("Gamma", "G"), req.names.get("gamma"))
    used = [dA, dG]
    Z = frozenset()
    if "Z" in spec and spec["Z"].sort == "set":
        used.append(spec["Z"])
        Z = spec["Z"].elaborate()
    return used, dA.elaborate(), dG.elaborate(), Z


def _atr(req, spec):
    used, order, gamma, Z = _atr_parts(spec, req)
    res = atr_realiser(order, gamma, Z, req.fuel, req.descent_len)
    if isinstance(res, FixedSet):
        out = {"outcome": "fixed", "Y": sorted([a, n] for a, n in res.Y.pairs)}
        v = check_H(res.Y, order, gamma, Z)
        if v and not order.lazy:
            direct = iterate_H(order, gamma, Z)
            out["matches_iteration"] = direct == res.Y
            if direct != res.Y:
                v = Verdict.no("realiser and direct iteration disagree")
    else:
        out = {"outcome": "descending", "h": list(res.h)}
        v = verify_descending(res.h, order)
    return used, out, v


def _muc(req, spec):
    d, Y = _functional(spec, req)
    n = muc_cont(Y, req.fuel)
    return [d], {"modulus": n}, _check_modulus(Y, n, req.fuel)


def _check_modulus(Y, n: int, fuel: Fuel) -> Verdict:
    """Every length-n string fixes Y's value, and n is least with that."""
    bar = commit_bar(Y, fuel.max_depth)

    def values_below(s: BitString) -> set:
        return {v for t, v in bar if s.is_prefix_of(t) or t.is_prefix_of(s)}

    for s in all_strings(n):
        if len(values_below(s)) > 1:
            return Verdict.no(f"{s} does not determine the value", str(s))
    if n > 0 and all(len(values_below(s)) <= 1 for s in all_strings(n - 1)):
        return Verdict.no(f"{n - 1} bits already suffice", n - 1)
    return Verdict.yes()


def _hbu(req, spec):
    d = _pick(spec, "gauge", ("Psi", "psi"), req.names.get("gauge"))
    intervals = hbu_subcover(d.elaborate(), req.fuel)
    out = {"intervals": [[_dy(c), _dy(r)] for c, r in intervals]}
    return [d], out, _check_gauge(intervals, d.elaborate())


def _check_gauge(intervals, psi) -> Verdict:
    for c, r in intervals:
        if psi(c) != r:
            return Verdict.no(f"radius at {c} is not Ψ({c})", _dy(c))
    return verify_hbu(intervals)


def _structure(req, spec):
    from ..structures import build_code, check_code, code_from_json, code_to_json

    used = []
    if req.code_json:
        code = code_from_json(req.code_json, req.fuel)
    else:
        used = spec.of_sort("functional")
        if not used:
            raise KeyError("check-structure needs --code or functional definitions to build from")
        code = build_code([d.elaborate() for d in used], fuel=req.fuel)
    report = check_code(code, fuel=req.fuel)
    out = {"violations": [[t, _plain(w)] for t, w in report.violations],
           "budget": report.checked_budget,
           "code": code_to_json(code)}
    v = Verdict.yes() if report.clean else Verdict.no(f"{len(report.violations)} violation(s)")
    return used, out, v


def _plain(x):
    if isinstance(x, (tuple, list)):
        return [_plain(y) for y in x]
    if isinstance(x, (int, str)) or x is None:
        return x
    return str(x)


def _suffices(req, spec):
    d, F = _functional(spec, req)
    ds = _pick(spec, "paths", ("seq",), req.names.get("paths"))
    res = suffices(ds.elaborate(), F, req.k, req.fuel)
    out = {"verdict": res.kind, "index": res.index,
           "measure": None if res.measure is None else _dy(res.measure)}
    return [d, ds], out, Verdict.yes()


def _sample(req, spec):
    d, F = _functional(spec, req)
    rate = sample_sufficiency(F, req.m, req.k, req.trials, req.seed, fuel=req.fuel)
    hits = round(rate * req.trials)
    return [d], {"hits": hits, "trials": req.trials}, Verdict.yes()


_JOBS = {"cover": _cover, "weakcover": _weakcover, "measure": _measure, "eval": _eval, "atr": _atr,
         "muc": _muc, "hbu": _hbu, "check-structure": _structure, "suffices": _suffices, "sample": _sample}


class _Fuel(Exception):
    def __init__(self, used, out, message):
        super().__init__(message)
        self.used, self.out = used, out


@dataclass
class JobResult:
    certificate: dict
    status: str  # ok | verification | fuel

    def dumps(self) -> str:
        return dumps(self.certificate)


def dumps(cert: dict) -> str:
    return json.dumps(cert, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def run_job(req: JobRequest) -> JobResult:
    """Run one job.  ParseError and KeyError (missing definitions) escape;
    module errors come back as a certificate with status ``fuel``
    (resource limits) or ``verification``."""
    if req.kind not in _JOBS:
        raise ValueError(f"unknown job kind {req.kind!r}")
    spec = parse_spec(req.spec_text)
    status = "ok"
    try:
        used, out, verdict = _JOBS[req.kind](req, spec)
    except _Fuel as exc:
        used, out, verdict, status = exc.used, exc.out, Verdict.no(str(exc)), "fuel"
    except FanError as exc:
        resource = isinstance(exc, (FuelExhausted, NoCommit, Diverged, DepthExceeded))
        used, out, verdict = list(spec.values()), {"error": type(exc).__name__}, Verdict.no(str(exc))
        status = "fuel" if resource else "verification"
    if status == "ok" and not verdict:
        status = "verification"
    cert = {
        "version": __version__,
        "job": req.kind,
        "inputs": _inputs(req, spec, used),
        "outputs": out,
        "verdict": _verdict_json(verdict),
        "status": status,
    }
    return JobResult(cert, status)


# ---------------------------------------------------------------- re-verification


def verify_certificate(cert) -> Verdict:
    """Recompute a certificate's verdict from its own payload."""
    if isinstance(cert, str):
        cert = json.loads(cert)
    kind = cert["job"]
    inp, out = cert["inputs"], cert["outputs"]
    fuel = Fuel(*inp["fuel"])
    if "error" in out:
        v = Verdict.no(cert["verdict"]["reason"])
    else:
        v = _reverify(kind, parse_spec(inp["spec"]), inp, out, fuel)
    if bool(v) != cert["verdict"]["ok"]:
        return Verdict.no(f"recorded verdict {cert['verdict']['ok']} but re-verification gives {bool(v)}: {v.reason}")
    return Verdict(True, "reproduced")


def _entries(rows):
    return tuple((parse_path(p), n) for p, n in rows)


def _rerun(kind, spec, inp, out, fuel) -> Verdict:
    """Recompute a job whose outputs are plain values and compare them."""
    req = JobRequest(kind, inp["spec"], fuel, k=inp.get("k", 1), seed=inp.get("seed", 0),
                     numbers=tuple(inp.get("numbers", ())), oracle=inp.get("oracle", "theta"),
                     m=inp.get("m", 16), trials=inp.get("trials", 200))
    try:
        _, fresh, v = _JOBS[kind](req, spec)
    except _Fuel as exc:
        fresh, v = exc.out, Verdict.no(str(exc))
    if fresh != out:
        return Verdict.no("recomputed outputs differ")
    return v


def _reverify(kind, spec, inp, out, fuel) -> Verdict:
    req = JobRequest(kind, inp["spec"], fuel)
    if kind == "cover":
        _, G = _functional(spec, req)
        return verify_sff(SpecialCover(_entries(out["entries"])), G, fuel)
    if kind == "weakcover":
        _, G = _functional(spec, req)
        v = _check_weak(_entries(out["entries"]), G, inp["k"], fuel)
        m = union_measure(Cylinder(g.prefix(n)) for g, n in _entries(out["entries"]))
        if v and _dy(m) != out["measure"]:
            return Verdict.no("recorded measure differs")
        return v
    if kind == "measure":
        cs = _pick(spec, "cylinders", ("C",)).elaborate()
        if _dy(union_measure(cs)) != out["measure"] or bool(covers_cantor(cs)) != out["covers"]:
            return Verdict.no("measure or cover flag differs")
        return Verdict.yes()
    if kind in ("eval", "suffices", "sample"):
        return _rerun(kind, spec, inp, out, fuel)
    if kind == "atr":
        used, order, gamma, Z = _atr_parts(spec, req)
        if out["outcome"] == "fixed":
            Y = StageSet(frozenset(tuple(p) for p in out["Y"]))
            v = check_H(Y, order, gamma, Z)
            if v and not order.lazy and iterate_H(order, gamma, Z) != Y:
                return Verdict.no("realiser and direct iteration disagree")
            return v
        return verify_descending(out["h"], order)
    if kind == "muc":
        _, Y = _functional(spec, req)
        return _check_modulus(Y, out["modulus"], fuel)
    if kind == "hbu":
        psi = _pick(spec, "gauge", ("Psi", "psi")).elaborate()
        return _check_gauge([(Dyadic(*c), Dyadic(*r)) for c, r in out["intervals"]], psi)
    if kind == "check-structure":
        from ..structures import check_code, code_from_json

        report = check_code(code_from_json(out["code"], fuel), fuel=fuel)
        return Verdict.yes() if report.clean else Verdict.no(f"{len(report.violations)} violation(s)")
    return Verdict.yes()
