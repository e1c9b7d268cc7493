"""The job-file grammar.

A spec is a sequence of lines ``name := expression``; ``#`` starts a
comment.  The expression's leading keyword selects its sort::

    G := bit(0) + 1                       functional (combinators)
    G := if 01 then 3 else bit(2)
    G := table {ε: 0}   G := table {0: 5, 00: 6}
    G := term <4, <2, 3>, <7>>            functional {e}(g)
    T := no-pattern 11 depth 8            tree (also full, empty, only-ones,
    T := nodes {ε, 0, 01}                       each with optional depth)
    f := path 01(0)                       path; head, optional period
    seq := paths [0, 1, 11(01)]
    C := cylinders [0, 10]
    A := order [2, 0, 1]                  finite order, increasing
    A := lazy reverse 64                  lazy order (also natural)
    Gamma := formula n = 0 or exists b in A: (b, n - 1) in X bound 3
    Z := {1, 2}
    E := <4, <2, 0>, <1>>                 Kleene index literal
    Psi := gauge 1/2*x + 1/4              dyadic gauge on [0, 1]

Every expression has a canonical rendering, and parsing a rendering gives
back an equal expression.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from ..atr import (AllInX, And, FiniteOrder, Formula, GammaSpec, InZ, LazyOrder, Not, NumIs, Or,
                   PairInX, SomeInX, Truth)
from ..cantor import EMPTY, BinaryTree, BitString, Cylinder, Dyadic
from ..errors import ParseError
from ..functionals import (Add, Bit, CombinatorAssociate, Const, Expr, IfPrefix, Max, Min, Mul,
                           Periodic, TableAssociate, Xor, parse_path)
from ..kleene import Index, from_tuple, render as render_index

DEFAULT_TREE_DEPTH = 16


# ---------------------------------------------------------------- AST nodes


@dataclass(frozen=True)
class TableExpr:
    rows: tuple[tuple[BitString, int], ...]

    def render(self) -> str:
        return "table {" + ", ".join(f"{s}: {v}" for s, v in self.rows) + "}"

    def elaborate(self):
        return TableAssociate(dict(self.rows))


@dataclass(frozen=True)
class CombinatorExpr:
    expr: Expr

    def render(self) -> str:
        return self.expr.render()

    def elaborate(self):
        return CombinatorAssociate(self.expr)


@dataclass(frozen=True)
class TermExpr:
    index: Index

    def render(self) -> str:
        return "term " + render_index(self.index)

    def elaborate(self, env=None, fuel=None):
        from ..functionals import DEFAULT_FUEL, associate_from_term
        from ..kleene import theta_env

        fuel = fuel or DEFAULT_FUEL
        return associate_from_term(self.index, env or theta_env(fuel), fuel)


@dataclass(frozen=True)
class TreeExpr:
    kind: str  # full | empty | only-ones | no-pattern | nodes
    depth: Optional[int] = None
    pattern: Optional[BitString] = None
    nodes: tuple[BitString, ...] = ()

    def render(self) -> str:
        head = self.kind
        if self.kind == "no-pattern":
            head += f" {self.pattern}"
        elif self.kind == "nodes":
            head += " {" + ", ".join(str(n) for n in self.nodes) + "}"
        return head if self.depth is None else f"{head} depth {self.depth}"

    def elaborate(self) -> BinaryTree:
        d = DEFAULT_TREE_DEPTH if self.depth is None else self.depth
        if self.kind == "full":
            return BinaryTree.full(d)
        if self.kind == "empty":
            return BinaryTree.empty(d)
        if self.kind == "only-ones":
            return BinaryTree.only_ones(d)
        if self.kind == "no-pattern":
            return BinaryTree.no_pattern(str(self.pattern), d)
        return BinaryTree.from_nodes(self.nodes, self.depth)


@dataclass(frozen=True)
class PathExpr:
    path: Periodic

    def render(self) -> str:
        return "path " + self.path.describe()

    def elaborate(self):
        return self.path


@dataclass(frozen=True)
class PathsExpr:
    paths: tuple[Periodic, ...]

    def render(self) -> str:
        return "paths [" + ", ".join(p.describe() for p in self.paths) + "]"

    def elaborate(self):
        return list(self.paths)


@dataclass(frozen=True)
class CylindersExpr:
    prefixes: tuple[BitString, ...]

    def render(self) -> str:
        return "cylinders [" + ", ".join(str(p) for p in self.prefixes) + "]"

    def elaborate(self):
        return [Cylinder(p) for p in self.prefixes]


@dataclass(frozen=True)
class OrderExpr:
    kind: str  # finite | reverse | natural
    elements: tuple[int, ...] = ()
    probe_bound: int = 0

    def render(self) -> str:
        if self.kind == "finite":
            return "order [" + ", ".join(map(str, self.elements)) + "]"
        return f"lazy {self.kind} {self.probe_bound}"

    def elaborate(self):
        if self.kind == "finite":
            return FiniteOrder(self.elements)
        if self.kind == "reverse":
            return LazyOrder.reverse(self.probe_bound)
        return LazyOrder.natural(self.probe_bound)


@dataclass(frozen=True)
class GammaExpr:
    spec: GammaSpec

    def render(self) -> str:
        return self.spec.render()

    def elaborate(self):
        return self.spec


@dataclass(frozen=True)
class SetExpr:
    items: tuple[int, ...]

    def render(self) -> str:
        return "{" + ", ".join(map(str, self.items)) + "}"

    def elaborate(self):
        return frozenset(self.items)


@dataclass(frozen=True)
class IndexExpr:
    index: Index

    def render(self) -> str:
        return render_index(self.index)

    def elaborate(self):
        return self.index


# gauges: small arithmetic over x with dyadic constants


class GaugeNode:
    prec = 100

    def __call__(self, x: Dyadic) -> Dyadic:
        return self.eval(x)

    def _wrap(self, child, tight=False):
        s = child.render()
        return f"({s})" if child.prec < self.prec or (tight and child.prec == self.prec) else s

    def __eq__(self, other):
        return type(self) is type(other) and self.__dict__ == other.__dict__

    def __hash__(self):
        return hash(self.render())


class GConst(GaugeNode):
    def __init__(self, value: Dyadic):
        self.value = value

    def eval(self, x):
        return self.value

    def render(self):
        return str(self.value)


class GVar(GaugeNode):
    def eval(self, x):
        return x

    def render(self):
        return "x"


class GBin(GaugeNode):
    OPS = {"+": (10, lambda a, b: a + b), "-": (10, lambda a, b: a - b), "*": (20, lambda a, b: a * b)}

    def __init__(self, op: str, left, right):
        self.op, self.left, self.right = op, left, right
        self.prec = self.OPS[op][0]

    def eval(self, x):
        return self.OPS[self.op][1](self.left.eval(x), self.right.eval(x))

    def render(self):
        return f"{self._wrap(self.left)}{'*' if self.op == '*' else f' {self.op} '}{self._wrap(self.right, True)}"


class GCall(GaugeNode):
    FNS = {"abs": 1, "min": 2, "max": 2}

    def __init__(self, name: str, args):
        self.name, self.args = name, tuple(args)

    def eval(self, x):
        vals = [a.eval(x) for a in self.args]
        if self.name == "abs":
            return -vals[0] if vals[0] < 0 else vals[0]
        return min(vals) if self.name == "min" else max(vals)

    def render(self):
        return f"{self.name}(" + ", ".join(a.render() for a in self.args) + ")"


@dataclass(frozen=True)
class GaugeExpr:
    body: GaugeNode

    def render(self) -> str:
        return "gauge " + self.body.render()

    def elaborate(self):
        return self.body


@dataclass(frozen=True)
class Definition:
    name: str
    sort: str
    expr: object
    line: int

    def render(self) -> str:
        return f"{self.name} := {self.expr.render()}"

    def elaborate(self):
        return self.expr.elaborate()


class Spec(dict):
    """Definitions by name, in source order."""

    def render(self) -> str:
        return "\n".join(d.render() for d in self.values()) + ("\n" if self else "")

    def of_sort(self, sort: str) -> list[Definition]:
        return [d for d in self.values() if d.sort == sort]


# ---------------------------------------------------------------- tokenizer

_TOKENS = re.compile(r"""
    (?P<ws>[ \t]+)
  | (?P<assign>:=)
  | (?P<num>\d+)
  | (?P<eps>ε)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z][A-Za-z0-9_]*)*)
  | (?P<punct>[()\[\]{}<>,:+\-*/=])
""", re.VERBOSE)


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(line: str, lineno: int) -> list[Tok]:
    out, pos = [], 0
    while pos < len(line):
        m = _TOKENS.match(line, pos)
        if not m:
            raise ParseError(lineno, pos + 1, "a token", line[pos])
        kind = m.lastgroup
        if kind != "ws":
            out.append(Tok(kind, m.group(), lineno, pos + 1))
        pos = m.end()
    out.append(Tok("end", "", lineno, len(line) + 1))
    return out


class _Parser:
    def __init__(self, toks: list[Tok]):
        self.toks = toks
        self.i = 0

    # -- primitives
    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def fail(self, expected: str):
        t = self.tok
        raise ParseError(t.line, t.col, expected, t.text or "end of line")

    def at(self, text: str) -> bool:
        return self.tok.kind != "end" and self.tok.text == text

    def eat(self, text: str) -> Tok:
        if not self.at(text):
            self.fail(repr(text))
        t = self.tok
        self.i += 1
        return t

    def maybe(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def number(self) -> int:
        if self.tok.kind != "num":
            self.fail("a number")
        t = self.tok
        self.i += 1
        return int(t.text)

    def bits(self, allow_empty: bool = True) -> BitString:
        t = self.tok
        if t.kind == "eps" and allow_empty:
            self.i += 1
            return EMPTY
        if t.kind != "num" or set(t.text) - {"0", "1"}:
            self.fail("a bit string")
        self.i += 1
        return BitString.parse(t.text)

    def listed(self, open_: str, close: str, item):
        self.eat(open_)
        out = []
        if not self.at(close):
            out.append(item())
            while self.maybe(","):
                out.append(item())
        self.eat(close)
        return out

    def done(self):
        if self.tok.kind != "end":
            self.fail("end of line")

    # -- functionals
    def expr(self) -> Expr:
        if self.maybe("if"):
            p = self.bits()
            self.eat("then")
            then = self.xor()
            self.eat("else")
            return IfPrefix(p, then, self.expr())
        return self.xor()

    def xor(self) -> Expr:
        e = self.add()
        while self.maybe("xor"):
            e = Xor(e, self.add())
        return e

    def add(self) -> Expr:
        e = self.mul()
        while self.maybe("+"):
            e = Add(e, self.mul())
        return e

    def mul(self) -> Expr:
        e = self.atom()
        while self.maybe("*"):
            e = Mul(e, self.atom())
        return e

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            return Const(self.number())
        if self.maybe("bit"):
            self.eat("(")
            i = self.number()
            self.eat(")")
            return Bit(i)
        if t.text in ("max", "min"):
            self.i += 1
            self.eat("(")
            a = self.expr()
            self.eat(",")
            b = self.expr()
            self.eat(")")
            return (Max if t.text == "max" else Min)(a, b)
        if self.maybe("("):
            e = self.expr()
            self.eat(")")
            return e
        self.fail("a functional expression (number, bit(i), max, min, if, parenthesis)")

    # -- paths
    def path(self) -> Periodic:
        head = EMPTY
        if self.tok.kind in ("num", "eps"):
            head = self.bits()
        if self.maybe("("):
            period = self.bits(allow_empty=False)
            self.eat(")")
            return parse_path(f"{''.join(map(str, head))}({''.join(map(str, period))})")
        return parse_path("".join(map(str, head)))

    # -- Kleene literals
    def index_item(self):
        if self.tok.kind == "num":
            return self.number()
        if self.at("<"):
            return tuple(self.listed("<", ">", self.index_item))
        if self.at("["):
            return tuple(self.listed("[", "]", self.number))
        self.fail("a number, index or permutation")

    def index(self) -> Index:
        t = self.tok
        lit = self.index_item()
        try:
            return from_tuple(lit)
        except Exception as exc:
            raise ParseError(t.line, t.col, "a well-formed Kleene index", str(lit)) from exc

    # -- Γ formulas
    def formula(self) -> Formula:
        f = self.f_and()
        while self.maybe("or"):
            f = Or(f, self.f_and())
        return f

    def f_and(self) -> Formula:
        f = self.f_not()
        while self.maybe("and"):
            f = And(f, self.f_not())
        return f

    def f_not(self) -> Formula:
        if self.maybe("not"):
            return Not(self.f_not())
        return self.f_atom()

    def nterm(self) -> int:
        self.eat("n")
        return self.number() if self.maybe("-") else 0

    def f_atom(self) -> Formula:
        if self.maybe("true"):
            return Truth(True)
        if self.maybe("false"):
            return Truth(False)
        if self.at("n"):
            if self.peek().text == "=":
                self.eat("n")
                self.eat("=")
                return NumIs(self.number())
            off = self.nterm()
            self.eat("in")
            self.eat("Z")
            return InZ(off)
        if self.at("exists") or self.at("forall"):
            q = self.tok.text
            self.i += 1
            for w in ("b", "in", "A", ":", "(", "b", ","):
                self.eat(w)
            off = self.nterm()
            for w in (")", "in", "X"):
                self.eat(w)
            return (SomeInX if q == "exists" else AllInX)(off)
        if self.at("(") and self.peek().kind == "num" and self.peek(2).text == ",":
            self.eat("(")
            b = self.number()
            self.eat(",")
            off = self.nterm()
            for w in (")", "in", "X"):
                self.eat(w)
            return PairInX(b, off)
        if self.maybe("("):
            f = self.formula()
            self.eat(")")
            return f
        self.fail("a formula atom")

    # -- gauges
    def g_add(self) -> GaugeNode:
        g = self.g_mul()
        while self.at("+") or self.at("-"):
            op = self.tok.text
            self.i += 1
            g = GBin(op, g, self.g_mul())
        return g

    def g_mul(self) -> GaugeNode:
        g = self.g_atom()
        while self.at("*") or self.at("/"):
            if self.maybe("*"):
                g = GBin("*", g, self.g_atom())
                continue
            self.eat("/")
            dt = self.tok
            d = self.number()
            if d == 0 or d & (d - 1):
                raise ParseError(dt.line, dt.col, "a power-of-two divisor", dt.text)
            g = GBin("*", g, GConst(Dyadic(1, d.bit_length() - 1)))
        return g

    def g_atom(self) -> GaugeNode:
        t = self.tok
        if t.kind == "num":
            n = self.number()
            if self.maybe("/"):
                dt = self.tok
                d = self.number()
                if d == 0 or d & (d - 1):
                    raise ParseError(dt.line, dt.col, "a power-of-two denominator", dt.text)
                return GConst(Dyadic(n, d.bit_length() - 1))
            return GConst(Dyadic(n))
        if self.maybe("x"):
            return GVar()
        if t.text in GCall.FNS:
            self.i += 1
            args = self.listed("(", ")", self.g_add)
            if len(args) != GCall.FNS[t.text]:
                raise ParseError(t.line, t.col, f"{GCall.FNS[t.text]} argument(s) for {t.text}", str(len(args)))
            return GCall(t.text, args)
        if self.maybe("-"):
            return GBin("-", GConst(Dyadic(0)), self.g_atom())
        if self.maybe("("):
            g = self.g_add()
            self.eat(")")
            return g
        self.fail("a gauge term (dyadic, x, abs, min, max, parenthesis)")

    # -- definitions
    def depth_suffix(self) -> Optional[int]:
        return self.number() if self.maybe("depth") else None

    def rhs(self) -> tuple[str, object]:
        t = self.tok
        kw = t.text if t.kind == "name" else None
        if kw == "table":
            self.i += 1

            def row():
                s = self.bits()
                self.eat(":")
                return s, self.number()

            return "functional", TableExpr(tuple(self.listed("{", "}", row)))
        if kw == "term":
            self.i += 1
            return "functional", TermExpr(self.index())
        if kw in ("full", "empty", "only-ones"):
            self.i += 1
            return "tree", TreeExpr(kw, self.depth_suffix())
        if kw == "no-pattern":
            self.i += 1
            p = self.bits(allow_empty=False)
            return "tree", TreeExpr(kw, self.depth_suffix(), pattern=p)
        if kw == "nodes":
            self.i += 1
            nodes = tuple(self.listed("{", "}", self.bits))
            tree = TreeExpr(kw, self.depth_suffix(), nodes=nodes)
            try:
                tree.elaborate()
            except ValueError as exc:
                raise ParseError(t.line, t.col, "a prefix-closed node list", str(exc)) from None
            return "tree", tree
        if kw == "path":
            self.i += 1
            return "path", PathExpr(self.path())
        if kw == "paths":
            self.i += 1
            return "paths", PathsExpr(tuple(self.listed("[", "]", self.path)))
        if kw == "cylinders":
            self.i += 1
            return "cylinders", CylindersExpr(tuple(self.listed("[", "]", self.bits)))
        if kw == "order":
            self.i += 1
            elems = tuple(self.listed("[", "]", self.number))
            if len(set(elems)) != len(elems):
                raise ParseError(t.line, t.col, "distinct order elements", str(list(elems)))
            return "order", OrderExpr("finite", elems)
        if kw == "lazy":
            self.i += 1
            if not (self.at("reverse") or self.at("natural")):
                self.fail("'reverse' or 'natural'")
            kind = self.tok.text
            self.i += 1
            bound = self.number()
            if bound <= 0:
                self.fail("a positive probe bound")
            return "order", OrderExpr(kind, probe_bound=bound)
        if kw == "formula":
            self.i += 1
            f = self.formula()
            self.eat("bound")
            return "gamma", GammaExpr(GammaSpec(f, self.number()))
        if kw == "gauge":
            self.i += 1
            return "gauge", GaugeExpr(self.g_add())
        if t.text == "{":
            return "set", SetExpr(tuple(self.listed("{", "}", self.number)))
        if t.text == "<":
            return "index", IndexExpr(self.index())
        return "functional", CombinatorExpr(self.expr())


def parse_spec(text: str) -> Spec:
    """Parse a job spec; ParseError carries line, column and the expected token."""
    spec = Spec()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        p = _Parser(_tokenize(line, lineno))
        if p.tok.kind != "name":
            p.fail("a definition name")
        name = p.tok.text
        p.i += 1
        if p.tok.kind != "assign":
            p.fail("':='")
        p.i += 1
        sort, expr = p.rhs()
        p.done()
        if name in spec:
            raise ParseError(lineno, 1, f"a fresh name (not {name!r} again)", name)
        spec[name] = Definition(name, sort, expr, lineno)
    return spec


def parse_expr(text: str) -> Definition:
    """Parse a single right-hand side (for tests and one-off use)."""
    spec = parse_spec(f"_ := {text}")
    return spec["_"]
