"""GVDL: filter views, view collections and aggregate views.

Grammar (keywords case-insensitive, identifiers case-sensitive)::

    stmt        := view | collection | aggview
    view        := "create view" NAME "on" NAME "edges where" pred
    collection  := "create view collection" NAME "on" NAME
                   "[" NAME ":" pred "]" { "," "[" NAME ":" pred "]" }
    aggview     := "create view" NAME "on" NAME nodesClause [edgesClause]
    nodesClause := "nodes group by" (NAME {"," NAME} | "[" "(" pred ")" {"," "(" pred ")"} "]")
                   ["aggregate" aggs]
    edgesClause := "edges aggregate" aggs
    aggs        := agg {"," agg}
    agg         := [NAME ":"] ("count" "(" "*" ")" | "sum" "(" NAME ")")
    pred        := and {"or" and};  and := not {"and" not};  not := "not" not | atom
    atom        := "(" pred ")" | operand [cmp operand]

Operands are ``src.NAME``, ``dst.NAME``, ``ID`` (the edge ID), a bare NAME
(an edge property), or an int / bool / string literal. A bare operand used as
a predicate must be boolean and is read as ``operand = true``.
"""
from __future__ import annotations

import operator
import re
from dataclasses import dataclass
from typing import Callable, Union

from .errors import GVDLSyntaxError, TypeMismatch, UnknownProperty, UnknownStatement
from .store import EdgeRecord, NodeRecord, PropertyGraph

# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class PropRef:
    scope: str  # "src" | "dst" | "prop" | "id"
    name: str = ""


@dataclass(frozen=True)
class Literal:
    value: Union[int, bool, str]


Operand = Union[PropRef, Literal]


@dataclass(frozen=True)
class Comparison:
    lhs: Operand
    op: str
    rhs: Operand


@dataclass(frozen=True)
class And:
    items: tuple


@dataclass(frozen=True)
class Or:
    items: tuple


@dataclass(frozen=True)
class Not:
    item: object


Predicate = Union[Comparison, And, Or, Not]


def conj(*items: Predicate) -> Predicate:
    flat: list = []
    for it in items:
        flat.extend(it.items if isinstance(it, And) else (it,))
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def disj(*items: Predicate) -> Predicate:
    flat: list = []
    for it in items:
        flat.extend(it.items if isinstance(it, Or) else (it,))
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


@dataclass(frozen=True)
class ViewDef:
    name: str
    graph: str
    predicate: Predicate


@dataclass(frozen=True)
class ViewCollectionDef:
    name: str
    graph: str
    views: tuple  # of (view name, predicate)

    @property
    def view_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.views)


@dataclass(frozen=True)
class Aggregate:
    out_name: str
    func: str  # "count" | "sum"
    prop: str | None = None


@dataclass(frozen=True)
class AggregateViewDef:
    name: str
    graph: str
    group_by: tuple[str, ...] | None
    group_predicates: tuple | None
    node_aggregates: tuple[Aggregate, ...]
    edge_aggregates: tuple[Aggregate, ...]


Statement = Union[ViewDef, ViewCollectionDef, AggregateViewDef]

# ---------------------------------------------------------------------------
# lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<int>-?\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z0-9_]+)*)
  | (?P<str>'(?:[^']|'')*'|`(?:[^'])*'|"(?:[^"])*")
  | (?P<op><=|>=|!=|<>|[=<>≤≥≠])
  | (?P<punct>[\[\](),:.*;])
    """,
    re.VERBOSE,
)

_OPS = {"=": "=", "!=": "!=", "<>": "!=", "≠": "!=", "<": "<", "<=": "<=",
        "≤": "<=", ">": ">", ">=": ">=", "≥": ">="}


@dataclass(frozen=True)
class Token:
    kind: str  # name | int | str | op | punct | eof
    text: str
    value: object
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise GVDLSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind, raw = m.lastgroup, m.group()
        col = pos - line_start + 1
        if kind == "ws":
            nl = raw.count("\n")
            if nl:
                line += nl
                line_start = pos + raw.rfind("\n") + 1
        elif kind == "int":
            toks.append(Token("int", raw, int(raw), line, col))
        elif kind == "str":
            body = raw[1:-1]
            if raw[0] == "'":
                body = body.replace("''", "'")
            toks.append(Token("str", raw, body, line, col))
        elif kind == "op":
            toks.append(Token("op", raw, _OPS[raw], line, col))
        else:
            toks.append(Token(kind, raw, raw, line, col))
        pos = m.end()
    toks.append(Token("eof", "", None, line, pos - line_start + 1))
    return toks


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        tok = self.toks[self.i]
        self.i = min(self.i + 1, len(self.toks) - 1)
        return tok

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.peek()
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise GVDLSyntaxError(f"{msg}, found {found}", tok.line, tok.col)

    def is_kw(self, word: str, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok.kind == "name" and tok.text.lower() == word

    def kw(self, *words: str) -> None:
        for w in words:
            if not self.is_kw(w):
                self.error(f"expected {w!r}")
            self.next()

    def punct(self, ch: str) -> None:
        tok = self.peek()
        if tok.kind != "punct" or tok.text != ch:
            self.error(f"expected {ch!r}")
        self.next()

    def at_punct(self, ch: str) -> bool:
        tok = self.peek()
        return tok.kind == "punct" and tok.text == ch

    def name(self, what: str = "a name") -> str:
        tok = self.peek()
        if tok.kind != "name":
            self.error(f"expected {what}")
        self.next()
        return tok.text

    # statements ------------------------------------------------------------

    def script(self) -> list[Statement]:
        out = []
        while self.peek().kind != "eof":
            out.append(self.statement())
            while self.at_punct(";"):
                self.next()
        return out

    def statement(self) -> Statement:
        if not self.is_kw("create"):
            tok = self.peek()
            raise UnknownStatement(f"statement must start with 'create' (line {tok.line}, column {tok.col})")
        self.next()
        self.kw("view")
        if self.is_kw("collection") and self.peek(1).kind == "name" and self.is_kw("on", 2):
            self.next()
            return self.collection()
        name = self.name("a view name")
        self.kw("on")
        graph = self.name("a graph name")
        if self.is_kw("edges"):
            self.next()
            self.kw("where")
            return ViewDef(name, graph, self.predicate())
        if self.is_kw("nodes"):
            return self.aggview(name, graph)
        self.error("expected 'edges where' or 'nodes group by'")

    def collection(self) -> ViewCollectionDef:
        name = self.name("a collection name")
        self.kw("on")
        graph = self.name("a graph name")
        views = [self.collection_member(set())]
        while self.at_punct(","):
            self.next()
            views.append(self.collection_member({n for n, _ in views}))
        return ViewCollectionDef(name, graph, tuple(views))

    def collection_member(self, taken: set) -> tuple:
        self.punct("[")
        tok = self.peek()
        vname = self.name("a view name")
        if vname in taken:
            raise GVDLSyntaxError(f"duplicate view name {vname!r} in collection", tok.line, tok.col)
        self.punct(":")
        pred = self.predicate()
        self.punct("]")
        return (vname, pred)

    def aggview(self, name: str, graph: str) -> AggregateViewDef:
        self.kw("nodes", "group", "by")
        group_by = preds = None
        if self.at_punct("["):
            self.next()
            items = [self.group_predicate()]
            while self.at_punct(","):
                self.next()
                items.append(self.group_predicate())
            self.punct("]")
            preds = tuple(items)
        else:
            props = [self.name("a property name")]
            while self.at_punct(","):
                self.next()
                props.append(self.name("a property name"))
            group_by = tuple(props)
        node_aggs: tuple = ()
        edge_aggs: tuple | None = None
        if self.is_kw("aggregate"):
            self.next()
            node_aggs = self.aggregates()
        if self.is_kw("edges"):
            self.next()
            self.kw("aggregate")
            edge_aggs = self.aggregates()
        if edge_aggs is None:
            # without an edges clause, super-edges get the count(*) items of the nodes clause
            edge_aggs = tuple(a for a in node_aggs if a.func == "count")
        return AggregateViewDef(name, graph, group_by, preds, node_aggs, edge_aggs)

    def group_predicate(self):
        self.punct("(")
        p = self.predicate()
        self.punct(")")
        return p

    def aggregates(self) -> tuple[Aggregate, ...]:
        out = [self.aggregate()]
        while self.at_punct(","):
            self.next()
            out.append(self.aggregate())
        return tuple(out)

    def aggregate(self) -> Aggregate:
        out_name = None
        if self.peek().kind == "name" and self.peek(1).kind == "punct" and self.peek(1).text == ":":
            out_name = self.next().text
            self.next()
        if self.is_kw("count"):
            self.next()
            self.punct("(")
            self.punct("*")
            self.punct(")")
            return Aggregate(out_name or "count", "count")
        if self.is_kw("sum"):
            self.next()
            self.punct("(")
            prop = self.name("a property name")
            self.punct(")")
            return Aggregate(out_name or f"sum_{prop}", "sum", prop)
        self.error("expected count(*) or sum(NAME)")

    # predicates --------------------------------------------------------------

    def predicate(self) -> Predicate:
        items = [self.conjunction()]
        while self.is_kw("or"):
            self.next()
            items.append(self.conjunction())
        return disj(*items)

    def conjunction(self) -> Predicate:
        items = [self.negation()]
        while self.is_kw("and"):
            self.next()
            items.append(self.negation())
        return conj(*items)

    def negation(self) -> Predicate:
        if self.is_kw("not"):
            self.next()
            return Not(self.negation())
        return self.atom()

    def atom(self) -> Predicate:
        if self.at_punct("("):
            self.next()
            p = self.predicate()
            self.punct(")")
            return p
        lhs = self.operand()
        if self.peek().kind == "op":
            op = self.next().value
            return Comparison(lhs, op, self.operand())
        return Comparison(lhs, "=", Literal(True))

    def operand(self) -> Operand:
        tok = self.peek()
        if tok.kind == "int":
            self.next()
            return Literal(tok.value)
        if tok.kind == "str":
            self.next()
            return Literal(tok.value)
        if tok.kind == "name":
            low = tok.text.lower()
            if low in ("and", "or", "not"):
                self.error("expected an operand")
            self.next()
            if low in ("true", "false"):
                return Literal(low == "true")
            if low in ("src", "dst") and self.at_punct("."):
                self.next()
                return PropRef(low, self.name("a property name"))
            if low == "id":
                return PropRef("id")
            return PropRef("prop", tok.text)
        self.error("expected an operand")


def parse_script(text: str) -> list[Statement]:
    return _Parser(text).script()


def parse(text: str) -> Statement:
    p = _Parser(text)
    if p.peek().kind == "eof":
        p.error("expected a statement")
    stmt = p.statement()
    while p.at_punct(";"):
        p.next()
    if p.peek().kind != "eof":
        p.error("expected end of statement")
    return stmt


def parse_predicate(text: str) -> Predicate:
    p = _Parser(text)
    pred = p.predicate()
    if p.peek().kind != "eof":
        p.error("expected end of predicate")
    return pred


# ---------------------------------------------------------------------------
# pretty printer

_PREC = {Or: 1, And: 2, Not: 3, Comparison: 4}


def format_operand(o: Operand) -> str:
    if isinstance(o, PropRef):
        if o.scope == "id":
            return "ID"
        if o.scope in ("src", "dst"):
            return f"{o.scope}.{o.name}"
        return o.name
    v = o.value
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    return "'" + v.replace("'", "''") + "'"


def format_predicate(p: Predicate, min_prec: int = 0) -> str:
    prec = _PREC[type(p)]
    if isinstance(p, Comparison):
        s = f"{format_operand(p.lhs)} {p.op} {format_operand(p.rhs)}"
    elif isinstance(p, Not):
        s = "not " + format_predicate(p.item, 3)
    elif isinstance(p, And):
        s = " and ".join(format_predicate(x, 3) for x in p.items)
    else:
        s = " or ".join(format_predicate(x, 2) for x in p.items)
    return f"({s})" if prec < min_prec else s


def _format_aggs(aggs) -> str:
    return ", ".join(
        f"{a.out_name}: count(*)" if a.func == "count" else f"{a.out_name}: sum({a.prop})" for a in aggs
    )


def format_statement(stmt: Statement) -> str:
    if isinstance(stmt, ViewDef):
        return f"create view {stmt.name} on {stmt.graph} edges where {format_predicate(stmt.predicate)}"
    if isinstance(stmt, ViewCollectionDef):
        members = ",\n    ".join(f"[{n}: {format_predicate(p)}]" for n, p in stmt.views)
        return f"create view collection {stmt.name} on {stmt.graph}\n    {members}"
    if stmt.group_by is not None:
        groups = ", ".join(stmt.group_by)
    else:
        groups = "[" + ", ".join(f"({format_predicate(p)})" for p in stmt.group_predicates) + "]"
    s = f"create view {stmt.name} on {stmt.graph}\nnodes group by {groups}"
    if stmt.node_aggregates:
        s += f" aggregate {_format_aggs(stmt.node_aggregates)}"
    if stmt.edge_aggregates:
        s += f"\nedges aggregate {_format_aggs(stmt.edge_aggregates)}"
    return s


# ---------------------------------------------------------------------------
# binding and evaluation

_CMP = {"=": operator.eq, "!=": operator.ne, "<": operator.lt, "<=": operator.le,
        ">": operator.gt, ">=": operator.ge}


def _literal_type(v: object) -> str:
    if isinstance(v, bool):
        return "bool"
    if isinstance(v, int):
        return "int"
    return "string"


@dataclass(frozen=True)
class BoundPredicate:
    """A predicate type-checked against a graph schema.

    ``target`` is ``"edge"`` (called with an EdgeRecord) or ``"node"``
    (called with a NodeRecord).
    """

    ast: Predicate
    target: str
    fn: Callable

    def __call__(self, rec, g: PropertyGraph) -> bool:
        return self.fn(rec, g)


def _bind_operand(o: Operand, g: PropertyGraph, target: str) -> tuple[Callable, str]:
    if isinstance(o, Literal):
        v = o.value
        return (lambda r, g: v), _literal_type(v)
    if o.scope == "id":
        if target == "edge":
            return (lambda r, g: r.eid), "int"
        return (lambda r, g: r.nid), "int"
    name = o.name
    if target == "node":
        if o.scope != "prop":
            raise UnknownProperty(f"{o.scope}.{name}")
        if name not in g.node_schema:
            raise UnknownProperty(name)
        return (lambda r, g: r.props[name]), g.node_schema[name]
    if o.scope == "src":
        if name not in g.node_schema:
            raise UnknownProperty(name)
        return (lambda r, g: g.nodes[r.src].props[name]), g.node_schema[name]
    if o.scope == "dst":
        if name not in g.node_schema:
            raise UnknownProperty(name)
        return (lambda r, g: g.nodes[r.dst].props[name]), g.node_schema[name]
    if name not in g.edge_schema:
        raise UnknownProperty(name)
    return (lambda r, g: r.props[name]), g.edge_schema[name]


def _compile(p: Predicate, g: PropertyGraph, target: str) -> Callable:
    if isinstance(p, Comparison):
        lf, lt = _bind_operand(p.lhs, g, target)
        rf, rt = _bind_operand(p.rhs, g, target)
        if lt != rt:
            raise TypeMismatch(
                f"cannot compare {format_operand(p.lhs)} ({lt}) with {format_operand(p.rhs)} ({rt})"
            )
        if lt == "bool" and p.op not in ("=", "!="):
            raise TypeMismatch(f"ordering operator {p.op!r} on bool operands")
        cmp = _CMP[p.op]
        return lambda r, g: cmp(lf(r, g), rf(r, g))
    if isinstance(p, Not):
        f = _compile(p.item, g, target)
        return lambda r, g: not f(r, g)
    fs = [_compile(x, g, target) for x in p.items]
    if isinstance(p, And):
        return lambda r, g: all(f(r, g) for f in fs)
    return lambda r, g: any(f(r, g) for f in fs)


def bind_predicate(p: Predicate, g: PropertyGraph, target: str = "edge") -> BoundPredicate:
    return BoundPredicate(p, target, _compile(p, g, target))


@dataclass(frozen=True)
class BoundView:
    definition: ViewDef
    predicate: BoundPredicate


@dataclass(frozen=True)
class BoundCollection:
    definition: ViewCollectionDef
    predicates: tuple[BoundPredicate, ...]

    @property
    def view_names(self) -> tuple[str, ...]:
        return self.definition.view_names


@dataclass(frozen=True)
class BoundAggregate:
    definition: AggregateViewDef
    group_predicates: tuple[BoundPredicate, ...] | None


BoundStatement = Union[BoundView, BoundCollection, BoundAggregate]


def _check_aggs(aggs, schema) -> None:
    for a in aggs:
        if a.func == "sum":
            if a.prop not in schema:
                raise UnknownProperty(a.prop)
            if schema[a.prop] != "int":
                raise TypeMismatch(f"sum({a.prop}) needs an int property, not {schema[a.prop]}")


def bind(stmt: Statement, g: PropertyGraph) -> BoundStatement:
    if isinstance(stmt, ViewDef):
        return BoundView(stmt, bind_predicate(stmt.predicate, g))
    if isinstance(stmt, ViewCollectionDef):
        return BoundCollection(stmt, tuple(bind_predicate(p, g) for _, p in stmt.views))
    if isinstance(stmt, AggregateViewDef):
        preds = None
        if stmt.group_by is not None:
            for prop in stmt.group_by:
                if prop not in g.node_schema:
                    raise UnknownProperty(prop)
        else:
            preds = tuple(bind_predicate(p, g, "node") for p in stmt.group_predicates)
        _check_aggs(stmt.node_aggregates, g.node_schema)
        _check_aggs(stmt.edge_aggregates, g.edge_schema)
        return BoundAggregate(stmt, preds)
    raise UnknownStatement(f"cannot bind {type(stmt).__name__}")


def eval_predicate(p: BoundPredicate, e: EdgeRecord | NodeRecord, g: PropertyGraph) -> bool:
    return bool(p.fn(e, g))
