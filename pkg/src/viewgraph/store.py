"""Immutable property graphs loaded from typed CSV files.

Node file header: ``id:uint,<prop>:<type>,...``; edge file header:
``src:uint,dst:uint,<prop>:<type>,...`` with ``type`` in ``string|int|bool``.
External node IDs are remapped to dense internal IDs in file order.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping, Sequence

from .errors import DanglingEdge, MissingFile, SchemaError, ValueParseError

PROP_TYPES = ("string", "int", "bool")
UINT32_MAX = 2**32 - 1
INT64_MIN, INT64_MAX = -(2**63), 2**63 - 1


@dataclass(frozen=True)
class NodeRecord:
    nid: int
    props: Mapping[str, object]


@dataclass(frozen=True)
class EdgeRecord:
    eid: int
    src: int
    dst: int
    props: Mapping[str, object]


@dataclass(frozen=True)
class PropertyGraph:
    nodes: tuple[NodeRecord, ...]
    edges: tuple[EdgeRecord, ...]
    node_schema: Mapping[str, str]
    edge_schema: Mapping[str, str]
    external_ids: tuple[int, ...] = field(default=())

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def node_prop(self, nid: int, name: str) -> object:
        return self.nodes[nid].props[name]


def edge_stream(g: PropertyGraph) -> Iterator[EdgeRecord]:
    """Edges in edge-ID order."""
    return iter(g.edges)


def parse_value(raw: str, typ: str) -> object:
    if typ == "string":
        return raw
    if typ == "int":
        v = int(raw.strip())
        if not INT64_MIN <= v <= INT64_MAX:
            raise ValueError(f"{raw!r} out of 64-bit range")
        return v
    if typ == "bool":
        s = raw.strip().lower()
        if s in ("true", "1"):
            return True
        if s in ("false", "0"):
            return False
        raise ValueError(f"{raw!r} is not a bool")
    if typ == "uint":
        v = int(raw.strip())
        if not 0 <= v <= UINT32_MAX:
            raise ValueError(f"{raw!r} is not a 32-bit unsigned int")
        return v
    raise ValueError(f"unknown type {typ!r}")


def format_value(v: object) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _rows(path: Path) -> Iterator[tuple[int, list[str]]]:
    """Yield (line number, cells), skipping ``#`` comments and blank lines."""
    if not path.is_file():
        raise MissingFile(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [(i + 1, ln) for i, ln in enumerate(fh)]
    kept = [(n, ln) for n, ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.reader(io.StringIO("".join(ln for _, ln in kept)))
    for (n, _), cells in zip(kept, reader):
        yield n, cells


def _parse_header(cells: list[str], fixed: Sequence[str], path: Path) -> dict[str, str]:
    cols: list[tuple[str, str]] = []
    for cell in cells:
        name, sep, typ = cell.strip().partition(":")
        if not sep or not name:
            raise SchemaError(f"{path}: header column {cell!r} lacks a name:type annotation")
        cols.append((name, typ))
    for i, want in enumerate(fixed):
        if i >= len(cols) or cols[i] != (want, "uint"):
            raise SchemaError(f"{path}: column {i + 1} must be '{want}:uint'")
    schema: dict[str, str] = {}
    for name, typ in cols[len(fixed):]:
        if typ not in PROP_TYPES:
            raise SchemaError(f"{path}: column {name!r} has unknown type {typ!r}")
        if name in schema or name in fixed:
            raise SchemaError(f"{path}: duplicate column {name!r}")
        schema[name] = typ
    return schema


def _parse_row(path: Path, lineno: int, cells: list[str], header: list[tuple[str, str]]) -> list[object]:
    if len(cells) != len(header):
        raise ValueParseError(
            f"{path}:{lineno}: expected {len(header)} columns, got {len(cells)}"
        )
    out = []
    for cell, (name, typ) in zip(cells, header):
        try:
            out.append(parse_value(cell, typ))
        except ValueError as exc:
            raise ValueParseError(f"{path}:{lineno}: column {name!r}: {exc}") from None
    return out


def load_graph(node_file: str | Path, edge_file: str | Path) -> PropertyGraph:
    node_file, edge_file = Path(node_file), Path(edge_file)
    node_rows = _rows(node_file)
    try:
        _, header_cells = next(node_rows)
    except StopIteration:
        raise SchemaError(f"{node_file}: missing header") from None
    node_schema = _parse_header(header_cells, ("id",), node_file)
    node_cols = [("id", "uint")] + list(node_schema.items())

    ext_to_int: dict[int, int] = {}
    nodes: list[NodeRecord] = []
    external: list[int] = []
    for lineno, cells in node_rows:
        vals = _parse_row(node_file, lineno, cells, node_cols)
        ext = vals[0]
        if ext in ext_to_int:
            raise SchemaError(f"{node_file}:{lineno}: duplicate node id {ext}")
        nid = len(nodes)
        ext_to_int[ext] = nid
        external.append(ext)
        nodes.append(NodeRecord(nid, dict(zip(node_schema, vals[1:]))))

    edge_rows = _rows(edge_file)
    try:
        _, header_cells = next(edge_rows)
    except StopIteration:
        raise SchemaError(f"{edge_file}: missing header") from None
    edge_schema = _parse_header(header_cells, ("src", "dst"), edge_file)
    edge_cols = [("src", "uint"), ("dst", "uint")] + list(edge_schema.items())

    edges: list[EdgeRecord] = []
    for lineno, cells in edge_rows:
        vals = _parse_row(edge_file, lineno, cells, edge_cols)
        ends = []
        for ext in vals[:2]:
            if ext not in ext_to_int:
                raise DanglingEdge(f"{edge_file}:{lineno}: edge references unknown node {ext}")
            ends.append(ext_to_int[ext])
        edges.append(EdgeRecord(len(edges), ends[0], ends[1], dict(zip(edge_schema, vals[2:]))))

    return PropertyGraph(tuple(nodes), tuple(edges), node_schema, edge_schema, tuple(external))


def from_records(
    node_props: Sequence[Mapping[str, object]],
    edges: Sequence[tuple[int, int, Mapping[str, object]]],
    node_schema: Mapping[str, str] | None = None,
    edge_schema: Mapping[str, str] | None = None,
) -> PropertyGraph:
    """Build a graph in memory; schemas default to the types of the first record."""

    def infer(rec: Mapping[str, object] | None) -> dict[str, str]:
        if not rec:
            return {}
        return {
            k: "bool" if isinstance(v, bool) else "int" if isinstance(v, int) else "string"
            for k, v in rec.items()
        }

    node_schema = dict(node_schema) if node_schema is not None else infer(node_props[0] if node_props else None)
    edge_schema = dict(edge_schema) if edge_schema is not None else infer(edges[0][2] if edges else None)
    n = len(node_props)
    nodes = tuple(NodeRecord(i, dict(p)) for i, p in enumerate(node_props))
    for i, rec in enumerate(nodes):
        if set(rec.props) != set(node_schema):
            raise SchemaError(f"node {i} props {sorted(rec.props)} do not match schema")
    out = []
    for eid, (s, d, p) in enumerate(edges):
        if not (0 <= s < n and 0 <= d < n):
            raise DanglingEdge(f"edge {eid} references a node outside 0..{n - 1}")
        if set(p) != set(edge_schema):
            raise SchemaError(f"edge {eid} props {sorted(p)} do not match schema")
        out.append(EdgeRecord(eid, s, d, dict(p)))
    return PropertyGraph(nodes, tuple(out), node_schema, edge_schema, tuple(range(n)))


def dump_graph(g: PropertyGraph, node_file: str | Path, edge_file: str | Path) -> None:
    ext = g.external_ids or tuple(range(g.num_nodes))
    with open(node_file, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id:uint"] + [f"{k}:{t}" for k, t in g.node_schema.items()])
        for rec in g.nodes:
            w.writerow([ext[rec.nid]] + [format_value(rec.props[k]) for k in g.node_schema])
    with open(edge_file, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["src:uint", "dst:uint"] + [f"{k}:{t}" for k, t in g.edge_schema.items()])
        for e in g.edges:
            w.writerow([ext[e.src], ext[e.dst]] + [format_value(e.props[k]) for k in g.edge_schema])


def write_idmap(g: PropertyGraph, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("internal,external\n")
        for nid, ext in enumerate(g.external_ids):
            fh.write(f"{nid},{ext}\n")
