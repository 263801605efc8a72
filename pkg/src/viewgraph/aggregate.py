"""Aggregate views: nodes grouped into super-nodes, edges summed into super-edges."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Mapping

from .gvdl import AggregateViewDef, BoundAggregate, bind
from .store import PropertyGraph, from_records


@dataclass(frozen=True)
class SummaryGraph:
    group_keys: tuple  # index -> group key (property tuple, or predicate position)
    key_names: tuple[str, ...]  # property names of a key; ("group",) for predicate lists
    node_group: Mapping[int, int]  # base node -> group index, grouped nodes only
    super_nodes: Mapping[int, Mapping[str, int]]
    super_edges: Mapping[tuple[int, int], Mapping[str, int]]

    def index(self, key) -> int:
        """Group index of ``key``; a scalar stands for a one-element key."""
        return self.group_keys.index(key if isinstance(key, tuple) else (key,))

    def node(self, key) -> Mapping[str, int]:
        return self.super_nodes[self.index(key)]

    def edge(self, src_key, dst_key) -> Mapping[str, int]:
        return self.super_edges[(self.index(src_key), self.index(dst_key))]

    def to_property_graph(self) -> PropertyGraph:
        nodes = []
        for gi, key in enumerate(self.group_keys):
            props = dict(zip(self.key_names, key))
            props.update(self.super_nodes[gi])
            nodes.append(props)
        edges = [(a, b, dict(p)) for (a, b), p in sorted(self.super_edges.items())]
        node_schema = {name: _type_of(nodes[0][name]) for name in nodes[0]} if nodes else None
        edge_schema = {name: "int" for name in edges[0][2]} if edges else None
        return from_records(nodes, edges, node_schema, edge_schema)


def _type_of(v) -> str:
    if isinstance(v, bool):
        return "bool"
    return "int" if isinstance(v, int) else "string"


def _sort_key(key: tuple) -> tuple:
    # mixed-type keys sort by (type name, value) so the order is total
    return tuple((type(x).__name__, x) for x in key)


def _aggregate(aggs, items, props_of) -> dict[str, int]:
    out = {}
    for a in aggs:
        if a.func == "count":
            out[a.out_name] = len(items)
        else:
            out[a.out_name] = sum(props_of(x)[a.prop] for x in items)
    return out


def materialize_aggregate(g: PropertyGraph, view: AggregateViewDef | BoundAggregate,
                          symmetric: bool = False) -> SummaryGraph:
    """Group nodes and bucket edges by ``(group(src), group(dst))``.

    Nodes that match no group, and every edge touching them, are left out.
    With ``symmetric`` the buckets ignore edge direction.
    """
    bound = view if isinstance(view, BoundAggregate) else bind(view, g)
    d = bound.definition
    raw: dict[int, tuple] = {}
    if d.group_by is not None:
        for n in g.nodes:
            raw[n.nid] = tuple(n.props[p] for p in d.group_by)
        key_names = tuple(d.group_by)
    else:
        for n in g.nodes:
            for i, p in enumerate(bound.group_predicates):
                if p(n, g):
                    raw[n.nid] = (i,)
                    break
        key_names = ("group",)
    keys = tuple(sorted(set(raw.values()), key=_sort_key))
    index = {k: i for i, k in enumerate(keys)}
    node_group = {nid: index[k] for nid, k in raw.items()}

    members: dict[int, list[int]] = defaultdict(list)
    for nid, gi in node_group.items():
        members[gi].append(nid)
    buckets: dict[tuple[int, int], list[int]] = defaultdict(list)
    for e in g.edges:
        if e.src in node_group and e.dst in node_group:
            a, b = node_group[e.src], node_group[e.dst]
            if symmetric and a > b:
                a, b = b, a
            buckets[(a, b)].append(e.eid)

    super_nodes = {gi: _aggregate(d.node_aggregates, members[gi], lambda nid: g.nodes[nid].props)
                   for gi in range(len(keys))}
    super_edges = {ab: _aggregate(d.edge_aggregates, eids, lambda eid: g.edges[eid].props)
                   for ab, eids in sorted(buckets.items())}
    return SummaryGraph(keys, key_names, node_group, super_nodes, super_edges)
