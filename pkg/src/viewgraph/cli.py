"""Command line: ``viewgraph {load,create,run,gen,stats}``.

State lives in a workspace directory (``$VIEWGRAPH_HOME``, default
``./viewgraph-ws``) with ``graphs/``, ``collections/``, ``views/`` and
``runs/`` subdirectories and a ``manifest.json`` index. Exit codes: 0 ok,
2 user error, 3 internal invariant violation.
"""
from __future__ import annotations

import argparse
import json
import os
import shutil
import sys
import tempfile
from contextlib import contextmanager
from pathlib import Path

import numpy as np
from filelock import FileLock, Timeout

from . import generators as gen
from .aggregate import materialize_aggregate
from .analytics import ALGORITHMS, AnalyticsSpec, as_result, validate
from .bench import run_benchmark
from .engine import accumulate
from .errors import InvariantViolation, NameExists, UnknownName, UnknownSource, UserError
from .gvdl import AggregateViewDef, ViewCollectionDef, ViewDef, bind, parse_script
from .materialize import EdgeBooleanMatrix, compute_eds, read_eds, write_eds
from .ordering import OrderingReport
from .pipeline import MaterializedCollection, materialize_collection
from .store import dump_graph, load_graph

ENV_HOME = "VIEWGRAPH_HOME"
KINDS = ("graphs", "collections", "views", "runs")


class Workspace:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        for k in KINDS:
            (self.root / k).mkdir(exist_ok=True)
        self.manifest_path = self.root / "manifest.json"

    @contextmanager
    def locked(self):
        lock = FileLock(str(self.root / ".lock"))
        try:
            lock.acquire(timeout=0)
        except Timeout:
            raise UserError(f"workspace {self.root} is in use by another command") from None
        try:
            yield self
        finally:
            lock.release()

    def manifest(self) -> dict:
        if not self.manifest_path.exists():
            return {k: {} for k in KINDS}
        data = json.loads(self.manifest_path.read_text())
        for k in KINDS:
            data.setdefault(k, {})
        return data

    def save_manifest(self, data: dict) -> None:
        tmp = self.manifest_path.with_suffix(".tmp")
        tmp.write_text(json.dumps(data, indent=2, sort_keys=True))
        os.replace(tmp, self.manifest_path)

    def check_free(self, name: str) -> None:
        m = self.manifest()
        for kind in ("graphs", "collections", "views"):
            if name in m[kind]:
                raise NameExists(f"{name!r} is already registered in {kind}")

    def install(self, kind: str, name: str, build, entry: dict) -> Path:
        """Build into a scratch directory, then move it in and register it.

        Nothing is left behind if ``build`` raises.
        """
        dest = self.root / kind / name
        with tempfile.TemporaryDirectory(dir=self.root) as tmp:
            build(Path(tmp))
            if dest.exists():
                shutil.rmtree(dest)
            shutil.copytree(tmp, dest)
        m = self.manifest()
        m[kind][name] = entry
        self.save_manifest(m)
        return dest

    def graph(self, name: str):
        m = self.manifest()
        if name not in m["graphs"]:
            raise UnknownName(f"no graph named {name!r}")
        d = self.root / "graphs" / name
        return load_graph(d / "nodes.csv", d / "edges.csv")


def _workspace(args) -> Workspace:
    return Workspace(args.workspace or os.environ.get(ENV_HOME, "viewgraph-ws"))


# ---------------------------------------------------------------------------
# commands


def cmd_load(args) -> int:
    ws = _workspace(args)
    with ws.locked():
        ws.check_free(args.name)
        g = load_graph(args.nodes, args.edges)
        ws.install("graphs", args.name, lambda d: dump_graph(g, d / "nodes.csv", d / "edges.csv"),
                   {"nodes": g.num_nodes, "edges": g.num_edges, "source": "csv"})
    print(f"loaded graph {args.name}: |V|={g.num_nodes} |E|={g.num_edges}")
    return 0


def _create_collection(ws: Workspace, stmt: ViewCollectionDef, text: str, args) -> None:
    g = ws.graph(stmt.graph)
    mc = materialize_collection(g, stmt, args.ordering, args.partitions, args.threads)

    def build(d: Path) -> None:
        np.save(d / "ebm.npy", mc.ebm.bits)
        write_eds(mc.eds, d / "eds.csv", stmt.name)
        (d / "definition.gvdl").write_text(text)

    ws.install("collections", stmt.name, build, {
        "graph": stmt.graph, "views": list(stmt.view_names), "order": list(mc.eds.ordered_names),
        "ordering": args.ordering, "num_diffs": mc.num_diffs, "cct_ms": round(mc.seconds * 1000, 3),
        "ordering_ms": round(mc.ordering.seconds * 1000, 3), "ds_default": mc.ordering.ds_default,
    })
    print(f"created collection {stmt.name} on {stmt.graph}: {mc.ebm.k} views, order {','.join(mc.eds.ordered_names)}")
    print(f"#diffs = {mc.num_diffs}")
    print(f"CCT = {mc.seconds * 1000:.3f} ms (ordering {mc.ordering.seconds * 1000:.3f} ms)")


def _create_view(ws: Workspace, stmt: ViewDef, text: str) -> None:
    g = ws.graph(stmt.graph)
    bound = bind(stmt, g)
    eids = [e.eid for e in g.edges if bound.predicate(e, g)]

    def build(d: Path) -> None:
        (d / "edges.txt").write_text("".join(f"{e}\n" for e in eids))
        (d / "definition.gvdl").write_text(text)

    ws.install("views", stmt.name, build, {"graph": stmt.graph, "edges": len(eids)})
    print(f"created view {stmt.name} on {stmt.graph}: {len(eids)} edges")


def _create_aggregate(ws: Workspace, stmt: AggregateViewDef, text: str) -> None:
    g = ws.graph(stmt.graph)
    sg = materialize_aggregate(g, stmt, symmetric=False)
    pg = sg.to_property_graph()

    def build(d: Path) -> None:
        dump_graph(pg, d / "nodes.csv", d / "edges.csv")
        (d / "definition.gvdl").write_text(text)

    ws.install("graphs", stmt.name, build, {"nodes": pg.num_nodes, "edges": pg.num_edges,
                                            "source": f"aggregate of {stmt.graph}"})
    print(f"created aggregate view {stmt.name}: {pg.num_nodes} super-nodes, {pg.num_edges} super-edges")
    for n in pg.nodes:
        print("  node", ", ".join(f"{k}={v}" for k, v in n.props.items()))
    for e in pg.edges:
        print(f"  edge {e.src}->{e.dst}", ", ".join(f"{k}={v}" for k, v in e.props.items()))


def cmd_create(args) -> int:
    text = Path(args.gvdl).read_text() if args.gvdl != "-" else sys.stdin.read()
    stmts = parse_script(text)
    ws = _workspace(args)
    with ws.locked():
        names = [stmt.name for stmt in stmts]
        if len(set(names)) != len(names):
            raise NameExists("a script defines the same name twice")
        for stmt in stmts:
            ws.check_free(stmt.name)
            bind(stmt, ws.graph(stmt.graph))  # fail before anything is installed
        for stmt in stmts:
            if isinstance(stmt, ViewCollectionDef):
                _create_collection(ws, stmt, text, args)
            elif isinstance(stmt, ViewDef):
                _create_view(ws, stmt, text)
            else:
                _create_aggregate(ws, stmt, text)
    return 0


def _parse_pairs(text: str | None) -> tuple[tuple[int, int], ...]:
    if not text:
        return ()
    out = []
    for item in text.split(","):
        a, sep, b = item.partition(":")
        if not sep:
            raise UserError(f"pair {item!r} must look like SRC:DST")
        out.append((int(a), int(b)))
    return tuple(out)


def _load_target(ws: Workspace, name: str):
    """Graph plus a materialized collection for a collection or single view name."""
    m = ws.manifest()
    if name in m["collections"]:
        entry = m["collections"][name]
        g = ws.graph(entry["graph"])
        d = ws.root / "collections" / name
        eds = read_eds(d / "eds.csv", entry["views"])
        bits = np.load(d / "ebm.npy")
        ebm = EdgeBooleanMatrix(bits, tuple(entry["views"]))
        report = OrderingReport(eds.order, entry.get("ds_default", eds.total), eds.total,
                                entry.get("ordering_ms", 0.0) / 1000, entry.get("ordering", "?"))
        defn = ViewCollectionDef(name, entry["graph"], tuple((v, None) for v in entry["views"]))
        return g, MaterializedCollection(defn, ebm, eds, report, entry.get("cct_ms", 0.0) / 1000)
    if name in m["views"]:
        entry = m["views"][name]
        g = ws.graph(entry["graph"])
        eids = [int(x) for x in (ws.root / "views" / name / "edges.txt").read_text().split()]
        bits = np.zeros((g.num_edges, 1), dtype=bool)
        bits[eids, 0] = True
        ebm = EdgeBooleanMatrix(bits, (name,))
        eds = compute_eds(ebm, (0,))
        defn = ViewCollectionDef(name, entry["graph"], ((name, None),))
        return g, MaterializedCollection(defn, ebm, eds, OrderingReport((0,), eds.total, eds.total, 0.0, "default"), 0.0)
    raise UnknownName(f"no collection or view named {name!r}")


def _fmt_key(k) -> str:
    return f"{k[0]}:{k[1]}" if isinstance(k, tuple) else str(k)


def cmd_run(args) -> int:
    ws = _workspace(args)
    with ws.locked():
        g, mc = _load_target(ws, args.collection)
        ext = g.external_ids or tuple(range(g.num_nodes))
        to_int = {e: i for i, e in enumerate(ext)}

        def internal(x: int) -> int:
            if x not in to_int:
                raise UnknownSource(f"node {x} is not in graph")
            return to_int[x]

        pairs = tuple((internal(a), internal(b)) for a, b in _parse_pairs(args.pairs))
        kw = dict(source=internal(args.source) if args.source is not None else 0, pairs=pairs,
                  iters=args.iters, damping=args.damping)
        if args.algorithm in ("sssp", "mpsp"):
            wp = args.weight_prop
            if wp is None and g.edge_schema.get("duration") == "int":
                wp = "duration"
            kw["weight_prop"] = None if wp in (None, "none") else wp
        spec = AnalyticsSpec(args.algorithm, **kw)
        validate(spec, g)
        if args.algorithm == "mpsp" and not pairs:
            raise UserError("mpsp needs --pairs SRC:DST,...")

        out, log, report = run_benchmark(g, mc, spec, args.mode, args.batch, args.repeat, args.time_proxy,
                                         nodes=range(g.num_nodes))
        names = mc.eds.ordered_names
        run_name = args.name or f"{args.collection}-{args.algorithm}-{args.mode}"

        def ext_key(k):
            return (ext[k[0]], ext[k[1]]) if isinstance(k, tuple) else ext[k]

        def build(d: Path) -> None:
            with open(d / "results.csv", "w", encoding="utf-8") as fh:
                fh.write("view,vertex,result\n")
                for t, vname in enumerate(names):
                    res = as_result(accumulate(out, t))
                    for k in sorted(res, key=lambda k: ext_key(k)):
                        fh.write(f"{vname},{_fmt_key(ext_key(k))},{res[k]!r}\n")
            with open(d / "diffs.csv", "w", encoding="utf-8") as fh:
                fh.write("view,vertex,result,multiplicity\n")
                for t, vname in enumerate(names):
                    for (k, v), mult in sorted(out.deltas[t].items(), key=lambda kv: (ext_key(kv[0][0]), repr(kv[0][1]))):
                        fh.write(f"{vname},{_fmt_key(ext_key(k))},{v!r},{mult}\n")
            log.write_csv(d / "runlog.csv")
            (d / "report.json").write_text(report.to_json())

        ws.install("runs", run_name, build, {"collection": args.collection, "algorithm": args.algorithm,
                                             "mode": args.mode})
    print(report.summary())
    print("decisions:", " ".join("D" if x == "differential" else "S" for x in report.decisions))
    print(f"results in {ws.root / 'runs' / run_name}")
    return 0


def cmd_gen(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    kind = args.kind
    if kind in ("expanding-window", "sliding-window", "author-year"):
        g = gen.timestamped_graph(args.nodes, args.edges, args.start, args.end - 1, args.seed)
        if kind == "expanding-window":
            wl = gen.expanding_window(g, args.start, args.end, args.w, args.graph_name)
        elif kind == "sliding-window":
            wl = gen.sliding_window(g, args.start, args.end, args.w, args.graph_name)
        else:
            wl = gen.author_year_windows(g, args.start, args.end, args.w, args.rank_steps, args.graph_name)
    elif kind == "community-removal":
        g = gen.community_graph(args.communities, args.size, args.p_in, args.p_out, args.seed)
        wl = gen.community_removal(g, args.communities, args.k, args.graph_name)
    elif kind == "random-churn":
        g = gen.churn_graph(args.edges, args.adds, args.dels, args.views, args.nodes, args.seed)
        wl = gen.random_churn(g, args.views, args.graph_name)
    else:
        raise UserError(f"unknown generator {kind!r}")
    dump_graph(wl.graph, out / "nodes.csv", out / "edges.csv")
    (out / "collection.gvdl").write_text(wl.gvdl)
    print(f"wrote {out}: |V|={wl.graph.num_nodes} |E|={wl.graph.num_edges}, "
          f"{wl.gvdl.count('[GV')} views")
    return 0


def cmd_stats(args) -> int:
    ws = _workspace(args)
    m = ws.manifest()
    for kind in KINDS:
        for name, entry in sorted(m[kind].items()):
            if args.name and name != args.name:
                continue
            details = " ".join(f"{k}={v}" for k, v in entry.items() if not isinstance(v, list))
            print(f"{kind[:-1]:<10} {name:<24} {details}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="viewgraph", description="Analytics over collections of graph views.")
    p.add_argument("--workspace", help=f"workspace directory (default ${ENV_HOME} or ./viewgraph-ws)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("load", help="register a graph from node and edge CSV files")
    s.add_argument("name")
    s.add_argument("nodes")
    s.add_argument("edges")
    s.set_defaults(func=cmd_load)

    s = sub.add_parser("create", help="materialize views, collections and aggregate views from GVDL")
    s.add_argument("gvdl", help="GVDL file, or - for stdin")
    s.add_argument("--ordering", default="optimized", help="optimized | default | random:<seed>")
    s.add_argument("--partitions", type=int, default=1)
    s.add_argument("--threads", type=int, default=1)
    s.set_defaults(func=cmd_create)

    s = sub.add_parser("run", help="run an analytics program on a collection or view")
    s.add_argument("collection")
    s.add_argument("algorithm", choices=ALGORITHMS)
    s.add_argument("--mode", choices=("diff", "scratch", "adaptive"), default="diff")
    s.add_argument("--batch", type=int, default=10)
    s.add_argument("--source", type=int, help="source node (external ID) for bfs/sssp")
    s.add_argument("--pairs", help="mpsp pairs as SRC:DST,SRC:DST,...")
    s.add_argument("--iters", type=int, default=10)
    s.add_argument("--damping", type=float, default=0.85)
    s.add_argument("--weight-prop", help="int edge property used as weight (sssp/mpsp); 'none' for unit")
    s.add_argument("--repeat", type=int, default=1)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--time-proxy", choices=("wall", "work"), default="wall")
    s.add_argument("--name", help="run name (default COLLECTION-ALGORITHM-MODE)")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("gen", help="write a synthetic graph and collection")
    s.add_argument("kind", choices=("expanding-window", "sliding-window", "community-removal",
                                    "random-churn", "author-year"))
    s.add_argument("--out", required=True)
    s.add_argument("--graph-name", default="G")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--nodes", type=int, default=200)
    s.add_argument("--edges", type=int, default=2000)
    s.add_argument("--start", type=int, default=2000)
    s.add_argument("--end", type=int, default=2020)
    s.add_argument("--w", type=int, default=2)
    s.add_argument("--rank-steps", type=int, default=5)
    s.add_argument("--communities", type=int, default=5)
    s.add_argument("--size", type=int, default=20)
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--p-in", type=float, default=0.25)
    s.add_argument("--p-out", type=float, default=0.02)
    s.add_argument("--adds", type=int, default=10)
    s.add_argument("--dels", type=int, default=10)
    s.add_argument("--views", type=int, default=10)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("stats", help="list registered graphs, collections, views and runs")
    s.add_argument("name", nargs="?")
    s.set_defaults(func=cmd_stats)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UserError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
