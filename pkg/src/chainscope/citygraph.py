"""Directed weighted city multigraphs induced by capital-control chains.

Parallel chain links between the same pair of cities are stored as a
multiplicity count plus a summed revenue weight on a single edge. Graphs
can be filtered to the chains of one terminal orientation and exported to
GraphML, DOT or a CSV edge list; each format re-parses to the same node
and edge sets (GraphML and DOT carry all attributes, the edge list only
edge attributes).
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping
from xml.etree import ElementTree
from xml.sax.saxutils import escape, quoteattr

from .chains import Chain
from .errors import UnsupportedFormat
from .ingest import Dataset, format_real
from .model import Region, SizeClass

GRAPH_FORMATS = ("graphml", "dot", "edgelist")


@dataclass
class NodeAttrs:
    size_class: SizeClass | None = None
    region: Region | None = None
    cumulated_revenue: float = 0.0
    degree_in: int | None = None
    betweenness: float | None = None


@dataclass
class EdgeAttrs:
    multiplicity: int = 0
    revenue: float = 0.0


@dataclass
class CityGraph:
    nodes: dict[str, NodeAttrs] = field(default_factory=dict)
    edges: dict[tuple[str, str], EdgeAttrs] = field(default_factory=dict)
    orientation_filter: Region | None = None

    @property
    def is_empty(self) -> bool:
        return not self.nodes

    @property
    def total_multiplicity(self) -> int:
        return sum(e.multiplicity for e in self.edges.values())

    def successors(self, city: str) -> list[str]:
        """Unique successor cities, sorted (simple adjacency)."""
        return sorted({t for (s, t) in self.edges if s == city})

    def adjacency(self) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {city: [] for city in self.nodes}
        for (s, t) in self.edges:
            adj[s].append(t)
        for targets in adj.values():
            targets.sort()
        return adj


def build_graph(chains: Iterable[Chain], dataset: Dataset,
                orientation: Region | None = None) -> CityGraph:
    """City graph induced by the chains, optionally keeping only those
    with one terminal orientation.

    Every chain link contributes one edge instance from its owner city to
    its owned city, so a link shared by two windows counts twice. Node
    revenue is the N-1 aggregation: the summed attributable revenue of
    retained chains anchored on that city.
    """
    if orientation is None:
        retained = list(chains)
    else:
        retained = [c for c in chains if c.orientation is orientation]

    node_ids: set[str] = set()
    edge_instances: dict[tuple[str, str], EdgeAttrs] = {}
    revenue_at: dict[str, float] = {}

    for chain in sorted(retained, key=lambda c: c.chain_id):
        city_path = [lvl.city_id for lvl in chain.levels]
        if len(chain.link_revenues) != len(city_path) - 1:
            raise ValueError(
                f"chain {chain.chain_id} lacks per-link revenue; rebuild "
                f"it from the dataset before graphing")
        node_ids.update(city_path)
        for i in range(len(city_path) - 1):
            s, t = city_path[i], city_path[i + 1]
            assert s != t, "transnational links cannot loop within a city"
            attrs = edge_instances.setdefault((s, t), EdgeAttrs())
            attrs.multiplicity += 1
            attrs.revenue += chain.link_revenues[i]
        revenue_at[chain.n1_city] = (
            revenue_at.get(chain.n1_city, 0.0) + chain.attributable_revenue)

    graph = CityGraph(orientation_filter=orientation)
    for city_id in sorted(node_ids):
        city = dataset.cities[city_id]
        graph.nodes[city_id] = NodeAttrs(
            size_class=city.size_class,
            region=dataset.taxonomy.region_of(city.country),
            cumulated_revenue=revenue_at.get(city_id, 0.0),
        )
    for key in sorted(edge_instances):
        graph.edges[key] = edge_instances[key]
    return graph


# ---------------------------------------------------------------------------
# export

_NODE_KEYS = (
    ("size_class", "string"),
    ("region", "string"),
    ("cumulated_revenue_eur", "double"),
    ("degree_in", "long"),
    ("betweenness", "double"),
)
_EDGE_KEYS = (
    ("multiplicity", "long"),
    ("revenue_eur", "double"),
)


def _node_values(attrs: NodeAttrs) -> dict[str, str]:
    values = {}
    if attrs.size_class is not None:
        values["size_class"] = attrs.size_class.value
    if attrs.region is not None:
        values["region"] = attrs.region.value
    values["cumulated_revenue_eur"] = format_real(attrs.cumulated_revenue)
    if attrs.degree_in is not None:
        values["degree_in"] = str(attrs.degree_in)
    if attrs.betweenness is not None:
        values["betweenness"] = repr(attrs.betweenness)
    return values


def _to_graphml(graph: CityGraph) -> str:
    out = io.StringIO()
    out.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    out.write('<graphml xmlns="http://graphml.graphdrawing.org/xmlns">\n')
    for name, typ in _NODE_KEYS:
        out.write(f'  <key id="{name}" for="node" attr.name="{name}" '
                  f'attr.type="{typ}"/>\n')
    for name, typ in _EDGE_KEYS:
        out.write(f'  <key id="{name}" for="edge" attr.name="{name}" '
                  f'attr.type="{typ}"/>\n')
    out.write('  <graph id="cities" edgedefault="directed">\n')
    for city_id in sorted(graph.nodes):
        out.write(f'    <node id={quoteattr(city_id)}>\n')
        for name, value in _node_values(graph.nodes[city_id]).items():
            out.write(f'      <data key="{name}">{escape(value)}</data>\n')
        out.write('    </node>\n')
    for (s, t) in sorted(graph.edges):
        attrs = graph.edges[(s, t)]
        out.write(f'    <edge source={quoteattr(s)} target={quoteattr(t)}>\n')
        out.write(f'      <data key="multiplicity">{attrs.multiplicity}'
                  f'</data>\n')
        out.write(f'      <data key="revenue_eur">'
                  f'{escape(format_real(attrs.revenue))}</data>\n')
        out.write('    </edge>\n')
    out.write('  </graph>\n</graphml>\n')
    return out.getvalue()


def _quote_dot(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _to_dot(graph: CityGraph) -> str:
    out = io.StringIO()
    out.write("digraph cities {\n")
    for city_id in sorted(graph.nodes):
        pairs = ", ".join(
            f'{name}={_quote_dot(value)}'
            for name, value in _node_values(graph.nodes[city_id]).items())
        out.write(f"  {_quote_dot(city_id)} [{pairs}];\n")
    for (s, t) in sorted(graph.edges):
        attrs = graph.edges[(s, t)]
        out.write(
            f"  {_quote_dot(s)} -> {_quote_dot(t)} "
            f"[multiplicity={_quote_dot(str(attrs.multiplicity))}, "
            f"revenue_eur={_quote_dot(format_real(attrs.revenue))}];\n")
    out.write("}\n")
    return out.getvalue()


def _to_edgelist(graph: CityGraph) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["from_city", "to_city", "multiplicity", "revenue_eur"])
    for (s, t) in sorted(graph.edges):
        attrs = graph.edges[(s, t)]
        writer.writerow([s, t, str(attrs.multiplicity),
                         format_real(attrs.revenue)])
    return out.getvalue()


def export_graph(graph: CityGraph, fmt: str, path=None) -> str:
    """Serialize the graph; writes to path when given, returns the text.

    Nodes are ordered lexicographically by city id so equal graphs yield
    byte-identical documents.
    """
    if fmt == "graphml":
        text = _to_graphml(graph)
    elif fmt == "dot":
        text = _to_dot(graph)
    elif fmt == "edgelist":
        text = _to_edgelist(graph)
    else:
        raise UnsupportedFormat(
            f"{fmt!r}; expected one of {', '.join(GRAPH_FORMATS)}")
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


# ---------------------------------------------------------------------------
# import

_GRAPHML_NS = "{http://graphml.graphdrawing.org/xmlns}"


def _node_from_values(values: Mapping[str, str]) -> NodeAttrs:
    return NodeAttrs(
        size_class=(SizeClass(values["size_class"])
                    if "size_class" in values else None),
        region=Region(values["region"]) if "region" in values else None,
        cumulated_revenue=float(values.get("cumulated_revenue_eur", 0.0)),
        degree_in=(int(values["degree_in"])
                   if "degree_in" in values else None),
        betweenness=(float(values["betweenness"])
                     if "betweenness" in values else None),
    )


def _from_graphml(text: str) -> CityGraph:
    root = ElementTree.fromstring(text)
    graph = CityGraph()
    graph_el = root.find(f"{_GRAPHML_NS}graph")
    if graph_el is None:
        raise ValueError("graphml document without a <graph> element")
    for node_el in graph_el.findall(f"{_GRAPHML_NS}node"):
        values = {d.attrib["key"]: (d.text or "")
                  for d in node_el.findall(f"{_GRAPHML_NS}data")}
        graph.nodes[node_el.attrib["id"]] = _node_from_values(values)
    for edge_el in graph_el.findall(f"{_GRAPHML_NS}edge"):
        values = {d.attrib["key"]: (d.text or "")
                  for d in edge_el.findall(f"{_GRAPHML_NS}data")}
        key = (edge_el.attrib["source"], edge_el.attrib["target"])
        graph.edges[key] = EdgeAttrs(
            multiplicity=int(values["multiplicity"]),
            revenue=float(values["revenue_eur"]),
        )
    return graph


_DOT_TOKEN = r'"((?:[^"\\]|\\.)*)"'
_DOT_NODE_RE = re.compile(rf'^\s*{_DOT_TOKEN}\s*\[(.*)\];\s*$')
_DOT_EDGE_RE = re.compile(rf'^\s*{_DOT_TOKEN}\s*->\s*{_DOT_TOKEN}\s*\[(.*)\];\s*$')
_DOT_ATTR_RE = re.compile(rf'(\w+)={_DOT_TOKEN}')


def _unquote_dot(value: str) -> str:
    return value.replace('\\"', '"').replace("\\\\", "\\")


def _from_dot(text: str) -> CityGraph:
    graph = CityGraph()
    for line in text.splitlines():
        edge_match = _DOT_EDGE_RE.match(line)
        if edge_match:
            s = _unquote_dot(edge_match.group(1))
            t = _unquote_dot(edge_match.group(2))
            values = {m.group(1): _unquote_dot(m.group(2))
                      for m in _DOT_ATTR_RE.finditer(edge_match.group(3))}
            graph.edges[(s, t)] = EdgeAttrs(
                multiplicity=int(values["multiplicity"]),
                revenue=float(values["revenue_eur"]),
            )
            continue
        node_match = _DOT_NODE_RE.match(line)
        if node_match:
            values = {m.group(1): _unquote_dot(m.group(2))
                      for m in _DOT_ATTR_RE.finditer(node_match.group(2))}
            graph.nodes[_unquote_dot(node_match.group(1))] = (
                _node_from_values(values))
    return graph


def _from_edgelist(text: str) -> CityGraph:
    graph = CityGraph()
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != ["from_city", "to_city", "multiplicity", "revenue_eur"]:
        raise ValueError("unexpected edge list header")
    for s, t, multiplicity, revenue in reader:
        graph.edges[(s, t)] = EdgeAttrs(int(multiplicity), float(revenue))
        for city in (s, t):
            graph.nodes.setdefault(city, NodeAttrs())
    graph.nodes = {c: graph.nodes[c] for c in sorted(graph.nodes)}
    return graph


def import_graph(path, fmt: str | None = None) -> CityGraph:
    """Re-parse a previously exported graph document."""
    path = Path(path)
    if fmt is None:
        fmt = {".graphml": "graphml", ".dot": "dot", ".gv": "dot",
               ".edgelist": "edgelist", ".csv": "edgelist"}.get(path.suffix)
        if fmt is None:
            raise UnsupportedFormat(f"cannot infer format from {path.name!r}")
    text = path.read_text(encoding="utf-8")
    if fmt == "graphml":
        return _from_graphml(text)
    if fmt == "dot":
        return _from_dot(text)
    if fmt == "edgelist":
        return _from_edgelist(text)
    raise UnsupportedFormat(
        f"{fmt!r}; expected one of {', '.join(GRAPH_FORMATS)}")
