"""Degree and betweenness centrality over directed city graphs.

Betweenness follows the fast accumulation scheme over BFS shortest-path
DAGs. Path-count ratios are rationals, so the accumulation runs on exact
fractions and converts to float once at the end: results are bit-stable
across worker counts and comparable, exactly, with the brute-force
per-pair oracle. Parallel edges are a single adjacency for shortest-path
purposes; degrees count multiplicities.
"""

from __future__ import annotations

import csv
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .citygraph import CityGraph
from .errors import GraphTooLarge

ORACLE_MAX_NODES = 14


def _adjacency(graph) -> dict[str, list[str]]:
    """Simple directed adjacency from a CityGraph or a plain mapping."""
    if isinstance(graph, CityGraph):
        return graph.adjacency()
    adj = {v: sorted(set(targets)) for v, targets in graph.items()}
    for targets in list(adj.values()):
        for t in targets:
            adj.setdefault(t, [])
    return {v: adj[v] for v in sorted(adj)}


def _single_source(source: str, adj: Mapping[str, list[str]]):
    """BFS from source: visit order, predecessor DAG, path counts."""
    dist = {source: 0}
    sigma = {source: 1}
    preds: dict[str, list[str]] = {source: []}
    order: list[str] = []
    queue = deque([source])
    while queue:
        v = queue.popleft()
        order.append(v)
        for w in adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                sigma[w] = 0
                preds[w] = []
                queue.append(w)
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
                preds[w].append(v)
    return order, preds, sigma


def _source_dependencies(source: str, adj: Mapping[str, list[str]]
                         ) -> dict[str, Fraction]:
    order, preds, sigma = _single_source(source, adj)
    delta = {v: Fraction(0) for v in order}
    contribution: dict[str, Fraction] = {}
    for w in reversed(order):
        for v in preds[w]:
            delta[v] += Fraction(sigma[v], sigma[w]) * (1 + delta[w])
        if w != source and delta[w]:
            contribution[w] = delta[w]
    return contribution


def betweenness(graph, workers: int = 1,
                normalized: bool = False) -> dict[str, float]:
    """Betweenness of every node: over ordered pairs (s, t), the summed
    fraction of shortest directed s->t paths passing through the node.

    Unnormalized by default; normalized divides by (n-1)(n-2).
    """
    adj = _adjacency(graph)
    sources = sorted(adj)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_source = list(pool.map(
                lambda s: _source_dependencies(s, adj), sources))
    else:
        per_source = [_source_dependencies(s, adj) for s in sources]

    totals = {v: Fraction(0) for v in sources}
    for contribution in per_source:  # canonical source order
        for v, value in contribution.items():
            totals[v] += value

    n = len(sources)
    if normalized:
        scale = Fraction(1, (n - 1) * (n - 2)) if n > 2 else Fraction(0)
        return {v: float(value * scale) for v, value in totals.items()}
    return {v: float(value) for v, value in totals.items()}


def betweenness_oracle(graph) -> dict[str, float]:
    """Independent verifier: exhaustive shortest-path enumeration per
    ordered pair. Refuses graphs above the size cap."""
    adj = _adjacency(graph)
    nodes = sorted(adj)
    if len(nodes) > ORACLE_MAX_NODES:
        raise GraphTooLarge(
            f"{len(nodes)} nodes; the oracle is capped at "
            f"{ORACLE_MAX_NODES}")

    totals = {v: Fraction(0) for v in nodes}
    for s in nodes:
        dist = {s: 0}
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    queue.append(w)
        for t in nodes:
            if t == s or t not in dist:
                continue
            paths: list[tuple[str, ...]] = []
            stack = [(s, (s,))]
            while stack:
                v, path = stack.pop()
                if v == t:
                    paths.append(path)
                    continue
                for w in adj[v]:
                    if w in dist and dist[w] == dist[v] + 1 \
                            and dist[w] <= dist[t]:
                        stack.append((w, path + (w,)))
            sigma = len(paths)
            through: dict[str, int] = {}
            for path in paths:
                for v in path[1:-1]:
                    through[v] = through.get(v, 0) + 1
            for v, count in through.items():
                totals[v] += Fraction(count, sigma)
    return {v: float(value) for v, value in totals.items()}


def degrees(graph: CityGraph) -> dict[str, tuple[int, int]]:
    """(degree, degree_in) per city, counting edge multiplicities."""
    deg_in = {v: 0 for v in graph.nodes}
    deg_out = {v: 0 for v in graph.nodes}
    for (s, t), attrs in graph.edges.items():
        deg_out[s] += attrs.multiplicity
        deg_in[t] += attrs.multiplicity
    return {v: (deg_in[v] + deg_out[v], deg_in[v]) for v in sorted(deg_in)}


@dataclass(frozen=True)
class CityCentrality:
    city_id: str
    degree: int
    degree_in: int
    degree_out: int
    betweenness: float
    cumulated_revenue: float


@dataclass
class CentralityReport:
    entries: list[CityCentrality]

    def by_city(self) -> dict[str, CityCentrality]:
        return {e.city_id: e for e in self.entries}


def centrality_report(graph: CityGraph, workers: int = 1,
                      normalized: bool = False) -> CentralityReport:
    deg = degrees(graph)
    btw = betweenness(graph, workers=workers, normalized=normalized)
    entries = []
    for city_id in sorted(graph.nodes):
        degree, degree_in = deg[city_id]
        entries.append(CityCentrality(
            city_id=city_id,
            degree=degree,
            degree_in=degree_in,
            degree_out=degree - degree_in,
            betweenness=btw[city_id],
            cumulated_revenue=graph.nodes[city_id].cumulated_revenue,
        ))
    return CentralityReport(entries)


@dataclass(frozen=True)
class GatewayEntry:
    city_id: str
    betweenness: float
    degree_in: int
    receiver_only: bool  # receives links without relaying any


def gateway_profile(report: CentralityReport) -> list[GatewayEntry]:
    """Cities ranked by betweenness (ties: degree-in, then id); flags the
    receiver-only cities that take links without passing them on."""
    ranked = sorted(report.entries,
                    key=lambda e: (-e.betweenness, -e.degree_in, e.city_id))
    return [GatewayEntry(
        city_id=e.city_id,
        betweenness=e.betweenness,
        degree_in=e.degree_in,
        receiver_only=(e.betweenness == 0.0 and e.degree_in > 0),
    ) for e in ranked]


def annotate_graph(graph: CityGraph, report: CentralityReport) -> None:
    """Copy degree-in and betweenness onto the graph nodes so exports
    carry them."""
    for entry in report.entries:
        attrs = graph.nodes.get(entry.city_id)
        if attrs is not None:
            attrs.degree_in = entry.degree_in
            attrs.betweenness = entry.betweenness


CENTRALITY_CSV_HEADER = ["city_id", "degree", "degree_in", "degree_out",
                         "betweenness", "cumulated_revenue_eur"]


def write_centrality_csv(report: CentralityReport, path,
                         comment: str | None = None) -> None:
    from .ingest import format_real

    with open(path, "w", encoding="utf-8", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CENTRALITY_CSV_HEADER)
        for e in report.entries:
            writer.writerow([
                e.city_id, str(e.degree), str(e.degree_in),
                str(e.degree_out), repr(e.betweenness),
                format_real(e.cumulated_revenue),
            ])
