"""Six-class structural taxonomy of chain-induced city graphs.

Classification runs on the undirected simple skeleton of a connected
component (the form names are orientation-free) and is total and
exclusive: the first matching rule wins.

    1. all degrees <= 2, acyclic          SIMPLE ("in chain" path)
    2. all degrees == 2                   POLYGON (one ring over all nodes)
    3. acyclic, one hub, hub degree n-1   STAR
    4. acyclic, exactly one branch node   HIERARCHICAL_Y
    5. acyclic, several branch nodes      COMPLEX_HIERARCHICAL
    6. anything else                      MULTIGROUP (cycles with branching)

SIMPLE/HIERARCHICAL_Y/STAR/COMPLEX_HIERARCHICAL are exactly the trees;
POLYGON/MULTIGROUP are exactly the cyclic connected graphs.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Hashable, Iterable, Mapping, Sequence

from .chains import Chain
from .errors import Disconnected, TooSmall
from .model import City, SizeClass
from .tables import LabeledTable, cross_count


class StructureClass(Enum):
    SIMPLE = "SIMPLE"
    HIERARCHICAL_Y = "HIERARCHICAL_Y"
    POLYGON = "POLYGON"
    STAR = "STAR"
    COMPLEX_HIERARCHICAL = "COMPLEX_HIERARCHICAL"
    MULTIGROUP = "MULTIGROUP"


def _undirected_adjacency(nodes: set, edges: Iterable[tuple]
                          ) -> dict[Hashable, set]:
    adj: dict[Hashable, set] = {v: set() for v in nodes}
    for u, v in edges:
        if u == v:
            continue
        if u not in adj or v not in adj:
            raise ValueError(f"edge ({u!r}, {v!r}) leaves the node set")
        adj[u].add(v)
        adj[v].add(u)
    return adj


def _is_connected(adj: Mapping[Hashable, set]) -> bool:
    start = next(iter(adj))
    seen = {start}
    frontier = [start]
    while frontier:
        v = frontier.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                frontier.append(w)
    return len(seen) == len(adj)


def _has_cycle(adj: Mapping[Hashable, set]) -> bool:
    """Undirected cycle test by DFS with parent tracking."""
    seen: set = set()
    for root in adj:
        if root in seen:
            continue
        stack = [(root, None)]
        seen.add(root)
        while stack:
            v, parent = stack.pop()
            for w in adj[v]:
                if w == parent:
                    parent = None  # one edge back to parent is allowed once
                    continue
                if w in seen:
                    return True
                seen.add(w)
                stack.append((w, v))
    return False


def classify_structure(nodes: Iterable[Hashable],
                       edges: Iterable[tuple]) -> StructureClass:
    """Structure class of one connected graph, given as node and edge
    collections; edge direction and duplicates are ignored."""
    node_set = set(nodes)
    if len(node_set) < 2:
        raise TooSmall(f"{len(node_set)} node(s); need at least 2")
    adj = _undirected_adjacency(node_set, edges)
    if not _is_connected(adj):
        raise Disconnected("classify per connected component")

    n = len(node_set)
    deg = {v: len(adj[v]) for v in node_set}
    max_deg = max(deg.values())
    branch_nodes = sum(1 for d in deg.values() if d >= 3)
    acyclic = not _has_cycle(adj)

    if acyclic and max_deg <= 2:
        return StructureClass.SIMPLE
    if all(d == 2 for d in deg.values()):
        return StructureClass.POLYGON
    if acyclic and branch_nodes == 1:
        hub_degree = max_deg
        if hub_degree == n - 1:
            return StructureClass.STAR
        return StructureClass.HIERARCHICAL_Y
    if acyclic and branch_nodes >= 2:
        return StructureClass.COMPLEX_HIERARCHICAL
    return StructureClass.MULTIGROUP


# ---------------------------------------------------------------------------
# components of the chain-induced city graph


@dataclass(frozen=True)
class ChainComponent:
    nodes: frozenset[str]
    edges: frozenset[tuple[str, str]]  # undirected, stored sorted
    chain_ids: tuple[str, ...]
    structure: StructureClass


def chain_components(chains: Sequence[Chain]) -> list[ChainComponent]:
    """Connected components of the undirected city graph drawn by the
    chains, each classified; components are ordered by smallest city id."""
    parent: dict[str, str] = {}

    def find(x: str) -> str:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(a: str, b: str) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    edges_by_root: dict[str, set[tuple[str, str]]] = {}
    chain_cities: dict[str, list[str]] = {}
    for chain in chains:
        cities = [lvl.city_id for lvl in chain.levels]
        chain_cities[chain.chain_id] = cities
        for city in cities:
            parent.setdefault(city, city)
        for u, v in zip(cities, cities[1:]):
            union(u, v)

    node_groups: dict[str, set[str]] = {}
    for city in parent:
        node_groups.setdefault(find(city), set()).add(city)
    for chain in chains:
        cities = chain_cities[chain.chain_id]
        root = find(cities[0])
        group = edges_by_root.setdefault(root, set())
        for u, v in zip(cities, cities[1:]):
            group.add((min(u, v), max(u, v)))

    members: dict[str, list[str]] = {}
    for chain in chains:
        members.setdefault(find(chain_cities[chain.chain_id][0]),
                           []).append(chain.chain_id)

    components = []
    for root in sorted(node_groups):
        nodes = node_groups[root]
        edges = edges_by_root.get(root, set())
        components.append(ChainComponent(
            nodes=frozenset(nodes),
            edges=frozenset(edges),
            chain_ids=tuple(sorted(members.get(root, ()))),
            structure=classify_structure(nodes, edges),
        ))
    return components


@dataclass(frozen=True)
class MorphologyCensus:
    counts: Mapping[StructureClass, int]
    total: int

    def as_dict(self) -> dict[str, int]:
        return {cls.value: self.counts.get(cls, 0) for cls in StructureClass}


def census(chains: Sequence[Chain]) -> MorphologyCensus:
    """Per-class tally of the connected chain graphs."""
    components = chain_components(chains)
    counts: dict[StructureClass, int] = {}
    for component in components:
        counts[component.structure] = counts.get(component.structure, 0) + 1
    return MorphologyCensus(counts, len(components))


STRUCTURE_ORDER = tuple(cls.value for cls in StructureClass)
SIZE_COLUMNS = (SizeClass.SMALL.value, SizeClass.MEDIUM.value,
                SizeClass.LARGE.value)


def structure_by_size(chains: Sequence[Chain],
                      cities: Mapping[str, City]) -> LabeledTable:
    """Counts of chains per (structure class of the chain's component,
    size class of its N-1 city); settlements under the small-city floor
    are outside size-stratified tables."""
    structure_of_city: dict[str, StructureClass] = {}
    for component in chain_components(chains):
        for city in component.nodes:
            structure_of_city[city] = component.structure

    pairs = []
    for chain in chains:
        size = cities[chain.n1_city].size_class
        if size is SizeClass.UNCLASSIFIED:
            continue
        pairs.append((structure_of_city[chain.n1_city].value, size.value))
    present = [s for s in STRUCTURE_ORDER if any(r == s for r, _ in pairs)]
    return cross_count(pairs, row_order=present, col_order=SIZE_COLUMNS,
                       label_header="structure")
