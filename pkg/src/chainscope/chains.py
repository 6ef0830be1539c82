"""Decompose ownership links into multi-level capital-control chains.

A chain is a directed path of transnational ownership links tagged
N -> N-1 -> N-2, whose middle (N-1) firm sits in a CEE city. Canonical
chains have exactly three levels; longer control paths contribute one
chain per consecutive three-level window with a CEE middle. A link into
a CEE firm with no onward ownership, not covered by any window, is kept
as a degenerate two-level chain: it still carries capital into the city
(degree and revenue) but has no orientation.

Ownership cycles (cross-holdings) are excluded from enumeration and
reported as diagnostics, never silently dropped.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import EmptyInput, MissingTerminal
from .ingest import Dataset, format_real
from .model import City, Firm, OwnershipLink, Region, RegionTaxonomy

LEVEL_TAGS = ("N", "N-1", "N-2")


@dataclass(frozen=True)
class ChainLevel:
    firm_id: str
    city_id: str
    tag: str
    country: str | None = None


@dataclass(frozen=True)
class Chain:
    chain_id: str
    levels: tuple[ChainLevel, ...]
    link_forces: tuple[float, ...]
    link_revenues: tuple[float, ...]  # participation x owned turnover per edge
    orientation: Region | None

    @property
    def is_degenerate(self) -> bool:
        return len(self.levels) == 2

    @property
    def n_firm(self) -> str:
        return self.levels[0].firm_id

    @property
    def n_city(self) -> str:
        return self.levels[0].city_id

    @property
    def n1_firm(self) -> str:
        return self.levels[1].firm_id

    @property
    def n1_city(self) -> str:
        return self.levels[1].city_id

    @property
    def n2_firm(self) -> str | None:
        return self.levels[2].firm_id if len(self.levels) > 2 else None

    @property
    def n2_city(self) -> str | None:
        return self.levels[2].city_id if len(self.levels) > 2 else None

    @property
    def attributable_revenue(self) -> float:
        """Revenue attributed to the N-1 city: participation of the
        N -> N-1 link times the N-1 firm's turnover."""
        return self.link_revenues[0]


@dataclass
class ChainDecomposition:
    chains: list[Chain]
    cycles: list[tuple[str, ...]]  # firm id groups excluded from enumeration


@dataclass(frozen=True)
class AggregatedChainGroup:
    n1_city_id: str
    chain_ids: tuple[str, ...]
    total_fdi_revenue: float
    orientation_counts: Mapping[Region, int]


def filter_transnational(links: Iterable[OwnershipLink],
                         firms: Mapping[str, Firm],
                         cities: Mapping[str, City]) -> list[OwnershipLink]:
    """Links whose owner and owned firms sit in different countries."""
    kept = []
    for link in links:
        owner_country = cities[firms[link.owner_firm_id].city_id].country
        owned_country = cities[firms[link.owned_firm_id].city_id].country
        if owner_country != owned_country:
            kept.append(link)
    return kept


def _strongly_connected_components(nodes: Sequence[str],
                                   succ: Mapping[str, list[str]]
                                   ) -> list[list[str]]:
    """Tarjan SCC, iterative to survive deep ownership pyramids."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    counter = 0
    components: list[list[str]] = []

    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ.get(w, ()))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                component = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    component.append(w)
                    if w == v:
                        break
                components.append(component)
    return components


def _is_cee(dataset: Dataset, firm_id: str) -> bool:
    city = dataset.city_of_firm(firm_id)
    return dataset.taxonomy.region_of(city.country) is Region.CEE


def _make_level(dataset: Dataset, firm_id: str, tag: str) -> ChainLevel:
    firm = dataset.firms[firm_id]
    city = dataset.cities[firm.city_id]
    return ChainLevel(firm_id, city.id, tag, city.country)


def build_chains(dataset: Dataset, workers: int = 1) -> ChainDecomposition:
    """Enumerate every capital-control chain in the dataset.

    The transnational filter is applied first. A full chain is an ordered
    firm triple (a, b, c), all distinct, with links a->b and b->c and b in
    a CEE city; a CEE-owned firm with no onward link yields a degenerate
    two-level chain. Firms inside an ownership cycle are excluded and the
    cycles returned as diagnostics. Output order is canonical (sorted by
    chain id), independent of worker count.
    """
    links = filter_transnational(dataset.links, dataset.firms, dataset.cities)

    succ: dict[str, list[str]] = {}
    link_by_pair: dict[tuple[str, str], OwnershipLink] = {}
    nodes: set[str] = set()
    for link in links:
        succ.setdefault(link.owner_firm_id, []).append(link.owned_firm_id)
        link_by_pair[(link.owner_firm_id, link.owned_firm_id)] = link
        nodes.add(link.owner_firm_id)
        nodes.add(link.owned_firm_id)
    for owned_list in succ.values():
        owned_list.sort()

    ordered_nodes = sorted(nodes)
    cycles = [tuple(sorted(c))
              for c in _strongly_connected_components(ordered_nodes, succ)
              if len(c) > 1]
    cycles.sort()
    excluded = {fid for cycle in cycles for fid in cycle}

    adj = {
        fid: [w for w in succ.get(fid, ()) if w not in excluded]
        for fid in ordered_nodes if fid not in excluded
    }
    has_out = {fid for fid, owned in adj.items() if owned}
    indegree = {fid: 0 for fid in adj}
    for owned_list in adj.values():
        for fid in owned_list:
            indegree[fid] += 1
    cee = {fid: _is_cee(dataset, fid) for fid in adj}

    def revenue(a: str, b: str) -> float:
        link = link_by_pair[(a, b)]
        return link.participation_rate * dataset.firms[b].turnover

    def chains_from_root(a: str) -> list[Chain]:
        found = []
        for b in adj[a]:
            if not cee[b]:
                continue
            first = link_by_pair[(a, b)]
            if b not in has_out:
                # Keep the link as a degenerate 2-level chain only when
                # no full window covers it: if a is itself a CEE middle
                # with an owner, a>..>b is already some chain's terminal
                # leg and emitting it again would double-count the link.
                if not (cee[a] and indegree[a] > 0):
                    found.append(Chain(
                        chain_id=f"{a}>{b}",
                        levels=(_make_level(dataset, a, "N"),
                                _make_level(dataset, b, "N-1")),
                        link_forces=(first.force,),
                        link_revenues=(revenue(a, b),),
                        orientation=None,
                    ))
                continue
            for c in adj[b]:
                if c == a:
                    continue
                second = link_by_pair[(b, c)]
                terminal = _make_level(dataset, c, "N-2")
                orientation = dataset.taxonomy.region_of(terminal.country)
                found.append(Chain(
                    chain_id=f"{a}>{b}>{c}",
                    levels=(_make_level(dataset, a, "N"),
                            _make_level(dataset, b, "N-1"),
                            terminal),
                    link_forces=(first.force, second.force),
                    link_revenues=(revenue(a, b), revenue(b, c)),
                    orientation=orientation,
                ))
        return found

    roots = sorted(adj)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_root = list(pool.map(chains_from_root, roots))
    else:
        per_root = [chains_from_root(a) for a in roots]

    chains = [chain for bundle in per_root for chain in bundle]
    chains.sort(key=lambda c: c.chain_id)
    return ChainDecomposition(chains, cycles)


def classify_orientation(chain: Chain, taxonomy: RegionTaxonomy) -> Region:
    """Region of the terminal (N-2) firm's city."""
    if chain.is_degenerate:
        raise MissingTerminal(
            f"chain {chain.chain_id} has no N-2 level; orientation undefined")
    country = chain.levels[2].country
    if country is None:
        raise MissingTerminal(
            f"chain {chain.chain_id} carries no terminal country")
    return taxonomy.region_of(country)


def orientation_shares(chains: Iterable[Chain]) -> dict[Region, float]:
    """Fraction of oriented chains per terminal region, over all four
    regions; degenerate chains do not count."""
    counts = {region: 0 for region in Region}
    total = 0
    for chain in chains:
        if chain.orientation is None:
            continue
        counts[chain.orientation] += 1
        total += 1
    if total == 0:
        raise EmptyInput("no chain with a defined orientation")
    return {region: counts[region] / total for region in Region}


def aggregate_by_n1(chains: Iterable[Chain]) -> list[AggregatedChainGroup]:
    """One group per N-1 city, carrying the summed attributable revenue
    and the multiset of member orientations."""
    members: dict[str, list[Chain]] = {}
    for chain in chains:
        members.setdefault(chain.n1_city, []).append(chain)

    groups = []
    for city_id in sorted(members):
        group_chains = sorted(members[city_id], key=lambda c: c.chain_id)
        orientation_counts: dict[Region, int] = {}
        total = 0.0
        for chain in group_chains:
            total += chain.attributable_revenue
            if chain.orientation is not None:
                orientation_counts[chain.orientation] = (
                    orientation_counts.get(chain.orientation, 0) + 1)
        groups.append(AggregatedChainGroup(
            n1_city_id=city_id,
            chain_ids=tuple(c.chain_id for c in group_chains),
            total_fdi_revenue=total,
            orientation_counts=orientation_counts,
        ))
    return groups


# ---------------------------------------------------------------------------
# chain table serialization

CHAINS_CSV_HEADER = [
    "chain_id", "n_firm", "n_city", "n1_firm", "n1_city", "n2_firm",
    "n2_city", "orientation", "attributable_revenue_eur", "force_n_n1",
    "force_n1_n2",
]


def write_chains_csv(chains: Sequence[Chain], path,
                     comment: str | None = None) -> None:
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CHAINS_CSV_HEADER)
        for c in chains:
            writer.writerow([
                c.chain_id, c.n_firm, c.n_city, c.n1_firm, c.n1_city,
                c.n2_firm or "", c.n2_city or "",
                c.orientation.value if c.orientation else "",
                format_real(c.attributable_revenue),
                repr(c.link_forces[0]),
                repr(c.link_forces[1]) if len(c.link_forces) > 1 else "",
            ])


def read_chains_csv(path) -> list[Chain]:
    """Rebuild chains from a chain table.

    Countries and the second link's revenue are not serialized; loaded
    chains carry enough for morphology, tabulation and inspection.
    """
    import csv

    chains = []
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if not first.startswith("#"):
            fh.seek(0)
        reader = csv.reader(fh)
        header = next(reader)
        if header != CHAINS_CSV_HEADER:
            raise ValueError(f"{path}: unexpected chain table header")
        for row in reader:
            (chain_id, n_firm, n_city, n1_firm, n1_city, n2_firm, n2_city,
             orientation, revenue, force1, force2) = row
            levels = [ChainLevel(n_firm, n_city, "N"),
                      ChainLevel(n1_firm, n1_city, "N-1")]
            forces = [float(force1)]
            if n2_firm:
                levels.append(ChainLevel(n2_firm, n2_city, "N-2"))
                forces.append(float(force2))
            chains.append(Chain(
                chain_id=chain_id,
                levels=tuple(levels),
                link_forces=tuple(forces),
                link_revenues=(float(revenue),),
                orientation=Region(orientation) if orientation else None,
            ))
    return chains
