"""Pipeline orchestration and analytical tables.

run_pipeline drives the full method over one dataset: ingest ->
transnational filter -> chain decomposition -> orientation-filtered city
graphs -> centrality -> morphology census -> correspondence analyses ->
size/orientation/sector tables. Everything lands in a bundle directory
whose reports embed the digest of a run manifest (input digests,
configuration, versions), and re-running on the same inputs reproduces
the bundle byte for byte.

Counting conventions, recorded in every report header: size tables count
chain instances grouped by the relevant city's size class; settlements
below the small-city population floor are excluded from size-stratified
tables; city economic profiles are built from the terminal (N-2) firms a
city hosts.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

from . import __version__
from .ca import ca_result_json, cross_tab, fit_ca
from .chains import (
    Chain,
    aggregate_by_n1,
    build_chains,
    orientation_shares,
    write_chains_csv,
)
from .citygraph import build_graph, export_graph
from .errors import StageFailure
from .ingest import Dataset, load_dataset
from .metrics import (
    annotate_graph,
    centrality_report,
    gateway_profile,
    write_centrality_csv,
)
from .model import FORCE_MODE_RATIO, FORCE_MODES, City, Region, Sector, SizeClass
from .morphology import census, structure_by_size
from .tables import LabeledTable, cross_count

ORIENTATION_LABELS = {
    "cee": Region.CEE,
    "eu": Region.EU_NON_CEE,
    "pc": Region.POST_COMMUNIST,
    "oe": Region.OUTSIDE_EUROPE,
}
REGION_SHORT = {region: label for label, region in ORIENTATION_LABELS.items()}
ORIENTATION_COLUMNS = ("EU", "CEE", "PC", "OE")
SIZE_ROWS = (SizeClass.SMALL.value, SizeClass.MEDIUM.value,
             SizeClass.LARGE.value)


class SectoralMode(Enum):
    MONO_SECTORAL = "MONO_SECTORAL"
    PLURI_SECTORAL = "PLURI_SECTORAL"


@dataclass(frozen=True)
class CityEconomicProfile:
    city_id: str
    sectors: frozenset[Sector]

    @property
    def mode(self) -> SectoralMode:
        return (SectoralMode.MONO_SECTORAL if len(self.sectors) == 1
                else SectoralMode.PLURI_SECTORAL)


def city_profiles(dataset: Dataset, chains: Sequence[Chain]
                  ) -> dict[str, CityEconomicProfile]:
    """Economic profile of every city hosting terminal (N-2) firms."""
    sectors_at: dict[str, set[Sector]] = {}
    for chain in chains:
        if chain.n2_firm is None:
            continue
        sector = dataset.firms[chain.n2_firm].sector
        sectors_at.setdefault(chain.n2_city, set()).add(sector)
    return {
        city_id: CityEconomicProfile(city_id, frozenset(sectors))
        for city_id, sectors in sorted(sectors_at.items())
    }


def sector_size_table(dataset: Dataset,
                      chains: Sequence[Chain]) -> LabeledTable:
    """Row-percent share of host-city sizes per terminal-firm sector.

    A city counts once per sector it hosts, under its size class; rows
    cover the sectors observed at least once.
    """
    seen: set[tuple[str, str]] = set()
    for chain in chains:
        if chain.n2_firm is None:
            continue
        size = dataset.cities[chain.n2_city].size_class
        if size is SizeClass.UNCLASSIFIED:
            continue
        sector = dataset.firms[chain.n2_firm].sector
        seen.add((sector.value, chain.n2_city))

    pairs = [(sector, dataset.cities[city].size_class.value)
             for sector, city in sorted(seen)]
    present = [s.value for s in Sector if any(r == s.value for r, _ in pairs)]
    counts = cross_count(pairs, row_order=present, col_order=SIZE_ROWS,
                         label_header="sector")
    return counts.row_percent()


def sectoral_mode(profiles: Mapping[str, CityEconomicProfile],
                  cities: Mapping[str, City]) -> LabeledTable:
    """Row-percent split of mono-/pluri-sectoral cities by size class."""
    pairs = []
    for profile in profiles.values():
        size = cities[profile.city_id].size_class
        if size is SizeClass.UNCLASSIFIED:
            continue
        pairs.append((profile.mode.value, size.value))
    rows = [m.value for m in SectoralMode
            if any(r == m.value for r, _ in pairs)]
    counts = cross_count(pairs, row_order=rows, col_order=SIZE_ROWS,
                         label_header="sector")
    return counts.row_percent()


def sectoral_mode_counts(profiles: Mapping[str, CityEconomicProfile],
                         cities: Mapping[str, City]) -> LabeledTable:
    pairs = []
    for profile in profiles.values():
        size = cities[profile.city_id].size_class
        if size is SizeClass.UNCLASSIFIED:
            continue
        pairs.append((profile.mode.value, size.value))
    rows = [m.value for m in SectoralMode
            if any(r == m.value for r, _ in pairs)]
    return cross_count(pairs, row_order=rows, col_order=SIZE_ROWS,
                       label_header="mode")


def orientation_size_table(chains: Sequence[Chain],
                           cities: Mapping[str, City]) -> LabeledTable:
    """Counts of chains per (N-1 city size class, terminal orientation)."""
    pairs = []
    for chain in chains:
        if chain.orientation is None:
            continue
        size = cities[chain.n1_city].size_class
        if size is SizeClass.UNCLASSIFIED:
            continue
        pairs.append((size.value, REGION_SHORT[chain.orientation].upper()))
    present_rows = [s for s in SIZE_ROWS if any(r == s for r, _ in pairs)]
    return cross_count(pairs, row_order=present_rows,
                       col_order=ORIENTATION_COLUMNS,
                       label_header="size_class")


# ---------------------------------------------------------------------------
# run configuration and manifest


@dataclass
class RunConfig:
    cities: Path
    firms: Path
    links: Path
    regions: Path
    sectors: Path
    force_mode: str = FORCE_MODE_RATIO
    percent_input: bool = False
    orientations: tuple[str, ...] = ("cee", "eu", "pc", "oe")
    ca_axes: int = 2
    workers: int = 1

    def __post_init__(self):
        if self.force_mode not in FORCE_MODES:
            raise ValueError(f"unknown force_mode {self.force_mode!r}")
        unknown = [o for o in self.orientations
                   if o not in ORIENTATION_LABELS]
        if unknown:
            raise ValueError(f"unknown orientation label(s): {unknown}")
        if self.ca_axes < 0:
            raise ValueError("ca_axes must be non-negative")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    def input_paths(self) -> dict[str, Path]:
        return {
            "cities": Path(self.cities),
            "firms": Path(self.firms),
            "links": Path(self.links),
            "regions": Path(self.regions),
            "sectors": Path(self.sectors),
        }


_CONFIG_PATH_KEYS = ("cities", "firms", "links", "regions", "sectors")


def parse_config_file(path) -> RunConfig:
    """Flat key = value configuration; '#' starts a comment, values may
    be quoted, paths resolve relative to the file."""
    path = Path(path)
    base = path.parent
    values: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8")
                                 .splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip().strip('"').strip("'")
        if key in values:
            raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = value

    missing = [k for k in _CONFIG_PATH_KEYS if k not in values]
    if missing:
        raise ValueError(f"{path}: missing input path key(s): {missing}")

    kwargs: dict = {k: base / values.pop(k) for k in _CONFIG_PATH_KEYS}
    if "force_mode" in values:
        kwargs["force_mode"] = values.pop("force_mode")
    if "percent_input" in values:
        kwargs["percent_input"] = values.pop("percent_input").lower() == "true"
    if "orientations" in values:
        kwargs["orientations"] = tuple(
            o.strip() for o in values.pop("orientations").split(",")
            if o.strip())
    if "ca_axes" in values:
        kwargs["ca_axes"] = int(values.pop("ca_axes"))
    if "workers" in values:
        kwargs["workers"] = int(values.pop("workers"))
    if values:
        raise ValueError(f"{path}: unknown key(s): {sorted(values)}")
    return RunConfig(**kwargs)


def build_manifest(config: RunConfig) -> dict:
    """Input digests, analysis configuration and versions.

    Execution knobs that cannot change the output (worker count) stay
    out, so equal inputs produce an equal manifest and an equal bundle.
    The timestamps are those of the input files; the run adds no wall
    clock of its own.
    """
    inputs = {}
    timestamps = {}
    for name, p in config.input_paths().items():
        digest = hashlib.sha256(p.read_bytes()).hexdigest()
        inputs[name] = {"file": p.name, "sha256": digest}
        mtime = datetime.fromtimestamp(p.stat().st_mtime, tz=timezone.utc)
        timestamps[name] = mtime.isoformat(timespec="seconds")
    return {
        "inputs": inputs,
        "timestamps": timestamps,
        "config": {
            "force_mode": config.force_mode,
            "percent_input": config.percent_input,
            "orientations": list(config.orientations),
            "ca_axes": config.ca_axes,
        },
        "versions": {
            "chainscope": __version__,
        },
        "conventions": {
            "size_tables": "chain instances, classified cities only",
            "profiles": "sectors of hosted terminal (N-2) firms",
        },
    }


def _json_bytes(payload: dict) -> bytes:
    return (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode()


@dataclass
class RunResult:
    out_dir: Path
    files: list[str]
    manifest_digest: str
    chain_count: int
    cycle_count: int


def _stage(name: str):
    """Decorator-free stage guard: wrap non-validation errors with the
    stage name for attribution."""
    class _Guard:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            from .errors import DatasetValidationError
            if exc is None or isinstance(exc, StageFailure):
                return False
            if isinstance(exc, DatasetValidationError):
                raise StageFailure(name, exc) from exc
            if isinstance(exc, Exception):
                raise StageFailure(name, exc) from exc
            return False
    return _Guard()


def run_pipeline(config: RunConfig, out_dir) -> RunResult:
    """Execute the full analysis and write the report bundle.

    The bundle holds the manifest, the chain table, five city graphs
    (unfiltered plus one per configured orientation), a centrality
    report, the morphology census, three correspondence analyses and
    three cross-tabulation tables, plus a plain-text summary. Identical
    inputs and configuration reproduce identical bytes, whatever the
    worker count.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: list[str] = []

    with _stage("ingest"):
        paths = config.input_paths()
        dataset = load_dataset(
            paths["cities"], paths["firms"], paths["links"],
            paths["regions"], paths["sectors"],
            percent=config.percent_input, force_mode=config.force_mode)

    with _stage("manifest"):
        manifest = build_manifest(config)
        manifest_bytes = _json_bytes(manifest)
        digest = hashlib.sha256(manifest_bytes).hexdigest()
        (out / "manifest.json").write_bytes(manifest_bytes)
        files.append("manifest.json")

    header = (f"manifest={digest} force_mode={config.force_mode} "
              f"counts=chain-instances")

    with _stage("chains"):
        decomposition = build_chains(dataset, workers=config.workers)
        chains = decomposition.chains
        write_chains_csv(chains, out / "chains.csv", comment=header)
        files.append("chains.csv")

    with _stage("graphs"):
        graphs = {"all": build_graph(chains, dataset)}
        for label in config.orientations:
            graphs[label] = build_graph(chains, dataset,
                                        orientation=ORIENTATION_LABELS[label])
        reports = {}
        for label, graph in graphs.items():
            reports[label] = centrality_report(graph, workers=config.workers)
            annotate_graph(graph, reports[label])
            name = f"graph_{label}.graphml"
            export_graph(graph, "graphml", out / name)
            files.append(name)

    with _stage("metrics"):
        write_centrality_csv(reports["all"], out / "centrality.csv",
                             comment=header)
        files.append("centrality.csv")

    with _stage("morphology"):
        tally = census(chains)
        payload = {
            "manifest_digest": digest,
            "counts": tally.as_dict(),
            "total": tally.total,
            "cycles_excluded": [list(c) for c in decomposition.cycles],
        }
        (out / "census.json").write_bytes(_json_bytes(payload))
        files.append("census.json")

    with _stage("ca"):
        oriented = [c for c in chains if c.orientation is not None]
        analyses = {
            "ca_city_orientation": cross_tab(
                [c.n1_city for c in oriented],
                [REGION_SHORT[c.orientation].upper() for c in oriented]),
            "ca_city_structure": _city_structure_table(chains),
            "ca_city_sector": cross_tab(
                [c.n1_city for c in chains],
                [dataset.firms[c.n1_firm].sector.value for c in chains]),
        }
        for name, table in analyses.items():
            result = fit_ca(table)
            payload = ca_result_json(result, axes=config.ca_axes)
            payload["manifest_digest"] = digest
            (out / f"{name}.json").write_bytes(_json_bytes(payload))
            files.append(f"{name}.json")

    with _stage("tables"):
        t1 = orientation_size_table(chains, dataset.cities)
        t1.to_csv(out / "table_size_by_orientation.csv", comment=header)
        t2 = structure_by_size(chains, dataset.cities).row_percent()
        t2.to_csv(out / "table_structure_by_size.csv", comment=header)
        profiles = city_profiles(dataset, chains)
        t3_sector = sector_size_table(dataset, chains)
        t3_mode = sectoral_mode(profiles, dataset.cities)
        t3 = LabeledTable(
            t3_sector.row_labels + t3_mode.row_labels,
            t3_sector.col_labels,
            t3_sector.values + t3_mode.values,
            label_header="sector")
        t3.to_csv(out / "table_sector_by_size.csv", comment=header)
        files.extend(["table_size_by_orientation.csv",
                      "table_structure_by_size.csv",
                      "table_sector_by_size.csv"])

    with _stage("summary"):
        text = _summary_text(digest, config, dataset, decomposition,
                             graphs, reports, tally)
        (out / "summary.txt").write_text(text, encoding="utf-8")
        files.append("summary.txt")

    return RunResult(out, files, digest, len(chains),
                     len(decomposition.cycles))


def _city_structure_table(chains: Sequence[Chain]):
    from .morphology import chain_components

    structure_of_city = {}
    for component in chain_components(chains):
        for city in component.nodes:
            structure_of_city[city] = component.structure
    return cross_tab(
        [c.n1_city for c in chains],
        [structure_of_city[c.n1_city].value for c in chains])


def _summary_text(digest, config, dataset, decomposition, graphs, reports,
                  tally) -> str:
    chains = decomposition.chains
    lines = [
        "chainscope run summary",
        f"manifest: {digest}",
        f"force_mode: {config.force_mode} (FORCE per link; revenue "
        f"aggregation is participation x owned-firm turnover)",
        "size tables count chain instances, cities under the small-city "
        "floor excluded",
        "",
        "dataset: %d cities, %d firms, %d links" % dataset.counts,
        f"chains: {len(chains)} "
        f"({sum(1 for c in chains if c.is_degenerate)} degenerate), "
        f"ownership cycles excluded: {len(decomposition.cycles)}",
    ]
    for cycle in decomposition.cycles:
        lines.append(f"  cycle: {' <-> '.join(cycle)}")

    try:
        shares = orientation_shares(chains)
    except Exception:
        shares = None
    if shares:
        lines.append("orientation shares: " + ", ".join(
            f"{REGION_SHORT[region].upper()}={share:.1%}"
            for region, share in shares.items()))

    lines.append("")
    lines.append("graphs (nodes/links):")
    for label, graph in graphs.items():
        lines.append(f"  {label}: {len(graph.nodes)}/"
                     f"{graph.total_multiplicity}"
                     + (" (empty)" if graph.is_empty else ""))

    gateways = gateway_profile(reports["all"])
    lines.append("")
    lines.append("top gateway cities (betweenness, degree-in):")
    for entry in gateways[:5]:
        flag = " receiver-only" if entry.receiver_only else ""
        lines.append(f"  {entry.city_id}: {entry.betweenness:g}, "
                     f"{entry.degree_in}{flag}")

    lines.append("")
    lines.append(f"chain structures ({tally.total} components):")
    for name, count in tally.as_dict().items():
        lines.append(f"  {name}: {count}")
    lines.append("")

    groups = aggregate_by_n1(chains)
    total_revenue = sum(g.total_fdi_revenue for g in groups)
    lines.append(f"aggregated N-1 groups: {len(groups)}, total "
                 f"attributable revenue {total_revenue:,.0f} EUR")
    lines.append("")
    return "\n".join(lines)
