"""Load, validate, write and synthesize city/firm/link datasets.

Five comma-delimited files (RFC-4180 quoting, mandatory header, fixed
column order) make up a dataset:

    cities.csv           id, name, country_code, population_2011
    firms.csv            id, name, city_id, raw_activity_label, turnover_eur
    links.csv            owner_firm_id, owned_firm_id, participation_rate
    country_regions.csv  country_code, region
    sector_map.csv       raw_activity_label, sector

Validation is exhaustive: loading either returns a dataset satisfying
every referential invariant or raises DatasetValidationError carrying the
complete list of violations. Writing uses a canonical number format so
that write -> load -> write is byte-identical.
"""

from __future__ import annotations

import csv
import io
import itertools
import random
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from .errors import (
    DanglingReference,
    DatasetValidationError,
    DuplicateId,
    InvalidSize,
    SchemaError,
    UnknownCountry,
    UnknownSectorLabel,
    ZeroTurnover,
)
from .model import (
    FORCE_MODE_RATIO,
    City,
    Firm,
    OwnershipLink,
    Region,
    RegionTaxonomy,
    Sector,
    compute_force,
)

CITIES_SCHEMA = ["id", "name", "country_code", "population_2011"]
FIRMS_SCHEMA = ["id", "name", "city_id", "raw_activity_label", "turnover_eur"]
LINKS_SCHEMA = ["owner_firm_id", "owned_firm_id", "participation_rate"]
REGIONS_SCHEMA = ["country_code", "region"]
SECTORS_SCHEMA = ["raw_activity_label", "sector"]

DATASET_FILENAMES = {
    "cities": "cities.csv",
    "firms": "firms.csv",
    "links": "links.csv",
    "regions": "country_regions.csv",
    "sectors": "sector_map.csv",
}


@dataclass
class Dataset:
    """Fully validated in-memory dataset."""

    cities: dict[str, City]
    firms: dict[str, Firm]
    links: list[OwnershipLink]
    taxonomy: RegionTaxonomy
    sector_map: dict[str, Sector]
    raw_labels: dict[str, str]  # firm id -> raw activity label, for round-trip

    @property
    def counts(self) -> tuple[int, int, int]:
        return (len(self.cities), len(self.firms), len(self.links))

    def city_of_firm(self, firm_id: str) -> City:
        return self.cities[self.firms[firm_id].city_id]


def default_taxonomy_bytes() -> bytes:
    return resources.files("chainscope.data").joinpath(
        "country_regions.csv").read_bytes()


def default_sector_map_bytes() -> bytes:
    return resources.files("chainscope.data").joinpath(
        "sector_map.csv").read_bytes()


# ---------------------------------------------------------------------------
# parsing helpers


def _read_rows(path, schema, violations):
    """Rows of a CSV file, or None when the header breaks the schema."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        violations.append(SchemaError(f"{path}: {exc}"))
        return None
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        violations.append(SchemaError(f"{path}: empty file, header required"))
        return None
    if header != schema:
        violations.append(SchemaError(
            f"{path}: header {header!r} does not match schema {schema!r}"))
        return None
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(schema):
            violations.append(SchemaError(
                f"{path}:{lineno}: expected {len(schema)} columns, "
                f"got {len(row)}"))
            continue
        rows.append((lineno, row))
    return rows


def _parse_int(value, where, violations):
    try:
        return int(value)
    except ValueError:
        violations.append(SchemaError(f"{where}: not an integer: {value!r}"))
        return None


def _parse_real(value, where, violations):
    try:
        return float(value)
    except ValueError:
        violations.append(SchemaError(f"{where}: not a number: {value!r}"))
        return None


def load_taxonomy(path, violations=None) -> RegionTaxonomy | None:
    """Read a country_regions file into a validated RegionTaxonomy."""
    own = violations is None
    violations = [] if own else violations
    rows = _read_rows(path, REGIONS_SCHEMA, violations)
    mapping: dict[str, Region] = {}
    if rows is not None:
        for lineno, (code, region_name) in rows:
            if code in mapping:
                violations.append(DuplicateId(
                    f"{path}:{lineno}: country {code!r} mapped twice"))
                continue
            try:
                mapping[code] = Region(region_name)
            except ValueError:
                violations.append(SchemaError(
                    f"{path}:{lineno}: unknown region {region_name!r}"))
    taxonomy = None
    if not violations:
        try:
            taxonomy = RegionTaxonomy(mapping)
        except ValueError as exc:
            violations.append(SchemaError(f"{path}: {exc}"))
    if own and violations:
        raise DatasetValidationError(violations)
    return taxonomy


def load_sector_map(path, violations=None) -> dict[str, Sector]:
    own = violations is None
    violations = [] if own else violations
    rows = _read_rows(path, SECTORS_SCHEMA, violations)
    mapping: dict[str, Sector] = {}
    if rows is not None:
        for lineno, (label, sector_name) in rows:
            if label in mapping:
                violations.append(DuplicateId(
                    f"{path}:{lineno}: label {label!r} mapped twice"))
                continue
            try:
                mapping[label] = Sector(sector_name)
            except ValueError:
                violations.append(SchemaError(
                    f"{path}:{lineno}: unknown sector {sector_name!r}"))
    if own and violations:
        raise DatasetValidationError(violations)
    return mapping


def load_dataset(cities_path, firms_path, links_path, taxonomy_path,
                 sector_map_path, percent: bool = False,
                 force_mode: str = FORCE_MODE_RATIO) -> Dataset:
    """Load the five files and enforce every dataset invariant.

    Participation rates must be fractions in [0, 1]. With percent=True the
    column is treated as percentages in [0, 100] and divided by 100 on
    load; without it, values in (1, 100] are rejected rather than silently
    rescaled.
    """
    violations: list[Exception] = []

    taxonomy = load_taxonomy(taxonomy_path, violations)
    sector_map = load_sector_map(sector_map_path, violations)

    cities: dict[str, City] = {}
    rows = _read_rows(cities_path, CITIES_SCHEMA, violations)
    if rows is not None:
        for lineno, (cid, name, country, pop) in rows:
            where = f"{cities_path}:{lineno}"
            population = _parse_int(pop, where, violations)
            if population is None:
                continue
            if population < 0:
                violations.append(SchemaError(
                    f"{where}: negative population {population}"))
                continue
            if cid in cities:
                violations.append(DuplicateId(f"{where}: city id {cid!r}"))
                continue
            if taxonomy is not None and country not in taxonomy:
                violations.append(UnknownCountry(
                    f"{where}: country {country!r} not in taxonomy"))
                continue
            cities[cid] = City(cid, name, country, population)

    firms: dict[str, Firm] = {}
    raw_labels: dict[str, str] = {}
    rows = _read_rows(firms_path, FIRMS_SCHEMA, violations)
    if rows is not None:
        for lineno, (fid, name, city_id, raw_label, turnover) in rows:
            where = f"{firms_path}:{lineno}"
            value = _parse_real(turnover, where, violations)
            if value is None:
                continue
            if value < 0:
                violations.append(SchemaError(
                    f"{where}: negative turnover {value}"))
                continue
            if fid in firms:
                violations.append(DuplicateId(f"{where}: firm id {fid!r}"))
                continue
            if city_id not in cities:
                violations.append(DanglingReference(
                    f"{where}: firm {fid!r} references unknown city "
                    f"{city_id!r}"))
                continue
            sector = sector_map.get(raw_label)
            if sector is None:
                violations.append(UnknownSectorLabel(
                    f"{where}: activity label {raw_label!r} not in "
                    f"sector map"))
                continue
            firms[fid] = Firm(fid, name, city_id, sector, value)
            raw_labels[fid] = raw_label

    links: list[OwnershipLink] = []
    seen_pairs: set[tuple[str, str]] = set()
    rows = _read_rows(links_path, LINKS_SCHEMA, violations)
    if rows is not None:
        for lineno, (owner, owned, rate_text) in rows:
            where = f"{links_path}:{lineno}"
            rate = _parse_real(rate_text, where, violations)
            if rate is None:
                continue
            if percent:
                if not 0.0 <= rate <= 100.0:
                    violations.append(SchemaError(
                        f"{where}: percent participation {rate} outside "
                        f"[0, 100]"))
                    continue
                rate = rate / 100.0
            elif not 0.0 <= rate <= 1.0:
                hint = ("; looks percent-style, pass percent=True"
                        if 1.0 < rate <= 100.0 else "")
                violations.append(SchemaError(
                    f"{where}: participation {rate} outside [0, 1]{hint}"))
                continue
            if owner == owned:
                violations.append(SchemaError(
                    f"{where}: firm {owner!r} owning itself"))
                continue
            if (owner, owned) in seen_pairs:
                violations.append(DuplicateId(
                    f"{where}: link {owner!r} -> {owned!r} appears twice"))
                continue
            seen_pairs.add((owner, owned))
            missing = [f for f in (owner, owned) if f not in firms]
            if missing:
                for fid in missing:
                    violations.append(DanglingReference(
                        f"{where}: link references unknown firm {fid!r}"))
                continue
            try:
                force = compute_force(rate, firms[owned].turnover, force_mode)
            except ZeroTurnover:
                violations.append(ZeroTurnover(
                    f"{where}: owned firm {owned!r} has zero turnover"))
                continue
            links.append(OwnershipLink(owner, owned, rate, force))

    if violations:
        raise DatasetValidationError(violations)
    assert taxonomy is not None
    return Dataset(cities, firms, links, taxonomy, sector_map, raw_labels)


def load_dataset_dir(directory, percent: bool = False,
                     force_mode: str = FORCE_MODE_RATIO) -> Dataset:
    """Load a dataset from a directory using the canonical file names."""
    d = Path(directory)
    return load_dataset(
        d / DATASET_FILENAMES["cities"],
        d / DATASET_FILENAMES["firms"],
        d / DATASET_FILENAMES["links"],
        d / DATASET_FILENAMES["regions"],
        d / DATASET_FILENAMES["sectors"],
        percent=percent,
        force_mode=force_mode,
    )


# ---------------------------------------------------------------------------
# writing


def format_real(value: float) -> str:
    """Canonical text for a real: integral values drop the '.0' tail,
    everything else uses the shortest round-tripping repr."""
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_dataset(dataset: Dataset, directory) -> dict[str, Path]:
    """Write the five canonical files; lexicographic id order for byte-
    stable output. Returns the path of each file."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {k: directory / v for k, v in DATASET_FILENAMES.items()}

    _write_csv(paths["cities"], CITIES_SCHEMA, [
        (c.id, c.name, c.country, str(c.population_2011))
        for c in sorted(dataset.cities.values(), key=lambda c: c.id)
    ])
    _write_csv(paths["firms"], FIRMS_SCHEMA, [
        (f.id, f.name, f.city_id, dataset.raw_labels[f.id],
         format_real(f.turnover))
        for f in sorted(dataset.firms.values(), key=lambda f: f.id)
    ])
    _write_csv(paths["links"], LINKS_SCHEMA, [
        (l.owner_firm_id, l.owned_firm_id, format_real(l.participation_rate))
        for l in sorted(dataset.links,
                        key=lambda l: (l.owner_firm_id, l.owned_firm_id))
    ])
    _write_csv(paths["regions"], REGIONS_SCHEMA, [
        (code, region.value)
        for code, region in sorted(dataset.taxonomy.regions.items())
    ])
    _write_csv(paths["sectors"], SECTORS_SCHEMA, [
        (label, sector.value)
        for label, sector in sorted(dataset.sector_map.items())
    ])
    return paths


# ---------------------------------------------------------------------------
# synthetic fixtures

_REGION_ORDER = [Region.CEE, Region.EU_NON_CEE, Region.POST_COMMUNIST,
                 Region.OUTSIDE_EUROPE]
_SIZE_POPULATION_RANGES = {
    "SMALL": (10_000, 49_999),
    "MEDIUM": (50_000, 250_000),
    "LARGE": (250_001, 1_999_999),
    "UNCLASSIFIED": (1_000, 9_999),
}
_SIZE_ORDER = ["SMALL", "MEDIUM", "LARGE", "UNCLASSIFIED"]

_COUNTRY_POOLS = {
    Region.CEE: ["PL", "CZ", "HU", "SK", "SI", "HR", "RO", "BG"],
    Region.EU_NON_CEE: ["AT", "DE", "IT", "FR", "NL", "CY", "GB", "BE"],
    Region.POST_COMMUNIST: ["RS", "BA", "UA", "ME", "MK", "MD"],
    Region.OUTSIDE_EUROPE: ["US", "KR", "CN", "JP", "TR", "IN"],
}

# Extra cities beyond the coverage grid lean CEE so the link sample yields
# a healthy number of CEE-anchored chains.
_REGION_WEIGHTS = [0.55, 0.20, 0.15, 0.10]
_SIZE_WEIGHTS = [0.40, 0.30, 0.20, 0.10]

MIN_FIXTURE_CITIES = 16  # 4 regions x 4 size classes coverage grid
MIN_FIXTURE_FIRMS = 9    # one firm per sector


def _pair_from_rank(rank: int, n: int) -> tuple[int, int]:
    """Ordered pair (i, j), i < j, at the given rank in the row-major
    enumeration of all n*(n-1)/2 index pairs."""
    i = 0
    remaining = rank
    while remaining >= n - 1 - i:
        remaining -= n - 1 - i
        i += 1
    return i, i + 1 + remaining


def _firm_groups(rng: random.Random, n_firms: int) -> list[range]:
    """Partition firm indices into corporate groups of 3 to 7 firms."""
    groups: list[range] = []
    start = 0
    while start < n_firms:
        size = min(rng.randint(3, 7), n_firms - start)
        groups.append(range(start, start + size))
        start += size
    if len(groups) > 1 and len(groups[-1]) < 3:
        tail = groups.pop()
        head = groups.pop()
        groups.append(range(head.start, tail.stop))
    return groups


def _rotate(pool: list[str], cursor: int, k: int) -> tuple[list[str], int]:
    """k entries from a circular pool starting at cursor; spreads city
    use across groups so components stay mostly separate."""
    k = min(k, len(pool))
    taken = [pool[(cursor + i) % len(pool)] for i in range(k)]
    return taken, (cursor + k) % len(pool)


def _interleave_by(city_ids: list[str], key) -> list[str]:
    """Round-robin the ids across their key buckets, so consecutive pool
    slices span different countries/regions."""
    buckets: dict[str, list[str]] = {}
    for cid in city_ids:
        buckets.setdefault(key(cid), []).append(cid)
    ordered = [buckets[k] for k in sorted(buckets)]
    out: list[str] = []
    i = 0
    while any(ordered):
        for bucket in ordered:
            if i < len(bucket):
                out.append(bucket[i])
        i += 1
        if all(i >= len(bucket) for bucket in ordered):
            break
    return out


def generate_fixture(seed: int, n_cities: int = 20, n_firms: int = 60,
                     n_links: int = 120, out_dir=None,
                     force_mode: str = FORCE_MODE_RATIO
                     ) -> tuple[Dataset, dict[str, Path] | None]:
    """Deterministic synthetic dataset spanning all size classes, regions
    and sectors.

    Firms are organized into corporate groups of 3-7 companies, each with
    a small city pool anchored on CEE cities; links connect firms within
    a group first and spill over to cross-group pairs only when the
    requested link count exceeds the within-group pair capacity. Links
    are oriented from lower to higher firm index, so the ownership
    digraph is acyclic by construction and brute-force chain enumeration
    is an exact oracle on the result. When out_dir is given the five CSV
    files are written there (byte-identical for equal seeds and sizes).
    """
    if n_cities < MIN_FIXTURE_CITIES:
        raise InvalidSize(
            f"need at least {MIN_FIXTURE_CITIES} cities to span all size "
            f"classes and regions, got {n_cities}")
    if n_firms < MIN_FIXTURE_FIRMS:
        raise InvalidSize(
            f"need at least {MIN_FIXTURE_FIRMS} firms to span all nine "
            f"sectors, got {n_firms}")
    max_links = n_firms * (n_firms - 1) // 2
    if not 1 <= n_links <= max_links:
        raise InvalidSize(
            f"n_links must be in [1, {max_links}] for an acyclic link set "
            f"over {n_firms} firms, got {n_links}")

    rng = random.Random(seed)

    taxonomy = load_taxonomy_default()
    sector_map = load_sector_map_default()
    labels_by_sector: dict[Sector, list[str]] = {}
    for label, sector in sorted(sector_map.items()):
        labels_by_sector.setdefault(sector, []).append(label)

    cities: dict[str, City] = {}
    cee_city_ids: list[str] = []
    other_city_ids: list[str] = []
    for i in range(n_cities):
        if i < MIN_FIXTURE_CITIES:
            region = _REGION_ORDER[i // 4]
            size = _SIZE_ORDER[i % 4]
        else:
            region = rng.choices(_REGION_ORDER, weights=_REGION_WEIGHTS)[0]
            size = rng.choices(_SIZE_ORDER, weights=_SIZE_WEIGHTS)[0]
        lo, hi = _SIZE_POPULATION_RANGES[size]
        population = rng.randint(lo, hi)
        country = rng.choice(_COUNTRY_POOLS[region])
        cid = f"C{i:03d}"
        cities[cid] = City(cid, f"City {i:03d}", country, population)
        if region is Region.CEE:
            cee_city_ids.append(cid)
        else:
            other_city_ids.append(cid)

    groups = _firm_groups(rng, n_firms)
    cee_rotation = _interleave_by(cee_city_ids,
                                  key=lambda cid: cities[cid].country)
    other_rotation = _interleave_by(
        other_city_ids,
        key=lambda cid: taxonomy.region_of(cities[cid].country).value)
    cee_cursor = 0
    other_cursor = 0
    group_pools: list[tuple[list[str], list[str]]] = []
    for _ in groups:
        pool_cee, cee_cursor = _rotate(cee_rotation, cee_cursor,
                                       rng.randint(1, 2))
        pool_other, other_cursor = _rotate(other_rotation, other_cursor,
                                           rng.randint(2, 3))
        group_pools.append((pool_cee, pool_cee + pool_other))

    firms: dict[str, Firm] = {}
    raw_labels: dict[str, str] = {}
    firm_ids: list[str] = []
    sectors = list(Sector)
    group_of_firm: list[int] = [0] * n_firms
    for g, group in enumerate(groups):
        for j in group:
            group_of_firm[j] = g
    for j in range(n_firms):
        sector = sectors[j % len(sectors)]
        pool_cee, pool_all = group_pools[group_of_firm[j]]
        if rng.random() < 0.55:
            city_id = rng.choice(pool_cee)
        else:
            city_id = rng.choice(pool_all)
        label = rng.choice(labels_by_sector[sector])
        turnover = float(rng.randrange(100, 500_000) * 1000)
        fid = f"F{j:03d}"
        firms[fid] = Firm(fid, f"Firm {j:03d}", city_id, sector, turnover)
        raw_labels[fid] = label
        firm_ids.append(fid)

    within_pairs = [pair for group in groups
                    for pair in itertools.combinations(group, 2)]
    if n_links <= len(within_pairs):
        chosen = sorted(rng.sample(within_pairs, n_links))
    else:
        taken = set(within_pairs)
        spill: list[tuple[int, int]] = []
        while len(spill) < n_links - len(within_pairs):
            pair = _pair_from_rank(rng.randrange(max_links), n_firms)
            if pair in taken:
                continue
            taken.add(pair)
            spill.append(pair)
        chosen = sorted(within_pairs + spill)

    participation_steps = [round(0.05 * k, 2) for k in range(1, 21)]
    links: list[OwnershipLink] = []
    for i, j in chosen:
        owner, owned = firm_ids[i], firm_ids[j]
        rate = rng.choice(participation_steps)
        force = compute_force(rate, firms[owned].turnover, force_mode)
        links.append(OwnershipLink(owner, owned, rate, force))

    dataset = Dataset(cities, firms, links, taxonomy, sector_map, raw_labels)

    paths = None
    if out_dir is not None:
        paths = write_dataset(dataset, out_dir)
    return dataset, paths


def load_taxonomy_default() -> RegionTaxonomy:
    mapping = {}
    reader = csv.reader(io.StringIO(
        default_taxonomy_bytes().decode("utf-8")))
    next(reader)
    for code, region_name in reader:
        mapping[code] = Region(region_name)
    return RegionTaxonomy(mapping)


def load_sector_map_default() -> dict[str, Sector]:
    mapping = {}
    reader = csv.reader(io.StringIO(
        default_sector_map_bytes().decode("utf-8")))
    next(reader)
    for label, sector_name in reader:
        mapping[label] = Sector(sector_name)
    return mapping
