import pytest

from chainscope.ingest import (
    Dataset,
    generate_fixture,
    load_sector_map_default,
    load_taxonomy_default,
)
from chainscope.model import City, Firm, OwnershipLink, Sector, compute_force


def make_dataset(cities, firms, links, force_mode="literal_ab_ratio"):
    """In-memory dataset from terse tuples.

    cities: (id, country, population[, name])
    firms:  (id, city_id[, sector, turnover])
    links:  (owner, owned, participation)
    """
    city_map = {}
    for spec in cities:
        cid, country, population = spec[:3]
        name = spec[3] if len(spec) > 3 else cid
        city_map[cid] = City(cid, name, country, population)
    firm_map = {}
    raw_labels = {}
    for spec in firms:
        fid, city_id = spec[:2]
        sector = spec[2] if len(spec) > 2 else Sector.INDUSTRY
        turnover = spec[3] if len(spec) > 3 else 1_000_000.0
        firm_map[fid] = Firm(fid, fid, city_id, sector, float(turnover))
        raw_labels[fid] = sector.value.lower()
    link_list = []
    for owner, owned, rate in links:
        force = compute_force(rate, firm_map[owned].turnover, force_mode)
        link_list.append(OwnershipLink(owner, owned, rate, force))
    return Dataset(city_map, firm_map, link_list, load_taxonomy_default(),
                   load_sector_map_default(), raw_labels)


@pytest.fixture(scope="session")
def fixture_dataset():
    dataset, _ = generate_fixture(42)
    return dataset


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("fixture42")
    generate_fixture(42, out_dir=out)
    return out
