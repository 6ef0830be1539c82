from pathlib import Path

import pytest

from chainscope.errors import (
    DanglingReference,
    DatasetValidationError,
    DuplicateId,
    InvalidSize,
    SchemaError,
    UnknownCountry,
    UnknownSectorLabel,
    ZeroTurnover,
)
from chainscope.ingest import (
    DATASET_FILENAMES,
    default_sector_map_bytes,
    default_taxonomy_bytes,
    generate_fixture,
    load_dataset,
    load_dataset_dir,
    write_dataset,
)
from chainscope.model import Region, Sector, SizeClass

VALID_CITIES = """id,name,country_code,population_2011
C1,Vienna,AT,1714000
C2,Budapest,HU,1737000
C3,Zagreb,HR,790000
"""
VALID_FIRMS = """id,name,city_id,raw_activity_label,turnover_eur
F1,Alpha,C1,life insurance,5000000
F2,Beta,C2,it services,2000000
F3,Gamma,C3,sale of machinery,750000
F4,Delta,C2,cement production,1200000
"""
VALID_LINKS = """owner_firm_id,owned_firm_id,participation_rate
F1,F2,0.6
F2,F3,0.4
F1,F4,0.25
"""


def write_minimal(tmp_path, cities=VALID_CITIES, firms=VALID_FIRMS,
                  links=VALID_LINKS):
    paths = {
        "cities": tmp_path / "cities.csv",
        "firms": tmp_path / "firms.csv",
        "links": tmp_path / "links.csv",
        "regions": tmp_path / "country_regions.csv",
        "sectors": tmp_path / "sector_map.csv",
    }
    paths["cities"].write_text(cities)
    paths["firms"].write_text(firms)
    paths["links"].write_text(links)
    paths["regions"].write_bytes(default_taxonomy_bytes())
    paths["sectors"].write_bytes(default_sector_map_bytes())
    return paths


def load_from(paths, **kwargs):
    return load_dataset(paths["cities"], paths["firms"], paths["links"],
                        paths["regions"], paths["sectors"], **kwargs)


class TestLoadDataset:
    def test_valid_fixture_counts(self, tmp_path):
        dataset = load_from(write_minimal(tmp_path))
        assert dataset.counts == (3, 4, 3)

    def test_force_computed_on_load(self, tmp_path):
        dataset = load_from(write_minimal(tmp_path))
        by_pair = {(l.owner_firm_id, l.owned_firm_id): l
                   for l in dataset.links}
        assert by_pair[("F1", "F2")].force == pytest.approx(0.6 / 2_000_000)

    def test_dangling_city_reference(self, tmp_path):
        firms = VALID_FIRMS.replace("F3,Gamma,C3", "F3,Gamma,X99")
        paths = write_minimal(tmp_path, firms=firms)
        with pytest.raises(DatasetValidationError) as err:
            load_from(paths)
        dangling = err.value.of_type(DanglingReference)
        assert any("X99" in str(v) for v in dangling)

    def test_participation_out_of_range(self, tmp_path):
        links = VALID_LINKS.replace("F1,F2,0.6", "F1,F2,1.5")
        paths = write_minimal(tmp_path, links=links)
        with pytest.raises(DatasetValidationError) as err:
            load_from(paths)
        assert err.value.of_type(SchemaError)

    def test_percent_inputs_rejected_without_flag(self, tmp_path):
        links = VALID_LINKS.replace("F1,F2,0.6", "F1,F2,60")
        paths = write_minimal(tmp_path, links=links)
        with pytest.raises(DatasetValidationError) as err:
            load_from(paths)
        assert any("percent" in str(v) for v in err.value.violations)

    def test_percent_flag_rescales(self, tmp_path):
        links = ("owner_firm_id,owned_firm_id,participation_rate\n"
                 "F1,F2,60\nF2,F3,40\n")
        paths = write_minimal(tmp_path, links=links)
        dataset = load_from(paths, percent=True)
        rates = sorted(l.participation_rate for l in dataset.links)
        assert rates == [0.4, 0.6]

    def test_duplicate_firm_id(self, tmp_path):
        firms = VALID_FIRMS + "F1,Echo,C1,life insurance,100000\n"
        paths = write_minimal(tmp_path, firms=firms)
        with pytest.raises(DatasetValidationError) as err:
            load_from(paths)
        assert err.value.of_type(DuplicateId)

    def test_duplicate_link_pair(self, tmp_path):
        links = VALID_LINKS + "F1,F2,0.1\n"
        paths = write_minimal(tmp_path, links=links)
        with pytest.raises(DatasetValidationError) as err:
            load_from(paths)
        assert err.value.of_type(DuplicateId)

    def test_unknown_country(self, tmp_path):
        cities = VALID_CITIES.replace("C3,Zagreb,HR", "C3,Zagreb,QQ")
        paths = write_minimal(tmp_path, cities=cities)
        with pytest.raises(DatasetValidationError) as err:
            load_from(paths)
        assert err.value.of_type(UnknownCountry)

    def test_unknown_sector_label(self, tmp_path):
        firms = VALID_FIRMS.replace("life insurance", "alchemy")
        paths = write_minimal(tmp_path, firms=firms)
        with pytest.raises(DatasetValidationError) as err:
            load_from(paths)
        assert err.value.of_type(UnknownSectorLabel)

    def test_zero_turnover_owned_firm(self, tmp_path):
        firms = VALID_FIRMS.replace("F2,Beta,C2,it services,2000000",
                                    "F2,Beta,C2,it services,0")
        paths = write_minimal(tmp_path, firms=firms)
        with pytest.raises(DatasetValidationError) as err:
            load_from(paths)
        assert err.value.of_type(ZeroTurnover)

    def test_wrong_header_is_schema_error(self, tmp_path):
        cities = VALID_CITIES.replace("population_2011", "population")
        paths = write_minimal(tmp_path, cities=cities)
        with pytest.raises(DatasetValidationError) as err:
            load_from(paths)
        assert err.value.of_type(SchemaError)

    def test_missing_file_is_schema_error(self, tmp_path):
        paths = write_minimal(tmp_path)
        paths["links"].unlink()
        with pytest.raises(DatasetValidationError) as err:
            load_from(paths)
        assert err.value.of_type(SchemaError)

    def test_all_violations_reported_together(self, tmp_path):
        firms = (VALID_FIRMS
                 .replace("F3,Gamma,C3", "F3,Gamma,X99")
                 .replace("life insurance", "alchemy"))
        links = VALID_LINKS.replace("F1,F4,0.25", "F1,F4,7.5")
        paths = write_minimal(tmp_path, firms=firms, links=links)
        with pytest.raises(DatasetValidationError) as err:
            load_from(paths)
        kinds = {type(v) for v in err.value.violations}
        assert {DanglingReference, UnknownSectorLabel, SchemaError} <= kinds

    def test_self_ownership_rejected(self, tmp_path):
        links = VALID_LINKS + "F2,F2,0.5\n"
        paths = write_minimal(tmp_path, links=links)
        with pytest.raises(DatasetValidationError) as err:
            load_from(paths)
        assert err.value.of_type(SchemaError)


class TestRoundTrip:
    def test_write_load_write_is_byte_identical(self, tmp_path):
        dataset, paths = generate_fixture(42, out_dir=tmp_path / "a")
        reloaded = load_dataset_dir(tmp_path / "a")
        write_dataset(reloaded, tmp_path / "b")
        for name in DATASET_FILENAMES.values():
            assert ((tmp_path / "a" / name).read_bytes()
                    == (tmp_path / "b" / name).read_bytes()), name

    def test_reload_preserves_fields(self, tmp_path):
        dataset, _ = generate_fixture(7, 16, 12, 20, out_dir=tmp_path)
        reloaded = load_dataset_dir(tmp_path)
        assert reloaded.cities == dataset.cities
        assert reloaded.firms == dataset.firms
        assert ([(l.owner_firm_id, l.owned_firm_id, l.participation_rate)
                 for l in reloaded.links]
                == [(l.owner_firm_id, l.owned_firm_id, l.participation_rate)
                    for l in dataset.links])


class TestGenerateFixture:
    def test_deterministic_same_seed(self, tmp_path):
        generate_fixture(42, out_dir=tmp_path / "x")
        generate_fixture(42, out_dir=tmp_path / "y")
        for name in DATASET_FILENAMES.values():
            assert ((tmp_path / "x" / name).read_bytes()
                    == (tmp_path / "y" / name).read_bytes()), name

    def test_different_seeds_differ(self, tmp_path):
        generate_fixture(42, out_dir=tmp_path / "x")
        generate_fixture(43, out_dir=tmp_path / "y")
        assert ((tmp_path / "x" / "links.csv").read_bytes()
                != (tmp_path / "y" / "links.csv").read_bytes())

    def test_loads_without_validation_errors(self, tmp_path):
        generate_fixture(42, 20, 60, 120, out_dir=tmp_path)
        dataset = load_dataset_dir(tmp_path)
        assert dataset.counts == (20, 60, 120)

    def test_spans_all_size_classes_and_regions(self, fixture_dataset):
        sizes = {c.size_class for c in fixture_dataset.cities.values()}
        assert sizes == set(SizeClass)
        regions = {fixture_dataset.taxonomy.region_of(c.country)
                   for c in fixture_dataset.cities.values()}
        assert regions == set(Region)

    def test_spans_all_sectors(self, fixture_dataset):
        assert ({f.sector for f in fixture_dataset.firms.values()}
                == set(Sector))

    def test_acyclic_by_construction(self, fixture_dataset):
        order = {fid: i for i, fid in enumerate(sorted(
            fixture_dataset.firms))}
        for link in fixture_dataset.links:
            assert order[link.owner_firm_id] < order[link.owned_firm_id]

    @pytest.mark.parametrize("sizes", [
        (3, 60, 10), (16, 5, 10), (16, 9, 0), (16, 9, 37),
    ])
    def test_invalid_sizes_rejected(self, sizes):
        with pytest.raises(InvalidSize):
            generate_fixture(1, *sizes)
