import json
import subprocess
import sys

import pytest

from chainscope.cli import main


@pytest.fixture()
def dataset_dir(tmp_path):
    assert main(["fixture", "--seed", "42", "--out",
                 str(tmp_path / "data")]) == 0
    return tmp_path / "data"


def test_fixture_and_ingest(dataset_dir, capsys):
    code = main([
        "ingest",
        "--cities", str(dataset_dir / "cities.csv"),
        "--firms", str(dataset_dir / "firms.csv"),
        "--links", str(dataset_dir / "links.csv"),
        "--regions", str(dataset_dir / "country_regions.csv"),
        "--sectors", str(dataset_dir / "sector_map.csv"),
    ])
    assert code == 0
    assert "20 cities, 60 firms, 120 links" in capsys.readouterr().out


def test_ingest_validation_failure_exits_one(dataset_dir, tmp_path):
    bad = tmp_path / "bad_links.csv"
    bad.write_text("owner_firm_id,owned_firm_id,participation_rate\n"
                   "F000,F001,1.5\n")
    code = main([
        "ingest",
        "--cities", str(dataset_dir / "cities.csv"),
        "--firms", str(dataset_dir / "firms.csv"),
        "--links", str(bad),
        "--regions", str(dataset_dir / "country_regions.csv"),
        "--sectors", str(dataset_dir / "sector_map.csv"),
    ])
    assert code == 1


def test_chains_then_morphology(dataset_dir, tmp_path):
    chains_csv = tmp_path / "chains.csv"
    assert main(["chains", "--in", str(dataset_dir),
                 "--out", str(chains_csv)]) == 0
    census_json = tmp_path / "census.json"
    assert main(["morphology", "--in", str(chains_csv),
                 "--out", str(census_json)]) == 0
    payload = json.loads(census_json.read_text())
    assert payload["total"] == sum(payload["counts"].values())

    table_csv = tmp_path / "structure_size.csv"
    assert main(["morphology", "--in", str(chains_csv),
                 "--out", str(table_csv), "--table", "size",
                 "--cities", str(dataset_dir / "cities.csv"),
                 "--regions", str(dataset_dir / "country_regions.csv"),
                 ]) == 0
    assert table_csv.read_text().startswith("structure,")


def test_graph_then_metrics(dataset_dir, tmp_path):
    graph_path = tmp_path / "cities.graphml"
    assert main(["graph", "--in", str(dataset_dir), "--orientation", "cee",
                 "--format", "graphml", "--out", str(graph_path)]) == 0
    out_csv = tmp_path / "centrality.csv"
    assert main(["metrics", "--graph", str(graph_path),
                 "--out", str(out_csv)]) == 0
    header = out_csv.read_text().splitlines()[0]
    assert header == ("city_id,degree,degree_in,degree_out,betweenness,"
                      "cumulated_revenue_eur")


def test_graph_formats(dataset_dir, tmp_path):
    for fmt, name in [("dot", "g.dot"), ("edgelist", "g.edgelist")]:
        assert main(["graph", "--in", str(dataset_dir),
                     "--format", fmt, "--out", str(tmp_path / name)]) == 0


def test_ca_on_table_file(tmp_path):
    table_csv = tmp_path / "table.csv"
    table_csv.write_text(
        "size,EU,CEE,PC,OE\n"
        "SMALL,47,56,50,14\n"
        "MEDIUM,24,29,10,0\n"
        "LARGE,29,15,40,86\n")
    out_json = tmp_path / "ca.json"
    assert main(["ca", "--table", str(table_csv), "--axes", "2",
                 "--out", str(out_json)]) == 0
    payload = json.loads(out_json.read_text())
    assert payload["axes"] == 2
    assert sum(payload["axis_shares"]) == pytest.approx(1.0, abs=1e-12)


def test_run_bundle(dataset_dir, tmp_path):
    config = tmp_path / "run.conf"
    config.write_text("\n".join([
        f"cities = {dataset_dir}/cities.csv",
        f"firms = {dataset_dir}/firms.csv",
        f"links = {dataset_dir}/links.csv",
        f"regions = {dataset_dir}/country_regions.csv",
        f"sectors = {dataset_dir}/sector_map.csv",
        "ca_axes = 2",
    ]) + "\n")
    assert main(["run", "--config", str(config),
                 "--out", str(tmp_path / "bundle")]) == 0
    assert (tmp_path / "bundle" / "manifest.json").exists()


def test_run_missing_input_exits_one(dataset_dir, tmp_path):
    config = tmp_path / "run.conf"
    config.write_text("\n".join([
        f"cities = {dataset_dir}/cities.csv",
        f"firms = {dataset_dir}/firms.csv",
        f"links = {dataset_dir}/absent.csv",
        f"regions = {dataset_dir}/country_regions.csv",
        f"sectors = {dataset_dir}/sector_map.csv",
    ]) + "\n")
    assert main(["run", "--config", str(config),
                 "--out", str(tmp_path / "bundle")]) == 1


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "chainscope.cli", "fixture", "--seed", "1",
         "--out", str(tmp_path / "d")],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert "fixture written" in proc.stdout
