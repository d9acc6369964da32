from __future__ import annotations

import json

import pytest

from asymcc.cli import compare, main, parse_seeds
from asymcc.errors import DomainError
from asymcc.scenario import BUILTIN, dumps_scenario, load_scenario, loads_scenario
from asymcc.scheduler import loads_schedules

EXAMPLE_YAML = """\
label: example1
tx_antennas: 4
cache_ratio: "0.2"
groups: [[5, 2], [5, 4]]
phantom: {hat_G: 4, omega: 3, beta: 4}
seeds: [1, 2]
"""


@pytest.fixture
def scenario_file(tmp_path):
    def write(text, name="scn.yaml"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return write


class TestScenario:
    def test_parse(self):
        scn = loads_scenario(EXAMPLE_YAML)
        assert scn.config.num_users == 10 and scn.phantom == (4, 3, 4) and scn.seeds == (1, 2)

    @pytest.mark.parametrize("fmt", ["yaml", "json"])
    def test_round_trip_idempotent(self, fmt):
        scn = loads_scenario(EXAMPLE_YAML)
        once = dumps_scenario(scn, fmt)
        assert loads_scenario(once) == scn
        assert dumps_scenario(loads_scenario(once), fmt) == once

    def test_float_ratio_rejected(self):
        with pytest.raises(DomainError, match="decimal string"):
            loads_scenario(EXAMPLE_YAML.replace('"0.2"', "0.2"))

    def test_unknown_key(self):
        with pytest.raises(DomainError, match="unknown"):
            loads_scenario(EXAMPLE_YAML + "colour: red\n")

    def test_builtins(self):
        assert set(BUILTIN) >= {"example1", "table1a", "table1b", "table1c"}
        assert load_scenario("table1b").config.groups[0].size == 50


class TestCompare:
    def test_table1b(self):
        row = compare(load_scenario("table1b"))
        assert (str(row.min_g), f"{float(row.grouping):.2f}") == ("20", "17.78")

    def test_single_group_all_equal(self, scenario_file):
        path = scenario_file('tx_antennas: 6\ncache_ratio: "0.1"\ngroups: [[20, 3]]\n')
        row = compare(load_scenario(path))
        assert row.min_g == row.grouping == row.phantom
        assert row.winner == "min-g=grouping=phantom"

    def test_table2_row(self, scenario_file):
        path = scenario_file('tx_antennas: 12\ncache_ratio: "0.01"\ngroups: [[100, 2], [400, 4]]\n')
        d = compare(load_scenario(path)).as_dict()
        assert (d["phantom"]["rendered"], d["min_g"]["rendered"], d["grouping"]["rendered"]) == (
            "25.26", "22", "23.33")
        assert d["winner"] == "phantom"


def test_parse_seeds():
    assert parse_seeds("1..10") == list(range(1, 11))
    assert parse_seeds("3, 5,7") == [3, 5, 7]
    with pytest.raises(DomainError):
        parse_seeds("")


class TestCommands:
    def test_dof_grid(self, capsys):
        assert main(["dof", "--scenario", "table1b", "--grid", "--omega-range", "5:10"]) == 0
        out = capsys.readouterr().out
        assert "17.78" in out and "14.12" in out and "--" in out

    def test_dof_json(self, capsys):
        assert main(["dof", "--scenario", "example1", "--format", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["grouping"]["exact"] == "48/7"

    def test_dof_csv(self, capsys):
        assert main(["dof", "--scenario", "table1a", "--format", "csv"]) == 0
        assert capsys.readouterr().out.splitlines()[1].startswith("table1a,20,20.36,21.68,4,7,4")

    @pytest.mark.parametrize("preset", ["table1a", "table1c", "table2"])
    def test_tables(self, preset, capsys):
        assert main(["tables", preset]) == 0
        assert "all cells match" in capsys.readouterr().out

    def test_tables_mismatch_exit(self, monkeypatch, capsys):
        from asymcc import tables

        bad = dict(tables.TABLE1["table1c"], grouping="17.46")
        monkeypatch.setitem(tables.TABLE1, "table1c", bad)
        assert main(["tables", "table1c"]) == 3
        assert "computed 17.45, published 17.46" in capsys.readouterr().out

    @pytest.mark.parametrize("scheme,count", [("phantom", 210), ("grouping", 30), ("min-g", 630)])
    def test_schedule(self, scheme, count, tmp_path):
        out = tmp_path / "s.json"
        assert main(["schedule", "--scenario", "example1", "--scheme", scheme, "--out", str(out)]) == 0
        schedules = loads_schedules(out.read_text())
        assert sum(len(s.transmissions) for s in schedules) == count
        if scheme == "grouping":
            assert len(schedules) == 2

    def test_schedule_deterministic(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for p in (a, b):
            main(["schedule", "--scenario", "example1", "--scheme", "phantom", "--policy", "random",
                  "--seed", "3", "--out", str(p)])
        assert a.read_bytes() == b.read_bytes()

    def test_verify(self, tmp_path, capsys):
        out = tmp_path / "v.csv"
        assert main(["verify", "--scenario", "example1", "--scheme", "grouping", "--seeds", "1..3",
                     "--out", str(out)]) == 0
        assert "pass rate 1.0000" in capsys.readouterr().out
        assert out.read_text().startswith("seed,interval,s,kind")

    def test_infeasible_triple(self, capsys):
        code = main(["verify", "--scenario", "example1", "--scheme", "phantom",
                     "--ghat", "4", "--omega", "4", "--beta", "4", "--seeds", "1"])
        assert code == 2
        assert "infeasible" in capsys.readouterr().err

    def test_validation_error(self, scenario_file, capsys):
        path = scenario_file('tx_antennas: 4\ncache_ratio: "0.15"\ngroups: [[5, 2]]\n')
        assert main(["dof", "--scenario", path]) == 1
        assert "cache_ratio" in capsys.readouterr().err

    def test_schedule_cap(self, capsys):
        assert main(["schedule", "--scenario", "table1a", "--scheme", "min-g"]) == 1
        assert "exceeds" in capsys.readouterr().err

    def test_partial_triple(self, capsys):
        assert main(["schedule", "--scenario", "example1", "--scheme", "phantom", "--ghat", "4"]) == 1
