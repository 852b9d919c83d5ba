import csv
import json

import numpy as np
import pytest

from hawkdove import io
from hawkdove.cli import REFERENCE_CONFIGS, main, parse_config_id
from hawkdove.domain import Role
from hawkdove.evolution import GaConfig, evolve
from hawkdove.scenario_gen import GenSpec, generate

from conftest import make_scenario


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "s.json"
    assert main(["generate", "--n", "12", "--seed", "4", "--out", str(path)]) == 0
    return path


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestScenarioFormat:
    def test_round_trip_byte_identical(self, tmp_path):
        sc = generate(GenSpec(n=15, seed=2))
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        io.write_scenario(a, sc)
        io.write_scenario(b, io.read_scenario(a))
        assert a.read_bytes() == b.read_bytes()

    def test_roles_round_trip(self, tmp_path):
        sc = make_scenario([(10, 4, 8, 12, Role.DOVE_SELLER), (2, 5, 8, 12, Role.BUYER)])
        io.write_scenario(tmp_path / "r.json", sc)
        assert io.read_scenario(tmp_path / "r.json") == sc

    def test_keys(self, scenario_file):
        doc = json.loads(scenario_file.read_text())
        assert {"thv", "line_limit", "microgrids"} <= doc.keys()
        assert set(doc["microgrids"][0]) == {"id", "energy", "bt", "st", "capacity",
                                             "cycles_remaining", "cycles_max"}

    @pytest.mark.parametrize("doc", [[], {"thv": 5}, {"thv": 5, "line_limit": 10, "microgrids": [{"id": 0}]},
                                     {"thv": 5, "line_limit": 10, "microgrids": [
                                         {"id": 0, "energy": 20, "bt": 1, "st": 2, "capacity": 10,
                                          "cycles_remaining": 1, "cycles_max": 2}]}])
    def test_malformed(self, doc):
        with pytest.raises(io.ScenarioFormatError):
            io.scenario_from_dict(doc)

    def test_digest_ignores_roles(self):
        sc = make_scenario([(10, 4, 8, 12, None), (2, 5, 8, 12, None)])
        assert io.scenario_digest(sc) == io.scenario_digest(sc.with_roles([Role.HAWK_SELLER, Role.BUYER]))


class TestCsv:
    def test_fmt_nine_digits(self):
        assert io.fmt(1 / 3) == "0.333333333"
        assert io.fmt(7) == "7"

    def test_matrix_round_trip(self, tmp_path):
        m = np.random.default_rng(0).uniform(size=(4, 4))
        io.atomic_write(tmp_path / "m.csv", io.matrix_csv(m))
        np.testing.assert_array_equal(io.read_matrix_csv(tmp_path / "m.csv"), m)


class TestGenerateCommand:
    def test_deterministic(self, tmp_path, scenario_file):
        other = tmp_path / "t.json"
        main(["generate", "--n", "12", "--seed", "4", "--out", str(other)])
        assert other.read_bytes() == scenario_file.read_bytes()

    def test_default_hundred(self, tmp_path, monkeypatch):
        monkeypatch.setenv("HAWKDOVE_OUTPUT_DIR", str(tmp_path))
        assert main(["generate", "--n", "100", "--seed", "120"]) == 0
        assert len(io.read_scenario(tmp_path / "scenario.json").microgrids) == 100

    def test_zero_n_fails(self, tmp_path, capsys):
        assert main(["generate", "--n", "0", "--out", str(tmp_path / "x.json")]) != 0
        err = capsys.readouterr().err.strip()
        assert err and "\n" not in err

    def test_bad_range_fails(self, tmp_path):
        assert main(["generate", "--energy-range", "9", "2", "--out", str(tmp_path / "x.json")]) != 0


class TestRunCommand:
    def _run(self, scenario_file, out, *extra):
        return main(["run", "--scenario", str(scenario_file), "--out", str(out),
                     "--generations", "3", "--pop", "8", "--elite", "2", *extra])

    def test_outputs(self, tmp_path, scenario_file):
        assert self._run(scenario_file, tmp_path / "r") == 0
        stats = _rows(tmp_path / "r" / "stats.csv")
        assert tuple(stats[0]) == io.STATS_COLUMNS
        assert len(stats) == 1 + 3
        trades = _rows(tmp_path / "r" / "best_trades.csv")
        assert len(trades) == 12 and all(len(r) == 12 for r in trades)
        settle = _rows(tmp_path / "r" / "settlement.csv")
        assert tuple(settle[0]) == io.SETTLEMENT_COLUMNS and len(settle) == 13
        manifest = json.loads((tmp_path / "r" / "manifest.json").read_text())
        for key in ("config", "seed", "artifact_version", "scenario_digest", "wall_clock_seconds",
                    "final_stable_count", "final_best_fitness", "gen_spec"):
            assert key in manifest

    def test_single_generation(self, tmp_path, scenario_file):
        assert self._run(scenario_file, tmp_path / "r", "--generations", "1") == 0
        assert len(_rows(tmp_path / "r" / "stats.csv")) == 2

    def test_identical_stats(self, tmp_path, scenario_file):
        self._run(scenario_file, tmp_path / "a")
        self._run(scenario_file, tmp_path / "b")
        assert (tmp_path / "a" / "stats.csv").read_bytes() == (tmp_path / "b" / "stats.csv").read_bytes()

    def test_manifest_reproduces_bit_exactly(self, tmp_path, scenario_file):
        self._run(scenario_file, tmp_path / "r", "--seed", "9")
        manifest = json.loads((tmp_path / "r" / "manifest.json").read_text())
        result = evolve(io.read_scenario(scenario_file), GaConfig.from_dict(manifest["config"]))
        assert result.best_breakdown.score == manifest["final_best_fitness"]
        assert io.scenario_digest(io.read_scenario(scenario_file)) == manifest["scenario_digest"]

    def test_missing_scenario(self, tmp_path):
        assert main(["run", "--scenario", str(tmp_path / "nope.json")]) != 0

    def test_invalid_config(self, tmp_path, scenario_file):
        assert self._run(scenario_file, tmp_path / "r", "--elite", "8") != 0


class TestSweepCommand:
    def test_parse_config_id(self):
        assert parse_config_id("G400_P80_E14_M0.007") == dict(generations=400, pop_size=80, elite_size=14,
                                                               p_min=0.007)
        assert len(REFERENCE_CONFIGS) == 5

    def test_single_point_matches_run(self, tmp_path, scenario_file, capsys):
        main(["run", "--scenario", str(scenario_file), "--out", str(tmp_path / "r"),
              "--generations", "4", "--pop", "8", "--elite", "2", "--pmin", "0.01"])
        assert main(["sweep", "--scenario", str(scenario_file), "--out", str(tmp_path / "sw.csv"),
                     "--config-id", "G4_P8_E2_M0.01"]) == 0
        rows = _rows(tmp_path / "sw.csv")
        assert tuple(rows[0]) == io.SWEEP_COLUMNS and len(rows) == 2
        manifest = json.loads((tmp_path / "r" / "manifest.json").read_text())
        row = dict(zip(rows[0], rows[1]))
        assert row["config_id"] == "G4_P8_E2_M0.01"
        assert row["fitness"] == io.fmt(manifest["final_best_fitness"])
        assert int(row["stable_count"]) == manifest["final_stable_count"]

    def test_cartesian_grid(self, tmp_path, scenario_file):
        assert main(["sweep", "--scenario", str(scenario_file), "--out", str(tmp_path / "sw.csv"),
                     "--generations", "2", "3", "--pop", "6", "--elite", "1", "2", "--pmin", "0.01"]) == 0
        assert len(_rows(tmp_path / "sw.csv")) == 1 + 4

    def test_empty_grid(self, scenario_file, capsys):
        assert main(["sweep", "--scenario", str(scenario_file)]) != 0
        assert "empty" in capsys.readouterr().err

    def test_budget(self, scenario_file):
        assert main(["sweep", "--scenario", str(scenario_file), "--reference", "--budget", "3"]) != 0

    def test_partial_grid(self, scenario_file):
        assert main(["sweep", "--scenario", str(scenario_file), "--generations", "3"]) != 0


class TestOracleCommand:
    def test_two_party(self, tmp_path, capsys):
        sc = make_scenario([(10, 4, 8, 12, Role.HAWK_SELLER), (2, 5, 8, 12, Role.BUYER)], thv=4)
        io.write_scenario(tmp_path / "o.json", sc)
        assert main(["oracle", "--scenario", str(tmp_path / "o.json"), "--grid-step", "1",
                     "--generations", "60"]) == 0
        ratio = float(capsys.readouterr().out.strip().splitlines()[-1].split()[-1])
        assert ratio >= 0.99

    def test_no_valid_pairs(self, tmp_path, capsys):
        sc = make_scenario([(2, 5, 8, 12, Role.BUYER), (6, 4, 8, 12, Role.INACTIVE)])
        io.write_scenario(tmp_path / "o.json", sc)
        assert main(["oracle", "--scenario", str(tmp_path / "o.json"), "--generations", "5"]) == 0
        assert capsys.readouterr().out.strip().endswith("ratio:          1.0000")

    def test_three_party_four_decimals(self, tmp_path, capsys):
        sc = make_scenario([(10, 4, 8, 12, Role.HAWK_SELLER), (2, 5, 8, 12, Role.BUYER),
                            (3, 6, 9, 12, Role.BUYER)])
        io.write_scenario(tmp_path / "o.json", sc)
        assert main(["oracle", "--scenario", str(tmp_path / "o.json"), "--generations", "60"]) == 0
        last = capsys.readouterr().out.strip().splitlines()[-1].split()[-1]
        assert len(last.split(".")[1]) == 4

    def test_random_instance(self, capsys):
        assert main(["oracle", "--instance-seed", "3", "--generations", "20"]) == 0

    def test_refuses_large(self, tmp_path, capsys):
        rows = [(10, 4, 8, 12, Role.HAWK_SELLER)] * 3 + [(2, 5, 8, 12, Role.BUYER)] * 3
        io.write_scenario(tmp_path / "o.json", make_scenario(rows))
        assert main(["oracle", "--scenario", str(tmp_path / "o.json")]) != 0
        assert "max_cells" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "hawkdove", "generate", "--n", "3", "--out", "-"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert len(json.loads(proc.stdout)["microgrids"]) == 3
