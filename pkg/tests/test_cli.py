import csv
import io
import json
from pathlib import Path

import pytest

from homsim import __version__
from homsim.cli import ConfigError, build_config, main, report
from homsim.experiments import EXPERIMENTS

CONFIGS = Path(__file__).resolve().parent.parent / "docs" / "configs"


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def run(*argv):
    return main([*argv, "--quiet"])


@pytest.mark.parametrize("name", sorted(EXPERIMENTS))
def test_every_experiment_runs_with_defaults(name, tmp_path):
    assert run(name, "--out", str(tmp_path)) == 0
    assert (tmp_path / f"{name}.csv").is_file()
    record = json.loads((tmp_path / f"{name}.json").read_text())
    assert record["experiment"] == name
    assert record["metrics"]


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.yaml")), ids=lambda p: p.stem)
def test_documented_configs_run(path, tmp_path):
    assert run("run", "--config", str(path), "--out", str(tmp_path)) == 0
    assert (tmp_path / f"{path.stem}.csv").is_file()


def test_documented_configs_cover_all_experiments():
    assert {p.stem for p in CONFIGS.glob("*.yaml")} == set(EXPERIMENTS)


def test_dip_scan_csv(tmp_path):
    assert run("dip-scan", "--out", str(tmp_path)) == 0
    rows = read_csv(tmp_path / "dip-scan.csv")
    taus = [float(r["parameter"]) for r in rows]
    probs = [float(r["probability"]) for r in rows]
    zero = taus.index(0.0)
    assert probs[zero] == pytest.approx(0.0, abs=1e-12)
    assert all(a >= b for a, b in zip(probs[:zero], probs[1:zero + 1]))
    assert all(a <= b for a, b in zip(probs[zero:], probs[zero + 1:]))
    assert probs[0] == pytest.approx(0.5, abs=1e-3)


def test_tritter_distribution_csv(tmp_path):
    assert run("multiport-dist", "--out", str(tmp_path)) == 0
    rows = read_csv(tmp_path / "multiport-dist.csv")
    assert len(rows) == 10
    dist = {(r["mode_0"], r["mode_1"], r["mode_2"]): float(r["probability"]) for r in rows}
    assert dist[("1", "1", "1")] == pytest.approx(1 / 3, abs=1e-12)
    for k in [("3", "0", "0"), ("0", "3", "0"), ("0", "0", "3")]:
        assert dist[k] == pytest.approx(2 / 9, abs=1e-12)
    assert sorted(dist.values())[:6] == [0.0] * 6
    assert sum(dist.values()) == pytest.approx(1.0, abs=1e-9)


def test_fermion_multiport(tmp_path):
    assert run("multiport-dist", "--param", "statistics=fermion", "--out", str(tmp_path)) == 0
    rows = read_csv(tmp_path / "multiport-dist.csv")
    nonzero = [r for r in rows if float(r["probability"]) > 0]
    assert [(r["mode_0"], r["mode_1"], r["mode_2"]) for r in nonzero] == [("1", "1", "1")]


@pytest.mark.parametrize("name", ["bell-bsm", "multiport-dist", "sample"])
def test_distribution_columns_sum_to_one(name, tmp_path):
    assert run(name, "--out", str(tmp_path)) == 0
    rows = read_csv(tmp_path / f"{name}.csv")
    col = "frequency" if name == "sample" else "probability"
    assert sum(float(r[col]) for r in rows) == pytest.approx(1.0, abs=1e-9)


def test_sample_is_deterministic(tmp_path):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert run("sample", "--seed", "7", "--out", str(a)) == 0
    assert run("sample", "--seed", "7", "--out", str(b)) == 0
    assert run("sample", "--seed", "8", "--out", str(c)) == 0
    first = (a / "sample.csv").read_bytes()
    assert first == (b / "sample.csv").read_bytes()
    assert first != (c / "sample.csv").read_bytes()


def test_run_record(tmp_path):
    assert run("klm-verify", "--seed", "3", "--out", str(tmp_path)) == 0
    record = json.loads((tmp_path / "klm-verify.json").read_text())
    assert record["seed"] == 3
    assert record["version"] == __version__
    assert len(record["config_hash"]) == 64
    assert record["wall_time"] >= 0
    assert record["config"]["seed"] == 3
    m = record["metrics"]
    assert m["p_ns"]["computed"] == pytest.approx(0.25, abs=1e-9)
    assert m["p_cz"]["computed"] == pytest.approx(1 / 16, abs=1e-9)
    assert m["p_cnot"]["computed"] == pytest.approx(1 / 16, abs=1e-9)


def test_config_hash_tracks_content():
    a = build_config({"experiment": "sample", "seed": 1})
    b = build_config({"experiment": "sample", "seed": 1, "output_path": "elsewhere"})
    c = build_config({"experiment": "sample", "seed": 2})
    assert a.config_hash == b.config_hash != c.config_hash


class TestRejection:
    def test_unknown_parameter(self, tmp_path):
        out = tmp_path / "out"
        assert run("dip-scan", "--param", "sigmaa=2", "--out", str(out)) == 2
        assert not out.exists()

    def test_unknown_top_level_key(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("experiment: dip-scan\ncolour: red\n")
        assert run("run", "--config", str(cfg), "--out", str(tmp_path / "out")) == 2
        assert not (tmp_path / "out").exists()

    def test_bad_yaml(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("experiment: [dip-scan\n")
        assert run("run", "--config", str(cfg)) == 2

    def test_missing_config_file(self, tmp_path):
        assert run("run", "--config", str(tmp_path / "absent.yaml")) == 2

    def test_wrong_types(self):
        with pytest.raises(ConfigError):
            build_config({"experiment": "dip-scan", "parameters": {"points": "many"}})
        with pytest.raises(ConfigError):
            build_config({"experiment": "dip-scan", "parameters": {"sigma": True}})
        with pytest.raises(ConfigError):
            build_config({"experiment": "nope"})
        with pytest.raises(ConfigError):
            build_config({"experiment": "sample", "seed": -1})

    def test_experiment_mismatch(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("experiment: sample\n")
        assert run("dip-scan", "--config", str(cfg), "--out", str(tmp_path)) == 2

    def test_capacity(self, tmp_path):
        assert run("multiport-dist", "--param", "unitary=random", "--param", "modes=17",
                   "--param", f"input={[1] + [0] * 16}", "--out", str(tmp_path)) == 3
        assert run("multiport-dist", "--param", "input=[11,0,0]", "--out", str(tmp_path)) == 3

    def test_numerical_guard(self, tmp_path):
        # delay window beyond the spectral grid period aliases
        assert run("jsa-scan", "--param", "tau_max=1000", "--out", str(tmp_path)) == 1


class TestReport:
    def test_table(self, tmp_path, capsys):
        assert run("klm-verify", "--out", str(tmp_path)) == 0
        assert run("bell-bsm", "--out", str(tmp_path)) == 0
        buf = io.StringIO()
        assert report(tmp_path, buf) == 0
        lines = buf.getvalue().splitlines()
        assert lines[0].split() == ["experiment", "metric", "expected", "computed", "|delta|"]
        rows = {tuple(line.split()[:2]): line.split()[2:] for line in lines[1:]}
        assert float(rows[("klm-verify", "p_ns")][1]) == pytest.approx(0.25, abs=1e-9)
        assert float(rows[("klm-verify", "p_cz")][1]) == pytest.approx(0.0625, abs=1e-9)
        assert float(rows[("klm-verify", "p_cnot")][1]) == pytest.approx(0.0625, abs=1e-9)
        assert float(rows[("bell-bsm", "bsm_success_rate")][1]) == pytest.approx(0.5, abs=1e-9)

    def test_via_main(self, tmp_path, capsys):
        run("dip-scan", "--out", str(tmp_path))
        capsys.readouterr()
        assert main(["report", str(tmp_path)]) == 0
        assert "p_cc_zero_delay" in capsys.readouterr().out

    def test_empty_directory(self, tmp_path):
        assert main(["report", str(tmp_path)]) == 4
        assert main(["report", str(tmp_path / "missing")]) == 4


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out
