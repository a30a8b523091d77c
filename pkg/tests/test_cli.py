from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import pytest

from decinfo.cli import EXIT_CONFIG, EXIT_NUMERICAL, main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
WHITE = str(CONFIGS / "white.json")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write_config(tmp_path, obj, name="c.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


class TestRelativeLoss:
    def test_lowpass(self, capsys):
        code, out, _ = run(capsys, "relative-loss", "--M", "2", "--L", "1", "--pass", "1,0")
        assert code == 0 and out.startswith("loss = 1/2")

    def test_all_pass_m3(self, capsys):
        code, out, _ = run(capsys, "relative-loss", "--M", "3", "--L", "1", "--pass", "1,1,1")
        assert code == 0 and out.startswith("loss = 2/3")

    @pytest.mark.parametrize("flags", ["1,0,1", "1,2", "a,b"])
    def test_bad_flags(self, capsys, flags):
        code, _, err = run(capsys, "relative-loss", "--M", "2", "--L", "1", "--pass", flags)
        assert code == EXIT_CONFIG and "--pass" in err


class TestInforate:
    def test_white_white(self, capsys):
        code, out, _ = run(capsys, "inforate", "--config", WHITE)
        assert code == 0
        report = json.loads(out)
        half_ln2 = 0.5 * math.log(2.0)
        assert report["available_info_per_sample"] == pytest.approx(half_ln2, abs=1e-12)
        for filt in report["filters"].values():
            assert filt["relevant_loss"] == pytest.approx((2 - 1) * half_ln2, abs=1e-12)

    def test_sigma2(self, capsys):
        code, out, _ = run(capsys, "inforate", "--config", WHITE, "--sigma2", "3")
        assert code == 0
        assert json.loads(out)["available_info_per_sample"] == pytest.approx(0.5 * math.log(4 / 3))

    def test_malformed_json(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"M": 2,\n  "model": ]')
        code, _, err = run(capsys, "inforate", "--config", str(path))
        assert code == EXIT_CONFIG and "line 2" in err

    def test_bad_field(self, capsys, tmp_path):
        obj = json.loads(Path(WHITE).read_text())
        obj["M"] = 0
        code, _, err = run(capsys, "inforate", "--config", write_config(tmp_path, obj))
        assert code == EXIT_CONFIG and "M" in err

    def test_bad_grid(self, capsys):
        code, _, err = run(capsys, "inforate", "--config", WHITE, "--grid", "4090")
        assert code == EXIT_CONFIG and "grid_size" in err

    def test_numerical_failure(self, capsys, tmp_path):
        obj = json.loads(Path(WHITE).read_text())
        obj["model"]["noise"]["variance"] = 0.0
        code, _, err = run(capsys, "inforate", "--config", write_config(tmp_path, obj))
        assert code == EXIT_NUMERICAL and "DegenerateDenominator" in err


class TestOtherCommands:
    def test_compaction(self, capsys, tmp_path):
        cfg = str(CONFIGS / "fig3.json")
        out_csv = tmp_path / "mask.csv"
        code, out, _ = run(capsys, "compaction", "--config", cfg, "--out", str(out_csv), "--grid", "512")
        assert code == 0
        rows = list(csv.DictReader(out_csv.open()))
        assert len(rows) == 512 and set(rows[0]) == {"bin_index", "theta", "gain", "winner_k"}
        assert json.loads(out)["passed_bins"] == sum(float(r["gain"]) for r in rows)

    def test_fir_opt(self, capsys):
        code, out, _ = run(capsys, "fir-opt", "--config", str(CONFIGS / "fig3.json"), "--order", "1", "--grid", "512")
        assert code == 0
        coeffs = json.loads(out)["coeffs"]
        assert coeffs[0] == 1.0 and coeffs[1] == pytest.approx(1.0, abs=1e-3)

    def test_fir_opt_order_range(self, capsys):
        code, _, _ = run(capsys, "fir-opt", "--config", WHITE, "--order", "0")
        assert code == EXIT_CONFIG

    def test_simulate(self, capsys, tmp_path):
        dump = tmp_path / "x.bin"
        code, out, _ = run(capsys, "simulate", "--config", WHITE, "--n", "4096", "--out", str(dump))
        assert code == 0
        report = json.loads(out)
        assert report["seed"] == 1 and report["n"] == 4096
        assert dump.stat().st_size == 8 + 8 * 4096
        assert json.loads(Path(report["sidecar"]).read_text())["n"] == 4096

    def test_simulate_bad_length(self, capsys, tmp_path):
        code, _, _ = run(capsys, "simulate", "--config", WHITE, "--n", "1000", "--out", str(tmp_path / "x"))
        assert code == EXIT_CONFIG

    def test_sweep_thread_determinism(self, capsys, tmp_path):
        cfg = str(CONFIGS / "fig3.json")
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        common = ["--config", cfg, "--grid", "512", "--sigma2", "0.1,1,10"]
        assert run(capsys, "sweep", *common, "--out", str(a), "--threads", "1")[0] == 0
        assert run(capsys, "sweep", *common, "--out", str(b), "--threads", "4")[0] == 0
        assert a.read_bytes() == b.read_bytes()
        header = a.read_text().splitlines()[0].split(",")
        assert header[:2] == ["sigma2", "available_info"]

    def test_missing_subcommand(self):
        with pytest.raises(SystemExit):
            main([])
