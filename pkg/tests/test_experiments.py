from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pytest

from decinfo.errors import ConfigError
from decinfo.experiments import (
    FilterSpec,
    SweepSpec,
    build_model,
    explicit_sigma2_sweep,
    format_number,
    load_config,
    parse_config,
    parse_filter,
    run_experiment,
    run_sweep,
    sweep_header,
)

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

BASE = {
    "model": {"signal": {"type": "trigpoly", "r": [1.0, 0.5]}, "noise": {"type": "white", "variance": 1.0}},
    "M": 2,
    "grid_size": 512,
    "sweep": {"axis": "ten_ln_sigma2", "start": -20, "stop": 10, "points": 4},
    "filters": ["ideal_lowpass", "fir:[1,1]", "none"],
}


def config(**overrides):
    obj = json.loads(json.dumps(BASE))
    obj.update(overrides)
    return obj


class TestFilters:
    @pytest.mark.parametrize(
        "text, column",
        [
            ("none", "loss_none"),
            ("ideal_lowpass", "loss_ideal"),
            ("compaction", "loss_compaction"),
            ("fir:[1,1]", "loss_fir_1_1"),
            ("fir:[1,-0.5]", "loss_fir_1_m0p5"),
            ("fir_opt:2", "loss_fir_opt_2"),
        ],
    )
    def test_columns(self, text, column):
        assert parse_filter(text, "f").column == column

    @pytest.mark.parametrize("text", ["lowpass", "fir:[0,0]", "fir:[x]", "fir_opt:9", "fir_opt:a", 3])
    def test_rejects(self, text):
        with pytest.raises(ConfigError):
            parse_filter(text, "filters[0]")


class TestParse:
    def test_defaults(self):
        obj = config()
        del obj["grid_size"], obj["sweep"], obj["filters"]
        cfg = parse_config(obj)
        assert cfg.grid_size == 4096 and cfg.seed == 1 and cfg.mode == "fig3"
        assert cfg.filters == (FilterSpec("none"),)
        assert cfg.sweep.points == 61

    def test_default_grid_for_m3(self):
        obj = config(M=3)
        del obj["grid_size"]
        assert parse_config(obj).grid_size % 6 == 0

    @pytest.mark.parametrize(
        "overrides, field",
        [
            ({"M": 1}, "M"),
            ({"M": "2"}, "M"),
            ({"grid_size": 510}, "grid_size"),
            ({"mode": "fig9"}, "mode"),
            ({"sweep": {"points": 0}}, "sweep.points"),
            ({"sweep": {"axis": "db"}}, "sweep.axis"),
            ({"filters": []}, "filters"),
            ({"filters": ["none", "none"]}, "filters"),
            ({"filters": ["none", "bogus"]}, "filters[1]"),
            ({"seed": 1.5}, "seed"),
            ({"model": {"signal": {"type": "trigpoly", "r": [1.0, 0.9]}, "noise": {"type": "white", "variance": 1.0}}}, "model"),
        ],
    )
    def test_field_diagnostics(self, overrides, field):
        with pytest.raises(ConfigError) as info:
            parse_config(config(**overrides))
        assert info.value.field == field or info.value.field.startswith(field)

    def test_missing_model(self):
        obj = config()
        del obj["model"]
        with pytest.raises(ConfigError) as info:
            parse_config(obj)
        assert info.value.field == "model"

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"M": 2,\n  "model": }')
        with pytest.raises(ConfigError) as info:
            load_config(path)
        assert "line 2" in str(info.value)

    def test_overrides(self):
        cfg = parse_config(config(), grid_override=1024, seed_override=9)
        assert cfg.grid_size == 1024 and cfg.seed == 9

    def test_shipped_configs_parse(self):
        for path in sorted(CONFIGS.glob("*.json")):
            load_config(path)


class TestSweep:
    def test_axis(self):
        assert SweepSpec().sigma2(0.0) == 1.0
        assert SweepSpec().sigma2(10.0) == pytest.approx(math.e)
        assert SweepSpec(axis="sigma2").sigma2(2.5) == 2.5

    def test_noise_scaling(self):
        cfg = parse_config(config())
        model = build_model(cfg, 3.0)
        assert np.allclose(model.noise_psd.values, 3.0)

    def test_fig3_columns_and_closed_form(self):
        cfg = parse_config(config(sweep={"start": -10, "stop": 0, "points": 3}))
        result = run_sweep(cfg, threads=1)
        assert result.header == ("ten_ln_sigma2", "available_info", "loss_ideal", "loss_fir_1_1", "loss_none")
        assert result.rows[-1][0] == 0.0
        assert result.column("available_info")[-1] == pytest.approx(math.log((2 + math.sqrt(3)) / 2), abs=1e-6)

    def test_other_headers(self):
        assert sweep_header(parse_config(config(mode="fig4", M=3, grid_size=516))) == (
            "ten_ln_sigma2", "c1_opt", "c2_opt", "c1_minus_sqrt2",
        )
        assert sweep_header(parse_config(config(mode="fig6", M=3, grid_size=516))) == (
            "ten_ln_sigma2", "extra_loss_sqrt2",
        )

    def test_fig4_row(self):
        cfg = explicit_sigma2_sweep(parse_config(config(mode="fig4", M=3, grid_size=516)), [1.0])
        (x, c1, c2, d), = run_sweep(cfg, threads=1).rows
        assert c2 == pytest.approx(1.0, abs=1e-3)
        assert d == c1 - math.sqrt(2)

    def test_threads_do_not_change_results(self, tmp_path):
        cfg = parse_config(config(filters=["ideal_lowpass", "fir_opt:1", "compaction"]))
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_experiment(cfg, threads=1, output=str(a))
        run_experiment(cfg, threads=4, output=str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_csv_round_trip(self, tmp_path):
        cfg = parse_config(config())
        path = tmp_path / "out.csv"
        summary = run_experiment(cfg, threads=1, output=str(path))
        result = run_sweep(cfg, threads=1)
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(result.header)
        for line, row in zip(lines[1:], result.rows):
            assert tuple(float(v) for v in line.split(",")) == row
        assert summary["points"] == 4 and summary["output"] == str(path)

    @pytest.mark.parametrize("value", [0.1, 1 / 3, math.pi, 1e-300, -2.5e17, 5e-324])
    def test_format_number(self, value):
        assert float(format_number(value)) == value

    def test_explicit_sweep(self):
        cfg = explicit_sigma2_sweep(parse_config(config()), [0.5, 2.0])
        assert cfg.sweep.axis == "sigma2"
        assert list(cfg.sweep.values()) == [0.5, 2.0]
        with pytest.raises(ConfigError):
            explicit_sigma2_sweep(cfg, [1.0, -1.0])
