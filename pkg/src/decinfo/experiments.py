"""Experiment configurations and noise-variance sweeps behind the CSV outputs."""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .compaction import compaction_mask, ideal_lowpass_mask, theorem2_ratio
from .errors import ConfigError
from .fir_design import gaussian_bound_loss, optimize_fir
from .inforate import input_rate, mi_rate_blocked
from .spectral import (
    DEFAULT_GRID_SIZE,
    BandMask,
    DecimationModel,
    FirFilter,
    FrequencyGrid,
    cross_from_json,
    fir_magnitude_squared,
    smallest_valid_grid,
    spectrum_from_json,
)

log = logging.getLogger(__name__)

MODES = ("fig3", "fig4", "fig5", "fig6")
AXES = ("ten_ln_sigma2", "sigma2")
SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class FilterSpec:
    kind: str  # none | ideal_lowpass | fir | fir_opt | compaction
    coeffs: tuple[float, ...] = ()
    order: int = 0

    @property
    def column(self) -> str:
        if self.kind == "ideal_lowpass":
            return "loss_ideal"
        if self.kind == "fir":
            return "loss_fir_" + "_".join(_coeff_label(c) for c in self.coeffs)
        if self.kind == "fir_opt":
            return f"loss_fir_opt_{self.order}"
        return f"loss_{self.kind}"


def _coeff_label(c: float) -> str:
    if float(c).is_integer():
        return str(int(c)).replace("-", "m")
    return format(c, "g").replace(".", "p").replace("-", "m")


def parse_filter(text: Any, where: str) -> FilterSpec:
    if not isinstance(text, str):
        raise ConfigError("filter entries must be strings", where)
    if text in ("none", "ideal_lowpass", "compaction"):
        return FilterSpec(text)
    if text.startswith("fir_opt:"):
        try:
            order = int(text.split(":", 1)[1])
        except ValueError as exc:
            raise ConfigError(f"bad order in {text!r}", where) from exc
        if not 1 <= order <= 8:
            raise ConfigError("fir_opt order must lie in [1, 8]", where)
        return FilterSpec("fir_opt", order=order)
    if text.startswith("fir:"):
        try:
            coeffs = json.loads(text.split(":", 1)[1])
            coeffs = tuple(float(c) for c in coeffs)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad coefficient list in {text!r}", where) from exc
        if not coeffs or not any(coeffs):
            raise ConfigError("an FIR filter needs a nonzero coefficient", where)
        return FilterSpec("fir", coeffs=coeffs)
    raise ConfigError(f"unknown filter {text!r}", where)


@dataclass(frozen=True)
class SweepSpec:
    axis: str = "ten_ln_sigma2"
    start: float = -20.0
    stop: float = 10.0
    points: int = 61
    explicit: tuple[float, ...] | None = None

    def values(self) -> np.ndarray:
        if self.explicit is not None:
            return np.array(self.explicit)
        return np.linspace(self.start, self.stop, self.points)

    def sigma2(self, x: float) -> float:
        return math.exp(x / 10.0) if self.axis == "ten_ln_sigma2" else float(x)


@dataclass(frozen=True)
class ExperimentConfig:
    model: Mapping[str, Any]
    M: int
    grid_size: int
    mode: str = "fig3"
    sweep: SweepSpec = field(default_factory=SweepSpec)
    filters: tuple[FilterSpec, ...] = (FilterSpec("none"),)
    output: str | None = None
    seed: int = 1
    extra: Mapping[str, Any] = field(default_factory=dict)

    @property
    def grid(self) -> FrequencyGrid:
        return FrequencyGrid(self.grid_size)


def _require_int(obj: Mapping[str, Any], key: str, where: str, minimum: int) -> int:
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError("must be an integer", where)
    if value < minimum:
        raise ConfigError(f"must be >= {minimum}", where)
    return value


def parse_config(obj: Any, grid_override: int | None = None, seed_override: int | None = None) -> ExperimentConfig:
    """Validate a decoded JSON config; errors name the offending field."""
    if not isinstance(obj, Mapping):
        raise ConfigError("top level must be an object", "<root>")
    if "model" not in obj:
        raise ConfigError("missing", "model")
    model = obj["model"]
    if not isinstance(model, Mapping) or "signal" not in model:
        raise ConfigError("needs a 'signal' spectrum", "model")
    has_noise = "noise" in model
    has_general = "observation" in model or "cross" in model
    if has_noise and has_general:
        raise ConfigError("give 'noise' or 'observation'+'cross', not both", "model")
    if not has_noise and not ("observation" in model and "cross" in model):
        raise ConfigError("needs 'noise' or both 'observation' and 'cross'", "model")
    if "M" not in obj:
        raise ConfigError("missing", "M")
    M = _require_int(obj, "M", "M", 2)

    mode = obj.get("mode", "fig3")
    if mode not in MODES:
        raise ConfigError(f"must be one of {', '.join(MODES)}", "mode")

    if grid_override is not None:
        grid_size = grid_override
    elif "grid_size" in obj:
        grid_size = _require_int(obj, "grid_size", "grid_size", 2)
    else:
        grid_size = smallest_valid_grid(M, DEFAULT_GRID_SIZE)
    if grid_size <= 0 or grid_size % (2 * M):
        raise ConfigError(f"{grid_size} is not divisible by 2*M = {2 * M}", "grid_size")

    sweep_obj = obj.get("sweep", {})
    if not isinstance(sweep_obj, Mapping):
        raise ConfigError("must be an object", "sweep")
    axis = sweep_obj.get("axis", "ten_ln_sigma2")
    if axis not in AXES:
        raise ConfigError(f"must be one of {', '.join(AXES)}", "sweep.axis")
    try:
        start = float(sweep_obj.get("start", -20.0))
        stop = float(sweep_obj.get("stop", 10.0))
    except (TypeError, ValueError) as exc:
        raise ConfigError("start/stop must be numbers", "sweep") from exc
    points = sweep_obj.get("points", 61)
    if isinstance(points, bool) or not isinstance(points, int) or points < 1:
        raise ConfigError("must be an integer >= 1", "sweep.points")
    if axis == "sigma2" and min(start, stop) <= 0:
        raise ConfigError("sigma2 values must be positive", "sweep")
    sweep = SweepSpec(axis, start, stop, points)

    raw_filters = obj.get("filters", ["none"])
    if not isinstance(raw_filters, list) or not raw_filters:
        raise ConfigError("must be a non-empty list", "filters")
    filters = tuple(parse_filter(f, f"filters[{i}]") for i, f in enumerate(raw_filters))
    columns = [f.column for f in filters]
    if len(set(columns)) != len(columns):
        raise ConfigError("duplicate filter entries", "filters")

    output = obj.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("must be a path string", "output")
    seed = seed_override if seed_override is not None else obj.get("seed", 1)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("must be an integer", "seed")
    extra = {k: v for k, v in obj.items() if k not in ("model", "M", "mode", "grid_size", "sweep", "filters", "output", "seed")}
    config = ExperimentConfig(model, M, grid_size, mode, sweep, filters, output, seed, extra)
    build_model(config)  # surface spectrum errors as config errors
    return config


def load_config(path: str | Path, grid_override: int | None = None, seed_override: int | None = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(str(exc), "config") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno} column {exc.colno}: {exc.msg}", "config") from exc
    return parse_config(obj, grid_override, seed_override)


def build_model(config: ExperimentConfig, sigma2: float | None = None) -> DecimationModel:
    """Model from the config; ``sigma2`` scales the noise spectrum (its shape)."""
    grid = config.grid
    spec = config.model
    try:
        signal = spectrum_from_json(spec["signal"], grid, "model.signal")
        if "noise" in spec:
            noise = spectrum_from_json(spec["noise"], grid, "model.noise")
            if sigma2 is not None:
                noise = noise.scaled(sigma2)
            return DecimationModel.additive(signal, noise, config.M)
        if sigma2 is not None:
            raise ConfigError("noise-variance sweeps need an additive model", "model")
        observation = spectrum_from_json(spec["observation"], grid, "model.observation")
        cross = cross_from_json(spec["cross"], grid, "model.cross")
        return DecimationModel.general(signal, observation, cross, config.M)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{type(exc).__name__}: {exc}", "model") from exc


def filter_mask(spec: FilterSpec, model: DecimationModel) -> BandMask:
    grid = model.grid
    if spec.kind == "none":
        return BandMask.ones(grid)
    if spec.kind == "ideal_lowpass":
        return ideal_lowpass_mask(grid, model.M)
    if spec.kind == "fir":
        return fir_magnitude_squared(FirFilter(spec.coeffs), grid)
    if spec.kind == "compaction":
        return compaction_mask(theorem2_ratio(model), model.M).mask
    raise ValueError(f"filter {spec.kind!r} has no fixed mask")


def filter_loss(spec: FilterSpec, model: DecimationModel) -> float:
    if spec.kind == "fir_opt":
        return optimize_fir(spec.order, model).loss
    return input_rate(model) - mi_rate_blocked(model, filter_mask(spec, model))


@dataclass(frozen=True)
class SweepResult:
    header: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]

    def column(self, name: str) -> np.ndarray:
        return np.array([row[self.header.index(name)] for row in self.rows])


def _sweep_point(config: ExperimentConfig, x: float) -> tuple[float, ...]:
    model = build_model(config, config.sweep.sigma2(x))
    if config.mode in ("fig3", "fig5"):
        return (x, input_rate(model), *(filter_loss(f, model) for f in config.filters))
    opt = optimize_fir(2, model)
    c1, c2 = (float(v) for v in opt.coeffs.coeffs[1:])
    if config.mode == "fig4":
        return (x, c1, c2, c1 - SQRT2)
    return (x, gaussian_bound_loss([1.0, SQRT2, 1.0], model) - opt.loss)


def sweep_header(config: ExperimentConfig) -> tuple[str, ...]:
    x = config.sweep.axis
    if config.mode in ("fig3", "fig5"):
        return (x, "available_info", *(f.column for f in config.filters))
    if config.mode == "fig4":
        return (x, "c1_opt", "c2_opt", "c1_minus_sqrt2")
    return (x, "extra_loss_sqrt2")


def run_sweep(config: ExperimentConfig, threads: int | None = None) -> SweepResult:
    """Evaluate every sweep point; results are in sweep order for any thread count."""
    if not config.model.get("noise"):
        raise ConfigError("noise-variance sweeps need an additive model", "model")
    xs = [float(x) for x in config.sweep.values()]
    log.info("sweeping %d points (%s, M=%d, N=%d)", len(xs), config.mode, config.M, config.grid_size)
    if threads is not None and threads <= 1:
        rows = [_sweep_point(config, x) for x in xs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda x: _sweep_point(config, x), xs))
    return SweepResult(sweep_header(config), tuple(rows))


def format_number(value: float) -> str:
    return format(float(value), ".17g")


def write_csv(path: str | Path, result: SweepResult) -> None:
    lines = [",".join(result.header)]
    lines += [",".join(format_number(v) for v in row) for row in result.rows]
    Path(path).write_text("\n".join(lines) + "\n")


def summarize(config: ExperimentConfig, result: SweepResult, output: str | None) -> dict[str, Any]:
    summary: dict[str, Any] = {
        "mode": config.mode,
        "M": config.M,
        "grid_size": config.grid_size,
        "points": len(result.rows),
        "output": output,
        "columns": {},
    }
    for name in result.header[1:]:
        col = result.column(name)
        summary["columns"][name] = {"min": float(np.min(col)), "max": float(np.max(col))}
    return summary


def run_experiment(config: ExperimentConfig, threads: int | None = None, output: str | None = None) -> dict[str, Any]:
    """Run the sweep, write the CSV and return a JSON-ready summary."""
    result = run_sweep(config, threads)
    path = output or config.output or f"{config.mode}.csv"
    write_csv(path, result)
    log.info("wrote %s", path)
    return summarize(config, result, str(path))


def explicit_sigma2_sweep(config: ExperimentConfig, values: Sequence[float]) -> ExperimentConfig:
    """Same config swept over the listed noise variances."""
    values = tuple(float(v) for v in values)
    if not values or any(v <= 0 for v in values):
        raise ConfigError("noise variances must be positive", "--sigma2")
    sweep = SweepSpec("sigma2", values[0], values[-1], len(values), values)
    return ExperimentConfig(
        config.model, config.M, config.grid_size, config.mode, sweep,
        config.filters, config.output, config.seed, config.extra,
    )
