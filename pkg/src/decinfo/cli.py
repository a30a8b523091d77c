"""Command-line front end.

Exit codes: 0 on success, 2 for invalid input (config, arguments, spectra),
3 for numerical failures.  Results go to stdout, logs to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Any, Sequence

import numpy as np

from .compaction import compaction_mask, theorem2_ratio
from .errors import ConfigError, DecInfoError
from .experiments import (
    ExperimentConfig,
    explicit_sigma2_sweep,
    filter_mask,
    load_config,
    run_experiment,
)
from .experiments import build_model as _build_model
from .fir_design import optimize_fir
from .inforate import mi_rate_scalar, relevant_loss_rate
from .relative_loss import RationalBandMask, relative_loss_rate
from .simulate import empirical_check, synthesize_gaussian, write_dump
from .spectral import FirFilter

log = logging.getLogger("decinfo")

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _print_json(obj: Any) -> None:
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _config(args: argparse.Namespace) -> ExperimentConfig:
    return load_config(args.config, grid_override=args.grid, seed_override=args.seed)


def _single_sigma2(args: argparse.Namespace) -> float | None:
    if args.sigma2 is None:
        return None
    if len(args.sigma2) != 1:
        raise ConfigError("give a single noise variance for this command", "--sigma2")
    if args.sigma2[0] <= 0:
        raise ConfigError("must be positive", "--sigma2")
    return args.sigma2[0]


def cmd_inforate(args: argparse.Namespace) -> int:
    config = _config(args)
    model = _build_model(config, _single_sigma2(args))
    per_sample = mi_rate_scalar(
        model.signal_psd, model.observation_psd, model.cross.magnitude_squared()
    )
    reports = {}
    for spec in config.filters:
        if spec.kind == "fir_opt":
            design = optimize_fir(spec.order, model)
            mask = filter_mask(type(spec)("fir", tuple(design.coeffs.coeffs)), model)
        else:
            mask = filter_mask(spec, model)
        reports[spec.column.removeprefix("loss_")] = relevant_loss_rate(model, mask).as_dict()
    _print_json(
        {
            "M": model.M,
            "grid_size": model.grid.n_points,
            "available_info_per_sample": per_sample,
            "filters": reports,
        }
    )
    return 0


def cmd_compaction(args: argparse.Namespace) -> int:
    config = _config(args)
    model = _build_model(config, _single_sigma2(args))
    result = compaction_mask(theorem2_ratio(model), model.M)
    result.write_csv(args.out)
    report = relevant_loss_rate(model, result.mask)
    _print_json(
        {
            "M": model.M,
            "grid_size": model.grid.n_points,
            "output": args.out,
            "passed_bins": int(result.mask.gains.sum()),
            **report.as_dict(),
        }
    )
    return 0


def cmd_relative_loss(args: argparse.Namespace) -> int:
    try:
        flags = [int(v) for v in args.pass_flags.split(",")]
    except ValueError as exc:
        raise ConfigError("expected comma-separated 0/1 flags", "--pass") from exc
    if any(f not in (0, 1) for f in flags):
        raise ConfigError("flags must be 0 or 1", "--pass")
    if len(flags) != args.L * args.M:
        raise ConfigError(f"expected L*M = {args.L * args.M} flags, got {len(flags)}", "--pass")
    if args.L < 1 or args.M < 1:
        raise ConfigError("L and M must be positive", "--L/--M")
    result = relative_loss_rate(RationalBandMask(args.L, args.M, tuple(bool(f) for f in flags)))
    print(result)
    return 0


def cmd_fir_opt(args: argparse.Namespace) -> int:
    config = _config(args)
    model = _build_model(config, _single_sigma2(args))
    if not model.is_additive:
        raise ConfigError("FIR design needs an additive model", "model")
    if not 1 <= args.order <= 8:
        raise ConfigError("must lie in [1, 8]", "--order")
    result = optimize_fir(args.order, model)
    _print_json(
        {
            "coeffs": [float(c) for c in result.coeffs.coeffs],
            "loss": result.loss,
            "objective_evals": result.objective_evals,
            "converged": result.converged,
            "cycles": result.cycles,
        }
    )
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _config(args)
    model = _build_model(config, _single_sigma2(args))
    seed = config.seed if args.seed is None else args.seed
    record = synthesize_gaussian(model.observation_psd, args.n, seed, "observation")
    sidecar = write_dump(args.out, record, dict(config.model))
    taps = args.fir if args.fir is not None else config.extra.get("simulate", {}).get("fir", [1.0])
    report = empirical_check(model, FirFilter(taps), model.M, args.n, seed)
    _print_json(
        {
            "output": args.out,
            "sidecar": str(sidecar),
            "n": args.n,
            "seed": seed,
            "fir": [float(t) for t in taps],
            **report.as_dict(),
        }
    )
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _config(args)
    if args.sigma2 is not None:
        config = explicit_sigma2_sweep(config, args.sigma2)
    summary = run_experiment(config, threads=args.threads, output=args.out)
    _print_json(summary)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=int, default=None, help="grid size N (default 4096, rounded up to a multiple of 2M)")
    common.add_argument("--seed", type=int, default=None, help="PRNG seed (default 1)")
    common.add_argument("--threads", type=int, default=None, help="sweep worker threads (default: all cores)")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    parser = argparse.ArgumentParser(
        prog="decinfo",
        description="Information loss rates and anti-aliasing filter design for decimators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(name: str, helptext: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--sigma2", type=_float_list, default=None, help="noise variance(s), scaling the noise spectrum")
        return p

    p = with_config("inforate", "rates and relevant loss for each configured filter")
    p.set_defaults(func=cmd_inforate)

    p = with_config("compaction", "optimal energy-compaction mask")
    p.add_argument("--out", required=True, help="mask CSV path")
    p.set_defaults(func=cmd_compaction)

    p = sub.add_parser("relative-loss", parents=[common], help="exact relative loss of a rational brick-wall mask")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--pass", dest="pass_flags", required=True, help="comma-separated 0/1 per sub-band")
    p.set_defaults(func=cmd_relative_loss)

    p = with_config("fir-opt", "optimize an FIR filter against the Gaussian bound")
    p.add_argument("--order", type=int, required=True)
    p.set_defaults(func=cmd_fir_opt)

    p = with_config("simulate", "synthesize samples and check the output PSD empirically")
    p.add_argument("--n", type=int, default=1 << 17, help="number of samples (power of two >= 1024)")
    p.add_argument("--out", required=True, help="sample dump path")
    p.add_argument("--fir", type=_float_list, default=None, help="filter taps for the empirical check")
    p.set_defaults(func=cmd_simulate)

    p = with_config("sweep", "noise-variance sweep reproducing a figure's data")
    p.add_argument("--out", default=None, help="CSV path (default: config 'output')")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DecInfoError, ValueError) as exc:
        print(f"invalid input: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
