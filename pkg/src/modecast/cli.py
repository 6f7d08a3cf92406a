"""Command-line interface: decompose, train, predict, and bench subcommands.

Configuration precedence is defaults < config file < flags. Every run
writes a manifest.json echoing the fully resolved configuration so the
run can be reproduced exactly. Exit codes: 0 success, 2 input or config
error, 3 numeric failure (including non-convergence under --strict),
4 benchmark finished with failed cells.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .bench import BenchDataset, run_benchmark, write_report
from .errors import ModecastError, NonFiniteError, NonFiniteLossError
from .fileio import atomic_write_text
from .models import KINDS, ModelConfig
from .pipeline import PipelineConfig, fit, load_bundle, predict_detail, save_bundle
from .series import read_csv_dataset
from .vmd import (
    BOUNDARIES,
    OMEGA_INITS,
    VmdConfig,
    decompose,
    write_modes_csv,
    write_modes_meta,
)

DEFAULTS: dict[str, object] = {
    # decomposition
    "k": 3,
    "alpha": 2000.0,
    "tau": 0.0,
    "epsilon": 1e-7,
    "max_iters": 500,
    "omega_init": "uniform",
    "boundary": "mirror",
    "dc_mode": False,
    # forecaster
    "model": "linear",
    "lookback": 96,
    "horizon": 24,
    "ma_kernel": 25,
    "learning_rate": 0.01,
    "l1_weight": 1e-4,
    "epochs": 100,
    "batch_size": 32,
    # run plumbing
    "no_vmd": False,
    "context_multiple": 4,
    "seed": 0,
    "jobs": 0,  # 0 means all available cores
    "out": "out",
    "strict": False,
    "figures": True,
}

_BOOL_WORDS = {
    "true": True,
    "false": False,
    "1": True,
    "0": False,
    "yes": True,
    "no": False,
    "on": True,
    "off": False,
}


def _coerce(key: str, raw: str) -> object:
    default = DEFAULTS[key]
    if isinstance(default, bool):
        word = raw.strip().lower()
        if word not in _BOOL_WORDS:
            raise ValueError(f"config key {key!r}: expected a boolean, got {raw!r}")
        return _BOOL_WORDS[word]
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw.strip()


def parse_config_file(path: str | Path) -> dict[str, object]:
    """Parse a flat key=value config file mirroring the flag names.

    Keys may use dashes or underscores; '#' starts a comment; blank lines
    are skipped. Unknown keys are an error.
    """
    values: dict[str, object] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip().replace("-", "_")
        if key not in DEFAULTS:
            raise ValueError(
                f"{path}:{lineno}: unknown config key {key!r}; "
                f"known keys: {sorted(DEFAULTS)}"
            )
        values[key] = _coerce(key, raw)
    return values


def resolve_config(
    file_values: dict[str, object] | None = None,
    flag_values: dict[str, object] | None = None,
) -> dict[str, object]:
    """Merge defaults, config-file values, and flag values, in that order.

    Flag entries that are None (flag not given) do not override.
    """
    merged = dict(DEFAULTS)
    if file_values:
        for key in file_values:
            if key not in DEFAULTS:
                raise ValueError(f"unknown config key {key!r}")
        merged.update(file_values)
    if flag_values:
        merged.update({k: v for k, v in flag_values.items() if v is not None})
    return merged


def _to_vmd_config(cfg: dict[str, object]) -> VmdConfig:
    return VmdConfig(
        k=cfg["k"],
        alpha=cfg["alpha"],
        tau=cfg["tau"],
        epsilon=cfg["epsilon"],
        max_iters=cfg["max_iters"],
        omega_init=cfg["omega_init"],
        seed=cfg["seed"],
        boundary=cfg["boundary"],
        dc_mode=cfg["dc_mode"],
    )


def _to_model_config(cfg: dict[str, object], channels: int = 1) -> ModelConfig:
    return ModelConfig(
        kind=cfg["model"],
        lookback=cfg["lookback"],
        horizon=cfg["horizon"],
        channels=channels,
        ma_kernel=cfg["ma_kernel"],
        learning_rate=cfg["learning_rate"],
        l1_weight=cfg["l1_weight"],
        epochs=cfg["epochs"],
        batch_size=cfg["batch_size"],
        seed=cfg["seed"],
    )


def _to_pipeline_config(cfg: dict[str, object]) -> PipelineConfig:
    return PipelineConfig(
        vmd=_to_vmd_config(cfg),
        model=_to_model_config(cfg),
        use_vmd=not cfg["no_vmd"],
        context_multiple=cfg["context_multiple"],
    )


def _jobs(cfg: dict[str, object]) -> int:
    n = int(cfg["jobs"])
    return n if n > 0 else (os.cpu_count() or 1)


def _write_manifest(
    out_dir: Path,
    command: str,
    inputs: list[str],
    cfg: dict[str, object],
    options: dict[str, object],
    outputs: list[str],
) -> Path:
    manifest = {
        "version": __version__,
        "command": command,
        "inputs": inputs,
        "config": {k: cfg[k] for k in sorted(cfg)},
        "options": options,
        "outputs": sorted(outputs),
    }
    return atomic_write_text(
        out_dir / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )


def _flag_values(args: argparse.Namespace) -> dict[str, object]:
    return {k: getattr(args, k) for k in DEFAULTS if hasattr(args, k)}


def _resolve(args: argparse.Namespace) -> dict[str, object]:
    file_values = parse_config_file(args.config) if args.config else None
    return resolve_config(file_values, _flag_values(args))


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="flat key=value config file")
    p.add_argument("--out", metavar="DIR", help="output directory (default: out)")
    p.add_argument("--seed", type=int, help="global random seed")
    p.add_argument("--jobs", type=int, help="parallel workers; 0 = all cores")
    p.add_argument(
        "--no-figures",
        dest="figures",
        action="store_const",
        const=False,
        help="skip PNG rendering, write delimited files only",
    )


def _add_vmd_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, help="number of modes")
    p.add_argument("--alpha", type=float, help="bandwidth penalty")
    p.add_argument("--tau", type=float, help="dual ascent step (0 disables)")
    p.add_argument("--epsilon", type=float, help="convergence tolerance")
    p.add_argument("--max-iters", type=int, help="iteration cap")
    p.add_argument("--omega-init", choices=OMEGA_INITS, help="center frequency init")
    p.add_argument("--boundary", choices=BOUNDARIES, help="boundary handling")
    p.add_argument(
        "--dc-mode", action="store_const", const=True, help="pin the first mode at 0"
    )


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=KINDS, help="forecaster kind")
    p.add_argument("--lookback", type=int, help="input window length")
    p.add_argument("--horizon", type=int, help="forecast length")
    p.add_argument("--ma-kernel", type=int, help="trend moving-average width (odd)")
    p.add_argument("--learning-rate", type=float, help="gradient descent step size")
    p.add_argument("--l1-weight", type=float, help="L1 penalty on weights")
    p.add_argument("--epochs", type=int, help="training epochs")
    p.add_argument("--batch-size", type=int, help="mini-batch size")
    p.add_argument(
        "--no-vmd",
        action="store_const",
        const=True,
        help="train directly on the scaled series, skipping decomposition",
    )
    p.add_argument(
        "--context-multiple",
        type=int,
        help="trailing context length for prediction, in lookback multiples",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modecast",
        description="Decompose time series into narrow-band modes and forecast them "
        "with one-layer linear models.",
    )
    parser.add_argument("--version", action="version", version=f"modecast {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_dec = sub.add_parser("decompose", help="decompose one column of a CSV into modes")
    p_dec.add_argument("input", help="CSV with a timestamp column then feature columns")
    p_dec.add_argument("--column", help="feature column name (default: first)")
    p_dec.add_argument(
        "--strict",
        action="store_const",
        const=True,
        help="exit 3 if the solver hits the iteration cap without converging",
    )
    _add_vmd_flags(p_dec)
    _add_common_flags(p_dec)
    p_dec.set_defaults(func=cmd_decompose)

    p_train = sub.add_parser("train", help="fit the scale/decompose/forecast pipeline")
    p_train.add_argument("input", help="training CSV")
    p_train.add_argument(
        "--columns", help="comma-separated feature columns (default: all)"
    )
    _add_vmd_flags(p_train)
    _add_model_flags(p_train)
    _add_common_flags(p_train)
    p_train.set_defaults(func=cmd_train)

    p_pred = sub.add_parser("predict", help="forecast from a saved pipeline bundle")
    p_pred.add_argument("bundle", help="bundle directory written by train")
    p_pred.add_argument(
        "--input", required=True, help="CSV holding the recent context rows"
    )
    _add_common_flags(p_pred)
    p_pred.set_defaults(func=cmd_predict)

    p_bench = sub.add_parser(
        "bench", help="run the dataset x model x {VMD, no VMD} benchmark grid"
    )
    p_bench.add_argument("inputs", nargs="+", help="benchmark CSVs")
    p_bench.add_argument(
        "--column", help="restrict every dataset to this one feature column"
    )
    p_bench.add_argument(
        "--models",
        help=f"comma-separated subset of {{{','.join(KINDS)}}} (default: all)",
    )
    arm = p_bench.add_mutually_exclusive_group()
    arm.add_argument(
        "--no-vmd-only",
        action="store_const",
        const=True,
        help="run only the without-decomposition half of the grid",
    )
    arm.add_argument(
        "--vmd-only",
        action="store_const",
        const=True,
        help="run only the with-decomposition half of the grid",
    )
    _add_vmd_flags(p_bench)
    _add_model_flags(p_bench)
    _add_common_flags(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    return parser


def cmd_decompose(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    data = read_csv_dataset(args.input)
    if args.column is not None:
        data = data.select([args.column])
    series = data.series[0]
    result = decompose(series.values, _to_vmd_config(cfg))

    out_dir = Path(cfg["out"])
    outputs = []
    outputs.append(write_modes_csv(out_dir / "modes.csv", result).name)
    outputs.append(
        write_modes_meta(out_dir / "modes_meta.json", result, _to_vmd_config(cfg)).name
    )
    if cfg["figures"]:
        from . import figures

        figures.save_mode_figure(out_dir / "modes.png", series.values, result)
        outputs.append("modes.png")
    _write_manifest(
        out_dir,
        "decompose",
        [str(args.input)],
        cfg,
        {"column": series.name},
        outputs,
    )

    for i, omega in enumerate(result.omegas):
        print(f"omega_{i + 1}: {omega:.6f} cycles/sample")
    print(f"iterations: {result.iterations} ({'converged' if result.converged else 'hit cap'})")
    print(f"reconstruction_error: {result.reconstruction_error:.6e}")
    print(f"wrote {out_dir / 'modes.csv'}")
    if cfg["strict"] and not result.converged:
        print("error: solver hit the iteration cap without converging", file=sys.stderr)
        return 3
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    data = read_csv_dataset(args.input)
    if args.columns:
        data = data.select([c.strip() for c in args.columns.split(",")])
    pipeline_cfg = _to_pipeline_config(cfg)
    pipeline_cfg = dataclasses.replace(
        pipeline_cfg,
        model=dataclasses.replace(pipeline_cfg.model, channels=len(data.series)),
    )
    fitted = fit(list(data.series), pipeline_cfg, jobs=_jobs(cfg))

    out_dir = Path(cfg["out"])
    bundle_dir = save_bundle(fitted, out_dir / "bundle")
    _write_manifest(
        out_dir,
        "train",
        [str(args.input)],
        cfg,
        {"columns": [s.name for s in data.series]},
        [f"bundle/{p.name}" for p in sorted(bundle_dir.iterdir())],
    )
    for ch in fitted.channels:
        losses = [log.epoch_losses[-1] for log in ch.logs if log.epoch_losses]
        loss_txt = ", ".join(f"{v:.6f}" for v in losses) if losses else "n/a"
        print(f"channel {ch.name}: {len(ch.models)} model(s), final loss {loss_txt}")
    print(f"wrote {bundle_dir}")
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    fitted = load_bundle(args.bundle)
    data = read_csv_dataset(args.input)
    names = [ch.name for ch in fitted.channels]
    data = data.select(names)
    details = predict_detail(fitted, list(data.series))

    out_dir = Path(cfg["out"])
    horizon = fitted.config.model.horizon
    lines = ["step," + ",".join(names)]
    for h in range(horizon):
        row = [str(h + 1)] + [repr(float(d.forecast[h])) for d in details]
        lines.append(",".join(row))
    forecast_path = atomic_write_text(out_dir / "forecast.csv", "\n".join(lines) + "\n")
    outputs = [forecast_path.name]
    if cfg["figures"]:
        from . import figures

        figures.save_forecast_figure(
            out_dir / "forecast.png",
            details,
            context=[s.values for s in data.series],
        )
        outputs.append("forecast.png")
    _write_manifest(
        out_dir,
        "predict",
        [str(args.bundle), str(args.input)],
        cfg,
        {"columns": names},
        outputs,
    )
    print(f"wrote {forecast_path}")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    kinds: Sequence[str] = KINDS
    if args.models:
        kinds = tuple(m.strip() for m in args.models.split(","))
        unknown = [m for m in kinds if m not in KINDS]
        if unknown:
            raise ValueError(f"unknown model kinds {unknown}; choose from {list(KINDS)}")
    if getattr(args, "no_vmd_only", None):
        arms: tuple[bool, ...] = (False,)
    elif getattr(args, "vmd_only", None):
        arms = (True,)
    else:
        arms = (False, True)

    columns = (args.column,) if args.column else None
    datasets = [BenchDataset(path=p, columns=columns) for p in args.inputs]
    report = run_benchmark(
        datasets,
        _to_pipeline_config(cfg),
        kinds=kinds,
        vmd_arms=arms,
        jobs=_jobs(cfg),
    )

    out_dir = Path(cfg["out"])
    written = write_report(report, out_dir, figures=bool(cfg["figures"]))
    _write_manifest(
        out_dir,
        "bench",
        [str(p) for p in args.inputs],
        cfg,
        {
            "models": list(kinds),
            "vmd_arms": [bool(a) for a in arms],
            "column": args.column,
        },
        list(written),
    )
    sys.stdout.write((out_dir / "report.txt").read_text(encoding="utf-8"))
    if report.failures:
        print(
            f"{len(report.failures)} cell(s) failed; see report for details",
            file=sys.stderr,
        )
        return 4
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help/--version, 2 for usage errors
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (NonFiniteError, NonFiniteLossError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ModecastError, KeyError, OSError, ValueError) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {message}", file=sys.stderr)
        return 2


def run() -> None:
    raise SystemExit(main(sys.argv[1:]))


if __name__ == "__main__":
    run()
