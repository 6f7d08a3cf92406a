"""RMSE metric, benchmark grid runner, and report rendering.

The grid is dataset x model kind x {with, without} decomposition. Each
cell fits on the train partition, then scores non-overlapping H-step
forecasts rolled across the test partition. RMSE is reported both in
original units and in standardized (train-scaler) units, since either
reading of "error" is defensible; failed cells are recorded without
aborting the run and excluded from averages with a footnote.
"""

from __future__ import annotations

import dataclasses
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EmptyInputError, LengthMismatchError, ModecastError
from .fileio import atomic_write_text
from .models import KINDS
from .pipeline import FittedPipeline, PipelineConfig, fit, predict_detail
from .series import TimeSeries, read_csv_dataset, split_dataset


def rmse(pred: Sequence[float] | np.ndarray, truth: Sequence[float] | np.ndarray) -> float:
    """Root mean squared error between two equal-length sequences."""
    p = np.asarray(pred, dtype=np.float64).reshape(-1)
    t = np.asarray(truth, dtype=np.float64).reshape(-1)
    if p.size == 0:
        raise EmptyInputError("rmse of empty sequences is undefined")
    if p.size != t.size:
        raise LengthMismatchError(f"length {p.size} vs {t.size}")
    return float(np.sqrt(np.mean((p - t) ** 2)))


@dataclass(frozen=True)
class BenchDataset:
    """One benchmark input: CSV path plus an optional feature-column subset."""

    path: str | Path
    columns: tuple[str, ...] | None = None
    name: str = ""

    @property
    def label(self) -> str:
        return self.name or Path(self.path).stem


@dataclass(frozen=True)
class CellTrace:
    """Plot data for one cell, first selected channel only.

    ``mode_forecasts`` are in standardized units (they sum to the scaled
    forecast); ``forecast`` and ``truth`` are in original units.
    """

    t: np.ndarray
    truth: np.ndarray
    forecast: np.ndarray
    mode_forecasts: np.ndarray | None


@dataclass(frozen=True)
class EvalResult:
    dataset: str
    model_kind: str
    use_vmd: bool
    rmse: float
    rmse_scaled: float
    n_predictions: int
    runtime_ms: int
    trace: CellTrace | None = None


@dataclass(frozen=True)
class CellFailure:
    dataset: str
    model_kind: str
    use_vmd: bool
    reason: str


@dataclass(frozen=True)
class AverageRow:
    model_kind: str
    use_vmd: bool
    rmse: float
    rmse_scaled: float
    n_datasets: int


@dataclass(frozen=True)
class BenchmarkReport:
    results: tuple[EvalResult, ...]
    failures: tuple[CellFailure, ...]
    kinds: tuple[str, ...]
    vmd_arms: tuple[bool, ...]
    datasets: tuple[str, ...]

    def cell(self, dataset: str, kind: str, use_vmd: bool) -> EvalResult | None:
        for r in self.results:
            if (r.dataset, r.model_kind, r.use_vmd) == (dataset, kind, use_vmd):
                return r
        return None

    def averages(self) -> list[AverageRow]:
        """Arithmetic mean RMSE per (kind, arm) over the datasets that succeeded."""
        rows = []
        for kind in self.kinds:
            for arm in self.vmd_arms:
                cells = [
                    r
                    for r in self.results
                    if r.model_kind == kind and r.use_vmd == arm
                ]
                if not cells:
                    continue
                rows.append(
                    AverageRow(
                        model_kind=kind,
                        use_vmd=arm,
                        rmse=float(np.mean([r.rmse for r in cells])),
                        rmse_scaled=float(np.mean([r.rmse_scaled for r in cells])),
                        n_datasets=len(cells),
                    )
                )
        return rows


def _evaluate_cell(
    label: str,
    kind: str,
    use_vmd: bool,
    train_series: list[TimeSeries],
    full_values: list[np.ndarray],
    train_rows: int,
    base: PipelineConfig,
) -> EvalResult:
    start = time.perf_counter()
    cfg = dataclasses.replace(
        base,
        use_vmd=use_vmd,
        model=dataclasses.replace(base.model, kind=kind),
    )
    fitted: FittedPipeline = fit(train_series, cfg)
    horizon = cfg.model.horizon
    lookback = cfg.model.lookback
    context_len = cfg.context_multiple * lookback
    effective = full_values[0].size

    sq_err = 0.0
    sq_err_scaled = 0.0
    n_values = 0
    n_windows = 0
    trace_t: list[np.ndarray] = []
    trace_truth: list[np.ndarray] = []
    trace_forecast: list[np.ndarray] = []
    trace_modes: list[np.ndarray] = []

    for origin in range(train_rows, effective - horizon + 1, horizon):
        recent = [
            ts.with_values(vals[max(0, origin - context_len) : origin])
            for ts, vals in zip(train_series, full_values)
        ]
        details = predict_detail(fitted, recent)
        for ci, (detail, vals) in enumerate(zip(details, full_values)):
            truth = vals[origin : origin + horizon]
            err = detail.forecast - truth
            sq_err += float(err @ err)
            std = fitted.channels[ci].scaler.std
            sq_err_scaled += float(err @ err) / std**2
            n_values += horizon
            n_windows += 1
            if ci == 0:
                trace_t.append(np.arange(origin, origin + horizon))
                trace_truth.append(truth)
                trace_forecast.append(detail.forecast)
                trace_modes.append(detail.mode_forecasts)

    if n_values == 0:
        raise EmptyInputError(
            f"{label}: test partition too short for a single {horizon}-step window"
        )
    trace = CellTrace(
        t=np.concatenate(trace_t),
        truth=np.concatenate(trace_truth),
        forecast=np.concatenate(trace_forecast),
        mode_forecasts=np.concatenate(trace_modes, axis=1) if use_vmd else None,
    )
    return EvalResult(
        dataset=label,
        model_kind=kind,
        use_vmd=use_vmd,
        rmse=float(np.sqrt(sq_err / n_values)),
        rmse_scaled=float(np.sqrt(sq_err_scaled / n_values)),
        n_predictions=n_windows,
        runtime_ms=int(round((time.perf_counter() - start) * 1000)),
        trace=trace,
    )


def run_benchmark(
    datasets: Sequence[BenchDataset | str | Path],
    base: PipelineConfig,
    kinds: Sequence[str] = KINDS,
    vmd_arms: Sequence[bool] = (False, True),
    jobs: int = 1,
) -> BenchmarkReport:
    """Run the full grid; per-cell failures are recorded, not raised.

    Datasets are ingested, split per the row-count protocol, and evaluated
    with rolling-origin H-step forecasts over the test partition.
    Deterministic given the seeds in ``base`` (cells are independent jobs,
    assembled in a fixed order).
    """
    specs = [
        ds if isinstance(ds, BenchDataset) else BenchDataset(path=ds)
        for ds in datasets
    ]
    results: list[EvalResult | None] = []
    failures: list[CellFailure] = []
    cells: list[tuple[str, str, bool]] = []
    tasks = []

    for spec in specs:
        label = spec.label
        try:
            data = read_csv_dataset(spec.path)
            if spec.columns is not None:
                data = data.select(spec.columns)
            split = split_dataset(data.n_rows)
        except (ModecastError, KeyError, OSError) as exc:
            for kind in kinds:
                for arm in vmd_arms:
                    cells.append((label, kind, arm))
                    tasks.append((None, CellFailure(label, kind, arm, str(exc))))
            continue
        effective = split.train_rows + split.test_rows
        train_series = [
            TimeSeries(s.values[: split.train_rows], name=s.name, channel_id=s.channel_id)
            for s in data.series
        ]
        full_values = [s.values[:effective] for s in data.series]
        for kind in kinds:
            for arm in vmd_arms:
                cells.append((label, kind, arm))
                tasks.append(
                    (
                        lambda label=label, kind=kind, arm=arm, ts=train_series, fv=full_values, tr=split.train_rows: _evaluate_cell(
                            label, kind, arm, ts, fv, tr, base
                        ),
                        None,
                    )
                )

    def run_task(task):
        func, prefail = task
        if prefail is not None:
            return None, prefail
        try:
            return func(), None
        except ModecastError as exc:
            return None, exc

    if jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run_task, tasks))
    else:
        outcomes = [run_task(t) for t in tasks]

    for (label, kind, arm), (result, failure) in zip(cells, outcomes):
        if result is not None:
            results.append(result)
        elif isinstance(failure, CellFailure):
            failures.append(failure)
        else:
            failures.append(CellFailure(label, kind, arm, str(failure)))

    return BenchmarkReport(
        results=tuple(r for r in results if r is not None),
        failures=tuple(failures),
        kinds=tuple(kinds),
        vmd_arms=tuple(vmd_arms),
        datasets=tuple(s.label for s in specs),
    )


def _arm_name(use_vmd: bool) -> str:
    return "VMD" if use_vmd else "No VMD"


def _format_cell(report: BenchmarkReport, dataset: str, kind: str, arm: bool, scaled: bool) -> str:
    result = report.cell(dataset, kind, arm)
    if result is not None:
        return f"{(result.rmse_scaled if scaled else result.rmse):.4f}"
    for f in report.failures:
        if (f.dataset, f.model_kind, f.use_vmd) == (dataset, kind, arm):
            return "FAIL"
    return "-"


def _render_table(report: BenchmarkReport, scaled: bool) -> list[str]:
    title = "RMSE (standardized units)" if scaled else "RMSE (original units)"
    arm_width = 10
    n_arms = len(report.vmd_arms)
    kind_width = n_arms * arm_width + (n_arms - 1)
    ds_width = max([len("Average")] + [len(d) for d in report.datasets]) + 2
    lines = [title]
    head1 = " " * ds_width + "|" + "|".join(
        f"{kind:^{kind_width}}" for kind in report.kinds
    )
    sub = [
        " ".join(f"{_arm_name(a):^{arm_width}}" for a in report.vmd_arms)
        for _ in report.kinds
    ]
    head2 = " " * ds_width + "|" + "|".join(sub)
    lines.append(head1)
    lines.append(head2)
    lines.append("-" * len(head2))
    for ds in report.datasets:
        cells = []
        for kind in report.kinds:
            cells.append(
                " ".join(
                    f"{_format_cell(report, ds, kind, a, scaled):^{arm_width}}"
                    for a in report.vmd_arms
                )
            )
        lines.append(f"{ds:<{ds_width}}|" + "|".join(cells))
    averages = {(a.model_kind, a.use_vmd): a for a in report.averages()}
    cells = []
    for kind in report.kinds:
        vals = []
        for a in report.vmd_arms:
            row = averages.get((kind, a))
            if row is None:
                vals.append(f"{'-':^{arm_width}}")
            else:
                vals.append(
                    f"{(row.rmse_scaled if scaled else row.rmse):^{arm_width}.4f}"
                )
        cells.append(" ".join(vals))
    lines.append("-" * len(head2))
    lines.append(f"{'Average':<{ds_width}}|" + "|".join(cells))
    return lines


def render_report_text(report: BenchmarkReport) -> str:
    """Human-readable table in the shape dataset rows x (kind, arm) columns."""
    lines: list[str] = []
    lines.extend(_render_table(report, scaled=False))
    lines.append("")
    lines.extend(_render_table(report, scaled=True))
    if report.failures:
        lines.append("")
        lines.append("Failed cells (excluded from averages):")
        for f in report.failures:
            lines.append(
                f"  {f.dataset} / {f.model_kind} / {_arm_name(f.use_vmd)}: {f.reason}"
            )
    return "\n".join(lines) + "\n"


def render_report_csv(report: BenchmarkReport) -> str:
    """Machine-readable rows, one per cell (including failures)."""
    lines = [
        "dataset,model,use_vmd,rmse,rmse_scaled,n_predictions,runtime_ms,status,reason"
    ]
    by_key: dict[tuple[str, str, bool], EvalResult] = {
        (r.dataset, r.model_kind, r.use_vmd): r for r in report.results
    }
    fail_by_key = {
        (f.dataset, f.model_kind, f.use_vmd): f for f in report.failures
    }
    for ds in report.datasets:
        for kind in report.kinds:
            for arm in report.vmd_arms:
                key = (ds, kind, arm)
                if key in by_key:
                    r = by_key[key]
                    lines.append(
                        f"{ds},{kind},{str(arm).lower()},{r.rmse!r},"
                        f"{r.rmse_scaled!r},{r.n_predictions},{r.runtime_ms},OK,"
                    )
                elif key in fail_by_key:
                    reason = fail_by_key[key].reason.replace(",", ";").replace("\n", " ")
                    lines.append(
                        f"{ds},{kind},{str(arm).lower()},,,,,FAIL,{reason}"
                    )
    for a in report.averages():
        lines.append(
            f"Average,{a.model_kind},{str(a.use_vmd).lower()},{a.rmse!r},"
            f"{a.rmse_scaled!r},{a.n_datasets},,AVERAGE,"
        )
    return "\n".join(lines) + "\n"


def render_plot_csv(report: BenchmarkReport, dataset: str, kind: str) -> str | None:
    """Per-series plot data: t, truth, both arms' forecasts, mode forecasts.

    Mode columns are in standardized units. Returns None when neither arm
    produced a trace.
    """
    with_vmd = report.cell(dataset, kind, True)
    without = report.cell(dataset, kind, False)
    base = with_vmd if with_vmd is not None else without
    if base is None or base.trace is None:
        return None
    t = base.trace.t
    n_modes = (
        with_vmd.trace.mode_forecasts.shape[0]
        if with_vmd is not None and with_vmd.trace.mode_forecasts is not None
        else 0
    )
    header = ["t", "truth", "forecast_no_vmd", "forecast_vmd"] + [
        f"mode_{i + 1}" for i in range(n_modes)
    ]
    lines = [",".join(header)]
    for i in range(t.size):
        row = [str(int(t[i])), repr(float(base.trace.truth[i]))]
        row.append(
            repr(float(without.trace.forecast[i])) if without is not None else ""
        )
        row.append(
            repr(float(with_vmd.trace.forecast[i])) if with_vmd is not None else ""
        )
        for m in range(n_modes):
            row.append(repr(float(with_vmd.trace.mode_forecasts[m, i])))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_report(
    report: BenchmarkReport, out_dir: str | Path, figures: bool = True
) -> dict[str, Path]:
    """Write report.txt, report.csv, per-cell plot CSVs, and figures.

    Returns a mapping of logical names to written paths. Figures land next
    to the delimited files; pass ``figures=False`` to skip rendering.
    """
    out_dir = Path(out_dir)
    written: dict[str, Path] = {}
    written["report.txt"] = atomic_write_text(
        out_dir / "report.txt", render_report_text(report)
    )
    written["report.csv"] = atomic_write_text(
        out_dir / "report.csv", render_report_csv(report)
    )
    plots_dir = out_dir / "plots"
    for ds in report.datasets:
        for kind in report.kinds:
            text = render_plot_csv(report, ds, kind)
            if text is None:
                continue
            name = f"{ds}_{kind}.csv"
            written[f"plots/{name}"] = atomic_write_text(plots_dir / name, text)
    if figures:
        from . import figures as fig

        path = fig.save_average_rmse_figure(out_dir / "report.png", report)
        if path is not None:
            written["report.png"] = path
        for ds in report.datasets:
            for kind in report.kinds:
                name = f"{ds}_{kind}.png"
                path = fig.save_cell_figure(plots_dir / name, report, ds, kind)
                if path is not None:
                    written[f"plots/{name}"] = path
    return written
