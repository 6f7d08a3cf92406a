"""Matplotlib rendering for decomposition, forecast, and report outputs.

Figures are written next to the delimited files they illustrate, using
the Agg backend so no display is needed. Every function returns the
written path, or None when there is nothing to draw.
"""

from __future__ import annotations

import io
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .fileio import atomic_write_bytes

DPI = 120


def _save(fig, path: str | Path) -> Path:
    buf = io.BytesIO()
    fig.savefig(buf, format="png", dpi=DPI)
    plt.close(fig)
    return atomic_write_bytes(path, buf.getvalue())


def save_mode_figure(path: str | Path, values: np.ndarray, mode_set) -> Path:
    """Stacked panels: input with reconstruction overlay, then one per mode."""
    values = np.asarray(values, dtype=np.float64)
    modes = mode_set.modes
    k = modes.shape[0]
    fig, axes = plt.subplots(
        k + 1, 1, figsize=(9, 1.6 * (k + 1) + 1), sharex=True, constrained_layout=True
    )
    axes = np.atleast_1d(axes)
    t = np.arange(values.size)
    axes[0].plot(t, values, color="0.3", lw=0.9, label="input")
    axes[0].plot(t, modes.sum(axis=0), color="tab:red", lw=0.8, ls="--", label="sum of modes")
    axes[0].set_ylabel("input")
    axes[0].legend(loc="upper right", fontsize=7, frameon=False)
    for i in range(k):
        axes[i + 1].plot(t, modes[i], lw=0.8, color=f"C{i}")
        axes[i + 1].set_ylabel(f"mode {i + 1}\n{mode_set.omegas[i]:.4f} cyc/sample", fontsize=8)
    axes[-1].set_xlabel("sample")
    fig.suptitle(
        f"decomposition: {k} modes, {mode_set.iterations} iterations, "
        f"{'converged' if mode_set.converged else 'not converged'}",
        fontsize=10,
    )
    return _save(fig, path)


def save_forecast_figure(
    path: str | Path,
    details,
    context: list[np.ndarray] | None = None,
) -> Path:
    """One panel per channel: optional trailing context, then the forecast."""
    n = len(details)
    fig, axes = plt.subplots(
        n, 1, figsize=(9, 2.2 * n + 0.8), sharex=True, constrained_layout=True
    )
    axes = np.atleast_1d(axes)
    for i, detail in enumerate(details):
        horizon = detail.forecast.size
        if context is not None:
            ctx = np.asarray(context[i], dtype=np.float64)
            tail = ctx[-4 * horizon :]
            t0 = -tail.size
            axes[i].plot(np.arange(t0, 0), tail, color="0.4", lw=0.9, label="context")
        axes[i].plot(
            np.arange(horizon), detail.forecast, color="tab:blue", lw=1.2, label="forecast"
        )
        axes[i].axvline(0, color="0.7", lw=0.8, ls=":")
        axes[i].set_ylabel(detail.name or f"channel {detail.channel_id}", fontsize=8)
        if i == 0:
            axes[i].legend(loc="upper left", fontsize=7, frameon=False)
    axes[-1].set_xlabel("steps ahead")
    fig.suptitle("forecast", fontsize=10)
    return _save(fig, path)


def save_cell_figure(path: str | Path, report, dataset: str, kind: str) -> Path | None:
    """Truth vs both arms' forecasts over the test partition, plus modes."""
    with_vmd = report.cell(dataset, kind, True)
    without = report.cell(dataset, kind, False)
    base = with_vmd if with_vmd is not None else without
    if base is None or base.trace is None:
        return None
    has_modes = (
        with_vmd is not None
        and with_vmd.trace is not None
        and with_vmd.trace.mode_forecasts is not None
    )
    n_rows = 2 if has_modes else 1
    fig, axes = plt.subplots(
        n_rows,
        1,
        figsize=(9, 3.0 * n_rows + 0.6),
        sharex=True,
        constrained_layout=True,
        gridspec_kw={"height_ratios": [2, 1] if has_modes else [1]},
    )
    axes = np.atleast_1d(axes)
    t = base.trace.t
    axes[0].plot(t, base.trace.truth, color="0.2", lw=1.0, label="truth")
    if without is not None and without.trace is not None:
        axes[0].plot(
            t,
            without.trace.forecast,
            color="tab:orange",
            lw=0.9,
            ls="--",
            label=f"{kind} (no VMD, rmse {without.rmse:.4f})",
        )
    if with_vmd is not None and with_vmd.trace is not None:
        axes[0].plot(
            t,
            with_vmd.trace.forecast,
            color="tab:blue",
            lw=0.9,
            label=f"{kind} (VMD, rmse {with_vmd.rmse:.4f})",
        )
    axes[0].legend(loc="upper right", fontsize=7, frameon=False)
    axes[0].set_ylabel("value")
    if has_modes:
        modes = with_vmd.trace.mode_forecasts
        for i in range(modes.shape[0]):
            axes[1].plot(t, modes[i], lw=0.7, label=f"mode {i + 1}")
        axes[1].set_ylabel("mode forecasts\n(standardized)", fontsize=8)
        axes[1].legend(loc="upper right", fontsize=6, frameon=False, ncols=modes.shape[0])
    axes[-1].set_xlabel("row")
    fig.suptitle(f"{dataset} / {kind}", fontsize=10)
    return _save(fig, path)


def save_average_rmse_figure(path: str | Path, report) -> Path | None:
    """Grouped bars: average RMSE per model kind, one bar per arm."""
    averages = {(a.model_kind, a.use_vmd): a for a in report.averages()}
    if not averages:
        return None
    kinds = [k for k in report.kinds if any((k, a) in averages for a in report.vmd_arms)]
    fig, ax = plt.subplots(figsize=(7, 4), constrained_layout=True)
    x = np.arange(len(kinds), dtype=np.float64)
    n_arms = len(report.vmd_arms)
    width = 0.8 / n_arms
    colors = {False: "tab:orange", True: "tab:blue"}
    for j, arm in enumerate(report.vmd_arms):
        vals = [
            averages[(k, arm)].rmse if (k, arm) in averages else np.nan for k in kinds
        ]
        offset = (j - (n_arms - 1) / 2) * width
        bars = ax.bar(
            x + offset,
            vals,
            width=width * 0.92,
            color=colors.get(arm, "0.5"),
            label="VMD" if arm else "no VMD",
        )
        ax.bar_label(bars, fmt="%.3f", fontsize=7)
    ax.set_xticks(x, kinds)
    ax.set_ylabel("average RMSE (original units)")
    ax.set_title("benchmark averages", fontsize=10)
    ax.legend(fontsize=8, frameon=False)
    return _save(fig, path)
