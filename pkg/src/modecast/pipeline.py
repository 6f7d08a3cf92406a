"""Decompose-forecast-aggregate pipeline.

Fits, per channel: standardize on the train partition, decompose the
scaled series into K modes, and train one forecaster per mode. Prediction
re-decomposes a trailing context window with the stored configuration,
forecasts each mode from its last lookback samples, sums the per-mode
forecasts, and inverse-scales once at the end (the modes partition the
scaled signal, so the sum lives in scaled units).

At prediction time the trailing context is first continued past the
forecast origin with a short autoregressive extrapolation; the synthetic
tail absorbs the decomposition's boundary ripple and is discarded, so the
live lookback window comes from the well-conditioned interior.

With ``use_vmd=False`` the pipeline degenerates to a single model per
channel on the raw (scaled) series; decomposition is never invoked.
"""

from __future__ import annotations

import dataclasses
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence, TypeVar

import numpy as np

from .errors import ContextTooShortError, ConstantSeriesError, ModecastError
from .fileio import atomic_write_text
from .models import (
    ForecastModel,
    ModelConfig,
    TrainingLog,
    forward,
    load_model,
    save_model,
    train,
)
from .series import ScalerParams, TimeSeries, fit_scaler, make_windows
from .vmd import VmdConfig, decompose

T = TypeVar("T")


@dataclass(frozen=True)
class PipelineConfig:
    vmd: VmdConfig = VmdConfig()
    model: ModelConfig = ModelConfig()
    use_vmd: bool = True
    # Channel ids to fit; None keeps every channel passed to fit().
    channels: tuple[int, ...] | None = None
    # Trailing context for test-time decomposition, in lookback multiples.
    context_multiple: int = 4

    def __post_init__(self) -> None:
        if self.context_multiple < 1:
            raise ValueError("context_multiple must be >= 1")


@dataclass
class ChannelFit:
    """Per-channel trained state: scaler, mode centers, one model per mode."""

    channel_id: int
    name: str
    scaler: ScalerParams
    omegas: tuple[float, ...] | None
    models: list[ForecastModel]
    logs: list[TrainingLog] = dataclasses.field(default_factory=list)


@dataclass
class FittedPipeline:
    config: PipelineConfig
    channels: list[ChannelFit]

    @property
    def n_models(self) -> int:
        return sum(len(c.models) for c in self.channels)


@dataclass(frozen=True)
class ChannelForecast:
    """Per-mode scaled forecasts, their sum, and the original-unit forecast."""

    channel_id: int
    name: str
    mode_forecasts: np.ndarray  # (n_models, H), scaled units
    combined_scaled: np.ndarray  # (H,)
    forecast: np.ndarray  # (H,), original units


def _lenient_scaler(ts: TimeSeries) -> ScalerParams:
    # A constant train series degenerates to centering only (std 1), so an
    # all-zero input flows through to all-zero forecasts instead of erroring.
    try:
        return fit_scaler(ts)
    except ConstantSeriesError:
        return ScalerParams(mean=float(ts.values.mean()), std=1.0)


def _run_indexed(jobs: int, tasks: Sequence[Callable[[], T]]) -> list[T]:
    """Run tasks (each pure) and return results in task order."""
    if jobs <= 1 or len(tasks) <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(task) for task in tasks]
        return [f.result() for f in futures]


def _with_context(exc: ModecastError, context: str) -> ModecastError:
    wrapped = type(exc)(f"{context}: {exc}")
    wrapped.__cause__ = exc
    return wrapped


def fit(
    train_series: Sequence[TimeSeries], cfg: PipelineConfig, jobs: int = 1
) -> FittedPipeline:
    """Fit the pipeline on the train partition of each channel.

    One model per (channel, mode); model seeds are offset per task so
    shuffles decorrelate while staying deterministic. VMD and training
    errors propagate with channel/mode context prepended.
    """
    selected = list(train_series)
    if cfg.channels is not None:
        wanted = set(cfg.channels)
        selected = [ts for ts in selected if ts.channel_id in wanted]
    if not selected:
        raise ValueError("no channels to fit")

    def decompose_channel(index: int, ts: TimeSeries):
        scaler = _lenient_scaler(ts)
        scaled = (ts.values - scaler.mean) / scaler.std
        if not cfg.use_vmd:
            return scaler, None, [scaled]
        try:
            mode_set = decompose(scaled, cfg.vmd)
        except ModecastError as exc:
            raise _with_context(exc, f"channel {ts.name or ts.channel_id}") from exc
        return scaler, tuple(float(w) for w in mode_set.omegas), list(mode_set.modes)

    prepared = _run_indexed(
        jobs,
        [
            (lambda i=i, ts=ts: decompose_channel(i, ts))
            for i, ts in enumerate(selected)
        ],
    )

    def train_signal(channel_index: int, mode_index: int, signal: np.ndarray):
        ts = selected[channel_index]
        n_signals = cfg.vmd.k if cfg.use_vmd else 1
        seed = cfg.model.seed + channel_index * n_signals + mode_index
        model_cfg = dataclasses.replace(cfg.model, seed=seed)
        try:
            windows = make_windows(signal, cfg.model.lookback, cfg.model.horizon)
            model, log = train(model_cfg, windows)
        except ModecastError as exc:
            raise _with_context(
                exc, f"channel {ts.name or ts.channel_id} mode {mode_index + 1}"
            ) from exc
        model.scaler_id = f"ch{ts.channel_id}"
        return model, log

    tasks = []
    task_owner = []
    for ci, (_, _, signals) in enumerate(prepared):
        for mi, signal in enumerate(signals):
            tasks.append(lambda ci=ci, mi=mi, s=signal: train_signal(ci, mi, s))
            task_owner.append(ci)
    trained = _run_indexed(jobs, tasks)

    channel_fits: list[ChannelFit] = []
    for ci, ts in enumerate(selected):
        scaler, omegas, _ = prepared[ci]
        models = [m for (m, _), owner in zip(trained, task_owner) if owner == ci]
        logs = [lg for (_, lg), owner in zip(trained, task_owner) if owner == ci]
        channel_fits.append(
            ChannelFit(
                channel_id=ts.channel_id,
                name=ts.name,
                scaler=scaler,
                omegas=omegas,
                models=models,
                logs=logs,
            )
        )
    return FittedPipeline(config=cfg, channels=channel_fits)


def _extend_context(context: np.ndarray, pad: int, k: int) -> tuple[np.ndarray, int]:
    """Append a linear autoregressive continuation to the context.

    The decomposition filter is non-causal, so the trailing samples of a
    causally decomposed window deviate from the interior solution: the
    mirror boundary reflects phase velocity and the ripple leaks roughly
    one filter length back from the edge. Continuing the context with an
    AR extrapolation fit on the context itself pushes that edge artifact
    into synthetic samples that are discarded after decomposition. Only
    past samples feed the fit, so forecasts stay causal.

    Returns ``(extended, pad_used)``; ``pad_used`` is 0 when the context
    is too short for a meaningful fit or the normal equations fail.
    """
    n = context.size
    if pad <= 0 or n < 16:
        return context, 0
    order = max(2, min(2 * k + 6, n // 4, 32))
    mu = context.mean()
    centered = context - mu
    # Autocorrelation-method fit: the Toeplitz system below is positive
    # semidefinite, so the ridge keeps it solvable and the poles stable.
    acov = np.correlate(centered, centered, "full")[n - 1 : n + order] / n
    toep = np.array([[acov[abs(i - j)] for j in range(order)] for i in range(order)])
    try:
        coeffs = np.linalg.solve(toep + 1e-12 * np.eye(order), acov[1 : order + 1])
    except np.linalg.LinAlgError:
        return context, 0
    extended = np.empty(n + pad)
    extended[:n] = centered
    for i in range(n, n + pad):
        extended[i] = coeffs @ extended[i - order : i][::-1]
    extended += mu
    if not np.isfinite(extended).all():
        return context, 0
    return extended, pad


def predict_detail(
    fitted: FittedPipeline, recent: Sequence[TimeSeries]
) -> list[ChannelForecast]:
    """Per-channel forecasts with per-mode outputs exposed.

    ``recent`` must supply one series per fitted channel, in the same
    order, each long enough for the lookback (and, with VMD, for the
    trailing decomposition context).
    """
    cfg = fitted.config
    lookback = cfg.model.lookback
    if len(recent) != len(fitted.channels):
        raise ValueError(
            f"got {len(recent)} channels, fitted on {len(fitted.channels)}"
        )
    results: list[ChannelForecast] = []
    for ch, ts in zip(fitted.channels, recent):
        values = ts.values
        min_len = max(lookback, 2 * cfg.vmd.k) if cfg.use_vmd else lookback
        if values.size < min_len:
            raise ContextTooShortError(
                f"channel {ch.name or ch.channel_id}: context of {values.size} "
                f"samples, need at least {min_len}"
            )
        scaled = (values - ch.scaler.mean) / ch.scaler.std
        if cfg.use_vmd:
            context = scaled[-min(scaled.size, cfg.context_multiple * lookback):]
            # Pad length: several times the bandwidth filter's impulse scale
            # sqrt(2*alpha)/(2*pi), so the boundary ripple decays inside the
            # discarded tail regardless of how short the lookback is.
            ripple = int(np.ceil(6.0 * np.sqrt(2.0 * cfg.vmd.alpha) / (2.0 * np.pi)))
            padded, pad = _extend_context(context, max(lookback, ripple), cfg.vmd.k)
            mode_set = decompose(padded, cfg.vmd)
            end = padded.size - pad
            windows = mode_set.modes[:, end - lookback : end]
        else:
            windows = scaled[-lookback:][np.newaxis, :]
        per_mode = np.stack(
            [forward(model, windows[i]) for i, model in enumerate(ch.models)]
        )
        combined = per_mode.sum(axis=0)
        results.append(
            ChannelForecast(
                channel_id=ch.channel_id,
                name=ch.name,
                mode_forecasts=per_mode,
                combined_scaled=combined,
                forecast=combined * ch.scaler.std + ch.scaler.mean,
            )
        )
    return results


def predict(fitted: FittedPipeline, recent: Sequence[TimeSeries]) -> np.ndarray:
    """H-step forecast per channel, shape (channels, horizon), original units."""
    return np.stack([d.forecast for d in predict_detail(fitted, recent)])


def save_bundle(fitted: FittedPipeline, bundle_dir: str | Path) -> Path:
    """Write config, scalers, and per-mode models under ``bundle_dir``."""
    bundle_dir = Path(bundle_dir)
    bundle_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "use_vmd": fitted.config.use_vmd,
        "context_multiple": fitted.config.context_multiple,
        "channels_filter": list(fitted.config.channels)
        if fitted.config.channels is not None
        else None,
        "vmd": dataclasses.asdict(fitted.config.vmd),
        "model": dataclasses.asdict(fitted.config.model),
        "channels": [
            {
                "channel_id": ch.channel_id,
                "name": ch.name,
                "scaler": {"mean": ch.scaler.mean, "std": ch.scaler.std},
                "omegas": list(ch.omegas) if ch.omegas is not None else None,
                "n_models": len(ch.models),
            }
            for ch in fitted.channels
        ],
    }
    atomic_write_text(
        bundle_dir / "pipeline.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    for ch in fitted.channels:
        for mi, model in enumerate(ch.models):
            save_model(model, bundle_dir / f"model_ch{ch.channel_id}_m{mi + 1}.json")
    return bundle_dir


def load_bundle(bundle_dir: str | Path) -> FittedPipeline:
    """Reload a bundle written by :func:`save_bundle` (bit-exact parameters)."""
    bundle_dir = Path(bundle_dir)
    manifest = json.loads((bundle_dir / "pipeline.json").read_text(encoding="utf-8"))
    cfg = PipelineConfig(
        vmd=VmdConfig(**manifest["vmd"]),
        model=ModelConfig(**manifest["model"]),
        use_vmd=manifest["use_vmd"],
        channels=tuple(manifest["channels_filter"])
        if manifest["channels_filter"] is not None
        else None,
        context_multiple=manifest["context_multiple"],
    )
    channels = []
    for entry in manifest["channels"]:
        models = [
            load_model(bundle_dir / f"model_ch{entry['channel_id']}_m{mi + 1}.json")
            for mi in range(entry["n_models"])
        ]
        channels.append(
            ChannelFit(
                channel_id=entry["channel_id"],
                name=entry["name"],
                scaler=ScalerParams(**entry["scaler"]),
                omegas=tuple(entry["omegas"]) if entry["omegas"] is not None else None,
                models=models,
            )
        )
    return FittedPipeline(config=cfg, channels=channels)
