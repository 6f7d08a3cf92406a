"""One-layer linear forecaster family and its trainer.

Three kinds map a length-L lookback window to a length-H horizon:

- ``linear``: y = W x + b
- ``nlinear``: subtract the window's last value before the layer and add it
  back after, countering level shift between train and test windows
- ``dlinear``: split the window into a moving-average trend plus seasonal
  residual, each with its own layer, and sum the two outputs

Training is plain mini-batch gradient descent on MSE plus an L1 penalty on
the weight matrices (biases excluded), from zero-initialized parameters.
The loss is convex in the parameters for all three kinds, so the seed only
governs batch shuffling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyBatchError,
    KernelEvenError,
    KernelTooLargeError,
    NonFiniteLossError,
)
from .fileio import atomic_write_text
from .series import WindowSet

KINDS = ("linear", "nlinear", "dlinear")


@dataclass(frozen=True)
class ModelConfig:
    kind: str = "linear"
    lookback: int = 96
    horizon: int = 24
    channels: int = 1
    ma_kernel: int = 25
    learning_rate: float = 0.01
    l1_weight: float = 1e-4
    epochs: int = 100
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.lookback < 1 or self.horizon < 1:
            raise ValueError("lookback and horizon must be >= 1")
        if self.channels < 1:
            raise ValueError("channels must be >= 1")
        if self.ma_kernel < 3 or self.ma_kernel % 2 == 0:
            raise ValueError("ma_kernel must be an odd integer >= 3")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.l1_weight < 0:
            raise ValueError("l1_weight must be >= 0")
        # 0 is the documented no-op case: the trainer returns the zero
        # initialization untouched.
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass
class ForecastModel:
    """Trained parameters: one (H, L) layer, or trend+seasonal for dlinear."""

    kind: str
    lookback: int
    horizon: int
    channels: int = 1
    ma_kernel: int = 25
    weights: list[np.ndarray] = field(default_factory=list)
    biases: list[np.ndarray] = field(default_factory=list)
    scaler_id: str | None = None


def zero_model(cfg: ModelConfig, scaler_id: str | None = None) -> ForecastModel:
    """Zero-initialized model of the configured kind and shape."""
    n_branches = 2 if cfg.kind == "dlinear" else 1
    return ForecastModel(
        kind=cfg.kind,
        lookback=cfg.lookback,
        horizon=cfg.horizon,
        channels=cfg.channels,
        ma_kernel=cfg.ma_kernel,
        weights=[np.zeros((cfg.horizon, cfg.lookback)) for _ in range(n_branches)],
        biases=[np.zeros(cfg.horizon) for _ in range(n_branches)],
        scaler_id=scaler_id,
    )


def moving_average_split(
    window: np.ndarray, kernel: int
) -> tuple[np.ndarray, np.ndarray]:
    """Centered moving-average trend (replicate edge padding) and residual.

    ``trend + seasonal == window`` exactly by construction. Works on a
    single window or a batch (kernel applies along the last axis).
    """
    x = np.asarray(window, dtype=np.float64)
    length = x.shape[-1]
    if kernel % 2 == 0:
        raise KernelEvenError(f"kernel must be odd, got {kernel}")
    if kernel < 1:
        raise ValueError("kernel must be >= 1")
    if kernel > length:
        raise KernelTooLargeError(
            f"kernel {kernel} exceeds window length {length}"
        )
    half = (kernel - 1) // 2
    pad = [(0, 0)] * (x.ndim - 1) + [(half, half)]
    padded = np.pad(x, pad, mode="edge")
    trend = np.lib.stride_tricks.sliding_window_view(padded, kernel, axis=-1).mean(
        axis=-1
    )
    return trend, x - trend


def _branch_inputs(model: ForecastModel, x: np.ndarray) -> tuple[list[np.ndarray], np.ndarray | None]:
    """Per-branch layer inputs, plus the additive offset for nlinear."""
    if model.kind == "linear":
        return [x], None
    if model.kind == "nlinear":
        last = x[..., -1:]
        return [x - last], last
    trend, seasonal = moving_average_split(x, model.ma_kernel)
    return [trend, seasonal], None


def forward(model: ForecastModel, window: np.ndarray) -> np.ndarray:
    """Forecast H steps from a length-L window (or a batch of windows)."""
    x = np.asarray(window, dtype=np.float64)
    if x.shape[-1] != model.lookback:
        raise DimensionMismatchError(
            f"window length {x.shape[-1]} != model lookback {model.lookback}"
        )
    inputs, offset = _branch_inputs(model, x)
    out = np.zeros(x.shape[:-1] + (model.horizon,))
    for xin, w, b in zip(inputs, model.weights, model.biases):
        out = out + xin @ w.T + b
    if offset is not None:
        out = out + offset
    return out


def loss(model: ForecastModel, batch: WindowSet, l1_weight: float = 0.0) -> float:
    """MSE over all batch outputs plus ``l1_weight * sum(|W|)`` (biases excluded)."""
    if batch.n_rows == 0:
        raise EmptyBatchError("loss of an empty batch is undefined")
    preds = forward(model, batch.inputs)
    mse = float(np.mean((preds - batch.targets) ** 2))
    l1 = sum(float(np.abs(w).sum()) for w in model.weights)
    return mse + l1_weight * l1


def loss_gradients(
    model: ForecastModel,
    inputs: np.ndarray,
    targets: np.ndarray,
    l1_weight: float,
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Analytic gradients of the batch loss w.r.t. weights and biases.

    MSE gradients are exact; the L1 term contributes ``sign(W)`` per weight
    matrix, with subgradient 0 at 0.
    """
    if inputs.shape[0] == 0:
        raise EmptyBatchError("gradient of an empty batch is undefined")
    branch_inputs, _ = _branch_inputs(model, inputs)
    preds = forward(model, inputs)
    residual = preds - targets
    scale = 2.0 / residual.size
    grad_w = []
    grad_b = []
    for xin, w in zip(branch_inputs, model.weights):
        grad_w.append(scale * residual.T @ xin + l1_weight * np.sign(w))
        grad_b.append(scale * residual.sum(axis=0))
    return grad_w, grad_b


@dataclass(frozen=True)
class TrainingLog:
    """Full-set loss after each epoch."""

    epoch_losses: tuple[float, ...]


def train(cfg: ModelConfig, windows: WindowSet) -> tuple[ForecastModel, TrainingLog]:
    """Mini-batch gradient descent from zero initialization.

    Deterministic given ``cfg.seed`` (which only shuffles batches). Returns
    the trained model and the per-epoch loss log. Raises
    ``NonFiniteLossError`` when the loss or parameters diverge.
    """
    if windows.n_rows == 0:
        raise EmptyBatchError("cannot train on an empty window set")
    if windows.lookback != cfg.lookback or windows.horizon != cfg.horizon:
        raise DimensionMismatchError(
            f"windows are ({windows.lookback},{windows.horizon}), "
            f"config wants ({cfg.lookback},{cfg.horizon})"
        )
    model = zero_model(cfg)
    rng = np.random.default_rng(cfg.seed)
    n = windows.n_rows
    losses: list[float] = []
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            grad_w, grad_b = loss_gradients(
                model, windows.inputs[idx], windows.targets[idx], cfg.l1_weight
            )
            for w, gw in zip(model.weights, grad_w):
                w -= cfg.learning_rate * gw
            for b, gb in zip(model.biases, grad_b):
                b -= cfg.learning_rate * gb
        epoch_loss = loss(model, windows, cfg.l1_weight)
        if not np.isfinite(epoch_loss):
            raise NonFiniteLossError(
                f"loss diverged at epoch {len(losses) + 1}; "
                f"lower learning_rate={cfg.learning_rate}"
            )
        losses.append(epoch_loss)
    for arr in (*model.weights, *model.biases):
        if not np.isfinite(arr).all():
            raise NonFiniteLossError("trained parameters are non-finite")
    return model, TrainingLog(epoch_losses=tuple(losses))


def get_params(model: ForecastModel) -> np.ndarray:
    """Flatten all parameters (weights then biases) into one vector."""
    parts = [w.ravel() for w in model.weights] + [b.ravel() for b in model.biases]
    return np.concatenate(parts)


def set_params(model: ForecastModel, flat: np.ndarray) -> None:
    """Inverse of :func:`get_params`; writes values back in place."""
    flat = np.asarray(flat, dtype=np.float64)
    pos = 0
    for arr in list(model.weights) + list(model.biases):
        arr[...] = flat[pos : pos + arr.size].reshape(arr.shape)
        pos += arr.size
    if pos != flat.size:
        raise DimensionMismatchError(
            f"parameter vector has {flat.size} entries, model needs {pos}"
        )


def save_model(model: ForecastModel, path: str | Path) -> Path:
    """Write the model as JSON; floats round-trip bit-exactly."""
    payload = {
        "kind": model.kind,
        "lookback": model.lookback,
        "horizon": model.horizon,
        "channels": model.channels,
        "ma_kernel": model.ma_kernel,
        "scaler_id": model.scaler_id,
        "weights": [w.tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
    }
    return atomic_write_text(path, json.dumps(payload, sort_keys=True) + "\n")


def load_model(path: str | Path) -> ForecastModel:
    """Load a model written by :func:`save_model`."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return ForecastModel(
        kind=payload["kind"],
        lookback=payload["lookback"],
        horizon=payload["horizon"],
        channels=payload["channels"],
        ma_kernel=payload["ma_kernel"],
        scaler_id=payload["scaler_id"],
        weights=[np.asarray(w, dtype=np.float64) for w in payload["weights"]],
        biases=[np.asarray(b, dtype=np.float64) for b in payload["biases"]],
    )
