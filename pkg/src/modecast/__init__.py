"""modecast: narrow-band mode decomposition plus one-layer linear forecasting.

The library decomposes each channel of a time series into K narrow-band
modes with an ADMM solver, trains a small linear forecaster per mode,
and sums the per-mode forecasts. A benchmark harness compares the
with/without-decomposition variants across datasets and model kinds.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .bench import (
    BenchDataset,
    BenchmarkReport,
    CellFailure,
    EvalResult,
    rmse,
    run_benchmark,
    write_report,
)
from .errors import (
    ConstantSeriesError,
    ContextTooShortError,
    DimensionMismatchError,
    EmptyBatchError,
    EmptyInputError,
    KernelEvenError,
    KernelTooLargeError,
    LengthMismatchError,
    ModecastError,
    NonFiniteError,
    NonFiniteLossError,
    TooFewRowsError,
    TooShortError,
)
from .models import (
    KINDS,
    ForecastModel,
    ModelConfig,
    TrainingLog,
    forward,
    load_model,
    loss,
    loss_gradients,
    moving_average_split,
    save_model,
    train,
    zero_model,
)
from .pipeline import (
    ChannelForecast,
    FittedPipeline,
    PipelineConfig,
    fit,
    load_bundle,
    predict,
    predict_detail,
    save_bundle,
)
from .series import (
    CsvDataset,
    ScalerParams,
    SplitResult,
    TimeSeries,
    WindowSet,
    apply_scaler,
    fit_scaler,
    make_windows,
    read_csv_dataset,
    split_dataset,
    split_spec_for,
)
from .vmd import (
    ModeSet,
    VmdConfig,
    decompose,
    dft,
    idft,
    mirror_extend,
    recover_center,
)

__all__ = [
    "__version__",
    # series
    "TimeSeries",
    "ScalerParams",
    "SplitResult",
    "WindowSet",
    "CsvDataset",
    "fit_scaler",
    "apply_scaler",
    "split_spec_for",
    "split_dataset",
    "make_windows",
    "read_csv_dataset",
    # decomposition
    "VmdConfig",
    "ModeSet",
    "decompose",
    "dft",
    "idft",
    "mirror_extend",
    "recover_center",
    # models
    "KINDS",
    "ModelConfig",
    "ForecastModel",
    "TrainingLog",
    "zero_model",
    "forward",
    "loss",
    "loss_gradients",
    "train",
    "moving_average_split",
    "save_model",
    "load_model",
    # pipeline
    "PipelineConfig",
    "FittedPipeline",
    "ChannelForecast",
    "fit",
    "predict",
    "predict_detail",
    "save_bundle",
    "load_bundle",
    # bench
    "rmse",
    "BenchDataset",
    "EvalResult",
    "CellFailure",
    "BenchmarkReport",
    "run_benchmark",
    "write_report",
    # errors
    "ModecastError",
    "EmptyInputError",
    "TooShortError",
    "TooFewRowsError",
    "ConstantSeriesError",
    "NonFiniteError",
    "DimensionMismatchError",
    "KernelEvenError",
    "KernelTooLargeError",
    "EmptyBatchError",
    "NonFiniteLossError",
    "LengthMismatchError",
    "ContextTooShortError",
]
