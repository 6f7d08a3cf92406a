"""Variational mode decomposition: frequency-domain ADMM.

Decomposes a real signal into K narrow-band modes. Each ADMM iteration
Wiener-filters every mode spectrum around its center frequency
(Gauss-Seidel over modes), re-centers each frequency as the power-weighted
mean of its spectrum, and runs dual ascent on the reconstruction residual.
Iteration stops when the summed relative change of the mode spectra drops
below ``epsilon``.

All updates operate on the positive-frequency half-spectrum; the full
spectrum is restored by Hermitian symmetry before inverse transform.
Frequencies are in cycles/sample, ``0 <= omega <= 0.5``.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyInputError,
    NonFiniteError,
    TooShortError,
)
from .fileio import atomic_write_text
from .series import TimeSeries

OMEGA_INITS = ("uniform", "zero", "random")
BOUNDARIES = ("mirror", "none")


@dataclass(frozen=True)
class VmdConfig:
    """Decomposition parameters.

    ``alpha`` is the quadratic bandwidth penalty, ``tau`` the dual-ascent
    step (0 disables exact-reconstruction pressure, which is the robust
    choice under noise), ``epsilon`` the relative-change stopping threshold.
    ``dc_mode`` pins the first mode's center frequency at 0.
    """

    k: int = 3
    alpha: float = 2000.0
    tau: float = 0.0
    epsilon: float = 1e-7
    max_iters: int = 500
    omega_init: str = "uniform"
    seed: int = 0
    boundary: str = "mirror"
    dc_mode: bool = False

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")
        if self.tau < 0:
            raise ValueError("tau must be >= 0")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.omega_init not in OMEGA_INITS:
            raise ValueError(f"omega_init must be one of {OMEGA_INITS}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}")


@dataclass(frozen=True)
class VmdState:
    """One ADMM iterate: mode half-spectra, center frequencies, dual variable."""

    mode_spectra: np.ndarray  # (K, F) complex
    omegas: np.ndarray  # (K,) cycles/sample
    lambda_spectrum: np.ndarray  # (F,) complex
    freqs: np.ndarray  # (F,) half-spectrum frequency grid
    iteration: int = 0
    last_delta: float = np.inf
    dc_pinned: bool = False


@dataclass(frozen=True)
class ModeSet:
    """Decomposition result: K modes (input length), sorted center frequencies."""

    modes: np.ndarray  # (K, N)
    omegas: np.ndarray  # (K,) ascending
    iterations: int
    converged: bool
    reconstruction_error: float


def dft(signal: Sequence[float] | np.ndarray) -> np.ndarray:
    """Discrete Fourier transform of a real sequence (full complex spectrum)."""
    arr = np.asarray(signal, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise EmptyInputError("cannot transform an empty signal")
    return np.fft.fft(arr)


def idft(spectrum: Sequence[complex] | np.ndarray) -> np.ndarray:
    """Inverse DFT, returning the real part.

    Intended for spectra of real signals (Hermitian up to rounding), so
    ``idft(dft(x)) == x`` to float precision.
    """
    arr = np.asarray(spectrum, dtype=np.complex128).reshape(-1)
    if arr.size == 0:
        raise EmptyInputError("cannot transform an empty spectrum")
    return np.fft.ifft(arr).real


def mirror_extend(signal: np.ndarray) -> np.ndarray:
    """Reflect the signal's halves outward, doubling its length.

    The first half is mirrored onto the left, the second half onto the
    right: ``[1,2,3,4] -> [2,1, 1,2,3,4, 4,3]``. The center N samples are
    the input, so :func:`recover_center` inverts exactly.
    """
    arr = np.asarray(signal, dtype=np.float64).reshape(-1)
    n = arr.size
    if n < 2:
        raise TooShortError("mirror extension needs at least 2 samples")
    left = arr[: n // 2][::-1]
    right = arr[n - (n - n // 2):][::-1]
    return np.concatenate([left, arr, right])


def recover_center(extended: np.ndarray, n: int) -> np.ndarray:
    """Crop the length-n center out of a mirror-extended signal."""
    extended = np.asarray(extended)
    start = n // 2
    if extended.shape[-1] != 2 * n:
        raise DimensionMismatchError(
            f"extended length {extended.shape[-1]} does not match 2*{n}"
        )
    return extended[..., start : start + n]


def half_spectrum(signal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Positive-frequency half-spectrum and its grid in cycles/sample."""
    arr = np.asarray(signal, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise EmptyInputError("cannot transform an empty signal")
    return np.fft.rfft(arr), np.fft.rfftfreq(arr.size)


def initial_state(cfg: VmdConfig, n_samples: int) -> VmdState:
    """Zeroed mode/dual spectra and initialized center frequencies."""
    if n_samples < 2:
        raise TooShortError("need at least 2 samples")
    freqs = np.fft.rfftfreq(n_samples)
    n_bins = freqs.size
    if cfg.omega_init == "uniform":
        omegas = 0.5 * np.arange(cfg.k) / cfg.k
    elif cfg.omega_init == "zero":
        omegas = np.zeros(cfg.k)
    else:  # random: log-uniform between the first bin and Nyquist
        rng = np.random.default_rng(cfg.seed)
        lo, hi = np.log(1.0 / n_samples), np.log(0.5)
        omegas = np.sort(np.exp(lo + (hi - lo) * rng.random(cfg.k)))
    if cfg.dc_mode:
        omegas[0] = 0.0
    return VmdState(
        mode_spectra=np.zeros((cfg.k, n_bins), dtype=np.complex128),
        omegas=omegas,
        lambda_spectrum=np.zeros(n_bins, dtype=np.complex128),
        freqs=freqs,
        dc_pinned=cfg.dc_mode,
    )


def _check_dims(state: VmdState, input_spectrum: np.ndarray, k: int) -> None:
    if state.mode_spectra.shape != (k, input_spectrum.size):
        raise DimensionMismatchError(
            f"state spectra {state.mode_spectra.shape} inconsistent with "
            f"K={k}, bins={input_spectrum.size}"
        )
    if state.lambda_spectrum.size != input_spectrum.size:
        raise DimensionMismatchError("dual spectrum length mismatch")


def update_modes(
    state: VmdState, input_spectrum: np.ndarray, cfg: VmdConfig
) -> VmdState:
    """One Gauss-Seidel sweep of Wiener-filter mode updates.

    For each mode in order, the residual spectrum (input minus all other
    modes, using already-updated modes earlier in the sweep, plus half the
    dual) is divided by ``1 + 2*alpha*(freq - omega_k)^2`` per bin.
    """
    input_spectrum = np.asarray(input_spectrum, dtype=np.complex128).reshape(-1)
    _check_dims(state, input_spectrum, cfg.k)
    spectra = state.mode_spectra.copy()
    half_dual = state.lambda_spectrum / 2.0
    for k in range(cfg.k):
        others = spectra.sum(axis=0) - spectra[k]
        residual = input_spectrum - others + half_dual
        denom = 1.0 + 2.0 * cfg.alpha * (state.freqs - state.omegas[k]) ** 2
        spectra[k] = residual / denom
    return dataclasses.replace(state, mode_spectra=spectra)


def update_omegas(state: VmdState) -> VmdState:
    """Re-center each mode at the power-weighted mean of its half-spectrum.

    Zero-energy modes keep their previous center (0/0 guard); a DC-pinned
    first mode is never moved. Results are clamped to [0, 0.5].
    """
    power = np.abs(state.mode_spectra) ** 2
    totals = power.sum(axis=1)
    omegas = state.omegas.copy()
    start = 1 if state.dc_pinned else 0
    for k in range(start, omegas.size):
        if totals[k] > 0.0:
            omegas[k] = min(max(float(power[k] @ state.freqs / totals[k]), 0.0), 0.5)
    return dataclasses.replace(state, omegas=omegas)


def update_lambda(
    state: VmdState, input_spectrum: np.ndarray, cfg: VmdConfig
) -> VmdState:
    """Dual ascent: add ``tau`` times the reconstruction residual."""
    input_spectrum = np.asarray(input_spectrum, dtype=np.complex128).reshape(-1)
    _check_dims(state, input_spectrum, cfg.k)
    residual = input_spectrum - state.mode_spectra.sum(axis=0)
    return dataclasses.replace(
        state, lambda_spectrum=state.lambda_spectrum + cfg.tau * residual
    )


def _relative_change(prev: np.ndarray, new: np.ndarray) -> float:
    """Summed per-mode relative spectral change.

    Per mode: ``|new - prev|^2 / |prev|^2``; a zero-norm previous iterate
    falls back to the absolute change so the statistic stays finite (and is
    exactly 0 for an unchanged zero mode).
    """
    total = 0.0
    for k in range(prev.shape[0]):
        diff = float(np.sum(np.abs(new[k] - prev[k]) ** 2))
        denom = float(np.sum(np.abs(prev[k]) ** 2))
        total += diff / denom if denom > 0.0 else diff
    return total


def _all_finite(state: VmdState) -> bool:
    return bool(
        np.isfinite(state.mode_spectra).all()
        and np.isfinite(state.omegas).all()
        and np.isfinite(state.lambda_spectrum).all()
    )


def decompose(series: TimeSeries | np.ndarray, cfg: VmdConfig) -> ModeSet:
    """Decompose a series into ``cfg.k`` modes plus center frequencies.

    Mirror-extends the signal (per ``cfg.boundary``), transforms to the
    half-spectrum, and iterates mode/center/dual updates until the relative
    change drops below ``cfg.epsilon`` or ``cfg.max_iters`` is hit. Modes
    come back sorted by center frequency, cropped to the input length.

    Raises ``TooShortError`` for inputs shorter than ``2*k`` and
    ``NonFiniteError`` if an iterate diverges (alpha/tau misconfiguration).
    """
    values = series.values if isinstance(series, TimeSeries) else np.asarray(
        series, dtype=np.float64
    ).reshape(-1)
    n = values.size
    if n < max(2, 2 * cfg.k):
        raise TooShortError(
            f"series of length {n} too short to separate {cfg.k} modes"
        )

    extended = mirror_extend(values) if cfg.boundary == "mirror" else values
    input_spectrum, _ = half_spectrum(extended)
    state = initial_state(cfg, extended.size)

    converged = False
    for iteration in range(1, cfg.max_iters + 1):
        prev_spectra = state.mode_spectra
        state = update_modes(state, input_spectrum, cfg)
        state = update_omegas(state)
        state = update_lambda(state, input_spectrum, cfg)
        delta = _relative_change(prev_spectra, state.mode_spectra)
        state = dataclasses.replace(state, iteration=iteration, last_delta=delta)
        if not _all_finite(state) or not np.isfinite(delta):
            raise NonFiniteError(
                f"iterate {iteration} became non-finite; "
                f"check alpha={cfg.alpha}, tau={cfg.tau}"
            )
        if delta < cfg.epsilon:
            converged = True
            break

    order = np.argsort(state.omegas, kind="stable")
    spectra = state.mode_spectra[order]
    omegas = state.omegas[order]
    modes_extended = np.fft.irfft(spectra, n=extended.size, axis=1)
    if cfg.boundary == "mirror":
        modes = recover_center(modes_extended, n)
    else:
        modes = modes_extended
    modes = np.ascontiguousarray(modes)

    norm = float(np.linalg.norm(values))
    if norm > 0.0:
        rec_err = float(np.linalg.norm(values - modes.sum(axis=0)) / norm)
    else:
        rec_err = 0.0
    return ModeSet(
        modes=modes,
        omegas=omegas,
        iterations=state.iteration,
        converged=converged,
        reconstruction_error=rec_err,
    )


def center_frequency(signal: np.ndarray) -> float:
    """Power-weighted mean frequency of a signal (cycles/sample)."""
    spectrum, freqs = half_spectrum(np.asarray(signal, dtype=np.float64))
    power = np.abs(spectrum) ** 2
    total = float(power.sum())
    if total == 0.0:
        return 0.0
    return float(power @ freqs / total)


def spectral_bandwidth(modes: np.ndarray, omegas: Sequence[float]) -> float:
    """Summed spectral concentration of modes around their centers.

    Lower is tighter: for each mode, the power-weighted squared distance of
    its half-spectrum from its center frequency, summed over modes. Used as
    a diagnostic for how well a partition isolates narrow bands.
    """
    modes = np.atleast_2d(np.asarray(modes, dtype=np.float64))
    omegas = np.asarray(omegas, dtype=np.float64)
    if modes.shape[0] != omegas.size:
        raise DimensionMismatchError("one center frequency per mode required")
    total = 0.0
    for k in range(modes.shape[0]):
        spectrum, freqs = half_spectrum(modes[k])
        total += float(np.abs(spectrum) ** 2 @ (freqs - omegas[k]) ** 2)
    return total


def write_modes_csv(
    path: str | Path,
    mode_set: ModeSet,
    timestamps: Sequence[str] | None = None,
) -> Path:
    """Write modes as CSV with columns ``t, mode_1..mode_K``."""
    k, n = mode_set.modes.shape
    if timestamps is not None and len(timestamps) != n:
        raise DimensionMismatchError(
            f"{len(timestamps)} timestamps for {n} samples"
        )
    header = ["t"] + [f"mode_{i + 1}" for i in range(k)]
    lines = [",".join(header)]
    for i in range(n):
        t = timestamps[i] if timestamps is not None else str(i)
        lines.append(",".join([t] + [repr(float(v)) for v in mode_set.modes[:, i]]))
    return atomic_write_text(path, "\n".join(lines) + "\n")


def write_modes_meta(path: str | Path, mode_set: ModeSet, cfg: VmdConfig) -> Path:
    """Write the decomposition metadata sidecar (JSON key-value record)."""
    meta = {
        "omegas": [float(w) for w in mode_set.omegas],
        "iterations": mode_set.iterations,
        "converged": mode_set.converged,
        "reconstruction_error": mode_set.reconstruction_error,
        "config": dataclasses.asdict(cfg),
    }
    return atomic_write_text(path, json.dumps(meta, indent=2) + "\n")
