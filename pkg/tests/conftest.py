"""Shared helpers: independently written reference implementations.

These are deliberately slow, loop-based transcriptions of the math the
package implements with vectorized numpy. The unit and acceptance suites
compare the fast code against these oracles instead of against itself.
"""

from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


def naive_dft(signal: np.ndarray) -> np.ndarray:
    """O(N^2) direct-sum DFT, the textbook definition."""
    x = np.asarray(signal, dtype=np.float64)
    n = x.size
    out = np.empty(n, dtype=np.complex128)
    for k in range(n):
        acc = 0.0 + 0.0j
        for t in range(n):
            acc += x[t] * np.exp(-2j * np.pi * k * t / n)
        out[k] = acc
    return out


def reference_mode_sweep(
    mode_spectra: np.ndarray,
    omegas: np.ndarray,
    lambda_spectrum: np.ndarray,
    freqs: np.ndarray,
    input_spectrum: np.ndarray,
    alpha: float,
) -> np.ndarray:
    """One sequential Wiener-filter sweep, written bin by bin.

    Mode k's new spectrum at bin f is the residual (input minus every other
    mode, using the already-updated values for modes before k, plus half the
    dual variable) divided by 1 + 2*alpha*(f - omega_k)^2. No vectorization,
    no shared code with the implementation under test.
    """
    k_modes, n_bins = mode_spectra.shape
    spectra = mode_spectra.astype(np.complex128).copy()
    for k in range(k_modes):
        for f in range(n_bins):
            others = 0.0 + 0.0j
            for j in range(k_modes):
                if j != k:
                    others += spectra[j, f]
            residual = input_spectrum[f] - others + lambda_spectrum[f] / 2.0
            spectra[k, f] = residual / (
                1.0 + 2.0 * alpha * (freqs[f] - omegas[k]) ** 2
            )
    return spectra


def finite_difference_gradients(model, inputs, targets, l1_weight, step=1e-6):
    """Central finite differences of the batch loss over the flat parameter vector."""
    from modecast.models import get_params, loss, set_params
    from modecast.series import WindowSet

    batch = WindowSet(
        inputs=inputs,
        targets=targets,
        lookback=model.lookback,
        horizon=model.horizon,
    )
    base = get_params(model)
    grad = np.empty_like(base)
    for i in range(base.size):
        bumped = base.copy()
        bumped[i] = base[i] + step
        set_params(model, bumped)
        hi = loss(model, batch, l1_weight)
        bumped[i] = base[i] - step
        set_params(model, bumped)
        lo = loss(model, batch, l1_weight)
        grad[i] = (hi - lo) / (2.0 * step)
    set_params(model, base)
    return grad


def two_largest_fft_peaks(values: np.ndarray) -> np.ndarray:
    """Frequencies of the two largest magnitude bins of the half-spectrum."""
    spectrum = np.abs(np.fft.rfft(values))
    freqs = np.fft.rfftfreq(values.size)
    top = np.argsort(spectrum)[-2:]
    return np.sort(freqs[top])


def write_csv(path: Path, columns: dict[str, np.ndarray]) -> Path:
    names = list(columns)
    n = len(next(iter(columns.values())))
    lines = ["timestamp," + ",".join(names)]
    for i in range(n):
        lines.append(str(i) + "," + ",".join(repr(float(columns[c][i])) for c in names))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
