"""Integer time of arrival from cross-correlation against the known PRS."""

from dataclasses import dataclass

import numpy as np
from scipy import signal as sp_signal

from .errors import InvalidArgumentError
from .ofdm import IqSignal

# Direct evaluation above this many multiply-accumulates switches to FFT.
DIRECT_MAX_WORK = 10**5


@dataclass(frozen=True)
class CorrelationProfile:
    lags: np.ndarray
    magnitudes: np.ndarray
    peak_lag: int

    def to_csv(self, fh):
        fh.write("lag,magnitude\n")
        for t, r in zip(self.lags, self.magnitudes):
            fh.write(f"{int(t)},{r:.17g}\n")


def _samples(x):
    return x.samples if isinstance(x, IqSignal) else np.asarray(x, dtype=np.complex128)


def correlate(y, x_ref, step=1, max_lag=None, method="auto"):
    """``R[t] = |sum_n y[n + t] conj(x_ref[n])|`` for ``t = 0, step, ...``.

    Samples of ``y`` past its end count as zero. ``method`` is ``"direct"``,
    ``"fft"`` or ``"auto"`` (direct for small workloads).
    """
    ys = _samples(y)
    xs = _samples(x_ref)
    if xs.size == 0:
        raise InvalidArgumentError("correlation reference is empty")
    if step < 1:
        raise InvalidArgumentError(f"lag step {step} must be positive")
    if max_lag is None:
        max_lag = max(ys.size - xs.size, 0)
    if max_lag < 0:
        raise InvalidArgumentError(f"max_lag {max_lag} is negative")
    need = max_lag + xs.size
    if ys.size < need:
        ys = np.concatenate([ys, np.zeros(need - ys.size, dtype=np.complex128)])
    else:
        ys = ys[:need]
    if method == "auto":
        method = "direct" if (max_lag // step + 1) * xs.size <= DIRECT_MAX_WORK else "fft"
    lags = np.arange(0, max_lag + 1, step)
    if method == "direct":
        mags = np.array([abs(np.vdot(xs, ys[t : t + xs.size])) for t in lags])
    elif method == "fft":
        full = sp_signal.correlate(ys, xs, mode="valid", method="fft")
        mags = np.abs(full[lags])
    else:
        raise InvalidArgumentError(f"unknown correlation method {method!r}")
    return CorrelationProfile(lags, mags, int(lags[np.argmax(mags)]))


def estimate_itoa(profile):
    """Lag of the global maximum; ties go to the smallest lag."""
    mags = np.asarray(profile.magnitudes)
    if mags.size == 0:
        raise InvalidArgumentError("empty correlation profile")
    lags = np.asarray(profile.lags)
    best = np.flatnonzero(mags == mags.max())
    return int(lags[best].min())
