"""Line-of-sight delayed channel with calibrated AWGN.

The fractional part of the delay is realised with a 64-tap Kaiser-windowed
sinc; integer parts are plain sample shifts.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import i0

from .errors import InvalidArgumentError
from .ofdm import IqSignal, extract_symbol, modulate, signed_frequency
from .grid import prs_indices

FD_TAPS = 64
FD_KAISER_BETA = 10.0
FD_CENTER = FD_TAPS // 2 - 1


@dataclass(frozen=True)
class ChannelSpec:
    alpha: complex = 1.0 + 0.0j
    tau_samples: float = 0.0
    snr_db: float = math.inf
    rng_seed: int = 0

    def __post_init__(self):
        if not self.tau_samples >= 0:
            raise InvalidArgumentError(f"tau_samples={self.tau_samples} must be >= 0")


def fractional_delay_taps(frac, ntaps=FD_TAPS, beta=FD_KAISER_BETA):
    """Windowed-sinc taps delaying by ``ntaps // 2 - 1 + frac`` samples."""
    if not 0.0 <= frac < 1.0:
        raise InvalidArgumentError(f"fractional delay {frac} not in [0, 1)")
    t = np.arange(ntaps) - (ntaps // 2 - 1) - frac
    arg = np.clip(1.0 - (t / (ntaps / 2)) ** 2, 0.0, None)
    h = np.sinc(t) * i0(beta * np.sqrt(arg)) / i0(beta)
    return h / h.sum()


def delay_samples(x, tau):
    """Delay ``x`` by ``tau`` samples (linear, not cyclic)."""
    x = np.asarray(x, dtype=np.complex128)
    d = int(math.floor(tau))
    frac = tau - d
    if frac == 0.0:
        out = np.zeros(x.size + d, dtype=np.complex128)
        out[d:] = x
        return out
    conv = np.convolve(x, fractional_delay_taps(frac))
    n_out = x.size + d + 1 + FD_TAPS // 2
    shifted = np.concatenate([np.zeros(d, dtype=np.complex128), conv])
    out = np.zeros(n_out, dtype=np.complex128)
    seg = shifted[FD_CENTER : FD_CENTER + n_out]
    out[: seg.size] = seg
    return out


def complex_noise(n, std, rng):
    """Circular complex Gaussian noise with ``E|w|^2 = std**2``."""
    if std == 0:
        return np.zeros(n, dtype=np.complex128)
    w = rng.standard_normal((n, 2))
    return (std / math.sqrt(2.0)) * (w[:, 0] + 1j * w[:, 1])


def prs_bin_power(x, cfg, prs_start=0):
    """Mean |Y[k_m]|^2 over the PRS subcarriers of all PRS symbols in ``x``."""
    acc = 0.0
    for l in range(cfg.l_prs):
        spec = extract_symbol(x, l, prs_start, cfg)
        acc += float(np.mean(np.abs(spec[prs_indices(cfg, l)]) ** 2))
    return acc / cfg.l_prs


def calibrate_noise(x, cfg, snr_db, prs_start=0):
    """Noise std per complex sample for a per-PRS-subcarrier SNR of ``snr_db``.

    With unitary transforms the per-bin noise variance equals the per-sample
    variance, so the result is ``sqrt(P_bin / 10**(snr_db/10))`` where
    ``P_bin`` is the measured PRS subcarrier power of ``x``.
    """
    s = x.samples if isinstance(x, IqSignal) else np.asarray(x)
    if s.size == 0:
        raise InvalidArgumentError("cannot calibrate noise against an empty signal")
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    p_bin = prs_bin_power(s, cfg, prs_start)
    if p_bin <= 0:
        raise InvalidArgumentError("signal carries no PRS power to calibrate against")
    return math.sqrt(p_bin / 10.0 ** (snr_db / 10.0))


def apply_channel(x, ch, cfg=None, prs_start=0, noise_std=None):
    """``y = alpha * delay(x, tau) + w``.

    Noise is calibrated against the PRS found at ``prs_start`` in ``x``
    (needs ``cfg``) unless ``noise_std`` is given explicitly. The output is
    ``len(x) + ceil(tau)`` samples long, plus ``FD_TAPS // 2`` when ``tau``
    is fractional.
    """
    s = x.samples if isinstance(x, IqSignal) else np.asarray(x, dtype=np.complex128)
    rate = x.sample_rate if isinstance(x, IqSignal) else (cfg.sample_rate if cfg else 1.0)
    if s.size == 0:
        raise InvalidArgumentError("channel input is empty")
    y = complex(ch.alpha) * delay_samples(s, ch.tau_samples)
    if noise_std is None:
        if math.isinf(ch.snr_db) and ch.snr_db > 0:
            noise_std = 0.0
        elif cfg is None:
            raise InvalidArgumentError("finite SNR needs a PrsConfig to calibrate noise")
        else:
            noise_std = abs(complex(ch.alpha)) * calibrate_noise(s, cfg, ch.snr_db, prs_start)
    if noise_std:
        y = y + complex_noise(y.size, noise_std, np.random.default_rng(ch.rng_seed))
    return IqSignal(y, rate)


def model_rx_bin(X, k, tau, alpha, N):
    """Noiseless received bin ``alpha * exp(-j 2 pi k tau / N) * X``."""
    return alpha * np.exp(-2j * np.pi * np.asarray(k) * tau / N) * X


def phase_ramp_slot(grid, cfg, tau, alpha=1.0):
    """Modulated slot whose every symbol is cyclically delayed by ``tau``.

    Reference channel for validation: each FFT window at the nominal timing
    sees exactly ``model_rx_bin`` on every subcarrier.
    """
    cells = grid.cells if hasattr(grid, "cells") else np.asarray(grid)
    ramp = model_rx_bin(1.0, signed_frequency(cfg), tau, alpha, cfg.n_fft)
    return modulate(cells * ramp[np.newaxis, :], cfg)


def phase_ramp_channel(grid, cfg, tau, alpha=1.0, lead=0):
    """Slot waveform delayed by ``tau`` using the frequency-ramp model.

    The integer part is a sample shift, the fractional part a per-symbol
    cyclic phase ramp. ``lead`` zeros are prepended before the delay.
    """
    d = int(math.floor(tau))
    slot = phase_ramp_slot(grid, cfg, tau - d, alpha)
    out = np.concatenate([np.zeros(lead + d, dtype=np.complex128), slot.samples])
    return IqSignal(out, cfg.sample_rate)
