"""OFDM modulation, frame assembly and receiver-side symbol extraction.

Transforms are unitary (``norm="ortho"``) so that per-symbol energy is
identical in time and frequency. Grid column ``k`` is transmitted on
signed frequency ``k - n_alloc // 2``, which centres the allocation on DC.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, WindowRangeError


@dataclass(frozen=True)
class IqSignal:
    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.complex128)
        if s.ndim != 1:
            raise InvalidArgumentError("IQ samples must be one-dimensional")
        if not self.sample_rate > 0:
            raise InvalidArgumentError(f"sample rate {self.sample_rate} must be positive")
        if not np.all(np.isfinite(s)):
            raise InvalidArgumentError("IQ samples contain NaN or Inf")
        object.__setattr__(self, "samples", s)

    def __len__(self):
        return self.samples.size

    def energy(self):
        return float(np.vdot(self.samples, self.samples).real)


@dataclass(frozen=True)
class FrameLayout:
    slots_per_frame: int = 20
    symbols_per_slot: int = 14
    preamble_slot: int = 0
    prs_slot: int = 1

    def __post_init__(self):
        if self.slots_per_frame < 1 or self.symbols_per_slot < 1:
            raise InvalidArgumentError("frame layout needs at least one slot and symbol")
        for name in ("preamble_slot", "prs_slot"):
            idx = getattr(self, name)
            if not 0 <= idx < self.slots_per_frame:
                raise InvalidArgumentError(f"{name}={idx} outside [0, {self.slots_per_frame})")

    def slot_len(self, cfg):
        return self.symbols_per_slot * cfg.symbol_len

    def frame_len(self, cfg):
        return self.slots_per_frame * self.slot_len(cfg)

    def prs_start(self, cfg):
        """Sample index of the first PRS symbol's cyclic prefix in the frame."""
        return self.prs_slot * self.slot_len(cfg) + cfg.l_start * cfg.symbol_len


def signed_frequency(cfg):
    """Signed frequency index (in subcarriers) of each grid column."""
    k = np.arange(cfg.n_fft)
    half = cfg.n_fft // 2
    return (k - cfg.n_alloc // 2 + half) % cfg.n_fft - half


def fft_bins(cfg):
    """FFT bin of each grid column."""
    return (np.arange(cfg.n_fft) - cfg.n_alloc // 2) % cfg.n_fft


def modulate_symbol(column, cfg):
    """Time samples (CP first) of one grid column."""
    spec = np.zeros(cfg.n_fft, dtype=np.complex128)
    spec[fft_bins(cfg)] = column
    body = np.fft.ifft(spec, norm="ortho")
    if cfg.n_cp:
        return np.concatenate([body[-cfg.n_cp :], body])
    return body


def modulate(grid, cfg):
    """IFFT each grid row, prepend the cyclic prefix and concatenate."""
    cells = grid.cells if hasattr(grid, "cells") else np.asarray(grid)
    if cells.ndim != 2 or cells.shape[1] != cfg.n_fft:
        raise InvalidArgumentError(
            f"grid shape {cells.shape} does not match n_fft={cfg.n_fft}"
        )
    spec = np.zeros_like(cells, dtype=np.complex128)
    spec[:, fft_bins(cfg)] = cells
    body = np.fft.ifft(spec, axis=1, norm="ortho")
    if cfg.n_cp:
        body = np.concatenate([body[:, -cfg.n_cp :], body], axis=1)
    return IqSignal(body.reshape(-1), cfg.sample_rate)


def prs_reference(tx_slot, cfg):
    """PRS portion (all PRS symbols with CPs) of a modulated slot."""
    s = tx_slot.samples if isinstance(tx_slot, IqSignal) else np.asarray(tx_slot)
    a = cfg.l_start * cfg.symbol_len
    return IqSignal(s[a : a + cfg.l_prs * cfg.symbol_len], cfg.sample_rate)


def assemble_frame(prs_signal, preamble, layout, cfg):
    """Place the preamble at the start of its slot and the PRS slot in its slot.

    ``prs_signal`` is a modulated slot (all symbols, PRS at ``l_start``);
    empty signals leave their slot zero.
    """
    if layout.symbols_per_slot != cfg.symbols_per_slot:
        raise InvalidArgumentError("frame layout and PRS config disagree on symbols per slot")
    slot_len = layout.slot_len(cfg)
    frame = np.zeros(layout.frame_len(cfg), dtype=np.complex128)
    for name, sig, slot in (
        ("preamble", preamble, layout.preamble_slot),
        ("PRS", prs_signal, layout.prs_slot),
    ):
        s = np.asarray(sig.samples if isinstance(sig, IqSignal) else sig, dtype=np.complex128)
        if s.size > slot_len:
            raise InvalidArgumentError(f"{name} of {s.size} samples overflows slot of {slot_len}")
        a = slot * slot_len
        frame[a : a + s.size] += s
    return IqSignal(frame, cfg.sample_rate)


def extract_symbol(y, l, itoa, cfg, backoff=0):
    """FFT of the ``l``-th PRS symbol after the integer timing ``itoa``.

    ``itoa`` indexes the first PRS cyclic prefix in ``y``. The window normally
    starts right after the CP; ``backoff`` moves it that many samples earlier
    into the CP and the known shift is derotated away, so the result matches
    the zero-backoff output while staying clear of the next symbol.

    Returns the spectrum in grid-column order.
    """
    s = y.samples if isinstance(y, IqSignal) else np.asarray(y)
    if not 0 <= backoff <= cfg.n_cp:
        raise InvalidArgumentError(f"backoff {backoff} not in [0, n_cp={cfg.n_cp}]")
    start = int(itoa) + l * cfg.symbol_len + cfg.n_cp - int(backoff)
    stop = start + cfg.n_fft
    if start < 0 or stop > s.size:
        raise WindowRangeError(f"symbol window [{start}, {stop}) outside signal of {s.size}")
    spec = np.fft.fft(s[start:stop], norm="ortho")[fft_bins(cfg)]
    if backoff:
        spec = spec * np.exp(2j * np.pi * signed_frequency(cfg) * backoff / cfg.n_fft)
    return spec


def write_iq(path, sig):
    """Write little-endian interleaved float32 I/Q plus a ``.hdr`` sidecar."""
    data = np.empty(2 * len(sig), dtype="<f4")
    data[0::2] = sig.samples.real
    data[1::2] = sig.samples.imag
    data.tofile(path)
    with open(f"{path}.hdr", "w") as fh:
        fh.write(f"sample_rate_hz={sig.sample_rate!r}\n")


def read_iq(path):
    with open(f"{path}.hdr") as fh:
        header = dict(
            line.strip().split("=", 1) for line in fh if "=" in line and not line.startswith("#")
        )
    try:
        rate = float(header["sample_rate_hz"])
    except KeyError:
        raise InvalidArgumentError(f"{path}.hdr lacks sample_rate_hz") from None
    raw = np.fromfile(path, dtype="<f4")
    if raw.size % 2:
        raise InvalidArgumentError(f"{path}: odd number of float32 values")
    return IqSignal(raw[0::2].astype(np.float64) + 1j * raw[1::2].astype(np.float64), rate)
