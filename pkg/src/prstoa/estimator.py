"""Residual TOA from the phase slope of the zero-forcing channel estimate.

The PRS subcarriers of one OFDM symbol are split into a lower and an upper
half. The complex mean of the channel estimate over each half is a single
phasor; the angle between the two phasors, divided by the comb-step
distance ``M`` between the halves, is the per-comb-step phase slope ``S``.
A delay of ``eps`` samples rotates subcarrier ``k`` by ``-2 pi k eps / N``,
so ``eps = -N S / (2 pi K_comb)``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, DegenerateInputError, InvalidArgumentError, StageError
from .grid import prs_indices
from .ofdm import IqSignal, extract_symbol
from .sync import correlate, estimate_itoa


@dataclass(frozen=True)
class CfrEstimate:
    values: np.ndarray
    indices: np.ndarray


@dataclass(frozen=True)
class PhaseSplit:
    h_low: complex
    h_high: complex
    theta_i: float
    theta_f: float
    m_span: float


@dataclass(frozen=True)
class EstimatorOptions:
    """Knobs of :func:`estimate_toa`.

    ``m_mode`` selects the comb-step distance ``M`` between the two halves:
    ``"centroid"`` uses the distance between the half centroids
    (``N_PRS / 2`` for equal halves) and is unbiased; ``"full"`` uses
    ``M = N_PRS``, the whole comb length, which halves the estimate. A number is
    used as is. ``backoff=None`` places the FFT window mid-CP.
    """

    step: int = 1
    m_mode: object = "centroid"
    backoff: int = None
    max_lag: int = None
    method: str = "auto"


@dataclass(frozen=True)
class ToaEstimate:
    itoa: int
    rtoa: float
    toa: float
    slope: float
    m_span: float
    per_symbol_rtoa: list = field(default_factory=list)
    per_symbol_slope: list = field(default_factory=list)
    min_h_magnitude: float = 0.0
    coherence: float = 1.0

    CSV_HEADER = "trial_id,snr_db,n_rb,k_comb,beta,itoa,rtoa,toa,slope"

    def csv_row(self, trial_id, snr_db, cfg):
        return (
            f"{trial_id},{snr_db:g},{cfg.n_rb},{cfg.k_comb},{cfg.beta_prs:.17g},"
            f"{self.itoa},{self.rtoa:.17g},{self.toa:.17g},{self.slope:.17g}"
        )


def estimate_cfr(Y, grid, l, cfg):
    """Zero-forcing estimate ``Y[k] / X[k]`` on the PRS subcarriers of symbol ``l``."""
    idx = prs_indices(cfg, l - cfg.l_start)
    X = grid.cells[l, idx]
    if np.any(X == 0):
        raise ConsistencyError(f"symbol {l} has zero-valued PRS cells")
    Y = np.asarray(Y)
    return CfrEstimate(Y[idx] / X, idx)


def split_sets(indices):
    """Lower and upper halves of the PRS subcarrier indices."""
    indices = np.asarray(indices)
    if indices.size < 2 or indices.size % 2:
        raise InvalidArgumentError(f"need an even number (>= 2) of PRS subcarriers, got {indices.size}")
    half = indices.size // 2
    return indices[:half], indices[half:]


def _resolve_m(m_mode, low, high, k_comb):
    if m_mode == "centroid":
        return float((np.mean(high) - np.mean(low)) / k_comb)
    if m_mode == "full":
        return float(low.size + high.size)
    m = float(m_mode)
    if not m > 0:
        raise InvalidArgumentError(f"M={m} must be positive")
    return m


def average_halves(cfr, sets=None, m_span=None, k_comb=None):
    """Complex means of the CFR over each half.

    ``m_span`` defaults to the centroid distance of the halves in comb steps.
    """
    if sets is None:
        sets = split_sets(cfr.indices)
    low, high = (np.asarray(s) for s in sets)
    if low.size == 0 or high.size == 0:
        raise InvalidArgumentError("both subcarrier sets must be nonempty")
    pos = {int(k): i for i, k in enumerate(cfr.indices)}
    try:
        h_low = complex(np.mean(cfr.values[[pos[int(k)] for k in low]]))
        h_high = complex(np.mean(cfr.values[[pos[int(k)] for k in high]]))
    except KeyError as exc:
        raise InvalidArgumentError(f"subcarrier {exc} is not a PRS index") from None
    if m_span is None:
        if k_comb is None:
            k_comb = int(cfr.indices[1] - cfr.indices[0]) if cfr.indices.size > 1 else 1
        m_span = _resolve_m("centroid", low, high, k_comb)
    if not m_span > 0:
        raise InvalidArgumentError(f"M={m_span} must be positive")
    return PhaseSplit(h_low, h_high, math.atan2(h_low.imag, h_low.real),
                      math.atan2(h_high.imag, h_high.real), float(m_span))


def slope(split, min_magnitude=0.0):
    """Phase advance per comb step, principal angle in (-pi, pi] over ``M``."""
    if not split.m_span > 0:
        raise InvalidArgumentError(f"M={split.m_span} must be positive")
    if abs(split.h_low) <= min_magnitude or abs(split.h_high) <= min_magnitude:
        raise DegenerateInputError(
            f"averaged channel too weak (|h_low|={abs(split.h_low):.3g}, "
            f"|h_high|={abs(split.h_high):.3g})"
        )
    z = split.h_high * split.h_low.conjugate()
    ang = math.atan2(z.imag, z.real)
    if ang == -math.pi:
        ang = math.pi
    return ang / split.m_span


def rtoa_from_slope(S, cfg=None, n_fft=None, k_comb=None):
    """Residual TOA in samples, ``-N_FFT S / (2 pi K_comb)``."""
    if cfg is not None:
        n_fft, k_comb = cfg.n_fft, cfg.k_comb
    if not math.isfinite(S):
        raise InvalidArgumentError(f"slope {S} is not finite")
    return -n_fft * S / (2.0 * math.pi * k_comb)


def wrap_bound(cfg, m_span):
    """Largest |residual| measurable before the phase difference aliases."""
    return cfg.n_fft / (2.0 * m_span * cfg.k_comb)


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def estimate_toa(y, grid, reference, cfg, options=None):
    """Integer TOA by correlation, refined by the OPA residual.

    Parameters
    ----------
    y : IqSignal or array
        Received samples containing the whole PRS occasion.
    grid : ResourceGrid
        Transmitted PRS grid (known to the receiver).
    reference : IqSignal or array
        Transmitted PRS waveform, all PRS symbols with CPs.
    cfg : PrsConfig
    options : EstimatorOptions, optional

    Returns
    -------
    ToaEstimate
        ``toa`` is in samples of ``y`` and points at the first PRS CP.
    """
    opts = options or EstimatorOptions()
    backoff = cfg.n_cp // 2 if opts.backoff is None else opts.backoff
    profile = _stage("correlate", correlate, y, reference, opts.step, opts.max_lag, opts.method)
    itoa = _stage("itoa", estimate_itoa, profile)

    floor = 1e-12 * cfg.beta_prs
    rtoas, slopes, mags, coh = [], [], [], []
    m_span = None
    for i, l in enumerate(cfg.prs_symbols):
        Y = _stage("extract", extract_symbol, y, i, itoa, cfg, backoff)
        cfr = _stage("cfr", estimate_cfr, Y, grid, l, cfg)
        low, high = _stage("split", split_sets, cfr.indices)
        m_span = _stage("split", _resolve_m, opts.m_mode, low, high, cfg.k_comb)
        split = _stage("average", average_halves, cfr, (low, high), m_span)
        s = _stage("slope", slope, split, floor)
        slopes.append(s)
        rtoas.append(rtoa_from_slope(s, cfg))
        mags.append(min(abs(split.h_low), abs(split.h_high)))
        mean_mag = float(np.mean(np.abs(cfr.values)))
        coh.append((abs(split.h_low) + abs(split.h_high)) / (2 * mean_mag) if mean_mag else 0.0)

    rtoa = float(np.mean(rtoas))
    return ToaEstimate(
        itoa=itoa,
        rtoa=rtoa,
        toa=itoa + rtoa,
        slope=float(np.mean(slopes)),
        m_span=m_span,
        per_symbol_rtoa=rtoas,
        per_symbol_slope=slopes,
        min_h_magnitude=min(mags),
        coherence=float(np.mean(coh)),
    )
