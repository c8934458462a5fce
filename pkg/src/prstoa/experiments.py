"""Monte-Carlo sweeps of TOA mean squared error, plus PSD views."""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import signal as sp_signal

from .channel import calibrate_noise, complex_noise, delay_samples
from .errors import InvalidArgumentError, StageError
from .estimator import EstimatorOptions, estimate_toa
from .grid import PrsConfig, beta_for_energy, build_grid, prs_energy
from .ofdm import FrameLayout, IqSignal, assemble_frame, modulate, prs_reference
from .sequences import generate_preamble

log = logging.getLogger(__name__)

SPEED_OF_LIGHT = 299_792_458.0
CSV_HEADER = "parameter,value,snr_db,trials,mse_samples,mse_meters"
VARIANT = "variant"  # swept values "n_rb:k_comb"


@dataclass(frozen=True)
class Transmitter:
    """Everything the receiver knows about one PRS configuration."""

    cfg: PrsConfig
    grid: object
    slot: IqSignal
    reference: IqSignal

    @classmethod
    def from_config(cls, cfg):
        grid = build_grid(cfg)
        slot = modulate(grid, cfg)
        return cls(cfg, grid, slot, prs_reference(slot, cfg))

    def capture(self, margin=None):
        """Reference padded by ``margin`` zero samples on both sides."""
        margin = self.cfg.symbol_len if margin is None else margin
        z = np.zeros(margin, dtype=np.complex128)
        return np.concatenate([z, self.reference.samples, z]), margin

    def frame(self, layout=None, preamble_length=1023):
        """Full radio frame: preamble in its slot, PRS slot in its slot.

        The preamble is scaled to the PRS per-sample power.
        """
        layout = layout or FrameLayout(symbols_per_slot=self.cfg.symbols_per_slot)
        amp = math.sqrt(prs_energy(self.cfg) / self.cfg.n_fft)
        pre = amp * generate_preamble(preamble_length) if preamble_length else np.zeros(0)
        return assemble_frame(self.slot, pre, layout, self.cfg)


@dataclass(frozen=True)
class SweepSpec:
    """One MSE-vs-SNR experiment.

    ``parameter`` is a :class:`PrsConfig` field name or ``"variant"`` with
    values ``"n_rb:k_comb"``. When ``fixed_energy`` is set every derived
    configuration gets the ``beta_prs`` that yields that PRS energy.
    ``noise_reference="base"`` fixes the noise level from the base
    configuration's PRS subcarrier power, so changing ``beta_prs`` changes
    the per-subcarrier SNR; ``"cell"`` recalibrates per configuration.
    ``tau_fractional=None`` draws the fractional delay uniformly in [0, 1).
    """

    base_config: PrsConfig = field(default_factory=PrsConfig)
    parameter: str = "n_rb"
    values: tuple = (20,)
    snr_grid_db: tuple = (20.0,)
    trials_per_point: int = 200
    tau_integer: int = 3
    tau_fractional: float = None
    rng_seed: int = 0
    fixed_energy: float = None
    noise_reference: str = "base"
    options: EstimatorOptions = field(default_factory=EstimatorOptions)
    workers: int = 1

    def __post_init__(self):
        if self.trials_per_point < 1:
            raise InvalidArgumentError("trials_per_point must be >= 1")
        if len(self.values) == 0:
            raise InvalidArgumentError("swept value list is empty")
        if len(self.snr_grid_db) == 0:
            raise InvalidArgumentError("SNR grid is empty")
        if self.tau_integer < 0:
            raise InvalidArgumentError("tau_integer must be >= 0")
        if self.tau_fractional is not None and not 0 <= self.tau_fractional < 1:
            raise InvalidArgumentError("tau_fractional must lie in [0, 1)")
        if self.noise_reference not in ("base", "cell"):
            raise InvalidArgumentError("noise_reference must be 'base' or 'cell'")
        if self.parameter != VARIANT and self.parameter not in PrsConfig.field_names():
            raise InvalidArgumentError(f"unknown swept parameter {self.parameter!r}")


@dataclass(frozen=True)
class MseRow:
    parameter: str
    value: object
    snr_db: float
    trials: int
    mse_samples: float
    mse_meters: float
    mse_stderr: float
    itoa_mse: float
    itoa_stderr: float


@dataclass
class MseReport:
    rows: list
    skipped: list
    sample_rate: float

    def row(self, value, snr_db):
        for r in self.rows:
            if str(r.value) == str(value) and r.snr_db == snr_db:
                return r
        raise KeyError((value, snr_db))

    def to_csv(self, fh, comments=()):
        for c in comments:
            fh.write(f"# {c}\n")
        fh.write(CSV_HEADER + "\n")
        for r in self.rows:
            fh.write(
                f"{r.parameter},{r.value},{r.snr_db:g},{r.trials},"
                f"{r.mse_samples:.17g},{r.mse_meters:.17g}\n"
            )


def samples_to_meters(x, sample_rate):
    return x * SPEED_OF_LIGHT / sample_rate


def mse(estimates, truth):
    est = np.asarray(estimates, dtype=np.float64)
    if est.size == 0:
        raise InvalidArgumentError("no estimates")
    return float(np.mean((est - truth) ** 2))


def derive_config(spec, value):
    base = spec.base_config
    if spec.parameter == VARIANT:
        n_rb, k_comb = parse_variant(value)
        cfg = base.with_(n_rb=n_rb, k_comb=k_comb, k_offset=base.k_offset % k_comb)
    else:
        cfg = base.with_(**{spec.parameter: value})
    if spec.fixed_energy is not None:
        cfg = cfg.with_(beta_prs=beta_for_energy(spec.fixed_energy, cfg))
    return cfg


def parse_variant(value):
    if isinstance(value, (tuple, list)):
        n_rb, k_comb = value
    else:
        try:
            n_rb, k_comb = (int(v) for v in str(value).split(":"))
        except ValueError:
            raise InvalidArgumentError(f"variant {value!r} is not 'n_rb:k_comb'") from None
    return int(n_rb), int(k_comb)


def fixed_energy_variants(energy, variants, base=None):
    """Configs with the given ``(n_rb, k_comb)`` pairs, all at PRS energy ``energy``."""
    base = base or PrsConfig()
    out = []
    for n_rb, k_comb in variants:
        try:
            cfg = base.with_(n_rb=n_rb, k_comb=k_comb, k_offset=base.k_offset % k_comb)
            out.append(cfg.with_(beta_prs=beta_for_energy(energy, cfg)))
        except InvalidArgumentError as exc:
            raise InvalidArgumentError(f"variant (n_rb={n_rb}, k_comb={k_comb}): {exc}") from exc
    return out


def trial_rng(seed, cell, snr_index, trial):
    return np.random.default_rng(np.random.SeedSequence([seed, cell, snr_index, trial]))


def _run_cell(job):
    """Run all trials of one (value, SNR) cell; returns errors and failures."""
    spec, cell, snr_index, cfg, noise_std = job
    tx = Transmitter.from_config(cfg)
    clean, margin = tx.capture()
    errors, itoa_errors, failures = [], [], []
    for trial in range(spec.trials_per_point):
        rng = trial_rng(spec.rng_seed, cell, snr_index, trial)
        frac = rng.random() if spec.tau_fractional is None else spec.tau_fractional
        tau = spec.tau_integer + frac
        y = delay_samples(clean, tau)
        if noise_std:
            y = y + complex_noise(y.size, noise_std, rng)
        try:
            est = estimate_toa(y, tx.grid, tx.reference, cfg, spec.options)
        except StageError as exc:
            failures.append((trial, str(exc)))
            continue
        truth = margin + tau
        errors.append(est.toa - truth)
        itoa_errors.append(est.itoa - truth)
    return np.array(errors), np.array(itoa_errors), failures


def _noise_std(spec, cfg, snr_db):
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    ref_cfg = spec.base_config if spec.noise_reference == "base" else cfg
    ref = Transmitter.from_config(ref_cfg)
    return calibrate_noise(ref.reference, ref_cfg, snr_db)


def _mean_stderr(sq):
    se = float(np.std(sq, ddof=1) / math.sqrt(sq.size)) if sq.size > 1 else math.inf
    return float(np.mean(sq)), se


def run_sweep(spec, progress=None):
    """MSE of the combined TOA for every (swept value, SNR) cell.

    Trials draw their delay and noise from a generator seeded by
    ``(rng_seed, cell, snr index, trial)``, so results do not depend on
    ``workers``.
    """
    jobs, keys, skipped = [], [], []
    for cell, value in enumerate(spec.values):
        try:
            cfg = derive_config(spec, value)
        except InvalidArgumentError as exc:
            for snr in spec.snr_grid_db:
                skipped.append((value, snr, None, spec.trials_per_point, str(exc)))
            log.warning("skipping %s=%s: %s", spec.parameter, value, exc)
            continue
        for si, snr in enumerate(spec.snr_grid_db):
            jobs.append((spec, cell, si, cfg, _noise_std(spec, cfg, snr)))
            keys.append((value, snr, cfg))

    if spec.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_run_cell, jobs))
    else:
        results = []
        for i, job in enumerate(jobs):
            results.append(_run_cell(job))
            if progress:
                progress(i + 1, len(jobs))

    rate = spec.base_config.sample_rate
    rows = []
    for (value, snr, cfg), (err, ierr, failures) in zip(keys, results):
        for trial, reason in failures:
            skipped.append((value, snr, trial, 1, reason))
        if err.size == 0:
            continue
        m, se = _mean_stderr(err**2)
        im, ise = _mean_stderr(ierr**2)
        rows.append(
            MseRow(spec.parameter, value, float(snr), int(err.size), m,
                   samples_to_meters(m, cfg.sample_rate), se, im, ise)
        )
    return MseReport(rows, skipped, rate)


def compute_psd(x, segment_length, overlap=0.5):
    """Two-sided Welch PSD (Hann window), frequency axis centred on DC.

    Returns ``(freqs_hz, psd)`` with ``psd`` in power per Hz, so that
    ``sum(psd) * df`` is the mean signal power.
    """
    s = x.samples if isinstance(x, IqSignal) else np.asarray(x)
    fs = x.sample_rate if isinstance(x, IqSignal) else 1.0
    segment_length = int(segment_length)
    if segment_length < 2 or s.size < segment_length:
        raise InvalidArgumentError(
            f"signal of {s.size} samples is shorter than one segment of {segment_length}"
        )
    if not 0 <= overlap < 1:
        raise InvalidArgumentError("overlap must lie in [0, 1)")
    freqs, psd = sp_signal.welch(
        s, fs=fs, window="hann", nperseg=segment_length,
        noverlap=int(overlap * segment_length), return_onesided=False,
        detrend=False, scaling="density",
    )
    return np.fft.fftshift(freqs), np.fft.fftshift(psd)


def psd_to_csv(freqs, psd, fh, floor_db=-300.0):
    fh.write("freq_hz,psd_db\n")
    with np.errstate(divide="ignore"):
        db = np.maximum(10 * np.log10(psd), floor_db)
    for f, p in zip(freqs, db):
        fh.write(f"{f:.17g},{p:.17g}\n")
