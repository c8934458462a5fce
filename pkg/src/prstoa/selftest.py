"""Independent oracles, runnable from the command line.

Each check recomputes a result by a route that shares no code with the
main pipeline (integer-register LFSR, direct phase-ramp channel, index
arithmetic) and compares.
"""

import math

import numpy as np


def gold_oracle(c_init, length, nc=1600):
    """Gold bits from two 31-bit integer registers, one bit per step."""
    x1 = 1
    x2 = c_init
    out = []
    for n in range(nc + length):
        if n >= nc:
            out.append((x1 ^ x2) & 1)
        f1 = (x1 ^ (x1 >> 3)) & 1
        f2 = (x2 ^ (x2 >> 1) ^ (x2 >> 2) ^ (x2 >> 3)) & 1
        x1 = (x1 >> 1) | (f1 << 30)
        x2 = (x2 >> 1) | (f2 << 30)
    return out


def mseq_oracle(order, taps):
    """One m-sequence period from an integer register; ``taps`` as in MSEQ_TAPS."""
    reg = 1
    out = []
    for _ in range((1 << order) - 1):
        out.append(reg & 1)
        fb = 0
        for t in taps:
            fb ^= (reg >> t) & 1
        reg = (reg >> 1) | (fb << (order - 1))
    return out


def _check_gold():
    from .sequences import generate_gold

    ok = True
    for seed, n in ((0, 64), (42, 62), (0x5A5A5A5, 200)):
        ok &= list(generate_gold(seed, n)) == gold_oracle(seed, n)
    return ok


def _check_mseq():
    from .sequences import MSEQ_TAPS, mseq_bits

    return all(list(mseq_bits(p)) == mseq_oracle(p, MSEQ_TAPS[p]) for p in (3, 7, 10))


def _check_frame_length():
    from .experiments import Transmitter
    from .grid import PrsConfig
    from .ofdm import FrameLayout

    cfg = PrsConfig()
    frame = Transmitter.from_config(cfg).frame()
    layout = FrameLayout()
    prs = layout.prs_start(cfg)
    first = int(np.flatnonzero(np.abs(frame.samples[layout.slot_len(cfg):]) > 0)[0])
    return len(frame) == 20 * 14 * (1024 + 72) and first + layout.slot_len(cfg) == prs


def _check_phase_ramp():
    from .estimator import estimate_toa
    from .experiments import Transmitter
    from .grid import PrsConfig
    from .channel import phase_ramp_channel

    cfg = PrsConfig()
    tx = Transmitter.from_config(cfg)
    lead = cfg.l_start * cfg.symbol_len
    worst = 0.0
    for tau in (0.25, 3.6, 7.3):
        y = phase_ramp_channel(tx.grid, cfg, tau)
        est = estimate_toa(y, tx.grid, tx.reference, cfg)
        worst = max(worst, abs(est.toa - lead - tau))
    return worst < 1e-6


def _check_fractional_delay():
    from .channel import ChannelSpec, apply_channel, phase_ramp_slot
    from .experiments import Transmitter
    from .grid import PrsConfig

    cfg = PrsConfig()
    tx = Transmitter.from_config(cfg)
    tau = 2.3
    y = apply_channel(tx.slot, ChannelSpec(tau_samples=tau)).samples
    ramp = phase_ramp_slot(tx.grid, cfg, tau).samples
    S = cfg.symbol_len
    worst = 0.0
    for l in cfg.prs_symbols:
        a = l * S + cfg.n_cp // 2
        worst = max(worst, float(np.max(np.abs(y[a : a + cfg.n_fft] - ramp[a : a + cfg.n_fft]))))
    return worst < 1e-4


CHECKS = (
    ("gold sequence vs integer-register LFSR", _check_gold),
    ("m-sequence vs integer-register LFSR", _check_mseq),
    ("frame length and PRS start index", _check_frame_length),
    ("noiseless TOA under phase-ramp channel", _check_phase_ramp),
    ("fractional-delay FIR vs phase-ramp channel", _check_fractional_delay),
)


def run(out=print):
    passed = True
    for name, fn in CHECKS:
        try:
            ok = bool(fn())
        except Exception as exc:  # report, keep going
            ok = False
            name = f"{name} ({exc})"
        passed &= ok
        out(f"{'PASS' if ok else 'FAIL'}  {name}")
    return passed


if __name__ == "__main__":
    raise SystemExit(0 if run() else 1)
