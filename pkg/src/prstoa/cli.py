"""Command-line entry point.

Exit codes: 0 success, 1 usage/config/I-O error, 2 runtime or estimation error.
"""

import argparse
import logging
import math
import sys

from . import selftest
from .channel import apply_channel
from .config import ConfigError, load
from .errors import InvalidArgumentError, StageError
from .estimator import ToaEstimate, estimate_toa
from .experiments import Transmitter, compute_psd, psd_to_csv, run_sweep
from .grid import prs_energy
from .ofdm import read_iq, write_iq

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2
LOW_COHERENCE = 0.5

log = logging.getLogger("prstoa")


def _config(args):
    overrides = list(args.set or [])
    if getattr(args, "seed", None) is not None:
        overrides.append(f"rng_seed={args.seed}")
    return load(args.config, overrides)


def cmd_generate(args):
    conf = _config(args)
    cfg = conf.prs_config()
    layout = conf.layout(cfg)
    tx = Transmitter.from_config(cfg)
    frame = tx.frame(layout, conf.get("preamble_length", 1023))
    prs_start = layout.prs_start(cfg)
    if conf.has_channel() or "rng_seed" in conf:
        frame = apply_channel(frame, conf.channel(), cfg, prs_start)
    write_iq(args.output, frame)
    print(f"samples={len(frame)}")
    print(f"prs_start={prs_start}")
    print(f"prs_energy={prs_energy(cfg):.17g}")
    return EXIT_OK


def cmd_estimate(args):
    conf = _config(args)
    cfg = conf.prs_config()
    layout = conf.layout(cfg)
    y = read_iq(args.input)
    tx = Transmitter.from_config(cfg)
    est = estimate_toa(y, tx.grid, tx.reference, cfg, conf.options())
    snr = conf.get("snr_db", math.inf)
    print(ToaEstimate.CSV_HEADER)
    print(est.csv_row(0, snr, cfg))
    prs_start = layout.prs_start(cfg)
    print(f"prs_start={prs_start} toa_minus_prs_start={est.toa - prs_start:.6f} "
          f"coherence={est.coherence:.4f} min_h={est.min_h_magnitude:.4g}", file=sys.stderr)
    if est.coherence < LOW_COHERENCE:
        print(f"warning: channel estimate incoherent (coherence {est.coherence:.3f} < "
              f"{LOW_COHERENCE}); input may not contain this PRS", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args):
    conf = _config(args)
    spec = conf.sweep()

    def progress(done, total):
        print(f"cell {done}/{total}", file=sys.stderr)

    report = run_sweep(spec, progress=progress)
    comments = [f"trials_per_point={spec.trials_per_point}", f"rng_seed={spec.rng_seed}"]
    comments += conf.echo()
    with open(args.output, "w") as fh:
        report.to_csv(fh, comments)
    for value, snr, trial, count, reason in report.skipped:
        print(f"skipped {spec.parameter}={value} snr_db={snr} trial={trial} "
              f"({count} trial(s)): {reason}", file=sys.stderr)
    return EXIT_RUNTIME if report.skipped else EXIT_OK


def cmd_psd(args):
    conf = _config(args)
    cfg = conf.prs_config()
    sig = read_iq(args.input) if args.input else Transmitter.from_config(cfg).slot
    freqs, psd = compute_psd(sig, args.segment or cfg.n_fft, args.overlap)
    with open(args.output, "w") as fh:
        psd_to_csv(freqs, psd, fh)
    return EXIT_OK


def cmd_selftest(args):
    return EXIT_OK if selftest.run() else EXIT_RUNTIME


def build_parser():
    p = argparse.ArgumentParser(prog="prstoa", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=False):
        sp.add_argument("-c", "--config", required=config_required,
                        help="key=value configuration file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a configuration value (repeatable)")
        sp.add_argument("--seed", type=int, help="shorthand for --set rng_seed=N")

    g = sub.add_parser("generate", help="write a PRS frame (optionally through the channel)")
    common(g)
    g.add_argument("-o", "--output", required=True, help="output IQ file")
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("estimate", help="estimate TOA from an IQ file")
    common(e)
    e.add_argument("-i", "--input", required=True, help="input IQ file")
    e.set_defaults(func=cmd_estimate)

    s = sub.add_parser("sweep", help="Monte-Carlo MSE sweep to CSV")
    common(s, config_required=True)
    s.add_argument("-o", "--output", required=True, help="output CSV")
    s.set_defaults(func=cmd_sweep)

    d = sub.add_parser("psd", help="Welch PSD of an IQ file or the configured PRS slot")
    common(d)
    d.add_argument("-i", "--input", help="input IQ file (default: generated PRS slot)")
    d.add_argument("-o", "--output", required=True, help="output CSV")
    d.add_argument("--segment", type=int, help="segment length (default n_fft)")
    d.add_argument("--overlap", type=float, default=0.5)
    d.set_defaults(func=cmd_psd)

    t = sub.add_parser("selftest", help="run the built-in oracles")
    t.set_defaults(func=cmd_selftest)
    return p


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error: estimation failed in stage {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ConfigError, InvalidArgumentError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
