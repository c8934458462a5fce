"""Plain-text ``key = value`` configuration files.

Blank lines and ``#`` comments are ignored. Every field of PrsConfig,
ChannelSpec, SweepSpec, EstimatorOptions and FrameLayout is addressable by
name. Command-line overrides use the same syntax and win over the file.
"""

import math

from .channel import ChannelSpec
from .errors import InvalidArgumentError
from .estimator import EstimatorOptions
from .experiments import SweepSpec
from .grid import PrsConfig
from .ofdm import FrameLayout


class ConfigError(InvalidArgumentError):
    def __init__(self, message, source=None, line=None):
        where = f"{source}:{line}: " if source and line else (f"{source}: " if source else "")
        super().__init__(where + message)
        self.line = line


def _num(text):
    t = text.strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    if t in ("-inf", "-infinity"):
        return -math.inf
    return float(t)


def _int(text):
    return int(text.strip())


def _list(conv):
    def parse(text):
        return tuple(conv(v) for v in text.split(",") if v.strip())

    return parse


def _tau_frac(text):
    t = text.strip().lower()
    return None if t in ("uniform", "none", "") else float(t)


def _opt_int(text):
    t = text.strip().lower()
    return None if t in ("none", "auto", "") else int(t)


def _m_mode(text):
    t = text.strip().lower()
    return t if t in ("centroid", "full") else float(t)


def _value(text):
    t = text.strip()
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        return t


PRS_KEYS = {
    "n_fft": _int, "n_sc": _int, "n_rb": _int, "f_scs": _num, "k_comb": _int,
    "k_offset": _int, "l_prs": _int, "l_start": _int, "beta_prs": _num,
    "n_cp": _int, "symbols_per_slot": _int, "seed": _int,
}
CHANNEL_KEYS = {
    "alpha": lambda t: complex(t.strip().replace(" ", "")),
    "tau_samples": _num, "snr_db": _num, "rng_seed": _int,
}
SWEEP_KEYS = {
    "parameter": str.strip, "values": _list(_value), "snr_grid_db": _list(_num),
    "trials_per_point": _int, "tau_integer": _int, "tau_fractional": _tau_frac,
    "fixed_energy": lambda t: None if t.strip().lower() == "none" else _num(t),
    "noise_reference": str.strip, "workers": _int,
}
OPTION_KEYS = {
    "step": _int, "m_mode": _m_mode, "backoff": _opt_int, "max_lag": _opt_int,
    "method": str.strip,
}
FRAME_KEYS = {
    "slots_per_frame": _int, "preamble_slot": _int, "prs_slot": _int,
    "preamble_length": _int,
}
ALL_KEYS = {**PRS_KEYS, **CHANNEL_KEYS, **SWEEP_KEYS, **OPTION_KEYS, **FRAME_KEYS}


class Config:
    """Parsed values with the line each came from."""

    def __init__(self, source=None):
        self.source = source
        self.values = {}
        self.lines = {}
        self.overridden = []

    def set(self, key, text, line=None, source=None):
        key = key.strip()
        if key not in ALL_KEYS:
            raise ConfigError(f"unknown key {key!r}", source or self.source, line)
        try:
            self.values[key] = ALL_KEYS[key](text)
        except (ValueError, TypeError):
            raise ConfigError(f"bad value {text.strip()!r} for {key}", source or self.source, line) from None
        self.lines[key] = line

    def __contains__(self, key):
        return key in self.values

    def get(self, key, default=None):
        return self.values.get(key, default)

    def _pick(self, keys):
        return {k: v for k, v in self.values.items() if k in keys}

    def _wrap(self, build, keys):
        try:
            return build(**self._pick(keys))
        except InvalidArgumentError as exc:
            line = None
            msg = str(exc)
            for k in keys:
                if f"{k}=" in msg and k in self.lines:
                    line = self.lines[k]
                    break
            raise ConfigError(msg, self.source, line) from None

    def prs_config(self):
        return self._wrap(PrsConfig, PRS_KEYS)

    def channel(self):
        return self._wrap(ChannelSpec, CHANNEL_KEYS)

    def has_channel(self):
        return any(k in self.values for k in ("alpha", "tau_samples", "snr_db"))

    def options(self):
        return EstimatorOptions(**self._pick(OPTION_KEYS))

    def layout(self, cfg):
        kw = {k: v for k, v in self._pick(FRAME_KEYS).items() if k != "preamble_length"}
        return self._wrap(
            lambda **k: FrameLayout(symbols_per_slot=cfg.symbols_per_slot, **k),
            {k: FRAME_KEYS[k] for k in kw},
        )

    def sweep(self):
        kw = self._pick(SWEEP_KEYS)
        if "rng_seed" in self.values:
            kw["rng_seed"] = self.values["rng_seed"]
        base = self.prs_config()
        options = self.options()
        try:
            return SweepSpec(base_config=base, options=options, **kw)
        except InvalidArgumentError as exc:
            line = next((self.lines[k] for k in SWEEP_KEYS if k in str(exc) and k in self.lines), None)
            raise ConfigError(str(exc), self.source, line) from None

    def echo(self):
        """``key=value`` strings of every override, for report headers."""
        return [f"override {k}={v}" for k, v in self.overridden]


def parse_text(text, source=None):
    cfg = Config(source)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {raw.strip()!r}", source, lineno)
        key, value = line.split("=", 1)
        cfg.set(key, value, lineno)
    return cfg


def load(path=None, overrides=()):
    """Read ``path`` (optional) and apply ``key=value`` overrides."""
    if path is None:
        cfg = Config()
    else:
        with open(path) as fh:
            cfg = parse_text(fh.read(), str(path))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value", "<override>")
        key, value = item.split("=", 1)
        cfg.set(key, value, source="<override>")
        cfg.overridden.append((key.strip(), value.strip()))
    return cfg
