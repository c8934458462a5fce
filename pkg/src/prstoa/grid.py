"""PRS configuration, comb resource mapping and energy bookkeeping."""

from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import InvalidArgumentError
from .sequences import prs_sequence

VALID_COMB = (2, 4, 6, 12)
VALID_L_PRS = (2, 4, 6, 12)

# k' per comb size, indexed by symbol offset l - l_start (0..11)
K_PRIME_TABLE = {
    2: (0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1),
    4: (0, 2, 1, 3, 0, 2, 1, 3, 0, 2, 1, 3),
    6: (0, 3, 1, 4, 2, 5, 0, 3, 1, 4, 2, 5),
    12: (0, 6, 3, 9, 1, 7, 4, 10, 2, 8, 5, 11),
}


@dataclass(frozen=True)
class PrsConfig:
    """PRS allocation and OFDM numerology.

    Defaults: 1024-point FFT at 30 kHz spacing
    (30.72 MHz sampling), 20 RBs, comb 4 with offset 1, four PRS symbols
    starting at symbol 4.
    """

    n_fft: int = 1024
    n_sc: int = 12
    n_rb: int = 20
    f_scs: float = 30e3
    k_comb: int = 4
    k_offset: int = 1
    l_prs: int = 4
    l_start: int = 4
    beta_prs: float = 1.0
    n_cp: int = 72
    symbols_per_slot: int = 14
    seed: int = 0

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise InvalidArgumentError("invalid PrsConfig: " + "; ".join(problems))

    def violations(self):
        out = []
        if self.n_fft < 1:
            out.append(f"n_fft={self.n_fft} must be positive")
        if self.n_sc < 1:
            out.append(f"n_sc={self.n_sc} must be positive")
        if self.n_rb < 1:
            out.append(f"n_rb={self.n_rb} must be positive")
        if not self.f_scs > 0:
            out.append(f"f_scs={self.f_scs} must be positive")
        if self.k_comb not in VALID_COMB:
            out.append(f"k_comb={self.k_comb} not in {VALID_COMB}")
        elif not 0 <= self.k_offset < self.k_comb:
            out.append(f"k_offset={self.k_offset} not in [0, {self.k_comb})")
        if self.l_prs not in VALID_L_PRS:
            out.append(f"l_prs={self.l_prs} not in {VALID_L_PRS}")
        if self.l_start < 0 or self.l_start + self.l_prs > self.symbols_per_slot:
            out.append(
                f"l_start={self.l_start} + l_prs={self.l_prs} exceeds "
                f"{self.symbols_per_slot} symbols per slot"
            )
        if self.n_sc * self.n_rb > self.n_fft:
            out.append(f"n_sc*n_rb={self.n_sc * self.n_rb} exceeds n_fft={self.n_fft}")
        if self.k_comb in VALID_COMB and (self.n_sc * self.n_rb) % self.k_comb:
            out.append(f"n_sc*n_rb={self.n_sc * self.n_rb} not divisible by k_comb={self.k_comb}")
        if not self.beta_prs >= 0:
            out.append(f"beta_prs={self.beta_prs} must be nonnegative")
        if self.n_cp < 0 or self.n_cp > self.n_fft:
            out.append(f"n_cp={self.n_cp} must lie in [0, n_fft]")
        if not 0 <= self.seed < (1 << 31):
            out.append(f"seed={self.seed} does not fit in 31 bits")
        return out

    @property
    def n_alloc(self):
        """Number of subcarriers spanned by the PRS allocation."""
        return self.n_sc * self.n_rb

    @property
    def n_prs(self):
        return self.n_alloc // self.k_comb

    @property
    def sample_rate(self):
        return self.n_fft * self.f_scs

    @property
    def symbol_len(self):
        """Samples per OFDM symbol including the cyclic prefix."""
        return self.n_fft + self.n_cp

    @property
    def prs_symbols(self):
        return range(self.l_start, self.l_start + self.l_prs)

    def with_(self, **changes):
        return replace(self, **changes)

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


def k_prime(k_comb, symbol_offset):
    """Frequency stagger k' for a comb size and symbol offset within the resource."""
    if k_comb not in K_PRIME_TABLE:
        raise InvalidArgumentError(f"k_comb={k_comb} not in {VALID_COMB}")
    if not 0 <= symbol_offset < 12:
        raise InvalidArgumentError(f"symbol offset {symbol_offset} not in [0, 12)")
    return K_PRIME_TABLE[k_comb][symbol_offset]


def comb_start(cfg, symbol_offset):
    """First occupied subcarrier of the comb in one PRS symbol."""
    return (cfg.k_offset + k_prime(cfg.k_comb, symbol_offset)) % cfg.k_comb


def subcarrier_index(m, cfg, symbol_offset):
    """Subcarrier k_m carrying PRS symbol ``m``."""
    if not 0 <= m < cfg.n_prs:
        raise InvalidArgumentError(f"m={m} not in [0, {cfg.n_prs})")
    return m * cfg.k_comb + comb_start(cfg, symbol_offset)


def prs_indices(cfg, symbol_offset):
    """All PRS subcarrier indices of one symbol, increasing."""
    return np.arange(cfg.n_prs) * cfg.k_comb + comb_start(cfg, symbol_offset)


@dataclass(frozen=True)
class ResourceGrid:
    """Frequency-domain symbols, shape ``(symbols_per_slot, n_fft)``.

    Column ``k`` is the k-th allocated subcarrier counted from the lowest one;
    placement around DC is done by the OFDM modulator.
    """

    cells: np.ndarray

    def __post_init__(self):
        self.cells.setflags(write=False)

    @property
    def shape(self):
        return self.cells.shape

    def symbol_energy(self, l):
        return float(np.sum(np.abs(self.cells[l]) ** 2))


def map_prs(r, cfg):
    """Place ``beta_prs * r(m)`` at ``k_m`` for each PRS symbol of the slot."""
    r = np.asarray(r, dtype=np.complex128)
    if r.ndim != 1 or r.size != cfg.n_prs:
        raise InvalidArgumentError(f"PRS sequence length {r.size} != N_PRS={cfg.n_prs}")
    cells = np.zeros((cfg.symbols_per_slot, cfg.n_fft), dtype=np.complex128)
    for l in cfg.prs_symbols:
        cells[l, prs_indices(cfg, l - cfg.l_start)] = cfg.beta_prs * r
    return ResourceGrid(cells)


def build_grid(cfg):
    """Grid for ``cfg`` using the Gold sequence seeded by ``cfg.seed``."""
    return map_prs(prs_sequence(cfg.seed, cfg.n_prs), cfg)


def prs_energy(cfg):
    return cfg.n_prs * cfg.beta_prs**2


def beta_for_energy(target_energy, cfg):
    """Amplitude factor giving per-symbol PRS energy ``target_energy``."""
    if target_energy < 0:
        raise InvalidArgumentError(f"target energy {target_energy} is negative")
    if cfg.n_prs <= 0:
        raise InvalidArgumentError("configuration has no PRS subcarriers")
    return float(np.sqrt(target_energy * cfg.k_comb / (cfg.n_sc * cfg.n_rb)))


def dump_grid(grid, fh, only_nonzero=True):
    """Write grid cells as ``symbol,subcarrier,re,im`` text rows."""
    fh.write("symbol,subcarrier,re,im\n")
    cells = grid.cells
    for l in range(cells.shape[0]):
        for k in range(cells.shape[1]):
            v = cells[l, k]
            if only_nonzero and v == 0:
                continue
            fh.write(f"{l},{k},{v.real:.17g},{v.imag:.17g}\n")
