"""Pseudo-random sequences: Gold sequence, QPSK PRS symbols, m-sequence preamble."""

import numpy as np

from .errors import InvalidArgumentError

GOLD_NC = 1600  # state advances discarded before the first output bit
GOLD_DEGREE = 31
# x1(n+31) = x1(n+3) + x1(n)
# x2(n+31) = x2(n+3) + x2(n+2) + x2(n+1) + x2(n)
GOLD_X1_TAPS = (0, 3)
GOLD_X2_TAPS = (0, 1, 2, 3)

# Primitive feedback polynomials, as exponents other than the leading one.
# Register order p -> taps t such that s(n+p) = sum_{t} s(n+t) mod 2.
MSEQ_TAPS = {
    2: (0, 1),
    3: (0, 1),
    4: (0, 1),
    5: (0, 2),
    6: (0, 1),
    7: (0, 1),
    8: (0, 2, 3, 4),
    9: (0, 4),
    10: (0, 3),
    11: (0, 2),
    12: (0, 1, 4, 6),
    13: (0, 1, 3, 4),
    14: (0, 1, 11, 12),
    15: (0, 1),
    16: (0, 2, 3, 5),
}


def _lfsr_run(state, taps, count):
    """Advance a Fibonacci register ``count`` times and return all bits.

    ``state`` holds s(0)..s(p-1); the returned array has ``p + count`` entries.
    """
    p = len(state)
    s = np.zeros(p + count, dtype=np.uint8)
    s[:p] = state
    for n in range(count):
        acc = 0
        for t in taps:
            acc ^= s[n + t]
        s[n + p] = acc
    return s


def generate_gold(seed, length):
    """Length-31 Gold sequence c(n) as used for NR reference signals.

    The first register starts from ``[1, 0, ..., 0]``, the second from the
    31-bit binary expansion of ``seed`` (LSB first). Both are run forward
    ``GOLD_NC`` steps before the first output bit.

    Returns
    -------
    np.ndarray
        uint8 array of 0/1 values, shape ``(length,)``.
    """
    length = int(length)
    seed = int(seed)
    if length < 1:
        raise InvalidArgumentError("gold sequence length must be >= 1")
    if seed < 0 or seed >= (1 << GOLD_DEGREE):
        raise InvalidArgumentError(f"seed {seed} does not fit in 31 bits")

    steps = GOLD_NC + length
    x1_init = np.zeros(GOLD_DEGREE, dtype=np.uint8)
    x1_init[0] = 1
    x2_init = np.array([(seed >> i) & 1 for i in range(GOLD_DEGREE)], dtype=np.uint8)
    x1 = _lfsr_run(x1_init, GOLD_X1_TAPS, steps)
    x2 = _lfsr_run(x2_init, GOLD_X2_TAPS, steps)
    return x1[GOLD_NC : GOLD_NC + length] ^ x2[GOLD_NC : GOLD_NC + length]


def map_qpsk(c):
    """Map bit pairs to unit-magnitude QPSK symbols.

    ``r(m) = ((1 - 2 c(2m)) + j (1 - 2 c(2m+1))) / sqrt(2)``
    """
    c = np.asarray(c)
    if c.ndim != 1 or c.size < 2 or c.size % 2:
        raise InvalidArgumentError("QPSK mapping needs an even number (>= 2) of bits")
    if np.any((c != 0) & (c != 1)):
        raise InvalidArgumentError("bits must be 0 or 1")
    b = c.astype(np.float64)
    return ((1.0 - 2.0 * b[0::2]) + 1j * (1.0 - 2.0 * b[1::2])) / np.sqrt(2.0)


def prs_sequence(seed, n_prs):
    """QPSK PRS sequence of ``n_prs`` symbols from Gold seed ``seed``."""
    return map_qpsk(generate_gold(seed, 2 * int(n_prs)))


def mseq_bits(order):
    """One period of the maximal-length sequence for register ``order``."""
    if order not in MSEQ_TAPS:
        raise InvalidArgumentError(
            f"no m-sequence polynomial for order {order}; supported {sorted(MSEQ_TAPS)}"
        )
    period = (1 << order) - 1
    init = np.zeros(order, dtype=np.uint8)
    init[0] = 1
    return _lfsr_run(init, MSEQ_TAPS[order], period - order)[:period]


def generate_preamble(length):
    """BPSK (+1/-1) m-sequence preamble of ``length = 2**p - 1`` chips."""
    length = int(length)
    order = (length + 1).bit_length() - 1
    if length < 3 or (1 << order) - 1 != length:
        raise InvalidArgumentError(f"preamble length {length} is not 2**p - 1")
    return 1.0 - 2.0 * mseq_bits(order).astype(np.float64)
