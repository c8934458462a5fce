import numpy as np
import pytest

from prstoa.errors import InvalidArgumentError, WindowRangeError
from prstoa.experiments import Transmitter
from prstoa.grid import PrsConfig, ResourceGrid, build_grid
from prstoa.ofdm import (
    FrameLayout,
    IqSignal,
    assemble_frame,
    extract_symbol,
    fft_bins,
    modulate,
    read_iq,
    signed_frequency,
    write_iq,
)


def test_zero_grid_zero_signal(cfg):
    sig = modulate(np.zeros((14, cfg.n_fft)), cfg)
    assert len(sig) == 14 * cfg.symbol_len
    assert not np.any(sig.samples)


def test_single_dc_cell(cfg):
    cells = np.zeros((1, cfg.n_fft), complex)
    dc = int(np.flatnonzero(signed_frequency(cfg) == 0)[0])
    cells[0, dc] = 1.0
    body = modulate(cells, cfg).samples[cfg.n_cp :]
    np.testing.assert_allclose(body, 1 / np.sqrt(cfg.n_fft), rtol=1e-12)


def test_single_cell_at_column_zero_constant_magnitude(cfg):
    cells = np.zeros((1, cfg.n_fft), complex)
    cells[0, 0] = 1.0
    body = modulate(cells, cfg).samples[cfg.n_cp :]
    np.testing.assert_allclose(np.abs(body), 1 / np.sqrt(cfg.n_fft), rtol=1e-12)


def test_cyclic_prefix_copies_tail(tx, cfg):
    s = tx.slot.samples
    for l in cfg.prs_symbols:
        sym = s[l * cfg.symbol_len : (l + 1) * cfg.symbol_len]
        np.testing.assert_array_equal(sym[: cfg.n_cp], sym[-cfg.n_cp :])


def test_parseval_per_symbol(tx, cfg):
    s = tx.slot.samples
    for l in range(cfg.symbols_per_slot):
        body = s[l * cfg.symbol_len + cfg.n_cp : (l + 1) * cfg.symbol_len]
        time_e = sum(abs(v) ** 2 for v in body)
        freq_e = sum(abs(v) ** 2 for v in tx.grid.cells[l])
        assert time_e == pytest.approx(freq_e, rel=1e-9, abs=1e-12)


def test_bin_mapping_centres_allocation(cfg):
    f = signed_frequency(cfg)
    assert f[0] == -cfg.n_alloc // 2
    assert f[cfg.n_alloc - 1] == cfg.n_alloc // 2 - 1
    assert sorted(fft_bins(cfg)) == list(range(cfg.n_fft))


def test_modulate_dimension_mismatch(cfg):
    with pytest.raises(InvalidArgumentError):
        modulate(np.zeros((14, 512)), cfg)


def test_round_trip_recovers_grid(tx, cfg):
    for i, l in enumerate(cfg.prs_symbols):
        Y = extract_symbol(tx.reference, i, 0, cfg)
        np.testing.assert_allclose(Y, tx.grid.cells[l], atol=1e-9 * np.abs(tx.grid.cells[l]).max())


def test_round_trip_through_frame(tx, cfg):
    layout = FrameLayout()
    frame = tx.frame(layout)
    start = layout.prs_start(cfg)
    for i, l in enumerate(cfg.prs_symbols):
        for backoff in (0, 10, cfg.n_cp):
            Y = extract_symbol(frame, i, start, cfg, backoff)
            err = np.max(np.abs(Y - tx.grid.cells[l])) / np.max(np.abs(tx.grid.cells[l]))
            assert err <= 1e-9


def test_integer_timing_error_gives_phase_ramp(tx, cfg):
    # signal one sample later than the assumed timing: Y = X exp(-j 2 pi k / N)
    y = np.concatenate([[0], tx.reference.samples])
    k = signed_frequency(cfg)
    for i, l in enumerate(cfg.prs_symbols):
        Y = extract_symbol(y, i, 0, cfg)
        expect = tx.grid.cells[l] * np.exp(-2j * np.pi * k / cfg.n_fft)
        np.testing.assert_allclose(Y, expect, atol=1e-12)
        # timing one sample late: opposite rotation, needs backoff to stay in the symbol
        Y = extract_symbol(tx.reference, i, 1, cfg, backoff=2)
        expect = tx.grid.cells[l] * np.exp(2j * np.pi * k / cfg.n_fft)
        np.testing.assert_allclose(Y, expect, atol=1e-12)


@pytest.mark.parametrize("d", [3, 17, 72])
def test_delay_within_cp_no_leakage(tx, cfg, d):
    y = np.concatenate([np.zeros(d), tx.reference.samples])
    k = signed_frequency(cfg)
    Y = extract_symbol(y, 1, 0, cfg)
    expect = tx.grid.cells[cfg.l_start + 1] * np.exp(-2j * np.pi * k * d / cfg.n_fft)
    np.testing.assert_allclose(Y, expect, atol=1e-12)


def test_extract_out_of_bounds(tx, cfg):
    with pytest.raises(WindowRangeError):
        extract_symbol(tx.reference, cfg.l_prs, 0, cfg)
    with pytest.raises(WindowRangeError):
        extract_symbol(tx.reference, 0, -cfg.n_cp - 1, cfg)


def test_empty_frame_length():
    c = PrsConfig()
    frame = assemble_frame(np.zeros(0), np.zeros(0), FrameLayout(), c)
    assert len(frame) == 20 * 14 * (1024 + 72)
    assert not np.any(frame.samples)


def test_frame_prs_offset_scan_oracle():
    c = PrsConfig(l_start=4)
    layout = FrameLayout()
    tx = Transmitter.from_config(c)
    frame = assemble_frame(tx.slot, np.zeros(0), layout, c)
    first = int(np.flatnonzero(np.abs(frame.samples) > 0)[0])
    assert first == layout.prs_start(c) == 1 * 14 * 1096 + 4 * 1096


def test_back_to_back_frames_translate():
    c = PrsConfig()
    layout = FrameLayout()
    tx = Transmitter.from_config(c)
    one = assemble_frame(tx.slot, np.zeros(0), layout, c).samples
    two = np.concatenate([one, one])
    nz = np.flatnonzero(np.abs(two) > 0)
    second = int(nz[nz >= one.size][0])
    assert second == layout.prs_start(c) + layout.frame_len(c)


def test_slot_overflow_rejected(cfg):
    with pytest.raises(InvalidArgumentError):
        assemble_frame(np.ones(14 * cfg.symbol_len + 1), np.zeros(0), FrameLayout(), cfg)


def test_iq_signal_validation():
    with pytest.raises(InvalidArgumentError):
        IqSignal(np.array([1.0, np.nan]), 1.0)
    with pytest.raises(InvalidArgumentError):
        IqSignal(np.ones(3), 0.0)


def test_iq_file_round_trip(tmp_path, tx):
    frame = tx.frame()
    p1, p2 = tmp_path / "a.iq", tmp_path / "b.iq"
    write_iq(p1, frame)
    back = read_iq(p1)
    assert back.sample_rate == frame.sample_rate
    assert len(back) == len(frame)
    np.testing.assert_array_equal(back.samples, frame.samples.astype(np.complex64))
    write_iq(p2, back)
    assert p1.read_bytes() == p2.read_bytes()
    assert (tmp_path / "a.iq.hdr").read_text() == "sample_rate_hz=30720000.0\n"


def test_iq_file_layout(tmp_path):
    sig = IqSignal(np.array([1 + 2j, -3.5 + 0.25j]), 1e6)
    write_iq(tmp_path / "x.iq", sig)
    raw = np.fromfile(tmp_path / "x.iq", dtype="<f4")
    np.testing.assert_array_equal(raw, [1, 2, -3.5, 0.25])
