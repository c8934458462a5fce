import math

import numpy as np
import pytest

from prstoa.cli import main
from prstoa.config import ConfigError, load, parse_text
from prstoa.grid import PrsConfig
from prstoa.ofdm import read_iq


def write(path, text):
    path.write_text(text)
    return str(path)


def test_parse_defaults_and_comments():
    conf = parse_text("# comment\n\nn_rb = 12   # trailing\nsnr_db = inf\nalpha = 0.5+0.5j\n")
    assert conf.prs_config() == PrsConfig(n_rb=12)
    ch = conf.channel()
    assert math.isinf(ch.snr_db) and ch.alpha == 0.5 + 0.5j
    assert conf.has_channel()


def test_parse_errors_carry_line(tmp_path):
    path = write(tmp_path / "bad.cfg", "n_rb = 20\nk_comb = 5\n")
    with pytest.raises(ConfigError, match=r"bad\.cfg:2: .*k_comb"):
        load(path).prs_config()
    with pytest.raises(ConfigError, match=r"x\.cfg:3: unknown key"):
        parse_text("n_rb=1\n\nwidth = 3\n", "x.cfg")
    with pytest.raises(ConfigError, match=r":1: bad value"):
        parse_text("n_rb = twenty\n", "y.cfg")
    with pytest.raises(ConfigError, match="key = value"):
        parse_text("n_rb 20\n", "z.cfg")


def test_overrides_win(tmp_path):
    path = write(tmp_path / "a.cfg", "n_rb = 20\nvalues = 8, 12\n")
    conf = load(path, ["n_rb=24", "trials_per_point=7"])
    assert conf.prs_config().n_rb == 24
    sw = conf.sweep()
    assert sw.values == (8, 12) and sw.trials_per_point == 7
    assert "override n_rb=24" in conf.echo()
    with pytest.raises(ConfigError):
        load(None, ["n_rb"])


def test_sweep_config_rejects_zero_trials():
    with pytest.raises(ConfigError, match="trials_per_point"):
        parse_text("trials_per_point = 0\n", "s.cfg").sweep()


def test_generate_frame(tmp_path, capsys):
    out = tmp_path / "f.iq"
    assert main(["generate", "-o", str(out)]) == 0
    y = read_iq(str(out))
    assert len(y) == 306_880
    assert y.sample_rate == 30.72e6
    text = capsys.readouterr().out
    assert "prs_start=19728" in text


def test_generate_reproducible(tmp_path):
    cfg = write(tmp_path / "c.cfg", "tau_samples = 7.3\nsnr_db = 10\n")
    a, b, c = (tmp_path / n for n in ("a.iq", "b.iq", "c.iq"))
    assert main(["generate", "-c", cfg, "--seed", "5", "-o", str(a)]) == 0
    assert main(["generate", "-c", cfg, "--seed", "5", "-o", str(b)]) == 0
    assert main(["generate", "-c", cfg, "--seed", "6", "-o", str(c)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


def test_generate_zero_rb(tmp_path, capsys):
    assert main(["generate", "--set", "n_rb=0", "-o", str(tmp_path / "z.iq")]) == 1
    assert "n_rb" in capsys.readouterr().err
    assert not (tmp_path / "z.iq").exists()


def test_estimate_round_trip(tmp_path, capsys):
    cfg = write(tmp_path / "c.cfg", "tau_samples = 7.3\nsnr_db = 30\nrng_seed = 1\n")
    iq = tmp_path / "rx.iq"
    assert main(["generate", "-c", cfg, "-o", str(iq)]) == 0
    capsys.readouterr()
    assert main(["estimate", "-c", cfg, "-i", str(iq)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "trial_id,snr_db,n_rb,k_comb,beta,itoa,rtoa,toa,slope"
    fields = dict(zip(out[0].split(","), out[1].split(",")))
    assert float(fields["toa"]) - 19728 == pytest.approx(7.3, abs=1e-2)
    assert float(fields["toa"]) == pytest.approx(float(fields["itoa"]) + float(fields["rtoa"]))


def test_estimate_pure_noise_warns(tmp_path, capsys):
    from prstoa.ofdm import IqSignal, write_iq

    rng = np.random.default_rng(0)
    noise = rng.standard_normal(40_000) + 1j * rng.standard_normal(40_000)
    path = tmp_path / "n.iq"
    write_iq(str(path), IqSignal(noise, 30.72e6))
    assert main(["estimate", "-i", str(path)]) == 0
    assert "warning" in capsys.readouterr().err


def test_estimate_missing_file(tmp_path, capsys):
    assert main(["estimate", "-i", str(tmp_path / "nope.iq")]) == 1


def test_estimate_too_short(tmp_path, capsys):
    from prstoa.ofdm import IqSignal, write_iq

    path = tmp_path / "s.iq"
    write_iq(str(path), IqSignal(np.ones(500, complex), 30.72e6))
    assert main(["estimate", "-i", str(path)]) == 2
    assert "stage" in capsys.readouterr().err


def _sweep_cfg(tmp_path, extra=""):
    return write(tmp_path / "s.cfg",
                 "parameter = n_rb\nvalues = 10, 20\nsnr_grid_db = 0, 20\n"
                 "trials_per_point = 10\nrng_seed = 3\n" + extra)


def test_sweep_csv(tmp_path):
    out = tmp_path / "m.csv"
    assert main(["sweep", "-c", _sweep_cfg(tmp_path), "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    comments = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if not l.startswith("#")]
    assert "# trials_per_point=10" in comments
    assert body[0] == "parameter,value,snr_db,trials,mse_samples,mse_meters"
    assert len(body) == 1 + 2 * 2
    assert all(len(r.split(",")) == 6 for r in body)


def test_sweep_identical_runs(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cfg = _sweep_cfg(tmp_path)
    assert main(["sweep", "-c", cfg, "-o", str(a)]) == 0
    assert main(["sweep", "-c", cfg, "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_rejects_zero_trials(tmp_path, capsys):
    out = tmp_path / "m.csv"
    assert main(["sweep", "-c", _sweep_cfg(tmp_path), "--set", "trials_per_point=0", "-o", str(out)]) == 1
    assert "trials_per_point" in capsys.readouterr().err
    assert not out.exists()


def test_sweep_skipped_exit(tmp_path, capsys):
    out = tmp_path / "m.csv"
    cfg = _sweep_cfg(tmp_path)
    assert main(["sweep", "-c", cfg, "--set", "parameter=k_comb", "--set", "values=4,5", "-o", str(out)]) == 2
    assert "skipped k_comb=5" in capsys.readouterr().err
    assert len([l for l in out.read_text().splitlines() if l.startswith("k_comb")]) == 2


def test_psd_command(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["psd", "-o", str(out), "--segment", "512"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "freq_hz,psd_db" and len(lines) == 513
    freqs = [float(l.split(",")[0]) for l in lines[1:]]
    assert freqs[0] == pytest.approx(-15.36e6) and freqs == sorted(freqs)


def test_selftest_command(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "PASS" in out


def test_usage_error(capsys):
    assert main(["frobnicate"]) == 1
    assert main(["estimate"]) == 1
