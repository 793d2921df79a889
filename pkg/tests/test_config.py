import pytest

from cfpp.config import load_config, parse_si
from cfpp.errors import ConfigError

from conftest import BENCHMARK_CFG


@pytest.mark.parametrize("text,value", [
    ("110.9u", 110.9e-6),
    ("40k", 40e3),
    ("4.5", 4.5),
    ("220u", 220e-6),
    ("1n", 1e-9),
    ("3p", 3e-12),
    ("2m", 2e-3),
    ("5M", 5e6),
    ("1G", 1e9),
    ("-0.5", -0.5),
])
def test_parse_si(text, value):
    assert parse_si(text) == pytest.approx(value, rel=1e-12)


def test_parse_si_rejects_garbage():
    with pytest.raises(ValueError):
        parse_si("fast")
    with pytest.raises(ValueError):
        parse_si("")


def test_shipped_benchmark_loads(tmp_path):
    loaded = load_config(BENCHMARK_CFG)
    p = loaded.params
    assert (p.vi, p.n, p.d, p.fs) == (48.0, 8.0, 0.67, 40e3)
    assert p.llk1 == pytest.approx(110.9e-6)
    assert p.r1 == p.r2 == 4.5
    assert loaded.warnings == ()


def _write(tmp_path, text):
    f = tmp_path / "case.cfg"
    f.write_text(text)
    return f


def test_unknown_key_fatal(tmp_path):
    f = _write(tmp_path, "vi = 48\nllk1 = 1u\nllk2 = 1u\nl = 1m\nn = 8\nd = 0.6\nfs = 40k\nbogus = 1\n")
    with pytest.raises(ConfigError, match=r"8: unknown key 'bogus'"):
        load_config(f)


def test_validation_error_carries_line_number(tmp_path):
    f = _write(tmp_path, "vi = 48\nl = 1m\nllk1 = 1u\nllk2 = 1u\nn = 8\nd = 0.4\nfs = 40k\n")
    with pytest.raises(ConfigError, match=r"D must exceed 0.5 \(line 6\)"):
        load_config(f)


def test_missing_file_is_config_error():
    with pytest.raises(ConfigError, match="no_such_file.cfg"):
        load_config("no_such_file.cfg")


def test_missing_keys_reported(tmp_path):
    f = _write(tmp_path, "vi = 48\n")
    with pytest.raises(ConfigError, match="missing required keys"):
        load_config(f)


def test_duplicate_key_rejected(tmp_path):
    f = _write(tmp_path, "vi = 48\nvi = 50\n")
    with pytest.raises(ConfigError, match="duplicate key"):
        load_config(f)


def test_tabulated_leakage_override_warns(tmp_path):
    f = _write(tmp_path, "vi = 48\nl = 1109u\nllk1 = 1109u\nllk2 = 1109u\nn = 8\nd = 0.67\nfs = 40k\n")
    loaded = load_config(f)
    assert len(loaded.warnings) == 1
    assert "1109 uH" in loaded.warnings[0]


def test_sim_keys_override(tmp_path):
    f = _write(
        tmp_path,
        "vi = 48\nl = 1109u\nllk1 = 110.9u\nllk2 = 110.9u\nn = 8\nd = 0.67\nfs = 40k\n"
        "samples = 256\nmax_periods = 10\nss_tol = 1e-5\n",
    )
    loaded = load_config(f)
    assert loaded.sim.samples_per_period == 256
    assert loaded.sim.max_periods == 10
    assert loaded.sim.ss_tol == 1e-5
