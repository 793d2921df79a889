import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfpp.errors import ParameterError
from cfpp.params import derive, validate

from conftest import benchmark_params


def test_benchmark_values_are_valid():
    p = benchmark_params()
    assert validate(p) is p


def test_duty_below_half_rejected():
    with pytest.raises(ParameterError, match="D must exceed 0.5"):
        validate(benchmark_params(d=0.4))


def test_duty_at_one_rejected():
    with pytest.raises(ParameterError, match="below 1"):
        validate(benchmark_params(d=1.0))


def test_leakage_asymmetry_rejected():
    with pytest.raises(ParameterError, match="leakage symmetry violated"):
        validate(benchmark_params(llk1=100e-6, llk2=120e-6))


def test_infinite_load_rejected():
    with pytest.raises(ParameterError, match="r1"):
        validate(benchmark_params(r1=math.inf))


@pytest.mark.parametrize("field", ["vi", "l", "llk1", "co1", "co2", "r2", "fs", "n"])
def test_nonpositive_rejected(field):
    with pytest.raises(ParameterError, match=field if field != "llk1" else "llk"):
        validate(benchmark_params(**{field: 0.0, **({"llk2": 0.0} if field == "llk1" else {})}))


def test_negative_snubber_rejected():
    with pytest.raises(ParameterError, match="csn3"):
        validate(benchmark_params(csn=(0, 0, -1e-9, 0, 0, 0)))


def test_derive_period_and_total_leakage():
    d = derive(benchmark_params())
    assert d.t == pytest.approx(25e-6, rel=1e-12)
    assert d.l_lkt == pytest.approx(221.8e-6, rel=1e-12)
    assert d.duty_secondary == pytest.approx(0.33, rel=1e-12)
    assert d.duty_secondary < 0.5


@given(
    d=st.floats(0.501, 0.999),
    fs=st.floats(1e3, 1e6),
    llk=st.floats(1e-6, 1e-2),
)
@settings(deadline=None, derandomize=True)
def test_validate_idempotent_and_derive_pure(d, fs, llk):
    p = benchmark_params(d=d, fs=fs, llk1=llk, llk2=llk)
    assert validate(validate(p)) is p
    assert derive(p) == derive(p)
    assert derive(p).t == pytest.approx(1.0 / fs, rel=1e-12)
