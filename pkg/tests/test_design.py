"""Design-equation calculators against independently computed values."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfpp import design
from cfpp.errors import ParameterError

from conftest import benchmark_params


class TestVoltageGain:
    def test_benchmark_point(self):
        # 1 / (2 (8 (1 - 0.67) + 1)) computed by hand: 1 / 7.28
        assert design.voltage_gain(8, 0.67) == pytest.approx(1.0 / 7.28, rel=1e-12)
        assert 48.0 * design.voltage_gain(8, 0.67) == pytest.approx(6.5934, abs=5e-4)

    def test_full_duty_limit(self):
        assert design.voltage_gain(8, 1.0) == pytest.approx(0.5, rel=1e-12)

    def test_no_transformer_limit(self):
        for d in (0.55, 0.7, 0.95):
            assert design.voltage_gain(0.0, d) == pytest.approx(0.5, rel=1e-12)

    @given(n=st.floats(0.5, 20), d=st.floats(0.51, 0.99))
    @settings(deadline=None, derandomize=True)
    def test_monotonic_in_duty_and_ratio(self, n, d):
        eps = 1e-6
        assert design.voltage_gain(n, d + eps) > design.voltage_gain(n, d)
        assert design.voltage_gain(n + eps, d) < design.voltage_gain(n, d)


class TestDutyForGain:
    def test_benchmark_inverse(self):
        d = design.duty_for_gain(8, 48.0, 6.5934)
        assert d == pytest.approx(0.67, abs=1e-4)

    def test_half_input_boundary_rejected(self):
        with pytest.raises(ParameterError, match="gain unattainable"):
            design.duty_for_gain(8, 48.0, 24.0)      # would need d = 1 exactly

    def test_step_up_rejected(self):
        with pytest.raises(ParameterError, match="gain unattainable"):
            design.duty_for_gain(8, 48.0, 30.0)

    @given(n=st.floats(1, 15), d=st.floats(0.51, 0.95), vi=st.floats(10, 400))
    @settings(deadline=None, derandomize=True, max_examples=150)
    def test_round_trip(self, n, d, vi):
        vo2 = vi * design.voltage_gain(n, d)
        assert design.duty_for_gain(n, vi, vo2) == pytest.approx(d, rel=1e-12)


class TestLeakageForZcs:
    def test_reference_point(self):
        # 8 * 6.89 * 0.17 / (2 * 1.06 * 40e3) by hand = 110.5 uH
        llk = design.leakage_for_zcs(8, 6.89, 0.67, 1.06, 40e3)
        assert llk == pytest.approx(110.5e-6, rel=5e-3)

    def test_no_overlap_no_leakage(self):
        assert design.leakage_for_zcs(8, 6.89, 0.5, 1.0, 40e3) == 0.0

    def test_inverse_in_frequency(self):
        a = design.leakage_for_zcs(8, 6.89, 0.67, 1.06, 40e3)
        b = design.leakage_for_zcs(8, 6.89, 0.67, 1.06, 80e3)
        assert a == pytest.approx(2 * b, rel=1e-12)


class TestInputInductance:
    def test_reproduces_benchmark_inductor(self):
        # ripple that corresponds to the tabulated 1109 uH, then forward
        ripple = design.ripple_for_inductance(8, 0.67, 1109e-6, 40e3, 48.0)
        assert ripple == pytest.approx(0.152, abs=5e-4)
        assert design.input_inductance(8, 0.67, ripple, 40e3, 48.0) == pytest.approx(
            1109e-6, rel=1e-12)

    def test_no_overlap_no_inductor(self):
        assert design.input_inductance(8, 0.5, 0.1, 40e3, 48.0) == 0.0

    def test_halving_ripple_doubles_inductance(self):
        a = design.input_inductance(8, 0.67, 0.1, 40e3, 48.0)
        b = design.input_inductance(8, 0.67, 0.05, 40e3, 48.0)
        assert b == pytest.approx(2 * a, rel=1e-12)


class TestExtendedDuty:
    def test_zcs_design_point_cancels(self):
        n, vo2, d, i_l, fs = 8, 6.89, 0.67, 1.06, 40e3
        llk = design.leakage_for_zcs(n, vo2, d, i_l, fs)
        assert design.extended_duty(d, i_l, llk, n, vo2, fs) == pytest.approx(0.0, abs=1e-15)

    def test_half_leakage_gives_half_window(self):
        n, vo2, d, i_l, fs = 8, 6.89, 0.67, 1.06, 40e3
        llk = design.leakage_for_zcs(n, vo2, d, i_l, fs)
        d_ext = design.extended_duty(d, i_l, 0.5 * llk, n, vo2, fs)
        assert d_ext == pytest.approx((d - 0.5) / 2, rel=1e-9)

    def test_no_load_maximum(self):
        d = 0.67
        assert design.extended_duty(d, 0.0, 110e-6, 8, 6.89, 40e3) == pytest.approx(d - 0.5)

    def test_excess_leakage_clamps_to_zero(self):
        assert design.extended_duty(0.67, 1.06, 400e-6, 8, 6.89, 40e3) == 0.0

    @given(
        n=st.floats(1, 15), d=st.floats(0.51, 0.95), vi=st.floats(10, 400),
        i_l=st.floats(0.05, 50), fs=st.floats(1e4, 5e5),
    )
    @settings(deadline=None, derandomize=True, max_examples=150)
    def test_zcs_cancellation_property(self, n, d, vi, i_l, fs):
        vo2 = vi * design.voltage_gain(n, d)
        llk = design.leakage_for_zcs(n, vo2, d, i_l, fs)
        assert design.extended_duty(d, i_l, llk, n, vo2, fs) <= 1e-12

    @given(
        n=st.floats(1, 15), d=st.floats(0.51, 0.95), vi=st.floats(10, 400),
        i_l=st.floats(0.05, 50), fs=st.floats(1e4, 5e5),
        frac=st.floats(0.0, 1.0),
    )
    @settings(deadline=None, derandomize=True)
    def test_total_leakage_inverse_pair(self, n, d, vi, i_l, fs, frac):
        # extended_duty and leakage_total_for_duty are algebraic inverses
        vo2 = vi * design.voltage_gain(n, d)
        d_ext = frac * (d - 0.5)
        l_lkt = design.leakage_total_for_duty(d, d_ext, i_l, n, vo2, fs)
        back = design.extended_duty(d, i_l, 0.5 * l_lkt, n, vo2, fs)
        assert back == pytest.approx(d_ext, abs=1e-12 * max(d_ext, 1.0))


class TestOperatingPoint:
    def test_benchmark_point(self):
        op = design.operating_point(benchmark_params())
        assert op.vo2 == pytest.approx(6.601, abs=2e-3)
        assert op.vo1 == pytest.approx(2 * op.vo2, rel=1e-12)
        assert op.i_l == pytest.approx(1.009, abs=2e-3)
        assert 0.0 <= op.d_ext < 0.17

    def test_power_balance_exact(self):
        p = benchmark_params()
        op = design.operating_point(p)
        p_in = p.vi * op.i_l
        p_out = op.vo1 ** 2 / p.r1 + op.vo2 ** 2 / p.r2
        assert abs(p_in - p_out) <= 1e-9 * p_in

    def test_fixed_point_self_consistent(self):
        p = benchmark_params()
        op = design.operating_point(p)
        gain = 1 / (2 * (p.n * (1 - p.d - op.d_ext) + 1))
        assert op.vo2 == pytest.approx(p.vi * gain, rel=1e-9)
        assert op.d_ext == pytest.approx(
            design.extended_duty(p.d, op.i_l, p.llk1, p.n, op.vo2, p.fs), abs=1e-9)

    def test_tabulated_leakage_cannot_commutate(self):
        p = benchmark_params(llk1=1109e-6, llk2=1109e-6)
        with pytest.raises(ParameterError, match="commutation exceeds half-period"):
            design.operating_point(p)
