import numpy as np
import pytest

from srgstab.cpl import (
    CplDomainError,
    CplParams,
    RippleSpec,
    cpl_current,
    cpl_disk,
    cpl_harmonic_split,
    cpl_srg_sample,
    epsilon_rho,
)

EXAMPLE = CplParams(p_c=0.4, q_c=0.7, v_min=0.9)


class TestCplCurrent:
    def test_unit_active_power(self):
        p = CplParams(1.0, 0.0, 0.5)
        assert cpl_current(p, [1.0, 0.0]) == pytest.approx([1.0, 0.0])

    def test_current_halves_at_double_voltage(self):
        p = CplParams(1.0, 0.0, 0.5)
        assert cpl_current(p, [2.0, 0.0]) == pytest.approx([0.5, 0.0])

    def test_zero_power(self):
        p = CplParams(0.0, 0.0, 0.5)
        assert cpl_current(p, [0.7, 0.7]) == pytest.approx([0.0, 0.0])

    def test_domain_violation(self):
        with pytest.raises(CplDomainError):
            cpl_current(CplParams(1.0, 0.0, 1.0), [0.5, 0.0])

    def test_power_consistency(self):
        # v . i recovers p_c for q_c = 0 at any admissible norm
        p = CplParams(0.8, 0.0, 0.1)
        for v in ([1.0, 0.0], [2.0, 1.0], [0.3, -0.4]):
            assert float(np.dot(v, cpl_current(p, v))) == pytest.approx(0.8)

    def test_negative_power_rejected(self):
        with pytest.raises(ValueError):
            CplParams(-0.1, 0.0, 1.0)


class TestCplDisk:
    def test_example_radius(self):
        assert cpl_disk(EXAMPLE).radius == pytest.approx(
            np.sqrt(0.65) / 0.81, abs=1e-15)

    def test_zero_radius(self):
        assert cpl_disk(CplParams(0.0, 0.0, 1.0)).radius == 0.0

    def test_small_radius(self):
        assert cpl_disk(CplParams(0.1, 0.1, 1.0)).radius == pytest.approx(
            np.sqrt(0.02), abs=1e-15)

    def test_homogeneity(self):
        r1 = cpl_disk(CplParams(0.3, 0.4, 0.8)).radius
        r2 = cpl_disk(CplParams(0.6, 0.8, 0.8)).radius
        assert r2 == pytest.approx(2 * r1)


class TestEpsilonRho:
    def test_rho_zero(self):
        p = CplParams(0.5, 0.0, 1.0)
        assert epsilon_rho(p, 0.0) == pytest.approx(2 * 0.5)

    def test_example_value(self):
        assert epsilon_rho(EXAMPLE, 0.05) == pytest.approx(2.3872, abs=1e-3)

    def test_divergence_boundary(self):
        rho_star = np.sqrt(2.0) - 1.0  # 2*rho + rho^2 = 1
        with pytest.raises(ValueError):
            epsilon_rho(EXAMPLE, rho_star)
        with pytest.raises(ValueError):
            epsilon_rho(EXAMPLE, -0.1)


class TestHarmonicSplit:
    def test_zero_ripple_no_harmonics(self):
        spec = RippleSpec(v0=[1.0, 0.0])
        hs = cpl_harmonic_split(EXAMPLE, spec, horizon=0.05, dt=1e-4)
        assert hs.norm_i_har == pytest.approx(0.0, abs=1e-14)

    def test_single_tone_bound(self):
        spec = RippleSpec(v0=[1.0, 0.0],
                          tones=(([0.05, 0.0], 2 * np.pi * 100.0, 0.0),))
        hs = cpl_harmonic_split(EXAMPLE, spec, horizon=0.1, dt=1e-5)
        assert hs.norm_i_har <= epsilon_rho(EXAMPLE, hs.rho) * hs.norm_v_delta

    def test_two_tone_bound(self):
        spec = RippleSpec(v0=[0.8, 0.6],
                          tones=(([0.01, 0.01], 2 * np.pi * 90.0, 0.3),
                                 ([0.0, 0.012], 2 * np.pi * 277.0, 1.1)))
        hs = cpl_harmonic_split(EXAMPLE, spec, horizon=0.1, dt=1e-5)
        assert hs.rho <= 0.03
        assert hs.norm_i_har <= epsilon_rho(EXAMPLE, hs.rho) * hs.norm_v_delta

    def test_coarse_dt_rejected(self):
        spec = RippleSpec(v0=[1.0, 0.0],
                          tones=(([0.05, 0.0], 2 * np.pi * 1000.0, 0.0),))
        with pytest.raises(ValueError):
            cpl_harmonic_split(EXAMPLE, spec, horizon=0.01, dt=1e-3)

    def test_undervoltage_rejected_with_timestamp(self):
        p = CplParams(0.4, 0.7, 0.99)
        spec = RippleSpec(v0=[1.0, 0.0],
                          tones=(([0.05, 0.0], 2 * np.pi * 50.0, 0.0),))
        with pytest.raises(CplDomainError, match="t ="):
            cpl_harmonic_split(p, spec, horizon=0.1, dt=1e-5)

    def test_ripple_ratio_guard(self):
        with pytest.raises(ValueError):
            RippleSpec(v0=[1.0, 0.0], tones=(([0.2, 0.0], 100.0, 0.0),))


class TestSrgSample:
    def test_negative_incremental_conductance_witness(self):
        p = CplParams(1.0, 0.0, 1.0)
        v1 = np.array([1.0, 0.0])
        v2 = np.array([1.1, 0.0])
        di = cpl_current(p, v2) - cpl_current(p, v1)
        du = v2 - v1
        gain = np.linalg.norm(di) / np.linalg.norm(du)
        ang = np.arccos(np.clip(np.dot(du, di) / (np.linalg.norm(du) * np.linalg.norm(di)), -1, 1))
        assert gain * np.exp(1j * ang) == pytest.approx(-1 / 1.1, abs=1e-9)

    def test_zero_power_empty(self):
        assert cpl_srg_sample(CplParams(0.0, 0.0, 1.0), 100, seed=0).size == 0

    def test_example_containment(self):
        pts = cpl_srg_sample(EXAMPLE, 100_000, seed=3)
        assert float(np.max(np.abs(pts))) <= cpl_disk(EXAMPLE).radius + 1e-9

    def test_deterministic(self):
        a = cpl_srg_sample(EXAMPLE, 500, seed=11)
        b = cpl_srg_sample(EXAMPLE, 500, seed=11)
        assert a == pytest.approx(b)
