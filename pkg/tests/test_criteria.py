import numpy as np
import pytest

from srgstab.cpl import CplParams
from srgstab.criteria import (
    GridTooCoarseError,
    SrgOptions,
    certify_linear,
    certify_with_cpl,
    compare_criteria,
    critical_scr,
    gnc_check,
    margin_profile,
    passivity_check,
    small_gain_check,
    small_phase_check,
)
from srgstab.lti import FrequencyGrid, RationalModel, SampledModel, StateSpaceModel

GRID = FrequencyGrid.from_hz(0.1, 100.0, 5)
OPTS = SrgOptions(n_support=64, tau_points=16)


def const(M):
    return RationalModel.constant(M)


def const_complex(M, f_max=1e4):
    mats = np.array([M, M], dtype=complex)
    return SampledModel(omegas=[0.0, 2 * np.pi * f_max], matrices=mats)


def siso(num, den):
    return RationalModel(num=((np.atleast_1d(np.asarray(num, float)),),),
                         den=((np.atleast_1d(np.asarray(den, float)),),))


def example_load():
    # [[5+0.5s, -0.5], [0.5, 5+0.5s]]^-1
    den = np.array([0.25, 5.0, 25.25])
    diag = np.array([0.5, 5.0])
    off = np.array([0.5])
    return RationalModel(num=((diag, off), (-off, diag)),
                         den=((den, den), (den, den)))


class TestCertifyLinear:
    def test_separated_point_fixture(self):
        r = certify_linear(const(np.eye(2)), const(5 * np.eye(2)), GRID, OPTS)
        assert r.verdict == "certified"
        assert r.margin == pytest.approx(np.full(len(GRID), 5.0), abs=1e-6)

    def test_contained_point_fixture(self):
        r = certify_linear(const(-np.eye(2)), const(0.5 * np.eye(2)), GRID, OPTS)
        assert r.verdict == "not-certified"
        assert r.worst_margin == pytest.approx(0.0, abs=1e-9)

    def test_half_plane_separation(self):
        rng = np.random.default_rng(1)
        S = rng.standard_normal((2, 2))
        Yc = const(np.eye(2) + 0.3 * (S - S.T))  # Hermitian part I: right half-plane
        Yg = const(2 * np.eye(2) + 0.2 * (S - S.T))
        r = certify_linear(Yc, Yg, GRID, OPTS)
        assert r.verdict == "certified"
        assert np.all(r.margin > 0.5)

    def test_indeterminate_on_sampled_grid(self):
        Yg = const_complex(5 * np.eye(2))
        r = certify_linear(const(np.eye(2)), Yg, GRID, OPTS)
        assert r.verdict == "indeterminate"
        assert np.all(r.margin > 0)

    def test_margin_profile_shape_and_flatness(self):
        r = certify_linear(const(np.eye(2)), const(5 * np.eye(2)), GRID, OPTS)
        lines = margin_profile(r).strip().splitlines()
        assert lines[0] == "f_hz,rho"
        assert len(lines) == len(GRID) + 1
        vals = [float(line.split(",")[1]) for line in lines[1:]]
        assert vals == pytest.approx([5.0] * len(GRID), abs=1e-6)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            certify_linear(const(np.eye(2)), const(np.eye(3)), GRID, OPTS)


class TestCertifyWithCpl:
    def test_zero_disk_reduces_to_linear(self):
        y_l = example_load()
        Yc = const(10 * np.eye(2))
        r0 = certify_with_cpl(Yc, y_l, CplParams(0.0, 0.0, 1.0), GRID, OPTS)
        r1 = certify_linear(Yc, y_l, GRID, OPTS)
        assert r0.margin == pytest.approx(r1.margin, abs=1e-6)

    def test_example_certified_against_strong_converter(self):
        r = certify_with_cpl(const(10 * np.eye(2)), example_load(),
                             CplParams(0.4, 0.7, 0.9), GRID, OPTS)
        assert r.verdict == "certified"
        assert "epsilon_rho" in r.diagnostics

    def test_margin_monotone_in_power(self):
        y_l = example_load()
        Yc = const(10 * np.eye(2))
        grid = FrequencyGrid.from_hz(1.0, 10.0, 2)
        margins = [certify_with_cpl(Yc, y_l, CplParams(p, 0.7, 0.9), grid, OPTS).margin
                   for p in (0.1, 0.4, 1.5)]
        assert np.all(margins[0] >= margins[1] - 1e-9)
        assert np.all(margins[1] >= margins[2] - 1e-9)

    def test_large_disk_defeats_certification(self):
        # grow p_c until the disk swallows the gap to the swept converter set
        y_l = example_load()
        Yc = const(0.05 * np.eye(2))
        grid = FrequencyGrid.from_hz(1.0, 10.0, 2)
        r = certify_with_cpl(Yc, y_l, CplParams(5.0, 0.7, 0.9), grid, OPTS)
        assert r.verdict == "not-certified"


class TestCriticalScr:
    def test_negative_half_identity(self):
        r = critical_scr(const(-0.5 * np.eye(2)), GRID, OPTS)
        assert not r.no_constraint
        assert r.cscr == pytest.approx(0.5, abs=1e-9)

    def test_skew_no_constraint(self):
        r = critical_scr(const(np.array([[0.0, -2.0], [2.0, 0.0]])), GRID, OPTS)
        assert r.no_constraint
        assert r.cscr == pytest.approx(0.0, abs=1e-9)

    def test_reach_length(self):
        r = critical_scr(const(-0.5 * np.eye(2)), GRID, OPTS)
        assert r.reach.shape == (len(GRID),)


class TestGnc:
    GRID = FrequencyGrid.from_hz(1e-3, 2e3, 120)

    def test_zero_impedance(self):
        r = gnc_check(siso([-2.0], [1.0, 1.0]), siso([0.0], [1.0]), self.GRID)
        assert r.stable and r.winding == 0

    def test_unstable_lag(self):
        # L = -2/(s+1): closed-loop pole at s = +1
        r = gnc_check(siso([-2.0], [1.0, 1.0]), siso([1.0], [1.0]), self.GRID)
        assert not r.stable and r.winding != 0

    def test_stable_lag(self):
        r = gnc_check(siso([0.5], [1.0, 1.0]), siso([1.0], [1.0]), self.GRID)
        assert r.stable and r.winding == 0

    def test_too_coarse_raises(self):
        # a lightly damped resonance on a 2-point grid cannot be tracked
        grid = FrequencyGrid(omegas=np.array([0.1, 1e4]))
        Yc = siso([100.0], [1.0, 1e-3, 100.0])
        with pytest.raises(GridTooCoarseError):
            gnc_check(Yc, siso([1.0], [1.0]), grid,
                      max_points=4)


class TestSmallGain:
    def test_contractive_pair(self):
        r = small_gain_check(const(0.5 * np.eye(2)), const(0.5 * np.eye(2)), GRID)
        assert r.holds and np.all(r.gains == pytest.approx(0.25))

    def test_failing_pair(self):
        r = small_gain_check(const(2 * np.eye(2)), const(np.eye(2)), GRID)
        assert not r.holds


class TestSmallPhase:
    def test_identity_pair(self):
        r = small_phase_check(const(np.eye(2)), const(np.eye(2)), GRID)
        assert r.holds
        assert r.alpha_converter[0] == pytest.approx([0.0, 0.0], abs=1e-9)

    def test_rotated_scalar_phase(self):
        M = np.exp(1j * np.pi / 4) * np.eye(2)
        r = small_phase_check(const_complex(M), const(np.eye(2)), GRID)
        assert r.holds
        assert r.alpha_converter[0] == pytest.approx([np.pi / 4, np.pi / 4], abs=1e-6)

    def test_non_sectorial_inapplicable(self):
        M = np.diag([1.0, -1.0]) + np.array([[0.0, 1.0], [-1.0, 0.0]]) * 1j
        r = small_phase_check(const_complex(M), const(np.eye(2)), GRID)
        assert not r.applicable
        assert np.all(r.per_frequency == "inapplicable")

    def test_opposed_phases_fail(self):
        M = np.exp(1j * 0.9 * np.pi) * np.eye(2)
        r = small_phase_check(const_complex(M), const_complex(M.conj().T @ (-np.eye(2))), GRID)
        assert not r.holds


class TestPassivity:
    def test_identity(self):
        r = passivity_check(const(np.eye(2)), const(np.eye(2)), GRID)
        assert r.holds
        assert r.ifp_converter[0] == pytest.approx(1.0)
        assert r.ofp_converter[0] == pytest.approx(1.0)

    def test_diag_1_3(self):
        r = passivity_check(const(np.diag([1.0, 3.0])), const(np.eye(2)), GRID)
        assert r.ifp_converter[0] == pytest.approx(1.0)
        assert r.ofp_converter[0] == pytest.approx(1.0 / 3.0)

    def test_lossless_converter_second_disjunct(self):
        r = passivity_check(const_complex(1j * np.eye(2)), const(np.eye(2)), GRID)
        assert r.holds
        assert r.ifp_converter[0] == pytest.approx(0.0, abs=1e-12)

    def test_active_pair_fails(self):
        r = passivity_check(const(-np.eye(2)), const(np.eye(2)), GRID)
        assert not r.holds


class TestCompare:
    def test_contractive_passive_pair_all_pass(self):
        Yc = const(0.5 * np.eye(2))
        Ygrid = const(5 * np.eye(2))  # Zgrid = 0.2 I
        t = compare_criteria(Yc, Ygrid, GRID, OPTS)
        verdicts = {r.criterion: r.verdict for r in t.rows}
        assert verdicts["srg"] == "certified"
        assert verdicts["gnc"] == "stable"
        assert verdicts["small-gain"] == "pass"
        assert verdicts["small-phase"] == "pass"
        assert verdicts["passivity"] == "pass"

    def test_non_sectorial_band_reported(self):
        M = np.diag([1.0, -1.0]) + np.array([[0.0, 1.0], [-1.0, 0.0]]) * 1j
        Yc = const_complex(0.05 * M)
        Ygrid = const(5 * np.eye(2))
        t = compare_criteria(Yc, Ygrid, GRID, OPTS)
        rows = {r.criterion: r for r in t.rows}
        assert rows["small-phase"].verdict == "inapplicable"
        assert rows["small-phase"].inapplicable_bands_hz
        # the SRG test still returns a margin for the same pair
        assert np.all(t.report.margin > 0)

    def test_table_text_has_all_rows(self):
        t = compare_criteria(const(0.5 * np.eye(2)), const(5 * np.eye(2)), GRID, OPTS)
        text = t.as_text()
        for name in ("srg", "gnc", "small-gain", "small-phase", "passivity"):
            assert name in text
