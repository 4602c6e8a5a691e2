import numpy as np
import pytest

from srgstab.lti import (
    EvaluationError,
    FrequencyGrid,
    FrequencyRangeError,
    InverseModel,
    NearSingularError,
    RationalModel,
    RotatedModel,
    SampledModel,
    StateSpaceModel,
    evaluate,
    invert_at,
    is_rh_infinity,
    rotation_matrix,
)


def first_order():
    return StateSpaceModel(A=[[-1.0]], B=[[1.0]], C=[[1.0]], D=[[0.0]])


class TestEvaluate:
    def test_state_space_dc(self):
        assert evaluate(first_order(), 0.0) == pytest.approx(np.array([[1.0]]))

    def test_state_space_at_one(self):
        assert evaluate(first_order(), 1.0) == pytest.approx(
            np.array([[0.5 - 0.5j]]))

    def test_rational_identity(self):
        m = RationalModel.constant(np.eye(2))
        for w in (0.0, 1.0, 314.0):
            assert evaluate(m, w) == pytest.approx(np.eye(2))

    def test_rational_matches_state_space(self):
        m = RationalModel(num=((np.array([1.0]),),), den=((np.array([1.0, 1.0]),),))
        for w in (0.0, 0.5, 10.0):
            assert evaluate(m, w) == pytest.approx(evaluate(first_order(), w))

    def test_conjugate_symmetry_via_negation(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            A = rng.standard_normal((3, 3)) - 2 * np.eye(3)
            m = StateSpaceModel(A=A, B=rng.standard_normal((3, 2)),
                                C=rng.standard_normal((2, 3)),
                                D=rng.standard_normal((2, 2)))
            # G(-jw) = conj(G(jw)) for real-coefficient models; evaluate only
            # accepts w >= 0, so check via the real-coefficient identity
            G = evaluate(m, 3.0)
            H = m.C @ np.linalg.solve(-3j * np.eye(3) - m.A, m.B) + m.D
            assert H == pytest.approx(G.conj())

    def test_sampled_exact_at_sample(self):
        mats = np.array([np.eye(2), 2 * np.eye(2)], dtype=complex)
        m = SampledModel(omegas=[1.0, 2.0], matrices=mats)
        assert evaluate(m, 2.0) == pytest.approx(2 * np.eye(2))

    def test_sampled_interpolates(self):
        mats = np.array([np.eye(2), 3 * np.eye(2)], dtype=complex)
        m = SampledModel(omegas=[0.0, 2.0], matrices=mats)
        assert evaluate(m, 1.0) == pytest.approx(2 * np.eye(2))

    def test_sampled_out_of_range(self):
        m = SampledModel(omegas=[1.0, 2.0],
                         matrices=np.zeros((2, 2, 2), dtype=complex))
        with pytest.raises(FrequencyRangeError):
            evaluate(m, 5.0)

    def test_negative_omega_rejected(self):
        with pytest.raises(EvaluationError):
            evaluate(first_order(), -1.0)

    def test_rotated(self):
        base = RationalModel.constant(np.diag([1.0, 2.0]))
        m = RotatedModel(base=base, theta=np.pi / 2)
        assert evaluate(m, 0.0) == pytest.approx(np.diag([2.0, 1.0]), abs=1e-12)

    def test_inverse_model(self):
        base = RationalModel.constant(np.diag([2.0, 4.0]))
        m = InverseModel(base=base)
        assert evaluate(m, 1.0) == pytest.approx(np.diag([0.5, 0.25]))


class TestRhInfinity:
    def test_stable_state_space(self):
        assert is_rh_infinity(first_order()).stable is True

    def test_unstable_state_space(self):
        m = StateSpaceModel(A=[[1.0]], B=[[1.0]], C=[[1.0]], D=[[0.0]])
        assert is_rh_infinity(m).stable is False

    def test_integrator_rejected(self):
        m = RationalModel(num=((np.array([1.0]),),), den=((np.array([1.0, 0.0]),),))
        assert is_rh_infinity(m).stable is False

    def test_improper_rejected(self):
        m = RationalModel(num=((np.array([1.0, 0.0, 0.0]),),),
                          den=((np.array([1.0, 1.0]),),))
        assert is_rh_infinity(m).stable is False

    def test_sampled_indeterminate(self):
        m = SampledModel(omegas=[1.0, 2.0],
                         matrices=np.zeros((2, 2, 2), dtype=complex))
        r = is_rh_infinity(m)
        assert r.stable is None and r.indeterminate


class TestInvertAt:
    def test_identity(self):
        assert invert_at(np.eye(2)) == pytest.approx(np.eye(2))

    def test_diagonal(self):
        assert invert_at(np.diag([2.0, 4.0])) == pytest.approx(np.diag([0.5, 0.25]))

    def test_cross_coupled(self):
        G = np.array([[1.0, -31.4159], [31.4159, 1.0]])
        Gi = invert_at(G)
        assert Gi == pytest.approx(
            np.array([[1.0132e-3, 3.1831e-2], [-3.1831e-2, 1.0132e-3]]), rel=2e-3)

    def test_involution(self):
        rng = np.random.default_rng(3)
        G = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)) + 3 * np.eye(3)
        assert invert_at(invert_at(G)) == pytest.approx(G, rel=1e-9)

    def test_near_singular(self):
        with pytest.raises(NearSingularError):
            invert_at(np.array([[1.0, 1.0], [1.0, 1.0 + 1e-15]]))


class TestFrequencyGrid:
    def test_from_hz_log(self):
        g = FrequencyGrid.from_hz(1.0, 100.0, 3)
        assert g.hz == pytest.approx([1.0, 10.0, 100.0])

    def test_include_inserts_exact_value(self):
        w0 = 2 * np.pi * 50.0
        g = FrequencyGrid.from_hz(1.0, 100.0, 10, include=(w0,))
        assert w0 in g.omegas

    def test_rejects_nonmonotone(self):
        with pytest.raises(ValueError):
            FrequencyGrid(omegas=np.array([1.0, 1.0]))

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            FrequencyGrid(omegas=np.array([-1.0, 1.0]))

    def test_rotation_matrix_orthogonal(self):
        J = rotation_matrix(0.3)
        assert J @ J.T == pytest.approx(np.eye(2))

    def test_complex_matrices_rejected_in_real_models(self):
        with pytest.raises(ValueError):
            RationalModel.constant(1j * np.eye(2))
