import numpy as np
import pytest
from scipy.linalg import expm

from omm_cascade import linalg


def random_stable(rng, n, shift=0.5):
    M = rng.normal(size=(n, n))
    mx = np.max(np.linalg.eigvals(M).real)
    return M - (mx + shift) * np.eye(n)


def random_psd(rng, n):
    B = rng.normal(size=(n, n))
    return B @ B.T


class TestEigenvalues:
    def test_diagonal(self):
        lam = linalg.eigenvalues(np.diag([3.0, -1.0, 2.0]))
        np.testing.assert_allclose(lam, [-1, 2, 3])

    def test_rotation_has_conjugate_pair(self):
        lam = linalg.eigenvalues(np.array([[-1.0, 2.0], [-2.0, -1.0]]))
        np.testing.assert_allclose(lam, [-1 - 2j, -1 + 2j])

    def test_zero_matrix_gives_zeros(self):
        assert np.all(linalg.eigenvalues(np.zeros((4, 4))) == 0)

    def test_jordan_block_multiplicity(self):
        J = np.array([[2.0, 1.0], [0.0, 2.0]])
        np.testing.assert_allclose(linalg.eigenvalues(J), [2, 2], atol=1e-7)

    @pytest.mark.parametrize("seed", range(10))
    def test_trace_and_determinant(self, seed):
        rng = np.random.default_rng(seed)
        M = rng.normal(size=(16, 16))
        lam = linalg.eigenvalues(M)
        assert abs(lam.sum() - np.trace(M)) < 1e-10 * np.abs(M).sum()
        assert np.isclose(np.prod(lam).real, np.linalg.det(M), rtol=1e-8)
        # complex eigenvalues of a real matrix come in conjugate pairs
        np.testing.assert_allclose(np.sort_complex(lam.conj()), lam, atol=1e-10)

    def test_rejects_non_square_and_nonfinite(self):
        with pytest.raises(linalg.LinAlgError):
            linalg.eigenvalues(np.ones((2, 3)))
        with pytest.raises(linalg.LinAlgError):
            linalg.eigenvalues(np.array([[np.nan, 0], [0, 1.0]]))

    def test_dimension_cap(self):
        with pytest.raises(linalg.LinAlgError):
            linalg.eigenvalues(np.eye(linalg.MAX_DIM + 1))


class TestSolveLinear:
    def test_identity(self):
        b = np.arange(5.0)
        np.testing.assert_array_equal(linalg.solve_linear(np.eye(5), b), b)

    def test_singular(self):
        with pytest.raises(linalg.SingularMatrixError):
            linalg.solve_linear(np.array([[1.0, 2.0], [2.0, 4.0]]), np.ones(2))

    @pytest.mark.parametrize("cond", [1e2, 1e5, 1e8])
    def test_backward_error(self, cond):
        rng = np.random.default_rng(int(np.log10(cond)))
        U, _ = np.linalg.qr(rng.normal(size=(30, 30)))
        W, _ = np.linalg.qr(rng.normal(size=(30, 30)))
        A = U @ np.diag(np.geomspace(1.0, 1.0 / cond, 30)) @ W.T
        b = rng.normal(size=30)
        x = linalg.solve_linear(A, b)
        assert np.linalg.norm(A @ x - b) <= 1e-12 * (np.linalg.norm(A) * np.linalg.norm(x) + np.linalg.norm(b))

    def test_shape_mismatch(self):
        with pytest.raises(linalg.LinAlgError):
            linalg.solve_linear(np.eye(3), np.ones(2))


class TestLyapunov:
    def test_scalar(self):
        # a v + v a = -q  ->  v = q / (2|a|)
        V = linalg.solve_lyapunov(np.array([[-2.0]]), np.array([[3.0]]))
        assert V[0, 0] == pytest.approx(0.75, rel=1e-14)

    def test_damped_oscillator_equipartition(self):
        w, g, n = 5.0, 0.1, 3.0
        A = np.array([[0.0, w], [-w, -g]])
        D = np.diag([0.0, g * (2 * n + 1)])
        V = linalg.solve_lyapunov(A, D)
        np.testing.assert_allclose(V, (n + 0.5) * np.eye(2), rtol=1e-12, atol=1e-14)

    def test_unstable_raises(self):
        with pytest.raises(linalg.UnstableMatrixError):
            linalg.solve_lyapunov(np.diag([-1.0, 0.5]), np.eye(2))

    def test_asymmetric_q_rejected(self):
        with pytest.raises(linalg.LinAlgError):
            linalg.solve_lyapunov(-np.eye(2), np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_random_against_ode(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            A = random_stable(rng, 16, shift=rng.uniform(0.05, 2.0))
            D = random_psd(rng, 16)
            V = linalg.solve_lyapunov(A, D)
            assert linalg.lyapunov_residual(A, V, D) <= linalg.LYAPUNOV_RTOL
            np.testing.assert_array_equal(V, V.T)
            W = linalg.integrate_covariance_ode(A, D)
            assert linalg.relative_error(V, W) < 1e-8


class TestCovarianceOde:
    def test_scalar_transient(self):
        # v(t) = q (1 - exp(2 a t)) / (-2 a)
        a, q, t = -0.7, 2.0, 1.3
        V = linalg.integrate_covariance_ode(np.array([[a]]), np.array([[q]]), t_end=t)
        assert V[0, 0] == pytest.approx(q * (1 - np.exp(2 * a * t)) / (-2 * a), rel=1e-12)

    def test_transient_matches_matrix_exponential(self):
        rng = np.random.default_rng(3)
        A = random_stable(rng, 6)
        D = random_psd(rng, 6)
        t = 0.8
        V = linalg.integrate_covariance_ode(A, D, t_end=t)
        Vinf = linalg.solve_lyapunov(A, D)
        E = expm(A * t)
        np.testing.assert_allclose(V, Vinf - E @ Vinf @ E.T, rtol=1e-9, atol=1e-11)

    def test_decay_rate(self):
        # distance to the fixed point decays as exp(2 max Re(lambda) t)
        A = np.diag([-0.5, -3.0])
        D = np.eye(2)
        Vinf = linalg.solve_lyapunov(A, D)
        gaps = [abs(Vinf - linalg.integrate_covariance_ode(A, D, t_end=t))[0, 0] for t in (2.0, 4.0)]
        assert np.log(gaps[1] / gaps[0]) / 2.0 == pytest.approx(-1.0, rel=1e-8)

    def test_unstable_diverges(self):
        with pytest.raises(linalg.UnstableMatrixError):
            linalg.integrate_covariance_ode(np.diag([0.2, -1.0]), np.eye(2))
        with pytest.raises(linalg.UnstableMatrixError):
            linalg.integrate_covariance_ode(np.diag([2.0, -1.0]), np.eye(2), t_end=200.0)
