import numpy as np
import pytest

from xbarlp.oracle import simplex_solve
from xbarlp.pdhg import kkt_residuals
from xbarlp.scaling import (
    ScalingInfo,
    diag_precond,
    ruiz_rescale,
    scale_bounds,
    scale_problem,
)

from conftest import random_standard_lp


def ruiz_reference(K, iters):
    """Direct transcription of the sqrt-norm recurrence, used as the oracle."""
    D1 = np.ones(K.shape[0])
    D2 = np.ones(K.shape[1])
    S = K.copy()
    for _ in range(iters):
        r = np.max(np.abs(S), axis=1)
        c = np.max(np.abs(S), axis=0)
        dr = np.where(r > 0, 1 / np.sqrt(r), 1.0)
        dc = np.where(c > 0, 1 / np.sqrt(c), 1.0)
        S = np.diag(dr) @ S @ np.diag(dc)
        D1, D2 = D1 * dr, D2 * dc
    return D1, D2, S


class TestRuiz:
    def test_already_equilibrated(self):
        D1, D2, S = ruiz_rescale(np.array([[1.0]]), iters=10)
        np.testing.assert_allclose(D1, [1.0])
        np.testing.assert_allclose(D2, [1.0])
        np.testing.assert_allclose(S, [[1.0]])

    def test_diagonal_spread(self):
        K = np.array([[100.0, 0.0], [0.0, 0.01]])
        D1, D2, S = ruiz_rescale(K, iters=10)
        np.testing.assert_allclose(S, np.eye(2), atol=1e-6)
        # and the scaling matches the hand-iterated recurrence
        D1r, D2r, Sr = ruiz_reference(K, 10)
        np.testing.assert_allclose(S, Sr, atol=1e-12)
        np.testing.assert_allclose(D1 * D2, D1r * D2r, rtol=1e-12)

    def test_zero_row_gets_unit_scale(self):
        K = np.array([[1.0, 2.0], [0.0, 0.0]])
        D1, D2, S = ruiz_rescale(K, iters=5)
        assert D1[1] == 1.0
        np.testing.assert_array_equal(S[1], [0.0, 0.0])

    def test_matches_reference_on_random(self, rng):
        K = rng.standard_normal((7, 5)) * 10 ** rng.uniform(-3, 3, size=(7, 5))
        for iters in (1, 3, 10):
            D1, D2, S = ruiz_rescale(K, iters=iters, tol=0.0)
            D1r, D2r, Sr = ruiz_reference(K, iters)
            np.testing.assert_allclose(S, Sr, rtol=1e-12, atol=1e-15)

    @pytest.mark.parametrize("iters,lo", [(10, 0.5), (30, 0.99)])
    def test_equilibration_quality(self, iters, lo):
        rng = np.random.default_rng(99)
        for _ in range(10):
            K = rng.standard_normal((12, 9)) * 10 ** rng.uniform(-4, 4, size=(12, 9))
            _, _, S = ruiz_rescale(K, iters=iters)
            row_norms = np.max(np.abs(S), axis=1)
            col_norms = np.max(np.abs(S), axis=0)
            for norms in (row_norms, col_norms):
                nz = norms[norms > 0]
                assert (nz >= lo).all()
                assert (nz <= 1.0 + 1e-12).all()


class TestDiagPrecond:
    def test_uniform_matrix(self):
        T, Sigma = diag_precond(np.ones((2, 2)))
        np.testing.assert_allclose(T, [0.5, 0.5])
        np.testing.assert_allclose(Sigma, [0.5, 0.5])

    def test_diagonal_matrix(self):
        T, Sigma = diag_precond(np.diag([2.0, 3.0]))
        np.testing.assert_allclose(T, [0.5, 1 / 3])
        np.testing.assert_allclose(Sigma, [0.5, 1 / 3])

    def test_zero_column_clamped_with_warning(self):
        K = np.array([[1.0, 0.0], [1.0, 0.0]])
        with pytest.warns(UserWarning, match="empty"):
            T, Sigma = diag_precond(K)
        assert T[1] == 1e12
        assert np.isfinite(T).all() and (T > 0).all()

    def test_positivity_on_random(self, rng):
        for _ in range(20):
            K = rng.standard_normal((6, 8))
            T, Sigma = diag_precond(K)
            assert (T > 0).all() and (Sigma > 0).all()
            assert np.isfinite(T).all() and np.isfinite(Sigma).all()


class TestScaleProblem:
    def _scaling(self, std, D1, D2):
        T, Sigma = diag_precond(D1[:, None] * std.K * D2[None, :])
        return ScalingInfo(D1=D1, D2=D2, T=T, Sigma=Sigma)

    def test_identity(self, rng):
        std = random_standard_lp(rng, 3, 5)
        si = self._scaling(std, np.ones(3), np.ones(5))
        scaled = scale_problem(std, si)
        np.testing.assert_array_equal(scaled.K, std.K)
        np.testing.assert_array_equal(scaled.c, std.c)

    def test_cost_scaling(self, rng):
        std = random_standard_lp(rng, 2, 1)
        std.c = np.array([3.0])
        si = self._scaling(std, np.ones(2), np.array([2.0]))
        np.testing.assert_allclose(scale_problem(std, si).c, [6.0])

    def test_dimension_mismatch(self, rng):
        std = random_standard_lp(rng, 3, 5)
        si = self._scaling(std, np.ones(3), np.ones(5))
        si.D1 = np.ones(4)
        with pytest.raises(ValueError):
            scale_problem(std, si)

    def test_scaled_optimum_unscales_to_original(self, rng):
        # simplex oracle on both forms; D2 * x_scaled solves the original
        for _ in range(4):
            std = random_standard_lp(rng, 5, 7)
            D1, D2, _ = ruiz_rescale(std.K, iters=10)
            si = self._scaling(std, D1, D2)
            scaled = scale_problem(std, si)
            a = simplex_solve(std)
            b = simplex_solve(scaled)
            assert a.status == b.status == "optimal"
            x_rec = D2 * b.x
            assert abs(float(std.c @ x_rec) - a.objective) <= 1e-8 * (1 + abs(a.objective))
            assert np.linalg.norm(std.K @ x_rec - std.b) <= 1e-8

    def test_recovered_kkt_residuals_small(self, rng):
        # scaled residuals below 1e-7 imply unscaled residuals below 1e-6
        for _ in range(4):
            std = random_standard_lp(rng, 4, 6)
            D1, D2, Ks = ruiz_rescale(std.K, iters=10)
            si = self._scaling(std, D1, D2)
            scaled = scale_problem(std, si)
            sol = simplex_solve(scaled)
            res_scaled = kkt_residuals(sol.x, sol.y, scaled.K, scaled.b, scaled.c)
            assert res_scaled.max_kkt <= 1e-7
            res_orig = kkt_residuals(D2 * sol.x, D1 * sol.y, std.K, std.b, std.c)
            assert res_orig.max_kkt <= 1e-6


class TestScaleBounds:
    def test_infinite_and_zero_entries(self):
        lb, ub = scale_bounds(np.array([0.0, -np.inf]), np.array([4.0, np.inf]),
                              np.array([2.0, 0.5]))
        np.testing.assert_array_equal(lb, [0.0, -np.inf])
        np.testing.assert_array_equal(ub, [2.0, np.inf])


def test_scaling_info_rejects_nonpositive():
    with pytest.raises(ValueError):
        ScalingInfo(D1=np.array([1.0, 0.0]), D2=np.ones(2), T=np.ones(2), Sigma=np.ones(2))
