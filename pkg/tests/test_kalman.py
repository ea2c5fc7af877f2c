import numpy as np
import pytest

import helpers
from cointssm import (
    CointCanonicalForm,
    KalmanSolution,
    check_filtered_controllability,
    discretize,
    filter_innovations,
    simulate_exact_gaussian,
    solve_steady_state,
)
from cointssm.errors import ConvergenceError, DimensionError


def stationary_scalar(a: float = np.exp(-1.0)):
    """c = 0 toy with e^{Ah} = a, C = 1."""
    cf = CointCanonicalForm(c=0, A2=[[np.log(a)]], B1=np.zeros((0, 1)), B2=[[1.0]],
                            C1=np.zeros((1, 0)), C2=[[1.0]], levy=helpers.brownian(1))
    return cf, discretize(cf, 1.0)


class TestSolveSteadyState:
    def test_fully_observed_scalar_fixed_point(self):
        cf, sm = stationary_scalar()
        ks = solve_steady_state(sm, cf)
        assert np.allclose(ks.omega, sm.sigma_tilde, atol=1e-12)
        assert np.allclose(ks.gain, [[np.exp(-1.0)]], atol=1e-12)
        assert np.allclose(ks.closed_loop, 0.0, atol=1e-12)

    def test_fully_observed_matrix_fixed_point(self, scalar_ks, scalar_sm):
        assert np.allclose(scalar_ks.omega, scalar_sm.sigma_tilde, atol=1e-12)
        assert np.allclose(scalar_ks.gain, scalar_sm.eAh, atol=1e-12)
        assert np.allclose(scalar_ks.closed_loop, 0.0, atol=1e-12)
        assert np.allclose(scalar_ks.v, scalar_sm.sigma_tilde, atol=1e-12)

    def test_invariants_on_random_models(self, rng):
        for _ in range(6):
            cf = helpers.random_canonical(rng, d=2, c=1, n2=2, m=2)
            sm = discretize(cf, 0.5)
            ks = solve_steady_state(sm, cf)
            scale = 1.0 + np.linalg.norm(ks.omega)
            assert ks.residual <= 1e-10 * scale
            assert ks.spectral_radius < 1.0
            # gain is definitionally e^{Ah} Omega C' (C Omega C')^{-1}
            S = ks.c_matrix @ ks.omega @ ks.c_matrix.T
            G = sm.eAh @ ks.omega @ ks.c_matrix.T
            assert np.allclose(ks.gain, G @ np.linalg.inv(S), atol=1e-12 * scale)
            assert np.min(np.linalg.eigvalsh(ks.v)) > 0
            assert np.min(np.linalg.eigvalsh(ks.omega)) > 0

    def test_iteration_budget_enforced(self, partial_sm, partial_cf):
        with pytest.raises(ConvergenceError):
            solve_steady_state(partial_sm, partial_cf, tol=1e-15, max_iter=2)


class TestFilterInnovations:
    def test_zero_observations(self, scalar_ks, scalar_sm):
        eps, x_hat = filter_innovations(scalar_ks, scalar_sm, np.zeros((20, 2)))
        assert np.array_equal(eps, np.zeros((20, 2)))
        assert np.array_equal(x_hat, np.zeros((20, 2)))

    def test_full_observation_reduces_to_one_step_predictor(self, scalar_ks, scalar_sm, rng):
        y = rng.normal(size=(50, 2))
        eps, _ = filter_innovations(scalar_ks, scalar_sm, y)
        expected = y.copy()
        expected[1:] -= y[:-1] @ scalar_sm.eAh.T
        assert np.allclose(eps, expected, atol=1e-12)

    def test_innovation_covariance_matches_v(self, partial_ks, partial_sm, partial_cf):
        ps = simulate_exact_gaussian(partial_sm, partial_cf, 101_000, seed=512)
        eps, _ = filter_innovations(partial_ks, partial_sm, ps.y)
        eps = eps[1000:]
        emp = eps.T @ eps / eps.shape[0]
        se = helpers.cov_se(eps, eps)
        assert np.all(np.abs(emp - partial_ks.v) <= 3.0 * se)

    def test_split_half_covariance_stationarity(self, partial_ks, partial_sm, partial_cf):
        ps = simulate_exact_gaussian(partial_sm, partial_cf, 81_000, seed=513)
        eps, _ = filter_innovations(partial_ks, partial_sm, ps.y)
        eps = eps[1000:]
        half = eps.shape[0] // 2
        a, b = eps[:half], eps[half:]
        cov_a = a.T @ a / half
        cov_b = b.T @ b / half
        se = helpers.cov_se(a, a) + helpers.cov_se(b, b)
        assert np.all(np.abs(cov_a - cov_b) <= 3.0 * se)

    def test_initialization_forgetting(self, partial_ks, partial_sm, partial_cf, rng):
        ps = simulate_exact_gaussian(partial_sm, partial_cf, 600, seed=77)
        eps0, _ = filter_innovations(partial_ks, partial_sm, ps.y)
        eps1, _ = filter_innovations(partial_ks, partial_sm, ps.y,
                                     x_hat_0=rng.normal(size=3))
        assert np.max(np.abs(eps0[500:] - eps1[500:])) < 1e-8

    def test_moving_average_formula_cross_check(self, partial_ks, partial_sm, partial_cf):
        ps = simulate_exact_gaussian(partial_sm, partial_cf, 400, seed=78)
        eps, _ = filter_innovations(partial_ks, partial_sm, ps.y)
        cl, K, C = partial_ks.closed_loop, partial_ks.gain, partial_ks.c_matrix
        weights = []
        power = np.eye(3)
        for _ in range(200):
            weights.append(C @ power @ K)
            power = cl @ power
        n = 350
        acc = ps.y[n].copy()
        for i, W in enumerate(weights, start=1):
            acc -= W @ ps.y[n - i]
        assert np.max(np.abs(acc - eps[n])) < 1e-6

    def test_shape_validation(self, scalar_ks, scalar_sm):
        with pytest.raises(DimensionError):
            filter_innovations(scalar_ks, scalar_sm, np.zeros((10, 3)))
        with pytest.raises(DimensionError):
            filter_innovations(scalar_ks, scalar_sm, np.zeros((10, 2)), x_hat_0=np.zeros(5))


class TestFilteredControllability:
    def test_full_observation_controllable(self, scalar_ks, scalar_sm):
        rep = check_filtered_controllability(scalar_ks, scalar_sm)
        assert rep.is_controllable and rep.is_observable and rep.is_minimal

    def test_partial_fixture_controllable(self, partial_ks, partial_sm):
        rep = check_filtered_controllability(partial_ks, partial_sm)
        assert rep.is_controllable and rep.is_observable

    def test_degenerate_zero_gain(self, scalar_ks, scalar_sm):
        broken = KalmanSolution(
            omega=scalar_ks.omega, gain=np.zeros_like(scalar_ks.gain),
            v=scalar_ks.v, closed_loop=scalar_ks.closed_loop,
            iterations=1, residual=0.0, c_matrix=scalar_ks.c_matrix,
        )
        rep = check_filtered_controllability(broken, scalar_sm)
        assert not rep.is_controllable

    def test_rank_decision_stable_under_tiny_noise(self, partial_cf, partial_sm, rng):
        base = solve_steady_state(partial_sm, partial_cf)
        rep0 = check_filtered_controllability(base, partial_sm)
        from cointssm.moments import SampledModel
        for _ in range(3):
            bump = rng.normal(size=partial_sm.sigma_tilde.shape)
            bump = 1e-12 * (bump + bump.T)
            sm2 = SampledModel(h=partial_sm.h, c=partial_sm.c, eAh=partial_sm.eAh,
                               sigma_tilde=partial_sm.sigma_tilde + bump,
                               gamma0=partial_sm.gamma0)
            ks2 = solve_steady_state(sm2, partial_cf)
            rep2 = check_filtered_controllability(ks2, sm2)
            assert rep2.is_controllable == rep0.is_controllable
