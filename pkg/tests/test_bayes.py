import numpy as np
import pytest
import scipy.stats

from fetomo.bayes import (
    ChainRecord,
    GaussianModel,
    MapResult,
    PosteriorModel,
    find_map,
    hessian_at_map,
    mh_step,
    param_to_density,
    param_to_matrix,
    matrix_to_param,
    pcn_propose,
    run_chains,
)
from fetomo.errors import DegenerateInputError
from fetomo.ladder import DensityMatrix, EnergyWindow, fidelity
from fetomo.spectrogram import PhaseGrid, log_likelihood, sample_counts, simulate_spectrogram


def random_density(window, rng):
    d = window.dimension
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = a @ a.conj().T
    rho /= np.trace(rho).real
    return DensityMatrix.from_array(window, rho)


def synthetic_model(seed=0, state_window=EnergyWindow(0, 1), g_abs=0.9,
                    n_phases=50, counts=10_000, data_window=EnergyWindow(-10, 11)):
    rng = np.random.default_rng(seed)
    truth = random_density(state_window, rng)
    s = simulate_spectrogram(truth, g_abs, PhaseGrid.uniform(n_phases), window=data_window)
    noisy = sample_counts(s, counts, seed=seed + 1)
    return PosteriorModel(noisy, state_window=state_window), truth


def gaussian_map_result(mean, precision):
    return MapResult(
        x_map=np.asarray(mean, float),
        hessian=np.asarray(precision, float),
        log_posterior_at_map=0.0,
        converged=True,
        gradient_inf_norm=0.0,
        iterations=0,
    )


class TestParameterisation:
    def test_identity_matrix_gives_maximally_mixed(self):
        w = EnergyWindow(0, 1)
        x = matrix_to_param(np.eye(2))
        rho = param_to_density(x, w)
        assert np.allclose(rho.array, np.eye(2) / 2.0)

    def test_single_column_gives_pure_state(self):
        rng = np.random.default_rng(0)
        w = EnergyWindow(-1, 1)
        psi = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        a = np.zeros((3, 3), dtype=complex)
        a[:, 0] = psi
        rho = param_to_density(matrix_to_param(a), w)
        psi /= np.linalg.norm(psi)
        assert np.allclose(rho.array, np.outer(psi, psi.conj()), atol=1e-14)

    def test_scale_invariance(self):
        rng = np.random.default_rng(1)
        w = EnergyWindow(-1, 1)
        x = rng.standard_normal(18)
        base = param_to_density(x, w).array
        for c in (2.0, -3.7, 1e-4):
            assert np.max(np.abs(param_to_density(c * x, w).array - base)) < 1e-14

    def test_zero_vector_rejected(self):
        with pytest.raises(DegenerateInputError):
            param_to_density(np.zeros(18), EnergyWindow(-1, 1))

    def test_round_trip_layout(self):
        rng = np.random.default_rng(2)
        a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        assert np.allclose(param_to_matrix(matrix_to_param(a)), a)

    def test_always_physical(self):
        rng = np.random.default_rng(3)
        w = EnergyWindow(-2, 2)
        for _ in range(20):
            rho = param_to_density(rng.standard_normal(50), w)
            arr = rho.array
            assert np.max(np.abs(arr - arr.conj().T)) < 1e-12
            assert np.trace(arr).real == pytest.approx(1.0, abs=1e-12)
            assert np.linalg.eigvalsh(arr)[0] >= -1e-12


class TestLogPosterior:
    def test_flat_prior_equals_log_likelihood(self):
        model, _ = synthetic_model(seed=4)
        flat = PosteriorModel(model.data, state_window=model.state_window, prior="flat")
        rng = np.random.default_rng(5)
        for _ in range(5):
            x = rng.standard_normal(model.n_parameters)
            rho = param_to_density(x, model.state_window)
            assert flat.log_posterior(x) == pytest.approx(
                log_likelihood(model.data, rho), rel=1e-12
            )

    def test_pure_prior_is_gaussian(self):
        model = PosteriorModel(None, state_window=EnergyWindow(0, 1))
        rng = np.random.default_rng(6)
        for _ in range(5):
            x = rng.standard_normal(model.n_parameters)
            assert model.log_posterior(x) == pytest.approx(-0.5 * float(x @ x))

    def test_likelihood_term_scale_invariant(self):
        model, _ = synthetic_model(seed=7)
        rng = np.random.default_rng(8)
        x = rng.standard_normal(model.n_parameters)
        lik = model.log_posterior(x) + 0.5 * float(x @ x)
        lik2 = model.log_posterior(2 * x) + 0.5 * float((2 * x) @ (2 * x))
        assert lik2 == pytest.approx(lik, rel=1e-12)


class TestGradient:
    def test_matches_central_differences(self):
        model, _ = synthetic_model(seed=9)
        rng = np.random.default_rng(10)
        for _ in range(20):
            x = rng.standard_normal(model.n_parameters)
            grad = model.grad_log_posterior(x)
            fd = np.empty_like(grad)
            for i in range(x.size):
                h = 1e-5 * (1.0 + abs(x[i]))
                xp, xm = x.copy(), x.copy()
                xp[i] += h
                xm[i] -= h
                fd[i] = (model.log_posterior(xp) - model.log_posterior(xm)) / (2 * h)
            assert np.all(np.abs(grad - fd) <= 1e-5 * (1.0 + np.abs(grad)))

    def test_pure_prior_gradient(self):
        model = PosteriorModel(None, state_window=EnergyWindow(-1, 1))
        rng = np.random.default_rng(11)
        x = rng.standard_normal(model.n_parameters)
        assert np.allclose(model.grad_log_posterior(x), -x)

    def test_radial_direction_is_flat(self):
        model, _ = synthetic_model(seed=12)
        rng = np.random.default_rng(13)
        for _ in range(5):
            x = rng.standard_normal(model.n_parameters)
            grad_lik = model.grad_log_posterior(x) + x  # remove the prior part
            assert abs(grad_lik @ x) < 1e-8 * (1.0 + np.linalg.norm(grad_lik))


class TestFindMap:
    def test_pure_prior_map_is_origin(self):
        model = PosteriorModel(None, state_window=EnergyWindow(0, 1))
        result = find_map(model, seed=3)
        assert np.max(np.abs(result.x_map)) < 1e-6
        assert result.converged

    def test_restart_at_optimum_returns_immediately(self):
        model, _ = synthetic_model(seed=14)
        first = find_map(model, seed=0)
        again = find_map(model, init=first.x_map)
        assert again.iterations == 1
        assert np.allclose(again.x_map, first.x_map)

    def test_synthetic_round_trip(self):
        model, truth = synthetic_model(seed=15)
        result = find_map(model, seed=0)
        assert result.converged
        rho = param_to_density(result.x_map, model.state_window)
        assert fidelity(rho, truth) >= 0.99


class TestHessian:
    def test_pure_prior_hessian_is_identity(self):
        model = PosteriorModel(None, state_window=EnergyWindow(0, 1))
        h = hessian_at_map(model, np.zeros(model.n_parameters))
        assert np.allclose(h, np.eye(model.n_parameters), atol=1e-12)

    def test_analytic_matches_second_differences(self):
        model, _ = synthetic_model(seed=16, counts=500)
        rng = np.random.default_rng(17)
        x = rng.standard_normal(model.n_parameters)
        h_analytic = -model.hessian_log_posterior(x)
        assert np.max(np.abs(h_analytic - h_analytic.T)) < 1e-8
        n = x.size
        h_fd = np.empty((n, n))
        for i in range(n):
            step = 1e-5 * (1.0 + abs(x[i]))
            xp, xm = x.copy(), x.copy()
            xp[i] += step
            xm[i] -= step
            h_fd[:, i] = -(
                model.grad_log_posterior(xp) - model.grad_log_posterior(xm)
            ) / (2 * step)
        scale = max(1.0, np.max(np.abs(h_analytic)))
        assert np.max(np.abs(h_analytic - h_fd)) / scale < 1e-6

    def test_recovers_known_gaussian_curvature(self):
        # model exposing only the gradient: the finite-difference path must
        # reproduce the known precision matrix
        rng = np.random.default_rng(18)
        n = 6
        a = rng.standard_normal((n, n))
        cov = a @ a.T + n * np.eye(n)
        precision = np.linalg.inv(cov)
        mean = rng.standard_normal(n)

        class GradOnly:
            n_parameters = n
            scale_invariant = False

            def log_posterior(self, x):
                d = x - mean
                return -0.5 * float(d @ precision @ d)

            def grad_log_posterior(self, x):
                return -precision @ (x - mean)

        h = hessian_at_map(GradOnly(), mean.copy())
        eig_h = np.sort(np.linalg.eigvalsh(h))
        eig_p = np.sort(np.linalg.eigvalsh(precision))
        assert np.max(np.abs(eig_h - eig_p) / eig_p) < 1e-3

    def test_jitter_floors_spectrum(self):
        mean = np.zeros(3)
        precision = np.diag([1.0, 1e-12, 2.0])

        class Gm(GaussianModel):
            pass

        h = hessian_at_map(Gm(mean, precision), mean)
        eigs = np.linalg.eigvalsh(h)
        assert eigs[0] >= 1e-8 * eigs[-1] * 0.99
        np.linalg.cholesky(h)


class TestPcnProposal:
    def test_beta_one_forgets_current(self):
        rng_a = np.random.default_rng(0)
        rng_b = np.random.default_rng(0)
        mres = gaussian_map_result(np.array([1.0, -2.0]), np.diag([4.0, 9.0]))
        a = pcn_propose(np.array([55.0, 55.0]), mres, 1.0, rng_a)
        b = pcn_propose(np.array([-3.0, 0.1]), mres, 1.0, rng_b)
        assert np.allclose(a, b)

    def test_beta_validation(self):
        mres = gaussian_map_result(np.zeros(2), np.eye(2))
        rng = np.random.default_rng(1)
        for bad in (0.0, -0.2, 1.5):
            with pytest.raises(ValueError):
                pcn_propose(np.zeros(2), mres, bad, rng)

    def test_moments(self):
        rng = np.random.default_rng(2)
        n = 4
        a = rng.standard_normal((n, n))
        precision = a @ a.T + n * np.eye(n)
        cov = np.linalg.inv(precision)
        mres = gaussian_map_result(rng.standard_normal(n), precision)
        current = rng.standard_normal(n)
        beta = 0.6
        draws = np.array([pcn_propose(current, mres, beta, rng) for _ in range(100_000)])
        expected_mean = mres.x_map + np.sqrt(1 - beta**2) * (current - mres.x_map)
        se = beta * np.sqrt(np.diag(cov) / draws.shape[0])
        assert np.all(np.abs(draws.mean(axis=0) - expected_mean) < 4 * se)
        emp_cov = np.cov(draws.T)
        target_cov = beta**2 * cov
        rel = np.linalg.norm(emp_cov - target_cov) / np.linalg.norm(target_cov)
        assert rel < 0.05


class TestMhStep:
    def test_self_proposal_always_accepted(self, monkeypatch):
        import fetomo.bayes as bayes_mod

        mres = gaussian_map_result(np.zeros(2), np.eye(2))
        model = GaussianModel(np.zeros(2), np.eye(2))
        monkeypatch.setattr(
            bayes_mod, "pcn_propose", lambda current, m, b, rng: np.asarray(current, float)
        )
        rng = np.random.default_rng(3)
        current = np.array([0.3, -1.2])
        for _ in range(10):
            step = bayes_mod.mh_step(model, mres, 0.5, current, rng)
            assert step.accepted
            assert np.allclose(step.state, current)

    def test_exact_on_gaussian_target(self):
        rng = np.random.default_rng(4)
        n = 5
        a = rng.standard_normal((n, n))
        precision = a @ a.T + n * np.eye(n)
        mres = gaussian_map_result(rng.standard_normal(n), precision)
        model = GaussianModel(mres.x_map, precision)
        x = mres.gaussian_draw(rng)
        lp = model.log_posterior(x)
        accepted = 0
        for _ in range(2000):
            x, ok, lp = mh_step(model, mres, 0.3, x, rng, lp)
            accepted += ok
        assert accepted == 2000

    def test_forbidden_region_rejected(self):
        class HalfPlane:
            n_parameters = 2
            scale_invariant = False

            def log_posterior(self, x):
                if x[0] < 0:
                    return -1e308
                return -0.5 * float(x @ x)

        mres = gaussian_map_result(np.array([3.0, 0.0]), np.eye(2))
        model = HalfPlane()
        rng = np.random.default_rng(5)
        x = np.array([3.0, 0.0])
        lp = model.log_posterior(x)
        for _ in range(500):
            x, ok, lp = mh_step(model, mres, 1.0, x, rng, lp)
            assert x[0] >= 0

    def test_nan_posterior_rejected(self):
        class NanModel:
            n_parameters = 2
            scale_invariant = False

            def log_posterior(self, x):
                return float("nan")

        mres = gaussian_map_result(np.zeros(2), np.eye(2))
        rng = np.random.default_rng(6)
        step = mh_step(NanModel(), mres, 0.5, np.array([1.0, 1.0]), rng, -1.0)
        assert not step.accepted
        assert np.allclose(step.state, [1.0, 1.0])


class TestRunChains:
    def test_distinct_seeds_distinct_paths(self):
        model = GaussianModel(np.zeros(3), np.eye(3))
        mres = gaussian_map_result(np.zeros(3), np.eye(3))
        records = run_chains(model, mres, beta=0.5, n_chains=3, n_samples=200, thinning=2,
                             seeds=[1, 2, 3])
        assert not np.allclose(records[0].samples, records[1].samples)
        assert not np.allclose(records[1].samples, records[2].samples)

    def test_seed_determinism_and_replay(self):
        import fetomo.bayes as bayes_mod

        model = GaussianModel(np.ones(2), np.diag([2.0, 5.0]))
        mres = gaussian_map_result(np.ones(2), np.diag([2.0, 5.0]))
        seed, n_samples, thinning, beta = 9, 300, 3, 0.4
        (record,) = run_chains(model, mres, beta=beta, n_chains=1,
                               n_samples=n_samples, thinning=thinning, seeds=[seed])
        rng = np.random.default_rng(seed)
        x = mres.gaussian_draw(rng)
        lp = model.log_posterior(x)
        accepted = 0
        kept = []
        for step_idx in range(1, n_samples + 1):
            x, ok, lp = bayes_mod.mh_step(model, mres, beta, x, rng, lp)
            accepted += ok
            if step_idx % thinning == 0:
                kept.append(x)
        assert accepted == record.acceptance_count
        assert record.proposal_count == n_samples
        assert np.allclose(np.array(kept), record.samples)

    def test_duplicate_seeds_rejected(self):
        model = GaussianModel(np.zeros(2), np.eye(2))
        mres = gaussian_map_result(np.zeros(2), np.eye(2))
        with pytest.raises(ValueError):
            run_chains(model, mres, n_chains=2, n_samples=10, seeds=[1, 1])

    def test_pooled_mean_on_gaussian_target(self):
        rng = np.random.default_rng(7)
        n = 4
        a = rng.standard_normal((n, n))
        precision = a @ a.T + n * np.eye(n)
        cov = np.linalg.inv(precision)
        mean = rng.standard_normal(n)
        model = GaussianModel(mean, precision)
        mres = gaussian_map_result(mean, precision)
        beta = 0.5
        records = run_chains(model, mres, beta=beta, n_chains=4, n_samples=20_000,
                             thinning=10, seeds=[11, 12, 13, 14])
        pooled = np.concatenate([r.samples for r in records])
        # AR(1) inflation (1+r)/(1-r) with r = sqrt(1-beta^2)^thinning
        r = np.sqrt(1 - beta**2) ** 10
        inflation = (1 + r) / (1 - r)
        se = np.sqrt(np.diag(cov) * inflation / pooled.shape[0])
        assert np.all(np.abs(pooled.mean(axis=0) - mean) < 4 * se)

    def test_stored_samples_map_to_physical_states(self):
        model, _ = synthetic_model(seed=19, counts=300, n_phases=10)
        mres = find_map(model, seed=0)
        (record,) = run_chains(model, mres, beta=0.3, n_chains=1, n_samples=400,
                               thinning=4, seeds=[0])
        assert record.window == model.state_window
        for x in record.samples[::13]:
            rho = param_to_density(x, model.state_window)
            arr = rho.array
            assert np.linalg.eigvalsh(arr)[0] >= -1e-12
            assert np.trace(arr).real == pytest.approx(1.0, abs=1e-12)

    def test_detailed_balance_histogram(self):
        # exact sampler on a two-parameter Gaussian: chi-squared test of the
        # whitened two-dimensional histogram over a million thinned samples
        rng = np.random.default_rng(8)
        precision = np.array([[2.0, 0.6], [0.6, 1.0]])
        mean = np.array([0.5, -1.0])
        model = GaussianModel(mean, precision)
        mres = gaussian_map_result(mean, precision)
        records = run_chains(model, mres, beta=1.0, n_chains=2, n_samples=1_000_000,
                             thinning=1, seeds=[21, 22])
        pooled = np.concatenate([r.samples for r in records])
        z = (pooled - mean) @ mres.chol_lower  # whitened: iid standard normal
        edges = scipy.stats.norm.ppf(np.linspace(0.0, 1.0, 11))
        hist, _, _ = np.histogram2d(z[:, 0], z[:, 1], bins=[edges, edges])
        expected = pooled.shape[0] / 100.0
        chi2 = float(np.sum((hist - expected) ** 2 / expected))
        p_value = 1.0 - scipy.stats.chi2.cdf(chi2, df=99)
        assert p_value > 0.01
