"""Conditional-sampler oracles: conjugate closed forms, quadrature, brute-force
Gaussian posteriors, and single-block Geweke alternations."""

import numpy as np
import pytest
from scipy import integrate, stats

from skewmsv import samplers
from skewmsv.engine import _draw_prior_context, _redraw_data, prior_marginal_cdfs
from skewmsv.msv_core import ModelConfig, PriorSet, row_slices
from skewmsv.samplers import (
    SweepContext,
    beta_posterior,
    rng_streams,
    sample_beta,
    sample_cov_hyper,
    sample_cov_states,
    sample_kappa,
    sample_mixing_path,
    sample_sv_hyper,
    sample_volatility_path,
    sweep,
)


def make_ctx(seed=11, k=2, T=20, variant="CSS", strip=False):
    cfg = ModelConfig(k=k, variant=variant, seed=seed, burn_in=0, draws=1)
    rng = np.random.default_rng(seed)
    ctx = _draw_prior_context(cfg, rng, T=T)
    if strip:
        ctx.beta[:] = 0.0
        ctx.rho[:] = 0.0
        _redraw_data(ctx, rng)
    return ctx, rng


class TestMixingPath:
    def test_closed_form_at_beta_rho_zero(self):
        """beta=0, rho=0: conditional is IG((nu+1)/2, (nu + ytilde^2 e^-h)/2)."""
        ctx, _ = make_ctx(T=4000, k=1, variant="S")
        i = 0
        ctx.beta[i] = 0.0
        ctx.rho[i] = 0.0
        ctx.nu[i] = 12.0
        # identical site parameters so one sweep yields T iid draws
        ctx.h[i] = -9.0
        ctx.y[i] = 0.004
        sample_mixing_path(i, ctx)
        chi = 12.0 + 0.004**2 * np.exp(9.0)
        cdf = lambda q: stats.invgamma.cdf(q, (12.0 + 1) / 2.0, scale=chi / 2.0)
        assert stats.kstest(ctx.z[i], cdf).pvalue > 0.01

    def test_block_geweke_recovers_prior(self):
        """Alternating z-draw and data-redraw keeps z at its IG(nu/2,nu/2) prior."""
        ctx, rng = make_ctx(T=30, k=2)
        i = 0
        nu = ctx.nu[i]
        zs = []
        for s in range(3000):
            sample_mixing_path(i, ctx)
            _redraw_data(ctx, rng)
            zs.append(ctx.z[i, ::7].copy())
        zs = np.array(zs)[200::3].ravel()
        cdf = lambda q: stats.invgamma.cdf(q, nu / 2.0, scale=nu / 2.0)
        assert stats.kstest(zs, cdf).pvalue > 0.01

    def test_degenerate_guard(self):
        ctx, _ = make_ctx(T=10, k=1, variant="S")
        ctx.nu[0] = np.nan
        with pytest.raises(FloatingPointError):
            sample_mixing_path(0, ctx)


class TestVolatilityPath:
    @staticmethod
    def _fast_mixing_ctx(T, seed):
        """Loose AR(1) values so the alternation decorrelates in a few sweeps
        (tight baseline priors make the chain creep, which only starves the
        KS test of effective samples without changing its target law)."""
        ctx, rng = make_ctx(T=T, k=1, variant="S", seed=seed)
        ctx.mu[:] = -1.0
        ctx.phi[:] = 0.3
        ctx.sigma[:] = 0.8
        ctx.rho[:] = -0.4
        ctx.nu[:] = 8.0
        ctx.beta[:] = -0.5
        # restart the joint at the new parameter values
        sd = ctx.sigma[0] / np.sqrt(1 - ctx.phi[0] ** 2)
        ctx.h[:] = ctx.mu[0] + sd * rng.standard_normal((1, T))
        ctx.h_next[:] = ctx.mu[0] + ctx.phi[0] * (ctx.h[0, -1] - ctx.mu[0]) \
            + ctx.sigma[0] * rng.standard_normal()
        _redraw_data(ctx, rng)
        return ctx, rng

    def test_block_geweke_recovers_prior_T1(self):
        """T=1 alternation: h_1 marginal equals the AR(1) stationary prior."""
        ctx, rng = self._fast_mixing_ctx(T=1, seed=7)
        i = 0
        mu, phi, sig = ctx.mu[i], ctx.phi[i], ctx.sigma[i]
        hs = []
        for s in range(30000):
            sample_volatility_path(i, ctx)
            _redraw_data(ctx, rng)
            hs.append(ctx.h[i, 0])
        x = np.array(hs)[1000::10]
        sd = sig / np.sqrt(1.0 - phi**2)
        assert stats.kstest(x, lambda q: stats.norm.cdf(q, mu, sd)).pvalue > 0.01

    def test_block_geweke_recovers_prior_T8(self):
        ctx, rng = self._fast_mixing_ctx(T=8, seed=9)
        i = 0
        mu, phi, sig = ctx.mu[i], ctx.phi[i], ctx.sigma[i]
        hs = []
        for s in range(30000):
            sample_volatility_path(i, ctx)
            _redraw_data(ctx, rng)
            hs.append(ctx.h[i, [0, 4, 7]].copy())
        x = np.array(hs)[1000::10]
        sd = sig / np.sqrt(1.0 - phi**2)
        for col in x.T:
            assert stats.kstest(col, lambda q: stats.norm.cdf(q, mu, sd)).pvalue > 0.01

    def test_path_recovery_on_simulated_data(self):
        """Posterior mean h path tracks the truth on simulated data
        (T=1000, sigma=0.05, phi=0.995; other parameters held at truth)."""
        from skewmsv.simulate import simulate_from_params

        rng = np.random.default_rng(24)
        ones = np.ones(1)
        sim = simulate_from_params(
            T=1000, rng=rng, mu=-9.0 * ones, phi=0.995 * ones, sigma=0.05 * ones,
            rho=-0.5 * ones, nu=20.0 * ones, beta=-1.0 * ones,
            mu_a=np.zeros(0), phi_a=np.zeros(0), v_a=np.zeros(0), a_zero=True)
        cfg = ModelConfig(k=1, variant="S", seed=99, burn_in=0, draws=1)
        ctx = SweepContext(
            config=cfg, y=sim["y"], h=np.full((1, 1000), -9.0),
            h_next=np.array([-9.0]), z=np.full((1, 1000), 20.0 / 18.0),
            a=np.zeros((0, 1000)), mu=-9.0 * ones, phi=0.995 * ones,
            sigma=0.05 * ones, rho=-0.5 * ones, nu=20.0 * ones, beta=-1.0 * ones,
            included=np.array([True]), mu_a=np.zeros(0), phi_a=np.zeros(0),
            v_a=np.zeros(0), kappa=1.0, rngs=rng_streams(99, 1, 0))
        ctx.h_block_len = 500
        acc = np.zeros(1000)
        n = 0
        for s in range(1500):
            sample_mixing_path(0, ctx)
            sample_volatility_path(0, ctx)
            if s >= 400:
                acc += ctx.h[0]
                n += 1
        post_mean = acc / n
        corr = np.corrcoef(post_mean, sim["h"][0])[0, 1]
        assert corr > 0.9, f"h path correlation {corr}"

    def test_single_move_kernel_matches_block_kernel(self):
        """Both h kernels target the same conditional: short alternation runs
        agree in distribution (two-sample KS on recorded sites)."""
        recs = {}
        for method in ("block", "single"):
            ctx, rng = self._fast_mixing_ctx(T=8, seed=33)
            ctx.h_method = method
            hs = []
            for s in range(15000):
                sample_volatility_path(0, ctx)
                _redraw_data(ctx, rng)
                hs.append(ctx.h[0, 3])
            recs[method] = np.array(hs)[1000::10]
        res = stats.ks_2samp(recs["block"], recs["single"])
        assert res.pvalue > 0.01

    def test_interweave_preserves_standardized_path(self):
        """The ASIS move rescales the path exactly: (h - mu)/sigma is invariant."""
        ctx, _ = make_ctx(seed=17, k=2, T=40)
        before = (np.concatenate([ctx.h[0], [ctx.h_next[0]]]) - ctx.mu[0]) / ctx.sigma[0]
        for _ in range(50):
            samplers.interweave_sv_level(0, ctx)
        after = (np.concatenate([ctx.h[0], [ctx.h_next[0]]]) - ctx.mu[0]) / ctx.sigma[0]
        assert np.max(np.abs(before - after)) < 1e-8

    def test_interweave_cov_preserves_standardized_states(self):
        ctx, _ = make_ctx(seed=18, k=2, T=40)
        before = (ctx.a[0] - ctx.mu_a[0]) / ctx.v_a[0]
        moved = False
        for _ in range(80):
            v_old = ctx.v_a[0]
            samplers.interweave_cov_block(0, ctx)
            moved = moved or ctx.v_a[0] != v_old
        after = (ctx.a[0] - ctx.mu_a[0]) / ctx.v_a[0]
        # atilde is preserved up to the sign flips absorbed into v_a
        assert np.max(np.abs(np.abs(before) - np.abs(after))) < 1e-8


class TestCovStates:
    def test_brute_force_gaussian_oracle(self):
        """FFBS draws match the exact joint Gaussian posterior (k=3 exercises
        the dim-1 and dim-2 block paths)."""
        ctx, _ = make_ctx(seed=5, k=3, T=12, strip=True)
        T = ctx.T
        sls = row_slices(3)
        exact = {}
        for b, sl in enumerate(sls):
            i = b + 1
            dim = sl.stop - sl.start
            mu_a, phi, v = ctx.mu_a[sl], ctx.phi_a[sl], ctx.v_a[sl]
            idx = np.arange(T)
            Sig = np.zeros((dim * T, dim * T))
            for d in range(dim):
                Sig[d * T:(d + 1) * T, d * T:(d + 1) * T] = (
                    v[d] ** 2 / (1 - phi[d] ** 2)) * phi[d] ** np.abs(idx[:, None] - idx[None, :])
            mvec = np.repeat(mu_a, T)
            X = ctx.y[:i] * np.exp(-ctx.h[i] / 2.0)[None, :]
            R = ctx.z[i]
            yh = ctx.y[i] * np.exp(-ctx.h[i] / 2.0)
            H = np.zeros((T, dim * T))
            for t in range(T):
                for d in range(dim):
                    H[t, d * T + t] = X[d, t]
            Qp = np.linalg.inv(Sig) + H.T @ np.diag(1.0 / R) @ H
            Sp = np.linalg.inv(Qp)
            mp = Sp @ (np.linalg.inv(Sig) @ mvec + H.T @ (yh / R))
            exact[b] = (mp.reshape(dim, T), np.sqrt(np.diag(Sp)).reshape(dim, T))
        M = 20000
        draws = np.empty((M, 3, T))
        for s in range(M):
            sample_cov_states(ctx)
            draws[s] = ctx.a
        for b, sl in enumerate(sls):
            m_exact, sd_exact = exact[b]
            z = (draws[:, sl, :].mean(axis=0) - m_exact) / (sd_exact / np.sqrt(M))
            assert np.abs(z).max() < 4.0, f"block {b}: max z {np.abs(z).max()}"
            ratio = draws[:, sl, :].std(axis=0) / sd_exact
            assert np.all((ratio > 0.95) & (ratio < 1.05))

    def test_degenerate_state_noise_pins_path(self):
        ctx, _ = make_ctx(seed=3, k=2, T=40)
        ctx.mu_a[:] = 0.7
        ctx.v_a[:] = 1e-6
        for _ in range(5):
            sample_cov_states(ctx)
        assert np.var(ctx.a[0]) < 1e-10
        assert abs(ctx.a[0].mean() - 0.7) < 1e-2

    def test_huge_obs_variance_recovers_prior(self):
        """z -> infinity (with beta = rho = 0 so no mean offset survives) makes
        the observation uninformative; draws follow the AR(1) state prior."""
        ctx, rng = make_ctx(seed=13, k=2, T=25)
        ctx.beta[:] = 0.0
        ctx.rho[:] = 0.0
        ctx.z[:] = 1e12
        mu_a, phi_a, v_a = ctx.mu_a[0], ctx.phi_a[0], ctx.v_a[0]
        xs = []
        for s in range(6000):
            sample_cov_states(ctx)
            xs.append(ctx.a[0, [0, 12, 24]].copy())
        x = np.array(xs)[::3]
        sd = v_a / np.sqrt(1 - phi_a**2)
        for col in x.T:
            assert stats.kstest(col, lambda q: stats.norm.cdf(q, mu_a, sd)).pvalue > 0.01

    def test_requires_k2(self):
        ctx, _ = make_ctx(k=1, T=10, variant="S")
        with pytest.raises(ValueError):
            sample_cov_states(ctx)


class TestBeta:
    def _fixed_tiny_ctx(self, kappa=0.4, seed=2):
        ctx, _ = make_ctx(seed=seed, k=1, T=5, variant="SS")
        ctx.kappa = kappa
        return ctx

    def test_kappa_one_matches_conjugate_regression(self):
        """kappa=1 (variants S/CS): the draw is the normal Bayes regression
        posterior, checked against an independently computed closed form."""
        ctx, _ = make_ctx(seed=4, k=1, T=50, variant="S")
        ctx.kappa = 1.0
        pri = ctx.config.priors
        # independent oracle: weighted least squares on the residual system
        i = 0
        c = ctx.nu[i] / (ctx.nu[i] - 2.0)
        z = ctx.z[i]
        sbar2 = 1.0 - ctx.rho[i] ** 2
        wtil = ctx.ytilde()[i] * np.exp(-ctx.h[i] / 2.0)
        r = wtil - np.sqrt(z) * (ctx.rho[i] / ctx.sigma[i]) * ctx.eta()[i]
        x = z - c
        w = 1.0 / (z * sbar2)
        prec = 1.0 / pri.beta_slab_var + np.sum(x * x * w)
        mean = (pri.beta_slab_mean / pri.beta_slab_var + np.sum(x * r * w)) / prec
        draws = []
        for _ in range(20000):
            b, inc = sample_beta(i, ctx)
            assert inc
            draws.append(b)
        cdf = lambda q: stats.norm.cdf(q, mean, 1.0 / np.sqrt(prec))
        assert stats.kstest(np.array(draws), cdf).pvalue > 0.01

    def test_kappa_zero_always_spike(self):
        ctx = self._fixed_tiny_ctx(kappa=0.0)
        for _ in range(50):
            b, inc = sample_beta(0, ctx)
            assert b == 0.0 and not inc

    def test_quadrature_inclusion_probability(self):
        """kappa_hat from the sampler equals the ratio of numerically integrated
        marginal likelihoods on a tiny fixed-state instance."""
        ctx = self._fixed_tiny_ctx(kappa=0.4, seed=12)
        i = 0
        pri = ctx.config.priors
        c = ctx.nu[i] / (ctx.nu[i] - 2.0)
        z = ctx.z[i]
        sbar2 = 1.0 - ctx.rho[i] ** 2
        wtil = ctx.ytilde()[i] * np.exp(-ctx.h[i] / 2.0)
        r = wtil - np.sqrt(z) * (ctx.rho[i] / ctx.sigma[i]) * ctx.eta()[i]
        x = z - c
        noise_var = z * sbar2

        def lik(b):
            return np.exp(-0.5 * np.sum((r - b * x) ** 2 / noise_var))

        ml_slab, _ = integrate.quad(
            lambda b: lik(b) * stats.norm.pdf(b, pri.beta_slab_mean,
                                              np.sqrt(pri.beta_slab_var)),
            -60, 60, limit=400)
        ml_spike = lik(0.0)
        kap = ctx.kappa
        kappa_quad = kap * ml_slab / (kap * ml_slab + (1 - kap) * ml_spike)
        _, _, kappa_hat = beta_posterior(i, ctx)
        assert kappa_hat == pytest.approx(kappa_quad, abs=1e-6)

    def test_shrinkage_time_exchangeable(self):
        """Permuting time indices leaves the inclusion probability unchanged."""
        ctx = self._fixed_tiny_ctx(kappa=0.3, seed=8)
        _, _, k1 = beta_posterior(0, ctx)
        perm = np.array([3, 0, 4, 1, 2])
        ctx.y = ctx.y[:, perm]
        ctx.h = ctx.h[:, perm]
        ctx.z = ctx.z[:, perm]
        # eta couples consecutive h's; neutralize leverage so the check is exact
        ctx.rho[0] = 0.0
        _, _, k_ref = beta_posterior(0, ctx)
        ctx.y = ctx.y[:, np.argsort(perm)]
        ctx.h = ctx.h[:, np.argsort(perm)]
        ctx.z = ctx.z[:, np.argsort(perm)]
        _, _, k_back = beta_posterior(0, ctx)
        assert k_ref == pytest.approx(k_back, rel=1e-12)


def _k5_ctx():
    cfg = ModelConfig(k=5, variant="CSS", seed=1, burn_in=0, draws=1,
                      priors=PriorSet(kappa_a=2.0, kappa_b=2.0))
    ones = np.ones(5)
    return SweepContext(
        config=cfg, y=np.zeros((5, 4)), h=np.zeros((5, 4)), h_next=np.zeros(5),
        z=np.ones((5, 4)), a=np.zeros((10, 4)), mu=-9 * ones, phi=0.9 * ones,
        sigma=0.1 * ones, rho=0.0 * ones, nu=20.0 * ones, beta=np.zeros(5),
        included=np.zeros(5, dtype=bool), mu_a=np.zeros(10), phi_a=0.9 * np.ones(10),
        v_a=0.05 * np.ones(10), kappa=0.5, rngs=rng_streams(1, 5, 10))


class TestKappa:
    def test_beta_binomial_posterior(self):
        ctx = _k5_ctx()
        ctx.included = np.array([True, False, False, False, False])
        draws = np.array([sample_kappa(ctx) for _ in range(30000)])
        assert stats.kstest(draws, lambda q: stats.beta.cdf(q, 3.0, 6.0)).pvalue > 0.01

    def test_all_included_limit(self):
        ctx, _ = make_ctx(seed=6, k=2, T=10)
        ctx.included = np.array([True, True])
        pri = ctx.config.priors
        draws = np.array([sample_kappa(ctx) for _ in range(30000)])
        cdf = lambda q: stats.beta.cdf(q, pri.kappa_a + 2, pri.kappa_b)
        assert stats.kstest(draws, cdf).pvalue > 0.01

    def test_posterior_mean_moments(self):
        ctx, _ = make_ctx(seed=6, k=2, T=10)
        ctx.included = np.array([True, False])
        pri = ctx.config.priors
        draws = np.array([sample_kappa(ctx) for _ in range(10**5)])
        target = (pri.kappa_a + 1) / (pri.kappa_a + pri.kappa_b + 2)
        se = draws.std(ddof=1) / np.sqrt(draws.size)
        assert abs(draws.mean() - target) < 3 * se


class TestSvHyper:
    def test_mu_conjugate_closed_form(self):
        """rho=0: the mu draw matches the independently derived conjugate normal."""
        ctx, _ = make_ctx(seed=14, k=1, T=60, variant="S", strip=True)
        i = 0
        pri = ctx.config.priors
        phi, sig = ctx.phi[i], ctx.sigma[i]
        h, h_next = ctx.h[i], ctx.h_next[i]
        h_fwd = np.concatenate([h[1:], [h_next]])
        T = h.size
        prec = (1.0 / pri.mu_var + (1.0 - phi**2) / sig**2
                + T * (1.0 - phi) ** 2 / (sig**2))
        mean = (pri.mu_mean / pri.mu_var + h[0] * (1.0 - phi**2) / sig**2
                + (1.0 - phi) * np.sum(h_fwd - phi * h) / sig**2) / prec
        keep = (ctx.mu.copy(), ctx.phi.copy(), ctx.sigma.copy(), ctx.rho.copy(),
                ctx.nu.copy())
        draws = []
        for _ in range(20000):
            ctx.mu[:], ctx.phi[:], ctx.sigma[:], ctx.rho[:], ctx.nu[:] = keep
            sample_sv_hyper(i, ctx)
            draws.append(ctx.mu[i])
        cdf = lambda q: stats.norm.cdf(q, mean, 1.0 / np.sqrt(prec))
        assert stats.kstest(np.array(draws), cdf).pvalue > 0.01

    def test_T0_prior_recovery(self):
        cfg = ModelConfig(k=1, variant="S", seed=2, burn_in=0, draws=1)
        ctx = SweepContext(
            config=cfg, y=np.zeros((1, 0)), h=np.zeros((1, 0)),
            h_next=np.zeros(1), z=np.ones((1, 0)), a=np.zeros((0, 0)),
            mu=np.array([-10.0]), phi=np.array([0.9]), sigma=np.array([0.1]),
            rho=np.array([0.0]), nu=np.array([20.0]), beta=np.zeros(1),
            included=np.array([True]), mu_a=np.zeros(0), phi_a=np.zeros(0),
            v_a=np.zeros(0), kappa=1.0, rngs=rng_streams(2, 1, 0))
        cdfs = prior_marginal_cdfs(cfg.priors)
        rec = {nm: [] for nm in ("mu", "phi", "sigma", "rho", "nu")}
        for _ in range(20000):
            sample_sv_hyper(0, ctx)
            for nm, arr in (("mu", ctx.mu), ("phi", ctx.phi), ("sigma", ctx.sigma),
                            ("rho", ctx.rho), ("nu", ctx.nu)):
                rec[nm].append(arr[0])
        for nm, vals in rec.items():
            p = stats.kstest(np.array(vals), cdfs[nm]).pvalue
            assert p > 0.01, f"{nm}: KS p={p}"


class TestCovHyper:
    def test_mu_a_conjugate_matches_quadrature(self):
        ctx, _ = make_ctx(seed=8, k=2, T=20)
        a = ctx.a[0]
        phi, v = ctx.phi_a[0], ctx.v_a[0]
        pri = ctx.config.priors

        def logpost(mu):
            eta = a[1:] - mu - phi * (a[:-1] - mu)
            return (-0.5 * (1 - phi**2) * (a[0] - mu) ** 2 / v**2
                    - 0.5 * np.sum(eta**2) / v**2
                    - 0.5 * (mu - pri.mu_a_mean) ** 2 / pri.mu_a_var)

        grid = np.linspace(-4, 4, 8001)
        w = np.exp([logpost(m) for m in grid])
        w /= w.sum()
        mean = float(np.sum(grid * w))
        sd = float(np.sqrt(np.sum(grid**2 * w) - mean**2))
        keep = (ctx.mu_a.copy(), ctx.phi_a.copy(), ctx.v_a.copy())
        draws = []
        for _ in range(20000):
            ctx.mu_a[:], ctx.phi_a[:], ctx.v_a[:] = keep
            sample_cov_hyper(0, ctx)
            draws.append(ctx.mu_a[0])
        assert stats.kstest(np.array(draws),
                            lambda q: stats.norm.cdf(q, mean, sd)).pvalue > 0.01

    def test_T0_prior_recovery(self):
        cfg = ModelConfig(k=2, variant="CSS", seed=2, burn_in=0, draws=1)
        ctx = SweepContext(
            config=cfg, y=np.zeros((2, 0)), h=np.zeros((2, 0)),
            h_next=np.zeros(2), z=np.ones((2, 0)), a=np.zeros((1, 0)),
            mu=np.full(2, -10.0), phi=np.full(2, 0.9), sigma=np.full(2, 0.1),
            rho=np.zeros(2), nu=np.full(2, 20.0), beta=np.zeros(2),
            included=np.array([True, True]), mu_a=np.zeros(1),
            phi_a=np.array([0.9]), v_a=np.array([0.05]), kappa=0.5,
            rngs=rng_streams(2, 2, 1))
        cdfs = prior_marginal_cdfs(cfg.priors)
        rec = {"mu_a": [], "phi_a": [], "v_a": []}
        for _ in range(20000):
            sample_cov_hyper(0, ctx)
            rec["mu_a"].append(ctx.mu_a[0])
            rec["phi_a"].append(ctx.phi_a[0])
            rec["v_a"].append(ctx.v_a[0])
        for nm, vals in rec.items():
            p = stats.kstest(np.array(vals), cdfs[nm]).pvalue
            assert p > 0.01, f"{nm}: KS p={p}"

    def test_v_a_recovery_experiment(self):
        """Posterior concentrates near the truth on long simulated AR(1) paths."""
        rng = np.random.default_rng(31)
        covered = 0
        reps = 12
        for rep in range(reps):
            true_mu, true_phi, true_v = 0.3, 0.95, 0.1
            T = 2000
            a = np.empty(T)
            a[0] = true_mu + true_v / np.sqrt(1 - true_phi**2) * rng.standard_normal()
            for t in range(1, T):
                a[t] = true_mu + true_phi * (a[t - 1] - true_mu) + true_v * rng.standard_normal()
            ctx, _ = make_ctx(seed=40 + rep, k=2, T=T)
            ctx.a[0] = a
            draws = []
            for s in range(800):
                sample_cov_hyper(0, ctx)
                if s >= 200:
                    draws.append(ctx.v_a[0])
            lo, hi = np.percentile(draws, [5, 95])
            covered += lo <= true_v <= hi
        assert covered >= 0.8 * reps - 1  # 90% CI coverage at >= ~80%


class TestSweepGating:
    def test_variant_C_keeps_beta_zero(self):
        ctx, _ = make_ctx(seed=3, k=2, T=15, variant="C")
        assert np.all(ctx.beta == 0.0)
        for _ in range(10):
            sweep(ctx)
        assert np.all(ctx.beta == 0.0)

    def test_variant_S_keeps_a_zero(self):
        ctx, _ = make_ctx(seed=3, k=2, T=15, variant="S")
        assert np.all(ctx.a == 0.0)
        for _ in range(10):
            sweep(ctx)
        assert np.all(ctx.a == 0.0)
        assert ctx.kappa == 1.0

    def test_acceptance_ratios_finite(self):
        ctx, _ = make_ctx(seed=19, k=2, T=30)
        for _ in range(50):
            sweep(ctx)
        for key in ("phi", "sigrho", "nu", "h", "z"):
            assert ctx.tries[key] > 0
            assert 0.0 <= ctx.accepts[key] <= ctx.tries[key]
