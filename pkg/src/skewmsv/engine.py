"""MCMC orchestration: sweeps, burn-in, thinning, storage, diagnostics.

Reproducibility contract: identical (config, data, seed) give bit-identical
draws, independent of the worker count, because every sampler block owns a
counter-based RNG stream keyed by (block, series index).
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import samplers
from .msv_core import ModelConfig, PriorSet
from .samplers import SweepContext, rng_streams, sweep

STORE_SCHEMA = 1
_FLOAT_FMT = "%.17g"


# ---------------------------------------------------------------------------
# draw containers

@dataclass
class StateSummary:
    """Per-time posterior summaries of one latent state family."""

    mean: np.ndarray
    sd: np.ndarray
    q05: np.ndarray
    q50: np.ndarray
    q95: np.ndarray


class _PathAccumulator:
    """Streaming mean/sd over all thinned paths; quantiles from a capped,
    deterministically strided subset (stride doubles when the cap is hit)."""

    def __init__(self, shape: tuple[int, int], max_keep: int = 512):
        self.n = 0
        self.s1 = np.zeros(shape)
        self.s2 = np.zeros(shape)
        self.kept: list[np.ndarray] = []
        self.max_keep = max_keep
        self.stride = 1
        self._since = 0

    def add(self, x: np.ndarray) -> None:
        self.n += 1
        self.s1 += x
        self.s2 += x * x
        if self._since % self.stride == 0:
            self.kept.append(x.copy())
            if len(self.kept) > self.max_keep:
                self.kept = self.kept[::2]
                self.stride *= 2
        self._since += 1

    def summary(self) -> StateSummary:
        if self.n == 0:
            z = np.zeros(self.s1.shape)
            return StateSummary(z, z, z, z, z)
        mean = self.s1 / self.n
        var = np.maximum(self.s2 / self.n - mean**2, 0.0)
        stack = np.stack(self.kept)
        q05, q50, q95 = np.percentile(stack, [5, 50, 95], axis=0)
        return StateSummary(mean, np.sqrt(var), q05, q50, q95)


@dataclass
class McmcDraws:
    """Post-burn-in draws (thinned) plus state summaries and provenance."""

    config: ModelConfig
    seed: int
    names: list[str]
    T: int
    mu: np.ndarray
    phi: np.ndarray
    sigma: np.ndarray
    rho: np.ndarray
    nu: np.ndarray
    beta: np.ndarray
    included: np.ndarray
    kappa: np.ndarray
    mu_a: np.ndarray
    phi_a: np.ndarray
    v_a: np.ndarray
    h_next: np.ndarray
    a_last: np.ndarray
    h_summary: StateSummary
    a_summary: StateSummary
    accept_rates: dict
    elapsed_sec: float

    @property
    def n_draws(self) -> int:
        return self.mu.shape[0]

    def scalar_series(self) -> dict[str, np.ndarray]:
        """Flat name -> chain map used by diagnostics and the Geweke report."""
        out = {}
        k = self.mu.shape[1]
        for name in ("mu", "phi", "sigma", "rho", "nu", "beta"):
            arr = getattr(self, name)
            for i in range(k):
                out[f"{name}[{i}]"] = arr[:, i]
        if self.config.has_sparsity:
            out["kappa"] = self.kappa
        for name in ("mu_a", "phi_a", "v_a"):
            arr = getattr(self, name)
            for j in range(arr.shape[1]):
                out[f"{name}[{j}]"] = arr[:, j]
        return out


def config_hash(config: ModelConfig) -> str:
    blob = json.dumps(dataclasses.asdict(config), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


# ---------------------------------------------------------------------------
# initialization

def _prior_mean_init(config: ModelConfig) -> dict:
    pri = config.priors
    phi0 = 2.0 * pri.phi_beta_a / (pri.phi_beta_a + pri.phi_beta_b) - 1.0
    rho0 = 2.0 * pri.rho_beta_a / (pri.rho_beta_a + pri.rho_beta_b) - 1.0
    sigma0 = (pri.sigma_prec_shape / pri.sigma_prec_rate) ** -0.5
    va0 = (pri.va_prec_shape / pri.va_prec_rate) ** -0.5
    nu0 = max(pri.nu_shape / pri.nu_rate, pri.nu_lower + 1.0)
    kap0 = pri.kappa_a / (pri.kappa_a + pri.kappa_b)
    return {"phi": phi0, "rho": rho0, "sigma": sigma0, "v_a": va0, "nu": nu0, "kappa": kap0}


def _ols_a_init(y: np.ndarray, p: int) -> np.ndarray:
    """Constant start for the covariance states: full-sample least squares of
    each row on the preceding rows (ridge-guarded). Starting at zero leaves
    the whole correlation structure in the early structural residuals, which
    sends the series-level vol-of-vol chains on a long transient."""
    from .msv_core import row_slices

    k, T = y.shape
    a0 = np.zeros((p, T))
    if T < 10:
        return a0
    for i, sl in enumerate(row_slices(k), start=1):
        X = y[:i].T
        G = X.T @ X + 1e-8 * np.eye(i)
        coef = np.linalg.solve(G, X.T @ y[i])
        a0[sl] = coef[:, None]
    return a0


def init_context(config: ModelConfig, y: np.ndarray, corrupt_sigma: bool = False) -> SweepContext:
    """Start values: h at floored log squared demeaned returns, z at its prior
    mean, a at the full-sample regression coefficients, hyper-parameters at
    prior means, beta at zero."""
    k, T = y.shape
    p = config.p
    m = _prior_mean_init(config)
    r = y - y.mean(axis=1, keepdims=True)
    h = np.log(np.maximum(r**2, 1e-12))
    mu0 = h.mean(axis=1) if T > 0 else np.full(k, config.priors.mu_mean)
    nu0 = np.full(k, m["nu"])
    z = np.tile((nu0 / (nu0 - 2.0))[:, None], (1, max(T, 1)))[:, :T]
    ctx = SweepContext(
        config=config,
        y=y,
        h=h,
        h_next=mu0 + m["phi"] * (h[:, -1] - mu0) if T > 0 else mu0.copy(),
        z=z,
        a=_ols_a_init(y, p) if config.has_corr else np.zeros((p, T)),
        mu=mu0.copy(),
        phi=np.full(k, m["phi"]),
        sigma=np.full(k, m["sigma"]),
        rho=np.full(k, m["rho"]),
        nu=nu0,
        beta=np.zeros(k),
        included=np.full(k, config.has_skew),
        mu_a=np.zeros(p),
        phi_a=np.full(p, m["phi"]),
        v_a=np.full(p, m["v_a"]),
        kappa=(m["kappa"] if config.has_sparsity else (1.0 if config.has_skew else 0.0)),
        rngs=rng_streams(config.seed, k, p),
        corrupt_sigma=corrupt_sigma,
    )
    return ctx


# ---------------------------------------------------------------------------
# main fit entry point

def _as_returns(data) -> tuple[np.ndarray, list[str]]:
    if hasattr(data, "returns"):
        arr = np.asarray(data.returns, dtype=float)
        names = list(getattr(data, "names"))
    else:
        arr = np.asarray(data, dtype=float)
        names = [f"s{i}" for i in range(arr.shape[1])]
    return arr, names


def run_mcmc(config: ModelConfig, data, threads: int = 1, corrupt_sigma: bool = False) -> McmcDraws:
    """Fit the configured variant; deterministic given (config, data, seed)."""
    arr, names = _as_returns(data)
    if arr.ndim != 2:
        raise ValueError("returns must be a T x k matrix")
    T, k = arr.shape
    if k != config.k:
        raise ValueError(f"config.k = {config.k} but data has k = {k}")
    if T < 10:
        raise ValueError("need at least T = 10 observations")
    if np.any(~np.isfinite(arr)):
        raise ValueError("returns contain NaN or infinite values")

    t0 = time.monotonic()
    ctx = init_context(config, np.ascontiguousarray(arr.T), corrupt_sigma=corrupt_sigma)
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None

    n_keep = config.draws // config.thin
    p = config.p
    store = {name: np.empty((n_keep, k)) for name in
             ("mu", "phi", "sigma", "rho", "nu", "beta", "h_next")}
    store["included"] = np.empty((n_keep, k), dtype=bool)
    store["kappa"] = np.empty(n_keep)
    for name in ("mu_a", "phi_a", "v_a", "a_last"):
        store[name] = np.empty((n_keep, p))
    h_acc = _PathAccumulator((k, T))
    a_acc = _PathAccumulator((p, T))

    adapt_window = 25
    window_marks = {key: (0.0, 0.0) for key in ctx.scales}
    kept = 0
    try:
        for s in range(config.burn_in + config.draws):
            try:
                sweep(ctx, pool=pool)
            except FloatingPointError as e:
                raise RuntimeError(f"MCMC sweep {s} failed: {e}") from e

            in_burn = s < config.burn_in
            if in_burn and (s + 1) % adapt_window == 0:
                for key, scale in ctx.scales.items():
                    a0, t0_ = window_marks[key]
                    tries = ctx.tries[key] - t0_
                    if tries > 0:
                        rate = (ctx.accepts[key] - a0) / tries
                        scale *= np.exp(0.8 * (rate - 0.3))
                        np.clip(scale, 1e-3, 20.0, out=scale)
                    window_marks[key] = (ctx.accepts[key], ctx.tries[key])
            if in_burn:
                continue

            post = s - config.burn_in
            if post % config.thin == 0 and kept < n_keep:
                for name, src in (("mu", ctx.mu), ("phi", ctx.phi), ("sigma", ctx.sigma),
                                  ("rho", ctx.rho), ("nu", ctx.nu), ("beta", ctx.beta),
                                  ("included", ctx.included), ("h_next", ctx.h_next),
                                  ("mu_a", ctx.mu_a), ("phi_a", ctx.phi_a), ("v_a", ctx.v_a)):
                    store[name][kept] = src
                store["kappa"][kept] = ctx.kappa
                store["a_last"][kept] = ctx.a[:, -1] if T > 0 and p > 0 else np.zeros(p)
                kept += 1
            if post % config.state_thin == 0:
                h_acc.add(ctx.h)
                a_acc.add(ctx.a)
    finally:
        if pool is not None:
            pool.shutdown()

    rates = {key: (ctx.accepts[key] / ctx.tries[key] if ctx.tries[key] else np.nan)
             for key in ctx.accepts}
    return McmcDraws(
        config=config, seed=config.seed, names=names, T=T,
        mu=store["mu"][:kept], phi=store["phi"][:kept], sigma=store["sigma"][:kept],
        rho=store["rho"][:kept], nu=store["nu"][:kept], beta=store["beta"][:kept],
        included=store["included"][:kept], kappa=store["kappa"][:kept],
        mu_a=store["mu_a"][:kept], phi_a=store["phi_a"][:kept], v_a=store["v_a"][:kept],
        h_next=store["h_next"][:kept], a_last=store["a_last"][:kept],
        h_summary=h_acc.summary(), a_summary=a_acc.summary(),
        accept_rates=rates, elapsed_sec=time.monotonic() - t0,
    )


# ---------------------------------------------------------------------------
# chain diagnostics

@dataclass
class ChainDiagnostics:
    ess: dict
    act: dict
    acf: dict
    accept_rates: dict
    degenerate: set = field(default_factory=set)


def ess_geyer(x: np.ndarray) -> tuple[float, float]:
    """(ESS, integrated autocorrelation time) by Geyer's initial monotone sequence."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 4:
        return np.nan, np.nan
    scale = float(np.mean(x * x))
    x = x - x.mean()
    v = float(np.mean(x * x))
    # relative threshold: a constant chain leaves only rounding residue
    if not np.isfinite(v) or v <= 1e-18 * max(scale, 1e-300):
        return np.nan, np.nan
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(x, nfft)
    ac = np.fft.irfft(f * np.conj(f), nfft)[:n].real / (v * n)
    n_pairs = n // 2
    gamma = ac[0:2 * n_pairs:2] + ac[1:2 * n_pairs:2]
    pos = gamma > 0
    cut = int(np.argmin(pos)) if not pos.all() else n_pairs
    if cut == 0:
        tau = 1.0
    else:
        g = np.minimum.accumulate(gamma[:cut])
        tau = max(-1.0 + 2.0 * float(np.sum(g)), 1.0 / n)
    ess = min(n / tau, float(n))
    return ess, tau


def diagnostics(draws: McmcDraws, n_acf_lags: int = 50) -> ChainDiagnostics:
    """Per-parameter ESS, autocorrelation time and lag-k ACF."""
    if draws.n_draws == 0:
        raise ValueError("empty draw set")
    ess, act, acf, degen = {}, {}, {}, set()
    for name, x in draws.scalar_series().items():
        e, tau = ess_geyer(x)
        if not np.isfinite(e):
            degen.add(name)
        ess[name] = e
        act[name] = tau
        xc = x - x.mean()
        v = np.mean(xc * xc)
        lags = min(n_acf_lags, x.size - 1)
        if v > 0:
            acf[name] = np.array([np.mean(xc[:x.size - L] * xc[L:]) / v
                                  for L in range(1, lags + 1)])
        else:
            acf[name] = np.full(lags, np.nan)
    return ChainDiagnostics(ess=ess, act=act, acf=acf,
                            accept_rates=dict(draws.accept_rates), degenerate=degen)


# ---------------------------------------------------------------------------
# Geweke joint-distribution validation

def prior_marginal_cdfs(priors: PriorSet) -> dict:
    """Analytic prior CDFs of the parameters tracked by the Geweke suite."""
    def shifted_beta(a, b):
        return lambda x: stats.beta.cdf((np.asarray(x) + 1.0) / 2.0, a, b)

    def sigma_cdf(shape, rate):
        # sigma = precision^(-1/2) with precision ~ Gamma(shape, rate)
        return lambda s: stats.gamma.sf(np.asarray(s, dtype=float) ** -2.0, shape, scale=1.0 / rate)

    g4 = stats.gamma.cdf(priors.nu_lower, priors.nu_shape, scale=1.0 / priors.nu_rate)

    def nu_cdf(x):
        x = np.asarray(x, dtype=float)
        return np.clip((stats.gamma.cdf(x, priors.nu_shape, scale=1.0 / priors.nu_rate) - g4)
                       / (1.0 - g4), 0.0, 1.0)

    return {
        "phi": shifted_beta(priors.phi_beta_a, priors.phi_beta_b),
        "sigma": sigma_cdf(priors.sigma_prec_shape, priors.sigma_prec_rate),
        "rho": shifted_beta(priors.rho_beta_a, priors.rho_beta_b),
        "nu": nu_cdf,
        "beta_slab": lambda x: stats.norm.cdf(x, priors.beta_slab_mean,
                                              np.sqrt(priors.beta_slab_var)),
        "kappa": lambda x: stats.beta.cdf(x, priors.kappa_a, priors.kappa_b),
        "mu_a": lambda x: stats.norm.cdf(x, priors.mu_a_mean, np.sqrt(priors.mu_a_var)),
        "phi_a": shifted_beta(priors.phi_beta_a, priors.phi_beta_b),
        "mu": lambda x: stats.norm.cdf(x, priors.mu_mean, np.sqrt(priors.mu_var)),
        "v_a": sigma_cdf(priors.va_prec_shape, priors.va_prec_rate),
    }


def _draw_prior_context(config: ModelConfig, rng: np.random.Generator,
                        T: int) -> SweepContext:
    """Parameters from the prior, states and data from the model."""
    from .simulate import simulate_from_params  # local import avoids a cycle

    k, p = config.k, config.p
    pri = config.priors
    kappa = float(rng.beta(pri.kappa_a, pri.kappa_b)) if config.has_sparsity else (
        1.0 if config.has_skew else 0.0)
    ser = [samplers.draw_series_prior(pri, rng,
                                      kappa=kappa if config.has_sparsity else None,
                                      skew=config.has_skew) for _ in range(k)]
    cov = [samplers.draw_cov_prior(pri, rng) for _ in range(p)]
    params = {key: np.array([s[key] for s in ser]) for key in
              ("mu", "phi", "sigma", "rho", "nu", "beta")}
    params["included"] = np.array([s["included"] for s in ser], dtype=bool)
    mu_a = np.array([c_["mu_a"] for c_ in cov]).reshape(p)
    phi_a = np.array([c_["phi_a"] for c_ in cov]).reshape(p)
    v_a = np.array([c_["v_a"] for c_ in cov]).reshape(p)
    sim = simulate_from_params(
        T=T, rng=rng,
        mu=params["mu"], phi=params["phi"], sigma=params["sigma"], rho=params["rho"],
        nu=params["nu"], beta=params["beta"], mu_a=mu_a, phi_a=phi_a, v_a=v_a,
        a_zero=not config.has_corr,
    )
    ctx = SweepContext(
        config=config, y=sim["y"], h=sim["h"], h_next=sim["h_next"], z=sim["z"],
        a=sim["a"], mu=params["mu"], phi=params["phi"], sigma=params["sigma"],
        rho=params["rho"], nu=params["nu"], beta=params["beta"],
        included=params["included"], mu_a=mu_a, phi_a=phi_a, v_a=v_a, kappa=kappa,
        rngs=rng_streams(int(rng.integers(2**63)), k, p),
    )
    return ctx


def _redraw_data(ctx: SweepContext, rng: np.random.Generator) -> None:
    """y ~ p(y | states, params): eps_t | eta_t ~ N((rho/sigma) eta_t, 1 - rho^2)."""
    from .msv_core import inverse_structural_panel

    eta = ctx.eta()
    mu_eps = (ctx.rho / ctx.sigma)[:, None] * eta
    sd = np.sqrt(1.0 - ctx.rho**2)[:, None]
    eps = mu_eps + sd * rng.standard_normal(ctx.z.shape)
    c = ctx.c()[:, None]
    w = ctx.beta[:, None] * (ctx.z - c) + np.sqrt(ctx.z) * eps
    ytil = np.exp(ctx.h / 2.0) * w
    if ctx.config.has_corr and ctx.k > 1:
        ctx.y = inverse_structural_panel(ytil, ctx.a)
    else:
        ctx.y = ytil


@dataclass
class GewekeReport:
    rows: list  # (name, n, ks_stat, p_value)
    n_sweeps: int

    def passed(self, p_threshold: float = 0.01) -> bool:
        return bool(self.rows) and all(r[3] > p_threshold for r in self.rows)

    def as_text(self) -> str:
        lines = [f"{'parameter':<12} {'n':>7} {'KS':>8} {'p':>8}"]
        for name, n, ks, p in self.rows:
            lines.append(f"{name:<12} {n:>7d} {ks:>8.4f} {p:>8.4f}")
        return "\n".join(lines)


def geweke_joint_test(config: ModelConfig, n_sweeps: int, record_thin: int = 50,
                      T: int = 30, corrupted: bool = False) -> GewekeReport:
    """Successive-conditional simulator check: alternate one posterior sweep with
    a data redraw; tracked parameter marginals must reproduce their priors.

    ``corrupted`` doubles sigma^2 inside one likelihood (validation of the
    validator: the suite must fail on it).
    """
    if config.k > 3 or T > 30:
        raise ValueError("geweke test is a desk-scale harness: k <= 3, T <= 30")
    if n_sweeps == 0:
        return GewekeReport(rows=[], n_sweeps=0)
    rng = np.random.Generator(np.random.Philox(
        np.random.SeedSequence(config.seed, spawn_key=(99,))))
    ctx = _draw_prior_context(config, rng, T=T)
    ctx.corrupt_sigma = corrupted
    k, p = config.k, config.p

    rec: dict[str, list] = {f"{nm}[{i}]": [] for nm in ("phi", "sigma", "rho", "nu") for i in range(k)}
    for i in range(k):
        rec[f"beta_slab[{i}]"] = []
    if config.has_sparsity:
        rec["kappa"] = []
    for j in range(p):
        rec[f"mu_a[{j}]"] = []

    for s in range(n_sweeps):
        sweep(ctx)
        _redraw_data(ctx, rng)
        if s % record_thin == 0:
            for i in range(k):
                rec[f"phi[{i}]"].append(ctx.phi[i])
                rec[f"sigma[{i}]"].append(ctx.sigma[i])
                rec[f"rho[{i}]"].append(ctx.rho[i])
                rec[f"nu[{i}]"].append(ctx.nu[i])
                if ctx.included[i]:
                    rec[f"beta_slab[{i}]"].append(ctx.beta[i])
            if config.has_sparsity:
                rec["kappa"].append(ctx.kappa)
            for j in range(p):
                rec[f"mu_a[{j}]"].append(ctx.mu_a[j])

    cdfs = prior_marginal_cdfs(config.priors)
    rows = []
    for name, vals in rec.items():
        base = name.split("[")[0]
        x = np.asarray(vals)
        if x.size < 20:
            continue
        res = stats.kstest(x, cdfs[base])
        rows.append((name, x.size, float(res.statistic), float(res.pvalue)))
    return GewekeReport(rows=rows, n_sweeps=n_sweeps)


# ---------------------------------------------------------------------------
# draw store (columnar CSV, one file per parameter group)

def _write_csv(path, header: list[str], columns: list[np.ndarray]) -> None:
    rows = len(columns[0]) if columns else 0
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for r in range(rows):
            cells = []
            for col in columns:
                v = col[r]
                if isinstance(v, (bool, np.bool_)):
                    cells.append("1" if v else "0")
                elif isinstance(v, (int, np.integer)):
                    cells.append(str(int(v)))
                else:
                    cells.append(_FLOAT_FMT % v)
            fh.write(",".join(cells) + "\n")


def save_draws(draws: McmcDraws, outdir) -> None:
    """Serialize to the documented store: series.csv, cov.csv, sparsity.csv,
    final_states.csv, summary_h.csv, summary_a.csv + manifest.txt."""
    import os

    os.makedirs(outdir, exist_ok=True)
    n, k = draws.mu.shape
    p = draws.mu_a.shape[1]
    didx = np.repeat(np.arange(n), k)
    sidx = np.tile(np.arange(k), n)
    _write_csv(
        os.path.join(outdir, "series.csv"),
        ["draw", "series", "mu", "phi", "sigma", "rho", "nu", "beta", "included", "h_next"],
        [didx, sidx] + [getattr(draws, nm).reshape(-1) for nm in
                        ("mu", "phi", "sigma", "rho", "nu", "beta", "included", "h_next")],
    )
    didx = np.repeat(np.arange(n), p)
    jidx = np.tile(np.arange(p), n)
    _write_csv(
        os.path.join(outdir, "cov.csv"),
        ["draw", "state", "mu_a", "phi_a", "v_a", "a_last"],
        [didx, jidx] + [getattr(draws, nm).reshape(-1) for nm in
                        ("mu_a", "phi_a", "v_a", "a_last")],
    )
    _write_csv(os.path.join(outdir, "sparsity.csv"), ["draw", "kappa"],
               [np.arange(n), draws.kappa])
    for nm, summ, rows_n in (("summary_h", draws.h_summary, k), ("summary_a", draws.a_summary, p)):
        T = summ.mean.shape[1] if summ.mean.ndim == 2 else 0
        ridx = np.repeat(np.arange(rows_n), T)
        tidx = np.tile(np.arange(T), rows_n)
        _write_csv(
            os.path.join(outdir, f"{nm}.csv"),
            ["index", "t", "mean", "sd", "q05", "q50", "q95"],
            [ridx, tidx] + [getattr(summ, f).reshape(-1) for f in
                            ("mean", "sd", "q05", "q50", "q95")],
        )
    cfg = draws.config
    lines = {
        "schema": STORE_SCHEMA,
        "seed": draws.seed,
        "config_hash": config_hash(cfg),
        "config_json": json.dumps(dataclasses.asdict(cfg), sort_keys=True),
        "variant": cfg.variant,
        "k": cfg.k,
        "T": draws.T,
        "n_draws": n,
        "names": ",".join(draws.names),
        "accept_rates": json.dumps({k_: round(v, 6) for k_, v in draws.accept_rates.items()},
                                   sort_keys=True),
        "elapsed_sec": f"{draws.elapsed_sec:.3f}",
        "created_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    with open(os.path.join(outdir, "manifest.txt"), "w") as fh:
        for key, val in lines.items():
            fh.write(f"{key} = {val}\n")


def read_manifest(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or "=" not in line:
                continue
            key, val = line.split("=", 1)
            out[key.strip()] = val.strip()
    return out


def load_draws(outdir) -> McmcDraws:
    """Rebuild an McmcDraws from a draw store (for forecast chaining)."""
    import os

    man = read_manifest(os.path.join(outdir, "manifest.txt"))
    cfg_dict = json.loads(man["config_json"])
    cfg_dict["priors"] = PriorSet(**cfg_dict["priors"])
    cfg = ModelConfig(**cfg_dict)
    n = int(man["n_draws"])
    k, p = cfg.k, cfg.p

    def read_csv(path):
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            data = [line.strip().split(",") for line in fh if line.strip()]
        cols = {h: np.array([row[i] for row in data], dtype=float)
                for i, h in enumerate(header)}
        return cols

    ser = read_csv(os.path.join(outdir, "series.csv"))
    cov = read_csv(os.path.join(outdir, "cov.csv"))
    spa = read_csv(os.path.join(outdir, "sparsity.csv"))

    def mat(cols, nm, width):
        return cols[nm].reshape(n, width)

    empty = StateSummary(*[np.zeros((0, 0))] * 5)
    return McmcDraws(
        config=cfg, seed=int(man["seed"]), names=man["names"].split(","), T=int(man["T"]),
        mu=mat(ser, "mu", k), phi=mat(ser, "phi", k), sigma=mat(ser, "sigma", k),
        rho=mat(ser, "rho", k), nu=mat(ser, "nu", k), beta=mat(ser, "beta", k),
        included=mat(ser, "included", k).astype(bool), kappa=spa["kappa"],
        mu_a=mat(cov, "mu_a", p), phi_a=mat(cov, "phi_a", p), v_a=mat(cov, "v_a", p),
        h_next=mat(ser, "h_next", k), a_last=mat(cov, "a_last", p),
        h_summary=empty, a_summary=empty,
        accept_rates=json.loads(man["accept_rates"]), elapsed_sec=float(man["elapsed_sec"]),
    )
