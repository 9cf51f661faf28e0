"""One-sweep conditional samplers for every latent block and hyper-parameter.

Per-series notation (index i suppressed): the structural observation is
ytilde_t = {beta (z_t - c) + sqrt(z_t) eps_t} exp(h_t / 2) with AR(1) state
h_{t+1} = mu + phi (h_t - mu) + eta_t and corr(eps_t, eta_t) = rho. Every
conditional below is derived from the joint normal of (eps_t, eta_t):
eps_t | eta_t ~ N((rho/sigma) eta_t, 1 - rho^2). The auxiliary state
h_{T+1} (``h_next``) closes the leverage terms at t = T.

Sweep order: z -> h -> a -> beta -> kappa -> theta_i -> theta_aj, followed by
the interweaving moves (series level/scale/leverage/persistence, then
covariance-state level/scale). Fixed and documented so runs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import cholesky_banded, solve_banded, solveh_banded
from scipy.special import gammaln

from .distributions import gig_draws, sample_truncated_gamma
from .msv_core import ModelConfig, PriorSet, row_slices, structural_transform_panel

Z_FLOOR = 1e-10  # guards divisions by freshly drawn mixing values

DEFAULT_SCALES = {"phi": 0.6, "sigrho": 0.35, "nu": 0.6, "phi_a": 0.6,
                  "asis_h": 0.15, "asis_a": 0.15}


@dataclass
class SweepContext:
    """Mutable state threaded through one MCMC sweep.

    Parameter values are stored as arrays (one entry per series / covariance
    state); RNG streams are keyed by (block, index) so results do not depend
    on how block work is scheduled across workers.
    """

    config: ModelConfig
    y: np.ndarray          # (k, T) observed returns, series-major
    h: np.ndarray          # (k, T)
    h_next: np.ndarray     # (k,)
    z: np.ndarray          # (k, T)
    a: np.ndarray          # (p, T)
    mu: np.ndarray
    phi: np.ndarray
    sigma: np.ndarray
    rho: np.ndarray
    nu: np.ndarray
    beta: np.ndarray
    included: np.ndarray   # bool (k,)
    mu_a: np.ndarray
    phi_a: np.ndarray
    v_a: np.ndarray
    kappa: float
    rngs: dict
    scales: dict = field(default_factory=lambda: {})
    accepts: dict = field(default_factory=dict)
    tries: dict = field(default_factory=dict)
    h_method: str = "block"    # "block" (multi-move) or "single" (red/black scan)
    h_block_len: int = 250
    corrupt_sigma: bool = False  # validation harness: doubles sigma^2 in one likelihood

    def __post_init__(self) -> None:
        k = self.y.shape[0]
        p = k * (k - 1) // 2
        if not self.scales:
            self.scales = {
                "phi": np.full(k, DEFAULT_SCALES["phi"]),
                "sigrho": np.full(k, DEFAULT_SCALES["sigrho"]),
                "nu": np.full(k, DEFAULT_SCALES["nu"]),
                "phi_a": np.full(p, DEFAULT_SCALES["phi_a"]),
                "asis_h": np.full(k, DEFAULT_SCALES["asis_h"]),
                "asis_a": np.full(max(k - 1, 1), DEFAULT_SCALES["asis_a"]),
            }
        for key in ("phi", "sigrho", "nu", "phi_a", "h", "z", "asis_h", "asis_a"):
            self.accepts.setdefault(key, 0.0)
            self.tries.setdefault(key, 0.0)

    @property
    def k(self) -> int:
        return self.y.shape[0]

    @property
    def T(self) -> int:
        return self.y.shape[1]

    def ytilde(self) -> np.ndarray:
        """A_t y_t under the current covariance states."""
        if not self.config.has_corr or self.k == 1:
            return self.y
        return structural_transform_panel(self.y, self.a)

    def c(self) -> np.ndarray:
        return self.nu / (self.nu - 2.0)

    def eta(self) -> np.ndarray:
        """State shocks h_{t+1} - mu - phi (h_t - mu) including the auxiliary step, (k, T)."""
        h_fwd = np.concatenate([self.h[:, 1:], self.h_next[:, None]], axis=1)
        return h_fwd - self.mu[:, None] - self.phi[:, None] * (self.h - self.mu[:, None])


def rng_streams(seed: int, k: int, p: int) -> dict:
    """Counter-based Philox streams keyed (block, index); derivation rule documented here.

    Stream (name, i) uses SeedSequence(seed, spawn_key=(domain[name], i)), so
    identical seeds give identical draws regardless of worker scheduling.
    """
    domains = {"init": 0, "z": 1, "h": 2, "a": 3, "beta": 4, "kappa": 5,
               "sv": 6, "cov": 7, "redraw": 8}
    out = {}
    for name, dom in domains.items():
        idx = range(max(k, 1)) if name not in ("a", "kappa", "redraw", "init") else range(1)
        if name == "cov":
            idx = range(max(p, 1))
        for i in idx:
            out[(name, i)] = np.random.Generator(
                np.random.Philox(np.random.SeedSequence(seed, spawn_key=(dom, i)))
            )
    return out


# ---------------------------------------------------------------------------
# mixing variables z

def sample_mixing_path(i: int, ctx: SweepContext) -> None:
    """Update z_{i,1:T}.

    Combining the IG(nu/2, nu/2) prior with the observation likelihood
    (conditioned on eta through the leverage term) gives a GIG main part
    with lam = -(nu+1)/2, chi = nu + alpha^2/(1-rho^2), psi = beta^2/(1-rho^2)
    where alpha = ytilde e^{-h/2} + beta c, times exp(d1/sqrt(z) - d2 sqrt(z))
    with d1 = mu_eps alpha/(1-rho^2), d2 = mu_eps beta/(1-rho^2) and
    mu_eps = (rho/sigma) eta. The leftover factor vanishes when rho = 0
    (exact GIG draw); otherwise the GIG is used as an independence proposal
    with the leftover factor as the Metropolis-Hastings ratio.
    """
    rng = ctx.rngs[("z", i)]
    beta, nu, rho, sig = ctx.beta[i], ctx.nu[i], ctx.rho[i], ctx.sigma[i]
    c = nu / (nu - 2.0)
    sbar2 = 1.0 - rho**2
    wtil = ctx.ytilde()[i] * np.exp(-ctx.h[i] / 2.0)
    alpha = wtil + beta * c
    lam = -(nu + 1.0) / 2.0
    chi = nu + alpha**2 / sbar2
    psi = np.full_like(chi, beta**2 / sbar2)
    if np.any(chi <= 0) or np.any(~np.isfinite(chi)):
        raise FloatingPointError(f"degenerate GIG parameters in z block, series {i}")

    prop = gig_draws(lam, chi, psi, rng)
    if rho == 0.0:
        ctx.z[i] = np.maximum(prop, Z_FLOOR)
        ctx.accepts["z"] += prop.size
        ctx.tries["z"] += prop.size
        return

    mu_eps = (rho / sig) * ctx.eta()[i]
    d1 = mu_eps * alpha / sbar2
    d2 = mu_eps * beta / sbar2
    cur = ctx.z[i]
    log_r = d1 * (1.0 / np.sqrt(prop) - 1.0 / np.sqrt(cur)) - d2 * (np.sqrt(prop) - np.sqrt(cur))
    acc = np.log(rng.uniform(size=prop.size)) < log_r
    ctx.z[i] = np.maximum(np.where(acc, prop, cur), Z_FLOOR)
    ctx.accepts["z"] += float(acc.sum())
    ctx.tries["z"] += acc.size


# ---------------------------------------------------------------------------
# volatility paths h

def _h_site_terms(x, sites, ytil_s, z_s, h_right, left_const, has_left,
                  mu, phi, sig, rho, beta, c):
    """Log conditional and first two derivatives at site values x (vectorized)."""
    s2 = sig**2 * (1.0 - rho**2)
    rs = rho * sig
    g = ytil_s * np.exp(-x / 2.0) / np.sqrt(z_s)
    b = beta * (z_s - c) / np.sqrt(z_s)
    eps = g - b
    eps1 = -0.5 * g
    eps2 = 0.25 * g
    A = h_right - mu - phi * (x - mu) - rs * eps
    A1 = -phi - rs * eps1
    A2 = -rs * eps2
    ell = -0.5 * x - 0.5 * eps**2 - A * A / (2.0 * s2)
    grad = -0.5 - eps * eps1 - A * A1 / s2
    curv = -(eps1**2 + eps * eps2) - (A1 * A1 + A * A2) / s2
    B = x + left_const
    prec0 = (1.0 - phi**2) / sig**2
    ell = ell + np.where(has_left, -B * B / (2.0 * s2), -0.5 * prec0 * (x - mu) ** 2)
    grad = grad + np.where(has_left, -B / s2, -prec0 * (x - mu))
    curv = curv + np.where(has_left, -1.0 / s2, -prec0)
    return ell, grad, curv


def _taylor_proposal(x, grad, curv, fallback_var):
    ok = curv < -1e-8
    var = np.where(ok, -1.0 / np.where(ok, curv, -1.0), fallback_var)
    var = np.clip(var, 1e-12, 1e6)
    mean = np.where(ok, x - grad / np.where(ok, curv, -1.0), x)
    return mean, var


def sample_volatility_path(i: int, ctx: SweepContext) -> None:
    """Update h_{i,1:T} by Metropolis moves plus an exact draw of h_{i,T+1}.

    Two interchangeable transition kernels target the same conditional:

    - "single": one Metropolis step per site with a Gaussian proposal from a
      second-order Taylor expansion of the site's log conditional (random-walk
      fallback where the curvature is not negative). Sites of equal parity are
      conditionally independent given the rest, so the scan runs as two
      vectorized half-sweeps.
    - "block" (default): multi-move updates of randomly offset blocks of
      consecutive sites; each block draws an independence proposal from the
      Laplace approximation at the block mode (Gauss-Newton tridiagonal
      precision), accepted against the exact block conditional. Far better
      mixing for persistent volatility paths.
    """
    if ctx.h_method == "block":
        _volatility_block_pass(i, ctx)
    else:
        _volatility_single_pass(i, ctx)
    _draw_h_auxiliary(i, ctx)


def _draw_h_auxiliary(i: int, ctx: SweepContext) -> None:
    """h_{i,T+1} given (h_{i,T}, eps_{i,T}): exact Gaussian conditional."""
    rng = ctx.rngs[("h", i)]
    T = ctx.T
    mu, phi, sig, rho = ctx.mu[i], ctx.phi[i], ctx.sigma[i], ctx.rho[i]
    beta, nu = ctx.beta[i], ctx.nu[i]
    c = nu / (nu - 2.0)
    h_T = ctx.h[i, T - 1]
    z_T = ctx.z[i, T - 1]
    wtil_T = ctx.ytilde()[i, T - 1] * np.exp(-h_T / 2.0)
    eps_T = (wtil_T - beta * (z_T - c)) / np.sqrt(z_T)
    mean = mu + phi * (h_T - mu) + rho * sig * eps_T
    sd = sig * np.sqrt(1.0 - rho**2)
    ctx.h_next[i] = mean + sd * rng.standard_normal()


def _volatility_single_pass(i: int, ctx: SweepContext) -> None:
    rng = ctx.rngs[("h", i)]
    T = ctx.T
    mu, phi, sig, rho = ctx.mu[i], ctx.phi[i], ctx.sigma[i], ctx.rho[i]
    beta, nu = ctx.beta[i], ctx.nu[i]
    c = nu / (nu - 2.0)
    s2 = sig**2 * (1.0 - rho**2)
    rs = rho * sig
    ytil = ctx.ytilde()[i]
    z = ctx.z[i]
    h = ctx.h[i]

    for parity in (0, 1):
        sites = np.arange(parity, T, 2)
        if sites.size == 0:
            continue
        x0 = h[sites]
        left_idx = np.maximum(sites - 1, 0)
        has_left = sites > 0
        h_left = h[left_idx]
        wtil_left = ytil[left_idx] * np.exp(-h_left / 2.0)
        eps_left = (wtil_left - beta * (z[left_idx] - c)) / np.sqrt(z[left_idx])
        left_const = -mu - phi * (h_left - mu) - rs * eps_left
        h_right = np.where(sites < T - 1, h[np.minimum(sites + 1, T - 1)], ctx.h_next[i])
        args = (sites, ytil[sites], z[sites], h_right, left_const, has_left,
                mu, phi, sig, rho, beta, c)

        ell0, g0, c0 = _h_site_terms(x0, *args)
        m0, v0 = _taylor_proposal(x0, g0, c0, s2)
        xp = m0 + np.sqrt(v0) * rng.standard_normal(sites.size)
        in_range = np.abs(xp) < 500.0  # far outside any posterior mass; keeps exp() finite
        xp_safe = np.where(in_range, xp, x0)
        ellp, gp, cp = _h_site_terms(xp_safe, *args)
        m1, v1 = _taylor_proposal(xp_safe, gp, cp, s2)
        log_alpha = (
            ellp - ell0
            - 0.5 * ((x0 - m1) ** 2 / v1 + np.log(v1))
            + 0.5 * ((xp_safe - m0) ** 2 / v0 + np.log(v0))
        )
        log_alpha = np.where(in_range, log_alpha, -np.inf)
        finite = np.isfinite(log_alpha) | (log_alpha == -np.inf)
        if not np.all(finite):
            bad = sites[~finite][0]
            raise FloatingPointError(
                f"non-finite acceptance ratio in h block, series {i}, t={bad}"
            )
        acc = np.log(rng.uniform(size=sites.size)) < log_alpha
        h[sites] = np.where(acc, xp_safe, x0)
        ctx.accepts["h"] += float(acc.sum())
        ctx.tries["h"] += acc.size


def _tridiag_solve(diag: np.ndarray, off: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve P x = b for symmetric positive-definite tridiagonal P."""
    n = diag.size
    if n == 1:
        if diag[0] <= 0:
            raise np.linalg.LinAlgError("non-positive pivot")
        return b / diag
    ab = np.zeros((2, n))
    ab[0] = diag
    ab[1, :-1] = off
    return solveh_banded(ab, b, lower=True, check_finite=False)


def _tridiag_prec_sample(diag: np.ndarray, off: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    """Draw from N(0, P^{-1}) via x = L^{-T} zeta with P = L L^T tridiagonal."""
    n = diag.size
    if n == 1:
        if diag[0] <= 0:
            raise np.linalg.LinAlgError("non-positive pivot")
        return zeta / np.sqrt(diag)
    ab = np.zeros((2, n))
    ab[0] = diag
    ab[1, :-1] = off
    cb = cholesky_banded(ab, lower=True, check_finite=False)
    up = np.zeros((2, n))
    up[0, 1:] = cb[1, :-1]
    up[1] = cb[0]
    return solve_banded((0, 1), up, zeta, check_finite=False)


def _volatility_block_pass(i: int, ctx: SweepContext) -> None:
    """Multi-move pass: randomly offset blocks, Laplace independence proposals.

    Within a block x = h_{t0..t1} (boundaries fixed) the exact log conditional
    is the sum of per-site observation terms, the transition terms t0-1..t1
    (conditioning eta on eps through the leverage), and the stationary initial
    term when t0 = 0. The proposal is N(mode, P^-1) with P the Gauss-Newton
    precision at the mode (tridiagonal), found by damped Newton from the
    deterministic AR-bridge start, so the proposal does not depend on the
    current block values and the acceptance ratio needs no det(P) term.
    """
    rng = ctx.rngs[("h", i)]
    T = ctx.T
    h = ctx.h[i]
    L = max(int(ctx.h_block_len), 2)
    offset = int(rng.integers(L)) if T > L else 0
    edges = [0] + list(range(offset if offset > 0 else L, T, L)) + [T]
    edges = sorted(set(min(e, T) for e in edges))
    mu, phi, sig, rho = ctx.mu[i], ctx.phi[i], ctx.sigma[i], ctx.rho[i]
    beta, nu = ctx.beta[i], ctx.nu[i]
    c = nu / (nu - 2.0)
    s2 = sig**2 * (1.0 - rho**2)
    rs = rho * sig
    ytil = ctx.ytilde()[i]
    z = ctx.z[i]
    sqz = np.sqrt(z)
    b_all = beta * (z - c) / sqz

    for t0, t1 in zip(edges[:-1], edges[1:]):
        n = t1 - t0
        yt = ytil[t0:t1]
        zb = sqz[t0:t1]
        bb = b_all[t0:t1]
        h_left = h[t0 - 1] if t0 > 0 else None
        h_right = h[t1] if t1 < T else ctx.h_next[i]
        eps_left = None
        if t0 > 0:
            eps_left = (ytil[t0 - 1] * np.exp(-h[t0 - 1] / 2.0) / sqz[t0 - 1]
                        - b_all[t0 - 1])

        def exact_and_grad(x, want_grad=True):
            g = yt * np.exp(-x / 2.0) / zb
            eps = g - bb
            eps1 = -0.5 * g
            # residuals of the n transitions inside/out of the block
            eta_in = x[1:] - mu - phi * (x[:-1] - mu)
            u_in = eta_in - rs * eps[:-1]
            eta_out = h_right - mu - phi * (x[-1] - mu)
            u_out = eta_out - rs * eps[-1]
            ell = float(np.sum(-0.5 * x - 0.5 * eps**2)
                        - 0.5 * np.sum(u_in**2) / s2 - 0.5 * u_out**2 / s2)
            if t0 > 0:
                u_bnd = x[0] - mu - phi * (h_left - mu) - rs * eps_left
                ell += -0.5 * u_bnd**2 / s2
            else:
                ell += -0.5 * (1.0 - phi**2) * (x[0] - mu) ** 2 / sig**2
            if not want_grad:
                return ell, None, None
            a_dep = -phi - rs * eps1  # d(u_t)/dx_t for transitions leaving t
            grad = -0.5 - eps * eps1
            grad[:-1] += -u_in * a_dep[:-1] / s2
            grad[1:] += -u_in / s2
            grad[-1] += -u_out * a_dep[-1] / s2
            diag = eps1**2
            diag[:-1] += a_dep[:-1] ** 2 / s2
            diag[1:] += 1.0 / s2
            diag[-1] += a_dep[-1] ** 2 / s2
            off = a_dep[:-1] / s2  # precision entry (t, t+1) = -hess = a/s^2... sign below
            if t0 > 0:
                grad[0] += -(x[0] - mu - phi * (h_left - mu) - rs * eps_left) / s2
                diag[0] += 1.0 / s2
            else:
                grad[0] += -(1.0 - phi**2) * (x[0] - mu) / sig**2
                diag[0] += (1.0 - phi**2) / sig**2
            return ell, grad, (diag, off)

        # deterministic start: AR bridge between the boundaries, data ignored
        # (every site has a successor transition; h_next closes the last one)
        prec_d = np.full(n, phi**2 / sig**2)
        prec_d[1:] += 1.0 / sig**2
        prec_o = np.full(n - 1, -phi / sig**2)
        rhs = np.zeros(n)
        rhs[-1] += phi * (h_right - mu) / sig**2
        if t0 > 0:
            prec_d[0] += 1.0 / sig**2
            rhs[0] += phi * (h_left - mu) / sig**2
        else:
            prec_d[0] += (1.0 - phi**2) / sig**2
        try:
            x0 = mu + _tridiag_solve(prec_d, prec_o, rhs)
        except np.linalg.LinAlgError:
            x0 = np.full(n, mu)

        # damped Newton with the Gauss-Newton precision
        x_mode = x0
        ell_mode, grad, hess = exact_and_grad(x_mode)
        for _ in range(12):
            diag, off = hess
            try:
                step = _tridiag_solve(diag, off, grad)
            except np.linalg.LinAlgError:
                break
            if float(np.max(np.abs(step))) < 1e-8:
                break
            scale = 1.0
            improved = False
            for _ in range(6):
                cand = x_mode + scale * step
                ell_c, g_c, h_c = exact_and_grad(cand)
                if ell_c >= ell_mode - 1e-12:
                    gain = ell_c - ell_mode
                    x_mode, ell_mode, grad, hess = cand, ell_c, g_c, h_c
                    improved = gain > 1e-9
                    break
                scale *= 0.5
            if not improved:
                break

        diag, off = hess
        try:
            prop = x_mode + _tridiag_prec_sample(diag, off, rng.standard_normal(n))
        except np.linalg.LinAlgError:
            continue  # proposal construction failed; keep the current block

        def quad_form(v):
            dv = v - x_mode
            out = float(np.sum(diag * dv * dv))
            if n > 1:
                out += 2.0 * float(np.sum(off * dv[:-1] * dv[1:]))
            return out

        ell_cur, _, _ = exact_and_grad(h[t0:t1], want_grad=False)
        ell_prop, _, _ = exact_and_grad(prop, want_grad=False)
        log_alpha = (ell_prop - ell_cur
                     + 0.5 * quad_form(prop) - 0.5 * quad_form(h[t0:t1]))
        if not np.isfinite(log_alpha):
            raise FloatingPointError(
                f"non-finite acceptance ratio in h block, series {i}, t0={t0}")
        ctx.tries["h"] += 1
        if np.log(rng.uniform()) < log_alpha:
            h[t0:t1] = prop
            ctx.accepts["h"] += 1


# ---------------------------------------------------------------------------
# covariance states a via FFBS

def _cov_observation(ctx: SweepContext):
    """Per-row conditionally Gaussian observation systems for the a states.

    Row i (i >= 2) at time t: y_it e^{-h_it/2} - beta_i (z_it - c_i)
    - sqrt(z_it) (rho_i/sigma_i) eta_it = a_t^{(i)} . (y_{j<i,t} e^{-h_it/2})
    + noise, noise variance z_it (1 - rho_i^2). All scalings are derived from
    A_t y_t = Lambda_t w_t and eps | eta; see the module docstring. Row blocks
    touch disjoint states, so each is its own little state-space model.
    """
    k = ctx.k
    c = ctx.c()
    eta = ctx.eta()
    e_mh = np.exp(-ctx.h / 2.0)
    blocks = []
    for i in range(1, k):
        yhat = (
            ctx.y[i] * e_mh[i]
            - ctx.beta[i] * (ctx.z[i] - c[i])
            - np.sqrt(ctx.z[i]) * (ctx.rho[i] / ctx.sigma[i]) * eta[i]
        )
        rvar = ctx.z[i] * (1.0 - ctx.rho[i] ** 2)
        X = ctx.y[:i] * e_mh[i][None, :]  # (i, T) regressors
        blocks.append((yhat, rvar, X))
    return blocks


def sample_cov_states(ctx: SweepContext) -> None:
    """Joint draw of a_{1:T} by forward filtering, backward sampling.

    The prior and the likelihood both factorize over the k-1 row blocks of
    A_t (disjoint states, diagonal Phi_a/V, one scalar observation per block
    per time), so each block runs its own FFBS; dims 1 and 2 use unrolled
    scalar arithmetic, larger blocks a dense filter with sequential scalar
    observation updates.
    """
    if ctx.k < 2:
        raise ValueError("covariance states require k >= 2")
    rng = ctx.rngs[("a", 0)]
    blocks = _cov_observation(ctx)
    slices = row_slices(ctx.k)
    for b, (yhat, rvar, X) in enumerate(blocks):
        sl = slices[b]
        dim = sl.stop - sl.start
        mu_a, phi_a, v_a = ctx.mu_a[sl], ctx.phi_a[sl], ctx.v_a[sl]
        if dim == 1:
            ctx.a[sl.start] = _ffbs_dim1(yhat, rvar, X[0], float(mu_a[0]),
                                         float(phi_a[0]), float(v_a[0]), rng)
        elif dim == 2:
            ctx.a[sl] = _ffbs_dim2(yhat, rvar, X, mu_a, phi_a, v_a, rng)
        else:
            ctx.a[sl] = _ffbs_dense(yhat, rvar, X, mu_a, phi_a, v_a, rng)


def _ffbs_dim1(yh, r, f, mu_a: float, phi_a: float, v_a: float, rng) -> np.ndarray:
    T = yh.size
    var = v_a * v_a
    ms = np.empty(T)
    Ps = np.empty(T)
    m_pred = np.empty(T)
    P_pred = np.empty(T)
    m = mu_a
    P = var / (1.0 - phi_a * phi_a)
    for t in range(T):
        if t > 0:
            m = mu_a + phi_a * (m - mu_a)
            P = phi_a * P * phi_a + var
        m_pred[t] = m
        P_pred[t] = P
        s = f[t] * P * f[t] + r[t]
        if not (np.isfinite(s) and s > 0):
            raise FloatingPointError(f"FFBS innovation variance degenerate at t={t}")
        k_gain = P * f[t] / s
        m = m + k_gain * (yh[t] - f[t] * m)
        P = (1.0 - k_gain * f[t]) * P
        ms[t] = m
        Ps[t] = P
    normals = rng.standard_normal(T)
    out = np.empty(T)
    x = ms[T - 1] + np.sqrt(max(Ps[T - 1], 0.0)) * normals[T - 1]
    out[T - 1] = x
    for t in range(T - 2, -1, -1):
        J = Ps[t] * phi_a / P_pred[t + 1]
        mean = ms[t] + J * (x - m_pred[t + 1])
        cov = Ps[t] - J * P_pred[t + 1] * J
        if not np.isfinite(cov):
            raise FloatingPointError(f"FFBS covariance lost definiteness at t={t}")
        x = mean + np.sqrt(max(cov, 0.0)) * normals[t]
        out[t] = x
    return out


def _ffbs_dim2(yh, r, X, mu_a, phi_a, v_a, rng) -> np.ndarray:
    """Two-state block with one scalar observation per time, fully unrolled."""
    T = yh.size
    mu1, mu2 = float(mu_a[0]), float(mu_a[1])
    ph1, ph2 = float(phi_a[0]), float(phi_a[1])
    v1, v2 = float(v_a[0]) ** 2, float(v_a[1]) ** 2
    f1a, f2a = X[0], X[1]
    m_f = np.empty((T, 2))
    P_f = np.empty((T, 3))  # (p11, p12, p22)
    m_p = np.empty((T, 2))
    P_p = np.empty((T, 3))
    m1, m2 = mu1, mu2
    p11 = v1 / (1.0 - ph1 * ph1)
    p12 = 0.0
    p22 = v2 / (1.0 - ph2 * ph2)
    for t in range(T):
        if t > 0:
            m1 = mu1 + ph1 * (m1 - mu1)
            m2 = mu2 + ph2 * (m2 - mu2)
            p11 = ph1 * p11 * ph1 + v1
            p12 = ph1 * p12 * ph2
            p22 = ph2 * p22 * ph2 + v2
        m_p[t, 0], m_p[t, 1] = m1, m2
        P_p[t, 0], P_p[t, 1], P_p[t, 2] = p11, p12, p22
        f1, f2 = f1a[t], f2a[t]
        pf1 = p11 * f1 + p12 * f2
        pf2 = p12 * f1 + p22 * f2
        s = f1 * pf1 + f2 * pf2 + r[t]
        if not (np.isfinite(s) and s > 0):
            raise FloatingPointError(f"FFBS innovation variance degenerate at t={t}")
        k1, k2 = pf1 / s, pf2 / s
        innov = yh[t] - (f1 * m1 + f2 * m2)
        m1 += k1 * innov
        m2 += k2 * innov
        p11 -= k1 * pf1
        p12 -= k1 * pf2
        p22 -= k2 * pf2
        m_f[t, 0], m_f[t, 1] = m1, m2
        P_f[t, 0], P_f[t, 1], P_f[t, 2] = p11, p12, p22

    def draw2(mean1, mean2, c11, c12, c22, t):
        c11 = max(c11, 0.0)
        l11 = np.sqrt(c11)
        l21 = c12 / l11 if l11 > 0 else 0.0
        rest = c22 - l21 * l21
        if not np.isfinite(rest):
            raise FloatingPointError(f"FFBS covariance lost definiteness at t={t}")
        l22 = np.sqrt(max(rest, 0.0))
        z1, z2 = rng.standard_normal(2)
        return mean1 + l11 * z1, mean2 + l21 * z1 + l22 * z2

    out = np.empty((2, T))
    x1, x2 = draw2(m_f[T - 1, 0], m_f[T - 1, 1], *P_f[T - 1], T - 1)
    out[0, T - 1], out[1, T - 1] = x1, x2
    for t in range(T - 2, -1, -1):
        q11, q12, q22 = P_p[t + 1]
        det = q11 * q22 - q12 * q12
        if not (np.isfinite(det) and det > 0):
            raise FloatingPointError(f"FFBS covariance lost definiteness at t={t}")
        # J = P_f Phi' Q^{-1}, Phi diagonal
        a11, a12 = P_f[t, 0] * ph1, P_f[t, 1] * ph2
        a21, a22 = P_f[t, 1] * ph1, P_f[t, 2] * ph2
        j11 = (a11 * q22 - a12 * q12) / det
        j12 = (-a11 * q12 + a12 * q11) / det
        j21 = (a21 * q22 - a22 * q12) / det
        j22 = (-a21 * q12 + a22 * q11) / det
        d1 = x1 - m_p[t + 1, 0]
        d2 = x2 - m_p[t + 1, 1]
        mean1 = m_f[t, 0] + j11 * d1 + j12 * d2
        mean2 = m_f[t, 1] + j21 * d1 + j22 * d2
        # cov = P_f - J Q J'
        jq11 = j11 * q11 + j12 * q12
        jq12 = j11 * q12 + j12 * q22
        jq21 = j21 * q11 + j22 * q12
        jq22 = j21 * q12 + j22 * q22
        c11 = P_f[t, 0] - (jq11 * j11 + jq12 * j12)
        c12 = P_f[t, 1] - (jq11 * j21 + jq12 * j22)
        c22 = P_f[t, 2] - (jq21 * j21 + jq22 * j22)
        x1, x2 = draw2(mean1, mean2, c11, c12, c22, t)
        out[0, t], out[1, t] = x1, x2
    return out


def _ffbs_dense(yh, r, X, mu_a, phi_a, v_a, rng) -> np.ndarray:
    """Dense block filter (dim >= 3) with a single scalar observation per time."""
    dim = X.shape[0]
    T = yh.size
    V = v_a**2
    ms = np.empty((T, dim))
    Ps = np.empty((T, dim, dim))
    m_pred = np.empty((T, dim))
    P_pred = np.empty((T, dim, dim))
    m = mu_a.copy()
    P = np.diag(V / (1.0 - phi_a**2))
    for t in range(T):
        if t > 0:
            m = mu_a + phi_a * (m - mu_a)
            P = (phi_a[:, None] * P) * phi_a[None, :]
            P[np.diag_indices(dim)] += V
        m_pred[t] = m
        P_pred[t] = P
        f = X[:, t]
        Pf = P @ f
        s = float(f @ Pf) + r[t]
        if not (np.isfinite(s) and s > 0):
            raise FloatingPointError(f"FFBS innovation variance degenerate at t={t}")
        k_gain = Pf / s
        m = m + k_gain * (yh[t] - float(f @ m))
        P = P - np.outer(k_gain, Pf)
        P = 0.5 * (P + P.T)
        ms[t] = m
        Ps[t] = P

    eye = np.eye(dim)

    def draw(mean, cov, t):
        try:
            L = np.linalg.cholesky(cov + 1e-14 * eye)
        except np.linalg.LinAlgError as e:
            raise FloatingPointError(f"FFBS covariance lost definiteness at t={t}") from e
        return mean + L @ rng.standard_normal(dim)

    out = np.empty((dim, T))
    x = draw(ms[T - 1], Ps[T - 1], T - 1)
    out[:, T - 1] = x
    for t in range(T - 2, -1, -1):
        Pp = P_pred[t + 1]
        J = np.linalg.solve(Pp.T, (Ps[t] * phi_a[None, :]).T).T
        mean = ms[t] + J @ (x - m_pred[t + 1])
        cov = Ps[t] - J @ Pp @ J.T
        x = draw(mean, 0.5 * (cov + cov.T), t)
        out[:, t] = x
    return out


# ---------------------------------------------------------------------------
# skewness parameters and sparsity weight

def beta_posterior(i: int, ctx: SweepContext) -> tuple[float, float, float]:
    """Weighted-regression posterior of beta_i and the slab inclusion probability.

    Regression of r_t = ytilde e^{-h/2} - sqrt(z)(rho/sigma) eta on (z - c)
    with noise variance z (1 - rho^2); returns (beta_hat, tau_hat^2, kappa_hat)
    where kappa_hat = kappa b / (kappa b + 1 - kappa) and
    b = exp(beta_hat^2 / 2 tau_hat^2 - b0^2 / 2 tau0^2) tau_hat / tau0.
    """
    pri = ctx.config.priors
    tau02, b0 = pri.beta_slab_var, pri.beta_slab_mean
    rho, sig, nu = ctx.rho[i], ctx.sigma[i], ctx.nu[i]
    c = nu / (nu - 2.0)
    sbar2 = 1.0 - rho**2
    z = ctx.z[i]
    wtil = ctx.ytilde()[i] * np.exp(-ctx.h[i] / 2.0)
    r = wtil - np.sqrt(z) * (rho / sig) * ctx.eta()[i]
    x = z - c
    w = 1.0 / (z * sbar2)
    s2sum = float(np.sum(x * x * w))
    s1sum = float(np.sum(x * r * w))
    tau_hat2 = 1.0 / (1.0 / tau02 + s2sum)
    beta_hat = tau_hat2 * (b0 / tau02 + s1sum)
    log_b = 0.5 * (beta_hat**2 / tau_hat2 - b0**2 / tau02) + 0.5 * np.log(tau_hat2 / tau02)
    kap = ctx.kappa
    if kap >= 1.0:
        kappa_hat = 1.0
    elif kap <= 0.0:
        kappa_hat = 0.0
    else:
        # kappa_hat on the log-odds scale for stability
        logit = np.log(kap) - np.log1p(-kap) + log_b
        kappa_hat = 1.0 / (1.0 + np.exp(-logit))
    return beta_hat, tau_hat2, float(kappa_hat)


def sample_beta(i: int, ctx: SweepContext) -> tuple[float, bool]:
    """Spike-and-slab draw of (beta_i, inclusion indicator)."""
    rng = ctx.rngs[("beta", i)]
    beta_hat, tau_hat2, kappa_hat = beta_posterior(i, ctx)
    included = bool(rng.uniform() < kappa_hat)
    beta = beta_hat + np.sqrt(tau_hat2) * rng.standard_normal() if included else 0.0
    ctx.beta[i] = beta
    ctx.included[i] = included
    return beta, included


def sample_kappa(ctx: SweepContext) -> float:
    """Beta-binomial conjugate update given the count of nonzero beta's."""
    rng = ctx.rngs[("kappa", 0)]
    pri = ctx.config.priors
    n1 = int(np.sum(ctx.included))
    kappa = float(rng.beta(pri.kappa_a + n1, pri.kappa_b + ctx.k - n1))
    ctx.kappa = kappa
    return kappa


# ---------------------------------------------------------------------------
# SV hyper-parameters theta_i = {mu, phi, sigma, rho, nu}

def _shifted_beta_logpdf(x: float, a: float, b: float) -> float:
    if not -1.0 < x < 1.0:
        return -np.inf
    return (a - 1.0) * np.log((1.0 + x) / 2.0) + (b - 1.0) * np.log((1.0 - x) / 2.0)


def draw_series_prior(priors: PriorSet, rng: np.random.Generator,
                      kappa: float | None = None, skew: bool = True) -> dict:
    """One draw of {mu, phi, sigma, rho, nu, beta, included} from the prior."""
    phi = 2.0 * rng.beta(priors.phi_beta_a, priors.phi_beta_b) - 1.0
    rho = 2.0 * rng.beta(priors.rho_beta_a, priors.rho_beta_b) - 1.0
    mu = priors.mu_mean + np.sqrt(priors.mu_var) * rng.standard_normal()
    sigma = float(rng.gamma(priors.sigma_prec_shape, 1.0 / priors.sigma_prec_rate)) ** -0.5
    nu = float(sample_truncated_gamma(priors.nu_shape, priors.nu_rate, priors.nu_lower, rng))
    if not skew:
        beta, included = 0.0, False
    else:
        incl_p = 1.0 if kappa is None else kappa
        included = bool(rng.uniform() < incl_p)
        beta = (
            priors.beta_slab_mean + np.sqrt(priors.beta_slab_var) * rng.standard_normal()
            if included else 0.0
        )
    return {"mu": mu, "phi": phi, "sigma": sigma, "rho": rho, "nu": nu,
            "beta": beta, "included": included}


def draw_cov_prior(priors: PriorSet, rng: np.random.Generator) -> dict:
    phi_a = 2.0 * rng.beta(priors.phi_beta_a, priors.phi_beta_b) - 1.0
    mu_a = priors.mu_a_mean + np.sqrt(priors.mu_a_var) * rng.standard_normal()
    v_a = float(rng.gamma(priors.va_prec_shape, 1.0 / priors.va_prec_rate)) ** -0.5
    return {"mu_a": mu_a, "phi_a": phi_a, "v_a": v_a}


def _mh_step(logpost: Callable[[float], float], cur: float, scale: float,
             rng: np.random.Generator) -> tuple[float, bool]:
    prop = cur + scale * rng.standard_normal()
    num, den = logpost(prop), logpost(cur)
    if not (np.isfinite(den)):
        raise FloatingPointError("log posterior non-finite at current point")
    log_alpha = num - den
    if np.isfinite(log_alpha) and np.log(rng.uniform()) < log_alpha:
        return prop, True
    return cur, False


def sample_sv_hyper(i: int, ctx: SweepContext) -> None:
    """Update {mu_i, phi_i, (sigma_i, rho_i), nu_i}.

    mu is conjugate normal; phi and nu move by random-walk MH on atanh(phi)
    and log(nu - 4); (sigma, rho) move jointly on (log sigma^2, atanh rho)
    since they enter the shock covariance together. With no data (T = 0)
    every parameter is drawn from its prior directly.
    """
    rng = ctx.rngs[("sv", i)]
    pri = ctx.config.priors
    if ctx.T == 0:
        d = draw_series_prior(pri, rng, skew=False)
        ctx.mu[i], ctx.phi[i], ctx.sigma[i], ctx.rho[i], ctx.nu[i] = (
            d["mu"], d["phi"], d["sigma"], d["rho"], d["nu"])
        return

    ytil = ctx.ytilde()[i]
    h, h_next, z = ctx.h[i], ctx.h_next[i], ctx.z[i]
    h_fwd = np.concatenate([h[1:], [h_next]])
    T = ctx.T

    def eps_of(nu_val: float) -> np.ndarray:
        c = nu_val / (nu_val - 2.0)
        return (ytil * np.exp(-h / 2.0) - ctx.beta[i] * (z - c)) / np.sqrt(z)

    # --- mu: conjugate normal ----------------------------------------------
    phi, sig, rho = ctx.phi[i], ctx.sigma[i], ctx.rho[i]
    sig2_used = sig**2 * (2.0 if ctx.corrupt_sigma else 1.0)
    s2 = sig2_used * (1.0 - rho**2)
    eps = eps_of(ctx.nu[i])
    d = h_fwd - phi * h - rho * sig * eps
    prec = 1.0 / pri.mu_var + (1.0 - phi**2) / sig2_used + T * (1.0 - phi) ** 2 / s2
    mean = (
        pri.mu_mean / pri.mu_var
        + h[0] * (1.0 - phi**2) / sig2_used
        + (1.0 - phi) * np.sum(d) / s2
    ) / prec
    ctx.mu[i] = mean + rng.standard_normal() / np.sqrt(prec)

    # --- phi: random-walk MH on atanh(phi) ----------------------------------
    mu, sig, rho = ctx.mu[i], ctx.sigma[i], ctx.rho[i]
    sig2_used = sig**2 * (2.0 if ctx.corrupt_sigma else 1.0)
    s2 = sig2_used * (1.0 - rho**2)
    rs_eps = rho * sig * eps

    def phi_logpost(u: float) -> float:
        ph = np.tanh(u)
        eta = h_fwd - mu - ph * (h - mu)
        return (
            _shifted_beta_logpdf(ph, pri.phi_beta_a, pri.phi_beta_b)
            + np.log1p(-ph**2)                      # Jacobian of tanh
            + 0.5 * np.log1p(-ph**2)                # stationary initial variance
            - 0.5 * (1.0 - ph**2) * (h[0] - mu) ** 2 / sig2_used
            - 0.5 * np.sum((eta - rs_eps) ** 2) / s2
        )

    u, acc = _mh_step(phi_logpost, np.arctanh(ctx.phi[i]), ctx.scales["phi"][i], rng)
    ctx.phi[i] = float(np.tanh(u))
    ctx.accepts["phi"] += acc
    ctx.tries["phi"] += 1

    # --- (sigma, rho): joint random-walk MH on (log sigma^2, atanh rho) -----
    phi = ctx.phi[i]
    eta = h_fwd - mu - phi * (h - mu)

    def sigrho_logpost(v: np.ndarray) -> float:
        x, u_r = v
        sig2 = np.exp(x) * (2.0 if ctx.corrupt_sigma else 1.0)
        rh = np.tanh(u_r)
        lp = (
            -pri.sigma_prec_shape * x - pri.sigma_prec_rate * np.exp(-x)  # gamma on 1/sig^2
            + _shifted_beta_logpdf(rh, pri.rho_beta_a, pri.rho_beta_b)
            + np.log1p(-rh**2)
        )
        s2v = sig2 * (1.0 - rh**2)
        lp += 0.5 * np.log((1.0 - phi**2) / sig2) - 0.5 * (1.0 - phi**2) * (h[0] - mu) ** 2 / sig2
        resid = eta - rh * np.sqrt(sig2) * eps
        lp += -0.5 * T * np.log(s2v) - 0.5 * np.sum(resid**2) / s2v
        return lp

    cur = np.array([np.log(ctx.sigma[i] ** 2), np.arctanh(ctx.rho[i])])
    prop = cur + ctx.scales["sigrho"][i] * rng.standard_normal(2)
    log_alpha = sigrho_logpost(prop) - sigrho_logpost(cur)
    if np.isfinite(log_alpha) and np.log(rng.uniform()) < log_alpha:
        ctx.sigma[i] = float(np.exp(0.5 * prop[0]))
        ctx.rho[i] = float(np.tanh(prop[1]))
        ctx.accepts["sigrho"] += 1
    ctx.tries["sigrho"] += 1

    # --- nu: random-walk MH on log(nu - 4) -----------------------------------
    sig, rho = ctx.sigma[i], ctx.rho[i]
    sig2_used = sig**2 * (2.0 if ctx.corrupt_sigma else 1.0)
    s2 = sig2_used * (1.0 - rho**2)
    lo = pri.nu_lower

    def nu_logpost(u: float) -> float:
        nv = lo + np.exp(u)
        if not np.isfinite(nv):
            return -np.inf
        half = nv / 2.0
        lp = (
            (pri.nu_shape - 1.0) * np.log(nv) - pri.nu_rate * nv
            + np.log(nv - lo)                                   # Jacobian
            + T * (half * np.log(half) - gammaln(half))
            - (half + 1.0) * np.sum(np.log(z)) - half * np.sum(1.0 / z)
        )
        e = eps_of(nv)
        lp += -0.5 * np.sum(e**2) - 0.5 * np.sum((eta - rho * sig * e) ** 2) / s2
        return lp

    u, acc = _mh_step(nu_logpost, np.log(ctx.nu[i] - lo), ctx.scales["nu"][i], rng)
    ctx.nu[i] = float(lo + np.exp(u))
    ctx.accepts["nu"] += acc
    ctx.tries["nu"] += 1


def interweave_sv_level(i: int, ctx: SweepContext) -> None:
    """Ancillarity-sufficiency interweaving for (mu_i, sigma_i, rho_i, phi_i).

    Re-draws level, vol-of-vol, leverage and persistence in the non-centered
    parameterization h = mu + sigma*htilde with the standardized path htilde
    held fixed (joint random-walk MH on (mu, log sigma, atanh rho, atanh phi);
    the htilde prior depends on phi and is included). Breaks the slow coupling
    between these parameters and the sampled path that the centered updates
    alone leave behind.
    """
    if ctx.T == 0:
        return
    rng = ctx.rngs[("sv", i)]
    pri = ctx.config.priors
    mu, phi, sig, rho = ctx.mu[i], ctx.phi[i], ctx.sigma[i], ctx.rho[i]
    beta, nu = ctx.beta[i], ctx.nu[i]
    c = nu / (nu - 2.0)
    z = ctx.z[i]
    sqz = np.sqrt(z)
    ytil = ctx.ytilde()[i]
    h_all = np.concatenate([ctx.h[i], [ctx.h_next[i]]])
    htil = (h_all - mu) / sig
    skew_part = beta * (z - c)
    a_gam = pri.sigma_prec_shape
    b_gam = pri.sigma_prec_rate

    def logpost(v: np.ndarray) -> float:
        mu_p, lsig, arho, aphi = v
        sig_p = np.exp(lsig)
        rho_p = np.tanh(arho)
        phi_p = np.tanh(aphi)
        eta_til = htil[1:] - phi_p * htil[:-1]
        x = mu_p + sig_p * htil[:-1]
        var = z * (1.0 - rho_p**2) * np.exp(x)
        mean = (skew_part + sqz * rho_p * eta_til) * np.exp(x / 2.0)
        lp = float(np.sum(-0.5 * np.log(var) - 0.5 * (ytil - mean) ** 2 / var))
        # standardized-path prior depends on phi
        lp += 0.5 * np.log1p(-phi_p**2) - 0.5 * (1.0 - phi_p**2) * htil[0] ** 2
        lp += -0.5 * float(np.sum(eta_til**2))
        lp += -0.5 * (mu_p - pri.mu_mean) ** 2 / pri.mu_var
        lp += -2.0 * a_gam * lsig - b_gam * np.exp(-2.0 * lsig)
        lp += _shifted_beta_logpdf(rho_p, pri.rho_beta_a, pri.rho_beta_b) \
            + np.log1p(-rho_p**2)
        lp += _shifted_beta_logpdf(phi_p, pri.phi_beta_a, pri.phi_beta_b) \
            + np.log1p(-phi_p**2)
        return lp

    cur = np.array([mu, np.log(sig), np.arctanh(rho), np.arctanh(phi)])
    prop = cur + ctx.scales["asis_h"][i] * rng.standard_normal(4)
    log_alpha = logpost(prop) - logpost(cur)
    ctx.tries["asis_h"] += 1
    if np.isfinite(log_alpha) and np.log(rng.uniform()) < log_alpha:
        mu_new, sig_new = float(prop[0]), float(np.exp(prop[1]))
        h_new = mu_new + sig_new * htil
        ctx.mu[i] = mu_new
        ctx.sigma[i] = sig_new
        ctx.rho[i] = float(np.tanh(prop[2]))
        ctx.phi[i] = float(np.tanh(prop[3]))
        ctx.h[i] = h_new[:-1]
        ctx.h_next[i] = h_new[-1]
        ctx.accepts["asis_h"] += 1


def interweave_cov_block(b: int, ctx: SweepContext) -> None:
    """Interweaving for (mu_aj, v_aj) of one row block of covariance states.

    In the non-centered form a = mu_a + v_a*atilde the observation row
    directly informs level and scale; a random-walk MH on (mu_aj, log v_aj)
    jointly over the block breaks the slow coupling between v_a and the
    smoothness of the sampled path.
    """
    if ctx.T == 0:
        return
    rng = ctx.rngs[("cov", b)]
    pri = ctx.config.priors
    sl = row_slices(ctx.k)[b]
    dim = sl.stop - sl.start
    i = b + 1
    mu_a, v_a = ctx.mu_a[sl], ctx.v_a[sl]
    atil = (ctx.a[sl] - mu_a[:, None]) / v_a[:, None]

    c = ctx.nu[i] / (ctx.nu[i] - 2.0)
    eta_i = ctx.eta()[i]
    e_mh = np.exp(-ctx.h[i] / 2.0)
    yhat = (ctx.y[i] * e_mh - ctx.beta[i] * (ctx.z[i] - c)
            - np.sqrt(ctx.z[i]) * (ctx.rho[i] / ctx.sigma[i]) * eta_i)
    w = 1.0 / (ctx.z[i] * (1.0 - ctx.rho[i] ** 2))
    X = ctx.y[:i] * e_mh[None, :]           # (dim, T)

    def logpost(theta: np.ndarray) -> float:
        mu_p = theta[:dim]
        v_p = np.exp(theta[dim:])
        fit = ((mu_p[:, None] + v_p[:, None] * atil) * X).sum(axis=0)
        lp = -0.5 * float(np.sum((yhat - fit) ** 2 * w))
        lp += float(np.sum(-0.5 * (mu_p - pri.mu_a_mean) ** 2 / pri.mu_a_var))
        # gamma prior on v^-2 expressed in log v (Jacobian absorbed)
        lp += float(np.sum(-2.0 * pri.va_prec_shape * theta[dim:]
                           - pri.va_prec_rate * np.exp(-2.0 * theta[dim:])))
        return lp

    cur = np.concatenate([mu_a, np.log(v_a)])
    prop = cur + ctx.scales["asis_a"][b] * rng.standard_normal(2 * dim)
    log_alpha = logpost(prop) - logpost(cur)
    ctx.tries["asis_a"] += 1
    if np.isfinite(log_alpha) and np.log(rng.uniform()) < log_alpha:
        mu_new = prop[:dim]
        v_new = np.exp(prop[dim:])
        ctx.a[sl] = mu_new[:, None] + v_new[:, None] * atil
        ctx.mu_a[sl] = mu_new
        ctx.v_a[sl] = v_new
        ctx.accepts["asis_a"] += 1


# ---------------------------------------------------------------------------
# covariance-state hyper-parameters theta_aj

def sample_cov_hyper(j: int, ctx: SweepContext) -> None:
    """Update {mu_aj, phi_aj, v_aj} against the AR(1) path a_{j,1:T} (no leverage)."""
    rng = ctx.rngs[("cov", j)]
    pri = ctx.config.priors
    a = ctx.a[j]
    T = a.size
    if T == 0:
        d = draw_cov_prior(pri, rng)
        ctx.mu_a[j], ctx.phi_a[j], ctx.v_a[j] = d["mu_a"], d["phi_a"], d["v_a"]
        return

    # mu_a: conjugate normal
    phi, v2 = ctx.phi_a[j], ctx.v_a[j] ** 2
    prec = 1.0 / pri.mu_a_var + (1.0 - phi**2) / v2 + (T - 1) * (1.0 - phi) ** 2 / v2
    mean = (
        pri.mu_a_mean / pri.mu_a_var
        + a[0] * (1.0 - phi**2) / v2
        + (1.0 - phi) * np.sum(a[1:] - phi * a[:-1]) / v2
    ) / prec
    ctx.mu_a[j] = mean + rng.standard_normal() / np.sqrt(prec)

    # phi_a: random-walk MH on atanh
    mu, v2 = ctx.mu_a[j], ctx.v_a[j] ** 2

    def phia_logpost(u: float) -> float:
        ph = np.tanh(u)
        eta = a[1:] - mu - ph * (a[:-1] - mu)
        return (
            _shifted_beta_logpdf(ph, pri.phi_beta_a, pri.phi_beta_b)
            + np.log1p(-ph**2)
            + 0.5 * np.log1p(-ph**2)
            - 0.5 * (1.0 - ph**2) * (a[0] - mu) ** 2 / v2
            - 0.5 * np.sum(eta**2) / v2
        )

    u, acc = _mh_step(phia_logpost, np.arctanh(ctx.phi_a[j]), ctx.scales["phi_a"][j], rng)
    ctx.phi_a[j] = float(np.tanh(u))
    ctx.accepts["phi_a"] += acc
    ctx.tries["phi_a"] += 1

    # v_a: conjugate gamma on the precision
    phi = ctx.phi_a[j]
    eta = a[1:] - ctx.mu_a[j] - phi * (a[:-1] - ctx.mu_a[j])
    ss = (1.0 - phi**2) * (a[0] - ctx.mu_a[j]) ** 2 + float(np.sum(eta**2))
    prec = rng.gamma(pri.va_prec_shape + 0.5 * T, 1.0 / (pri.va_prec_rate + 0.5 * ss))
    ctx.v_a[j] = float(prec**-0.5)


# ---------------------------------------------------------------------------
# full sweep

def sweep(ctx: SweepContext, pool=None) -> None:
    """One full Gibbs sweep in the documented block order, with variant gating."""
    cfg = ctx.config
    k = ctx.k

    def over_series(fn):
        if pool is None:
            for i in range(k):
                fn(i, ctx)
        else:
            list(pool.map(lambda i: fn(i, ctx), range(k)))

    over_series(sample_mixing_path)
    over_series(sample_volatility_path)
    if cfg.has_corr and k >= 2:
        sample_cov_states(ctx)
    if cfg.has_skew:
        over_series(sample_beta)
        if cfg.has_sparsity:
            sample_kappa(ctx)
    over_series(sample_sv_hyper)
    over_series(interweave_sv_level)
    if cfg.has_corr and k >= 2:
        if pool is None:
            for j in range(ctx.a.shape[0]):
                sample_cov_hyper(j, ctx)
        else:
            list(pool.map(lambda j: sample_cov_hyper(j, ctx), range(ctx.a.shape[0])))
        for b in range(k - 1):
            interweave_cov_block(b, ctx)
