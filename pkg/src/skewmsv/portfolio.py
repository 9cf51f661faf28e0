"""Mean-variance portfolios, VaR quantile forecasts, and the Kupiec backtest."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2

DEFAULT_ALPHAS = (0.005, 0.01, 0.05)
DEFAULT_TARGETS = (0.00005, 0.0001, 0.0002)  # 0.005%, 0.01%, 0.02% daily


def _check_spd(D: np.ndarray) -> np.ndarray:
    D = np.atleast_2d(np.asarray(D, dtype=float))
    if D.shape[0] != D.shape[1] or not np.allclose(D, D.T, rtol=1e-8, atol=1e-12):
        raise ValueError("covariance must be symmetric")
    try:
        np.linalg.cholesky(D)
    except np.linalg.LinAlgError as e:
        raise ValueError("covariance must be positive definite") from e
    return D


def target_portfolio(g: np.ndarray, D: np.ndarray, m: float) -> np.ndarray:
    """Minimize w'Dw subject to w'g = m and w'1 = 1.

    Solved through the two-constraint Lagrangian system; the paper's closed
    form K(1'Kq g - g'Kq 1) with q = (1m - g)/d reproduces it exactly
    (cross-checked in the test suite).
    """
    g = np.asarray(g, dtype=float)
    D = _check_spd(D)
    if np.any(~np.isfinite(g)):
        raise ValueError("forecast mean must be finite")
    k = g.size
    ones = np.ones(k)
    Kg = np.linalg.solve(D, g)
    K1 = np.linalg.solve(D, ones)
    B = float(g @ Kg)
    C = float(g @ K1)
    A = float(ones @ K1)
    d = A * B - C * C
    if abs(d) < 1e-12 * max(abs(A * B), 1e-300):
        # g proportional to 1: the two constraints either coincide (m equals
        # the common mean -> plain minimum variance) or are inconsistent
        gbar = float(g.mean())
        if abs(m - gbar) < 1e-10 * max(1.0, abs(gbar)):
            return K1 / A
        raise ValueError("degenerate constraints: g is proportional to 1")
    lam1 = (A * m - C) / d
    lam2 = (B - C * m) / d
    return lam1 * Kg + lam2 * K1


def target_portfolio_display(g: np.ndarray, D: np.ndarray, m: float) -> np.ndarray:
    """The closed-form display: w = K (1'Kq g - g'Kq 1), q = (1m - g)/d."""
    g = np.asarray(g, dtype=float)
    D = _check_spd(D)
    ones = np.ones(g.size)
    K = np.linalg.inv(D)
    B = float(g @ K @ g)
    C = float(g @ K @ ones)
    A = float(ones @ K @ ones)
    d = A * B - C * C
    q = (ones * m - g) / d
    return K @ (float(ones @ K @ q) * g - float(g @ K @ q) * ones)


def minvar_portfolio(D: np.ndarray) -> np.ndarray:
    """Target-free minimum variance: w = K1 / (1'K1)."""
    D = _check_spd(D)
    ones = np.ones(D.shape[0])
    K1 = np.linalg.solve(D, ones)
    return K1 / float(ones @ K1)


def var_quantile(weights: np.ndarray, y_draws: np.ndarray, alpha: float) -> float:
    """Empirical alpha-quantile of the portfolio return over predictive draws."""
    weights = np.asarray(weights, dtype=float)
    y_draws = np.asarray(y_draws, dtype=float)
    if not 0.0 < alpha <= 0.5:
        raise ValueError("alpha must lie in (0, 0.5]")
    if y_draws.ndim != 2 or y_draws.shape[1] != weights.size:
        raise ValueError("y_draws must be (n_draws, k)")
    if y_draws.shape[0] < 1000:
        raise ValueError("need at least 1000 predictive draws for a VaR quantile")
    return float(np.quantile(y_draws @ weights, alpha))


@dataclass(frozen=True)
class VarReport:
    alpha: float
    n_days: int
    n_violations: int
    lr_stat: float
    p_value: float

    def __post_init__(self) -> None:
        if not 0 <= self.n_violations <= self.n_days:
            raise ValueError("violations must lie in [0, N]")


def kupiec_test(n: int, N: int, alpha: float) -> VarReport:
    """Binomial likelihood-ratio test that the violation rate equals alpha.

    LR = 2 log{(n/N)^n (1-n/N)^(N-n)} - 2 log{alpha^n (1-alpha)^(N-n)},
    asymptotically chi-square(1); n in {0, N} handled by the 0 log 0 = 0 limit.
    """
    if not 0 <= n <= N or N < 1:
        raise ValueError("require 0 <= n <= N and N >= 1")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    phat = n / N

    def loglik(p: float) -> float:
        out = 0.0
        if n > 0:
            out += n * np.log(p)
        if N - n > 0:
            out += (N - n) * np.log1p(-p)
        return out

    lr = 2.0 * (loglik(phat) - loglik(alpha))
    lr = max(lr, 0.0)
    p = float(chi2.sf(lr, df=1))
    return VarReport(alpha=alpha, n_days=N, n_violations=n, lr_stat=float(lr), p_value=p)


# ---------------------------------------------------------------------------
# backtest over a forecast archive

def count_violations(archive: dict, alpha: float, target: float | None,
                     min_draws: int = 1000) -> tuple[int, int]:
    """(violations, days) for one portfolio rule over every forecast day.

    target=None selects the target-free minimum-variance portfolio. A
    violation is a realized portfolio return strictly below the VaR quantile.
    """
    n, N = 0, 0
    by_key = {(r[0], r[2]): r for r in archive["records"]}
    for refit, draws in archive["refit_draws"].items():
        y = draws["y"]  # (d_max, M, k)
        for d in range(1, y.shape[0] + 1):
            rec = by_key.get((refit, d))
            if rec is None:
                continue
            yd = y[d - 1]
            if yd.shape[0] < min_draws:
                raise ValueError("archive holds too few predictive draws for VaR")
            g = yd.mean(axis=0)
            D = np.cov(yd.T) if yd.shape[1] > 1 else np.atleast_2d(yd.var(ddof=1))
            k = D.shape[0]
            try:
                np.linalg.cholesky(D)
            except np.linalg.LinAlgError:
                D = D + (1e-10 * np.trace(D) / k) * np.eye(k)
            w = minvar_portfolio(D) if target is None else target_portfolio(g, D, target)
            var_q = var_quantile(w, yd, alpha)
            realized = float(w @ rec[4])
            n += realized < var_q
            N += 1
    return n, N


def backtest_report(archive: dict, alphas=DEFAULT_ALPHAS, targets=DEFAULT_TARGETS,
                    include_target_free: bool = True, model: str = "") -> list[dict]:
    """Table-3 layout rows: (model, alpha, target, n, N, lr, p)."""
    rules: list[float | None] = list(targets)
    if include_target_free:
        rules.append(None)
    rows = []
    for alpha in alphas:
        for target in rules:
            n, N = count_violations(archive, alpha, target)
            rep = kupiec_test(n, N, alpha)
            rows.append({
                "model": model, "alpha": alpha,
                "target": "free" if target is None else repr(target),
                "n": n, "N": N, "lr": rep.lr_stat, "p": rep.p_value,
            })
    return rows


def write_backtest_csv(rows: list[dict], path) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        fh.write("model,alpha,target,n,N,lr,p\n")
        for r in rows:
            fh.write(f"{r['model']},{r['alpha']:g},{r['target']},{r['n']},{r['N']},"
                     f"{r['lr']:.6g},{r['p']:.6g}\n")
