"""Model data structures and the deterministic Cholesky algebra.

A return vector follows y_t = A_t^{-1} Lambda_t w_t where A_t is lower
unitriangular with entries -a below the diagonal (the p = k(k-1)/2 free
values stacked row by row) and Lambda_t = diag(exp(h_t/2)). The identity
A_t y_t = Lambda_t w_t reduces the joint model to k univariate systems.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

H_CLAMP = 40.0  # |h| beyond this is outside any plausible log-variance posterior

VARIANTS = ("S", "SS", "C", "CS", "CSS")


@dataclass(frozen=True)
class PriorSet:
    """Hyper-parameters of every prior block; defaults are the baseline set.

    Gamma parameters are shape/rate (mean = shape/rate). phi and rho priors
    are beta laws on the shifted variable (x+1)/2. The nu prior is gamma
    truncated to nu > nu_lower.
    """

    phi_beta_a: float = 20.0
    phi_beta_b: float = 1.5
    mu_mean: float = -10.0
    mu_var: float = 1.0
    mu_a_mean: float = 0.0
    mu_a_var: float = 1.0
    sigma_prec_shape: float = 20.0
    sigma_prec_rate: float = 0.01
    va_prec_shape: float = 20.0
    va_prec_rate: float = 0.01
    rho_beta_a: float = 1.0
    rho_beta_b: float = 1.0
    nu_shape: float = 16.0
    nu_rate: float = 0.8
    nu_lower: float = 4.0
    beta_slab_mean: float = 0.0
    beta_slab_var: float = 10.0
    kappa_a: float = 2.0
    kappa_b: float = 2.0

    def __post_init__(self) -> None:
        positive = (
            self.phi_beta_a, self.phi_beta_b, self.mu_var, self.mu_a_var,
            self.sigma_prec_shape, self.sigma_prec_rate, self.va_prec_shape,
            self.va_prec_rate, self.rho_beta_a, self.rho_beta_b, self.nu_shape,
            self.nu_rate, self.beta_slab_var, self.kappa_a, self.kappa_b,
        )
        if any((not np.isfinite(v)) or v <= 0 for v in positive):
            raise ValueError("prior hyper-parameters must be finite and positive")
        if self.nu_lower < 4.0:
            raise ValueError("nu_lower must be >= 4 (finite variance)")


PRIOR_PRESETS = {
    "baseline": PriorSet(),
    "prior1": PriorSet(kappa_a=2.0, kappa_b=8.0),
    "prior2": PriorSet(beta_slab_mean=-1.0, beta_slab_var=2.0),
    "prior3": PriorSet(nu_shape=24.0, nu_rate=0.6),
}


@dataclass(frozen=True)
class ModelConfig:
    """Model variant, priors and MCMC run lengths."""

    k: int
    variant: str = "CSS"
    priors: PriorSet = field(default_factory=PriorSet)
    burn_in: int = 5000
    draws: int = 50000
    thin: int = 1
    state_thin: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.burn_in < 0 or self.draws < 1 or self.thin < 1 or self.state_thin < 1:
            raise ValueError("require burn_in >= 0, draws >= 1, thin >= 1, state_thin >= 1")

    @property
    def has_corr(self) -> bool:
        """C/CS/CSS carry covariance states; S/SS force A_t = I."""
        return self.variant in ("C", "CS", "CSS")

    @property
    def has_skew(self) -> bool:
        """C forces beta_i = 0 (symmetric t)."""
        return self.variant != "C"

    @property
    def has_sparsity(self) -> bool:
        """S/CS force kappa = 1 (slab always)."""
        return self.variant in ("SS", "CSS")

    @property
    def p(self) -> int:
        return self.k * (self.k - 1) // 2

    def with_seed(self, seed: int) -> "ModelConfig":
        return replace(self, seed=seed)


@dataclass
class SeriesParams:
    """Per-series SV hyper-parameters plus skewness and its inclusion flag."""

    mu: float
    phi: float
    sigma: float
    rho: float
    nu: float
    beta: float = 0.0
    included: bool = True

    def __post_init__(self) -> None:
        if not abs(self.phi) < 1:
            raise ValueError("require |phi| < 1")
        if not abs(self.rho) < 1:
            raise ValueError("require |rho| < 1")
        if not self.sigma > 0:
            raise ValueError("require sigma > 0")
        if not self.nu > 4:
            raise ValueError("require nu > 4")
        if not self.included and self.beta != 0.0:
            raise ValueError("included=False forces beta = 0")

    @property
    def c(self) -> float:
        return self.nu / (self.nu - 2.0)


@dataclass
class CovParams:
    """AR(1) hyper-parameters of one covariance-state process."""

    mu_a: float
    phi_a: float
    v_a: float

    def __post_init__(self) -> None:
        if not abs(self.phi_a) < 1:
            raise ValueError("require |phi_a| < 1")
        if not self.v_a > 0:
            raise ValueError("require v_a > 0")


@dataclass
class SparsityState:
    kappa: float

    def __post_init__(self) -> None:
        if not 0.0 < self.kappa < 1.0:
            raise ValueError("kappa must lie in (0, 1)")


@dataclass
class LatentStates:
    """Volatility paths h (k,T), mixing variables z (k,T), covariance states a (p,T).

    h_next holds the auxiliary h_{i,T+1} needed by the leverage terms at t=T.
    """

    h: np.ndarray
    z: np.ndarray
    a: np.ndarray
    h_next: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.h = np.asarray(self.h, dtype=float)
        self.z = np.asarray(self.z, dtype=float)
        self.a = np.asarray(self.a, dtype=float)
        k, T = self.h.shape
        if self.z.shape != (k, T):
            raise ValueError("z must have the same (k, T) shape as h")
        p = k * (k - 1) // 2
        if self.a.shape != (p, T):
            raise ValueError(f"a must have shape ({p}, {T})")
        if np.any(self.z <= 0):
            raise ValueError("z must be strictly positive")
        if self.h_next is not None:
            self.h_next = np.asarray(self.h_next, dtype=float)
            if self.h_next.shape != (k,):
                raise ValueError("h_next must have shape (k,)")

    @property
    def k(self) -> int:
        return self.h.shape[0]

    @property
    def T(self) -> int:
        return self.h.shape[1]


def k_from_p(p: int) -> int:
    k = int((1 + np.sqrt(1 + 8 * p)) / 2 + 0.5)
    if k * (k - 1) // 2 != p:
        raise ValueError(f"{p} is not a valid strictly-lower-triangle length")
    return k


def row_slices(k: int) -> list[slice]:
    """Row-major stacking map: slice j (j = 0..k-2) holds row j+2's free entries."""
    out, off = [], 0
    for i in range(1, k):
        out.append(slice(off, off + i))
        off += i
    return out


def build_A(a_t: np.ndarray, k: int | None = None) -> np.ndarray:
    """Lower unitriangular A with entry (i, j) = -a for i > j, stacked by rows."""
    a_t = np.asarray(a_t, dtype=float).ravel()
    if k is None:
        k = k_from_p(a_t.size)
    elif a_t.size != k * (k - 1) // 2:
        raise ValueError(f"need k(k-1)/2 = {k * (k - 1) // 2} values, got {a_t.size}")
    A = np.eye(k)
    off = 0
    for i in range(1, k):
        A[i, :i] = -a_t[off:off + i]
        off += i
    return A


def sigma_t(a_t: np.ndarray, h_t: np.ndarray) -> np.ndarray:
    """Sigma_t = A^{-1} diag(exp(h)) A^{-T}, symmetric positive definite."""
    h_t = np.asarray(h_t, dtype=float)
    if np.any(~np.isfinite(h_t)):
        raise ValueError("h contains non-finite values")
    if np.any(np.abs(h_t) > H_CLAMP):
        raise OverflowError(f"|h| > {H_CLAMP}: exp(h) out of supported range")
    A = build_A(a_t, k=h_t.size)
    lam = np.exp(h_t / 2.0)
    X = np.linalg.solve(A, np.diag(lam))
    S = X @ X.T
    return 0.5 * (S + S.T)


def structural_transform(y_t: np.ndarray, a_t: np.ndarray) -> np.ndarray:
    """ytilde_t = A_t y_t."""
    y_t = np.asarray(y_t, dtype=float)
    A = build_A(a_t, k=y_t.size)
    return A @ y_t


def structural_transform_panel(y: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Apply A_t to every column of y (k, T) given states a (p, T); vectorized over t."""
    k, T = y.shape
    out = y.copy()
    off = 0
    for i in range(1, k):
        out[i] -= np.sum(a[off:off + i, :] * y[:i, :], axis=0)
        off += i
    return out


def inverse_structural_panel(ytilde: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Solve A_t y_t = ytilde_t for every t by forward substitution."""
    k, T = ytilde.shape
    y = np.empty_like(ytilde)
    y[0] = ytilde[0]
    off = 0
    for i in range(1, k):
        y[i] = ytilde[i] + np.sum(a[off:off + i, :] * y[:i, :], axis=0)
        off += i
    return y
