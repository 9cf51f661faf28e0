"""Price ingestion, run configuration files, and the series-ordering pre-analysis."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, fields, replace

import numpy as np

from .msv_core import PRIOR_PRESETS, ModelConfig, PriorSet


@dataclass
class ReturnsPanel:
    """T x k log returns with a date index; rejects NaN/Inf and duplicate names."""

    dates: list[str]
    names: list[str]
    returns: np.ndarray

    def __post_init__(self) -> None:
        self.returns = np.asarray(self.returns, dtype=float)
        if self.returns.ndim != 2:
            raise ValueError("returns must be a T x k matrix")
        T, k = self.returns.shape
        if len(self.dates) != T:
            raise ValueError("date index length must equal T")
        if len(self.names) != k:
            raise ValueError("need one name per series")
        if len(set(self.names)) != k:
            raise ValueError("series names must be unique")
        if np.any(~np.isfinite(self.returns)):
            raise ValueError("returns contain NaN or infinite values")

    @property
    def T(self) -> int:
        return self.returns.shape[0]

    @property
    def k(self) -> int:
        return self.returns.shape[1]

    def select(self, order) -> "ReturnsPanel":
        order = list(order)
        return ReturnsPanel(dates=list(self.dates),
                            names=[self.names[i] for i in order],
                            returns=self.returns[:, order].copy())


def _parse_iso_date(s: str) -> tuple[int, int, int]:
    parts = s.split("-")
    if len(parts) != 3:
        raise ValueError
    y, m, d = (int(p) for p in parts)
    if not (1 <= m <= 12 and 1 <= d <= 31):
        raise ValueError
    return y, m, d


def load_prices_csv(path) -> ReturnsPanel:
    """CSV `date,<name1>,...,<namek>` of strictly positive closing prices,
    ISO dates ascending; returns are log differences (T = rows - 1)."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or not lines[0].strip():
        raise ValueError(f"{path}: empty file")
    header = [c.strip() for c in lines[0].split(",")]
    if len(header) < 2 or header[0].lower() != "date":
        raise ValueError(f"{path}:1: header must be 'date,<name1>,...'")
    names = header[1:]
    if len(set(names)) != len(names):
        raise ValueError(f"{path}:1: duplicate series names")
    dates, prices = [], []
    for lineno, ln in enumerate(lines[1:], start=2):
        if not ln.strip():
            continue
        cells = ln.split(",")
        if len(cells) != len(header):
            raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(cells)}")
        try:
            _parse_iso_date(cells[0].strip())
        except ValueError:
            raise ValueError(f"{path}:{lineno}: unparsable ISO date {cells[0]!r}") from None
        row = []
        for j, cell in enumerate(cells[1:], start=1):
            try:
                v = float(cell)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: unparsable price {cell!r}") from None
            if not math.isfinite(v) or v <= 0.0:
                raise ValueError(f"{path}:{lineno}: non-positive price for {names[j - 1]}")
            row.append(v)
        dates.append(cells[0].strip())
        prices.append(row)
    if len(prices) < 2:
        raise ValueError(f"{path}: need at least two price rows")
    if any(d2 <= d1 for d1, d2 in zip(dates, dates[1:])):
        raise ValueError(f"{path}: dates must be strictly ascending")
    P = np.asarray(prices, dtype=float)
    returns = np.diff(np.log(P), axis=0)
    return ReturnsPanel(dates=dates[1:], names=names, returns=returns)


def write_prices_csv(panel: ReturnsPanel, path, p0: float = 100.0) -> None:
    """Inverse of load_prices_csv: cumulate exp(returns) from a base price.

    Full-precision prices so a round trip reproduces returns to 1e-12.
    """
    prices = p0 * np.exp(np.cumsum(panel.returns, axis=0))
    prices = np.vstack([np.full(panel.k, p0), prices])
    first = _previous_date(panel.dates[0])
    with open(path, "w") as fh:
        fh.write("date," + ",".join(panel.names) + "\n")
        for date, row in zip([first] + list(panel.dates), prices):
            fh.write(date + "," + ",".join("%.17g" % v for v in row) + "\n")


def _previous_date(iso: str) -> str:
    import datetime

    d = datetime.date.fromisoformat(iso)
    return (d - datetime.timedelta(days=1)).isoformat()


def synthetic_dates(T: int, start: str = "2006-01-02") -> list[str]:
    import datetime

    d0 = datetime.date.fromisoformat(start)
    out, d = [], d0
    while len(out) < T:
        if d.weekday() < 5:
            out.append(d.isoformat())
        d += datetime.timedelta(days=1)
    return out


# ---------------------------------------------------------------------------
# flat key = value run configuration

_MODEL_KEYS = {"variant", "k", "burn_in", "draws", "thin", "state_thin", "seed",
               "priors", "data", "threads"}
_SIM_KEYS = {"sim.T", "sim.k", "sim.phi", "sim.sigma", "sim.rho", "sim.mu", "sim.nu",
             "sim.a_level", "sim.beta_config", "sim.betas", "sim.replications",
             "sim.phi_a", "sim.v_a", "sim.configs"}
_PLAN_KEYS = {"plan.t1", "plan.step", "plan.refits", "plan.d_max", "plan.max_draws",
              "forecast.fit_dir"}
_BACKTEST_KEYS = {"backtest.archive", "backtest.alphas", "backtest.targets",
                  "backtest.target_free"}
_GEWEKE_KEYS = {"geweke.sweeps", "geweke.record_thin", "geweke.T", "geweke.corrupted"}
_PRIOR_FIELDS = {f.name for f in fields(PriorSet)}
KNOWN_KEYS = (_MODEL_KEYS | _SIM_KEYS | _PLAN_KEYS | _BACKTEST_KEYS | _GEWEKE_KEYS
              | {f"prior.{name}" for name in _PRIOR_FIELDS})


@dataclass
class RunConfig:
    """Validated view over a flat key = value config file."""

    values: dict

    @classmethod
    def parse(cls, text: str, source: str = "<config>") -> "RunConfig":
        values: dict = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{source}:{lineno}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in KNOWN_KEYS:
                raise ValueError(f"{source}:{lineno}: unknown key {key!r}")
            if key in values:
                raise ValueError(f"{source}:{lineno}: duplicate key {key!r}")
            values[key] = val
        return cls(values=values)

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.parse(fh.read(), source=str(path))

    def get(self, key: str, default=None):
        return self.values.get(key, default)

    def get_int(self, key: str, default: int | None = None) -> int | None:
        v = self.values.get(key)
        return default if v is None else int(v)

    def get_float(self, key: str, default: float | None = None) -> float | None:
        v = self.values.get(key)
        return default if v is None else float(v)

    def get_bool(self, key: str, default: bool = False) -> bool:
        v = self.values.get(key)
        if v is None:
            return default
        if v.lower() in ("1", "true", "yes"):
            return True
        if v.lower() in ("0", "false", "no"):
            return False
        raise ValueError(f"{key}: expected a boolean, got {v!r}")

    def get_floats(self, key: str, default=()) -> tuple:
        v = self.values.get(key)
        if v is None:
            return tuple(default)
        return tuple(float(s) for s in v.split(",") if s.strip())

    def priors(self) -> PriorSet:
        preset = self.values.get("priors", "baseline")
        if preset not in PRIOR_PRESETS:
            raise ValueError(f"priors must be one of {sorted(PRIOR_PRESETS)}")
        base = PRIOR_PRESETS[preset]
        overrides = {key.split(".", 1)[1]: float(val) for key, val in self.values.items()
                     if key.startswith("prior.")}
        return replace(base, **overrides) if overrides else base

    def model_config(self, seed: int | None = None, k: int | None = None) -> ModelConfig:
        k_val = self.get_int("k", k)
        if k_val is None:
            raise ValueError("config needs 'k' (or a data file to infer it)")
        return ModelConfig(
            k=k_val,
            variant=self.values.get("variant", "CSS"),
            priors=self.priors(),
            burn_in=self.get_int("burn_in", 5000),
            draws=self.get_int("draws", 50000),
            thin=self.get_int("thin", 1),
            state_thin=self.get_int("state_thin", 5),
            seed=self.get_int("seed", 0) if seed is None else seed,
        )

    def hash(self) -> str:
        blob = "\n".join(f"{k} = {self.values[k]}" for k in sorted(self.values))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# series ordering pre-analysis

def order_series(panel: ReturnsPanel, config: ModelConfig,
                 burn_in: int | None = None, draws: int | None = None) -> list[int]:
    """Univariate skew-t SV fit per series; indices sorted by ascending
    posterior mean of the skewness parameter, ties broken by original index."""
    from .engine import run_mcmc

    means = []
    for i in range(panel.k):
        sub = ModelConfig(
            k=1, variant="S", priors=config.priors,
            burn_in=config.burn_in if burn_in is None else burn_in,
            draws=config.draws if draws is None else draws,
            thin=config.thin, state_thin=config.state_thin,
            seed=int(np.random.SeedSequence(config.seed, spawn_key=(11, i))
                     .generate_state(1)[0]),
        )
        try:
            fit = run_mcmc(sub, panel.returns[:, [i]])
        except Exception as e:
            raise RuntimeError(f"univariate fit failed for series {panel.names[i]}: {e}") from e
        means.append(float(fit.beta[:, 0].mean()))
    return sorted(range(panel.k), key=lambda i: (means[i], i))
