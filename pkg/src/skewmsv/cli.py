"""Command-line surface tying the pipelines together.

Subcommands: simulate, order, fit, forecast, backtest, geweke-test. Errors
exit nonzero after writing one machine-readable JSON record to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import portfolio as pf
from .data_io import RunConfig, ReturnsPanel, load_prices_csv, order_series
from .engine import config_hash, geweke_joint_test, load_draws, run_mcmc, save_draws
from .forecast import ForecastPlan, load_archive, predictive_draws, recursive_forecast
from .simulate import BETA_CONFIGS, SimScenario, skewness_study, write_study_csv


class CliError(Exception):
    def __init__(self, message: str, code: int = 2, **context):
        super().__init__(message)
        self.code = code
        self.context = context


def _write_manifest(outdir, entries: dict) -> None:
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "run_manifest.txt"), "w") as fh:
        for key, val in entries.items():
            fh.write(f"{key} = {val}\n")


def _base_manifest(cfg: RunConfig, args) -> dict:
    return {
        "command": args.command,
        "config_hash": cfg.hash(),
        "seed": args.seed if args.seed is not None else cfg.get_int("seed", 0),
        "threads": args.threads,
        "created_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }


def _load_panel(cfg: RunConfig, args) -> ReturnsPanel:
    path = cfg.get("data")
    if path is None:
        raise CliError("config key 'data' (prices CSV) is required", key="data")
    if not os.path.exists(path):
        raise CliError(f"data file not found: {path}", path=path)
    return load_prices_csv(path)


def _seed(cfg: RunConfig, args) -> int:
    return args.seed if args.seed is not None else cfg.get_int("seed", 0)


def cmd_simulate(cfg: RunConfig, args) -> int:
    names = cfg.get("sim.configs")
    config_ids = [s.strip() for s in names.split(",")] if names else [
        cfg.get("sim.beta_config", "i")]
    for cid in config_ids:
        if cid not in BETA_CONFIGS and cfg.get("sim.betas") is None:
            raise CliError(f"unknown beta config {cid!r}", known=sorted(BETA_CONFIGS))
    betas = None
    if cfg.get("sim.betas"):
        betas = tuple(float(s) for s in cfg.get("sim.betas").split(","))
    scenarios = [SimScenario(
        T=cfg.get_int("sim.T", 1000), k=cfg.get_int("sim.k", 5),
        phi=cfg.get_float("sim.phi", 0.995), sigma=cfg.get_float("sim.sigma", 0.05),
        rho=cfg.get_float("sim.rho", -0.5), mu=cfg.get_float("sim.mu", -9.0),
        nu=cfg.get_float("sim.nu", 20.0), a_level=cfg.get_float("sim.a_level", 0.5),
        beta_config=cid, betas=betas,
        replications=cfg.get_int("sim.replications", 200),
        phi_a=cfg.get_float("sim.phi_a"), v_a=cfg.get_float("sim.v_a"),
    ) for cid in config_ids]
    rows = skewness_study(scenarios, seed=_seed(cfg, args), workers=args.threads)
    out = os.path.join(args.out, "skewness_study.csv")
    os.makedirs(args.out, exist_ok=True)
    write_study_csv(rows, out)
    _write_manifest(args.out, {**_base_manifest(cfg, args), "artifact": "skewness_study.csv"})
    print(f"wrote {out}")
    return 0


def cmd_order(cfg: RunConfig, args) -> int:
    panel = _load_panel(cfg, args)
    model = cfg.model_config(seed=_seed(cfg, args), k=panel.k)
    burn = cfg.get_int("burn_in", 300)
    draws = cfg.get_int("draws", 600)
    perm = order_series(panel, model, burn_in=burn, draws=draws)
    os.makedirs(args.out, exist_ok=True)
    out = os.path.join(args.out, "ordering.csv")
    with open(out, "w") as fh:
        fh.write("rank,series_index,name\n")
        for rank, idx in enumerate(perm):
            fh.write(f"{rank},{idx},{panel.names[idx]}\n")
    _write_manifest(args.out, {**_base_manifest(cfg, args), "artifact": "ordering.csv"})
    print(f"wrote {out}")
    return 0


def cmd_fit(cfg: RunConfig, args) -> int:
    panel = _load_panel(cfg, args)
    model = cfg.model_config(seed=_seed(cfg, args), k=panel.k)
    draws = run_mcmc(model, panel, threads=args.threads)
    store = os.path.join(args.out, "draws")
    save_draws(draws, store)
    _write_manifest(args.out, {**_base_manifest(cfg, args),
                               "artifact": "draws/", "model_hash": config_hash(model)})
    print(f"wrote {store}")
    return 0


def cmd_forecast(cfg: RunConfig, args) -> int:
    fit_dir = cfg.get("forecast.fit_dir")
    if fit_dir is not None:
        draws = load_draws(os.path.join(fit_dir, "draws"))
        d_max = cfg.get_int("plan.d_max", 5)
        drawset = predictive_draws(draws, d_max,
                                   max_draws=cfg.get_int("plan.max_draws", 2000))
        os.makedirs(args.out, exist_ok=True)
        out = os.path.join(args.out, "predictive_moments.csv")
        with open(out, "w") as fh:
            fh.write("horizon,series,mean,variance\n")
            for d in range(1, d_max + 1):
                g, D = drawset.moments(d)
                for i in range(g.size):
                    fh.write(f"{d},{i},{g[i]:.17g},{D[i, i]:.17g}\n")
        _write_manifest(args.out, {**_base_manifest(cfg, args),
                                   "artifact": "predictive_moments.csv",
                                   "fit_dir": fit_dir})
        print(f"wrote {out}")
        return 0

    panel = _load_panel(cfg, args)
    model = cfg.model_config(seed=_seed(cfg, args), k=panel.k)
    t1 = cfg.get_int("plan.t1")
    if t1 is None:
        raise CliError("config key 'plan.t1' is required for recursive forecasting")
    plan = ForecastPlan(
        t1=t1, step=cfg.get_int("plan.step", 5), refits=cfg.get_int("plan.refits", 1),
        d_max=cfg.get_int("plan.d_max", 5), max_draws=cfg.get_int("plan.max_draws", 2000),
    )
    result = recursive_forecast(plan, model, panel, args.out, workers=args.threads)
    _write_manifest(args.out, {**_base_manifest(cfg, args), "artifact": "forecast.csv",
                               "failures": len(result["failures"])})
    print(f"wrote {os.path.join(args.out, 'forecast.csv')} "
          f"({len(result['records'])} records, {len(result['failures'])} failures)")
    return 0


def cmd_backtest(cfg: RunConfig, args) -> int:
    archive_dir = cfg.get("backtest.archive")
    if archive_dir is None:
        raise CliError("config key 'backtest.archive' is required")
    archive = load_archive(archive_dir)
    rows = pf.backtest_report(
        archive,
        alphas=cfg.get_floats("backtest.alphas", pf.DEFAULT_ALPHAS),
        targets=cfg.get_floats("backtest.targets", pf.DEFAULT_TARGETS),
        include_target_free=cfg.get_bool("backtest.target_free", True),
        model=cfg.get("variant", ""),
    )
    os.makedirs(args.out, exist_ok=True)
    out = os.path.join(args.out, "var_backtest.csv")
    pf.write_backtest_csv(rows, out)
    _write_manifest(args.out, {**_base_manifest(cfg, args), "artifact": "var_backtest.csv",
                               "archive": archive_dir})
    print(f"wrote {out}")
    return 0


def cmd_geweke(cfg: RunConfig, args) -> int:
    model = cfg.model_config(seed=_seed(cfg, args), k=cfg.get_int("k", 2))
    report = geweke_joint_test(
        model,
        n_sweeps=cfg.get_int("geweke.sweeps", 100000),
        record_thin=cfg.get_int("geweke.record_thin", 50),
        T=cfg.get_int("geweke.T", 30),
        corrupted=cfg.get_bool("geweke.corrupted", False),
    )
    os.makedirs(args.out, exist_ok=True)
    out = os.path.join(args.out, "geweke_report.csv")
    with open(out, "w") as fh:
        fh.write("parameter,n,ks_stat,p_value\n")
        for name, n, ks, p in report.rows:
            fh.write(f"{name},{n},{ks:.6g},{p:.6g}\n")
    _write_manifest(args.out, {**_base_manifest(cfg, args), "artifact": "geweke_report.csv",
                               "passed": report.passed()})
    print(report.as_text())
    print(f"wrote {out}; suite {'PASSED' if report.passed() else 'FAILED'}")
    return 0 if report.passed() else 1


COMMANDS = {
    "simulate": cmd_simulate,
    "order": cmd_order,
    "fit": cmd_fit,
    "forecast": cmd_forecast,
    "backtest": cmd_backtest,
    "geweke-test": cmd_geweke,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skewmsv",
                                     description="Cholesky MSV with skew-t errors")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="flat key = value config file")
        p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--threads", type=int, default=1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        if not os.path.exists(args.config):
            raise CliError(f"config file not found: {args.config}", path=args.config)
        cfg = RunConfig.load(args.config)
        if args.threads < 1:
            raise CliError("--threads must be >= 1")
        return COMMANDS[args.command](cfg, args)
    except CliError as e:
        record = {"error": type(e).__name__, "message": str(e), **e.context}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return e.code
    except (ValueError, RuntimeError, OSError) as e:
        record = {"error": type(e).__name__, "message": str(e)}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
