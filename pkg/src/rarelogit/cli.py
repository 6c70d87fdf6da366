"""Command-line driver: ``rarelogit {fit,limit,simulate,coverage,plan,sample}``.

Exit status: 0 success, 2 parse/config error, 3 numerical failure,
4 overflow. Errors are reported on stderr as one line ``error CODE: text``.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .asymptotics import (
    compute_covariance,
    confidence_interval,
    plan_sample_size,
    sigma_1d_gaussian,
    solve_beta_star,
)
from .distributions import DensityModel, EmpiricalModel, GaussianModel, MinoritySample, sample_majority
from .errors import ParseError, RareLogitError, SeparationSuspected
from .logistic import LogisticData, fit
from .montecarlo import Ecdf, MCConfig, run_experiment
from .numerics import Rng, make_quadrature, normal_cdf, normal_quantile

COMMANDS = ("fit", "limit", "simulate", "coverage", "plan", "sample")

DEFAULTS = {
    "model": "gaussian",
    "mu": None,
    "sigma": None,
    "cov": None,
    "xbar": None,
    "minority_file": None,
    "data": None,
    "density_file": None,
    "n_grid": "100,200,500,1000,5000",
    "replicates": "100",
    "seed": "0",
    "theta": "0.05",
    "epsilon": "0.1",
    "out": None,
    "format": "json",
    "workers": "1",
}

SEPARATION_HINT = ("hint: no finite maximiser; check that majority points lie on "
                   "both sides of the minority mean in every direction")


@dataclass
class RunConfig:
    command: str
    settings: dict

    def get(self, key: str):
        return self.settings.get(key)

    def require(self, key: str) -> str:
        v = self.settings.get(key)
        if v is None:
            raise ParseError(f"--{key.replace('_', '-')} is required for '{self.command}'")
        return v

    def floats(self, key: str) -> np.ndarray:
        return io.parse_vector(self.require(key), key)

    def float(self, key: str) -> float:
        v = self.floats(key)
        if v.size != 1:
            raise ParseError(f"--{key}: expected a single number")
        return float(v[0])

    def int(self, key: str) -> int:
        try:
            return int(self.require(key))
        except ValueError:
            raise ParseError(f"--{key}: expected an integer") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rarelogit", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--model", choices=("gaussian", "empirical", "density"))
    p.add_argument("--mu", help="majority mean, comma-separated")
    p.add_argument("--sigma", help="majority standard deviation (1D)")
    p.add_argument("--cov", help="majority covariance, rows ';'-separated")
    p.add_argument("--xbar", help="minority mean, comma-separated")
    p.add_argument("--minority-file", help="CSV of minority points (x1..xd)")
    p.add_argument("--data", help="labelled dataset CSV (y,x1..xd)")
    p.add_argument("--density-file", help="tabulated density CSV (x,density)")
    p.add_argument("--n-grid", help="comma-separated majority sizes")
    p.add_argument("--replicates")
    p.add_argument("--seed")
    p.add_argument("--theta", help="1 - confidence level")
    p.add_argument("--epsilon", help="target accuracy for 'plan'")
    p.add_argument("--out", help="output file (fit/limit/plan/sample) or directory (simulate/coverage)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--workers", help="threads for Monte Carlo replicates")
    return p


def parse_run_config(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    settings = dict(DEFAULTS)
    if ns.config:
        cfg = io.read_config(ns.config)
        unknown = set(cfg) - set(DEFAULTS)
        if unknown:
            raise ParseError(f"{ns.config}: unknown keys {sorted(unknown)}")
        settings.update(cfg)
    for key in DEFAULTS:
        val = getattr(ns, key)
        if val is not None:
            settings[key] = val
    if settings["format"] not in ("csv", "json"):
        raise ParseError("--format must be csv or json")
    for key in ("data", "minority_file", "density_file", "config"):
        path = settings.get(key) if key != "config" else ns.config
        if path is not None and not Path(path).is_file():
            raise ParseError(f"--{key.replace('_', '-')}: {path} does not exist")
    return RunConfig(ns.command, settings)


def density_from_table(xs: np.ndarray, ds: np.ndarray) -> DensityModel:
    """Piecewise-linear density through the table, renormalised to mass 1."""
    def raw(x):
        return np.interp(x, xs, ds, left=0.0, right=0.0)

    support = (float(xs[0]), float(xs[-1]))
    total = make_quadrature("density", 64, support, density=raw).integrate(np.ones_like)
    if not total > 0:
        raise ParseError("tabulated density has zero mass")
    return DensityModel(lambda x: raw(x) / total, support)


def build_model(cfg: RunConfig):
    kind = cfg.get("model")
    if kind == "gaussian":
        if cfg.get("cov") is not None:
            cov = io.parse_matrix(cfg.get("cov"), "cov")
        elif cfg.get("sigma") is not None:
            s = cfg.float("sigma")
            if not s > 0:
                raise ParseError("--sigma must be positive")
            cov = np.array([[s * s]])
        else:
            cov = None
        mu = cfg.floats("mu") if cfg.get("mu") is not None else None
        if cov is None:
            cov = np.eye(1 if mu is None else len(mu))
        if mu is None:
            mu = np.zeros(len(cov))
        if len(mu) != len(cov):
            raise ParseError("--mu and --cov dimensions differ")
        try:
            return GaussianModel(mu, cov)
        except RareLogitError as exc:
            raise ParseError(str(exc)) from None
    if kind == "empirical":
        majority, _ = io.read_dataset(cfg.require("data"))
        if len(majority) == 0:
            raise ParseError("--data has no y=0 rows for the empirical model")
        return EmpiricalModel(majority)
    if kind == "density":
        return density_from_table(*io.read_density_table(cfg.require("density_file")))
    raise ParseError(f"unknown model kind {kind!r}")


def build_minority(cfg: RunConfig, dim: int) -> MinoritySample:
    if cfg.get("minority_file") is not None:
        pts = io.read_points(cfg.get("minority_file"))
    elif cfg.get("xbar") is not None:
        pts = cfg.floats("xbar")[None, :]
    elif cfg.get("data") is not None:
        _, pts = io.read_dataset(cfg.get("data"))
        if len(pts) == 0:
            raise ParseError("--data has no y=1 rows")
    else:
        raise ParseError("need --xbar, --minority-file or --data for the minority class")
    if pts.shape[1] != dim:
        raise ParseError(f"minority points have dimension {pts.shape[1]}, model has {dim}")
    return MinoritySample.from_points(pts)


def _xbar(cfg: RunConfig, dim: int) -> np.ndarray:
    if cfg.get("xbar") is not None:
        xb = cfg.floats("xbar")
        if xb.size != dim:
            raise ParseError(f"--xbar has dimension {xb.size}, model has {dim}")
        return xb
    return build_minority(cfg, dim).mean


def _g6(x) -> str:
    return format(float(x), ".6g")


def _vec6(v) -> str:
    return "[" + ", ".join(_g6(x) for x in np.ravel(v)) + "]"


def _flatten(obj, prefix="") -> list[tuple[str, object]]:
    if isinstance(obj, dict):
        out = []
        for k, v in obj.items():
            out.extend(_flatten(v, f"{prefix}.{k}" if prefix else k))
        return out
    if isinstance(obj, (list, tuple)):
        out = []
        for i, v in enumerate(obj):
            out.extend(_flatten(v, f"{prefix}[{i}]"))
        return out
    return [(prefix, obj)]


def _cell(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v).lower()
    if isinstance(v, float):
        return io.fmt(v)
    return str(v)


def write_report(report: dict, path, fmt: str) -> None:
    """JSON object or a two-column ``key,value`` CSV of the flattened report."""
    if fmt == "json":
        Path(path).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
        return
    lines = ["key,value"] + [f"{k},{_cell(v)}" for k, v in _flatten(report)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _tolist(a) -> list:
    return np.asarray(a, dtype=float).tolist()


def cmd_fit(cfg: RunConfig, out=sys.stdout) -> dict:
    majority, minority = io.read_dataset(cfg.require("data"))
    if len(majority) == 0 or len(minority) == 0:
        raise ParseError(f"{cfg.get('data')}: both classes (y=0 and y=1) must be present")
    data = LogisticData.from_arrays(majority, minority)
    try:
        res = fit(data)
    except SeparationSuspected as exc:
        raise SeparationSuspected(f"{exc}; {SEPARATION_HINT}") from None
    report = {
        "command": "fit", "N": res.N, "n": res.n, "alpha": res.alpha,
        "beta": _tolist(res.beta), "grad_norm": res.grad_norm,
        "iterations": res.iterations, "converged": res.converged, "loss": res.loss,
        "xbar": _tolist(data.minority.mean),
    }
    print(f"N={res.N} n={res.n} alpha_N={_g6(res.alpha)} beta_N={_vec6(res.beta)} "
          f"grad_norm={_g6(res.grad_norm)} iterations={res.iterations} "
          f"converged={res.converged}", file=out)
    return report


def cmd_limit(cfg: RunConfig, out=sys.stdout) -> dict:
    model = build_model(cfg)
    xbar = _xbar(cfg, model.dim)
    theta = float(cfg.require("theta"))
    beta = solve_beta_star(model, xbar)
    inf = compute_covariance(model, xbar, beta)
    grid = io.parse_int_list(cfg.require("n_grid"), "n-grid")
    intervals = []
    for N in grid:
        ci = confidence_interval(inf, N, theta)
        intervals.append({"N": N, "half_width": _tolist((ci.upper - ci.lower) / 2),
                          "lower": _tolist(ci.lower), "upper": _tolist(ci.upper)})
    report = {
        "command": "limit", "model": model.kind, "xbar": _tolist(xbar),
        "beta_star": _tolist(inf.beta_star), "Sigma": _tolist(inf.Sigma),
        "H": _tolist(inf.H), "V": _tolist(inf.V), "chol_A": _tolist(inf.chol_A),
        "residual": inf.residual, "theta": theta, "intervals": intervals,
    }
    print(f"beta* = {_vec6(inf.beta_star)}", file=out)
    print(f"Sigma = {_vec6(inf.Sigma)}", file=out)
    for item in intervals:
        print(f"N={item['N']}: {100 * (1 - theta):g}% half-width {_vec6(item['half_width'])}",
              file=out)
    return report


def _mc_config(cfg: RunConfig) -> MCConfig:
    model = build_model(cfg)
    minority = build_minority(cfg, model.dim)
    return MCConfig(model, minority, io.parse_int_list(cfg.require("n_grid"), "n-grid"),
                    cfg.int("replicates"), cfg.int("seed"), float(cfg.require("theta")),
                    max(1, cfg.int("workers")))


def _summary_rows(report) -> list[dict]:
    return [{"N": r.N, "ks": r.ks, "coverage": r.coverage,
             "mean_alpha_decay": r.mean_alpha_decay, "successes": len(r.beta_draws),
             "failures": r.failures} for r in report.records]


def _ecdf_tables(report) -> dict:
    tables = {}
    for r in report.records:
        for k in range(r.standardized.shape[1]):
            vals = r.standardized[:, k]
            if vals.size == 0:
                continue
            e = Ecdf(vals)
            sd = math.sqrt(report.Sigma[k, k])
            x = e.sorted_values
            name = f"N{r.N}" if r.standardized.shape[1] == 1 else f"N{r.N}_k{k + 1}"
            tables[name] = {"value": _tolist(x), "ecdf": _tolist(e(x)),
                            "theoretical_cdf": _tolist(normal_cdf(x / sd))}
    return tables


def _print_summary(rows, theta, out):
    print(f"{'N':>7} {'ks':>9} {'coverage':>9} {'N e^alpha':>10} {'fail':>5}", file=out)
    for row in rows:
        print(f"{row['N']:>7} {_g6(row['ks']):>9} {_g6(row['coverage']):>9} "
              f"{_g6(row['mean_alpha_decay']):>10} {row['failures']:>5}", file=out)
    print(f"nominal coverage {1 - theta:g}", file=out)


def cmd_simulate(cfg: RunConfig, out=sys.stdout) -> dict:
    config = _mc_config(cfg)
    report = run_experiment(config)
    rows = _summary_rows(report)
    _print_summary(rows, config.theta, out)
    return {"command": "simulate", "beta_star": _tolist(report.beta_star),
            "Sigma": _tolist(report.Sigma), "seed": config.seed,
            "replicates": config.replicates, "theta": config.theta,
            "summary": rows, "ecdf": _ecdf_tables(report)}


def cmd_coverage(cfg: RunConfig, out=sys.stdout) -> dict:
    config = _mc_config(cfg)
    report = run_experiment(config)
    rows = [{"N": r.N, "coverage": r.coverage, "successes": len(r.beta_draws),
             "failures": r.failures} for r in report.records]
    for row in rows:
        print(f"N={row['N']}: coverage {_g6(row['coverage'])} "
              f"(nominal {1 - config.theta:g}, {row['successes']} fits)", file=out)
    return {"command": "coverage", "beta_star": _tolist(report.beta_star),
            "Sigma": _tolist(report.Sigma), "theta": config.theta, "seed": config.seed,
            "replicates": config.replicates, "summary": rows}


def cmd_plan(cfg: RunConfig, out=sys.stdout) -> dict:
    if cfg.get("model") != "gaussian":
        raise ParseError("'plan' needs a 1D gaussian model")
    mu = cfg.float("mu") if cfg.get("mu") is not None else 0.0
    sigma = cfg.float("sigma") if cfg.get("sigma") is not None else 1.0
    xbar = cfg.float("xbar")
    eps = cfg.float("epsilon")
    theta = float(cfg.require("theta"))
    if not eps > 0 or not sigma > 0:
        raise ParseError("--epsilon and --sigma must be positive")
    plan = plan_sample_size(xbar, mu, sigma, eps)
    var = sigma_1d_gaussian(xbar, mu, sigma)
    half = math.sqrt(var / plan.N) * normal_quantile(1 - theta / 2)
    print(f"z = {_g6(plan.z_score)}  epsilon = {_g6(eps)}  N = {plan.N}"
          + ("  (saturated at 2^63-1)" if plan.saturated else ""), file=out)
    print(f"implied {100 * (1 - theta):g}% half-width at that N: {_g6(half)}", file=out)
    if abs(plan.z_score) >= 3:
        print("note: N grows like e^{2 z^2}; at |z| >= 3 the requirement runs to "
              "billions of majority samples", file=out)
    return {"command": "plan", "N": plan.N, "saturated": plan.saturated,
            "z_score": plan.z_score, "epsilon": eps, "sigma2_limit": var,
            "half_width": half, "theta": theta}


def cmd_sample(cfg: RunConfig, out=sys.stdout) -> dict:
    model = build_model(cfg)
    minority = build_minority(cfg, model.dim)
    N = io.parse_int_list(cfg.require("n_grid"), "n-grid")[0]
    X = sample_majority(model, N, Rng(cfg.int("seed"), 0, key=(N,)))
    path = cfg.require("out")
    io.write_dataset(path, X, minority.points)
    print(f"wrote {N} majority and {minority.n} minority rows to {path}", file=out)
    return {"command": "sample", "N": N, "n": minority.n, "path": str(path)}


HANDLERS = {"fit": cmd_fit, "limit": cmd_limit, "simulate": cmd_simulate,
            "coverage": cmd_coverage, "plan": cmd_plan, "sample": cmd_sample}


def _write_outputs(cfg: RunConfig, report: dict) -> None:
    path = cfg.get("out")
    fmt = cfg.get("format")
    if path is None or cfg.command == "sample":
        return
    if cfg.command in ("simulate", "coverage"):
        outdir = Path(path)
        outdir.mkdir(parents=True, exist_ok=True)
        if fmt == "json":
            write_report(report, outdir / f"{cfg.command}.json", "json")
            return
        _write_table(outdir / "summary.csv", report["summary"])
        for name, table in report.get("ecdf", {}).items():
            cols = list(table)
            rows = [dict(zip(cols, vals)) for vals in zip(*table.values())]
            _write_table(outdir / f"ecdf_{name}.csv", rows, cols)
        return
    write_report(report, path, fmt)


def _write_table(path, rows: list[dict], cols=None) -> None:
    cols = cols or (list(rows[0]) if rows else [])
    lines = [",".join(cols)] + [",".join(_cell(r[c]) for c in cols) for r in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def main(argv=None) -> int:
    try:
        cfg = parse_run_config(sys.argv[1:] if argv is None else argv)
        report = HANDLERS[cfg.command](cfg, sys.stdout)
        _write_outputs(cfg, report)
        if report.get("saturated"):
            print("error OVERFLOW: required sample size exceeds 2^63-1", file=sys.stderr)
            return 4
        return 0
    except RareLogitError as exc:
        msg = " ".join(str(exc).split())
        print(f"error {exc.code}: {msg}", file=sys.stderr)
        return exc.exit_status


if __name__ == "__main__":
    sys.exit(main())
