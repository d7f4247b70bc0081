"""Command-line entry point: simulate | analyze | evaluate | bootstrap | calibrate.

Every run writes a manifest.json recording the tool version, the fully
resolved configuration, the master seed, input digests and output digests.
Re-running a command with ``--config manifest.json`` byte-reproduces the data
outputs. Flag precedence: explicit flags > config file > documented defaults.

Exit codes: 0 success, 2 usage/config error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .calibration import AlphaGrid, calibrate_cost, calibrate_historical, calibrate_loss, calibrate_rate
from .errors import InvalidPrevalenceError, ResMetricsError
from .harness import SimConfig, drift_tests, run_grid
from .metrics import MetricSpec, build_path, metric_curve, optimize, auc as path_auc, parse_metric_spec
from .oracle import (
    f1_required_lr,
    implied_tradeoff_curve,
    likelihood_ratio,
    res_foc_residual,
    solve_interior_threshold,
)
from .pipeline import BootstrapConfig, RegimeSpec, bootstrap_study, build_regime, load_scores, stability_report
from .sampler import MODERATE, N_CAP_DEFAULT, STRONG, regime_by_name
from .metrics import WeightedSample

DEFAULT_SEED = 1729  # used when neither --seed nor RES_SEED is given
SEED_ENV_VAR = "RES_SEED"


class CLIUsageError(Exception):
    """Configuration or flag validation failure (exit code 2)."""


# --------------------------------------------------------------------------
# small helpers
# --------------------------------------------------------------------------

def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        return repr(x)
    return str(x)


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _parse_float_list(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise CLIUsageError(f"bad numeric list {text!r}: {exc}") from None


def _resolve_seed(flag_value, config):
    if flag_value is not None:
        return int(flag_value)
    if config.get("master_seed") is not None:
        return int(config["master_seed"])
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise CLIUsageError(f"{SEED_ENV_VAR}={env!r} is not an integer") from None
    return DEFAULT_SEED


def _load_config_file(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CLIUsageError(f"cannot read config {path}: {exc}") from None
    if "resolved_config" in obj:  # a manifest doubles as a config source
        return obj["resolved_config"]
    return obj


def _pick(flag_value, config, key, default):
    if flag_value is not None:
        return flag_value
    if config.get(key) is not None:
        return config[key]
    return default


def _manifest(outdir, command, resolved, seed, input_paths, output_names, started, finished):
    manifest = {
        "tool": "resmetrics",
        "version": __version__,
        "command": command,
        "resolved_config": resolved,
        "master_seed": seed,
        "input_digests": {str(p): _sha256(p) for p in input_paths},
        "outputs": {name: _sha256(os.path.join(outdir, name)) for name in output_names},
        "started_at": started,
        "finished_at": finished,
    }
    _write_json(os.path.join(outdir, "manifest.json"), manifest)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _ensure_outdir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _regimes_from_names(names) -> tuple:
    out = []
    for name in names:
        if name == "both":
            out.extend([MODERATE, STRONG])
        else:
            out.append(regime_by_name(name))
    seen = []
    for r in out:
        if r not in seen:
            seen.append(r)
    return tuple(seen)


def _validate_prevalences(pis) -> tuple:
    for pi in pis:
        if not 0.0 < pi < 1.0:
            raise CLIUsageError(f"prevalence {pi} outside the open interval (0, 1)")
    return tuple(pis)


# --------------------------------------------------------------------------
# simulate
# --------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    config = _load_config_file(args.config) if args.config else {}
    seed = _resolve_seed(args.seed, config)
    regime_names = _pick(
        args.regime and args.regime.split(","), config, "regimes", ["both"]
    )
    pis = _validate_prevalences(
        _pick(args.pi and _parse_float_list(args.pi), config, "prevalences", [1e-2, 1e-3, 1e-4])
    )
    reps = int(_pick(args.reps, config, "replications", 200))
    alphas = _pick(
        args.alpha and _parse_float_list(args.alpha), config, "alphas", [0.1, 0.25, 0.5]
    )
    metric_texts = _pick(
        args.metrics and args.metrics.split(","), config, "metrics", None
    )
    full_scale = bool(_pick(args.full_scale or None, config, "full_scale", False))
    n_cap = int(_pick(args.ncap, config, "n_cap", N_CAP_DEFAULT))
    auc_cutoff = float(_pick(args.auc_cutoff, config, "auc_size_cutoff", 1e6))
    n_pos_boundary = int(_pick(args.npos_boundary, config, "n_pos_at_boundary", 20))
    workers = int(_pick(args.threads, config, "workers", 1))

    try:
        regimes = _regimes_from_names(regime_names)
        if metric_texts:
            metric_set = tuple(parse_metric_spec(t) for t in metric_texts)
        else:
            base = [MetricSpec.f1(), MetricSpec.balanced_accuracy(), MetricSpec.mcc()]
            base.extend(MetricSpec.res(a) for a in alphas)
            base.append(MetricSpec.auc())
            metric_set = tuple(base)
        if full_scale:
            pis = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6) if args.pi is None and "prevalences" not in config else pis
            reps = 2000 if args.reps is None and "replications" not in config else reps
        sim = SimConfig(
            regimes=regimes,
            prevalences=pis,
            replications=reps,
            metric_set=metric_set,
            master_seed=seed,
            n_cap=n_cap,
            auc_size_cutoff=auc_cutoff,
            n_pos_at_boundary=n_pos_boundary,
            workers=workers,
        )
    except (ValueError, InvalidPrevalenceError) as exc:
        raise CLIUsageError(str(exc)) from None

    outdir = _ensure_outdir(args.out)
    started = _now()
    result = run_grid(sim)
    tests = drift_tests(result.records, cell_means=bool(args.cell_mean_drift))

    _write_csv(
        os.path.join(outdir, "raw.csv"),
        ["regime", "pi", "replication", "metric", "delta_star", "value"],
        [
            (r.regime, r.pi, r.replication, r.metric, r.delta_star, r.value)
            for r in result.records
        ],
    )
    _write_csv(
        os.path.join(outdir, "summary.csv"),
        ["regime", "pi", "metric", "n", "mean_delta", "sd_delta", "cv_delta",
         "min_delta", "max_delta", "mean_value", "sd_value", "cv_value", "error"],
        [
            (c.regime, c.pi, c.metric, c.n, c.mean_delta, c.sd_delta, c.cv_delta,
             c.min_delta, c.max_delta, c.mean_value, c.sd_value, c.cv_value, c.error)
            for c in result.cells
        ],
    )
    _write_json(
        os.path.join(outdir, "drift.json"),
        [
            {"metric": t.metric, "regime": t.regime, "rho": t.rho,
             "p_value": t.p_value, "n": t.n, "basis": t.basis, "error": t.error}
            for t in tests
        ],
    )
    resolved = {
        "regimes": [r.name for r in regimes],
        "prevalences": list(pis),
        "replications": reps,
        "metrics": [_spec_text(s) for s in metric_set],
        "master_seed": seed,
        "n_cap": n_cap,
        "auc_size_cutoff": auc_cutoff,
        "n_pos_at_boundary": n_pos_boundary,
        "workers": workers,
        "cell_mean_drift": bool(args.cell_mean_drift),
    }
    _manifest(outdir, "simulate", resolved, seed, [],
              ["raw.csv", "summary.csv", "drift.json"], started, _now())
    return 0


def _spec_text(spec: MetricSpec) -> str:
    k = spec.kind
    if k == "fbeta":
        return f"fbeta:{spec.beta:g}"
    if k == "res":
        return f"res:{spec.alpha:g}"
    if k == "genres":
        return f"genres:{spec.alpha:g}:{spec.gamma:g}"
    if k == "costloss":
        return f"costloss:{spec.c_fp:g}:{spec.c_fn:g}"
    return k


# --------------------------------------------------------------------------
# analyze
# --------------------------------------------------------------------------

def cmd_analyze(args) -> int:
    config = _load_config_file(args.config) if args.config else {}
    seed = _resolve_seed(args.seed, config)
    regime_names = _pick(args.regime and args.regime.split(","), config, "regimes", ["both"])
    alphas = _pick(args.alpha and _parse_float_list(args.alpha), config, "alphas", [0.1, 0.25, 0.5])
    pis = _validate_prevalences(
        _pick(args.pi and _parse_float_list(args.pi), config, "prevalences", [1e-2, 1e-3])
    )
    grid_points = int(_pick(args.grid_points, config, "grid_points", 201))
    tradeoff = bool(_pick(args.tradeoff or None, config, "tradeoff", False))
    budget = int(_pick(args.budget, config, "sample_budget", 10_000))
    n_cap = int(_pick(args.ncap, config, "n_cap", N_CAP_DEFAULT))
    for a in alphas:
        if not 0.0 < a < 1.0:
            raise CLIUsageError(f"alpha {a} outside (0, 1)")
    try:
        regimes = _regimes_from_names(regime_names)
    except ValueError as exc:
        raise CLIUsageError(str(exc)) from None

    outdir = _ensure_outdir(args.out)
    started = _now()
    eps = 1e-4
    grid = np.linspace(eps, 1.0 - eps, grid_points)
    doc = {"grid": grid.tolist(), "regimes": []}
    tidy_rows = []
    for regime in regimes:
        lam = [likelihood_ratio(regime, float(t)) for t in grid]
        entry = {
            "regime": regime.name,
            "lambda": lam,
            "res_rhs": {},
            "f1_rhs": {},
            "roots": [],
        }
        for t, v in zip(grid, lam):
            tidy_rows.append((regime.name, "lambda", "", float(t), v))
        for a in alphas:
            rhs = [res_foc_residual(regime, float(t), a).rhs for t in grid]
            entry["res_rhs"][f"{a:g}"] = rhs
            for t, v in zip(grid, rhs):
                tidy_rows.append((regime.name, "res_rhs", f"{a:g}", float(t), v))
            root = solve_interior_threshold(regime, a)
            entry["roots"].append(
                {"alpha": a, "delta": root,
                 "residual": res_foc_residual(regime, root, a).residual}
            )
        for pi in pis:
            rhs = [f1_required_lr(pi, float(t), regime) for t in grid]
            entry["f1_rhs"][f"{pi:g}"] = rhs
            for t, v in zip(grid, rhs):
                tidy_rows.append((regime.name, "f1_rhs", f"{pi:g}", float(t), v))
        if tradeoff:
            entry["tradeoff"] = {}
            specs = [MetricSpec.res(a) for a in alphas] + [MetricSpec.f1()]
            for spec in specs:
                curve = implied_tradeoff_curve(
                    regime, spec, pis, sample_budget=budget, seed=seed, n_cap=n_cap
                )
                entry["tradeoff"][spec.key] = {
                    "points": [
                        {"pi": p.pi, "delta_star": p.delta_star,
                         "lambda": None if math.isnan(p.lam) else p.lam,
                         "boundary": p.boundary}
                        for p in curve.points
                    ],
                    "flat": curve.degenerate_flat,
                }
        doc["regimes"].append(entry)
    _write_json(os.path.join(outdir, "foc.json"), doc)
    _write_csv(
        os.path.join(outdir, "foc_curves.csv"),
        ["regime", "family", "param", "delta", "value"],
        tidy_rows,
    )
    resolved = {
        "regimes": [r.name for r in regimes],
        "alphas": list(alphas),
        "prevalences": list(pis),
        "grid_points": grid_points,
        "tradeoff": tradeoff,
        "sample_budget": budget,
        "n_cap": n_cap,
        "master_seed": seed,
    }
    _manifest(outdir, "analyze", resolved, seed, [],
              ["foc.json", "foc_curves.csv"], started, _now())
    return 0


# --------------------------------------------------------------------------
# evaluate
# --------------------------------------------------------------------------

def _metric_args_from_flags(args, texts) -> list[MetricSpec]:
    specs = []
    for t in texts:
        t = t.strip().lower()
        try:
            if ":" in t:
                specs.append(parse_metric_spec(t))
            elif t == "res":
                specs.append(MetricSpec.res(args.alpha if args.alpha is not None else 0.5))
            elif t == "genres":
                if args.alpha is None or args.gamma is None:
                    raise CLIUsageError("genres needs --alpha and --gamma")
                specs.append(MetricSpec.gen_res(args.alpha, args.gamma))
            elif t == "fbeta":
                if args.beta is None:
                    raise CLIUsageError("fbeta needs --beta")
                specs.append(MetricSpec.fbeta(args.beta))
            elif t == "costloss":
                if args.cfp is None or args.cfn is None:
                    raise CLIUsageError("costloss needs --cfp and --cfn")
                specs.append(MetricSpec.cost_loss(args.cfp, args.cfn))
            else:
                specs.append(parse_metric_spec(t))
        except ValueError as exc:
            raise CLIUsageError(str(exc)) from None
    return specs


def _detect_format(path, flag) -> str:
    if flag:
        return flag
    return "jsonl" if str(path).endswith((".jsonl", ".ndjson")) else "csv"


def cmd_evaluate(args) -> int:
    fmt = _detect_format(args.scores, args.format)
    metric_texts = args.metric or ["f1"]
    specs = _metric_args_from_flags(args, metric_texts)
    outdir = _ensure_outdir(args.out)
    started = _now()
    records = load_scores(args.scores, fmt)
    samples = [WeightedSample(r.score, r.label) for r in records]
    path = build_path(samples)
    doc = {"input": str(args.scores), "n_records": len(records), "metrics": []}
    curves = {}
    for spec in specs:
        if spec.kind == "auc":
            doc["metrics"].append({"metric": "auc", "value": path_auc(path)})
            continue
        opt = optimize(path, spec)
        doc["metrics"].append(
            {"metric": spec.key, "delta_star": opt.delta, "value": opt.value,
             "path_index": opt.path_index}
        )
        if args.curve:
            thresholds, values = metric_curve(path, spec)
            curves[spec.key] = [[float(t), float(v)] for t, v in zip(thresholds, values)]
    if curves:
        doc["curves"] = curves
    _write_json(os.path.join(outdir, "metrics.json"), doc)
    resolved = {
        "scores": str(args.scores),
        "format": fmt,
        "metrics": [_spec_text(s) for s in specs],
        "curve": bool(args.curve),
    }
    _manifest(outdir, "evaluate", resolved, _resolve_seed(args.seed, {}),
              [args.scores], ["metrics.json"], started, _now())
    return 0


# --------------------------------------------------------------------------
# bootstrap
# --------------------------------------------------------------------------

def cmd_bootstrap(args) -> int:
    config = _load_config_file(args.config) if args.config else {}
    seed = _resolve_seed(args.seed, config)
    fmt = _detect_format(args.scores, args.format)
    target_texts = _pick(
        args.targets and args.targets.split(","), config, "targets",
        ["0.001", "0.005", "0.01", "0.02", "empirical"],
    )
    b = int(_pick(args.b, config, "b", 500))
    sample_size = _pick(args.sample_size, config, "sample_size", None)
    metric_texts = _pick(args.metrics and args.metrics.split(","), config, "metrics", None)
    if metric_texts:
        try:
            metric_set = tuple(parse_metric_spec(t) for t in metric_texts)
        except ValueError as exc:
            raise CLIUsageError(str(exc)) from None
    else:
        metric_set = BootstrapConfig().metric_set
    if b < 2:
        raise CLIUsageError("bootstrap replication count must be >= 2")

    outdir = _ensure_outdir(args.out)
    started = _now()
    records = load_scores(args.scores, fmt)
    n_pos = sum(1 for r in records if r.label == 1)
    n_neg = len(records) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ResMetricsError("scores file must contain both classes")
    empirical_pi = n_pos / len(records)

    targets = []
    for t in target_texts:
        if isinstance(t, str) and t.strip().lower() == "empirical":
            targets.append(empirical_pi)
        else:
            pi = float(t)
            if not 0.0 < pi < 1.0:
                raise CLIUsageError(f"target prevalence {pi} outside (0, 1)")
            targets.append(pi)

    regime_rows = []
    raw_rows = []
    tables = {}
    stability_extras = {}
    for k, pi in enumerate(targets):
        regime_seed = int(np.random.SeedSequence(seed, spawn_key=(0, k)).generate_state(1)[0])
        spec, kept = build_regime(records, pi, regime_seed)
        regime_rows.append(
            (spec.target_pi, spec.empirical_pi, spec.n_total, spec.n_pos,
             spec.n_neg, int(spec.fallback_full))
        )
        boot_seed = int(np.random.SeedSequence(seed, spawn_key=(1, k)).generate_state(1)[0])
        bconf = BootstrapConfig(
            b=b,
            sample_size=int(sample_size) if sample_size else None,
            metric_set=metric_set,
            master_seed=boot_seed,
        )
        result = bootstrap_study(kept, bconf)
        key = f"{spec.target_pi:g}"
        tables[key] = result.rows
        stability_extras[key] = {
            "retried_replications": len(result.retries),
            "failed_replications": len(result.failed),
        }
        for row in result.rows:
            raw_rows.append((key, row.replication, row.metric, row.delta_star, row.value))

    _write_csv(
        os.path.join(outdir, "regimes.csv"),
        ["target_pi", "empirical_pi", "n_total", "n_pos", "n_neg", "fallback_full"],
        regime_rows,
    )
    _write_csv(
        os.path.join(outdir, "raw.csv"),
        ["target_pi", "replication", "metric", "delta_star", "value"],
        raw_rows,
    )
    report = stability_report(tables) if len(tables) >= 2 else {}
    _write_json(
        os.path.join(outdir, "stability.json"),
        {"metrics": report, "regimes": stability_extras},
    )
    resolved = {
        "scores": str(args.scores),
        "format": fmt,
        "targets": [t if isinstance(t, str) else t for t in target_texts],
        "b": b,
        "sample_size": sample_size,
        "metrics": [_spec_text(s) for s in metric_set],
        "master_seed": seed,
    }
    _manifest(outdir, "bootstrap", resolved, seed, [args.scores],
              ["regimes.csv", "raw.csv", "stability.json"], started, _now())
    return 0


# --------------------------------------------------------------------------
# calibrate
# --------------------------------------------------------------------------

def cmd_calibrate(args) -> int:
    mode = args.mode
    grid = AlphaGrid.default(args.grid_step) if args.grid_step else AlphaGrid.default()
    outdir = _ensure_outdir(args.out)
    started = _now()
    inputs = []
    doc: dict = {"mode": mode}
    if mode == "cost":
        if args.cfp is None or args.cfn is None:
            raise CLIUsageError("--mode cost needs --cfp and --cfn")
        if args.cfp <= 0 or args.cfn <= 0:
            raise CLIUsageError("costs must be positive")
        alpha = calibrate_cost(args.cfp, args.cfn)
        doc.update(alpha_hat=alpha, induced_delta=None, objective=0.0, flags=[])
    else:
        if not args.scores:
            raise CLIUsageError(f"--mode {mode} needs --scores")
        if mode == "historical" and (args.delta is None or not 0.0 < args.delta < 1.0):
            raise CLIUsageError("--mode historical needs --delta in (0, 1)")
        if mode == "rate" and (args.target is None or not 0.0 < args.target < 1.0):
            raise CLIUsageError("--mode rate needs --target in (0, 1)")
        if mode == "loss" and (
            args.cfp is None or args.cfn is None or args.cfp <= 0 or args.cfn <= 0
        ):
            raise CLIUsageError("--mode loss needs positive --cfp and --cfn")
        fmt = _detect_format(args.scores, args.format)
        records = load_scores(args.scores, fmt)
        inputs.append(args.scores)
        samples = [WeightedSample(r.score, r.label) for r in records]
        if mode == "historical":
            result = calibrate_historical(samples, args.delta, grid)
        elif mode == "rate":
            result = calibrate_rate(samples, args.target, grid)
        else:
            result = calibrate_loss(samples, args.cfp, args.cfn, grid)
        doc.update(
            alpha_hat=result.alpha_hat,
            induced_delta=result.induced_delta,
            objective=result.objective,
            flags=result.flags,
        )
        if result.induced_rate is not None:
            doc["induced_rate"] = result.induced_rate
        if result.delta_loss is not None:
            doc["delta_loss"] = result.delta_loss
    _write_json(os.path.join(outdir, "calibration.json"), doc)
    resolved = {
        "mode": mode,
        "c_fp": args.cfp,
        "c_fn": args.cfn,
        "delta_hist": args.delta,
        "r_target": args.target,
        "grid_step": args.grid_step or 0.001,
        "scores": str(args.scores) if args.scores else None,
    }
    _manifest(outdir, "calibrate", resolved, _resolve_seed(args.seed, {}), inputs,
              ["calibration.json"], started, _now())
    return 0


# --------------------------------------------------------------------------
# parser / entry point
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resmetrics",
        description="Rare-event-stable metrics: simulation, analysis, "
                    "evaluation, bootstrap and calibration.",
    )
    parser.add_argument("--version", action="version", version=f"resmetrics {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=".", help="output directory (default: cwd)")
        p.add_argument("--seed", type=int, default=None,
                       help=f"master seed (default: ${SEED_ENV_VAR} or {DEFAULT_SEED})")
        p.add_argument("--config", default=None,
                       help="JSON config file or a manifest.json from a prior run")

    p = sub.add_parser("simulate", help="run the Monte Carlo prevalence grid")
    common(p)
    p.add_argument("--regime", default=None, help="moderate | strong | both (default both)")
    p.add_argument("--pi", default=None, help="comma list of prevalences (default 1e-2,1e-3,1e-4)")
    p.add_argument("--reps", type=int, default=None, help="replications per cell (default 200)")
    p.add_argument("--alpha", default=None, help="comma list of policy parameters (default 0.1,0.25,0.5)")
    p.add_argument("--metrics", default=None,
                   help="comma list of metric specs overriding the default set")
    p.add_argument("--ncap", type=int, default=None, help="negative-draw cap (default 2e6)")
    p.add_argument("--auc-cutoff", dest="auc_cutoff", type=float, default=None,
                   help="skip AUC when simulated sample size reaches this (default 1e6)")
    p.add_argument("--npos-boundary", dest="npos_boundary", type=int, default=None,
                   help="positive count at the 1e-5 boundary prevalence (default 20)")
    p.add_argument("--full-scale", dest="full_scale", action="store_true",
                   help="R=2000 over all five decades (hours of compute)")
    p.add_argument("--cell-mean-drift", dest="cell_mean_drift", action="store_true",
                   help="drift tests on cell means instead of replication level")
    p.add_argument("--threads", type=int, default=None, help="worker processes (default 1)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="emit FOC curves, interior roots, trade-off data")
    common(p)
    p.add_argument("--regime", default=None, help="moderate | strong | both")
    p.add_argument("--alpha", default=None, help="comma list (default 0.1,0.25,0.5)")
    p.add_argument("--pi", default=None, help="comma list for the F1 curves (default 1e-2,1e-3)")
    p.add_argument("--grid-points", dest="grid_points", type=int, default=None)
    p.add_argument("--tradeoff", action="store_true",
                   help="also simulate implied trade-off curves")
    p.add_argument("--budget", type=int, default=None,
                   help="positives per trade-off sample (default 10000)")
    p.add_argument("--ncap", type=int, default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("evaluate", help="score a file of (score, label) records")
    common(p)
    p.add_argument("scores", help="CSV (score,label[,id]) or JSON-lines file")
    p.add_argument("--format", choices=["csv", "jsonl"], default=None)
    p.add_argument("--metric", action="append", default=None,
                   help="metric name or spec (repeatable), e.g. f1, res:0.5")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--cfp", type=float, default=None)
    p.add_argument("--cfn", type=float, default=None)
    p.add_argument("--curve", action="store_true", help="include full metric curves")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bootstrap", help="prevalence regimes + bootstrap stability study")
    common(p)
    p.add_argument("scores", help="CSV (score,label[,id]) or JSON-lines file")
    p.add_argument("--format", choices=["csv", "jsonl"], default=None)
    p.add_argument("--targets", default=None,
                   help="comma list of target prevalences; 'empirical' keeps the full set")
    p.add_argument("--b", type=int, default=None, help="bootstrap replications (default 500)")
    p.add_argument("--sample-size", dest="sample_size", type=int, default=None,
                   help="bootstrap draw size (default: regime size)")
    p.add_argument("--metrics", default=None, help="comma list of metric specs")
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("calibrate", help="map an institutional target to a policy parameter")
    common(p)
    p.add_argument("--mode", required=True, choices=["cost", "historical", "rate", "loss"])
    p.add_argument("--scores", default=None, help="scores file (not needed for cost mode)")
    p.add_argument("--format", choices=["csv", "jsonl"], default=None)
    p.add_argument("--cfp", type=float, default=None)
    p.add_argument("--cfn", type=float, default=None)
    p.add_argument("--delta", type=float, default=None, help="historical threshold")
    p.add_argument("--target", type=float, default=None, help="intervention-rate capacity")
    p.add_argument("--grid-step", dest="grid_step", type=float, default=None)
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CLIUsageError as exc:
        print(f"resmetrics: {exc}", file=sys.stderr)
        return 2
    except InvalidPrevalenceError as exc:
        print(f"resmetrics: {exc}", file=sys.stderr)
        return 2
    except (ResMetricsError, OSError, ArithmeticError) as exc:
        print(f"resmetrics: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
