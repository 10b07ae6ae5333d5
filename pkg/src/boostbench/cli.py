"""``boostbench`` command line: fit, predict, bench and report.

Exit codes: 0 success, 2 usage error, 3 data error, 4 internal invariant
violation. ``BOOSTBENCH_SEED`` sets the default of ``--seed``.
"""
import argparse
import csv
import hashlib
import json
import os
import sys
import time
import traceback
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .data import DataError, Schema, fill_missing, impute_mean, load_csv
from .grids import (DEFAULTS, METHODS, N_TREES, PRESETS, PROPOSED_XGB_DEFAULT, ParamGrid,
                    config_label, get_grid, make_params)
from .harness import (ExperimentSpec, TuningError, _Runner, fit_model, inner_tune,
                      record_timings, run_experiment)
from .rank_stats import (K_MAX, average_ranks, config_average_ranks, friedman, nemenyi_cd,
                         rank_diagram_data, transition_matrix)
from .serialize import ModelBundle, ModelFormatError, load_model, save_model

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4

BENCH_PRESETS = {
    "default-all": [("default-rf", "rf", None, {}), ("default-gb", "gb", None, {}),
                    ("default-xgb", "xgb", None, {})],
    "tuned-all": [("tuned-rf", "rf", "rf_full", {}), ("tuned-gb", "gb", "gb_full", {}),
                  ("tuned-xgb", "xgb", "xgb_full", {})],
    "xgb-proposed-default": [("xgb-proposed-default", "xgb", None, PROPOSED_XGB_DEFAULT)],
    "xgb-no-gamma": [("xgb-no-gamma", "xgb", "xgb_no_gamma", {})],
    "xgb-no-rand": [("xgb-no-rand", "xgb", "xgb_no_rand", {})],
}


class UsageError(Exception):
    pass


class InvariantError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    tool_version: str
    spec_hash: str
    seed: int
    stage_seconds: Dict[str, float] = field(default_factory=dict)
    outputs: List[Dict[str, str]] = field(default_factory=list)

    def add(self, path):
        path = Path(path)
        if not path.is_file():
            raise InvariantError(f"expected output {path} was not written")
        self.outputs.append({"path": path.name, "sha256": sha256_file(path)})

    def write(self, path):
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _canonical_hash(obj) -> str:
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode()).hexdigest()


def parse_value(text: str):
    """``"None"`` -> None, then int, then float, else the string itself."""
    if text in ("None", "none", "null"):
        return None
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _parse_params(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = parse_value(v.strip())
    return out


def _resolve_grid(name, method) -> Optional[ParamGrid]:
    if name is None:
        return None
    try:
        grid = get_grid(name)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise UsageError(f"--grid {name!r} is neither a preset ({', '.join(PRESETS)}) "
                         f"nor a readable grid file: {exc}") from exc
    if grid.method != method:
        raise UsageError(f"grid {grid.name!r} is for {grid.method}, not {method}")
    return grid


def _check_config(method, config):
    unknown = set(config) - set(DEFAULTS[method])
    if unknown:
        raise UsageError(f"unknown {method} parameter(s): {', '.join(sorted(unknown))}")
    try:
        make_params(method, config)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"invalid parameters: {exc}") from exc


def _all_column_means(data) -> np.ndarray:
    means = np.full(data.n_features, np.nan)
    for j in range(data.n_features):
        ok = ~data.missing[:, j]
        if ok.any():
            means[j] = data.X[ok, j].mean()
    return means


# --------------------------------------------------------------------- fit

def cmd_fit(args) -> int:
    if args.method is None:
        raise UsageError("fit needs --method")
    if args.out is None:
        raise UsageError("fit needs --out")
    config = _parse_params(args.param)
    _check_config(args.method, config)
    if args.method == "rf" and args.trees < 1:
        raise UsageError("a forest needs --trees >= 1")
    grid = _resolve_grid(args.grid, args.method)
    if grid is not None and config:
        raise UsageError("--param and --grid are mutually exclusive")
    stages = {}
    t0 = time.perf_counter()
    data = load_csv(args.data, label_col=args.label_col)
    label_col = args.label_col or _last_header(args.data)
    stages["load"] = time.perf_counter() - t0

    log = [f"boostbench {__version__} fit", f"data: {args.data} ({data.n_rows} rows, "
           f"{data.n_features} features, {data.n_classes} classes)",
           f"method: {args.method}", f"seed: {args.seed}", f"trees: {args.trees}"]
    if grid is not None:
        t0 = time.perf_counter()
        config, scores = inner_tune(data, grid, inner_k=args.inner_k, seed=args.seed,
                                    n_trees=args.trees, impute=True)
        stages["tune"] = time.perf_counter() - t0
        log.append(f"grid: {grid.name} ({grid.size} configs), best inner accuracy "
                   f"{scores.max():.6f}")
    merged = {**DEFAULTS[args.method], **config}
    log.append(f"config: {config_label(merged)}")

    means = _all_column_means(data)
    train = fill_missing(data, means) if data.missing.any() else data
    t0 = time.perf_counter()
    model = fit_model(args.method, merged, train, args.seed, args.trees)
    stages["fit"] = time.perf_counter() - t0
    pred = model.predict(train.X) if args.method == "rf" else model.predict_class(train.X)
    log.append(f"training accuracy: {np.mean(pred == train.labels):.6f}")
    log.append(f"fit seconds: {stages['fit']:.3f}")

    bundle = ModelBundle(model, Schema.from_data(data, label_col), means,
                         {"method": args.method, "seed": args.seed, "n_trees": args.trees,
                          **{k: v for k, v in merged.items()}})
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(out, bundle)
    log_path = out.with_name(out.name + ".log")
    log_path.write_text("\n".join(log) + "\n")
    manifest = RunManifest("fit", __version__, _canonical_hash(vars_for_hash(args)), args.seed,
                           stages)
    manifest.add(out)
    manifest.add(log_path)
    manifest.write(out.with_name(out.name + ".manifest.json"))
    print(f"wrote {out}")
    return EXIT_OK


def vars_for_hash(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "workers")}


def _last_header(path):
    with open(path, newline="") as fh:
        return next(csv.reader(fh))[-1].strip()


# ----------------------------------------------------------------- predict

def cmd_predict(args) -> int:
    if args.model is None or args.out is None:
        raise UsageError("predict needs --model and --out")
    try:
        bundle = load_model(args.model)
    except (OSError, json.JSONDecodeError, ModelFormatError) as exc:
        raise DataError(f"cannot read model {args.model}: {exc}") from exc
    data = load_csv(args.data, schema=bundle.schema, require_label=False)
    model = bundle.model
    if data.n_features != model.n_features:
        raise DataError(f"model expects {model.n_features} features, {args.data} has "
                        f"{data.n_features}")
    if data.missing.any():
        if bundle.impute_means is None:
            raise DataError("data has missing cells and the model stores no imputation values")
        data = fill_missing(data, bundle.impute_means)
    proba = model.predict_proba(data.X)
    pred = np.argmax(proba, axis=1)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "pred_class"] + [f"proba_{k}" for k in range(proba.shape[1])])
        for i in range(proba.shape[0]):
            # repr keeps every bit of the probability
            w.writerow([i, int(pred[i])] + [repr(float(p)) for p in proba[i]])
    manifest = RunManifest("predict", __version__, sha256_file(args.model), args.seed)
    manifest.add(out)
    manifest.write(out.with_name(out.name + ".manifest.json"))
    print(f"wrote {out}")
    return EXIT_OK


# ------------------------------------------------------------------- bench

@dataclass(frozen=True)
class BenchRun:
    variant: str
    method: str
    grid: Optional[str]
    config: tuple = ()


def load_bench_spec(args) -> dict:
    """Bench description from ``--spec`` or from the single-dataset flags."""
    if args.spec:
        try:
            with open(args.spec) as fh:
                spec = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read bench spec {args.spec}: {exc}") from exc
        base = Path(args.spec).resolve().parent
        for d in spec.get("datasets", []):
            p = Path(d["path"])
            d["path"] = str(p if p.is_absolute() else base / p)
    else:
        if args.data is None:
            raise UsageError("bench needs --spec or --data")
        name = Path(args.data).stem
        spec = {"datasets": [{"name": name, "path": args.data, "label_col": args.label_col}]}
        if args.preset is None:
            if args.method is None:
                raise UsageError("bench needs --preset or --method")
            spec["runs"] = [{"method": args.method, "grid": args.grid,
                             "config": _parse_params(args.param)}]
    if args.preset is not None:
        spec["preset"] = args.preset
    if "seed" not in spec or args.seed_given:
        spec["seed"] = args.seed
    for key, val in (("outer_k", args.outer_k), ("inner_k", args.inner_k),
                     ("n_trees", args.trees), ("impute_scope", args.impute_scope)):
        if val is not None:
            spec[key] = val
    if not spec.get("datasets"):
        raise UsageError("bench spec lists no datasets")
    return spec


def bench_runs(spec) -> List[BenchRun]:
    runs = []
    if "preset" in spec and spec["preset"] is not None:
        if spec["preset"] not in BENCH_PRESETS:
            raise UsageError(f"unknown bench preset {spec['preset']!r}; choose from "
                             f"{', '.join(BENCH_PRESETS)}")
        for variant, method, grid, config in BENCH_PRESETS[spec["preset"]]:
            runs.append(BenchRun(variant, method, grid, tuple(config.items())))
    for r in spec.get("runs", []):
        method = r.get("method")
        if method not in METHODS:
            raise UsageError(f"run method must be one of {METHODS}, got {method!r}")
        config = dict(r.get("config") or {})
        _check_config(method, config)
        grid = r.get("grid")
        if grid is not None:
            g = _resolve_grid(grid, method)
            default_variant = f"tuned-{method}" if grid == f"{method}_full" else f"tuned-{method}-{g.name}"
        else:
            default_variant = f"default-{method}" if not config else f"fixed-{method}"
        runs.append(BenchRun(r.get("variant", default_variant), method, grid,
                             tuple(config.items())))
    if not runs:
        raise UsageError("bench spec has neither a preset nor runs")
    names = [r.variant for r in runs]
    if len(set(names)) != len(names):
        raise UsageError("variant names must be unique")
    return runs


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _pct(x) -> str:
    return f"{100.0 * x:.2f}"


def cmd_bench(args) -> int:
    if args.out is None:
        raise UsageError("bench needs --out")
    spec = load_bench_spec(args)
    runs = bench_runs(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seed = int(spec["seed"])
    manifest = RunManifest("bench", __version__, _canonical_hash(spec), seed)
    with open(out / "spec.json", "w") as fh:
        json.dump(spec, fh, indent=2, sort_keys=True)
        fh.write("\n")

    fold_rows, agg, timing_rows, cfg_files = [], {}, [], []
    runner = _Runner(args.workers)
    try:
        for ds in spec["datasets"]:
            name = ds["name"]
            for run in runs:
                es = ExperimentSpec(dataset=name, path=ds["path"], method=run.method,
                                    grid=run.grid, config=run.config,
                                    outer_k=int(spec.get("outer_k", 10)),
                                    inner_k=int(spec.get("inner_k", 10)), seed=seed,
                                    impute_scope=spec.get("impute_scope", "fold"),
                                    score_all_configs=bool(spec.get("score_all_configs", False))
                                    or (run.method == "xgb" and run.grid == "xgb_full"),
                                    label_col=ds.get("label_col"),
                                    n_trees=int(spec.get("n_trees", N_TREES)),
                                    variant=run.variant)
                t0 = time.perf_counter()
                res = run_experiment(es, runner=runner)
                manifest.stage_seconds[f"{name}/{run.variant}"] = time.perf_counter() - t0
                if res.accuracies.shape != (es.outer_k,) or np.any(
                        (res.accuracies < 0) | (res.accuracies > 1)):
                    raise InvariantError(f"bad accuracies for {name}/{run.variant}")
                for f in range(es.outer_k):
                    fold_rows.append([name, run.variant, run.method, f, repr(float(res.accuracies[f])),
                                      int(res.chosen_index[f]), config_label(res.chosen_configs[f])])
                agg[(name, run.variant)] = (res.mean, res.std)
                tr = record_timings(res)
                timing_rows.append([name, run.variant, f"{tr.search_seconds:.4f}",
                                    f"{tr.fit_seconds:.4f}", f"{tr.wall_seconds:.4f}"])
                if res.config_test_acc is not None:
                    path = out / f"configs__{name}__{run.variant}.csv"
                    k = es.outer_k
                    rows = [[i, json.dumps(c, sort_keys=True)] +
                            [repr(float(a)) for a in res.config_test_acc[i]]
                            for i, c in enumerate(res.configs)]
                    _write_csv(path, ["config_index", "config"] + [f"fold_{f}" for f in range(k)],
                               rows)
                    cfg_files.append(path)
    finally:
        runner.close()

    _write_csv(out / "folds.csv", ["dataset", "variant", "method", "fold", "accuracy",
                                   "chosen_index", "chosen_config"], fold_rows)
    variants = [r.variant for r in runs]
    agg_rows = []
    for ds in spec["datasets"]:
        row = [ds["name"]]
        for v in variants:
            m, s = agg[(ds["name"], v)]
            row += [_pct(m), _pct(s)]
        agg_rows.append(row)
    header = ["dataset"] + [f"{v}_{x}" for v in variants for x in ("mean", "std")]
    _write_csv(out / "aggregate.csv", header, agg_rows)
    _write_csv(out / "timings.csv", ["dataset", "variant", "search_seconds", "fit_seconds",
                                     "wall_seconds"], timing_rows)
    for p in ["spec.json", "folds.csv", "aggregate.csv", "timings.csv"]:
        manifest.add(out / p)
    for p in cfg_files:
        manifest.add(p)
    manifest.write(out / "manifest.json")
    print(f"wrote {out / 'aggregate.csv'}")
    return EXIT_OK


# ------------------------------------------------------------------ report

def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def cmd_report(args) -> int:
    res_dir = Path(args.results)
    folds_path = res_dir / "folds.csv"
    if not folds_path.is_file():
        raise DataError(f"{res_dir} holds no bench results (folds.csv missing)")
    rows = _read_csv(folds_path)
    if not rows:
        raise DataError(f"{folds_path} is empty")
    out = Path(args.out) if args.out else res_dir / "report"
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest("report", __version__, sha256_file(folds_path), args.seed)

    datasets, variants, accs = [], [], {}
    for line, r in enumerate(rows, start=2):
        try:
            key, a = (r["dataset"], r["variant"]), float(r["accuracy"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"{folds_path}:{line}: malformed row ({exc})") from exc
        if key[0] not in datasets:
            datasets.append(key[0])
        if key[1] not in variants:
            variants.append(key[1])
        accs.setdefault(key, []).append(a)
    complete = [d for d in datasets if all((d, v) in accs for v in variants)]
    means = {key: float(np.mean(v)) for key, v in accs.items()}
    stds = {key: float(np.std(v)) for key, v in accs.items()}

    table = []
    for d in datasets:
        present = [means[(d, v)] for v in variants if (d, v) in means]
        best = max(present)
        cells = []
        for v in variants:
            if (d, v) not in means:
                cells.append("")
                continue
            mark = "*" if means[(d, v)] == best else ""
            cells.append(f"{_pct(means[(d, v)])}+-{_pct(stds[(d, v)])}{mark}")
        table.append([d] + cells)
    _write_csv(out / "accuracy_table.csv", ["dataset"] + variants, table)
    manifest.add(out / "accuracy_table.csv")

    timing_path = res_dir / "timings.csv"
    if timing_path.is_file():
        t = {(r["dataset"], r["variant"]): r for r in _read_csv(timing_path)}
        trows = []
        for d in datasets:
            cells = []
            for v in variants:
                r = t.get((d, v))
                if r is None:
                    cells.append("")
                elif float(r["search_seconds"]) > 0:
                    cells.append(f"{float(r['search_seconds']):.2f} + {float(r['fit_seconds']):.2f}")
                else:
                    cells.append(f"{float(r['fit_seconds']):.2f}")
            trows.append([d] + cells)
        _write_csv(out / "timing_table.csv", ["dataset"] + variants, trows)
        manifest.add(out / "timing_table.csv")

    if len(variants) >= 2 and complete:
        if len(variants) > K_MAX:
            raise UsageError(f"rank diagram supports at most {K_MAX} methods")
        acc = np.array([[means[(d, v)] for v in variants] for d in complete])
        rt = average_ranks(acc, variants, complete)
        fr = friedman(rt)
        cd = nemenyi_cd(len(variants), len(complete), args.alpha)
        diagram = rank_diagram_data(rt, cd)
        text = diagram.to_text() + (f"Friedman chi2 = {fr.chi2:.4f} (p = {fr.p_chi2:.4g}); "
                                    f"Iman-Davenport F = {fr.f_stat:.4f} (p = {fr.p_f:.4g}); "
                                    f"{len(complete)} datasets\n")
        (out / "ranks.txt").write_text(text)
        (out / "ranks.svg").write_text(diagram.to_svg())
        _write_csv(out / "ranks.csv", ["variant", "avg_rank"],
                   [[v, f"{r:.4f}"] for v, r in zip(variants, rt.avg_rank)])
        for p in ("ranks.txt", "ranks.svg", "ranks.csv"):
            manifest.add(out / p)

    for p in _transition_reports(res_dir, out):
        manifest.add(p)
    manifest.write(out / "manifest.json")
    print(f"wrote {out}")
    return EXIT_OK


def _transition_reports(res_dir: Path, out: Path) -> List[Path]:
    """Transition CSVs for each variant that has per-config test accuracies."""
    by_variant: Dict[str, list] = {}
    for path in sorted(res_dir.glob("configs__*__*.csv")):
        _, dataset, variant = path.stem.split("__", 2)
        by_variant.setdefault(variant, []).append((dataset, path))
    written = []
    for variant, items in by_variant.items():
        configs, acc = None, []
        for _, path in items:
            rows = _read_csv(path)
            cfgs = [json.loads(r["config"]) for r in rows]
            if configs is None:
                configs = cfgs
            elif cfgs != configs:
                raise DataError(f"{path} uses a different grid than the other datasets")
            folds = [k for k in rows[0] if k.startswith("fold_")]
            acc.append([np.mean([float(r[k]) for k in folds]) for r in rows])
        avg = config_average_ranks(np.array(acc))
        for param in configs[0]:
            values = []
            for c in configs:
                if c[param] not in values:
                    values.append(c[param])
            if len(values) < 2:
                continue
            tm = transition_matrix(configs, avg, param)
            path = out / f"transition__{variant}__{param}.csv"
            _write_csv(path, tm.to_rows()[0], tm.to_rows()[1:])
            written.append(path)
    return written


# -------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    env_seed = os.environ.get("BOOSTBENCH_SEED")
    parser = argparse.ArgumentParser(prog="boostbench", allow_abbrev=False,
                                     description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"boostbench {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, data_required):
        p.add_argument("--data", required=data_required, help="CSV file with a header row")
        p.add_argument("--label-col", default=None, help="label column name (default: last)")
        p.add_argument("--seed", type=int, default=None,
                       help="master seed (default: $BOOSTBENCH_SEED or 0)")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--impute-scope", choices=("fold", "global"), default=None)
        p.add_argument("--out", default=None)

    p = sub.add_parser("fit", help="train one model", allow_abbrev=False)
    common(p, True)
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--grid", default=None, help="preset name or JSON grid file to tune over")
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="override a default parameter (repeatable)")
    p.add_argument("--trees", type=int, default=N_TREES)
    p.add_argument("--inner-k", type=int, default=10)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict with a saved model", allow_abbrev=False)
    common(p, True)
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("bench", help="run the cross-validation protocol", allow_abbrev=False)
    common(p, False)
    p.add_argument("--spec", default=None, help="JSON bench spec")
    p.add_argument("--preset", choices=sorted(BENCH_PRESETS), default=None)
    p.add_argument("--method", choices=METHODS, default=None)
    p.add_argument("--grid", default=None)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--trees", type=int, default=None)
    p.add_argument("--outer-k", type=int, default=None)
    p.add_argument("--inner-k", type=int, default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="tables, rank diagram and transition matrices",
                       allow_abbrev=False)
    p.add_argument("--results", required=True, help="bench output directory")
    p.add_argument("--out", default=None, help="default: RESULTS/report")
    p.add_argument("--alpha", type=float, choices=(0.05, 0.10), default=0.05)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_report)
    parser.set_defaults(env_seed=env_seed)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    args.seed_given = args.seed is not None
    if args.seed is None:
        try:
            args.seed = int(args.env_seed) if args.env_seed not in (None, "") else 0
        except ValueError:
            print("boostbench: BOOSTBENCH_SEED must be an integer", file=sys.stderr)
            return EXIT_USAGE
    del args.env_seed
    if getattr(args, "workers", 1) is not None and getattr(args, "workers", 1) < 1:
        print("boostbench: --workers must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "trees", None) is not None and args.trees < 0:
        print("boostbench: --trees must be >= 0", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "fit" and args.impute_scope is not None:
        print("boostbench: --impute-scope only applies to bench", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"boostbench: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, TuningError, ModelFormatError, FileNotFoundError) as exc:
        print(f"boostbench: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InvariantError as exc:
        print(f"boostbench: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception:  # anything else is a bug, not bad input
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
