"""Command-line surface: fitting, profiling, simulation, and benchmark
table reproduction.

File formats
------------
* single-session CSV: header ``z,m,r``, one trial per row.
* multilevel CSV: header ``subject,session,z,m,r``; subject and session are
  positive integers, trials keep file order within a session.
* reports are JSON; curves and tables are RFC-4180 CSV.
* every file output gets a ``<path>.manifest.json`` sidecar recording the
  command, config echo, seed, version, output paths, and wall time. The
  report itself embeds the same manifest without the wall time, so reruns
  with identical inputs are byte-identical.

Exit codes: 0 success, 2 validation or parse error, 3 numerical failure,
4 I/O error. The environment variable CMA_SEED supplies a fallback seed
when ``--seed`` is absent.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__, inference, multilevel, simulate
from ._reference import REFERENCE
from .core import MultilevelDataset, SessionKey, TrialSeries
from .errors import (
    CorrmedError,
    MissingDelta,
    NumericalError,
    ParseError,
    ValidationError,
)
from .single_level import fit_single, profile_loglik_curve

SINGLE_HEADER = ["z", "m", "r"]
MULTI_HEADER = ["subject", "session", "z", "m", "r"]


# ---------------------------------------------------------------------------
# ingestion


def _open_read(path):
    try:
        return open(path, "r", encoding="utf-8-sig", newline="")
    except OSError as exc:
        raise exc


def _float_cell(value, path, lineno, column):
    try:
        return float(value)
    except ValueError:
        raise ParseError(
            f"{path}: line {lineno}: column {column!r} is not a number: {value!r}"
        ) from None


def _int_cell(value, path, lineno, column):
    try:
        return int(value)
    except ValueError:
        raise ParseError(
            f"{path}: line {lineno}: column {column!r} is not an integer: {value!r}"
        ) from None


def _check_header(row, expected, path):
    got = [cell.strip() for cell in row]
    if got != expected:
        raise ParseError(
            f"{path}: line 1: expected header {','.join(expected)!r}, "
            f"got {','.join(got)!r}"
        )


def read_single_csv(path) -> TrialSeries:
    with _open_read(path) as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows:
        raise ParseError(f"{path}: file is empty")
    _check_header(rows[0], SINGLE_HEADER, path)
    z, m, r = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ParseError(f"{path}: line {lineno}: expected 3 fields, got {len(row)}")
        z.append(_float_cell(row[0], path, lineno, "z"))
        m.append(_float_cell(row[1], path, lineno, "m"))
        r.append(_float_cell(row[2], path, lineno, "r"))
    return TrialSeries(z=np.array(z), m=np.array(m), r=np.array(r))


def read_multilevel_csv(path) -> MultilevelDataset:
    with _open_read(path) as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows:
        raise ParseError(f"{path}: file is empty")
    _check_header(rows[0], MULTI_HEADER, path)
    grouped: dict[SessionKey, list] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 5:
            raise ParseError(f"{path}: line {lineno}: expected 5 fields, got {len(row)}")
        subj = _int_cell(row[0], path, lineno, "subject")
        sess = _int_cell(row[1], path, lineno, "session")
        if subj < 1 or sess < 1:
            raise ParseError(
                f"{path}: line {lineno}: subject and session must be positive"
            )
        vals = (
            _float_cell(row[2], path, lineno, "z"),
            _float_cell(row[3], path, lineno, "m"),
            _float_cell(row[4], path, lineno, "r"),
        )
        grouped.setdefault(SessionKey(subj, sess), []).append(vals)
    if not grouped:
        raise ParseError(f"{path}: no data rows")
    sessions = {}
    for key, triples in grouped.items():
        arr = np.array(triples)
        sessions[key] = TrialSeries(z=arr[:, 0], m=arr[:, 1], r=arr[:, 2])
    return MultilevelDataset(sessions=sessions)


# ---------------------------------------------------------------------------
# emission


def _fmt_float(x) -> str:
    # repr keeps the shortest decimal that round-trips the double
    return repr(float(x))


def write_csv_rows(path_or_none, header, rows):
    """Write RFC-4180 CSV (CRLF, quoting as needed) to a path or stdout."""
    if path_or_none is None:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(header)
        w.writerows(rows)
        sys.stdout.write(buf.getvalue())
        return
    with open(path_or_none, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def write_json_file(path, payload):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _py(obj):
    """Recursively convert numpy scalars/arrays so json can serialize."""
    if isinstance(obj, dict):
        return {str(k): _py(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_py(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_py(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        # Strict JSON has no Infinity/NaN literal; degenerate quantities
        # (e.g. the unbounded likelihood of a perfect fit) serialize as null.
        val = float(obj)
        return val if math.isfinite(val) else None
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


def make_manifest(command, config_echo, seed, outputs):
    return {
        "command": command,
        "config": _py(config_echo),
        "seed": int(seed),
        "version": __version__,
        "outputs": [str(p) for p in outputs],
    }


def write_sidecar(out_path, manifest, wall_time_s):
    sidecar = dict(manifest)
    sidecar["wall_time_s"] = wall_time_s
    write_json_file(f"{out_path}.manifest.json", sidecar)


def resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("CMA_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValidationError(f"CMA_SEED must be an integer, got {env!r}") from None
    return 0


def _norm_quantile(p: float) -> float:
    from scipy.stats import norm

    return float(norm.ppf(p))


# ---------------------------------------------------------------------------
# fit-single


def cmd_fit_single(args) -> int:
    t0 = time.perf_counter()
    if not abs(args.delta) < 1:
        raise ValidationError(f"delta must lie in (-1, 1), got {args.delta}")
    if not 0 < args.ci_level < 1:
        raise ValidationError("ci-level must lie in (0, 1)")
    series = read_single_csv(args.csv)
    fit = fit_single(series, args.delta)
    cis = {}
    for q in ("a", "b", "c", "c_total", "ab_prod", "ab_diff"):
        est = inference.asymptotic_ci(fit, q, level=args.ci_level)
        cis[q] = [est.lower, est.upper]
    config_echo = {"input": args.csv, "delta": args.delta, "ci_level": args.ci_level}
    outputs = [args.out] if args.out else []
    manifest = make_manifest("fit-single", config_echo, resolve_seed(args), outputs)
    report = _py(
        {
            "command": "fit-single",
            "n": fit.n,
            "delta": args.delta,
            "coefficients": {
                "a": fit.theta.a,
                "b": fit.theta.b,
                "c": fit.theta.c,
                "c_total": fit.theta.c_total,
            },
            "indirect": {"prod": fit.indirect_prod, "diff": fit.indirect_diff},
            "error_scales": {
                "sigma1_sq": fit.noise.sigma1 ** 2,
                "sigma2_sq": fit.noise.sigma2 ** 2,
            },
            "residual_cov": {
                "s11": fit.residual_cov.s11,
                "s12": fit.residual_cov.s12,
                "s22": fit.residual_cov.s22,
            },
            "loglik": fit.loglik,
            "ci_level": args.ci_level,
            "asymptotic_ci": cis,
            "manifest": manifest,
        }
    )
    write_json_file(args.out, report)
    if args.out:
        write_sidecar(args.out, manifest, time.perf_counter() - t0)
    return 0


# ---------------------------------------------------------------------------
# fit-multilevel


def cmd_fit_multilevel(args) -> int:
    t0 = time.perf_counter()
    method = args.method.replace("-", "_")
    if not 0 < args.ci_level < 1:
        raise ValidationError("ci-level must lie in (0, 1)")
    if method == "ts":
        if args.delta is None:
            raise MissingDelta("method ts needs --delta (the fixed error correlation)")
        if not abs(args.delta) < 1:
            raise ValidationError(f"delta must lie in (-1, 1), got {args.delta}")
    elif args.delta is not None:
        raise ValidationError("--delta is only accepted with method ts")
    data = read_multilevel_csv(args.csv)
    if method == "ml":
        fit = multilevel.cma_ml(data)
    elif method == "h":
        fit = multilevel.cma_h(data)
    elif method == "ts":
        fit = multilevel.cma_ts(data, args.delta)
    else:
        fit = multilevel.cma_h_ts(data)

    zq = _norm_quantile(0.5 + args.ci_level / 2)

    def fixed_entry(idx):
        value = float(fit.fixed[idx])
        se = float(fit.fixed_se[idx])
        return {"value": value, "se": se, "ci": [value - zq * se, value + zq * se]}

    estimates = {
        "delta": {"value": fit.delta_hat},
        "A": fixed_entry(0),
        "B": fixed_entry(1),
        "C": fixed_entry(2),
        "c_prime": {
            "value": fit.c_total,
            "se": fit.c_total_se,
            "ci": [fit.c_total - zq * fit.c_total_se, fit.c_total + zq * fit.c_total_se],
        },
        "ab_prod": {"value": fit.indirect_prod},
        "ab_diff": {"value": fit.indirect_diff},
    }

    seed = resolve_seed(args)
    bootstrap_block = None
    if args.bootstrap > 0:
        run = inference.wild_bootstrap(
            data, method, B=args.bootstrap, seed=seed, delta=args.delta
        )
        boot_cis = {}
        for q in inference.QUANTITIES:
            est = inference.bc_interval(run, q, level=args.ci_level)
            boot_cis[q] = [est.lower, est.upper]
        bootstrap_block = {
            "replicates": args.bootstrap,
            "seed": seed,
            "n_failed": run.n_failed,
            "ci": boot_cis,
        }

    config_echo = {
        "input": args.csv,
        "method": args.method,
        "delta": args.delta,
        "ci_level": args.ci_level,
        "bootstrap": args.bootstrap,
    }
    outputs = [args.out] if args.out else []
    manifest = make_manifest("fit-multilevel", config_echo, seed, outputs)
    report = _py(
        {
            "command": "fit-multilevel",
            "method": args.method,
            "n_subjects": data.n_subjects,
            "n_sessions": len(data.sessions),
            "estimates": estimates,
            "variance_components": {
                "psi_a": fit.psi[0],
                "psi_b": fit.psi[1],
                "psi_c": fit.psi[2],
                "lambda_sq": fit.lam.mean(),
            },
            "objective_value": fit.objective_value,
            "converged": fit.converged,
            "iterations": fit.iterations,
            "ci_level": args.ci_level,
            "bootstrap": bootstrap_block,
            "manifest": manifest,
        }
    )
    write_json_file(args.out, report)
    if args.out:
        write_sidecar(args.out, manifest, time.perf_counter() - t0)
    return 0


# ---------------------------------------------------------------------------
# profile


def _parse_grid(spec: str):
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValidationError(f"grid must be LO:HI:COUNT, got {spec!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ValidationError(f"grid must be LO:HI:COUNT with numeric fields, got {spec!r}") from None
    if not (abs(lo) < 1 and abs(hi) < 1):
        raise ValidationError("grid endpoints must lie in (-1, 1)")
    if lo > hi:
        raise ValidationError("grid LO must not exceed HI")
    if count < 1:
        raise ValidationError("grid COUNT must be at least 1")
    if count == 1:
        return np.array([lo])
    return np.linspace(lo, hi, count)


def cmd_profile(args) -> int:
    t0 = time.perf_counter()
    grid = _parse_grid(args.grid)
    if args.level == "single":
        series = read_single_csv(args.csv)
        curve = profile_loglik_curve(series, grid)
        rows = [(_fmt_float(d), _fmt_float(v)) for d, v in curve]
    else:
        data = read_multilevel_csv(args.csv)
        rows = []
        for d in grid:
            state = multilevel.cma_h_inner(data, float(d))
            # collapsed-boundary states are not admissible profile points;
            # mark them -inf, matching the objective the search maximizes
            value = state.h_value if state.interior else float("-inf")
            rows.append((_fmt_float(d), _fmt_float(value)))
    write_csv_rows(args.out, ["delta", "objective"], rows)
    if args.out:
        config_echo = {"input": args.csv, "level": args.level, "grid": args.grid}
        manifest = make_manifest("profile", config_echo, resolve_seed(args), [args.out])
        write_sidecar(args.out, manifest, time.perf_counter() - t0)
    return 0


# ---------------------------------------------------------------------------
# simulate

_SINGLE_FIELDS = {
    "n", "a", "b", "c", "sigma1", "sigma2", "delta", "p_treat", "seed",
    "confounder_mode", "u_sd", "g",
}
_MULTI_FIELDS = {
    "n_subjects", "n_sessions", "trial_mean", "fixed", "psi_diag",
    "lambda_diag", "sigma1", "sigma2", "delta", "p_treat", "seed",
}


def load_config(path):
    with _open_read(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ParseError(f"{path}: config must be a JSON object")
    is_multi = "n_subjects" in raw
    allowed = _MULTI_FIELDS if is_multi else _SINGLE_FIELDS
    for key in raw:
        if key not in allowed:
            raise ValidationError(f"{path}: unknown config key {key!r}")
    for key in ("fixed", "psi_diag", "lambda_diag"):
        if key in raw:
            if not isinstance(raw[key], list):
                raise ValidationError(f"{path}: config key {key!r} must be a list")
            raw[key] = tuple(raw[key])
    cls = simulate.MultilevelConfig if is_multi else simulate.SingleLevelConfig
    try:
        return cls(**raw)
    except TypeError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    if args.seed is not None or "CMA_SEED" in os.environ:
        from dataclasses import replace

        cfg = replace(cfg, seed=resolve_seed(args))
    if isinstance(cfg, simulate.MultilevelConfig):
        data = simulate.gen_multilevel(cfg)
        rows = []
        for key in data.sorted_keys():
            s = data.sessions[key]
            for j in range(s.n):
                rows.append(
                    (key.subject, key.session,
                     _fmt_float(s.z[j]), _fmt_float(s.m[j]), _fmt_float(s.r[j]))
                )
        write_csv_rows(args.out, MULTI_HEADER, rows)
    else:
        series = simulate.gen_single(cfg)
        rows = [
            (_fmt_float(series.z[j]), _fmt_float(series.m[j]), _fmt_float(series.r[j]))
            for j in range(series.n)
        ]
        write_csv_rows(args.out, SINGLE_HEADER, rows)
    from dataclasses import asdict

    manifest = make_manifest("simulate", asdict(cfg), cfg.seed, [args.out])
    write_sidecar(args.out, manifest, time.perf_counter() - t0)
    return 0


# ---------------------------------------------------------------------------
# reproduce

_TABLE_SPECS = {
    "table1": {
        "designs": [
            ("full", "table1"), ("a0", "table1_a0"), ("b0", "table1_b0"),
            ("a0b0", "table1_a0b0"), ("d0", "table1_d0"),
        ],
        "methods": ["cma", "bk"],
        "quantities": ["a", "c", "b", "c_total", "ab_prod", "ab_diff"],
        "default_reps": 200,
    },
    "table2": {
        "designs": [
            ("full", "multilevel"), ("a0", "multilevel_a0"), ("b0", "multilevel_b0"),
            ("a0b0", "multilevel_a0b0"), ("d0", "multilevel_d0"),
        ],
        "methods": ["h_inner", "ts", "kkb", "pooled"],
        "quantities": [
            "a", "c", "b", "c_total", "ab_prod", "ab_diff",
            "psi_a", "psi_c", "psi_b", "lam2",
        ],
        "default_reps": 50,
    },
    "table3": {
        "designs": [
            ("full", "multilevel"), ("a0", "multilevel_a0"), ("b0", "multilevel_b0"),
            ("a0b0", "multilevel_a0b0"), ("d0", "multilevel_d0"),
        ],
        "methods": ["ml", "h", "h_ts", "kkb"],
        "quantities": [
            "delta", "a", "c", "b", "c_total", "ab_prod", "ab_diff",
            "psi_a", "psi_c", "psi_b", "lam2",
        ],
        "default_reps": 50,
    },
}

_FIG_METHOD = {"fig5": "ml", "fig6": "h_ts"}


def _reproduce_table(args, target, seed, threads):
    spec = _TABLE_SPECS[target]
    reps = args.reps if args.reps is not None else spec["default_reps"]
    reference = REFERENCE[target]
    quantities = spec["quantities"]
    header = ["block", "true_delta", "method", "reps"]
    for q in quantities:
        header += [q, f"{q}_sd", f"{q}_ref", f"{q}_ref_sd"]
    rows = []
    lines = []
    for label, design_name in spec["designs"]:
        cfg = simulate.named_design(design_name)
        summary = simulate.monte_carlo(
            cfg, spec["methods"], reps=reps, seed=seed, threads=threads
        )
        ref_block = reference.get(label, {})
        for m in spec["methods"]:
            row = [label, _fmt_float(cfg.delta), m, summary.counts[m]]
            parts = []
            ref_row = ref_block.get(m, {})
            for q in quantities:
                st = summary.stats[m].get(q)
                ref = ref_row.get(q)
                row.append(_fmt_float(st["mean"]) if st else "")
                row.append(_fmt_float(st["sd"]) if st else "")
                row.append(_fmt_float(ref[0]) if ref else "")
                row.append(_fmt_float(ref[1]) if ref and ref[1] is not None else "")
                if st and q in ("delta", "a", "c", "b", "ab_prod"):
                    shown = f"{q}={st['mean']:.3f}({st['sd']:.3f})"
                    if ref:
                        shown += f" ref {ref[0]:.3f}"
                    parts.append(shown)
            rows.append(row)
            lines.append(f"  {label:>5s} {m:<8s} " + "  ".join(parts))
    return header, rows, lines, {"reps": reps}


def _reproduce_fig(args, target, seed, threads):
    from dataclasses import replace

    method = _FIG_METHOD[target]
    reps = args.reps if args.reps is not None else 30
    base = simulate.named_design("multilevel")
    axis = args.axis
    if axis == "subjects":
        grid = [(n, replace(base, n_subjects=n)) for n in (50, 200, 500)]
        axis_col = "n_subjects"
    else:
        grid = [(n, replace(base, trial_mean=float(n))) for n in (50, 100, 200)]
        axis_col = "trial_mean"
    header = [
        axis_col,
        "delta_mean", "delta_mse", "delta_se",
        "c_mean", "c_mse", "c_se",
        "b_mean", "b_mse", "b_se",
        "delta_true", "c_true", "b_true",
    ]
    rows = []
    lines = []
    for n, cfg in grid:
        summary = simulate.monte_carlo(cfg, [method], reps=reps, seed=seed, threads=threads)
        st = summary.stats[method]
        row = [n]
        for q in ("delta", "c", "b"):
            row += [
                _fmt_float(st[q]["mean"]),
                _fmt_float(st[q]["mse"]),
                _fmt_float(st[q]["sd"]),
            ]
        row += [
            _fmt_float(summary.truths["delta"]),
            _fmt_float(summary.truths["c"]),
            _fmt_float(summary.truths["b"]),
        ]
        rows.append(row)
        lines.append(
            f"  {axis_col}={n:<5d} delta={st['delta']['mean']:+.4f}"
            f" (true {summary.truths['delta']:+.2f})"
            f"  C={st['c']['mean']:+.3f}  B={st['b']['mean']:+.3f}"
        )
    return header, rows, lines, {"reps": reps, "method": method, "axis": axis}


def cmd_reproduce(args) -> int:
    t0 = time.perf_counter()
    target = args.target
    seed = resolve_seed(args)
    threads = args.threads if args.threads else (os.cpu_count() or 1)
    if target in _TABLE_SPECS:
        if args.axis != "subjects":
            raise ValidationError("--axis applies only to fig targets")
        header, rows, lines, extra = _reproduce_table(args, target, seed, threads)
    else:
        header, rows, lines, extra = _reproduce_fig(args, target, seed, threads)
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, f"{target}.csv")
    write_csv_rows(out_path, header, rows)
    config_echo = {"target": target, "threads_independent": True, **extra}
    manifest = make_manifest("reproduce", config_echo, seed, [out_path])
    write_sidecar(out_path, manifest, time.perf_counter() - t0)
    print(f"{target} ({extra.get('reps')} replications, seed {seed}) -> {out_path}")
    for line in lines:
        print(line)
    return 0


# ---------------------------------------------------------------------------
# parser and entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrmed",
        description=(
            "Mediation analysis with correlated additive errors: "
            "fit, profile, simulate, reproduce."
        ),
    )
    parser.add_argument("--version", action="version", version=f"corrmed {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("fit-single", help="fit one session at a fixed error correlation")
    p.add_argument("csv", help="input CSV with header z,m,r")
    p.add_argument("--delta", type=float, required=True,
                   help="error correlation in (-1, 1)")
    p.add_argument("--ci-level", type=float, default=0.95, dest="ci_level")
    p.add_argument("--out", default=None, help="report path (default: stdout)")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_fit_single)

    p = sub.add_parser("fit-multilevel", help="fit a subject/session dataset")
    p.add_argument("csv", help="input CSV with header subject,session,z,m,r")
    p.add_argument("--method", required=True, choices=["ml", "h", "ts", "h-ts"])
    p.add_argument("--delta", type=float, default=None,
                   help="fixed error correlation (required by ts, rejected otherwise)")
    p.add_argument("--bootstrap", type=int, default=0, metavar="B",
                   help="wild bootstrap replicates for interval estimates")
    p.add_argument("--ci-level", type=float, default=0.95, dest="ci_level")
    p.add_argument("--out", default=None, help="report path (default: stdout)")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_fit_multilevel)

    p = sub.add_parser("profile", help="write a (delta, objective) curve")
    p.add_argument("csv")
    p.add_argument("--level", required=True, choices=["single", "multi"])
    p.add_argument("--grid", default="-0.95:0.95:39", help="LO:HI:COUNT")
    p.add_argument("--out", default=None, help="curve CSV path (default: stdout)")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("simulate", help="generate a dataset from a JSON config")
    p.add_argument("config", help="JSON config naming generator fields")
    p.add_argument("--out", required=True, help="dataset CSV path")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reproduce", help="rerun a benchmark table or figure grid")
    p.add_argument("target", choices=["table1", "table2", "table3", "fig5", "fig6"])
    p.add_argument("--reps", type=int, default=None,
                   help="replications (defaults: 200 table1, 50 tables 2-3, 30 figs)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: all cores; results identical)")
    p.add_argument("--axis", choices=["subjects", "trials"], default="subjects",
                   help="fig targets: growth axis for the consistency grid")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except CorrmedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
