"""Command-line front end.

Subcommands::

    score      per-feature clustering scores
    select     scores plus a threshold (fixed, simulated or data-driven)
    pairs      selection that also screens feature pairs
    calibrate  detection table and calibrated threshold for a noise law
    simulate   write a simulated design to CSV
    eval       repeat a design and report average FN / FP (and CER)

Every file-producing command writes a CSV plus a JSON summary next to it
(same path, ``.json`` suffix).  Files are written to temporaries and
renamed, so a failed run leaves nothing behind.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import CalibrationError, CosciError, IngestionError, InputError
from .evalmetrics import confusion_counts, kmeans_lloyd, per_signal_cer
from .fdr_selector import FdrConfig, data_driven_alpha, compute_psi
from .interactions import combine_screens, pair_scores
from .merge_engine import default_threads, score_columns, scores_array
from .screening import (DEFAULT_GRID, ThresholdSpec, calibrate_threshold,
                        detection_table, screen_fixed)
from .simgen import DatasetMatrix, sample_experiment

COMMANDS = ("score", "select", "calibrate", "pairs", "simulate", "eval")
PAIR_DESIGNS = ("V", "corr_V")


@dataclass
class RunConfig:
    """Everything one CLI invocation needs."""

    command: str
    input_path: Optional[str] = None
    output_path: Optional[str] = None
    threshold_spec: Optional[ThresholdSpec] = None
    truncation_q: float = 0.9
    bins: int = 60
    degree: Optional[int] = None
    m: int = 20
    tau: Optional[float] = None
    threads: Optional[int] = None
    seed: int = 0
    transpose: bool = False
    has_header: bool = False
    design: Optional[str] = None
    n: Optional[int] = None
    reps: int = 50
    alphas: tuple = ()
    with_cer: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.command in ("score", "select", "pairs") and not self.input_path:
            raise InputError(f"{self.command} needs --input")
        if self.command != "eval" and not self.output_path:
            raise InputError(f"{self.command} needs --output")
        if self.threads is not None and self.threads < 1:
            raise InputError("--threads must be positive")

    @property
    def fdr_config(self) -> FdrConfig:
        return FdrConfig(bins=self.bins, degree=self.degree)

    def resolved_threads(self) -> int:
        return default_threads() if self.threads is None else self.threads


@dataclass
class ScoreReport:
    """Per-feature records and a run summary.

    ``summary`` holds everything that depends only on the data and the
    settings; ``run`` holds timing and the worker count, which legitimately
    vary between otherwise identical runs.
    """

    records: list
    summary: dict
    run: dict = field(default_factory=dict)
    extra_tables: dict = field(default_factory=dict)


# -- ingestion -------------------------------------------------------------

def ingest_matrix(path, has_header: bool = False,
                  transpose: bool = False) -> DatasetMatrix:
    """Read a comma-separated numeric matrix.

    Rows are observations and columns features, unless ``transpose``.
    Feature names come from the header row when present (and not
    transposed), otherwise ``f1..fp``.
    """
    path = Path(path)
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            first = fh.readline()
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc.strerror}") from None
    if not first.strip():
        raise IngestionError(f"{path}: empty file")
    header = next(csv.reader([first])) if has_header else None
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", UserWarning)
            data = np.loadtxt(path, delimiter=",", dtype=np.float64,
                              skiprows=1 if has_header else 0, ndmin=2,
                              encoding="utf-8")
    except UserWarning:
        raise IngestionError(f"{path}: no data rows") from None
    except ValueError as exc:
        raise IngestionError(f"{path}: {_locate(path, has_header, exc)}") \
            from None
    if data.size == 0:
        raise IngestionError(f"{path}: no data rows")
    if header is not None and len(header) != data.shape[1]:
        raise IngestionError(f"{path}: header has {len(header)} fields but "
                             f"rows have {data.shape[1]}")
    bad = np.argwhere(~np.isfinite(data))
    if bad.size:
        r, c = (int(v) for v in bad[0])
        line = r + 1 + (1 if has_header else 0)
        raise IngestionError(f"{path}: non-finite value {float(data[r, c])!r} at "
                             f"line {line}, column {c + 1}")
    names = [h.strip() for h in header] if header is not None else None
    if transpose:
        data = data.T
        names = None
    return DatasetMatrix(data=np.asfortranarray(data), names=names)


def _locate(path, has_header, exc):
    """Describe the first malformed cell as ``line L, column C``."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = csv.reader(fh)
        width = None
        for line, row in enumerate(rows, start=1):
            if has_header and line == 1:
                continue
            if not row:
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                return (f"line {line} has {len(row)} fields, "
                        f"expected {width}")
            for col, cell in enumerate(row, start=1):
                try:
                    float(cell)
                except ValueError:
                    return (f"non-numeric cell {cell!r} at line {line}, "
                            f"column {col}")
    return str(exc)


# -- output ----------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, frozenset, set)):
        items = sorted(v) if isinstance(v, (frozenset, set)) else v
        return [_jsonable(x) for x in items]
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else None
    return v


def _csv_text(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    if rows:
        cols = list(rows[0].keys())
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in cols])
    return buf.getvalue()


def side_car(path) -> Path:
    return Path(path).with_suffix(".json")


def _atomic_write(files: dict) -> None:
    """Write every ``path -> text`` pair, or none of them."""
    staged = []
    try:
        for path, text in files.items():
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            staged.append((tmp, path))
        for tmp, path in staged:
            os.replace(tmp, path)
    finally:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)


def write_report(report: ScoreReport, path) -> None:
    files = {path: _csv_text(report.records)}
    for suffix, rows in report.extra_tables.items():
        p = Path(path)
        files[p.with_name(f"{p.stem}.{suffix}.csv")] = _csv_text(rows)
    doc = {"summary": _jsonable(report.summary), "run": _jsonable(report.run)}
    files[side_car(path)] = json.dumps(doc, indent=2) + "\n"
    _atomic_write(files)


# -- pipeline --------------------------------------------------------------

def _feature_records(ds, scores, psi=None, T=None, selected=None):
    recs = []
    for j, s in enumerate(scores):
        rec = {"index": j, "name": ds.names[j], "score": s.score}
        if s.tau is not None:
            rec["restricted_score"] = s.restricted_score
        if psi is not None:
            rec["psi"] = float(psi[j])
        if T is not None:
            rec["T"] = float(T[j])
        if selected is not None:
            rec["selected"] = j in selected
        recs.append(rec)
    return recs


def _selection_summary(ds, selected, alpha0_used, extra=None):
    summary = {"n": ds.n, "p": ds.p, "alpha0_used": alpha0_used,
               "selected": sorted(selected),
               "selected_names": [ds.names[j] for j in sorted(selected)],
               "selected_count": len(selected)}
    summary.update(extra or {})
    return summary


def select_features(scores, spec: ThresholdSpec, n: int, config: RunConfig,
                    threads: int):
    """Apply the configured threshold rule to marginal scores.

    Returns ``(selected, alpha0_used, details)``.
    """
    if spec.mode == "fixed":
        res = screen_fixed(scores, spec.alpha0)
        return res.selected, res.alpha0_used, {}
    if spec.mode == "simulated":
        a = calibrate_threshold(n, spec, config.seed, threads)
        res = screen_fixed(scores, a)
        return res.selected, a, {"calibrated_alpha0": a}
    sel = data_driven_alpha(scores, config.truncation_q, config.fdr_config)
    details = {"k_s": sel.k_s, "k_d": sel.k_d, "delta_p": sel.delta_p,
               "alpha0_hat": sel.alpha0_hat, "pi0": sel.null.pi0,
               "null_beta_a": sel.null.beta_a, "null_beta_b": sel.null.beta_b,
               "null_cutoff": sel.null.cutoff,
               "truncation_q": config.truncation_q,
               "bins": config.bins, "degree": sel.mixture.basis_degree,
               "_T": sel.T}
    return sel.selected, sel.alpha0_hat, details


def _pairs_selection(scores, pairs, spec, n, config, threads):
    if spec.mode == "data_driven":
        # one empirical null over marginal and pair scores together
        pooled = list(scores_array(scores)) + [ps.score for ps in pairs]
        sel = data_driven_alpha(pooled, config.truncation_q, config.fdr_config)
        a = sel.alpha0_hat
        details = {"k_s": sel.k_s, "k_d": sel.k_d, "alpha0_hat": a,
                   "pi0": sel.null.pi0, "pooled_tests": len(pooled)}
        selected = frozenset() if a is None else combine_screens(scores, pairs, a)
        return selected, a, details
    if spec.mode == "simulated":
        a = calibrate_threshold(n, spec, config.seed, threads)
    else:
        a = spec.alpha0
    return combine_screens(scores, pairs, a), a, {}


def run_pipeline(config: RunConfig, dataset: Optional[DatasetMatrix] = None,
                 write: bool = True) -> ScoreReport:
    """Score, select and report for the ``score``, ``select`` and ``pairs``
    commands."""
    start = time.perf_counter()
    ds = dataset if dataset is not None else ingest_matrix(
        config.input_path, config.has_header, config.transpose)
    threads = config.resolved_threads()
    scores = score_columns(ds.data, config.tau, threads)
    psi = compute_psi(scores).psi if ds.p >= 2 else 2.0 * scores_array(scores)
    extra_tables = {}

    if config.command == "score":
        records = _feature_records(ds, scores, psi=psi)
        summary = {"n": ds.n, "p": ds.p, "tau": config.tau}
    elif config.command == "select":
        spec = config.threshold_spec or ThresholdSpec("data_driven")
        selected, a, details = select_features(scores, spec, ds.n, config,
                                               threads)
        T = details.pop("_T", None)
        records = _feature_records(ds, scores, psi=psi, T=T, selected=selected)
        summary = _selection_summary(ds, selected, a,
                                     {"mode": spec.mode, **details})
    elif config.command == "pairs":
        spec = config.threshold_spec or ThresholdSpec("data_driven")
        pairs = pair_scores(ds.data, config.m, threads) if ds.p >= 2 else []
        selected, a, details = _pairs_selection(scores, pairs, spec, ds.n,
                                                config, threads)
        records = _feature_records(ds, scores, psi=psi, selected=selected)
        extra_tables["pairs"] = [
            {"i": ps.i, "j": ps.j, "name_i": ds.names[ps.i],
             "name_j": ds.names[ps.j], "score": ps.score,
             "u1": ps.u_star[0], "u2": ps.u_star[1]} for ps in pairs]
        summary = _selection_summary(ds, selected, a,
                                     {"mode": spec.mode, "m": config.m,
                                      **details})
    else:
        raise InputError(f"run_pipeline does not handle {config.command!r}")

    report = ScoreReport(records=records, summary=summary,
                         run={"threads": threads,
                              "wall_time_seconds":
                                  time.perf_counter() - start},
                         extra_tables=extra_tables)
    if write:
        write_report(report, config.output_path)
    return report


# -- experiments -----------------------------------------------------------

def _se(values):
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if v.size < 2:
        return float("nan")
    return float(np.std(v, ddof=1) / math.sqrt(v.size))


def _clustering_error(ds, selected, seed):
    if not ds.labels or not selected:
        return float("nan")
    X = ds.data[:, sorted(selected)]
    X = (X - X.mean(axis=0)) / np.where(X.std(axis=0) > 0, X.std(axis=0), 1.0)
    errs = []
    for s in sorted(ds.labels):
        truth = ds.labels[s]
        k = int(np.unique(truth).size)
        pred = kmeans_lloyd(X, k, restarts=5, seed=seed)
        errs.append(per_signal_cer(pred, [truth]))
    return float(np.mean(errs))


def run_experiment(design_id: str, n: int, reps: int, threshold_mode: str,
                   seed: int, alphas: Sequence[float] = (0.2,),
                   m: int = 20, truncation_q: float = 0.9,
                   pairs: Optional[bool] = None, with_cer: bool = False,
                   threads: Optional[int] = None,
                   fdr_config: Optional[FdrConfig] = None) -> list:
    """Average screening errors over ``reps`` replicates of a design.

    Replicate ``r`` uses seed ``seed + r``.  In ``fixed`` mode every value
    in ``alphas`` is evaluated on the same replicates.  Designs with
    jointly informative pairs switch on pair screening unless ``pairs`` is
    given.

    Returns
    -------
    list of dict
        One row per threshold with ``avg_fn``, ``se_fn``, ``avg_fp``,
        ``se_fp`` and, with ``with_cer``, ``avg_cer``/``se_cer``.
    """
    mode = threshold_mode.replace("-", "_")
    if mode not in ("fixed", "data_driven"):
        raise InputError("experiments support fixed and data-driven modes")
    if reps < 1:
        raise InputError("reps must be positive")
    if pairs is None:
        pairs = str(design_id) in PAIR_DESIGNS
    threads = default_threads() if threads is None else int(threads)
    fdr_config = fdr_config or FdrConfig()
    labels = [repr(float(a)) for a in alphas] if mode == "fixed" \
        else ["data-driven"]
    fn = {k: [] for k in labels}
    fp = {k: [] for k in labels}
    ce = {k: [] for k in labels}
    for r in range(int(reps)):
        ds = sample_experiment(design_id, n, seed + r, threads=threads)
        scores = score_columns(ds.data, None, threads)
        ps = pair_scores(ds.data, m, threads) if pairs else None
        chosen = {}
        if mode == "fixed":
            for a, key in zip(alphas, labels):
                chosen[key] = combine_screens(scores, ps, a) if pairs \
                    else screen_fixed(scores, a).selected
        else:
            if pairs:
                pooled = list(scores_array(scores)) + [q.score for q in ps]
                res = data_driven_alpha(pooled, truncation_q, fdr_config)
                chosen["data-driven"] = frozenset() if res.alpha0_hat is None \
                    else combine_screens(scores, ps, res.alpha0_hat)
            else:
                chosen["data-driven"] = data_driven_alpha(
                    scores, truncation_q, fdr_config).selected
        for key, sel in chosen.items():
            cc = confusion_counts(sel, ds.signal_set, ds.p)
            fn[key].append(cc.false_negatives)
            fp[key].append(cc.false_positives)
            if with_cer:
                ce[key].append(_clustering_error(ds, sel, seed + r))
    rows = []
    for key in labels:
        row = {"design": str(design_id), "n": int(n), "reps": int(reps),
               "threshold": key,
               "avg_fn": float(np.mean(fn[key])), "se_fn": _se(fn[key]),
               "avg_fp": float(np.mean(fp[key])), "se_fp": _se(fp[key])}
        if with_cer:
            row["avg_cer"] = float(np.nanmean(ce[key])) \
                if np.any(np.isfinite(ce[key])) else float("nan")
            row["se_cer"] = _se(ce[key])
        rows.append(row)
    return rows


# -- argument parsing ------------------------------------------------------

def _add_common(p, need_input=True, need_output=True):
    if need_input:
        p.add_argument("--input", required=True, help="CSV data file")
        p.add_argument("--header", action="store_true",
                       help="first row holds feature names")
        p.add_argument("--transpose", action="store_true",
                       help="rows are features instead of observations")
    p.add_argument("--output", required=need_output, help="report CSV path")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: COSCI_THREADS or CPU count)")
    p.add_argument("--seed", type=int, default=0)


def _add_threshold(p, default_mode):
    p.add_argument("--mode", choices=("fixed", "simulated", "data-driven"),
                   default=default_mode)
    p.add_argument("--alpha0", type=float, default=None,
                   help="threshold for --mode fixed")
    p.add_argument("--q", type=float, default=0.9,
                   help="fraction of features used for the null fit")
    p.add_argument("--bins", type=int, default=60)
    p.add_argument("--degree", type=int, default=None)
    p.add_argument("--family", default="gaussian",
                   help="noise law for --mode simulated")
    p.add_argument("--reps", type=int, default=100,
                   help="replicates for --mode simulated")
    p.add_argument("--tolerance", type=float, default=0.01,
                   help="detection tolerance for --mode simulated")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cosci",
        description="Feature screening by clustering scores.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="per-feature clustering scores")
    _add_common(p)
    p.add_argument("--tau", type=float, default=None,
                   help="also report the score restricted to the central "
                        "(tau, 1-tau) quantile band")

    p = sub.add_parser("select", help="scores and a selected feature set")
    _add_common(p)
    _add_threshold(p, "data-driven")
    p.add_argument("--tau", type=float, default=None)

    p = sub.add_parser("pairs", help="selection including feature pairs")
    _add_common(p)
    _add_threshold(p, "fixed")
    p.add_argument("--m", type=int, default=20,
                   help="points on the unit circle used as directions")

    p = sub.add_parser("calibrate", help="simulated threshold calibration")
    _add_common(p, need_input=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--family", default="gaussian")
    p.add_argument("--grid", type=float, nargs="+", default=list(DEFAULT_GRID))
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--tolerance", type=float, default=0.01)

    p = sub.add_parser("simulate", help="write a simulated design to CSV")
    _add_common(p, need_input=False)
    p.add_argument("--design", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--header", action="store_true")

    p = sub.add_parser("eval", help="average FN/FP over repeated designs")
    _add_common(p, need_input=False, need_output=False)
    p.add_argument("--design", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--mode", choices=("fixed", "data-driven"),
                   default="data-driven")
    p.add_argument("--alpha0", type=float, nargs="+", default=[0.2])
    p.add_argument("--q", type=float, default=0.9)
    p.add_argument("--bins", type=int, default=60)
    p.add_argument("--degree", type=int, default=None)
    p.add_argument("--m", type=int, default=20)
    p.add_argument("--cer", action="store_true",
                   help="also report per-signal clustering error of k-means "
                        "on the selected features")
    return parser


def _threshold_spec(args) -> ThresholdSpec:
    mode = args.mode.replace("-", "_")
    if mode == "fixed" and args.alpha0 is None:
        raise InputError("--mode fixed needs --alpha0")
    return ThresholdSpec(mode=mode, alpha0=args.alpha0,
                         noise_family=args.family, reps=args.reps,
                         detect_tolerance=args.tolerance)


def config_from_args(args) -> RunConfig:
    cmd = args.command
    cfg = dict(command=cmd, output_path=args.output, threads=args.threads,
               seed=args.seed)
    if cmd in ("score", "select", "pairs"):
        cfg.update(input_path=args.input, has_header=args.header,
                   transpose=args.transpose)
    if cmd in ("select", "pairs"):
        cfg.update(threshold_spec=_threshold_spec(args), truncation_q=args.q,
                   bins=args.bins, degree=args.degree)
    if cmd in ("score", "select"):
        cfg["tau"] = args.tau
    if cmd in ("pairs", "eval"):
        cfg["m"] = args.m
    if cmd == "calibrate":
        cfg.update(n=args.n, reps=args.reps, threshold_spec=ThresholdSpec(
            mode="simulated", noise_family=args.family, grid=tuple(args.grid),
            reps=args.reps, detect_tolerance=args.tolerance))
    if cmd == "simulate":
        cfg.update(design=args.design, n=args.n, has_header=args.header)
    if cmd == "eval":
        cfg.update(design=args.design, n=args.n, reps=args.reps,
                   threshold_spec=ThresholdSpec(
                       mode=args.mode.replace("-", "_"),
                       alpha0=args.alpha0[0] if args.mode == "fixed" else None),
                   alphas=tuple(args.alpha0), truncation_q=args.q,
                   bins=args.bins, degree=args.degree, with_cer=args.cer)
    return RunConfig(**cfg)


def _run_calibrate(config: RunConfig) -> None:
    start = time.perf_counter()
    spec = config.threshold_spec
    threads = config.resolved_threads()
    if spec.reps < 50:
        raise InputError("calibration needs at least 50 replicates")
    table = detection_table(config.n, spec, config.seed, threads)
    passing = [a for a in spec.grid if table[a] <= spec.detect_tolerance]
    if not passing:
        lines = ", ".join(f"{a}: {table[a]}" for a in spec.grid)
        raise CalibrationError(
            f"no grid threshold within detection tolerance "
            f"{spec.detect_tolerance} ({lines})", table)
    rows = [{"alpha0": a, "detection_fraction": table[a]} for a in spec.grid]
    summary = {"n": config.n, "family": spec.noise_family, "reps": spec.reps,
               "detect_tolerance": spec.detect_tolerance,
               "alpha0": passing[0], "seed": config.seed}
    write_report(ScoreReport(rows, summary, {
        "threads": threads,
        "wall_time_seconds": time.perf_counter() - start}),
        config.output_path)


def _run_simulate(config: RunConfig) -> None:
    ds = sample_experiment(config.design, config.n, config.seed,
                           threads=config.resolved_threads())
    buf = io.StringIO()
    header = ",".join(ds.names) if config.has_header else ""
    np.savetxt(buf, ds.data, delimiter=",", fmt="%.17g", header=header,
               comments="")
    text = buf.getvalue()
    if not config.has_header:
        text = text.lstrip("\n")
    summary = {"design": ds.metadata["design"], "n": ds.n, "p": ds.p,
               "seed": config.seed, "signal_set": sorted(ds.signal_set),
               "noise_columns": ds.metadata["noise_columns"]}
    _atomic_write({config.output_path: text,
                   side_car(config.output_path):
                       json.dumps({"summary": _jsonable(summary)}, indent=2)
                       + "\n"})


def _run_eval(config: RunConfig) -> list:
    start = time.perf_counter()
    spec = config.threshold_spec
    rows = run_experiment(config.design, config.n, config.reps, spec.mode,
                          config.seed, alphas=config.alphas, m=config.m,
                          truncation_q=config.truncation_q,
                          with_cer=config.with_cer,
                          threads=config.resolved_threads(),
                          fdr_config=config.fdr_config)
    if config.output_path:
        summary = {"design": config.design, "n": config.n,
                   "reps": config.reps, "mode": spec.mode,
                   "seed": config.seed, "rows": rows}
        write_report(ScoreReport(rows, summary, {
            "threads": config.resolved_threads(),
            "wall_time_seconds": time.perf_counter() - start}),
            config.output_path)
    return rows


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
        if config.command == "calibrate":
            _run_calibrate(config)
        elif config.command == "simulate":
            _run_simulate(config)
        elif config.command == "eval":
            for row in _run_eval(config):
                print(", ".join(f"{k}={_fmt(v)}" for k, v in row.items()))
        else:
            run_pipeline(config)
    except CosciError as exc:
        print(f"cosci: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
