"""Command-line interface: ``dismet <command> [options]``.

Exit codes: 0 success, 2 bad input or I/O, 3 metric failure, 4 oracle mismatch.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import io as dio
from .baselines import (
    ProtocolParams,
    betavae_score,
    dci_disentanglement,
    downstream_accuracies,
    downstream_logistic,
    factorvae_score,
    mig,
    sap,
)
from .core import FactorTable, MetricReport, validate_pair
from .errors import DismetError, InputError, IOFailure, MetricError
from .med import (
    cooccurrence,
    importance_matrix,
    manipulation_variance,
    med_score,
    topk_med,
    topk_select,
    write_heatmap,
)
from .mi import BASE_K, DEFAULT_BINS, NATURAL, mi_matrix
from .scenarios import (
    KINDS,
    SWEEP_METRICS,
    ScenarioSpec,
    analytic_med,
    generate,
    simplified_dci,
    sweep,
)
from .synthgen import encode, factor_grid, grid_spec, parse_encoder

ORACLE_TOL = 1e-9
SAP_REPLICATION = 50
EXIT_INPUT, EXIT_METRIC, EXIT_ORACLE = 2, 3, 4

# metrics that draw no random numbers: computed once, repeated for every seed
DETERMINISTIC = {"med", "topk_med", "mig", "dci"}
EVAL_METRICS = ("med", "topk_med", "mig", "sap", "dci", "betavae", "factorvae", "downstream")


def _int_list(text: str) -> list[int]:
    try:
        out = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _base(text: str):
    if text in (NATURAL, BASE_K):
        return text
    try:
        b = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"base must be 'natural', 'k' or a number > 1, got {text!r}") from None
    if not b > 1:
        raise argparse.ArgumentTypeError("numeric base must be > 1")
    return b


def _threads(args) -> int:
    if args.threads is not None:
        n = args.threads
    else:
        env = os.environ.get("DISMET_THREADS", "").strip()
        try:
            n = int(env) if env else 1
        except ValueError:
            raise InputError(f"DISMET_THREADS must be an integer, got {env!r}") from None
    if n < 1:
        raise InputError("thread count must be >= 1")
    return n


def _emit(text: str, path) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc}") from exc


def _csv_text(header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x: float) -> str:
    return repr(float(x))


def _load(args) -> tuple[FactorTable, object]:
    factors = dio.read_factors(args.factors)
    reps = dio.read_reps(args.reps)
    return validate_pair(factors, reps)


def _params(args, seed: int) -> ProtocolParams:
    return ProtocolParams(args.batch_size, args.num_train, args.num_eval, args.prune_threshold, seed)


def _factor_index(factors: FactorTable, ref: str) -> int:
    if ref in factors.names:
        return factors.names.index(ref)
    try:
        j = int(ref)
    except ValueError:
        raise InputError(f"unknown factor {ref!r}; known: {', '.join(factors.names)}") from None
    if not 0 <= j < factors.k:
        raise InputError(f"factor index {j} not in [0, {factors.k})")
    return j


# eval


def _score(metric: str, reps, factors, args, seed: int, workers: int) -> float:
    if metric == "med":
        return med_score(reps, factors, args.bins, args.base, workers)
    if metric == "topk_med":
        return topk_med(reps, factors, args.k, args.bins, args.base, workers)
    if metric == "mig":
        return mig(reps, factors, args.bins, args.base, workers)
    if metric == "dci":
        return dci_disentanglement(reps, factors, base=args.base)
    params = _params(args, seed)
    if metric == "sap":
        return sap(reps, factors, params)
    if metric == "betavae":
        return betavae_score(reps, factors, params)
    if metric == "factorvae":
        return factorvae_score(reps, factors, params)
    return downstream_logistic(reps, factors, params)


def cmd_eval(args) -> int:
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    unknown = [m for m in metrics if m not in EVAL_METRICS]
    if unknown or not metrics:
        raise InputError(f"unknown metric(s) {unknown}; valid names: {', '.join(EVAL_METRICS)}")
    factors, reps = _load(args)
    threads = _threads(args)
    jobs = []
    for m in metrics:
        for s in ([args.seeds[0]] if m in DETERMINISTIC else args.seeds):
            jobs.append((m, s))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            futures = [ex.submit(_score, m, reps, factors, args, s, 1) for m, s in jobs]
            values = [f.result() for f in futures]
    else:
        values = [_score(m, reps, factors, args, s, threads) for m, s in jobs]
    got = dict(zip(jobs, values))
    reports = []
    for m in metrics:
        raw = [got[(m, args.seeds[0])] if m in DETERMINISTIC else got[(m, s)] for s in args.seeds]
        params = {"seeds": list(args.seeds), "bins": args.bins,
                  "base": args.base if isinstance(args.base, str) else float(args.base)}
        if m == "topk_med":
            params["k"] = args.k
        if m in ("sap", "betavae", "factorvae", "downstream"):
            params.update(batch_size=args.batch_size, num_train=args.num_train, num_eval=args.num_eval,
                          prune_threshold=args.prune_threshold)
        clamped = [min(max(v, 0.0), 1.0) for v in raw]
        if clamped != raw:
            params["unclamped_scores"] = raw
        reports.append(MetricReport.from_scores(m, clamped, params))
    _emit(dio.dumps_reports(reports), args.out)
    return 0


# selection and importance views


def cmd_topk(args) -> int:
    factors, reps = _load(args)
    workers = _threads(args)
    ks = args.k_list if args.k_list else [args.k]
    rows = []
    for k in ks:
        score, sel = topk_med(reps, factors, k, args.bins, args.base, workers, return_selection=True)
        rows.append({
            "k": k,
            "topk_med": score,
            "picked": list(sel.picked),
            "picked_per_factor": {n: list(p) for n, p in zip(factors.names, sel.picked_per_factor)},
        })
    if args.format == "csv":
        text = _csv_text(["k", "topk_med", "picked"],
                         [[r["k"], _fmt(r["topk_med"]), " ".join(map(str, r["picked"]))] for r in rows])
    else:
        text = json.dumps(rows if args.k_list else rows[0], indent=2) + "\n"
    _emit(text, args.out)
    return 0


def cmd_cooccur(args) -> int:
    factors, reps = _load(args)
    mi = mi_matrix(reps, factors, args.bins, args.base, _threads(args))
    if args.k is not None:
        imp = importance_matrix(mi)
        picked = list(topk_select(imp.R, imp.S, args.k).picked)
        I = mi.values[picked]
    else:
        I = mi.values
    C = cooccurrence(I)
    rows = [[name] + [_fmt(x) for x in row] for name, row in zip(factors.names, C)]
    _emit(_csv_text(["factor", *factors.names], rows), args.out)
    return 0


def cmd_heatmap(args) -> int:
    factors, reps = _load(args)
    imp = importance_matrix(mi_matrix(reps, factors, args.bins, args.base, _threads(args)))
    if args.out is None or args.out == "-":
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["factor"] + [f"dim{i}" for i in range(imp.d)])
        for name, row in zip(factors.names, imp.R.T):
            w.writerow([name] + [_fmt(x) for x in row])
        sys.stdout.write(buf.getvalue())
    else:
        write_heatmap(imp, factors.names, args.out)
    return 0


# scenarios and sweeps


def _check(rows, failures, kind, d, metric, value, expected, tol=ORACLE_TOL):
    ok = expected is None or abs(value - expected) <= tol
    status = "-" if expected is None else ("pass" if ok else "FAIL")
    rows.append([kind, d, metric, _fmt(value), "" if expected is None else _fmt(expected), status])
    if not ok:
        failures.append(f"{kind} D={d} {metric}: got {value!r}, expected {expected!r}")


def cmd_scenario(args) -> int:
    rows, failures = [], []
    for d in args.dims:
        spec = ScenarioSpec(args.kind, d, args.replication)
        factors, reps = generate(spec)
        med = med_score(reps, factors, args.bins, args.base)
        # closed forms are natural-log values; any other base must fail the check
        _check(rows, failures, args.kind, d, "med", med, analytic_med(spec))
        top = topk_med(reps, factors, args.k, args.bins, args.base)
        expected_top = None
        if args.kind == "duplicated" or (args.kind == "copy-average" and args.k == 1):
            expected_top = 1.0
        _check(rows, failures, args.kind, d, f"top{args.k}_med", top, expected_top)
        m = mig(reps, factors, args.bins, args.base)
        _check(rows, failures, args.kind, d, "mig", m,
               0.0 if args.kind == "duplicated" and d >= 4 else None)
        if args.kind == "duplicated" and d >= 4:
            # SAP needs a train/eval split, so it runs on a replicated grid
            sf, sr = generate(ScenarioSpec(args.kind, d, max(args.replication, SAP_REPLICATION)))
            s = sap(sr, sf, ProtocolParams(seed=args.seed))
            _check(rows, failures, args.kind, d, "sap", s, 0.0, tol=0.01)
        if args.kind == "copy-average":
            summ = simplified_dci(d, base=args.base)
            _check(rows, failures, args.kind, d, "dci_formula", summ.mean, None)
            _check(rows, failures, args.kind, d, "dci_closed_form", summ.closed_form_mean, None)
            if "d0!=d1" in summ.cases:
                _check(rows, failures, args.kind, d, "dci_distinct_picks", summ.cases["d0!=d1"][0], 1.0)
    _emit(_csv_text(["kind", "D", "metric", "value", "expected", "status"], rows), args.out)
    return _finish(failures)


def _finish(failures) -> int:
    if failures:
        for f in failures:
            print(f"oracle mismatch: {f}", file=sys.stderr)
        return EXIT_ORACLE
    print("all oracle checks passed", file=sys.stderr)
    return 0


def _strictly(values, increasing: bool) -> bool:
    pairs = zip(values, values[1:])
    return all((b > a) if increasing else (b < a) for a, b in pairs)


def cmd_sweep(args) -> int:
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    unknown = [m for m in metrics if m not in SWEEP_METRICS]
    if unknown:
        raise InputError(f"unknown sweep metric(s) {unknown}; valid names: {', '.join(SWEEP_METRICS)}")
    dims = sorted(args.dims)
    rows = sweep(args.kind, dims, metrics, args.base, args.k, args.replication, args.seed)
    failures = []
    by_metric: dict[str, list[float]] = {}
    for kind, d, metric, value in rows:
        by_metric.setdefault(metric, []).append(value)
        if metric == "med":
            expected = analytic_med(ScenarioSpec(kind, d))
            if abs(value - expected) > ORACLE_TOL:
                failures.append(f"{kind} D={d} med: got {value!r}, closed form {expected!r}")
    if args.kind == "copy-average":
        for metric, increasing in (("med", False), ("dci_formula", True), ("dci_closed_form", True)):
            vals = by_metric.get(metric)
            if vals and not _strictly(vals, increasing):
                trend = "increasing" if increasing else "decreasing"
                failures.append(f"{metric} is not strictly {trend} in D: {vals}")
    text = _csv_text(["kind", "D", "metric", "value"], [[k, d, m, _fmt(v)] for k, d, m, v in rows])
    _emit(text, args.out)
    return _finish(failures)


# generation and probes


def cmd_gen(args) -> int:
    if (args.dataset is None) == (args.grid is None):
        raise InputError("give exactly one of --dataset or --grid")
    spec = dio.dataset_spec(args.dataset) if args.dataset else grid_spec(args.grid)
    factors = factor_grid(spec, args.mode, args.n, args.seed)
    if args.replication > 1:
        factors = factors.take(np.tile(np.arange(factors.n), args.replication))
    reps = encode(factors, parse_encoder(args.encoder, args.seed))
    try:
        dio.write_factors(factors, args.out + ".csv")
        dio.write_reps(reps, args.out + ".drep")
    except OSError as exc:
        raise IOFailure(f"cannot write {args.out}.*: {exc}") from exc
    print(f"wrote {args.out}.csv ({factors.n}x{factors.k}) and {args.out}.drep ({reps.n}x{reps.d})",
          file=sys.stderr)
    return 0


def cmd_probe(args) -> int:
    factors, reps = _load(args)
    columns = None
    if args.k is not None:
        imp = importance_matrix(mi_matrix(reps, factors, args.bins, args.base, _threads(args)))
        columns = list(topk_select(imp.R, imp.S, args.k).picked)
    which = [_factor_index(factors, f) for f in args.factor] if args.factor else range(factors.k)
    rows = []
    width = None
    for j in which:
        prof = manipulation_variance(reps, factors, j, columns, args.pca, args.assignment)
        width = len(prof)
        rows.append([factors.names[j]] + [_fmt(x) for x in prof])
    header = ["factor"] + ([f"dim{c}" for c in columns] if columns is not None and args.pca is None
                           else [f"dim{i}" for i in range(width or 0)])
    _emit(_csv_text(header, rows), args.out)
    if args.downstream_out:
        table = []
        for s in args.seeds:
            acc = downstream_accuracies(reps, factors, _params(args, s))
            table += [[s, name, _fmt(a)] for name, a in zip(factors.names, acc)]
            table.append([s, "mean", _fmt(math.fsum(acc) / len(acc))])
        _emit(_csv_text(["seed", "factor", "accuracy"], table), args.downstream_out)
    return 0


# parser


def _add_common(p, pair=True):
    if pair:
        p.add_argument("--factors", required=True, help="factor CSV (header name:cardinality)")
        p.add_argument("--reps", required=True, help="DREP representation file")
    p.add_argument("--bins", type=int, default=DEFAULT_BINS)
    p.add_argument("--base", type=_base, default=NATURAL, help="natural (default), k, or a number")
    p.add_argument("--threads", type=int, default=None, help="worker threads (env DISMET_THREADS)")
    p.add_argument("--out", default=None, help="output path (default stdout)")


def _add_protocol(p):
    p.add_argument("--seeds", type=_int_list, default=[0])
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--num-train", type=int, default=10000)
    p.add_argument("--num-eval", type=int, default=5000)
    p.add_argument("--prune-threshold", type=float, default=0.06)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dismet", description="Disentanglement metrics toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="score a representation with one or more metrics")
    _add_common(p)
    _add_protocol(p)
    p.add_argument("--metrics", default="med", help=f"comma list of {', '.join(EVAL_METRICS)}")
    p.add_argument("--k", type=int, default=2, help="k for topk_med")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("topk", help="Top-k selection and score, optionally over several k")
    _add_common(p)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--k-list", type=_int_list, default=None, help="ablation over these k")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_topk)

    p = sub.add_parser("cooccur", help="K x K co-occurrence of factor MI profiles")
    _add_common(p)
    p.add_argument("--k", type=int, default=None, help="restrict to the Top-k selection")
    p.set_defaults(func=cmd_cooccur)

    p = sub.add_parser("heatmap", help="importance matrix as a K x D CSV")
    _add_common(p)
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("scenario", help="two-factor constructions checked against closed forms")
    _add_common(p, pair=False)
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--dims", type=_int_list, default=[4, 10, 100, 1000])
    p.add_argument("--replication", type=int, default=1)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("sweep", help="metric curves over the latent dimension D")
    _add_common(p, pair=False)
    p.add_argument("--kind", choices=KINDS, default="copy-average")
    p.add_argument("--dims", type=_int_list, default=[3, 10, 100, 1000])
    p.add_argument("--metrics", default="med,dci_formula,dci_closed_form")
    p.add_argument("--replication", type=int, default=1)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen", help="write a synthetic factor CSV + DREP pair")
    p.add_argument("--dataset", default=None, help=f"one of {', '.join(dio.DATASETS)}")
    p.add_argument("--grid", type=_int_list, default=None, help="cardinalities, e.g. 3,4")
    p.add_argument("--mode", choices=("full", "sample"), default="full")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replication", type=int, default=1)
    p.add_argument("--encoder", default="identity", help="e.g. random-projection:1000:tanh+append-noise:2")
    p.add_argument("--out", required=True, help="output prefix; writes PREFIX.csv and PREFIX.drep")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("probe", help="manipulation-variance profiles and downstream accuracy")
    _add_common(p)
    _add_protocol(p)
    p.add_argument("--factor", action="append", default=None, help="factor name or index (repeatable)")
    p.add_argument("--k", type=int, default=None, help="restrict to the Top-k selection")
    p.add_argument("--pca", type=int, default=None, help="reduce to this many principal components")
    p.add_argument("--assignment", type=int, default=None, help="use one other-factor assignment")
    p.add_argument("--downstream-out", default=None, help="also write per-factor logistic accuracy CSV")
    p.set_defaults(func=cmd_probe)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    for name in ("bins", "k"):
        v = getattr(args, name, None)
        if v is not None and v < (2 if name == "bins" else 1):
            print(f"error: --{name} too small", file=sys.stderr)
            return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MetricError as exc:
        print(f"metric error: {exc}", file=sys.stderr)
        return EXIT_METRIC
    except (OSError, DismetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
