"""Command-line front end.

All log-space quantities use c + 1 (the +1 shift is always on).

Exit status: 0 success, 2 usage error, 3 unreadable or malformed input,
4 invariant violation or out-of-domain value, 5 validation failure,
6 unknown journal id or degenerate comparison.
"""
from __future__ import annotations

import argparse
import math
import sys
import warnings

import numpy as np

from citecore import dataset_io, empirical, estimated, montecarlo
from citecore.errors import DegenerateComparisonError, InvariantError, ParseError, CitecoreError
from citecore.estimated import JournalRecord
from citecore.lognormal import arith_to_log

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_INVARIANT = 4
EXIT_VALIDATION = 5
EXIT_LOOKUP = 6

FIGURES = ("h", "csi", "group-csi", "kappa", "rank")


class LookupFailure(CitecoreError):
    pass


def _records_from_citations(vectors: dict) -> list:
    records = []
    for jid, counts in vectors.items():
        arith, log = empirical.empirical_moments(counts)
        records.append(JournalRecord(jid, jid, len(counts), arith, log, "measured"))
    return records


def _load_summary_nonempty(path, moments: str = "auto") -> list:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        records = dataset_io.load_summary(path)
    if not records:
        raise InvariantError(f"{path}: summary contains no journals")
    if moments == "derived":
        records = [j.with_derived_log() for j in records]
    return records


def _lookup(records, jid) -> JournalRecord:
    for j in records:
        if j.id == jid:
            return j
    raise LookupFailure(f"unknown journal id {jid!r}")


def _task_seed(seed: int, *task: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=task).generate_state(1, np.uint64)[0])


# ---------------------------------------------------------------- commands


def cmd_summarize(args) -> int:
    vectors = dataset_io.load_citations(args.input)
    rows = []
    for jid, counts in vectors.items():
        arith, log = empirical.empirical_moments(counts)
        derived = arith_to_log(arith)
        rows.append({
            "id": jid,
            "name": jid,
            "n_papers": len(counts),
            "m": arith.m,
            "v": arith.v,
            "mu": log.mu_ln,
            "sigma": log.sigma_ln,
            "mu_derived": derived.mu_ln,
            "sigma_derived": derived.sigma_ln,
        })
    dataset_io.write_results(rows, args.output, args.format)
    return EXIT_OK


def cmd_indicators(args) -> int:
    rows = []
    for j in _load_summary_nonempty(args.summary, args.moments):
        h_real, h_int = estimated.estimate_h_index(j)
        rows.append({
            "id": j.id,
            "name": j.name,
            "n_papers": j.n_papers,
            "jif": estimated.impact_factor(j),
            "h_real": h_real,
            "h_int": h_int,
            "log_source": j.log_source,
        })
    dataset_io.write_results(rows, args.output, args.format)
    return EXIT_OK


def cmd_compare(args) -> int:
    records = _load_summary_nonempty(args.summary, args.moments)
    t, r = _lookup(records, args.t), _lookup(records, args.r)
    kappa = estimated.min_representative_size(t, r, args.threshold)
    result = {
        "provenance": "estimated",
        "t": t.id,
        "r": r.id,
        "csi": estimated.csi(t.lognormal, r.lognormal),
        "k_t": args.kt,
        "k_r": args.kr,
        "group_csi": estimated.group_csi(t.lognormal, args.kt, r.lognormal, args.kr),
        "threshold": args.threshold,
        "kappa_t": kappa.kappa_t,
        "kappa_r": kappa.kappa_r,
        "kappa_status": kappa.status,
        "success_at_kappa": kappa.success_at_kappa,
    }
    dataset_io.write_results([result], args.output, args.format)
    return EXIT_OK


def cmd_rank(args) -> int:
    records = _load_summary_nonempty(args.summary, args.moments)
    table = estimated.average_rank(records)
    if abs(table.weighted_mean() - 0.5) > 1e-12:
        raise InvariantError(f"rank identity violated: weighted mean {table.weighted_mean()!r}")
    names = {j.id: j.name for j in records}
    rows = [
        {"position": pos, "id": jid, "name": names[jid], "n_papers": table.weights[jid], "r": value}
        for pos, (jid, value) in enumerate(table.ranked(), start=1)
    ]
    dataset_io.write_results(rows, args.output, args.format)
    return EXIT_OK


def cmd_validate(args) -> int:
    records = _load_summary_nonempty(args.summary)
    cfg = montecarlo.SimulationConfig(
        seed=args.seed,
        n_samples=args.samples,
        discretize=args.discretize,
        tolerance=args.tolerance,
        k_t=args.kt,
        k_r=args.kr,
        threshold=args.threshold,
    )
    report = montecarlo.validate_all(records, cfg)
    dataset_io.write_results(report, args.output, args.format)
    if not report.all_pass:
        print(f"validation failed: {len(report.failures())} of {len(report.entries)} entries "
              f"exceed tolerance {args.tolerance}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def _plot_points(args, vectors: dict, records: list):
    """(subject, empirical, estimated) triples for the requested figure."""
    est = [j.with_derived_log() for j in records]
    points = []
    if args.figure == "h":
        for j in est:
            points.append((j.id, empirical.empirical_h_index(vectors[j.id]), estimated.estimate_h_index(j)[0]))
    elif args.figure == "rank":
        emp = empirical.empirical_average_rank(vectors)
        form = estimated.average_rank(est)
        points = [(jid, emp[jid], form[jid]) for jid in form.values]
    else:
        for a in range(len(est)):
            for b in range(a + 1, len(est)):
                t, r = est[a], est[b]
                vt, vr = vectors[t.id], vectors[r.id]
                if args.figure == "csi":
                    points.append((f"{t.id}|{r.id}", empirical.empirical_csi(vt, vr),
                                   estimated.csi(t.log, r.log)))
                elif args.figure == "group-csi":
                    x = empirical.empirical_group_csi(vt, args.kt, vr, args.kr, args.samples,
                                                      _task_seed(args.seed, a, b))
                    points.append((f"{t.id}|{r.id}", x, estimated.group_csi(t.log, args.kt, r.log, args.kr)))
                else:
                    if t.log.implied_mean < r.log.implied_mean:
                        t, r, vt, vr = r, t, vr, vt
                    form = estimated.min_representative_size(t, r, args.threshold)
                    if not form.reachable:
                        continue
                    emp = empirical.empirical_kappa(vt, vr, args.threshold, args.samples,
                                                    _task_seed(args.seed, a, b))
                    if not emp.reachable:
                        continue
                    points.append((f"{t.id}|{r.id}:t", emp.kappa_t, form.kappa_t))
                    points.append((f"{t.id}|{r.id}:r", emp.kappa_r, form.kappa_r))
    return points


def cmd_plot_data(args) -> int:
    if args.citations:
        vectors = dataset_io.load_citations(args.citations)
        if not vectors:
            raise InvariantError(f"{args.citations}: no citation data")
        records = _records_from_citations(vectors)
        source = "citations"
    else:
        records = _load_summary_nonempty(args.summary)
        vectors = {
            j.id: montecarlo.sample_lognormal(arith_to_log(j.arith), j.n_papers, args.seed,
                                              args.discretize, task=(i,))
            for i, j in enumerate(records)
        }
        source = "synthetic"
    points = _plot_points(args, vectors, records)
    values = [v for _, x, y in points for v in (x, y) if v is not None and math.isfinite(v)]
    extent = [min(values), max(values)] if values else [0.0, 0.0]
    out = {
        "figure": args.figure,
        "source": source,
        "x": "empirical",
        "y": "estimated",
        "identity": extent,
        "rows": [{"subject": s, "empirical": x, "estimated": y} for s, x, y in points],
    }
    dataset_io.write_results(out, args.output, args.format)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _probability(text):
    value = float(text)
    if not 0.5 < value < 1:
        raise argparse.ArgumentTypeError(f"must lie in (0.5, 1), got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="citecore",
        description="Journal citation indicators from mean and standard deviation "
                    "under a log-normal model of (citations + 1).",
        epilog="exit status: 0 ok, 2 usage, 3 malformed input, 4 invariant violation, "
               "5 validation failure, 6 unknown id or degenerate comparison",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def moments(p):
        p.add_argument("--moments", choices=("auto", "derived"), default="auto",
                       help="log moments to estimate from: 'auto' uses the mu/sigma columns "
                            "when present, 'derived' always converts from m and v (default auto)")

    def common(p, default_format="csv"):
        p.add_argument("--format", choices=("csv", "json"), default=default_format,
                       help=f"output format (default {default_format})")
        p.add_argument("-o", "--output", default="-", help="output file (default: stdout)")

    p = sub.add_parser("summarize", help="per-journal moments from a citations file")
    p.add_argument("--input", required=True, help="citations csv: journal_id,paper_id,citations")
    common(p)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("indicators", help="impact factor and estimated h-index per journal")
    p.add_argument("--summary", required=True, help="summary csv: id,name,n_papers,m,v[,mu,sigma]")
    common(p)
    moments(p)
    p.set_defaults(func=cmd_indicators)

    p = sub.add_parser("compare", help="CSI, group CSI and minimum representative sizes for a pair")
    p.add_argument("--summary", required=True, help="summary csv")
    p.add_argument("--t", required=True, help="id of journal t")
    p.add_argument("--r", required=True, help="id of journal r")
    p.add_argument("--kt", type=_positive_int, default=10, help="group size for t (default 10)")
    p.add_argument("--kr", type=_positive_int, default=10, help="group size for r (default 10)")
    p.add_argument("--threshold", type=_probability, default=0.9,
                   help="success threshold for kappa (default 0.9)")
    common(p, "json")
    moments(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("rank", help="estimated average percentile rank of every journal")
    p.add_argument("--summary", required=True, help="summary csv")
    common(p)
    moments(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("validate", help="check estimated indicators against Monte Carlo simulation")
    p.add_argument("--summary", required=True, help="summary csv")
    p.add_argument("--seed", type=int, required=True, help="master random seed")
    p.add_argument("--samples", type=_positive_int, default=100_000,
                   help="synthetic papers / trials per journal (default 100000)")
    p.add_argument("--tolerance", type=float, default=0.02,
                   help="max allowed |formula - simulation| (default 0.02)")
    p.add_argument("--kt", type=_positive_int, default=10, help="group size for t (default 10)")
    p.add_argument("--kr", type=_positive_int, default=10, help="group size for r (default 10)")
    p.add_argument("--threshold", type=_probability, default=0.9,
                   help="success threshold for kappa (default 0.9)")
    p.add_argument("--discretize", action="store_true",
                   help="round synthetic citations to integers")
    common(p, "json")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("plot-data", help="empirical-vs-estimated scatter data for one indicator")
    p.add_argument("--figure", required=True, choices=FIGURES, help="indicator to plot")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--citations", help="citations csv (empirical axis from raw data)")
    src.add_argument("--summary", help="summary csv (empirical axis from synthetic journals of N papers)")
    p.add_argument("--seed", type=int, required=True, help="master random seed")
    p.add_argument("--samples", type=_positive_int, default=10_000,
                   help="resampling trials for group-csi and kappa (default 10000)")
    p.add_argument("--kt", type=_positive_int, default=10, help="group size for t (default 10)")
    p.add_argument("--kr", type=_positive_int, default=10, help="group size for r (default 10)")
    p.add_argument("--threshold", type=_probability, default=0.9,
                   help="success threshold for kappa (default 0.9)")
    p.add_argument("--discretize", action="store_true",
                   help="round synthetic citations to integers (summary input only)")
    common(p)
    p.set_defaults(func=cmd_plot_data)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "tolerance", 1.0) < 0:
        parser.error("--tolerance must be >= 0")
    try:
        return args.func(args)
    except ParseError as exc:
        code = EXIT_INVARIANT if isinstance(exc, InvariantError) else EXIT_PARSE
        print(f"error: {exc}", file=sys.stderr)
        return code
    except (LookupFailure, DegenerateComparisonError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LOOKUP
    except CitecoreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
