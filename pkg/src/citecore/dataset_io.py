"""Reading citation and summary tables, writing results.

File formats (UTF-8, comma separated, one header row):

citations
    ``journal_id,paper_id,citations`` with nonnegative integer citations and
    unique (journal_id, paper_id) pairs.
summary
    ``id,name,n_papers,m,v,mu,sigma``. ``mu`` and ``sigma`` may be blank or
    absent; they are then derived from (m, v) and the record is flagged
    ``derived``. Extra columns are ignored.
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys
import warnings
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from citecore.errors import (
    CitecoreError,
    DuplicateKeyError,
    NegativeCitationError,
    ParseError,
    RecordError,
    SchemaError,
)
from citecore.estimated import JournalRecord, RankTable, _id_key
from citecore.lognormal import ArithMoments, LogMoments

CITATION_COLUMNS = ("journal_id", "paper_id", "citations")
SUMMARY_COLUMNS = ("id", "name", "n_papers", "m", "v", "mu", "sigma")
SUMMARY_REQUIRED = ("id", "name", "n_papers", "m", "v")
FIXTURE = "table1.csv"


def _read_rows(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8-sig")
    except OSError as exc:
        raise ParseError(path, 0, None, f"cannot read file: {exc.strerror or exc}") from exc
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError(path, 1, None, "missing header row") from None
    header = [h.strip() for h in header]
    rows = []
    for row in reader:
        if not row or all(not cell.strip() for cell in row):
            continue
        rows.append((reader.line_num, [cell.strip() for cell in row]))
    return path, header, rows


def load_citations(path) -> dict:
    """Citation vectors per journal id, ordered by id.

    Raises :class:`ParseError` subclasses naming the offending line.
    """
    path, header, rows = _read_rows(path)
    if tuple(header) != CITATION_COLUMNS:
        raise SchemaError(path, 1, None, f"expected header {','.join(CITATION_COLUMNS)}, got {','.join(header)}")
    if not rows:
        warnings.warn(f"{path}: no citation rows", stacklevel=2)
        return {}
    seen = {}
    grouped: dict = {}
    for line, row in rows:
        if len(row) != 3:
            raise ParseError(path, line, None, f"expected 3 fields, got {len(row)}")
        jid, pid, raw = row
        if not jid:
            raise ParseError(path, line, "journal_id", "empty journal_id")
        if not pid:
            raise ParseError(path, line, "paper_id", "empty paper_id")
        try:
            c = int(raw)
        except ValueError:
            raise ParseError(path, line, "citations", f"not an integer: {raw!r}") from None
        if c < 0:
            raise NegativeCitationError(path, line, "citations", f"negative citation count {c}")
        key = (jid, pid)
        if key in seen:
            raise DuplicateKeyError(path, line, "paper_id",
                                    f"duplicate paper {pid!r} in journal {jid!r} (first on line {seen[key]})")
        seen[key] = line
        grouped.setdefault(jid, []).append(c)
    return {jid: np.asarray(grouped[jid], dtype=np.int64) for jid in sorted(grouped, key=_id_key)}


def _parse_float(path, line, column, raw) -> float:
    try:
        x = float(raw)
    except ValueError:
        raise ParseError(path, line, column, f"not a number: {raw!r}") from None
    if not math.isfinite(x):
        raise ParseError(path, line, column, f"not a finite number: {raw!r}")
    return x


def load_summary(path=None) -> list:
    """Journal records from a summary file; ``None`` loads the bundled Table 1 fixture."""
    if path is None:
        with resources.as_file(resources.files("citecore") / "data" / FIXTURE) as p:
            return load_summary(p)
    path, header, rows = _read_rows(path)
    missing = [c for c in SUMMARY_REQUIRED if c not in header]
    if missing:
        raise SchemaError(path, 1, None, f"missing column(s) {', '.join(missing)}")
    if ("mu" in header) != ("sigma" in header):
        raise SchemaError(path, 1, None, "columns mu and sigma must appear together")
    col = {name: header.index(name) for name in SUMMARY_COLUMNS if name in header}
    if not rows:
        warnings.warn(f"{path}: no summary rows", stacklevel=2)
    records, ids = [], {}
    for line, row in rows:
        if len(row) != len(header):
            raise ParseError(path, line, None, f"expected {len(header)} fields, got {len(row)}")
        get = {name: row[i] for name, i in col.items()}
        jid = get["id"]
        if not jid:
            raise ParseError(path, line, "id", "empty id")
        if jid in ids:
            raise DuplicateKeyError(path, line, "id", f"duplicate id {jid!r} (first on line {ids[jid]})")
        ids[jid] = line
        try:
            n = int(get["n_papers"])
        except ValueError:
            raise ParseError(path, line, "n_papers", f"not an integer: {get['n_papers']!r}") from None
        m = _parse_float(path, line, "m", get["m"])
        v = _parse_float(path, line, "v", get["v"])
        mu_raw, sg_raw = get.get("mu", ""), get.get("sigma", "")
        if bool(mu_raw) != bool(sg_raw):
            raise ParseError(path, line, "mu" if not mu_raw else "sigma", "mu and sigma must both be given or both blank")
        try:
            arith = ArithMoments(m, v)
            if mu_raw:
                log = LogMoments(_parse_float(path, line, "mu", mu_raw),
                                 _parse_float(path, line, "sigma", sg_raw))
                rec = JournalRecord(jid, get["name"], n, arith, log, "measured")
            else:
                rec = JournalRecord(jid, get["name"], n, arith).with_derived_log()
        except ParseError:
            raise
        except CitecoreError as exc:
            raise RecordError(path, line, None, str(exc)) from None
        records.append(rec)
    return records


def load_table1() -> list:
    """The 30 general-medicine journals shipped with the package."""
    return load_summary(None)


# ---------------------------------------------------------------- writing


def _round_sig(x: float, digits: int):
    if not math.isfinite(x):
        return None
    return float(f"{x:.{digits}g}")


def _cell(x, digits: int) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return ""
        return f"{x:.{digits}g}"
    return str(x)


def _jsonable(x, digits: int):
    if isinstance(x, dict):
        return {str(k): _jsonable(v, digits) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v, digits) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return _round_sig(float(x), digits)
    return x


def summary_rows(records) -> list:
    rows = []
    for j in records:
        log = j.log
        rows.append({
            "id": j.id,
            "name": j.name,
            "n_papers": j.n_papers,
            "m": j.arith.m,
            "v": j.arith.v,
            "mu": None if log is None else log.mu_ln,
            "sigma": None if log is None else log.sigma_ln,
            "log_source": j.log_source or "",
        })
    return rows


def _tabulate(results):
    """(header lines, rows) for csv, or (None, object) when only json makes sense."""
    from citecore.montecarlo import ValidationReport

    if isinstance(results, RankTable):
        rows = [{"id": k, "n_papers": results.weights.get(k), "r": results.values[k]}
                for k in sorted(results.values, key=_id_key)]
        return [], rows
    if isinstance(results, ValidationReport):
        d = results.to_dict()
        meta = [f"generator: {json.dumps(d['generator'], sort_keys=True)}",
                f"config: {json.dumps(d['config'], sort_keys=True)}"]
        return meta, d["entries"]
    if isinstance(results, list) and results and isinstance(results[0], JournalRecord):
        return [], summary_rows(results)
    if isinstance(results, dict):
        meta = [f"{k}: {json.dumps(v, sort_keys=True)}" for k, v in results.items() if k != "rows"]
        return meta, results.get("rows", [])
    return [], list(results)


def _json_object(results):
    from citecore.montecarlo import ValidationReport

    if isinstance(results, ValidationReport):
        return results.to_dict()
    if isinstance(results, RankTable):
        return {"rows": _tabulate(results)[1]}
    if isinstance(results, list) and results and isinstance(results[0], JournalRecord):
        return {"rows": summary_rows(results)}
    if isinstance(results, dict):
        return results
    return {"rows": list(results)}


def format_results(results, format: str = "csv", digits: int = 6) -> str:
    """Serialize ``results`` to text. Output is a pure function of the input."""
    if format == "json":
        return json.dumps(_jsonable(_json_object(results), digits), indent=2, ensure_ascii=False) + "\n"
    if format != "csv":
        raise ValueError(f"unknown format {format!r}; expected csv or json")
    meta, rows = _tabulate(results)
    buf = io.StringIO()
    for line in meta:
        buf.write(f"# {line}\n")
    if rows:
        columns = list(rows[0].keys())
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(c), digits) for c in columns])
    return buf.getvalue()


def write_results(results, path, format: str = "csv", digits: int = 6) -> None:
    """Write ``results`` as csv or json to ``path`` (``"-"`` for stdout).

    Field order follows the producing code, json keys keep insertion order,
    and floats carry ``digits`` significant digits, so equal inputs always
    give byte-identical files.
    """
    text = format_results(results, format, digits)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write results to {path}: {exc.strerror}") from exc
