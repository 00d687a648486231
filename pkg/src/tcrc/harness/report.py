"""CSV/JSON report writing and reading."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from .experiment import ResultRecord, SummaryRow

__all__ = ["RECORD_HEADER", "SUMMARY_HEADER", "emit_report", "read_records", "format_number"]

RECORD_HEADER = ("variant", "activation", "tau", "trajectory", "seed", "mse", "wall_clock_s", "divergent")
SUMMARY_HEADER = ("variant", "activation", "tau", "n_runs", "mean_mse", "std_mse",
                  "mean_wall_clock_s", "divergent_count", "failed_count")
_TIMING_FIELDS = ("wall_clock_s", "mean_wall_clock_s", "timestamp")


def format_number(x) -> str:
    """17 significant digits: exact round trip for binary64."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return format(x, ".17g")
    return "" if x is None else str(x)


def _rows(items, redact_timing):
    out = []
    for it in items:
        d = it.to_dict()
        if redact_timing:
            for k in _TIMING_FIELDS:
                if k in d:
                    d[k] = None
        out.append(d)
    return out


def _json_value(v):
    if isinstance(v, float):
        if not math.isfinite(v):
            return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
        return float(format(v, ".17g"))
    return v


def emit_report(items, fmt: str = "csv", path=None, redact_timing: bool = False) -> str:
    """Serialize records or summary rows; write to ``path`` if given.

    ``redact_timing`` blanks wall-clock and timestamp fields so that reports
    of deterministic runs compare byte for byte.
    """
    items = list(items)
    is_summary = bool(items) and isinstance(items[0], SummaryRow)
    header = SUMMARY_HEADER if is_summary else RECORD_HEADER
    rows = _rows(items, redact_timing)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for d in rows:
            writer.writerow([format_number(d[k]) for k in header])
        text = buf.getvalue()
    elif fmt == "json":
        text = json.dumps([{k: _json_value(v) for k, v in d.items()} for d in rows], indent=1) + "\n"
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is not None:
        path = Path(path)
        try:
            path.write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write report {path}: {exc}") from exc
    return text


def _parse_seed(s):
    try:
        return int(s)
    except (TypeError, ValueError):
        return s


def _parse_float(v):
    if v is None or v == "":
        return math.nan
    if v in ("inf", "-inf"):
        return float(v)
    return float(v)


def read_records(path, fmt: str | None = None) -> list:
    """Read records written by :func:`emit_report`."""
    path = Path(path)
    fmt = fmt or ("json" if path.suffix.lower() == ".json" else "csv")
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read report {path}: {exc}") from exc
    records = []
    if fmt == "json":
        for d in json.loads(text):
            d = dict(d)
            d["mse"] = _parse_float(d.get("mse"))
            d["wall_clock_s"] = _parse_float(d.get("wall_clock_s"))
            d["seed"] = _parse_seed(d.get("seed"))
            d.setdefault("config_hash", "")
            records.append(ResultRecord(**d))
        return records
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != RECORD_HEADER:
        raise ValueError(f"{path} does not have the record header {','.join(RECORD_HEADER)}")
    for row in reader:
        tau = float(row["tau"])
        records.append(ResultRecord(
            config_hash="", variant=row["variant"], activation=row["activation"],
            tau=int(tau) if tau.is_integer() else tau, trajectory=int(row["trajectory"]),
            seed=_parse_seed(row["seed"]), mse=_parse_float(row["mse"]),
            wall_clock_s=_parse_float(row["wall_clock_s"]), divergent=row["divergent"] == "true",
        ))
    return records
