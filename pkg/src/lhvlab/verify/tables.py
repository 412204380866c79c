"""Threshold tables as CSV rows."""
from __future__ import annotations

import csv
import io

from ..states import thresholds

CSV_COLUMNS = ("family", "d", "p_sep", "p_pm", "p_povm")


def _fmt(x) -> str:
    return "" if x is None else f"{float(x):.10g}"


def threshold_rows(family: str, d_max: int, d_min: int = 2) -> list[dict]:
    rows = []
    for d in range(d_min, d_max + 1):
        t = thresholds(family, d)
        row = {"family": family, "d": d, "p_sep": _fmt(t.p_sep), "p_pm": _fmt(t.p_pm), "p_povm": _fmt(t.p_povm)}
        if t.p_sep_interval is not None:
            row["p_sep"] = f"[{_fmt(t.p_sep_interval[0])};{_fmt(t.p_sep_interval[1])}]"
        rows.append(row)
    return rows


def thresholds_csv(family: str, d_max: int, d_min: int = 2) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(threshold_rows(family, d_max, d_min))
    return buf.getvalue()


def monotonicity_flags(family: str, d_max: int) -> dict:
    """Whether each column is strictly increasing or decreasing over ``d = 2..d_max``."""
    tabs = [thresholds(family, d) for d in range(2, d_max + 1)]
    out = {}
    for key in ("p_sep", "p_pm", "p_povm"):
        vals = [getattr(t, key) for t in tabs]
        if any(v is None for v in vals):
            continue
        pairs = list(zip(vals, vals[1:]))
        out[key] = "increasing" if all(a < b for a, b in pairs) else (
            "decreasing" if all(a > b for a, b in pairs) else "mixed")
    return out
