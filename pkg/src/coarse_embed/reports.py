"""Deterministic CSV and JSON emission.

Floating values print with 12 significant digits, rationals as "num/den",
column order is fixed by the caller's row dicts.  Identical inputs produce
identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import os
from fractions import Fraction


def format_value(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.12g}"
    return v


def rows_to_csv_text(rows, columns=None):
    if columns is None:
        columns = []
        for row in rows:
            for key in row:
                if key not in columns:
                    columns.append(key)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(c, "")) for c in columns])
    return buf.getvalue()


def jsonable(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, float):
        return float(f"{v:.12g}")
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    return v


def write_report(path_base, rows, meta=None, columns=None):
    """Write path_base.csv and path_base.json side by side; returns paths."""
    csv_path = path_base + ".csv"
    json_path = path_base + ".json"
    text = rows_to_csv_text(rows, columns=columns)
    os.makedirs(os.path.dirname(os.path.abspath(csv_path)), exist_ok=True)
    with open(csv_path, "w") as fh:
        fh.write(text)
    doc = {"rows": [jsonable(r) for r in rows]}
    if meta:
        doc["meta"] = jsonable(meta)
    with open(json_path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=False)
        fh.write("\n")
    return csv_path, json_path


def parse_value(text):
    if isinstance(text, str) and "/" in text:
        num, den = text.split("/")
        try:
            return Fraction(int(num), int(den))
        except ValueError:
            return text
    try:
        return int(text)
    except (TypeError, ValueError):
        pass
    try:
        return float(text)
    except (TypeError, ValueError):
        return text


def read_csv_rows(path):
    with open(path) as fh:
        reader = csv.reader(fh)
        columns = next(reader)
        return [dict(zip(columns, (parse_value(v) for v in row))) for row in reader]
