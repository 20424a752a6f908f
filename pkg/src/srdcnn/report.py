"""Benchmark reports: published reference accuracies next to measured ones.

Report records have the shape
``{dataset, source: "published" | "measured", method, accuracy, citation}``.
"""

import json
import re
from functools import lru_cache
from importlib import resources

PUBLISHED_METHODS = ("MLP", "DTW-R1-1NN", "BOSS", "COTE", "SRDCNN")
COLUMNS = ("dataset", "MLP", "DTW-R1-1NN", "BOSS", "COTE",
           "SRDCNN-published", "SRDCNN-measured", "DTW-measured")
MISSING = "—"


@lru_cache(maxsize=None)
def published_table():
    text = resources.files("srdcnn").joinpath("published_results.json").read_text()
    return json.loads(text)


def canonical_name(name):
    """Map a user-supplied dataset name (any case, spaces, underscores) to its table key."""
    key = re.sub(r"[^a-z0-9]", "", name.lower())
    for row in published_table()["datasets"]:
        if re.sub(r"[^a-z0-9]", "", row["dataset"].lower()) == key:
            return row["dataset"]
    return name


def published_records(dataset=None):
    table = published_table()
    out = []
    for row in table["datasets"]:
        if dataset is not None and row["dataset"] != canonical_name(dataset):
            continue
        for method in PUBLISHED_METHODS:
            out.append({
                "dataset": row["dataset"],
                "source": "published",
                "method": method,
                "accuracy": row[method],
                "citation": table["methods"][method],
            })
    return out


def measured_record(dataset, method, accuracy, citation=""):
    return {"dataset": canonical_name(dataset), "source": "measured", "method": method,
            "accuracy": float(accuracy), "citation": citation}


def _rows(results):
    rows = {}
    for r in results:
        row = rows.setdefault(r["dataset"], {})
        if r["source"] == "published":
            col = "SRDCNN-published" if r["method"] == "SRDCNN" else r["method"]
        else:
            col = "SRDCNN-measured" if r["method"] == "SRDCNN" else "DTW-measured"
        row[col] = r["accuracy"]
    return rows


def best_counts(results):
    """Per published method, the number of datasets on which it scores highest.

    Ties credit every method sharing the top score.
    """
    counts = dict.fromkeys(PUBLISHED_METHODS, 0)
    for row in _rows(results).values():
        scores = {m: row.get("SRDCNN-published" if m == "SRDCNN" else m) for m in PUBLISHED_METHODS}
        scores = {m: s for m, s in scores.items() if s is not None}
        if not scores:
            continue
        top = max(scores.values())
        for m, s in scores.items():
            if s == top:
                counts[m] += 1
    return counts


def render_report(results):
    """Return ``(records, text)``: the JSON-ready records and an aligned table.

    The best published score in each row is marked with ``*``; missing
    values render as an em dash.
    """
    if not results:
        raise ValueError("no results to report")
    rows = _rows(results)
    published_cols = ("MLP", "DTW-R1-1NN", "BOSS", "COTE", "SRDCNN-published")
    table = [list(COLUMNS)]
    for dataset, row in rows.items():
        present = [row[c] for c in published_cols if c in row]
        top = max(present) if present else None
        cells = [dataset]
        for col in COLUMNS[1:]:
            value = row.get(col)
            if value is None:
                cells.append(MISSING)
            else:
                mark = "*" if col in published_cols and value == top else ""
                cells.append(f"{value:.4f}{mark}")
        table.append(cells)
    counts = best_counts(results)
    if any(counts.values()):
        table.append(["Total Count"] + [str(counts["SRDCNN" if c == "SRDCNN-published" else c])
                                        if c in published_cols else "" for c in COLUMNS[1:]])
    widths = [max(len(r[i]) for r in table) for i in range(len(COLUMNS))]
    lines = []
    for i, cells in enumerate(table):
        first = cells[0].ljust(widths[0])
        rest = [c.rjust(w) for c, w in zip(cells[1:], widths[1:])]
        lines.append("  ".join([first] + rest).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return list(results), "\n".join(lines)
