"""CSV / JSON / SVG writers with deterministic formatting."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

PALETTE = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"]


def fmt(v) -> str:
    """Shortest round-trip float text (never more than 17 significant digits)."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def jsonable(obj):
    """Plain JSON types; non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps_json(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=False, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps_json(obj), encoding="utf-8", newline="\n")
    return path


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.write_text(csv_text(header, rows), encoding="utf-8", newline="\n")
    return path


def write_curve_csv(path, points, times=None) -> Path:
    pts = np.asarray(points, dtype=float)
    if times is None:
        return write_csv(path, ["x", "y"], pts.tolist())
    return write_csv(path, ["t", "x", "y"], np.column_stack([times, pts]).tolist())


def read_curve_csv(path) -> np.ndarray:
    """x,y columns of a CSV with a header row (extra columns are ignored)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ValueError(f"{path}: no data rows")
    header = [h.strip() for h in rows[0]]
    try:
        ix, iy = header.index("x"), header.index("y")
    except ValueError:
        raise ValueError(f"{path}: header must contain x and y columns") from None
    try:
        pts = np.array([[float(r[ix]), float(r[iy])] for r in rows[1:] if r], dtype=float)
    except (IndexError, ValueError) as exc:
        raise ValueError(f"{path}: malformed row ({exc})") from None
    if not np.all(np.isfinite(pts)):
        raise ValueError(f"{path}: non-finite coordinates")
    return pts


def svg_text(curves, width: int = 640, height: int = 480, margin: int = 40, title: str = "") -> str:
    """Plain SVG 1.1 overlay. ``curves`` is a list of (label, points, closed)."""
    allpts = np.vstack([np.asarray(p, dtype=float) for _, p, _ in curves])
    xmin, ymin = allpts.min(axis=0)
    xmax, ymax = allpts.max(axis=0)
    span = max(xmax - xmin, ymax - ymin, 1e-12)
    sx = (width - 2 * margin) / max(xmax - xmin, 1e-12 * span)
    sy = (height - 2 * margin) / max(ymax - ymin, 1e-12 * span)
    s = min(sx, sy)

    def px(p):
        # flip y so the phase plane reads upward
        return margin + (p[:, 0] - xmin) * s, height - margin - (p[:, 1] - ymin) * s

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
    ]
    if title:
        out.append(f"<title>{_esc(title)}</title>")
    out.append(f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>')
    for k, (label, pts, closed) in enumerate(curves):
        X, Y = px(np.asarray(pts, dtype=float))
        d = "M " + " L ".join(f"{a:.3f},{b:.3f}" for a, b in zip(X, Y))
        if closed:
            d += " Z"
        color = PALETTE[k % len(PALETTE)]
        out.append(f'<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5">'
                   f"<title>{_esc(label)}</title></path>")
    for k, (label, _, _) in enumerate(curves):
        y = 16 + 16 * k
        color = PALETTE[k % len(PALETTE)]
        out.append(f'<line x1="8" y1="{y - 4}" x2="28" y2="{y - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="32" y="{y}" font-family="sans-serif" font-size="12">{_esc(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, curves, **kw) -> Path:
    path = Path(path)
    path.write_text(svg_text(curves, **kw), encoding="utf-8", newline="\n")
    return path


def _esc(s: str) -> str:
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
