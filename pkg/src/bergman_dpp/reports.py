"""Deterministic file writers: canonical JSON, RFC-4180 CSV, minimal SVG.

Everything is written atomically (temp file + rename in the same
directory) and contains no wall-clock data, so identical inputs produce
byte-identical outputs.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _coerce(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def json_text(obj) -> str:
    return (
        json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, default=_coerce)
        + "\n"
    )


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def svg_scatter(
    points: np.ndarray,
    outline_radius: float = 1.0,
    size: int = 480,
    title: str = "",
) -> str:
    """SVG 1.1 scatter of complex points with a circular outline and axes."""
    half = size / 2.0
    scale = half * 0.92 / max(outline_radius, 1e-9)

    def sx(x: float) -> str:
        return f"{half + scale * x:.2f}"

    def sy(y: float) -> str:
        return f"{half - scale * y:.2f}"

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<line x1="0" y1="{half:.2f}" x2="{size}" y2="{half:.2f}" '
        'stroke="#cccccc" stroke-width="1"/>',
        f'<line x1="{half:.2f}" y1="0" x2="{half:.2f}" y2="{size}" '
        'stroke="#cccccc" stroke-width="1"/>',
        f'<circle cx="{half:.2f}" cy="{half:.2f}" r="{scale * outline_radius:.2f}" '
        'fill="none" stroke="#333333" stroke-width="1"/>',
    ]
    if title:
        parts.append(
            f'<text x="8" y="16" font-family="monospace" font-size="12">{title}</text>'
        )
    for z in np.asarray(points, dtype=complex).ravel():
        parts.append(
            f'<circle cx="{sx(z.real)}" cy="{sy(z.imag)}" r="2.2" fill="#1f4e98"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
