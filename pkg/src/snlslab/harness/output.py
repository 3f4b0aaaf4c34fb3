"""CSV tables with a ``#``-prefixed manifest header."""

from __future__ import annotations

import csv
import io
import json
import math
import platform
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy

from .. import __version__

TIMESTAMP_PREFIX = "# timestamp:"


@dataclass
class ExperimentResult:
    name: str
    rows: list[dict]
    passed: bool
    summary: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"


def versions() -> dict:
    return {
        "snlslab": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _json_default(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    return str(v)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)) and not math.isfinite(float(obj)):
        return format_value(obj)
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def render_csv(result: ExperimentResult, manifest: dict, timestamp: str | None = None) -> str:
    """Header block (experiment, manifest JSON, timestamp, verdict, summary), then rows."""
    timestamp = timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds")
    buf = io.StringIO()
    buf.write(f"# experiment: {result.name}\n")
    meta = {"config": manifest, "versions": versions()}
    buf.write("# manifest: " + json.dumps(_clean(meta), sort_keys=True, default=_json_default) + "\n")
    buf.write(f"{TIMESTAMP_PREFIX} {timestamp}\n")
    buf.write(f"# verdict: {result.verdict}\n")
    buf.write("# summary: " + json.dumps(_clean(result.summary), sort_keys=True, default=_json_default) + "\n")
    columns: list[str] = []
    for row in result.rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in result.rows:
        writer.writerow([format_value(row.get(c)) for c in columns])
    return buf.getvalue()


def write_result(result: ExperimentResult, manifest: dict, out_dir: str | Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{result.name}.csv"
    path.write_text(render_csv(result, manifest))
    return path


def strip_timestamp(text: str) -> str:
    return "".join(line for line in text.splitlines(keepends=True) if not line.startswith(TIMESTAMP_PREFIX))


def read_table(path: str | Path) -> tuple[dict, list[dict]]:
    """Parse a written table back into (header fields, rows as strings)."""
    header, body = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            header[key] = value
        else:
            body.append(line)
    rows = list(csv.DictReader(body))
    for key in ("manifest", "summary"):
        if key in header:
            header[key] = json.loads(header[key])
    return header, rows
