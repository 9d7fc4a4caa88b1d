"""Machine-readable reports: JSON with a fixed schema and per-record-type CSV."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import platform
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

from . import __version__

SIG_DIGITS = 12

# column order of every CSV record type
RECORD_FIELDS: dict[str, list[str]] = {
    "catalog": ["n", "rank", "label", "k", "l", "h_compatible", "p_star", "dim_n_h", "dim_u",
                "dual_label"],
    "convergence": ["n", "rank", "label", "k", "l", "profile", "verdict", "predicted", "consistent",
                    "value", "error_estimate", "growth_exponent", "fit_r2"],
    "schedule": ["label", "profile", "radius", "truncated_value"],
    "hc_point": ["n", "k", "profile", "s", "value", "error_estimate", "weighted"],
    "hc_decay": ["n", "k", "profile", "N", "side", "bounded", "argmax_s"],
    "hc_limit": ["n", "k", "profile", "s", "value", "limit_rhs", "limit_error", "rel_diff",
                 "gaps_decreasing", "matches"],
    "verify": ["family", "passed", "checks", "detail"],
}

REPORT_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["command", "parameters", "records", "metadata"],
    "additionalProperties": False,
    "properties": {
        "command": {"enum": ["catalog", "convergence", "hc", "verify"]},
        "parameters": {"type": "object"},
        "records": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["type"],
                "properties": {"type": {"enum": sorted(RECORD_FIELDS)}},
            },
        },
        "metadata": {
            "type": "object",
            "required": ["seed", "tolerances", "timestamp", "versions"],
            "properties": {
                "seed": {"type": ["integer", "null"]},
                "tolerances": {"type": "object"},
                "timestamp": {"type": ["string", "null"]},
                "versions": {
                    "type": "object",
                    "required": ["cuspidal", "python", "numpy", "scipy", "mpmath"],
                    "additionalProperties": {"type": "string"},
                },
            },
        },
    },
}


def _record_schemas():
    rules = []
    for kind, cols in RECORD_FIELDS.items():
        rules.append({
            "if": {"properties": {"type": {"const": kind}}},
            "then": {"required": cols, "properties": {c: {} for c in cols},
                     "additionalProperties": False,
                     "patternProperties": {"^type$": {}}},
        })
    return rules


REPORT_SCHEMA["properties"]["records"]["items"]["allOf"] = _record_schemas()


def fmt_real(x: float):
    """12 significant digits; non-finite values become strings."""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.{SIG_DIGITS}g}")


def normalise(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, float):
        return fmt_real(obj)
    if hasattr(obj, "item") and not isinstance(obj, (list, tuple, dict)):
        return normalise(obj.item())
    if isinstance(obj, dict):
        return {str(k): normalise(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalise(v) for v in obj]
    if hasattr(obj, "value"):
        return obj.value
    return str(obj)


def timestamp() -> Optional[str]:
    """``SOURCE_DATE_EPOCH`` as ISO-8601 when set, otherwise null for reproducibility."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is None:
        return None
    return datetime.fromtimestamp(int(epoch), tz=timezone.utc).isoformat()


def versions() -> dict[str, str]:
    import mpmath
    import numpy
    import scipy
    return {"cuspidal": __version__, "python": platform.python_version(),
            "numpy": numpy.__version__, "scipy": scipy.__version__, "mpmath": mpmath.__version__}


@dataclass
class Report:
    command: str
    parameters: dict
    records: list[dict] = field(default_factory=list)
    seed: Optional[int] = None
    tolerances: dict = field(default_factory=dict)

    def add(self, kind: str, **row):
        cols = RECORD_FIELDS[kind]
        missing = set(cols) - set(row)
        extra = set(row) - set(cols)
        if missing or extra:
            raise KeyError(f"{kind} record mismatch: missing {sorted(missing)}, extra {sorted(extra)}")
        self.records.append({"type": kind, **{c: row[c] for c in cols}})

    def to_dict(self) -> dict:
        return normalise({
            "command": self.command,
            "parameters": self.parameters,
            "records": self.records,
            "metadata": {"seed": self.seed, "tolerances": self.tolerances,
                         "timestamp": timestamp(), "versions": versions()},
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    def csv_tables(self) -> dict[str, str]:
        tables = {}
        for kind, cols in RECORD_FIELDS.items():
            rows = [r for r in self.to_dict()["records"] if r["type"] == kind]
            if not rows:
                continue
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(cols)
            for r in rows:
                w.writerow(["" if r[c] is None else r[c] for c in cols])
            tables[kind] = buf.getvalue()
        return tables

    def write(self, fmt: str, out_dir: Optional[str], stream) -> list[Path]:
        written = []
        if fmt == "json":
            text = self.to_json()
            if out_dir:
                p = Path(out_dir) / f"{self.command}.json"
                p.parent.mkdir(parents=True, exist_ok=True)
                p.write_text(text)
                written.append(p)
            else:
                stream.write(text)
            return written
        tables = self.csv_tables()
        for kind, text in tables.items():
            if out_dir:
                p = Path(out_dir) / f"{self.command}_{kind}.csv"
                p.parent.mkdir(parents=True, exist_ok=True)
                p.write_text(text)
                written.append(p)
            else:
                stream.write(f"# {kind}\n{text}")
        return written


def validate(doc: dict):
    import jsonschema
    jsonschema.validate(doc, REPORT_SCHEMA)
