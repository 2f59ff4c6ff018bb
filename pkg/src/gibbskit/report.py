"""Residual records and report rendering.

A report is a header line followed by one JSON object per record, sorted by
check id. Only the header carries a timestamp, so equal inputs give
byte-identical bodies.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

REPORT_SCHEMA_ID = "gibbskit.report/1"


@dataclass(frozen=True)
class Record:
    check: str
    property: str
    region: str
    boundary: str
    residual: float
    tolerance: float
    passed: bool

    @classmethod
    def at_most(cls, check: str, prop: str, region, boundary: str, residual: float,
                tolerance: float) -> Record:
        """Passes when ``residual <= tolerance``."""
        return cls(check, prop, str(region), boundary, float(residual), float(tolerance),
                   bool(residual <= tolerance))

    @classmethod
    def at_least(cls, check: str, prop: str, region, boundary: str, residual: float,
                 threshold: float) -> Record:
        """Negative control: passes when ``residual >= threshold``."""
        return cls(check, prop, str(region), boundary, float(residual), float(threshold),
                   bool(residual >= threshold))

    def as_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        for k in ("residual", "tolerance"):
            if not math.isfinite(d[k]):
                d[k] = repr(d[k])
        return d


def sort_records(records) -> list[Record]:
    return sorted(records, key=lambda r: (r.check, r.region, r.boundary, r.property))


def render_body(records) -> str:
    return "".join(json.dumps(r.as_dict(), sort_keys=True) + "\n" for r in sort_records(records))


def render_header(meta: dict) -> str:
    return json.dumps({"schema": REPORT_SCHEMA_ID, **meta}, sort_keys=True) + "\n"


def render_table(records) -> str:
    rows = sort_records(records)
    head = ("check", "property", "region", "boundary", "residual", "tolerance", "pass")
    body = [
        (r.check, r.property, r.region, r.boundary, f"{r.residual:.3e}", f"{r.tolerance:.1e}",
         "ok" if r.passed else "FAIL")
        for r in rows
    ]
    widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h) for i, h in enumerate(head)]
    line = lambda cells: "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    out = [line(head), line(tuple("-" * w for w in widths))]
    out.extend(line(b) for b in body)
    failed = sum(not r.passed for r in rows)
    out.append(f"{len(rows) - failed}/{len(rows)} checks passed")
    return "\n".join(out) + "\n"
