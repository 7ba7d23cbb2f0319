"""Structured experiment output with CSV and JSON serialization."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def _clean(value):
    """Convert numpy scalars/arrays to plain Python; tag non-finite floats."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_clean(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "divergent" if value > 0 else "-divergent"
        return value
    return value


@dataclass
class Report:
    """Outcome of one experiment.

    ``params`` echoes everything needed to rerun it, ``scalars`` holds
    headline numbers, ``rows`` holds per-probe or per-scale profiles, and
    ``fits`` holds regression diagnostics keyed by name.
    """

    name: str
    params: dict = field(default_factory=dict)
    scalars: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.scalars[key]

    def column(self, key) -> np.ndarray:
        """One row field as a float array; rows lacking it give nan."""
        return np.array([row.get(key, np.nan) for row in self.rows], dtype=float)

    def to_dict(self) -> dict:
        return _clean({
            "name": self.name,
            "params": self.params,
            "scalars": self.scalars,
            "rows": self.rows,
            "fits": self.fits,
            "flags": self.flags,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2,
                          ensure_ascii=False) + "\n"

    def columns(self) -> list:
        cols = []
        for row in self.rows:
            for key in row:
                if key not in cols:
                    cols.append(key)
        return cols

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = self.columns()
        writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: _format_cell(v) for k, v in _clean(row).items()})
        return buf.getvalue()

    def write(self, directory, stem: str | None = None) -> tuple[Path, Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        stem = stem or self.name
        jpath = directory / f"{stem}.json"
        cpath = directory / f"{stem}.csv"
        jpath.write_text(self.to_json(), encoding="utf-8")
        cpath.write_text(self.to_csv(), encoding="utf-8")
        return cpath, jpath


def _format_cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return " ".join(repr(x) if isinstance(x, float) else str(x) for x in v)
    return v


def linear_fit(x, y) -> dict:
    """Least-squares line with R^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2,
            "points": int(len(x))}
