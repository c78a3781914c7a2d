"""Parse and validate the lfht-lab sweep CSV schema.

The producer's contract: a header row naming exactly the columns below,
data rows, and trailing comment lines starting with '#'.  Anything else
aborts; silently plotting a malformed table would be worse than failing.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SCHEMA = [
    "class", "k", "beta", "d", "s", "eps", "test",
    "n", "m", "trials", "err1", "err2", "err_total", "ci95", "flag",
]


class SchemaError(ValueError):
    """The CSV does not conform to the sweep schema."""


@dataclass(frozen=True)
class SweepTable:
    class_tag: str
    eps: float
    test: str
    k: int | None
    n: np.ndarray
    m: np.ndarray
    err_total: np.ndarray
    ci95: np.ndarray
    flags: list

    @property
    def points(self) -> int:
        return int(self.n.size)


def load_sweep(path) -> SweepTable:
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    rows = [row for row in rows if not row[0].startswith("#")]
    if not rows:
        raise SchemaError(f"{path}: empty file")
    if rows[0] != SCHEMA:
        raise SchemaError(f"{path}: header does not match the sweep schema")
    data = rows[1:]
    if not data:
        raise SchemaError(f"{path}: no data rows")
    col = {name: i for i, name in enumerate(SCHEMA)}

    def column(name, cast):
        return [cast(row[col[name]]) for row in data]

    classes = set(column("class", str))
    tests = set(column("test", str))
    eps_values = set(column("eps", str))
    if len(classes) != 1 or len(tests) != 1 or len(eps_values) != 1:
        raise SchemaError(f"{path}: mixed class/test/eps rows in one table")
    k_raw = data[0][col["k"]]
    return SweepTable(
        class_tag=classes.pop(),
        eps=float(eps_values.pop()),
        test=tests.pop(),
        k=int(k_raw) if k_raw else None,
        n=np.array(column("n", int)),
        m=np.array(column("m", int)),
        err_total=np.array(column("err_total", float)),
        ci95=np.array(column("ci95", float)),
        flags=column("flag", str),
    )


def boundary_from_table(table: SweepTable, target: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-n smallest m with total error within target; open columns dropped."""
    ns = []
    ms = []
    for n in np.unique(table.n):
        mask = (table.n == n) & (table.err_total <= target)
        if np.any(mask):
            ns.append(int(n))
            ms.append(int(table.m[mask].min()))
    return np.array(ns), np.array(ms)
