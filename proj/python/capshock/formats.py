"""Readers for the files written by the capshock library and CLI.

Tables start with "# capshock <kind> v<N>", then "# key=value" metadata
lines, a "# col col ..." line and whitespace-separated numeric rows.
Record files are two JSON lines: a header and the record itself.
Only FORMAT_VERSION is accepted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1

TABLE_KINDS = {
    "profile": ("x", "v_hat", "v_hat_x", "v_hat_xx"),
    "phase_portrait": ("v_hat", "v_hat_x", "phi"),
    "contour": ("s", "re_lambda", "im_lambda", "re_D", "im_D", "steps", "rejections"),
    "real_scan": ("lambda", "re_D", "im_D"),
}

SUMMARY_COLUMNS = ("v_plus", "d", "gamma", "classification", "winding", "min_abs_D", "C",
                   "real_crossing", "pass", "failure")


class FormatError(ValueError):
    pass


@dataclass
class Table:
    kind: str
    version: int
    meta: dict[str, str] = field(default_factory=dict)
    columns: tuple[str, ...] = ()
    data: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.data[:, self.columns.index(name)]
        except ValueError:
            raise KeyError(f"{self.kind} table has no column {name!r}") from None


def _check_header(line: str, path: Path) -> tuple[str, int]:
    parts = line.split()
    if len(parts) != 4 or parts[0] != "#" or parts[1] != "capshock" or not parts[3].startswith("v"):
        raise FormatError(f"{path}: not a capshock file")
    try:
        version = int(parts[3][1:])
    except ValueError:
        raise FormatError(f"{path}: bad version tag {parts[3]!r}") from None
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported {parts[2]} version {version}")
    return parts[2], version


def read_table(path, kind: str) -> Table:
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise FormatError(f"{path}: empty file")
    found, version = _check_header(lines[0], path)
    if found != kind:
        raise FormatError(f"{path}: expected {kind}, found {found}")
    table = Table(kind, version)
    rows = []
    for line in lines[1:]:
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, value = body.split("=", 1)
                table.meta[key] = value
            else:
                table.columns = tuple(body.split())
            continue
        values = [float(tok) for tok in line.split()]
        if len(values) != len(table.columns):
            raise FormatError(f"{path}: row {len(rows) + 1} has {len(values)} values "
                              f"for {len(table.columns)} columns")
        rows.append(values)
    expected = TABLE_KINDS.get(kind)
    if expected is not None and table.columns != expected:
        raise FormatError(f"{path}: columns {table.columns} differ from {expected}")
    table.data = np.array(rows, dtype=float).reshape(len(rows), len(table.columns))
    return table


def parse_record(text: str) -> dict:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) != 2:
        raise FormatError("record must have a header line and a body line")
    header = json.loads(lines[0])
    if header.get("format") != "capshock-record" or header.get("version") != FORMAT_VERSION:
        raise FormatError(f"unsupported record header: {lines[0]}")
    return json.loads(lines[1])


def read_record(path) -> dict:
    return parse_record(Path(path).read_text())


def read_summary(path) -> list[dict]:
    path = Path(path)
    lines = path.read_text().splitlines()
    kind, _ = _check_header(lines[0], path)
    if kind != "summary":
        raise FormatError(f"{path}: expected summary, found {kind}")
    columns = tuple(lines[1].split("\t"))
    if columns != SUMMARY_COLUMNS:
        raise FormatError(f"{path}: unexpected summary columns {columns}")
    return [dict(zip(columns, line.split("\t"))) for line in lines[2:] if line]
