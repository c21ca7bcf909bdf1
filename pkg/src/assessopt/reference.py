"""Reference distributions mapping indicator values onto the four percentile classes.

Thresholds hold the empirical 50th/60th/80th percentiles of a world value
distribution, computed by the nearest-rank rule. A value strictly above the
80th percentile is class 1, down to class 4 at or below the median; ties at
a boundary fall into the lower (worse-numbered) class.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import MissingDistributionError, ParseError

JOURNAL_METRIC = "journal-metric"
CITATIONS = "citations"
INDICATORS = (JOURNAL_METRIC, CITATIONS)
DOC_SPLITS = ("any", "article", "review")

WORLDVALUE_COLUMNS = ["indicator", "category_group", "year", "doc_split", "value"]
THRESHOLD_COLUMNS = ["indicator", "category_group", "year", "doc_split", "p50", "p60", "p80", "n"]
MERGEMAP_COLUMNS = ["category", "category_group"]


@dataclass(frozen=True)
class DistributionKey:
    indicator: str
    category_group: str
    year: int
    doc_split: str = "any"

    def __str__(self) -> str:
        return f"({self.indicator}, {self.category_group}, {self.year}, {self.doc_split})"


@dataclass(frozen=True)
class ClassThresholds:
    p50: float
    p60: float
    p80: float
    n: int


def build_thresholds(values: Iterable[float]) -> ClassThresholds:
    """Empirical percentile thresholds by the nearest-rank rule.

    The q-th percentile is the value at rank ceil(q*n) in ascending order,
    so thresholds are always actual observed values.
    """
    data = sorted(values)
    n = len(data)
    if n == 0:
        raise ValueError("cannot build thresholds from an empty value list")
    if data[0] < 0:
        raise ValueError("indicator values must be non-negative")

    def nearest_rank(q: float) -> float:
        return float(data[math.ceil(q * n) - 1])

    return ClassThresholds(
        p50=nearest_rank(0.5), p60=nearest_rank(0.6), p80=nearest_rank(0.8), n=n
    )


def classify(value: float, thresholds: ClassThresholds) -> int:
    """Map an indicator value to a class 1-4 (smaller is better)."""
    if value > thresholds.p80:
        return 1
    if value > thresholds.p60:
        return 2
    if value > thresholds.p50:
        return 3
    return 4


@dataclass
class ReferenceLibrary:
    """Immutable-after-construction store of thresholds plus a category merge map."""

    thresholds: dict[DistributionKey, ClassThresholds] = field(default_factory=dict)
    merge_map: dict[str, str] = field(default_factory=dict)

    def resolve(self, category: str) -> str:
        return self.merge_map.get(category, category)

    def lookup(
        self, indicator: str, category: str, year: int, doc_split: str = "any"
    ) -> ClassThresholds:
        """Apply the merge map, then resolve the key to its thresholds."""
        key = DistributionKey(indicator, self.resolve(category), year, doc_split)
        try:
            return self.thresholds[key]
        except KeyError:
            raise MissingDistributionError(
                f"no reference distribution for {key}"
            ) from None


def _read_rows(path: Path, columns: list[str]) -> list[tuple[int, dict[str, str]]]:
    if not path.exists():
        raise ParseError("file not found", file=str(path))
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file, header row required", file=str(path)) from None
        if header != columns:
            raise ParseError(
                f"bad header {header!r}, expected {columns!r}", file=str(path), line=1
            )
        for row in reader:
            if not row:
                continue
            if len(row) != len(columns):
                raise ParseError(
                    f"expected {len(columns)} fields, got {len(row)}",
                    file=str(path), line=reader.line_num,
                )
            rows.append((reader.line_num, dict(zip(columns, row))))
    return rows


def _parse_key(row: dict[str, str], file: str, line: int) -> DistributionKey:
    if row["indicator"] not in INDICATORS:
        raise ParseError(f"unknown indicator {row['indicator']!r}", file=file, line=line)
    doc_split = row["doc_split"] or "any"
    if doc_split not in DOC_SPLITS:
        raise ParseError(f"unknown doc_split {doc_split!r}", file=file, line=line)
    try:
        year = int(row["year"])
    except ValueError:
        raise ParseError(f"year is not an integer: {row['year']!r}", file=file, line=line) from None
    return DistributionKey(row["indicator"], row["category_group"], year, doc_split)


def load_worldvalues(path: str | Path) -> dict[DistributionKey, ClassThresholds]:
    """Read raw world values (one per row) and compute thresholds per key."""
    path = Path(path)
    values: dict[DistributionKey, list[float]] = {}
    for line, row in _read_rows(path, WORLDVALUE_COLUMNS):
        key = _parse_key(row, str(path), line)
        try:
            value = float(row["value"])
        except ValueError:
            raise ParseError(
                f"value is not a number: {row['value']!r}", file=str(path), line=line
            ) from None
        if value < 0:
            raise ParseError(f"negative value {value}", file=str(path), line=line)
        values.setdefault(key, []).append(value)
    return {key: build_thresholds(vals) for key, vals in values.items()}


def load_thresholds(path: str | Path) -> dict[DistributionKey, ClassThresholds]:
    """Read precomputed thresholds; values are trusted but ordering is checked."""
    path = Path(path)
    thresholds: dict[DistributionKey, ClassThresholds] = {}
    for line, row in _read_rows(path, THRESHOLD_COLUMNS):
        key = _parse_key(row, str(path), line)
        if key in thresholds:
            raise ParseError(f"duplicate distribution key {key}", file=str(path), line=line)
        try:
            t = ClassThresholds(
                p50=float(row["p50"]), p60=float(row["p60"]),
                p80=float(row["p80"]), n=int(row["n"]),
            )
        except ValueError:
            raise ParseError("malformed threshold row", file=str(path), line=line) from None
        if not t.p50 <= t.p60 <= t.p80:
            raise ParseError(
                f"thresholds out of order: {t.p50} / {t.p60} / {t.p80}",
                file=str(path), line=line,
            )
        if t.n < 1:
            raise ParseError(f"n must be >= 1, got {t.n}", file=str(path), line=line)
        thresholds[key] = t
    return thresholds


def load_mergemap(path: str | Path) -> dict[str, str]:
    path = Path(path)
    merge_map: dict[str, str] = {}
    for line, row in _read_rows(path, MERGEMAP_COLUMNS):
        if row["category"] in merge_map:
            raise ParseError(
                f"duplicate merge-map category {row['category']!r}", file=str(path), line=line
            )
        merge_map[row["category"]] = row["category_group"]
    return merge_map


def load_reference_dir(directory: str | Path) -> ReferenceLibrary:
    """Assemble a library from a directory.

    Accepts worldvalues.csv (thresholds computed here), thresholds.csv
    (taken as-is), or both; a key present in both is an error. mergemap.csv
    is optional.
    """
    directory = Path(directory)
    worldvalues_path = directory / "worldvalues.csv"
    thresholds_path = directory / "thresholds.csv"
    mergemap_path = directory / "mergemap.csv"

    thresholds: dict[DistributionKey, ClassThresholds] = {}
    if worldvalues_path.exists():
        thresholds.update(load_worldvalues(worldvalues_path))
    if thresholds_path.exists():
        for key, t in load_thresholds(thresholds_path).items():
            if key in thresholds:
                raise ParseError(
                    f"distribution key {key} defined in both worldvalues.csv and thresholds.csv",
                    file=str(thresholds_path),
                )
            thresholds[key] = t
    if not thresholds:
        raise ParseError(
            "no reference data: need worldvalues.csv or thresholds.csv", file=str(directory)
        )

    merge_map = load_mergemap(mergemap_path) if mergemap_path.exists() else {}
    return ReferenceLibrary(thresholds=thresholds, merge_map=merge_map)


def _fmt(x: float) -> str:
    return format(x, "g")


def write_thresholds(
    thresholds: dict[DistributionKey, ClassThresholds], path: str | Path
) -> None:
    """Write thresholds in deterministic key order."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(THRESHOLD_COLUMNS)
        for key in sorted(
            thresholds, key=lambda k: (k.indicator, k.category_group, k.year, k.doc_split)
        ):
            t = thresholds[key]
            writer.writerow([
                key.indicator, key.category_group, key.year, key.doc_split,
                _fmt(t.p50), _fmt(t.p60), _fmt(t.p80), t.n,
            ])
