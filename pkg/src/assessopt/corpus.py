"""Institutional corpus: roster, products, authorships, CSV ingestion and validation.

A corpus is immutable after loading. Authorships are normalized to
(researcher_id, product_id) order so that save/load round-trips are exact.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

from .errors import ParseError, ValidationError

PRODUCT_KINDS = (
    "journal-article",
    "review",
    "conference-proceeding",
    "book",
    "chapter",
    "patent",
    "other",
)

DEFAULT_WINDOW = (2004, 2010)
DEFAULT_SNAPSHOT = date(2011, 12, 31)
MAX_QUOTA = 6

# Disciplinary areas evaluated bibliometrically; 10-14 are peer-review only.
BIBLIOMETRIC_UDAS = frozenset(range(1, 10))

# Sector-code prefix (text before "/") -> disciplinary area, for roster cross-checks.
SDS_AREA_BY_PREFIX = {
    "MAT": 1, "INF": 1,
    "FIS": 2,
    "CHIM": 3,
    "GEO": 4,
    "BIO": 5,
    "MED": 6,
    "AGR": 7, "VET": 7,
    "ICAR": 8,
    "ING-IND": 9, "ING-INF": 9,
    "L-ANT": 10, "L-ART": 10, "L-FIL-LET": 10, "L-LIN": 10, "L-OR": 10,
    "M-DEA": 11, "M-EDF": 11, "M-FIL": 11, "M-GGR": 11, "M-PED": 11,
    "M-PSI": 11, "M-STO": 11,
    "IUS": 12,
    "SECS-P": 13, "SECS-S": 13,
    "SPS": 14,
}

RESEARCHER_COLUMNS = ["id", "sds", "uda", "quota"]
PRODUCT_COLUMNS = [
    "id", "kind", "year", "fraud_flag",
    "wos_categories", "wos_metric", "wos_citations", "wos_journal_id",
    "scopus_categories", "scopus_metric", "scopus_citations", "scopus_journal_id",
]
AUTHORSHIP_COLUMNS = ["researcher_id", "product_id", "declared_priority", "gev_override"]


@dataclass(frozen=True)
class Researcher:
    """Roster entry: sector code, disciplinary area, and how many products are due."""

    id: str
    sds: str
    uda: int
    quota: int = 3


@dataclass(frozen=True)
class IndexRecord:
    """Snapshot of one bibliographic index entry for a product."""

    subject_categories: tuple[str, ...]
    citations: int
    journal_metric: float | None = None
    journal_id: str | None = None


@dataclass(frozen=True)
class Product:
    id: str
    kind: str
    year: int
    fraud_flag: bool = False
    wos_record: IndexRecord | None = None
    scopus_record: IndexRecord | None = None

    @property
    def indexed(self) -> bool:
        return self.wos_record is not None or self.scopus_record is not None

    @property
    def max_citations(self) -> int:
        """Highest citation count across index records; used only for tie-breaking."""
        counts = [r.citations for r in (self.wos_record, self.scopus_record) if r is not None]
        return max(counts, default=0)


@dataclass(frozen=True)
class Authorship:
    """Link between a researcher and a product they authored.

    declared_priority is the rank the researcher proposed the product at
    (1 = best); absent means the product was not proposed. gev_override
    routes the product to a panel other than the researcher's own area.
    """

    researcher_id: str
    product_id: str
    declared_priority: int | None = None
    gev_override: int | None = None


@dataclass
class Corpus:
    researchers: dict[str, Researcher]
    products: dict[str, Product]
    authorships: list[Authorship]
    snapshot_date: date = DEFAULT_SNAPSHOT
    evaluation_window: tuple[int, int] = DEFAULT_WINDOW


def _read_rows(path: Path, columns: list[str]) -> list[tuple[int, dict[str, str]]]:
    """Read a CSV into (line, row-dict) pairs, enforcing the exact header."""
    if not path.exists():
        raise ParseError("file not found", file=str(path))
    rows: list[tuple[int, dict[str, str]]] = []
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


def _parse_int(value: str, what: str, file: str, line: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise ParseError(f"{what} is not an integer: {value!r}", file=file, line=line) from None


def _parse_opt_int(value: str, what: str, file: str, line: int) -> int | None:
    return None if value == "" else _parse_int(value, what, file, line)


def _parse_opt_float(value: str, what: str, file: str, line: int) -> float | None:
    if value == "":
        return None
    try:
        return float(value)
    except ValueError:
        raise ParseError(f"{what} is not a number: {value!r}", file=file, line=line) from None


def _parse_bool(value: str, what: str, file: str, line: int) -> bool:
    token = value.strip().lower()
    if token in ("", "false", "0"):
        return False
    if token in ("true", "1"):
        return True
    raise ParseError(f"{what} is not a boolean: {value!r}", file=file, line=line)


def _parse_record(
    row: dict[str, str], prefix: str, file: str, line: int
) -> IndexRecord | None:
    """Build one index record from its four columns; all-empty means absent."""
    fields = [row[f"{prefix}_categories"], row[f"{prefix}_metric"],
              row[f"{prefix}_citations"], row[f"{prefix}_journal_id"]]
    if all(f == "" for f in fields):
        return None
    categories = tuple(c for c in row[f"{prefix}_categories"].split(";") if c)
    if not categories:
        raise ParseError(
            f"{prefix} record present but has no subject categories", file=file, line=line
        )
    if row[f"{prefix}_citations"] == "":
        raise ParseError(
            f"{prefix} record present but has no citation count", file=file, line=line
        )
    return IndexRecord(
        subject_categories=categories,
        citations=_parse_int(row[f"{prefix}_citations"], f"{prefix}_citations", file, line),
        journal_metric=_parse_opt_float(row[f"{prefix}_metric"], f"{prefix}_metric", file, line),
        journal_id=row[f"{prefix}_journal_id"] or None,
    )


def load_corpus(
    researchers_path: str | Path,
    products_path: str | Path,
    authorships_path: str | Path,
    *,
    snapshot_date: date = DEFAULT_SNAPSHOT,
    window: tuple[int, int] = DEFAULT_WINDOW,
) -> Corpus:
    """Load and fully validate a corpus from its three CSV files.

    Raises ParseError for unreadable input and ValidationError (with every
    violation found, each carrying file and line) for integrity failures.
    """
    researchers_path = Path(researchers_path)
    products_path = Path(products_path)
    authorships_path = Path(authorships_path)
    violations: list[str] = []

    researchers: dict[str, Researcher] = {}
    for line, row in _read_rows(researchers_path, RESEARCHER_COLUMNS):
        where = f"{researchers_path}:{line}"
        r = Researcher(
            id=row["id"],
            sds=row["sds"],
            uda=_parse_int(row["uda"], "uda", str(researchers_path), line),
            quota=_parse_int(row["quota"], "quota", str(researchers_path), line)
            if row["quota"] != "" else 3,
        )
        if not r.id:
            violations.append(f"{where}: empty researcher id")
            continue
        if r.id in researchers:
            violations.append(f"{where}: duplicate researcher id {r.id!r}")
            continue
        if not 0 <= r.quota <= MAX_QUOTA:
            violations.append(f"{where}: quota {r.quota} outside 0..{MAX_QUOTA}")
        if not 1 <= r.uda <= 14:
            violations.append(f"{where}: uda {r.uda} outside 1..14")
        if r.sds:
            expected = SDS_AREA_BY_PREFIX.get(r.sds.split("/")[0])
            if expected is not None and expected != r.uda:
                violations.append(
                    f"{where}: sds {r.sds!r} belongs to area {expected}, not {r.uda}"
                )
        researchers[r.id] = r

    products: dict[str, Product] = {}
    for line, row in _read_rows(products_path, PRODUCT_COLUMNS):
        where = f"{products_path}:{line}"
        if row["kind"] not in PRODUCT_KINDS:
            raise ParseError(
                f"unknown product kind {row['kind']!r}", file=str(products_path), line=line
            )
        p = Product(
            id=row["id"],
            kind=row["kind"],
            year=_parse_int(row["year"], "year", str(products_path), line),
            fraud_flag=_parse_bool(row["fraud_flag"], "fraud_flag", str(products_path), line),
            wos_record=_parse_record(row, "wos", str(products_path), line),
            scopus_record=_parse_record(row, "scopus", str(products_path), line),
        )
        if not p.id:
            violations.append(f"{where}: empty product id")
            continue
        if p.id in products:
            violations.append(f"{where}: duplicate product id {p.id!r}")
            continue
        for label, record in (("wos", p.wos_record), ("scopus", p.scopus_record)):
            if record is None:
                continue
            if record.citations < 0:
                violations.append(f"{where}: {label} citations {record.citations} negative")
            if record.journal_metric is not None and record.journal_metric < 0:
                violations.append(f"{where}: {label} metric {record.journal_metric} negative")
        products[p.id] = p

    authorships: list[Authorship] = []
    seen_pairs: set[tuple[str, str]] = set()
    priorities: dict[str, dict[int, str]] = {}
    for line, row in _read_rows(authorships_path, AUTHORSHIP_COLUMNS):
        where = f"{authorships_path}:{line}"
        a = Authorship(
            researcher_id=row["researcher_id"],
            product_id=row["product_id"],
            declared_priority=_parse_opt_int(
                row["declared_priority"], "declared_priority", str(authorships_path), line
            ),
            gev_override=_parse_opt_int(
                row["gev_override"], "gev_override", str(authorships_path), line
            ),
        )
        if a.researcher_id not in researchers:
            violations.append(f"{where}: unknown researcher id {a.researcher_id!r}")
        if a.product_id not in products:
            violations.append(f"{where}: unknown product id {a.product_id!r}")
        pair = (a.researcher_id, a.product_id)
        if pair in seen_pairs:
            violations.append(f"{where}: duplicate authorship {pair!r}")
        seen_pairs.add(pair)
        if a.declared_priority is not None:
            if a.declared_priority < 1:
                violations.append(f"{where}: declared_priority {a.declared_priority} < 1")
            else:
                taken = priorities.setdefault(a.researcher_id, {})
                if a.declared_priority in taken:
                    violations.append(
                        f"{where}: researcher {a.researcher_id!r} already declared "
                        f"priority {a.declared_priority} on {taken[a.declared_priority]!r}"
                    )
                taken[a.declared_priority] = a.product_id
        if a.gev_override is not None and not 1 <= a.gev_override <= 9:
            violations.append(f"{where}: gev_override {a.gev_override} outside 1..9")
        authorships.append(a)

    if violations:
        raise ValidationError(violations)

    authorships.sort(key=lambda a: (a.researcher_id, a.product_id))
    return Corpus(
        researchers=researchers,
        products=products,
        authorships=authorships,
        snapshot_date=snapshot_date,
        evaluation_window=window,
    )


def load_corpus_dir(
    directory: str | Path,
    *,
    snapshot_date: date = DEFAULT_SNAPSHOT,
    window: tuple[int, int] = DEFAULT_WINDOW,
) -> Corpus:
    """Load a corpus from a directory holding the three conventionally named files."""
    directory = Path(directory)
    return load_corpus(
        directory / "researchers.csv",
        directory / "products.csv",
        directory / "authorships.csv",
        snapshot_date=snapshot_date,
        window=window,
    )


def _fmt_opt(value) -> str:
    return "" if value is None else format(value, "g") if isinstance(value, float) else str(value)


def save_corpus(corpus: Corpus, directory: str | Path) -> None:
    """Write the corpus back to the three CSV files in deterministic order."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    with open(directory / "researchers.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESEARCHER_COLUMNS)
        for rid in sorted(corpus.researchers):
            r = corpus.researchers[rid]
            writer.writerow([r.id, r.sds, r.uda, r.quota])

    with open(directory / "products.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PRODUCT_COLUMNS)
        for pid in sorted(corpus.products):
            p = corpus.products[pid]
            row = [p.id, p.kind, p.year, "true" if p.fraud_flag else "false"]
            for record in (p.wos_record, p.scopus_record):
                if record is None:
                    row += ["", "", "", ""]
                else:
                    row += [
                        ";".join(record.subject_categories),
                        _fmt_opt(record.journal_metric),
                        record.citations,
                        record.journal_id or "",
                    ]
            writer.writerow(row)

    with open(directory / "authorships.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(AUTHORSHIP_COLUMNS)
        for a in sorted(corpus.authorships, key=lambda a: (a.researcher_id, a.product_id)):
            writer.writerow([
                a.researcher_id, a.product_id,
                _fmt_opt(a.declared_priority), _fmt_opt(a.gev_override),
            ])


def admissibility(product: Product, profile, window: tuple[int, int]) -> str | None:
    """Return None when the product can be submitted under the panel rules,
    else the name of the failed rule ("out-of-window" or "kind-not-allowed").

    Fraud is not an admissibility matter; it is penalized separately.
    """
    y0, y1 = window
    if not y0 <= product.year <= y1:
        return "out-of-window"
    if product.kind not in profile.allowed_kinds:
        return "kind-not-allowed"
    return None
