"""Discipline-panel rule sets and the product scoring pipeline.

Each panel (GEV) is described entirely by data: classification matrices per
publication-age band, which bibliographic source(s) to use, journal class
lists, forced peer-review journal lists, and fallback scores. Scoring a
product is a pure function of (product, profile, reference library, window).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from . import reference
from .corpus import BIBLIOMETRIC_UDAS, DEFAULT_WINDOW, PRODUCT_KINDS, Corpus, IndexRecord, Product, admissibility
from .errors import MissingDistributionError, ParseError, PeerReviewOnlyUdaError, ValidationError
from .reference import DistributionKey, ReferenceLibrary, classify

MERIT_SCORES = {"A": 1.0, "B": 0.8, "C": 0.5, "D": 0.0}
MATRIX_OUTCOMES = ("A", "B", "C", "D", "IR")
DEFINITE_OUTCOMES = frozenset({"A", "B", "C", "D"})

FRAUD_SCORE = -2.0
INADMISSIBLE_SCORE = -1.0

WOS_ONLY = "wos-only"
BEST_OF_BOTH = "best-of-both"
SOURCE_POLICIES = (WOS_ONLY, BEST_OF_BOTH)

SCORED_COLUMNS = ["product_id", "researcher_id", "routing_gev", "outcome", "score", "definite"]


@dataclass(frozen=True)
class ClassificationMatrix:
    """16-cell grid mapping (citation class, journal class) to a merit outcome.

    Rows are citation classes 1-4, columns journal classes 1-4.
    """

    cells: tuple[tuple[str, ...], ...]

    @classmethod
    def from_rows(cls, rows) -> "ClassificationMatrix":
        if len(rows) != 4 or any(len(row) != 4 for row in rows):
            raise ValueError("classification matrix must be 4x4")
        for row in rows:
            for cell in row:
                if cell not in MATRIX_OUTCOMES:
                    raise ValueError(f"unknown matrix outcome {cell!r}")
        return cls(cells=tuple(tuple(row) for row in rows))

    def lookup(self, ic_class: int, ir_class: int) -> str:
        if not (1 <= ic_class <= 4 and 1 <= ir_class <= 4):
            raise ValueError(f"classes must be 1..4, got ({ic_class}, {ir_class})")
        return self.cells[ic_class - 1][ir_class - 1]


def matrix_lookup(matrix: ClassificationMatrix, ic_class: int, ir_class: int) -> str:
    return matrix.lookup(ic_class, ir_class)


# Merit grid favouring citations for mature products: high-citation rows keep
# their grade across almost all journal classes, with peer-review routing
# where the two indicators disagree strongly.
MATURE_PRODUCTS_MATRIX = ClassificationMatrix.from_rows([
    ["A", "A", "A", "IR"],
    ["B", "B", "B", "IR"],
    ["IR", "C", "C", "C"],
    ["IR", "D", "D", "D"],
])

# Merit grid favouring journal standing for recent products, whose citation
# counts have not had time to accumulate.
RECENT_PRODUCTS_MATRIX = ClassificationMatrix.from_rows([
    ["A", "IR", "IR", "IR"],
    ["A", "B", "C", "D"],
    ["A", "B", "C", "D"],
    ["IR", "IR", "IR", "D"],
])


@dataclass(frozen=True)
class GevProfile:
    """Full rule set of one panel."""

    gev_id: int
    name: str
    allowed_kinds: frozenset[str]
    age_bands: tuple[tuple[tuple[int, int], ClassificationMatrix], ...]
    source_policy: str = BEST_OF_BOTH
    split_citation_doctype: bool = False
    ir_journal_class_list: dict[str, int] = field(default_factory=dict)
    forced_ir_journals: frozenset[str] = frozenset()
    no_metric_score: float = 0.25
    non_indexed_score: float = 0.25
    ir_assumed_score: float = 0.5

    def matrix_for_year(self, year: int) -> ClassificationMatrix:
        for (y0, y1), matrix in self.age_bands:
            if y0 <= year <= y1:
                return matrix
        raise ValueError(f"year {year} outside the age bands of GEV {self.gev_id}")

    def validate(self, window: tuple[int, int] = DEFAULT_WINDOW) -> list[str]:
        """Check band coverage and score sanity against the active window."""
        problems: list[str] = []
        if not 1 <= self.gev_id <= 9:
            problems.append(f"gev_id {self.gev_id} outside 1..9")
        if self.source_policy not in SOURCE_POLICIES:
            problems.append(f"unknown source policy {self.source_policy!r}")
        for kind in self.allowed_kinds:
            if kind not in PRODUCT_KINDS:
                problems.append(f"unknown product kind {kind!r} in allowed_kinds")
        covered: set[int] = set()
        for (y0, y1), _ in self.age_bands:
            if y0 > y1:
                problems.append(f"age band {y0}-{y1} is reversed")
                continue
            years = set(range(y0, y1 + 1))
            if covered & years:
                problems.append(f"age band {y0}-{y1} overlaps another band")
            covered |= years
        missing = set(range(window[0], window[1] + 1)) - covered
        if missing:
            problems.append(
                f"age bands do not cover window years {sorted(missing)}"
            )
        for label, score in (
            ("no_metric_score", self.no_metric_score),
            ("non_indexed_score", self.non_indexed_score),
            ("ir_assumed_score", self.ir_assumed_score),
        ):
            if not -2.0 <= score <= 1.0:
                problems.append(f"{label} {score} outside [-2, 1]")
        for journal, cls in self.ir_journal_class_list.items():
            if not 1 <= cls <= 4:
                problems.append(f"journal class {cls} for {journal!r} outside 1..4")
        return [f"profile {self.gev_id}: {p}" for p in problems]


@dataclass(frozen=True)
class ScoredProduct:
    """Outcome of scoring one product under one routing.

    outcome is one of the matrix results A/B/C/D/IR or a pipeline label:
    forced-ir, no-metric-fallback, non-indexed-fallback, inadmissible, fraud.
    definite is True only for the four graded matrix results.
    """

    product_id: str
    routing_gev: int
    outcome: str
    score: float
    definite: bool


def multi_category_class(
    record: IndexRecord,
    indicator: str,
    value: float,
    year: int,
    doc_split: str,
    library: ReferenceLibrary,
) -> int:
    """Best (numerically smallest) class across the record's subject categories.

    Categories without a stored distribution are skipped; it is an error only
    when none of them resolves.
    """
    best: int | None = None
    missing: list[str] = []
    for category in record.subject_categories:
        try:
            thresholds = library.lookup(indicator, category, year, doc_split)
        except MissingDistributionError:
            missing.append(str(DistributionKey(indicator, library.resolve(category), year, doc_split)))
            continue
        cls = classify(value, thresholds)
        if best is None or cls < best:
            best = cls
    if best is None:
        raise MissingDistributionError(
            "no reference distribution for any of: " + ", ".join(missing)
        )
    return best


def _policy_records(product: Product, profile: GevProfile) -> list[IndexRecord]:
    if profile.source_policy == WOS_ONLY:
        candidates = [product.wos_record]
    else:
        candidates = [product.wos_record, product.scopus_record]
    return [r for r in candidates if r is not None]


def _evaluate_record(
    product: Product, record: IndexRecord, profile: GevProfile, library: ReferenceLibrary
) -> tuple[str, float]:
    """Score one index record through class lookup and the year-band matrix."""
    ir_class: int | None = None
    if record.journal_id is not None and record.journal_id in profile.ir_journal_class_list:
        ir_class = profile.ir_journal_class_list[record.journal_id]
    elif record.journal_metric is not None:
        ir_class = multi_category_class(
            record, reference.JOURNAL_METRIC, record.journal_metric,
            product.year, "any", library,
        )
    if ir_class is None:
        return "no-metric-fallback", profile.no_metric_score

    doc_split = "any"
    if profile.split_citation_doctype:
        doc_split = "review" if product.kind == "review" else "article"
    ic_class = multi_category_class(
        record, reference.CITATIONS, float(record.citations),
        product.year, doc_split, library,
    )
    outcome = profile.matrix_for_year(product.year).lookup(ic_class, ir_class)
    if outcome == "IR":
        return "IR", profile.ir_assumed_score
    return outcome, MERIT_SCORES[outcome]


def score_product(
    product: Product,
    routing_gev: int,
    profile: GevProfile,
    library: ReferenceLibrary,
    window: tuple[int, int] = DEFAULT_WINDOW,
) -> ScoredProduct:
    """Run the whole scoring pipeline for one product under one routing.

    Order: fraud, admissibility, forced peer-review journals (reviews only),
    source selection, metric availability, then class lookup through the
    year-band matrix. Under best-of-both the higher-scoring record wins,
    ties going to the first (WoS) record. Citation counts are used exactly
    as recorded.
    """
    if profile.gev_id != routing_gev:
        raise ValueError(f"profile {profile.gev_id} cannot score routing {routing_gev}")

    if product.fraud_flag:
        return ScoredProduct(product.id, routing_gev, "fraud", FRAUD_SCORE, False)

    if admissibility(product, profile, window) is not None:
        return ScoredProduct(product.id, routing_gev, "inadmissible", INADMISSIBLE_SCORE, False)

    # Journal-list forcing routes the product before any source is picked,
    # so it fires identically under both source policies.
    if profile.forced_ir_journals and product.kind == "review":
        journal_ids = {
            r.journal_id
            for r in (product.wos_record, product.scopus_record)
            if r is not None and r.journal_id is not None
        }
        if journal_ids & profile.forced_ir_journals:
            return ScoredProduct(
                product.id, routing_gev, "forced-ir", profile.ir_assumed_score, False
            )

    records = _policy_records(product, profile)
    if not records:
        return ScoredProduct(
            product.id, routing_gev, "non-indexed-fallback", profile.non_indexed_score, False
        )

    best: tuple[str, float] | None = None
    for record in records:
        outcome, score = _evaluate_record(product, record, profile, library)
        if best is None or score > best[1]:
            best = (outcome, score)
    outcome, score = best
    return ScoredProduct(
        product.id, routing_gev, outcome, score, outcome in DEFINITE_OUTCOMES
    )


def routing_for(authorship, researcher) -> int:
    """Panel a product is routed to for this authorship."""
    if authorship.gev_override is not None:
        return authorship.gev_override
    return researcher.uda


def score_corpus(
    corpus: Corpus,
    profiles: dict[int, GevProfile],
    library: ReferenceLibrary,
) -> dict[tuple[str, str], ScoredProduct]:
    """Score every authorship under its researcher's routing.

    Raises PeerReviewOnlyUdaError when a routing falls outside areas 1-9.
    """
    scored: dict[tuple[str, str], ScoredProduct] = {}
    for a in corpus.authorships:
        researcher = corpus.researchers[a.researcher_id]
        gev = routing_for(a, researcher)
        if gev not in BIBLIOMETRIC_UDAS:
            raise PeerReviewOnlyUdaError(
                f"peer-review-only UDA {gev}: product {a.product_id!r} of researcher "
                f"{a.researcher_id!r} has no bibliometric panel"
            )
        profile = profiles.get(gev)
        if profile is None:
            raise ValidationError([f"no profile configured for GEV {gev}"])
        scored[(a.researcher_id, a.product_id)] = score_product(
            corpus.products[a.product_id], gev, profile, library,
            corpus.evaluation_window,
        )
    return scored


def write_scored(
    scored: dict[tuple[str, str], ScoredProduct], path: str | Path
) -> None:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SCORED_COLUMNS)
        for rid, pid in sorted(scored, key=lambda k: (k[1], k[0])):
            sp = scored[(rid, pid)]
            writer.writerow([
                pid, rid, sp.routing_gev, sp.outcome,
                format(sp.score, "g"), "true" if sp.definite else "false",
            ])


# --- profile configuration -------------------------------------------------

DEFAULT_ALLOWED_KINDS = frozenset({"journal-article", "review", "conference-proceeding"})

UDA_NAMES = {
    1: "Mathematics and computer science",
    2: "Physics",
    3: "Chemistry",
    4: "Earth sciences",
    5: "Biology",
    6: "Medicine",
    7: "Agricultural and veterinary sciences",
    8: "Civil engineering and architecture",
    9: "Industrial and information engineering",
}

_TWO_BANDS = (((2004, 2008), MATURE_PRODUCTS_MATRIX), ((2009, 2010), RECENT_PRODUCTS_MATRIX))
_ONE_BAND = (((2004, 2010), MATURE_PRODUCTS_MATRIX),)


def default_profiles() -> dict[int, GevProfile]:
    """Built-in pack for the nine bibliometric panels over the 2004-2010 window.

    Panels 1, 2 and 7 apply a single grid to products of all ages; the life
    sciences panels (5, 6) read WoS only and give unranked-metric products a
    nil score; panels 4-7 keep separate citation distributions for articles
    and reviews; panels 1 and 9 support journal class lists (shipped empty,
    to be filled from the published panel documents); panel 7 supports a
    forced peer-review journal list for reviews. Only the Chemistry grids
    are public, so the other panels reuse them as a configurable stand-in.
    """
    variants: dict[int, dict] = {
        1: dict(age_bands=_ONE_BAND, ir_journal_class_list={}),
        2: dict(age_bands=_ONE_BAND),
        3: dict(),
        4: dict(split_citation_doctype=True),
        5: dict(source_policy=WOS_ONLY, split_citation_doctype=True, no_metric_score=0.0),
        6: dict(source_policy=WOS_ONLY, split_citation_doctype=True, no_metric_score=0.0),
        7: dict(age_bands=_ONE_BAND, split_citation_doctype=True, forced_ir_journals=frozenset()),
        8: dict(),
        9: dict(no_metric_score=0.5, ir_journal_class_list={}),
    }
    profiles = {}
    for gev_id, overrides in variants.items():
        profiles[gev_id] = GevProfile(
            gev_id=gev_id,
            name=UDA_NAMES[gev_id],
            allowed_kinds=DEFAULT_ALLOWED_KINDS,
            age_bands=overrides.pop("age_bands", _TWO_BANDS),
            **overrides,
        )
    return profiles


def _profile_to_json(profile: GevProfile) -> dict:
    return {
        "gev_id": profile.gev_id,
        "name": profile.name,
        "allowed_kinds": sorted(profile.allowed_kinds),
        "source_policy": profile.source_policy,
        "split_citation_doctype": profile.split_citation_doctype,
        "no_metric_score": profile.no_metric_score,
        "non_indexed_score": profile.non_indexed_score,
        "ir_assumed_score": profile.ir_assumed_score,
        "age_bands": [
            {"years": [y0, y1], "matrix": [list(row) for row in matrix.cells]}
            for (y0, y1), matrix in profile.age_bands
        ],
        "ir_journal_class_list": dict(sorted(profile.ir_journal_class_list.items())),
        "forced_ir_journals": sorted(profile.forced_ir_journals),
    }


def dump_profiles(profiles: dict[int, GevProfile], path: str | Path) -> None:
    path = Path(path)
    payload = {"profiles": [_profile_to_json(profiles[g]) for g in sorted(profiles)]}
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_profiles(path: str | Path) -> dict[int, GevProfile]:
    """Read a profile pack from JSON; structural problems raise ParseError."""
    path = Path(path)
    if not path.exists():
        raise ParseError("file not found", file=str(path))
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}", file=str(path)) from None

    profiles: dict[int, GevProfile] = {}
    try:
        entries = payload["profiles"]
        for entry in entries:
            bands = tuple(
                (
                    (int(band["years"][0]), int(band["years"][1])),
                    ClassificationMatrix.from_rows(band["matrix"]),
                )
                for band in entry["age_bands"]
            )
            profile = GevProfile(
                gev_id=int(entry["gev_id"]),
                name=entry.get("name", f"GEV {entry['gev_id']}"),
                allowed_kinds=frozenset(entry["allowed_kinds"]),
                age_bands=bands,
                source_policy=entry.get("source_policy", BEST_OF_BOTH),
                split_citation_doctype=bool(entry.get("split_citation_doctype", False)),
                ir_journal_class_list={
                    str(k): int(v)
                    for k, v in entry.get("ir_journal_class_list", {}).items()
                },
                forced_ir_journals=frozenset(entry.get("forced_ir_journals", [])),
                no_metric_score=float(entry.get("no_metric_score", 0.25)),
                non_indexed_score=float(entry.get("non_indexed_score", 0.25)),
                ir_assumed_score=float(entry.get("ir_assumed_score", 0.5)),
            )
            if profile.gev_id in profiles:
                raise ParseError(
                    f"duplicate profile for GEV {profile.gev_id}", file=str(path)
                )
            profiles[profile.gev_id] = profile
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed profile entry: {exc}", file=str(path)) from None
    return profiles


def validate_profiles(
    profiles: dict[int, GevProfile], window: tuple[int, int] = DEFAULT_WINDOW
) -> list[str]:
    problems: list[str] = []
    for gev_id in sorted(profiles):
        if profiles[gev_id].gev_id != gev_id:
            problems.append(f"profile keyed {gev_id} declares gev_id {profiles[gev_id].gev_id}")
        problems.extend(profiles[gev_id].validate(window))
    return problems
