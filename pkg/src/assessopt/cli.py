"""Command-line front end wiring ingestion, scoring, simulation and reporting.

Exit codes: 0 success, 1 validation failure (integrity violations, missing
distributions, peer-review-only areas), 2 IO or parse failure. Set
ASSESS_OPT_LOG=DEBUG|INFO|... for diagnostics on stderr. Reruns on identical
inputs produce byte-identical output files.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import gev, reference, report, selection
from .corpus import DEFAULT_WINDOW, load_corpus_dir
from .errors import (
    MismatchedCorpusError,
    MissingDistributionError,
    ParseError,
    PeerReviewOnlyUdaError,
    ValidationError,
)

log = logging.getLogger("assessopt")

SCENARIO_FLAGS = {
    "1": selection.SCENARIO1,
    "2": selection.SCENARIO2,
    "3": selection.SCENARIO3,
    "exact-A": selection.EXACT_PROPOSED,
    "exact-C": selection.EXACT_FULL,
}


def _parse_window(text: str) -> tuple[int, int]:
    try:
        y0, y1 = text.split(":")
        window = (int(y0), int(y1))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"window must look like 2004:2010, got {text!r}"
        ) from None
    if window[0] > window[1]:
        raise argparse.ArgumentTypeError(f"window {text!r} is reversed")
    return window


def _parse_scenarios(text: str) -> list[str]:
    tags = []
    for token in text.split(","):
        token = token.strip()
        if token not in SCENARIO_FLAGS:
            raise argparse.ArgumentTypeError(
                f"unknown scenario {token!r}; pick from {', '.join(SCENARIO_FLAGS)}"
            )
        tag = SCENARIO_FLAGS[token]
        if tag not in tags:
            tags.append(tag)
    if not tags:
        raise argparse.ArgumentTypeError("scenario list is empty")
    return tags


def _add_input_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--corpus", required=True, help="directory with the three corpus CSVs")
    parser.add_argument("--profiles", required=True, help="panel profile pack (JSON)")
    parser.add_argument("--ref", required=True,
                        help="directory with worldvalues.csv/thresholds.csv and mergemap.csv")
    parser.add_argument("--window", type=_parse_window, default=DEFAULT_WINDOW,
                        help="evaluation window, e.g. 2004:2010")


def _load_inputs(args):
    corpus = load_corpus_dir(args.corpus, window=args.window)
    profiles = gev.load_profiles(args.profiles)
    problems = gev.validate_profiles(profiles, args.window)
    if problems:
        raise ValidationError(problems)
    library = reference.load_reference_dir(args.ref)
    return corpus, profiles, library


def _run_pipeline(args, tags: list[str]):
    corpus, profiles, library = _load_inputs(args)
    scored = gev.score_corpus(corpus, profiles, library)
    sets = selection.build_sets(corpus, scored)
    errors = selection.error_metrics(corpus, scored, sets)
    selections = {tag: selection.RUNNERS[tag](corpus, scored) for tag in tags}
    return corpus, scored, sets, errors, selections


def cmd_validate(args) -> int:
    _load_inputs(args)
    print("OK: corpus, profiles and reference library are consistent")
    return 0


def cmd_build_dist(args) -> int:
    thresholds = reference.load_worldvalues(args.worldvalues)
    reference.write_thresholds(thresholds, args.output)
    print(f"wrote {len(thresholds)} distributions to {args.output}")
    return 0


def cmd_score(args) -> int:
    corpus, profiles, library = _load_inputs(args)
    scored = gev.score_corpus(corpus, profiles, library)
    gev.write_scored(scored, args.output)
    print(f"scored {len(scored)} authorships to {args.output}")
    return 0


def cmd_errors(args) -> int:
    corpus, profiles, library = _load_inputs(args)
    scored = gev.score_corpus(corpus, profiles, library)
    sets = selection.build_sets(corpus, scored)
    errors = selection.error_metrics(corpus, scored, sets)
    selection.write_errors(errors, args.output)
    print(f"wrote error metrics for {len(errors)} researchers to {args.output}")
    return 0


def cmd_simulate(args) -> int:
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    corpus, scored, sets, errors, selections = _run_pipeline(args, args.scenarios)

    gev.write_scored(scored, outdir / "scored.csv")
    selection.write_selections(list(selections.values()), scored, outdir / "selection.csv")
    selection.write_errors(errors, outdir / "errors.csv")
    averages = report.average_table(scored, sets)
    (outdir / "report.md").write_text(
        report.render_report(corpus, selections, errors, averages), encoding="utf-8"
    )
    if all(t in selections for t in (selection.SCENARIO1, selection.SCENARIO2,
                                     selection.SCENARIO3)):
        table = report.scenario_table(selections)
        (outdir / "report.csv").write_text(
            report.render_scenario_csv(table), encoding="utf-8"
        )
    for tag in args.scenarios:
        print(f"{tag}: total score {selections[tag].total_score:g}")
    print(f"outputs in {outdir}")
    return 0


def cmd_report(args) -> int:
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    corpus, scored, sets, errors, selections = _run_pipeline(args, args.scenarios)
    averages = report.average_table(scored, sets)
    (outdir / "report.md").write_text(
        report.render_report(corpus, selections, errors, averages), encoding="utf-8"
    )
    if all(t in selections for t in (selection.SCENARIO1, selection.SCENARIO2,
                                     selection.SCENARIO3)):
        table = report.scenario_table(selections)
        (outdir / "report.csv").write_text(
            report.render_scenario_csv(table), encoding="utf-8"
        )
    print(f"report written to {outdir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="assess-opt",
        description="Score research products, quantify selection errors, and "
                    "simulate or optimize the institutional submission.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check corpus, profiles and reference data")
    _add_input_args(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("build-dist", help="compute class thresholds from raw world values")
    p.add_argument("--worldvalues", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_build_dist)

    p = sub.add_parser("score", help="score every authorship under its panel rules")
    _add_input_args(p)
    p.add_argument("-o", "--output", required=True, help="scored.csv path")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("errors", help="write per-researcher selection-error metrics")
    _add_input_args(p)
    p.add_argument("-o", "--output", required=True, help="errors.csv path")
    p.set_defaults(func=cmd_errors)

    p = sub.add_parser("simulate", help="run selection scenarios and write all outputs")
    _add_input_args(p)
    p.add_argument("--scenarios", type=_parse_scenarios,
                   default=list(SCENARIO_FLAGS.values()),
                   help="comma list from: 1,2,3,exact-A,exact-C")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="render the analysis report only")
    _add_input_args(p)
    p.add_argument("--scenarios", type=_parse_scenarios,
                   default=list(SCENARIO_FLAGS.values()),
                   help="comma list from: 1,2,3,exact-A,exact-C")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        stream=sys.stderr,
        level=os.environ.get("ASSESS_OPT_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        for violation in exc.violations:
            print(f"validation: {violation}", file=sys.stderr)
        return 1
    except (MissingDistributionError, PeerReviewOnlyUdaError, MismatchedCorpusError) as exc:
        print(f"validation: {exc}", file=sys.stderr)
        return 1
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
