"""CLI subcommands, exit codes and output determinism."""

from __future__ import annotations

import shutil
from pathlib import Path

from assessopt.cli import main

FIXTURES = Path(__file__).parent / "fixtures"
MINI = FIXTURES / "mini_university"
GOLDEN = Path(__file__).parent / "golden" / "mini_university"

MINI_ARGS = [
    "--corpus", str(MINI),
    "--profiles", str(MINI / "profiles.json"),
    "--ref", str(MINI / "ref"),
]

OUTPUT_FILES = ["scored.csv", "selection.csv", "errors.csv", "report.md", "report.csv"]


def test_validate_clean_fixture(capsys):
    assert main(["validate", *MINI_ARGS]) == 0
    assert "OK" in capsys.readouterr().out


def test_validate_dangling_reference(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    shutil.copytree(MINI, corpus)
    with open(corpus / "authorships.csv", "a", encoding="utf-8") as fh:
        fh.write("R01,P99,6,\n")
    code = main([
        "validate", "--corpus", str(corpus),
        "--profiles", str(MINI / "profiles.json"), "--ref", str(MINI / "ref"),
    ])
    assert code == 1
    err = capsys.readouterr().err
    assert "P99" in err
    assert "authorships.csv:45" in err


def test_validate_missing_file(tmp_path):
    assert main([
        "validate", "--corpus", str(tmp_path),
        "--profiles", str(MINI / "profiles.json"), "--ref", str(MINI / "ref"),
    ]) == 2


def test_missing_distribution_exit_code(tmp_path, capsys):
    ref = tmp_path / "ref"
    ref.mkdir()
    # thresholds that lack every key the corpus needs
    (ref / "thresholds.csv").write_text(
        "indicator,category_group,year,doc_split,p50,p60,p80,n\n"
        "citations,NOWHERE,2006,any,1,2,3,9\n",
        encoding="utf-8",
    )
    code = main([
        "simulate", "--corpus", str(MINI),
        "--profiles", str(MINI / "profiles.json"), "--ref", str(ref),
        "--scenarios", "1", "-o", str(tmp_path / "out"),
    ])
    assert code == 1
    assert "no reference distribution" in capsys.readouterr().err


def test_build_dist(tmp_path):
    src = tmp_path / "worldvalues.csv"
    src.write_text(
        "indicator,category_group,year,doc_split,value\n"
        + "".join(f"citations,X,2006,any,{v}\n" for v in range(1, 11)),
        encoding="utf-8",
    )
    out = tmp_path / "thresholds.csv"
    assert main(["build-dist", "--worldvalues", str(src), "-o", str(out)]) == 0
    assert out.read_text(encoding="utf-8") == (
        "indicator,category_group,year,doc_split,p50,p60,p80,n\n"
        "citations,X,2006,any,5,6,8,10\n"
    )


def test_simulate_writes_all_outputs_and_matches_golden(tmp_path):
    out = tmp_path / "out"
    code = main([
        "simulate", *MINI_ARGS,
        "--scenarios", "1,2,3,exact-A,exact-C", "-o", str(out),
    ])
    assert code == 0
    for name in OUTPUT_FILES:
        produced = (out / name).read_bytes()
        expected = (GOLDEN / name).read_bytes()
        assert produced == expected, f"{name} deviates from the golden file"


def test_simulate_reruns_are_byte_identical(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    for out in (first, second):
        assert main([
            "simulate", *MINI_ARGS,
            "--scenarios", "1,2,3,exact-A,exact-C", "-o", str(out),
        ]) == 0
    for name in OUTPUT_FILES:
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_simulate_exact_only(tmp_path):
    out = tmp_path / "out"
    assert main(["simulate", *MINI_ARGS, "--scenarios", "exact-C", "-o", str(out)]) == 0
    lines = (out / "selection.csv").read_text(encoding="utf-8").splitlines()
    tags = {line.split(",")[0] for line in lines[1:]}
    assert tags == {"exact-C"}
    assert (out / "report.md").exists()
    assert not (out / "report.csv").exists()  # needs all three scenarios


def test_quota_zero_researcher_absent_from_selection(tmp_path):
    out = tmp_path / "out"
    assert main(["simulate", *MINI_ARGS, "--scenarios", "1", "-o", str(out)]) == 0
    text = (out / "selection.csv").read_text(encoding="utf-8")
    assert ",R04," not in text


def test_score_subcommand(tmp_path):
    out = tmp_path / "scored.csv"
    assert main(["score", *MINI_ARGS, "-o", str(out)]) == 0
    assert out.read_bytes() == (GOLDEN / "scored.csv").read_bytes()


def test_errors_subcommand(tmp_path):
    out = tmp_path / "errors.csv"
    assert main(["errors", *MINI_ARGS, "-o", str(out)]) == 0
    assert out.read_bytes() == (GOLDEN / "errors.csv").read_bytes()


def test_report_subcommand(tmp_path):
    out = tmp_path / "rep"
    assert main(["report", *MINI_ARGS, "-o", str(out)]) == 0
    assert (out / "report.md").read_bytes() == (GOLDEN / "report.md").read_bytes()
    assert not (out / "scored.csv").exists()


def test_window_override_rejects_uncovered_years(tmp_path, capsys):
    # default profile bands stop at 2010, so a wider window must fail validation
    code = main(["validate", *MINI_ARGS, "--window", "2004:2012"])
    assert code == 1
    assert "2011" in capsys.readouterr().err


def test_bad_scenario_flag():
    try:
        main(["simulate", *MINI_ARGS, "--scenarios", "9", "-o", "/tmp/x"])
    except SystemExit as exc:  # argparse rejects the value
        assert exc.code == 2
    else:
        raise AssertionError("expected SystemExit")
