"""Smoke tests for the python bindings: scalar operations, an end-to-end
evaluation over the bundled corpus, and CLI interop."""

import json
import math
import os
import pathlib
import subprocess

import pytest

import formeval

SOURCE_DIR = pathlib.Path(os.environ["FORMEVAL_SOURCE_DIR"])
CORPUS = SOURCE_DIR / "data" / "sample_corpus.jsonl"


def test_paper_weights_and_overall_score():
    weights = formeval.paper_weights()
    assert weights == {"lp": 0.25, "mc": 0.19, "fv": 0.32, "fq": 0.24}
    assert formeval.overall_score(1, 1, 0, 1) == 0.25 + 0.19 + 0.24
    assert formeval.overall_score(1, 1, 1, 1) == 1.0
    assert formeval.overall_score(0.5, 0.5, 0.5, 0.5, weights={"lp": 0.25, "mc": 0.25, "fv": 0.25, "fq": 0.25}) == 0.5


def test_fit_weights_recovers_a_pure_column():
    X = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [1, 1, 0, 0]]
    y = [1.0, 0.0, 0.0, 0.0, 1.0]
    fit = formeval.fit_weights(X, y)
    assert fit["weights"]["lp"] == pytest.approx(1.0, abs=1e-9)
    assert fit["objective"] == pytest.approx(0.0, abs=1e-12)


def test_synthesize_and_vs_wa():
    properties = [
        "PreArgStructure", "Quantification", "Formula", "Relation",
        "Concept", "Constant", "Operator",
        "SyntaxValidity", "ReferentialCompleteness", "TypeMatch",
        "Conciseness", "LogicalConsistency",
    ]
    profile = {name: 1 for name in properties}
    profile["Quantification"] = 0
    conj = formeval.synthesize(profile, method="and")
    mean = formeval.synthesize(profile, method="wa")
    assert conj["LP"] == 0.0
    assert mean["LP"] == pytest.approx(3.0 / 4.0)
    assert conj["FV"] == mean["FV"] == 1.0


def test_reference_metrics():
    assert formeval.bleu("a b c d", "a b c d") == 1.0
    assert formeval.chrf("theorem", "theorem") == 1.0
    assert formeval.ruby_sts("x = y", "x = y") == 1.0
    assert 0.0 <= formeval.bleu("a b", "c d") <= 1.0
    assert formeval.pearson([1, 2, 3, 4], [2, 1, 4, 3]) == pytest.approx(0.6)
    report = formeval.classification_report([1, 1, 0, 0], [1, 0, 1, 0])
    assert report["kappa"] == pytest.approx(0.0)
    assert report["counts"] == {"tp": 1, "fp": 1, "fn": 1, "tn": 1}


def test_prompt_rendering_and_verdict_parsing():
    ids = formeval.criterion_ids()
    assert "Quantification" in ids and "Overall" in ids
    prompt = formeval.render_prompt("Quantification", "isabelle_hol", "x > 0", "lemma p: x > 0")
    assert "x > 0" in prompt and "Isabelle/HOL" in prompt
    raw = "%%%%%%%%%%\nExplanation: quantifiers line up\nJudgement: True\n%%%%%%%%%%\n"
    verdict = formeval.parse_verdict(raw, "Quantification")
    assert verdict == {"judgment": 1, "explanation": "quantifiers line up"}
    assert formeval.parse_verdict("no wrapped block here", "Quantification") is None


def test_evaluate_end_to_end(tmp_path):
    report = formeval.evaluate(
        CORPUS,
        backend="stub:seed=7,bias=0.8",
        judge_model="stub-judge",
        prover="mock:marker",
        mode="oap",
        synthesis="wa",
        weights="paper",
        out_dir=str(tmp_path / "out"),
    )
    assert report["format"] == "formeval/report/v1"
    assert len(report["items"]) == 20
    assert report["aggregates"]["all"]["overall"]["n"] == 20
    for item in report["items"]:
        assert item["status"] == "ok"
        assert set(item["aspects"]) == {"lp", "mc", "fv", "fq"}
        assert 0.0 <= item["overall"] <= 1.0

    again = formeval.evaluate(
        CORPUS,
        backend="stub:seed=7,bias=0.8",
        judge_model="stub-judge",
        prover="mock:marker",
        out_dir=str(tmp_path / "again"),
    )
    assert again == report


def test_evaluate_overall_gates_on_the_prover(tmp_path):
    report = formeval.evaluate_overall(
        CORPUS,
        backend="stub:seed=1,bias=1.0",
        judge_model="stub-judge",
        prover="mock:reject",
        gate=0.25,
        out_dir=str(tmp_path / "out"),
    )
    assert all(item["overall"] == 0.25 for item in report["items"])


def test_errors_surface_as_python_exceptions(tmp_path):
    with pytest.raises(ValueError):
        formeval.overall_score(1, 1, 1, 1, weights={"lp": 0.9, "mc": 0.9, "fv": 0.9, "fq": 0.9})
    with pytest.raises(OSError):
        formeval.evaluate(tmp_path / "missing.jsonl", out_dir=str(tmp_path / "out"))


def test_cli_and_bindings_agree(tmp_path):
    cli = os.environ["FORMEVAL_CLI"]
    out_dir = tmp_path / "cli_out"
    subprocess.run(
        [
            cli, "judge",
            "--corpus", str(CORPUS),
            "--backend", "stub:seed=7,bias=0.8",
            "--judge-model", "stub-judge",
            "--prover", "mock:marker",
            "--mode", "oap",
            "--synthesis", "wa",
            "--weights", "paper",
            "--out", str(out_dir),
        ],
        check=True,
        capture_output=True,
        text=True,
    )
    cli_report = json.loads((out_dir / "report.json").read_text())
    api_report = formeval.evaluate(
        CORPUS,
        backend="stub:seed=7,bias=0.8",
        judge_model="stub-judge",
        prover="mock:marker",
        out_dir=str(tmp_path / "api_out"),
    )
    assert cli_report["items"] == api_report["items"]
    assert cli_report["aggregates"] == api_report["aggregates"]
