"""Python interface to the formeval scoring library.

The heavy lifting lives in the compiled ``_formeval`` extension; this package
re-exports the scalar operations directly and wraps the end-to-end entry
points so they return parsed report dictionaries instead of JSON text.
"""

import json as _json

from ._formeval import (
    ConfigError,
    InputError,
    LoadError,
    bleu,
    chrf,
    classification_report,
    criterion_ids,
    fit_weights,
    normalize_rating,
    overall_score,
    paper_weights,
    parse_verdict,
    pearson,
    render_prompt,
    ruby_sts,
    synthesize,
)
from ._formeval import evaluate_json as _evaluate_json
from ._formeval import evaluate_overall_json as _evaluate_overall_json

__all__ = [
    "ConfigError",
    "InputError",
    "LoadError",
    "bleu",
    "chrf",
    "classification_report",
    "criterion_ids",
    "evaluate",
    "evaluate_overall",
    "fit_weights",
    "normalize_rating",
    "overall_score",
    "paper_weights",
    "parse_verdict",
    "pearson",
    "render_prompt",
    "ruby_sts",
    "synthesize",
]

__version__ = "0.1.0"


def evaluate(corpus, **kwargs):
    """Judge a corpus and return the evaluation report as a dict.

    Keyword arguments mirror the ``judge`` subcommand of the CLI: ``backend``,
    ``mode`` ("oap" or "direct"), ``synthesis`` ("wa" or "and"), ``weights``
    ("paper", "file:PATH", or "fit:PATH"), ``judge_model``, ``temperature``,
    ``salt``, ``prover`` ("mock:MODE"), ``prover_cmd``, ``timeout``,
    ``out_dir``, ``cache``, and ``judge_fv``.
    """
    return _json.loads(_evaluate_json(str(corpus), **kwargs))


def evaluate_overall(corpus, **kwargs):
    """Score each candidate with one gated overall judgment; returns a dict.

    Accepts ``backend``, ``judge_model``, ``temperature``, ``salt``,
    ``prover``, ``prover_cmd``, ``timeout``, ``out_dir``, ``cache``, and
    ``gate`` (the score assigned when the prover rejects a candidate).
    """
    return _json.loads(_evaluate_overall_json(str(corpus), **kwargs))
