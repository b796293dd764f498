"""Multinomial naive Bayes spam/ham classifier for the ingest pipeline.

Feature pipeline: Unicode-lowercase the text, split on runs of
non-alphanumeric characters, drop single-character tokens. No stemming,
no stopword list. Counting is order-independent and the vocabulary is
sorted, so training is deterministic for any input permutation.

Token probabilities use additive smoothing with constant ``alpha``: a
token seen in training but never in one class still gets nonzero mass
there. Tokens never seen in training carry no information and are ignored
at classification time. Posterior ties go to ham (keep the text).
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

from .corpus import Corpus, CorpusStats

CLASSES = ("spam", "ham")
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
MODEL_FORMAT = "entity-pulse-nb"
MODEL_VERSION = 1


def tokenize(text: str) -> list[str]:
    return [t for t in _TOKEN_RE.findall(text.lower()) if len(t) > 1]


@dataclass(frozen=True)
class NBModel:
    vocabulary: dict[str, int]  # token -> column
    class_log_prior: dict[str, float]
    token_log_likelihood: dict[str, list[float]]  # per class, by column
    alpha: float


def train(labeled, alpha: float = 1.0) -> NBModel:
    """Fit the classifier on ``(text, label)`` pairs with labels spam/ham."""
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    doc_counts = {c: 0 for c in CLASSES}
    token_counts: dict[str, dict[str, int]] = {c: {} for c in CLASSES}
    for text, label in labeled:
        if label not in CLASSES:
            raise ValueError(f"unknown label {label!r}; expected spam or ham")
        doc_counts[label] += 1
        counts = token_counts[label]
        for tok in tokenize(text):
            counts[tok] = counts.get(tok, 0) + 1
    if min(doc_counts.values()) == 0:
        raise ValueError("training data must contain both spam and ham examples")
    vocabulary = {tok: i for i, tok in enumerate(
        sorted(set(token_counts["spam"]) | set(token_counts["ham"])))}
    total_docs = sum(doc_counts.values())
    priors = {c: math.log(doc_counts[c] / total_docs) for c in CLASSES}
    likelihoods: dict[str, list[float]] = {}
    v = len(vocabulary)
    for c in CLASSES:
        counts = token_counts[c]
        denom = sum(counts.values()) + alpha * v
        likelihoods[c] = [math.log((counts.get(tok, 0) + alpha) / denom)
                          for tok in vocabulary]
    return NBModel(vocabulary, priors, likelihoods, alpha)


def posteriors(model: NBModel, text: str) -> dict[str, float]:
    """Normalized class posteriors; they sum to 1 by construction."""
    vocab = model.vocabulary
    cols = [vocab[t] for t in tokenize(text) if t in vocab]
    joint = {}
    for c in CLASSES:
        lik = model.token_log_likelihood[c]
        joint[c] = model.class_log_prior[c] + sum(lik[i] for i in cols)
    peak = max(joint.values())
    weights = {c: math.exp(j - peak) for c, j in joint.items()}
    z = sum(weights.values())
    return {c: w / z for c, w in weights.items()}


def classify(model: NBModel, text: str) -> tuple[str, float]:
    """Winning label and its posterior; an exact tie keeps the text (ham)."""
    p = posteriors(model, text)
    label = "spam" if p["spam"] > p["ham"] else "ham"
    return label, p[label]


def filter_corpus(corpus: Corpus, model: NBModel
                  ) -> tuple[Corpus, int]:
    """Drop records classified as spam; records without text are kept.

    Returns the filtered corpus handle and the number of removed records.
    Requires a corpus ingested from the extended schema with a text column.
    """
    if not corpus.has_text:
        raise ValueError("corpus carries no text column; spam filtering "
                         "needs the extended 7-column schema")
    kept = Corpus()
    removed = 0
    for rec in corpus.records():
        if rec.text is not None and classify(model, rec.text)[0] == "spam":
            removed += 1
            continue
        kept._add(rec, None)
    kept._seal()
    return kept, removed


def save_model(model: NBModel, path) -> None:
    vocab_order = sorted(model.vocabulary, key=model.vocabulary.get)
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "alpha": model.alpha,
        "classes": list(CLASSES),
        "log_prior": model.class_log_prior,
        "vocabulary": vocab_order,
        "token_log_likelihood": model.token_log_likelihood,
    }
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_model(path) -> NBModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot load model from {path}: {exc}") from exc
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError(f"not a {MODEL_FORMAT} model file: {path}")
    if doc.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')}")
    vocabulary = {tok: i for i, tok in enumerate(doc["vocabulary"])}
    return NBModel(vocabulary, doc["log_prior"],
                   doc["token_log_likelihood"], doc["alpha"])


def read_labeled_csv(path) -> list[tuple[str, str]]:
    """Training input ``label,text`` rows as (text, label) pairs."""
    import csv

    out = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row_no, fields in enumerate(csv.reader(fh), start=1):
            if not fields:
                continue
            if len(fields) != 2:
                raise ValueError(f"row {row_no}: expected label,text")
            label, text = fields
            out.append((text, label))
    return out
