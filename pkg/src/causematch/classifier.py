"""Multinomial Naive Bayes over the news taxonomy, with abstention.

Likelihoods are Laplace-smoothed token frequencies per class; prediction
sums log likelihoods for in-vocabulary tokens (out-of-vocabulary tokens
contribute nothing) and softmaxes the class scores with log-sum-exp
stabilization.  A prediction whose top posterior falls below the confidence
threshold abstains rather than asserting a weak label.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import EmptyClass, FormatError, InvalidAlpha, UnknownLabel
from .extraction import tokenize

MODEL_MAGIC = b"PGMNB1\x00\x00"


@dataclass
class LabeledDoc:
    doc_id: str
    tokens: list[str]
    label: str


@dataclass
class NBModel:
    taxonomy: list[str]
    vocabulary: dict[str, int]
    alpha: float
    class_log_prior: np.ndarray  # shape (C,)
    token_log_likelihood: np.ndarray  # shape (C, V)


@dataclass
class Prediction:
    label: str
    posterior: dict[str, float]
    confidence: float
    abstained: bool


@dataclass
class EvaluationReport:
    accuracy: float
    per_class: dict[str, dict[str, float]]  # class -> {precision, recall}
    confusion: dict[str, dict[str, int]]  # true label -> predicted label -> count
    total: int

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "per_class": self.per_class,
            "confusion": self.confusion,
            "total": self.total,
        }


def load_taxonomy(path: str | None = None) -> list[str]:
    """Class-id list, one per line; ships with the 37-class news taxonomy."""
    if path is None:
        text = resources.files("causematch.data").joinpath("news_taxonomy.txt").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    classes = [line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")]
    if len(set(classes)) != len(classes):
        raise ValueError("taxonomy file contains duplicate class ids")
    return classes


def read_corpus(path: str) -> list[LabeledDoc]:
    """Labeled corpus: one `<label>\\t<text>` document per line."""
    docs: list[LabeledDoc] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            label, sep, text = line.partition("\t")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected <label>\\t<text>")
            docs.append(LabeledDoc(f"line-{lineno}", tokenize(text), label.strip()))
    return docs


def train(docs: list[LabeledDoc], taxonomy: list[str], alpha: float = 1.0) -> NBModel:
    """Fit priors and smoothed token likelihoods.

    Every taxonomy class must appear in the training data
    (:class:`EmptyClass` lists the ones that do not), and alpha must be
    strictly positive.
    """
    if not (isinstance(alpha, (int, float)) and alpha > 0 and math.isfinite(alpha)):
        raise InvalidAlpha(f"alpha must be a finite number > 0, got {alpha!r}")
    classes = list(taxonomy)
    class_idx = {c: i for i, c in enumerate(classes)}
    for doc in docs:
        if doc.label not in class_idx:
            raise UnknownLabel(f"doc {doc.doc_id!r} labeled {doc.label!r}, not in taxonomy")

    doc_counts = [0] * len(classes)
    for doc in docs:
        doc_counts[class_idx[doc.label]] += 1
    empty = [c for c, n in zip(classes, doc_counts) if n == 0]
    if empty:
        raise EmptyClass(sorted(empty))

    vocab_tokens = sorted({t for doc in docs for t in doc.tokens})
    vocabulary = {t: i for i, t in enumerate(vocab_tokens)}

    counts = np.zeros((len(classes), len(vocabulary)), dtype=np.float64)
    for doc in docs:
        row = class_idx[doc.label]
        for token in doc.tokens:
            counts[row, vocabulary[token]] += 1.0

    total_docs = len(docs)
    class_log_prior = np.log(np.array(doc_counts, dtype=np.float64) / total_docs)
    class_totals = counts.sum(axis=1, keepdims=True)
    denom = class_totals + alpha * len(vocabulary)
    token_log_likelihood = np.log(counts + alpha) - np.log(denom)
    return NBModel(classes, vocabulary, float(alpha), class_log_prior, token_log_likelihood)


def predict(model: NBModel, tokens: list[str], threshold: float = 0.5) -> Prediction:
    """Posterior over classes for a token list.

    With no in-vocabulary tokens the posterior is exactly the class priors.
    Argmax ties resolve to the lexicographically smallest class id.
    """
    # Sorted so the float accumulation order, and thus the posterior, is
    # exactly invariant under permutation of the input tokens.
    indices = sorted(model.vocabulary[t] for t in tokens if t in model.vocabulary)
    if indices:
        scores = model.class_log_prior + model.token_log_likelihood[:, indices].sum(axis=1)
        shifted = scores - scores.max()
        weights = np.exp(shifted)
        probs = weights / weights.sum()
    else:
        probs = np.exp(model.class_log_prior)

    top = probs.max()
    label = min(c for c, p in zip(model.taxonomy, probs) if p == top)
    posterior = {c: float(p) for c, p in zip(model.taxonomy, probs)}
    return Prediction(label, posterior, float(top), bool(top < threshold))


def evaluate(model: NBModel, test: list[LabeledDoc]) -> EvaluationReport:
    """Accuracy, per-class precision/recall, and a confusion matrix.

    Abstention is disabled: every document receives its argmax label.
    """
    if not test:
        raise ValueError("test set is empty")
    known = set(model.taxonomy)
    for doc in test:
        if doc.label not in known:
            raise UnknownLabel(f"doc {doc.doc_id!r} labeled {doc.label!r}, not in taxonomy")

    confusion = {true: {pred: 0 for pred in model.taxonomy} for true in model.taxonomy}
    correct = 0
    for doc in test:
        pred = predict(model, doc.tokens, threshold=0.0)
        confusion[doc.label][pred.label] += 1
        if pred.label == doc.label:
            correct += 1

    per_class: dict[str, dict[str, float]] = {}
    for cls in model.taxonomy:
        tp = confusion[cls][cls]
        fn = sum(confusion[cls].values()) - tp
        fp = sum(confusion[other][cls] for other in model.taxonomy) - tp
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        per_class[cls] = {"precision": precision, "recall": recall}

    return EvaluationReport(correct / len(test), per_class, confusion, len(test))


# -- model persistence -----------------------------------------------------------


def _pack_str(value: str) -> bytes:
    raw = value.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


def save_model(model: NBModel) -> bytes:
    """Binary model file: magic, counts, alpha, names, then float64 arrays."""
    parts = [MODEL_MAGIC]
    c = len(model.taxonomy)
    v = len(model.vocabulary)
    parts.append(struct.pack("<IId", c, v, model.alpha))
    for cls in model.taxonomy:
        parts.append(_pack_str(cls))
    vocab_by_index = sorted(model.vocabulary, key=model.vocabulary.get)
    for token in vocab_by_index:
        parts.append(_pack_str(token))
    parts.append(np.ascontiguousarray(model.class_log_prior, dtype="<f8").tobytes())
    parts.append(np.ascontiguousarray(model.token_log_likelihood, dtype="<f8").tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise FormatError("truncated model file")
        chunk = self.blob[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def take_str(self) -> str:
        (length,) = struct.unpack("<I", self.take(4))
        return self.take(length).decode("utf-8")


def load_model(blob: bytes) -> NBModel:
    """Inverse of :func:`save_model`; log values round-trip bit-exactly."""
    if len(blob) < len(MODEL_MAGIC) or blob[: len(MODEL_MAGIC)] != MODEL_MAGIC:
        raise FormatError("bad model magic")
    reader = _Reader(blob)
    reader.take(len(MODEL_MAGIC))
    c, v, alpha = struct.unpack("<IId", reader.take(16))
    taxonomy = [reader.take_str() for _ in range(c)]
    vocabulary = {reader.take_str(): i for i in range(v)}
    priors = np.frombuffer(reader.take(8 * c), dtype="<f8").copy()
    tll = np.frombuffer(reader.take(8 * c * v), dtype="<f8").reshape(c, v).copy()
    if reader.pos != len(blob):
        raise FormatError("trailing bytes after model payload")
    return NBModel(taxonomy, vocabulary, alpha, priors, tll)


def save_model_file(model: NBModel, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(save_model(model))


def load_model_file(path: str) -> NBModel:
    with open(path, "rb") as fh:
        return load_model(fh.read())
