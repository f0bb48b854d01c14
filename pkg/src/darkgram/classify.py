"""Two-stage post classification: activity gate, then category.

Stage 1 decides whether a post shares cybercriminal content; stage 2 assigns
one of the five channel categories. The built-in baseline is a deterministic
term-frequency linear scorer (multinomial counts, closed form, invariant to
training order); externally trained backends plug in through the artifact
directory contract and satisfy the same prediction interface.
"""

from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Protocol, Sequence

from darkgram.core import (
    BENIGN_LABEL,
    CANONICAL_LABELS,
    CacCategory,
    PostRecord,
)

_CA_LABEL = "CA"
_CATEGORY_LABELS = tuple(c.value for c in CacCategory)
_TOKEN_RE = re.compile(r"[a-z0-9]+")

ARTIFACT_FORMAT_VERSION = 1
BASELINE_BACKEND_ID = "baseline-linear"
TORCHSCRIPT_BACKEND_ID = "torchscript"


class CorpusError(ValueError):
    """Labeled corpus violates a precondition (labels, sizes, split)."""


class BackendUnavailableError(Exception):
    """Classification backend cannot serve predictions.

    ``transient`` distinguishes retryable failures from permanent ones.
    """

    def __init__(self, message: str, transient: bool) -> None:
        super().__init__(message)
        self.transient = transient


class ArtifactError(Exception):
    """Model artifact directory violates the loading contract."""


class ArtifactMissingFileError(ArtifactError):
    pass


class ArtifactLabelMismatchError(ArtifactError):
    pass


class ArtifactVersionError(ArtifactError):
    pass


class UnsupportedBackendError(ArtifactError):
    pass


# ---------------------------------------------------------------------------
# Features

def featurize(text: str, attachment_names: Sequence[str] = ()) -> tuple[str, ...]:
    """Lowercased word tokens of ``text``; filename tokens are appended when
    the text carries fewer than three tokens (filename-only posts)."""
    tokens = _TOKEN_RE.findall(text.lower())
    if len(tokens) < 3:
        for name in attachment_names:
            tokens.extend(_TOKEN_RE.findall(name.lower()))
    return tuple(tokens)


# ---------------------------------------------------------------------------
# Results and corpora

@dataclass(frozen=True)
class ClassificationResult:
    is_ca: bool
    category: Optional[CacCategory]
    confidence: Mapping[str, float]
    backend_id: str

    def __post_init__(self) -> None:
        if self.is_ca and self.category is None:
            raise ValueError("category required when is_ca")
        if not self.is_ca and self.category is not None:
            raise ValueError("category must be absent when not is_ca")

    def to_dict(self) -> dict:
        return {
            "is_ca": self.is_ca,
            "category": self.category.value if self.category else None,
            "confidence": dict(self.confidence),
            "backend_id": self.backend_id,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ClassificationResult":
        category = data.get("category")
        return cls(
            is_ca=bool(data["is_ca"]),
            category=CacCategory(category) if category else None,
            confidence=dict(data.get("confidence", {})),
            backend_id=data.get("backend_id", ""),
        )


@dataclass(frozen=True)
class CorpusSplit:
    train: frozenset[int]
    test: frozenset[int]


@dataclass(frozen=True)
class LabeledCorpus:
    """Labeled texts over the six canonical labels, with an optional split."""

    items: tuple[tuple[str, str], ...]
    split: Optional[CorpusSplit] = None

    def __post_init__(self) -> None:
        for _, label in self.items:
            if label not in CANONICAL_LABELS:
                raise CorpusError(f"unknown label {label!r}")
        if self.split is not None:
            universe = set(range(len(self.items)))
            if self.split.train & self.split.test:
                raise CorpusError("train/test overlap")
            if (self.split.train | self.split.test) != universe:
                raise CorpusError("split does not cover all items")

    def subset(self, indices: Iterable[int]) -> "LabeledCorpus":
        return LabeledCorpus(tuple(self.items[i] for i in sorted(indices)))

    def train_view(self) -> "LabeledCorpus":
        return self.subset(self.split.train) if self.split else self

    def test_view(self) -> "LabeledCorpus":
        return self.subset(self.split.test) if self.split else self


def stratified_split(corpus: LabeledCorpus, ratio: float, seed: int) -> LabeledCorpus:
    """Per-label split at ``ratio`` train share with a seeded shuffle."""
    if not 0.0 < ratio < 1.0:
        raise CorpusError("split ratio must be in (0, 1)")
    rng = random.Random(seed)
    by_label: dict[str, list[int]] = {}
    for i, (_, label) in enumerate(corpus.items):
        by_label.setdefault(label, []).append(i)
    train: set[int] = set()
    for label in sorted(by_label):
        indices = by_label[label]
        rng.shuffle(indices)
        cut = int(round(len(indices) * ratio))
        train.update(indices[:cut])
    test = set(range(len(corpus.items))) - train
    return LabeledCorpus(corpus.items, CorpusSplit(frozenset(train), frozenset(test)))


def load_corpus(path: str | Path) -> LabeledCorpus:
    """Read a corpus from JSONL lines of {"text": ..., "label": ...}."""
    items = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                data = json.loads(line)
                items.append((data["text"], data["label"]))
    return LabeledCorpus(tuple(items))


# ---------------------------------------------------------------------------
# Baseline model

class ClassifierBackend(Protocol):
    backend_id: str

    def predict(self, tokens: Sequence[str]) -> ClassificationResult:
        ...


def _benign_result(backend_id: str) -> ClassificationResult:
    return ClassificationResult(
        is_ca=False,
        category=None,
        confidence={BENIGN_LABEL: 1.0, _CA_LABEL: 0.0},
        backend_id=backend_id,
    )


class _TermScorer:
    """Per-class linear scores over term frequencies (smoothed log counts)."""

    def __init__(
        self,
        labels: tuple[str, ...],
        log_prior: dict[str, float],
        token_log_prob: dict[str, dict[str, float]],
        unseen_log_prob: dict[str, float],
    ) -> None:
        self.labels = labels
        self.log_prior = log_prior
        self.token_log_prob = token_log_prob
        self.unseen_log_prob = unseen_log_prob
        self._vocab = frozenset(t for table in token_log_prob.values() for t in table)

    def log_scores(self, tokens: Sequence[str]) -> dict[str, float]:
        scores = {}
        for label in self.labels:
            table = self.token_log_prob[label]
            unseen = self.unseen_log_prob[label]
            score = self.log_prior[label]
            for token in tokens:
                if token in self._vocab:
                    score += table.get(token, unseen)
            scores[label] = score
        return scores

    def probabilities(self, tokens: Sequence[str]) -> dict[str, float]:
        scores = self.log_scores(tokens)
        peak = max(scores.values())
        exps = {label: math.exp(s - peak) for label, s in scores.items()}
        total = sum(exps[label] for label in self.labels)
        return {label: exps[label] / total for label in self.labels}

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "log_prior": self.log_prior,
            "token_log_prob": self.token_log_prob,
            "unseen_log_prob": self.unseen_log_prob,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "_TermScorer":
        return cls(
            labels=tuple(data["labels"]),
            log_prior=dict(data["log_prior"]),
            token_log_prob={k: dict(v) for k, v in data["token_log_prob"].items()},
            unseen_log_prob=dict(data["unseen_log_prob"]),
        )


def _fit_scorer(examples: Sequence[tuple[tuple[str, ...], str]], labels: Sequence[str]) -> _TermScorer:
    doc_counts = {label: 0 for label in labels}
    token_counts: dict[str, dict[str, int]] = {label: {} for label in labels}
    for tokens, label in examples:
        doc_counts[label] += 1
        table = token_counts[label]
        for token in tokens:
            table[token] = table.get(token, 0) + 1
    vocab = sorted({t for table in token_counts.values() for t in table})
    total_docs = sum(doc_counts.values())
    log_prior = {label: math.log(doc_counts[label] / total_docs) for label in labels}
    token_log_prob: dict[str, dict[str, float]] = {}
    unseen_log_prob: dict[str, float] = {}
    v = len(vocab)
    for label in labels:
        total = sum(token_counts[label].values())
        denominator = total + v + 1
        table = {}
        for token in vocab:
            count = token_counts[label].get(token, 0)
            if count:
                table[token] = math.log((count + 1) / denominator)
        token_log_prob[label] = table
        unseen_log_prob[label] = math.log(1.0 / denominator)
    return _TermScorer(tuple(labels), log_prior, token_log_prob, unseen_log_prob)


@dataclass(frozen=True)
class BaselineModel:
    """Deterministic two-stage term-frequency classifier.

    Training is count-based, so the fitted model is a pure function of the
    multiset of training examples: reordering the corpus cannot change
    predictions. ``seed`` is recorded for artifact provenance only.
    """

    gate: _TermScorer
    categories: _TermScorer
    seed: int
    gate_threshold: float = 0.5
    backend_id: str = BASELINE_BACKEND_ID

    def predict(self, tokens: Sequence[str]) -> ClassificationResult:
        if not tokens:
            return _benign_result(self.backend_id)
        gate_probs = self.gate.probabilities(tokens)
        p_ca = gate_probs[_CA_LABEL]
        confidence = {BENIGN_LABEL: gate_probs[BENIGN_LABEL], _CA_LABEL: p_ca}
        if p_ca < self.gate_threshold:
            return ClassificationResult(False, None, confidence, self.backend_id)
        cat_probs = self.categories.probabilities(tokens)
        confidence.update(cat_probs)
        category = _argmax_category(cat_probs)
        return ClassificationResult(True, category, confidence, self.backend_id)


def _argmax_category(probs: Mapping[str, float]) -> CacCategory:
    best = None
    best_p = -1.0
    for label in _CATEGORY_LABELS:  # ties resolve to declaration order
        p = probs.get(label, 0.0)
        if p > best_p:
            best, best_p = label, p
    return CacCategory(best)


def train_baseline(corpus: LabeledCorpus, seed: int) -> BaselineModel:
    """Fit the baseline on the corpus train view (whole corpus if unsplit).

    Every one of the six labels must contribute at least two examples.
    """
    train = corpus.train_view()
    counts = {label: 0 for label in CANONICAL_LABELS}
    for _, label in train.items:
        counts[label] += 1
    for label, count in counts.items():
        if count < 2:
            raise CorpusError(f"label {label!r} has {count} examples; need >= 2")
    gate_examples = []
    category_examples = []
    for text, label in train.items:
        tokens = featurize(text)
        if label == BENIGN_LABEL:
            gate_examples.append((tokens, BENIGN_LABEL))
        else:
            gate_examples.append((tokens, _CA_LABEL))
            category_examples.append((tokens, label))
    gate = _fit_scorer(gate_examples, (BENIGN_LABEL, _CA_LABEL))
    categories = _fit_scorer(category_examples, _CATEGORY_LABELS)
    return BaselineModel(gate=gate, categories=categories, seed=seed)


def classify_post(model: ClassifierBackend, post: PostRecord) -> ClassificationResult:
    """Classify one post; filename tokens stand in for sparse text."""
    tokens = featurize(post.text, [a.filename for a in post.attachments])
    if not tokens:
        return _benign_result(model.backend_id)
    return model.predict(tokens)


def classify_text(model: ClassifierBackend, text: str) -> ClassificationResult:
    tokens = featurize(text)
    if not tokens:
        return _benign_result(model.backend_id)
    return model.predict(tokens)


# ---------------------------------------------------------------------------
# Metrics

@dataclass(frozen=True)
class MetricsRow:
    label: str
    accuracy: float
    precision: float
    recall: float
    f1: float

    def __post_init__(self) -> None:
        for name in ("accuracy", "precision", "recall", "f1"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} out of [0,1]: {value}")
        expect = _harmonic(self.precision, self.recall)
        if abs(self.f1 - expect) > 1e-9:
            raise ValueError("f1 is not the harmonic mean of precision and recall")


def _harmonic(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


@dataclass(frozen=True)
class MetricsTable:
    rows: tuple[MetricsRow, ...]

    def row(self, label: str) -> MetricsRow:
        for row in self.rows:
            if row.label == label:
                return row
        raise KeyError(label)

    def to_csv(self) -> str:
        lines = ["Category,Accuracy,Precision,Recall,F1-score"]
        for row in self.rows:
            lines.append(
                f"{row.label},{row.accuracy:.4f},{row.precision:.4f},{row.recall:.4f},{row.f1:.4f}"
            )
        return "\n".join(lines) + "\n"


def _predict_label(model: ClassifierBackend, text: str) -> str:
    result = classify_text(model, text)
    return result.category.value if result.is_ca else BENIGN_LABEL


def evaluate(model: ClassifierBackend, test: LabeledCorpus) -> MetricsTable:
    """Per-category one-vs-rest rows plus an overall row.

    The overall row reports exact-match accuracy of the joint two-stage
    prediction, with precision/recall macro-averaged over the five category
    rows (gate-only metrics are available via `evaluate_gate`).
    """
    items = test.test_view().items
    if not items:
        raise CorpusError("test corpus is empty")
    pairs = [(label, _predict_label(model, text)) for text, label in items]
    n = len(pairs)
    rows = []
    for label in _CATEGORY_LABELS:
        tp = sum(1 for t, p in pairs if t == label and p == label)
        fp = sum(1 for t, p in pairs if t != label and p == label)
        fn = sum(1 for t, p in pairs if t == label and p != label)
        tn = n - tp - fp - fn
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        rows.append(MetricsRow(label, (tp + tn) / n, precision, recall, _harmonic(precision, recall)))
    macro_p = sum(r.precision for r in rows) / len(rows)
    macro_r = sum(r.recall for r in rows) / len(rows)
    exact = sum(1 for t, p in pairs if t == p) / n
    rows.append(MetricsRow("Overall", exact, macro_p, macro_r, _harmonic(macro_p, macro_r)))
    return MetricsTable(tuple(rows))


def evaluate_gate(model: ClassifierBackend, test: LabeledCorpus) -> MetricsRow:
    """Binary metrics of stage 1 alone (positive class: activity post)."""
    items = test.test_view().items
    if not items:
        raise CorpusError("test corpus is empty")
    tp = fp = fn = tn = 0
    for text, label in items:
        truth = label != BENIGN_LABEL
        predicted = classify_text(model, text).is_ca
        if truth and predicted:
            tp += 1
        elif truth:
            fn += 1
        elif predicted:
            fp += 1
        else:
            tn += 1
    n = tp + fp + fn + tn
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return MetricsRow("Gate", (tp + tn) / n, precision, recall, _harmonic(precision, recall))


def macro_f1(table: MetricsTable) -> float:
    rows = [r for r in table.rows if r.label in _CATEGORY_LABELS]
    return sum(r.f1 for r in rows) / len(rows)


# ---------------------------------------------------------------------------
# Artifact directory contract

def save_baseline(model: BaselineModel, artifact_dir: str | Path) -> Path:
    """Write model.bin, tokenizer.json, and manifest.json for later loading."""
    out = Path(artifact_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "gate": model.gate.to_dict(),
        "categories": model.categories.to_dict(),
        "gate_threshold": model.gate_threshold,
        "seed": model.seed,
    }
    (out / "model.bin").write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")
    tokenizer = {"type": "wordlevel-regex", "pattern": _TOKEN_RE.pattern, "lowercase": True}
    (out / "tokenizer.json").write_text(json.dumps(tokenizer, sort_keys=True), encoding="utf-8")
    manifest = {
        "format_version": ARTIFACT_FORMAT_VERSION,
        "backend_id": BASELINE_BACKEND_ID,
        "labels": list(CANONICAL_LABELS),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True), encoding="utf-8")
    return out


def _read_artifact_file(root: Path, name: str) -> str:
    path = root / name
    if not path.is_file():
        raise ArtifactMissingFileError(f"artifact is missing {name}")
    return path.read_text(encoding="utf-8")


def load_external_backend(artifact_dir: str | Path) -> ClassifierBackend:
    """Load a model artifact directory into a prediction backend.

    Distinct errors: missing files, label-order mismatch, format-version
    mismatch, and unsupported backend ids.
    """
    root = Path(artifact_dir)
    if not root.is_dir():
        raise ArtifactMissingFileError(f"artifact directory not found: {root}")
    manifest = json.loads(_read_artifact_file(root, "manifest.json"))
    version = manifest.get("format_version")
    if version != ARTIFACT_FORMAT_VERSION:
        raise ArtifactVersionError(
            f"format_version {version!r} unsupported (expected {ARTIFACT_FORMAT_VERSION})"
        )
    labels = tuple(manifest.get("labels", ()))
    if labels != CANONICAL_LABELS:
        raise ArtifactLabelMismatchError(
            f"label order {list(labels)} != canonical {list(CANONICAL_LABELS)}"
        )
    backend_id = manifest.get("backend_id")
    tokenizer = json.loads(_read_artifact_file(root, "tokenizer.json"))
    model_bytes_present = (root / "model.bin").is_file()
    if not model_bytes_present:
        raise ArtifactMissingFileError("artifact is missing model.bin")
    if backend_id == BASELINE_BACKEND_ID:
        payload = json.loads(_read_artifact_file(root, "model.bin"))
        return BaselineModel(
            gate=_TermScorer.from_dict(payload["gate"]),
            categories=_TermScorer.from_dict(payload["categories"]),
            seed=int(payload.get("seed", 0)),
            gate_threshold=float(payload.get("gate_threshold", 0.5)),
        )
    if backend_id == TORCHSCRIPT_BACKEND_ID:
        return TorchscriptBackend(root, tokenizer, manifest)
    raise UnsupportedBackendError(f"unsupported backend_id {backend_id!r}")


class TorchscriptBackend:
    """Serialized-inference-graph backend (token ids in, six-way logits out)."""

    backend_id = TORCHSCRIPT_BACKEND_ID

    def __init__(self, root: Path, tokenizer: Mapping, manifest: Mapping) -> None:
        try:
            import torch
        except ImportError as exc:  # torch is an optional extra
            raise BackendUnavailableError(
                "torch runtime is required for torchscript artifacts", transient=False
            ) from exc
        self._torch = torch
        self._module = torch.jit.load(str(root / "model.bin"), map_location="cpu")
        self._module.eval()
        self._vocab: dict[str, int] = dict(tokenizer["vocab"])
        self._unk_id = int(tokenizer["unk_id"])
        self._pad_id = int(tokenizer.get("pad_id", 0))
        self._max_len = int(tokenizer.get("max_len", 128))
        self._gate_threshold = float(manifest.get("gate_threshold", 0.5))

    def predict(self, tokens: Sequence[str]) -> ClassificationResult:
        if not tokens:
            return _benign_result(self.backend_id)
        ids = [self._vocab.get(t, self._unk_id) for t in tokens][: self._max_len]
        ids += [self._pad_id] * (self._max_len - len(ids))  # graph expects fixed length
        torch = self._torch
        with torch.no_grad():
            logits = self._module(torch.tensor([ids], dtype=torch.long))
            probs = torch.softmax(logits[0], dim=-1).tolist()
        by_label = dict(zip(CANONICAL_LABELS, probs))
        p_benign = by_label[BENIGN_LABEL]
        p_ca = 1.0 - p_benign
        confidence = {BENIGN_LABEL: p_benign, _CA_LABEL: p_ca}
        if p_ca < self._gate_threshold:
            return ClassificationResult(False, None, confidence, self.backend_id)
        cat_total = sum(by_label[c] for c in _CATEGORY_LABELS)
        cat_probs = {c: by_label[c] / cat_total for c in _CATEGORY_LABELS}
        confidence.update(cat_probs)
        return ClassificationResult(True, _argmax_category(cat_probs), confidence, self.backend_id)
