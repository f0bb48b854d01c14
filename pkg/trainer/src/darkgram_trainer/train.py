"""Training, held-out evaluation, and portable artifact export.

The exported directory follows the pipeline's loading contract: a TorchScript
inference graph (model.bin), a word-level tokenizer description
(tokenizer.json), and manifest.json naming the backend, format version, and
canonical label order. probe_predictions.json records this trainer's own
predictions on a fixed probe set so the consumer side can verify an exact
round trip.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import torch

from darkgram_trainer import gen_corpus
from darkgram_trainer.data import (
    PAD_ID,
    TOKEN_PATTERN,
    UNK_ID,
    build_vocab,
    encode,
    read_labeled_jsonl,
)
from darkgram_trainer.manifest import CANONICAL_LABELS, ManifestError, TrainingManifest
from darkgram_trainer.model import PostEncoder

ARTIFACT_FORMAT_VERSION = 1
BACKEND_ID = "torchscript"
GATE_THRESHOLD = 0.5


class ExportError(RuntimeError):
    pass


def _set_determinism(seed: int) -> None:
    torch.manual_seed(seed)
    torch.set_num_threads(1)
    try:
        torch.backends.mha.set_fastpath_enabled(False)
    except AttributeError:
        pass


def decide_label(probs: Sequence[float]) -> str:
    """Two-stage deployment rule: benign unless the combined activity mass
    reaches the gate threshold, then argmax over the five categories."""
    p_benign = probs[0]
    if 1.0 - p_benign < GATE_THRESHOLD:
        return CANONICAL_LABELS[0]
    best_index = 1
    for i in range(2, len(CANONICAL_LABELS)):
        if probs[i] > probs[best_index]:
            best_index = i
    return CANONICAL_LABELS[best_index]


def _predict_labels(module, texts: Sequence[str], vocab, max_len: int, batch_size: int = 128):
    labels = []
    with torch.no_grad():
        for start in range(0, len(texts), batch_size):
            chunk = texts[start : start + batch_size]
            ids = torch.tensor([encode(t, vocab, max_len) for t in chunk], dtype=torch.long)
            probs = torch.softmax(module(ids), dim=-1).tolist()
            labels.extend(decide_label(p) for p in probs)
    return labels


@dataclass(frozen=True)
class HeldOutMetrics:
    rows: tuple[tuple[str, float, float, float, float], ...]  # label, acc, p, r, f1

    @property
    def macro_f1(self) -> float:
        category_rows = [r for r in self.rows if r[0] not in ("Overall",)]
        return sum(r[4] for r in category_rows) / len(category_rows)

    def to_csv(self) -> str:
        lines = ["Category,Accuracy,Precision,Recall,F1-score"]
        for label, acc, precision, recall, f1 in self.rows:
            lines.append(f"{label},{acc:.4f},{precision:.4f},{recall:.4f},{f1:.4f}")
        return "\n".join(lines) + "\n"


def _harmonic(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def compute_metrics(truths: Sequence[str], predictions: Sequence[str]) -> HeldOutMetrics:
    """Per-category one-vs-rest rows plus an exact-match overall row."""
    n = len(truths)
    rows = []
    categories = CANONICAL_LABELS[1:]
    for label in categories:
        tp = sum(1 for t, p in zip(truths, predictions) if t == label and p == label)
        fp = sum(1 for t, p in zip(truths, predictions) if t != label and p == label)
        fn = sum(1 for t, p in zip(truths, predictions) if t == label and p != label)
        tn = n - tp - fp - fn
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        rows.append((label, (tp + tn) / n, precision, recall, _harmonic(precision, recall)))
    macro_p = sum(r[2] for r in rows) / len(rows)
    macro_r = sum(r[3] for r in rows) / len(rows)
    exact = sum(1 for t, p in zip(truths, predictions) if t == p) / n
    rows.append(("Overall", exact, macro_p, macro_r, _harmonic(macro_p, macro_r)))
    return HeldOutMetrics(tuple(rows))


def train_model(manifest: TrainingManifest) -> tuple[PostEncoder, dict[str, int]]:
    """Fit the encoder on the prepared train split; fully seed-deterministic."""
    train_items = read_labeled_jsonl(manifest.train_path)
    if not train_items:
        raise ExportError(f"prepared train split not found or empty: {manifest.train_path}")
    _set_determinism(manifest.seed)
    vocab = build_vocab((text for text, _ in train_items), manifest.vocab_limit)
    label_index = {label: i for i, label in enumerate(manifest.labels)}
    x = torch.tensor(
        [encode(text, vocab, manifest.max_len) for text, _ in train_items], dtype=torch.long
    )
    y = torch.tensor([label_index[label] for _, label in train_items], dtype=torch.long)

    model = PostEncoder(
        vocab_size=len(vocab),
        n_classes=len(manifest.labels),
        max_len=manifest.max_len,
        embed_dim=manifest.embed_dim,
        heads=manifest.heads,
        layers=manifest.layers,
        feedforward_dim=manifest.feedforward_dim,
        pad_id=PAD_ID,
    )
    optimizer = torch.optim.Adam(model.parameters(), lr=manifest.learning_rate)
    loss_fn = torch.nn.CrossEntropyLoss()
    shuffler = torch.Generator().manual_seed(manifest.seed)
    model.train()
    for _ in range(manifest.epochs):
        order = torch.randperm(len(train_items), generator=shuffler)
        for start in range(0, len(order), manifest.batch_size):
            batch = order[start : start + manifest.batch_size]
            optimizer.zero_grad()
            loss = loss_fn(model(x[batch]), y[batch])
            loss.backward()
            optimizer.step()
    model.eval()
    return model, vocab


def train_and_export(manifest: TrainingManifest) -> Path:
    """Train, evaluate the held-out split, and write the artifact directory.

    The artifact contract is validated before anything is written; a label
    order differing from the canonical six aborts the export.
    """
    if tuple(manifest.labels) != CANONICAL_LABELS:
        raise ManifestError("artifact label order must equal the canonical six labels")
    model, vocab = train_model(manifest)

    example = torch.tensor(
        [encode("artifact trace example", vocab, manifest.max_len)], dtype=torch.long
    )
    traced = torch.jit.trace(model, example)

    test_items = read_labeled_jsonl(manifest.test_path)
    if not test_items:
        raise ExportError(f"prepared test split not found or empty: {manifest.test_path}")
    predictions = _predict_labels(traced, [t for t, _ in test_items], vocab, manifest.max_len)
    metrics = compute_metrics([label for _, label in test_items], predictions)

    probe_texts = gen_corpus.probe_texts(manifest.n_probes, seed=manifest.seed + 1000)
    probe_predictions = _predict_labels(traced, probe_texts, vocab, manifest.max_len)

    export_dir = Path(manifest.export_dir)
    export_dir.mkdir(parents=True, exist_ok=True)
    traced.save(str(export_dir / "model.bin"))
    tokenizer = {
        "type": "wordlevel",
        "pattern": TOKEN_PATTERN,
        "lowercase": True,
        "vocab": vocab,
        "pad_id": PAD_ID,
        "unk_id": UNK_ID,
        "max_len": manifest.max_len,
    }
    (export_dir / "tokenizer.json").write_text(
        json.dumps(tokenizer, sort_keys=True), encoding="utf-8"
    )
    artifact_manifest = {
        "format_version": ARTIFACT_FORMAT_VERSION,
        "backend_id": BACKEND_ID,
        "labels": list(CANONICAL_LABELS),
        "gate_threshold": GATE_THRESHOLD,
        "training": {
            "seed": manifest.seed,
            "epochs": manifest.epochs,
            "learning_rate": manifest.learning_rate,
            "max_len": manifest.max_len,
            "embed_dim": manifest.embed_dim,
            "heads": manifest.heads,
            "layers": manifest.layers,
            "feedforward_dim": manifest.feedforward_dim,
            "batch_size": manifest.batch_size,
        },
    }
    (export_dir / "manifest.json").write_text(
        json.dumps(artifact_manifest, sort_keys=True, indent=2), encoding="utf-8"
    )
    (export_dir / "metrics.csv").write_text(metrics.to_csv(), encoding="utf-8")
    (export_dir / "probe_predictions.json").write_text(
        json.dumps(
            {"items": [{"text": t, "prediction": p} for t, p in zip(probe_texts, probe_predictions)]},
            sort_keys=True,
            indent=1,
            ensure_ascii=False,
        ),
        encoding="utf-8",
    )
    return export_dir
