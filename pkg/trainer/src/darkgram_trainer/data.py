"""Dataset preparation: dedup, stratified split, tokenization, vocab."""

from __future__ import annotations

import json
import random
import re
from pathlib import Path
from typing import Iterable, Sequence

from darkgram_trainer.manifest import ManifestError, TrainingManifest

# Must match the deployment tokenizer exactly: the inference side rebuilds
# token streams from this same pattern on lowercased text.
TOKEN_PATTERN = r"[a-z0-9]+"
_TOKEN_RE = re.compile(TOKEN_PATTERN)

PAD_ID = 0
UNK_ID = 1


class DatasetError(ValueError):
    pass


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def read_labeled_jsonl(path: str | Path) -> list[tuple[str, str]]:
    items = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                row = json.loads(line)
                items.append((row["text"], row["label"]))
    return items


def write_labeled_jsonl(items: Iterable[tuple[str, str]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for text, label in items:
            fh.write(json.dumps({"text": text, "label": label}, ensure_ascii=False) + "\n")


def dedup_exact(items: Sequence[tuple[str, str]]) -> list[tuple[str, str]]:
    """Drop exact-duplicate texts, keeping the first occurrence (its label wins)."""
    seen: set[str] = set()
    out = []
    for text, label in items:
        if text in seen:
            continue
        seen.add(text)
        out.append((text, label))
    return out


def prepare_dataset(raw_path: str | Path, manifest: TrainingManifest) -> tuple[Path, Path]:
    """Deduplicate, stratify-split, and write train/test files.

    Every label must keep at least two examples after deduplication; the
    split is a per-label cut at ``split_ratio`` after a seeded shuffle, so a
    text can never land in both files.
    """
    items = dedup_exact(read_labeled_jsonl(raw_path))
    if not items:
        raise DatasetError("corpus is empty")
    by_label: dict[str, list[tuple[str, str]]] = {}
    for text, label in items:
        if label not in manifest.labels:
            raise DatasetError(f"unknown label {label!r}")
        by_label.setdefault(label, []).append((text, label))
    for label in manifest.labels:
        if len(by_label.get(label, ())) < 2:
            raise DatasetError(f"label {label!r} has fewer than 2 examples after dedup")
    rng = random.Random(manifest.seed)
    train: list[tuple[str, str]] = []
    test: list[tuple[str, str]] = []
    for label in manifest.labels:
        group = by_label[label]
        rng.shuffle(group)
        cut = int(round(len(group) * manifest.split_ratio))
        cut = min(max(cut, 1), len(group) - 1)  # both sides stay non-empty
        train.extend(group[:cut])
        test.extend(group[cut:])
    rng.shuffle(train)
    rng.shuffle(test)
    Path(manifest.work_dir).mkdir(parents=True, exist_ok=True)
    write_labeled_jsonl(train, manifest.train_path)
    write_labeled_jsonl(test, manifest.test_path)
    return manifest.train_path, manifest.test_path


def build_vocab(texts: Iterable[str], limit: int) -> dict[str, int]:
    """Word-level vocabulary by descending frequency (ties alphabetical).

    Ids 0 and 1 are reserved for padding and unknown tokens.
    """
    counts: dict[str, int] = {}
    for text in texts:
        for token in tokenize(text):
            counts[token] = counts.get(token, 0) + 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[: max(0, limit - 2)]
    vocab = {"[PAD]": PAD_ID, "[UNK]": UNK_ID}
    for i, (token, _) in enumerate(ranked, start=2):
        vocab[token] = i
    return vocab


def encode(text: str, vocab: dict[str, int], max_len: int) -> list[int]:
    ids = [vocab.get(token, UNK_ID) for token in tokenize(text)][:max_len]
    if not ids:
        ids = [UNK_ID]
    return ids + [PAD_ID] * (max_len - len(ids))
