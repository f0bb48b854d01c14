"""Training manifest: everything a run needs, in one JSON file."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

CANONICAL_LABELS = (
    "Benign",
    "CredentialCompromise",
    "PiratedSoftware",
    "BlackhatResources",
    "PiratedMedia",
    "SocialMediaManipulation",
)


class ManifestError(ValueError):
    pass


@dataclass
class TrainingManifest:
    corpus: str
    export_dir: str
    work_dir: str
    split_ratio: float = 0.70
    seed: int = 7
    labels: tuple[str, ...] = CANONICAL_LABELS
    epochs: int = 12
    # model/tokenizer hyperparameters; recorded in the exported manifest,
    # never asserted by tests
    max_len: int = 64
    embed_dim: int = 64
    heads: int = 2
    layers: int = 2
    feedforward_dim: int = 128
    learning_rate: float = 1e-3
    batch_size: int = 32
    vocab_limit: int = 20000
    n_probes: int = 50

    def __post_init__(self) -> None:
        if not 0.0 < self.split_ratio < 1.0:
            raise ManifestError("split_ratio must be in (0, 1)")
        self.labels = tuple(self.labels)
        if self.labels != CANONICAL_LABELS:
            raise ManifestError(
                f"label order {list(self.labels)} != canonical {list(CANONICAL_LABELS)}"
            )
        if self.epochs < 1:
            raise ManifestError("epochs must be >= 1")

    @classmethod
    def load(cls, path: str | Path) -> "TrainingManifest":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        try:
            return cls(**data)
        except TypeError as exc:
            raise ManifestError(str(exc)) from exc

    def save(self, path: str | Path) -> None:
        payload = asdict(self)
        payload["labels"] = list(self.labels)
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")

    @property
    def train_path(self) -> Path:
        return Path(self.work_dir) / "train.jsonl"

    @property
    def test_path(self) -> Path:
        return Path(self.work_dir) / "test.jsonl"
