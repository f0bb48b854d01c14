"""Transformer trainer and artifact exporter for the darkgram pipeline."""

from darkgram_trainer.manifest import CANONICAL_LABELS, TrainingManifest

__version__ = "0.1.0"

__all__ = ["CANONICAL_LABELS", "TrainingManifest"]
