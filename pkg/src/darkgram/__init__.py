"""Detection-and-disclosure pipeline for cybercriminal activity channels."""

from darkgram.core import (
    AttachmentKind,
    AttachmentMeta,
    CacCategory,
    CANONICAL_LABELS,
    ChannelRecord,
    EngagementSnapshot,
    PipelineConfig,
    PostRecord,
    SourceKind,
    validate_record,
)

__version__ = "0.1.0"

__all__ = [
    "AttachmentKind",
    "AttachmentMeta",
    "CacCategory",
    "CANONICAL_LABELS",
    "ChannelRecord",
    "EngagementSnapshot",
    "PipelineConfig",
    "PostRecord",
    "SourceKind",
    "validate_record",
]
