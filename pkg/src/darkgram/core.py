"""Domain types, pipeline configuration, validation, and JSONL codecs.

All record types are immutable value objects (frozen dataclasses with tuple
fields), safe to share across threads. Timestamps are UTC epoch seconds.
The canonical on-disk encoding is one JSON object per line (JSONL) with
snake_case field names; `encode_record` / `decode_record` are exact inverses
for every valid record.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Any, Iterable, Mapping, Optional, Type, Union


class CacCategory(str, Enum):
    """The five categories of cybercriminal activity channels."""

    CredentialCompromise = "CredentialCompromise"
    PiratedSoftware = "PiratedSoftware"
    BlackhatResources = "BlackhatResources"
    PiratedMedia = "PiratedMedia"
    SocialMediaManipulation = "SocialMediaManipulation"


#: Benign gate label followed by the five categories in declaration order.
#: This ordering is the wire contract for model artifacts and metrics rows.
BENIGN_LABEL = "Benign"
CANONICAL_LABELS: tuple[str, ...] = (BENIGN_LABEL,) + tuple(c.value for c in CacCategory)


class SourceKind(str, Enum):
    Replay = "Replay"
    Live = "Live"
    ExternalLinkSource = "ExternalLinkSource"


class AttachmentKind(str, Enum):
    Document = "Document"
    Archive = "Archive"
    Executable = "Executable"
    Media = "Media"
    Other = "Other"


@dataclass(frozen=True)
class AttachmentMeta:
    """Metadata of one post attachment.

    ``content_digest`` may be present only for executables submitted to
    scanning; credential payload files are never downloaded or hashed.
    """

    filename: str
    size_bytes: int
    kind: AttachmentKind
    content_digest: Optional[str] = None


@dataclass(frozen=True)
class ChannelRecord:
    channel_id: str
    title: str
    description: str
    created_at: int
    replies_enabled: bool
    category: Optional[CacCategory] = None
    source_kind: SourceKind = SourceKind.Replay


@dataclass(frozen=True)
class PostRecord:
    """One broadcast post, as seen at a particular refresh."""

    channel_id: str
    post_id: int
    posted_at: int
    text: str
    attachments: tuple[AttachmentMeta, ...] = ()
    links: tuple[str, ...] = ()
    bot_refs: tuple[str, ...] = ()
    views: int = 0
    forwards: int = 0
    reactions: Mapping[str, int] = field(default_factory=dict)
    replies: tuple[str, ...] = ()
    refresh_seq: int = 0


@dataclass(frozen=True)
class EngagementSnapshot:
    channel_id: str
    taken_at: int
    subscribers: int


@dataclass(frozen=True)
class PipelineConfig:
    """Every quantitative rule of the pipeline in one place.

    Defaults: 600 s refresh cadence, two-engine URL rule, two-AV file rule,
    5-of-10 channel flagging, 10% view-to-download conversion, 10,000-entry
    large-leak bound, 7-day growth windows.
    """

    refresh_interval_s: int = 600
    url_engine_threshold: int = 2
    file_av_threshold: int = 2
    channel_flag_threshold: int = 5
    channel_eval_posts: int = 10
    conversion_rate: float = 0.10
    large_leak_threshold: int = 10000
    growth_window_days: int = 7

    def __post_init__(self) -> None:
        for name in (
            "refresh_interval_s",
            "url_engine_threshold",
            "file_av_threshold",
            "channel_flag_threshold",
            "channel_eval_posts",
            "large_leak_threshold",
            "growth_window_days",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0.0 <= self.conversion_rate <= 1.0:
            raise ValueError("conversion_rate must be in [0, 1]")
        if self.channel_flag_threshold > self.channel_eval_posts:
            raise ValueError("channel_flag_threshold must be <= channel_eval_posts")


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def _validate_attachment(att: AttachmentMeta, out: list[str]) -> None:
    if not att.filename:
        out.append("filename non-empty")
    if att.size_bytes < 0:
        out.append("size_bytes non-negative")
    if att.content_digest is not None:
        if att.kind is not AttachmentKind.Executable:
            out.append("content_digest only for executables")
        else:
            digest = att.content_digest
            if not digest or any(c not in "0123456789abcdef" for c in digest.lower()):
                out.append("content_digest must be a hex string")


def _validate_post(post: PostRecord, out: list[str]) -> None:
    if not post.channel_id:
        out.append("channel_id non-empty")
    if post.post_id < 0:
        out.append("post_id non-negative")
    if post.views < 0:
        out.append("views non-negative")
    if post.forwards < 0:
        out.append("forwards non-negative")
    if post.refresh_seq < 0:
        out.append("refresh_seq non-negative")
    for emoji, count in post.reactions.items():
        if count < 0:
            out.append(f"reactions[{emoji!r}] non-negative")
    for att in post.attachments:
        _validate_attachment(att, out)


def _validate_channel(channel: ChannelRecord, out: list[str]) -> None:
    if not channel.channel_id:
        out.append("channel_id non-empty")


def _validate_snapshot(snap: EngagementSnapshot, out: list[str]) -> None:
    if not snap.channel_id:
        out.append("channel_id non-empty")
    if snap.subscribers < 0:
        out.append("subscribers non-negative")


Record = Union[ChannelRecord, PostRecord, AttachmentMeta, EngagementSnapshot]


def validate_record(record: Record) -> ValidationResult:
    """Check a record against its type invariants.

    Returns an ok result or the list of violated invariants, each naming
    the offending field.
    """
    out: list[str] = []
    if isinstance(record, PostRecord):
        _validate_post(record, out)
    elif isinstance(record, ChannelRecord):
        _validate_channel(record, out)
    elif isinstance(record, AttachmentMeta):
        _validate_attachment(record, out)
    elif isinstance(record, EngagementSnapshot):
        _validate_snapshot(record, out)
    else:
        raise TypeError(f"unsupported record type: {type(record).__name__}")
    return ValidationResult(tuple(out))


# ---------------------------------------------------------------------------
# Serialization

_RECORD_TYPES: dict[str, type] = {}


def _encode_value(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, tuple):
        return [_encode_value(v) for v in value]
    if isinstance(value, Mapping):
        return {k: _encode_value(v) for k, v in value.items()}
    if hasattr(value, "__dataclass_fields__"):
        return record_to_dict(value)
    return value


def record_to_dict(record: Any) -> dict[str, Any]:
    """Encode a dataclass record into a plain JSON-compatible dict."""
    return {f.name: _encode_value(getattr(record, f.name)) for f in fields(record)}


def _decode_field(value: Any, typ: Any) -> Any:
    if value is None:
        return None
    if typ is CacCategory:
        return CacCategory(value)
    if typ is SourceKind:
        return SourceKind(value)
    if typ is AttachmentKind:
        return AttachmentKind(value)
    return value


def post_from_dict(data: Mapping[str, Any]) -> PostRecord:
    attachments = tuple(
        AttachmentMeta(
            filename=a["filename"],
            size_bytes=int(a["size_bytes"]),
            kind=AttachmentKind(a["kind"]),
            content_digest=a.get("content_digest"),
        )
        for a in data.get("attachments", [])
    )
    return PostRecord(
        channel_id=data["channel_id"],
        post_id=int(data["post_id"]),
        posted_at=int(data["posted_at"]),
        text=data.get("text", ""),
        attachments=attachments,
        links=tuple(data.get("links", [])),
        bot_refs=tuple(data.get("bot_refs", [])),
        views=int(data.get("views", 0)),
        forwards=int(data.get("forwards", 0)),
        reactions={k: int(v) for k, v in data.get("reactions", {}).items()},
        replies=tuple(data.get("replies", [])),
        refresh_seq=int(data.get("refresh_seq", 0)),
    )


def channel_from_dict(data: Mapping[str, Any]) -> ChannelRecord:
    category = data.get("category")
    return ChannelRecord(
        channel_id=data["channel_id"],
        title=data.get("title", ""),
        description=data.get("description", ""),
        created_at=int(data.get("created_at", 0)),
        replies_enabled=bool(data.get("replies_enabled", False)),
        category=CacCategory(category) if category is not None else None,
        source_kind=SourceKind(data.get("source_kind", "Replay")),
    )


def snapshot_from_dict(data: Mapping[str, Any]) -> EngagementSnapshot:
    return EngagementSnapshot(
        channel_id=data["channel_id"],
        taken_at=int(data["taken_at"]),
        subscribers=int(data["subscribers"]),
    )


def encode_record(record: Any) -> str:
    """Canonical single-line JSON encoding (sorted keys, no padding)."""
    return json.dumps(record_to_dict(record), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def dump_jsonl(records: Iterable[Any], path: str) -> int:
    """Write records to a JSONL file; returns the number of lines written."""
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(encode_record(record) + "\n")
            n += 1
    return n
