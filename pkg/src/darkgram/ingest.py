"""Archive I/O, the polling/refresh loop, and text extraction helpers.

The polling loop runs against a `ChannelSource`, a behavioral interface that
replay fixtures and live adapters implement interchangeably. Replay fixtures
are JSONL scripts of timed source responses driven by a virtual clock, so
replaying the same fixture twice produces byte-identical archives.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Iterator, Optional, Protocol, Sequence

from darkgram.core import (
    ChannelRecord,
    EngagementSnapshot,
    PipelineConfig,
    PostRecord,
    channel_from_dict,
    dump_jsonl,
    encode_record,
    post_from_dict,
    validate_record,
)


class ArchiveError(Exception):
    """Malformed archive file or invalid record, with the offending line."""


class ChannelUnreachableError(Exception):
    """Transient failure reaching a channel; retried next cycle."""


class ChannelDeletedError(Exception):
    """Channel no longer exists (or never did)."""


class PostDeletedError(Exception):
    """A previously seen post has been removed."""


class ChannelSource(Protocol):
    """Read-only view of a broadcast channel provider."""

    def list_recent_posts(self, channel_id: str, n: int) -> list[PostRecord]:
        """At most ``n`` posts, newest first."""
        ...

    def fetch_post(self, channel_id: str, post_id: int) -> PostRecord:
        ...

    def snapshot(self, channel_id: str) -> EngagementSnapshot:
        ...


# ---------------------------------------------------------------------------
# Text extraction

_URL_RE = re.compile(r"(?i)\bhttps?://[^\s<>\"'​]+")
_TRAILING_PUNCT = ".,;:!?)]}>'\""
_HANDLE_RE = re.compile(r"(?<![A-Za-z0-9])@([A-Za-z0-9_]{4,32})(?![A-Za-z0-9_])")


def extract_links(text: str) -> list[str]:
    """Absolute http/https URLs in order of first appearance, deduplicated.

    Normalization: scheme lowercased, fragment stripped, trailing sentence
    punctuation removed.
    """
    seen: dict[str, None] = {}
    for match in _URL_RE.finditer(text):
        raw = match.group(0).rstrip(_TRAILING_PUNCT)
        raw = raw.split("#", 1)[0]
        if not raw:
            continue
        scheme, sep, rest = raw.partition("://")
        if not rest:
            continue
        url = scheme.lower() + sep + rest
        seen.setdefault(url)
    return list(seen)


def extract_bot_refs(text: str) -> list[str]:
    """@-tagged account handles (without the @), deduplicated, order kept.

    Handle grammar is @[A-Za-z0-9_]{4,32} not preceded by an alphanumeric,
    which keeps email local parts out.
    """
    seen: dict[str, None] = {}
    for match in _HANDLE_RE.finditer(text):
        seen.setdefault(match.group(1))
    return list(seen)


# ---------------------------------------------------------------------------
# Archive I/O

def read_archive(path: str | Path) -> Iterator[PostRecord]:
    """Yield post records from a JSONL archive in file order.

    Raises ArchiveError naming the line number for malformed JSON and for
    records that violate their invariants.
    """
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ArchiveError(f"line {lineno}: malformed JSON ({exc.msg})") from exc
            try:
                record = post_from_dict(data)
            except (KeyError, TypeError, ValueError) as exc:
                raise ArchiveError(f"line {lineno}: bad record ({exc})") from exc
            result = validate_record(record)
            if not result.ok:
                raise ArchiveError(f"line {lineno}: invalid record: {'; '.join(result.violations)}")
            yield record


def read_channels(path: str | Path) -> list[ChannelRecord]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                out.append(channel_from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ArchiveError(f"line {lineno}: {exc}") from exc
    return out


def latest_posts(records: Iterable[PostRecord]) -> list[PostRecord]:
    """Collapse refresh rows to the last-written state of each post."""
    latest: dict[tuple[str, int], PostRecord] = {}
    for record in records:
        key = (record.channel_id, record.post_id)
        prev = latest.get(key)
        if prev is None or record.refresh_seq >= prev.refresh_seq:
            latest[key] = record
    return [latest[k] for k in sorted(latest)]


@dataclass(frozen=True)
class ArchiveStats:
    channels: int
    posts: int
    time_range: Optional[tuple[int, int]]
    posts_with_reactions: int


def archive_stats(records: Iterable[PostRecord]) -> ArchiveStats:
    current = latest_posts(records)
    if not current:
        return ArchiveStats(0, 0, None, 0)
    times = [p.posted_at for p in current]
    with_reactions = sum(1 for p in current if any(v > 0 for v in p.reactions.values()))
    return ArchiveStats(
        channels=len({p.channel_id for p in current}),
        posts=len(current),
        time_range=(min(times), max(times)),
        posts_with_reactions=with_reactions,
    )


# ---------------------------------------------------------------------------
# Polling

@dataclass(frozen=True)
class PollEvent:
    kind: str  # "skip" | "tombstone"
    channel_id: str
    at: int
    post_id: Optional[int] = None


@dataclass
class PollState:
    """Refresh counters carried between cycles; per-post sequence is gapless."""

    seen: dict[tuple[str, int], int] = field(default_factory=dict)
    deleted: set[tuple[str, int]] = field(default_factory=set)


@dataclass(frozen=True)
class PollBatch:
    posts: tuple[PostRecord, ...]
    snapshots: tuple[EngagementSnapshot, ...]
    events: tuple[PollEvent, ...]


def poll_cycle(
    source: ChannelSource,
    channels: Sequence[str],
    config: PipelineConfig,
    state: PollState,
    now: int,
    fetch_limit: int = 100,
) -> PollBatch:
    """Run one refresh cycle over ``channels``.

    New posts enter with refresh_seq=0; previously seen posts are re-fetched
    with their sequence incremented; counters are last-write-wins. One
    engagement snapshot per reachable channel. Unreachable channels are
    recorded as skip events and retried next cycle.
    """
    if not channels:
        raise ValueError("channels must be non-empty")
    posts: list[PostRecord] = []
    snapshots: list[EngagementSnapshot] = []
    events: list[PollEvent] = []
    for channel_id in channels:
        try:
            recent = source.list_recent_posts(channel_id, fetch_limit)
        except ChannelUnreachableError:
            events.append(PollEvent("skip", channel_id, now))
            continue
        except ChannelDeletedError:
            events.append(PollEvent("skip", channel_id, now))
            continue
        cycle_posts: list[PostRecord] = []
        recent_ids = set()
        for post in recent:
            recent_ids.add(post.post_id)
            key = (channel_id, post.post_id)
            seq = 0 if key not in state.seen else state.seen[key] + 1
            state.seen[key] = seq
            cycle_posts.append(_with_seq(post, seq))
        # Refresh previously seen posts that fell out of the recent window.
        known = [pid for (ch, pid) in state.seen if ch == channel_id and pid not in recent_ids]
        for post_id in sorted(known):
            key = (channel_id, post_id)
            if key in state.deleted:
                continue
            try:
                post = source.fetch_post(channel_id, post_id)
            except PostDeletedError:
                state.deleted.add(key)
                events.append(PollEvent("tombstone", channel_id, now, post_id=post_id))
                continue
            except ChannelUnreachableError:
                events.append(PollEvent("skip", channel_id, now, post_id=post_id))
                continue
            seq = state.seen[key] + 1
            state.seen[key] = seq
            cycle_posts.append(_with_seq(post, seq))
        cycle_posts.sort(key=lambda p: p.post_id)
        posts.extend(cycle_posts)
        try:
            snapshots.append(source.snapshot(channel_id))
        except (ChannelUnreachableError, ChannelDeletedError):
            events.append(PollEvent("skip", channel_id, now))
    return PollBatch(tuple(posts), tuple(snapshots), tuple(events))


def _with_seq(post: PostRecord, seq: int) -> PostRecord:
    return post if post.refresh_seq == seq else replace(post, refresh_seq=seq)


# ---------------------------------------------------------------------------
# Replay source

class VirtualClock:
    """Fixture-driven clock for replay mode."""

    def __init__(self, start: int = 0) -> None:
        self.now = start

    def advance(self, seconds: int) -> None:
        self.now += seconds


@dataclass(frozen=True)
class _ScriptEvent:
    at: int
    channel_id: str
    kind: str
    payload: dict[str, Any]


def load_replay_script(path: str | Path) -> list[_ScriptEvent]:
    events: list[_ScriptEvent] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
                events.append(
                    _ScriptEvent(
                        at=int(data["at"]),
                        channel_id=data["channel_id"],
                        kind=data["kind"],
                        payload=data,
                    )
                )
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ArchiveError(f"line {lineno}: bad script entry ({exc})") from exc
    events.sort(key=lambda e: (e.at, e.channel_id))
    return events


class ReplaySource:
    """ChannelSource backed by a JSONL script of timed responses.

    Script entry kinds: ``channel`` (metadata), ``post`` (post state visible
    from ``at`` onward; later entries for the same post overwrite counters),
    ``subscribers``, ``deleted_post``, and ``unreachable`` (with ``until``).
    """

    def __init__(self, events: Sequence[_ScriptEvent], clock: VirtualClock) -> None:
        self._events = list(events)
        self.clock = clock

    @classmethod
    def from_path(cls, path: str | Path, clock: Optional[VirtualClock] = None) -> "ReplaySource":
        events = load_replay_script(path)
        if clock is None:
            start = min((e.at for e in events), default=0)
            clock = VirtualClock(start)
        return cls(events, clock)

    @property
    def channel_ids(self) -> list[str]:
        return sorted({e.channel_id for e in self._events})

    @property
    def end_time(self) -> int:
        return max((e.at for e in self._events), default=0)

    def _visible(self, channel_id: str) -> dict[str, Any]:
        now = self.clock.now
        posts: dict[int, dict[str, Any]] = {}
        subscribers = 0
        known = False
        deleted: set[int] = set()
        unreachable = False
        channel: Optional[dict[str, Any]] = None
        for event in self._events:
            if event.channel_id != channel_id:
                continue
            known = True
            if event.at > now:
                continue
            if event.kind == "post":
                posts[int(event.payload["post"]["post_id"])] = event.payload["post"]
            elif event.kind == "subscribers":
                subscribers = int(event.payload["subscribers"])
            elif event.kind == "deleted_post":
                deleted.add(int(event.payload["post_id"]))
            elif event.kind == "unreachable":
                if event.at <= now < int(event.payload["until"]):
                    unreachable = True
            elif event.kind == "channel":
                channel = event.payload["channel"]
        if not known:
            raise ChannelDeletedError(channel_id)
        return {
            "posts": posts,
            "subscribers": subscribers,
            "deleted": deleted,
            "unreachable": unreachable,
            "channel": channel,
        }

    def _build_post(self, data: dict[str, Any]) -> PostRecord:
        post = post_from_dict(data)
        if not post.links and post.text:
            post = replace(post, links=tuple(extract_links(post.text)))
        if not post.bot_refs and post.text:
            post = replace(post, bot_refs=tuple(extract_bot_refs(post.text)))
        return post

    def list_recent_posts(self, channel_id: str, n: int) -> list[PostRecord]:
        view = self._visible(channel_id)
        if view["unreachable"]:
            raise ChannelUnreachableError(channel_id)
        alive = [p for pid, p in view["posts"].items() if pid not in view["deleted"]]
        alive.sort(key=lambda p: (int(p["posted_at"]), int(p["post_id"])), reverse=True)
        return [self._build_post(p) for p in alive[:n]]

    def fetch_post(self, channel_id: str, post_id: int) -> PostRecord:
        view = self._visible(channel_id)
        if view["unreachable"]:
            raise ChannelUnreachableError(channel_id)
        if post_id in view["deleted"] or post_id not in view["posts"]:
            raise PostDeletedError(f"{channel_id}/{post_id}")
        return self._build_post(view["posts"][post_id])

    def snapshot(self, channel_id: str) -> EngagementSnapshot:
        view = self._visible(channel_id)
        if view["unreachable"]:
            raise ChannelUnreachableError(channel_id)
        return EngagementSnapshot(channel_id, self.clock.now, view["subscribers"])

    def channel_record(self, channel_id: str) -> Optional[ChannelRecord]:
        view = self._visible(channel_id)
        if view["channel"] is None:
            return None
        return channel_from_dict(view["channel"])


# ---------------------------------------------------------------------------
# Replay driver

@dataclass(frozen=True)
class ReplayResult:
    cycles: int
    posts_written: int
    snapshots_written: int
    stats: ArchiveStats


def run_replay(
    script_path: str | Path,
    out_dir: str | Path,
    config: PipelineConfig,
    cycles: Optional[int] = None,
    fetch_limit: int = 100,
) -> ReplayResult:
    """Poll a replay fixture on its virtual clock and write the archive.

    Writes posts.jsonl (append-per-refresh), channels.jsonl, snapshots.jsonl,
    and events.jsonl under ``out_dir``. Deterministic for a given fixture.
    """
    source = ReplaySource.from_path(script_path)
    channels = source.channel_ids
    if not channels:
        raise ArchiveError("replay script names no channels")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    state = PollState()
    all_posts: list[PostRecord] = []
    all_snapshots: list[EngagementSnapshot] = []
    all_events: list[PollEvent] = []
    t = source.clock.now
    end = source.end_time
    ran = 0
    while True:
        source.clock.now = t
        batch = poll_cycle(source, channels, config, state, now=t, fetch_limit=fetch_limit)
        all_posts.extend(batch.posts)
        all_snapshots.extend(batch.snapshots)
        all_events.extend(batch.events)
        ran += 1
        t += config.refresh_interval_s
        if cycles is not None and ran >= cycles:
            break
        if cycles is None and t > end:
            break

    dump_jsonl(all_posts, str(out / "posts.jsonl"))
    dump_jsonl(all_snapshots, str(out / "snapshots.jsonl"))
    channel_records = []
    for channel_id in channels:
        source.clock.now = end
        record = source.channel_record(channel_id)
        if record is not None:
            channel_records.append(record)
    dump_jsonl(channel_records, str(out / "channels.jsonl"))
    with open(out / "events.jsonl", "w", encoding="utf-8") as fh:
        for event in all_events:
            fh.write(encode_record(event) + "\n")
    return ReplayResult(
        cycles=ran,
        posts_written=len(all_posts),
        snapshots_written=len(all_snapshots),
        stats=archive_stats(all_posts),
    )
