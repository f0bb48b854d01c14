"""Channel discovery: harvest t.me links, evaluate candidates by their
newest posts, and crawl the resulting link graph breadth-first.

A candidate is flagged malicious only when at least ``channel_flag_threshold``
of its ``channel_eval_posts`` newest posts are activity posts; candidates with
too few posts are deferred and re-queued after a recheck window instead of
being dismissed.
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

from darkgram.classify import ClassificationResult, ClassifierBackend, classify_post
from darkgram.core import CacCategory, PipelineConfig, PostRecord
from darkgram.ingest import ChannelDeletedError, ChannelSource, ChannelUnreachableError


class CandidateState(str, Enum):
    Queued = "Queued"
    Evaluated = "Evaluated"
    Deferred = "Deferred"
    Flagged = "Flagged"
    Benign = "Benign"


_ALLOWED_TRANSITIONS: dict[CandidateState, frozenset[CandidateState]] = {
    CandidateState.Queued: frozenset({CandidateState.Evaluated, CandidateState.Deferred}),
    CandidateState.Evaluated: frozenset({CandidateState.Flagged, CandidateState.Benign}),
    CandidateState.Deferred: frozenset({CandidateState.Queued}),
    CandidateState.Flagged: frozenset(),
    CandidateState.Benign: frozenset(),
}


class FlagOutcome(str, Enum):
    Malicious = "Malicious"
    NotFlagged = "NotFlagged"
    Deferred = "Deferred"


@dataclass(frozen=True)
class CandidateChannel:
    channel_id: str
    discovered_from: tuple[str, str]  # (source kind, origin channel/group id)
    first_seen: int
    state: CandidateState = CandidateState.Queued

    def advance(self, new_state: CandidateState) -> "CandidateChannel":
        if new_state not in _ALLOWED_TRANSITIONS[self.state]:
            raise ValueError(f"illegal transition {self.state.value} -> {new_state.value}")
        return replace(self, state=new_state)


@dataclass(frozen=True)
class ChannelFlagDecision:
    channel_id: str
    posts_evaluated: int
    flagged_count: int
    per_post: tuple[tuple[int, ClassificationResult], ...]
    decision: FlagOutcome
    majority_category: Optional[CacCategory]
    evaluated_at: int = 0

    def to_dict(self) -> dict:
        return {
            "channel_id": self.channel_id,
            "posts_evaluated": self.posts_evaluated,
            "flagged_count": self.flagged_count,
            "per_post": [[pid, result.to_dict()] for pid, result in self.per_post],
            "decision": self.decision.value,
            "majority_category": self.majority_category.value if self.majority_category else None,
            "evaluated_at": self.evaluated_at,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ChannelFlagDecision":
        majority = data.get("majority_category")
        return cls(
            channel_id=data["channel_id"],
            posts_evaluated=int(data["posts_evaluated"]),
            flagged_count=int(data["flagged_count"]),
            per_post=tuple(
                (int(pid), ClassificationResult.from_dict(r)) for pid, r in data["per_post"]
            ),
            decision=FlagOutcome(data["decision"]),
            majority_category=CacCategory(majority) if majority else None,
            evaluated_at=int(data.get("evaluated_at", 0)),
        )


def load_decisions(path: str) -> list[ChannelFlagDecision]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(ChannelFlagDecision.from_dict(json.loads(line)))
    return out


# ---------------------------------------------------------------------------
# Link harvesting

_TME_RE = re.compile(
    r"(?i)(?:https?://)?t\.me/(joinchat/[A-Za-z0-9_\-]+|\+[A-Za-z0-9_\-]+|s/[A-Za-z0-9_]{4,32}|[A-Za-z0-9_]{4,32})"
)
_RESERVED_HANDLES = frozenset({"joinchat", "share", "proxy", "socks", "addstickers", "iv", "c", "s"})


def _tme_matches(text: str) -> Iterable[str]:
    for match in _TME_RE.finditer(text):
        yield match.group(1)


def _split_harvest(chunks: Iterable[str]) -> tuple[list[str], list[str]]:
    handles: dict[str, None] = {}
    invites: dict[str, None] = {}
    for chunk in chunks:
        for raw in _tme_matches(chunk):
            if raw.startswith("+"):
                invites.setdefault(raw[1:])
            elif raw.lower().startswith("joinchat/"):
                invites.setdefault(raw.split("/", 1)[1])
            else:
                handle = raw.split("/", 1)[-1].lower() if raw.lower().startswith("s/") else raw.lower()
                if handle not in _RESERVED_HANDLES:
                    handles.setdefault(handle)
    return list(handles), list(invites)


def harvest_tme_links(posts: Sequence[PostRecord], known: Iterable[str] = ()) -> list[str]:
    """Public channel handles referenced via t.me, lowercased and deduplicated.

    Channels already known/monitored are excluded. Invite-code links are not
    returned here (see `harvest_invite_codes`); they are recorded, never joined.
    """
    known_set = {k.lower() for k in known}
    chunks: list[str] = []
    for post in posts:
        chunks.append(post.text)
        chunks.extend(post.links)
    handles, _ = _split_harvest(chunks)
    return [h for h in handles if h not in known_set]


def harvest_invite_codes(posts: Sequence[PostRecord]) -> list[str]:
    chunks: list[str] = []
    for post in posts:
        chunks.append(post.text)
        chunks.extend(post.links)
    _, invites = _split_harvest(chunks)
    return invites


def ingest_external_links(
    records: Sequence[tuple[str, Sequence[str]]],
    known: Iterable[str] = (),
    now: int = 0,
) -> list[CandidateChannel]:
    """Candidates from t.me links found outside the platform (public groups).

    Duplicates across groups collapse to a single candidate; the first origin
    is kept.
    """
    known_set = {k.lower() for k in known}
    seen: dict[str, CandidateChannel] = {}
    for group_id, urls in records:
        handles, _ = _split_harvest(urls)
        for handle in handles:
            if handle in known_set or handle in seen:
                continue
            seen[handle] = CandidateChannel(
                channel_id=handle,
                discovered_from=("ExternalLinkSource", group_id),
                first_seen=now,
            )
    return list(seen.values())


# ---------------------------------------------------------------------------
# Evaluation

def evaluate_channel(
    source: ChannelSource,
    channel_id: str,
    model: ClassifierBackend,
    config: PipelineConfig,
    now: int = 0,
) -> ChannelFlagDecision:
    """Classify a channel's newest posts and apply the flagging rule.

    Malicious requires a full window of ``channel_eval_posts`` posts with at
    least ``channel_flag_threshold`` flagged; a short window defers the
    channel for recheck rather than clearing it.
    """
    posts = source.list_recent_posts(channel_id, config.channel_eval_posts)
    per_post = tuple((p.post_id, classify_post(model, p)) for p in posts)
    flagged = [(pid, r) for pid, r in per_post if r.is_ca]
    if len(per_post) < config.channel_eval_posts:
        decision = FlagOutcome.Deferred
    elif len(flagged) >= config.channel_flag_threshold:
        decision = FlagOutcome.Malicious
    else:
        decision = FlagOutcome.NotFlagged
    return ChannelFlagDecision(
        channel_id=channel_id,
        posts_evaluated=len(per_post),
        flagged_count=len(flagged),
        per_post=per_post,
        decision=decision,
        majority_category=_majority_category(r for _, r in flagged),
        evaluated_at=now,
    )


def _majority_category(results: Iterable[ClassificationResult]) -> Optional[CacCategory]:
    counts: dict[CacCategory, int] = {}
    for result in results:
        if result.category is not None:
            counts[result.category] = counts.get(result.category, 0) + 1
    if not counts:
        return None
    best = max(counts.values())
    for category in CacCategory:  # tie resolves to declaration order
        if counts.get(category) == best:
            return category
    return None


# ---------------------------------------------------------------------------
# Frontier

@dataclass
class FrontierState:
    """Visited bookkeeping carried across frontier runs."""

    visited: dict[str, tuple[FlagOutcome, int]] = field(default_factory=dict)

    def due_for_recheck(self, now: int, recheck_days: int) -> list[str]:
        window = recheck_days * 86400
        return sorted(
            ch
            for ch, (outcome, at) in self.visited.items()
            if outcome is FlagOutcome.Deferred and now - at >= window
        )


@dataclass(frozen=True)
class FrontierResult:
    decisions: dict[str, ChannelFlagDecision]
    errors: tuple[tuple[str, str], ...]


def run_frontier(
    seeds: Sequence[str],
    source: ChannelSource,
    model: ClassifierBackend,
    config: PipelineConfig,
    state: Optional[FrontierState] = None,
    now: int = 0,
    recheck_days: int = 7,
    harvest_limit: int = 100,
) -> FrontierResult:
    """Breadth-first evaluation over t.me links.

    Seeds are always harvested; discovered channels are expanded only when
    flagged. The visited set blocks re-evaluation inside the recheck window,
    and previously deferred channels that are due re-enter the queue, so the
    traversal terminates on any finite link graph.
    """
    if not seeds:
        raise ValueError("seeds must be non-empty")
    if state is None:
        state = FrontierState()
    seed_set = {s.lower() for s in seeds}
    queue: deque[str] = deque(sorted(seed_set))
    for channel_id in state.due_for_recheck(now, recheck_days):
        if channel_id not in queue:
            queue.append(channel_id)
    window = recheck_days * 86400
    evaluated_this_run: set[str] = set()
    decisions: dict[str, ChannelFlagDecision] = {}
    errors: list[tuple[str, str]] = []

    while queue:
        channel_id = queue.popleft()
        if channel_id in evaluated_this_run:
            continue
        prior = state.visited.get(channel_id)
        if prior is not None and now - prior[1] < window:
            continue
        evaluated_this_run.add(channel_id)
        try:
            decision = evaluate_channel(source, channel_id, model, config, now=now)
        except ChannelDeletedError:
            errors.append((channel_id, "deleted"))
            continue
        except ChannelUnreachableError:
            errors.append((channel_id, "unreachable"))
            continue
        decisions[channel_id] = decision
        state.visited[channel_id] = (decision.decision, now)
        if channel_id in seed_set or decision.decision is FlagOutcome.Malicious:
            try:
                posts = source.list_recent_posts(channel_id, harvest_limit)
            except (ChannelDeletedError, ChannelUnreachableError):
                continue
            known = seed_set | evaluated_this_run | set(queue)
            for handle in harvest_tme_links(posts, known=known):
                queue.append(handle)
    return FrontierResult(decisions, tuple(errors))
