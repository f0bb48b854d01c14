"""Evidence-grade abuse reporting: bundles, rendered disclosure emails,
blocklist exports, and the disclosure outcome ledger.

Bundles carry channel metadata plus excerpts of up to ten newest flagged
posts with verdict references; they never include attachment contents or
digests of non-executable files. Reports land in an outbox directory for
review; transport is a separate adapter's job.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import statistics
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from darkgram.classify import ClassificationResult
from darkgram.core import CacCategory, ChannelRecord, PostRecord
from darkgram.discover import ChannelFlagDecision, FlagOutcome
from darkgram.scan import UrlDecision, UrlVerdict

EXCERPT_LIMIT = 280


class ReportError(Exception):
    pass


class ReportDestination(str, Enum):
    PlatformAbuse = "PlatformAbuse"
    Organization = "Organization"
    Blocklist = "Blocklist"


class DisclosureOutcome(str, Enum):
    Removed = "Removed"
    Active = "Active"
    Acknowledged = "Acknowledged"
    NoResponse = "NoResponse"


@dataclass(frozen=True)
class PostSummary:
    post_id: int
    posted_at: int
    excerpt: str
    classification: ClassificationResult
    verdict_refs: tuple[str, ...] = ()


@dataclass(frozen=True)
class ReportBundle:
    bundle_id: str
    channel_name: str
    channel_url: str
    channel_description: str
    majority_category: CacCategory
    post_summaries: tuple[PostSummary, ...]
    evidence_refs: tuple[str, ...]
    created_at: int
    destination: ReportDestination

    def to_dict(self) -> dict:
        return {
            "bundle_id": self.bundle_id,
            "channel_name": self.channel_name,
            "channel_url": self.channel_url,
            "channel_description": self.channel_description,
            "majority_category": self.majority_category.value,
            "post_summaries": [
                {
                    "post_id": s.post_id,
                    "posted_at": s.posted_at,
                    "excerpt": s.excerpt,
                    "classification": s.classification.to_dict(),
                    "verdict_refs": list(s.verdict_refs),
                }
                for s in self.post_summaries
            ],
            "evidence_refs": list(self.evidence_refs),
            "created_at": self.created_at,
            "destination": self.destination.value,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ReportBundle":
        return cls(
            bundle_id=data["bundle_id"],
            channel_name=data["channel_name"],
            channel_url=data["channel_url"],
            channel_description=data["channel_description"],
            majority_category=CacCategory(data["majority_category"]),
            post_summaries=tuple(
                PostSummary(
                    post_id=int(s["post_id"]),
                    posted_at=int(s["posted_at"]),
                    excerpt=s["excerpt"],
                    classification=ClassificationResult.from_dict(s["classification"]),
                    verdict_refs=tuple(s.get("verdict_refs", ())),
                )
                for s in data["post_summaries"]
            ),
            evidence_refs=tuple(data.get("evidence_refs", ())),
            created_at=int(data["created_at"]),
            destination=ReportDestination(data["destination"]),
        )


class EvidenceStore:
    """Post texts and verdict/probe references backing a report bundle."""

    def __init__(
        self,
        posts: Iterable[PostRecord] = (),
        refs: Optional[Mapping[tuple[str, int], Sequence[str]]] = None,
    ) -> None:
        self._posts: dict[tuple[str, int], PostRecord] = {}
        for post in posts:
            key = (post.channel_id, post.post_id)
            prev = self._posts.get(key)
            if prev is None or post.refresh_seq >= prev.refresh_seq:
                self._posts[key] = post
        self._refs = {k: tuple(v) for k, v in (refs or {}).items()}

    def get_post(self, channel_id: str, post_id: int) -> Optional[PostRecord]:
        return self._posts.get((channel_id, post_id))

    def refs_for(self, channel_id: str, post_id: int) -> tuple[str, ...]:
        return self._refs.get((channel_id, post_id), ())

    def add_ref(self, channel_id: str, post_id: int, ref: str) -> None:
        key = (channel_id, post_id)
        self._refs[key] = self._refs.get(key, ()) + (ref,)


def _excerpt(text: str) -> str:
    return text if len(text) <= EXCERPT_LIMIT else text[:EXCERPT_LIMIT]


def build_report(
    channel: ChannelRecord,
    decision: ChannelFlagDecision,
    evidence: EvidenceStore,
    destination: ReportDestination = ReportDestination.PlatformAbuse,
    now: Optional[int] = None,
) -> ReportBundle:
    """Bundle up to the ten newest flagged posts of a malicious decision."""
    if decision.decision is not FlagOutcome.Malicious:
        raise ReportError(f"cannot report a {decision.decision.value} decision")
    flagged = [(pid, r) for pid, r in decision.per_post if r.is_ca]
    if not flagged:
        raise ReportError("malicious decision carries no flagged posts")
    flagged.sort(key=lambda pr: pr[0], reverse=True)  # post ids are monotone with time
    created_at = int(now) if now is not None else decision.evaluated_at
    summaries = []
    refs: list[str] = []
    for post_id, result in flagged[:10]:
        post = evidence.get_post(decision.channel_id, post_id)
        post_refs = evidence.refs_for(decision.channel_id, post_id)
        refs.extend(post_refs)
        summaries.append(
            PostSummary(
                post_id=post_id,
                posted_at=post.posted_at if post else 0,
                excerpt=_excerpt(post.text) if post else "",
                classification=result,
                verdict_refs=post_refs,
            )
        )
    category = decision.majority_category or CacCategory.CredentialCompromise
    basis = f"{channel.channel_id}|{created_at}|{','.join(str(s.post_id) for s in summaries)}"
    bundle_id = hashlib.sha256(basis.encode()).hexdigest()[:16]
    return ReportBundle(
        bundle_id=bundle_id,
        channel_name=channel.title or channel.channel_id,
        channel_url=f"https://t.me/{channel.channel_id}",
        channel_description=channel.description,
        majority_category=category,
        post_summaries=tuple(summaries),
        evidence_refs=tuple(dict.fromkeys(refs)),
        created_at=created_at,
        destination=destination,
    )


def render_email(bundle: ReportBundle) -> str:
    """Plain-text disclosure message; identical bundles render identical bytes."""
    lines = [
        f"Subject: Abuse report: {bundle.channel_name} [{bundle.majority_category.value}]",
        "",
        f"Channel: {bundle.channel_name}",
        f"URL: {bundle.channel_url}",
        f"Category: {bundle.majority_category.value}",
        f"Description: {bundle.channel_description}",
        "",
        f"Flagged posts ({len(bundle.post_summaries)}, newest first):",
    ]
    for i, summary in enumerate(bundle.post_summaries, start=1):
        lines.append(f"  {i}. [post {summary.post_id}] {summary.excerpt}")
        if summary.verdict_refs:
            lines.append(f"     evidence: {', '.join(summary.verdict_refs)}")
    lines.append("")
    if bundle.evidence_refs:
        lines.append(f"Evidence references: {', '.join(bundle.evidence_refs)}")
    lines.append(f"Bundle: {bundle.bundle_id}")
    lines.append(f"Generated at: {bundle.created_at} (epoch seconds)")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Blocklist export

def blocklist_csv(verdicts: Sequence[UrlVerdict]) -> str:
    """CSV of malicious URL verdicts: url,first_seen,evidence_ref, sorted by url."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["url", "first_seen", "evidence_ref"])
    rows = [v for v in verdicts if v.final is UrlDecision.Malicious]
    for verdict in sorted(rows, key=lambda v: v.url):
        first_seen = "" if verdict.scanned_at is None else str(verdict.scanned_at)
        writer.writerow([verdict.url, first_seen, verdict.verdict_id])
    return buffer.getvalue()


def export_blocklist(
    verdicts: Sequence[UrlVerdict], destination: str, out_dir: str | Path
) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"blocklist_{destination}.csv"
    path.write_text(blocklist_csv(verdicts), encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# Disclosure ledger

@dataclass(frozen=True)
class DisclosureLedgerEntry:
    bundle_id: str
    sent_at: int
    destination: str
    outcome: DisclosureOutcome
    outcome_at: Optional[int] = None
    response_days: Optional[int] = None

    def __post_init__(self) -> None:
        if self.outcome_at is not None:
            expected = max(0, (self.outcome_at - self.sent_at) // 86400)
            if self.response_days is None:
                object.__setattr__(self, "response_days", expected)
            elif self.response_days != expected:
                raise ValueError("response_days inconsistent with sent_at/outcome_at")

    def to_dict(self) -> dict:
        return {
            "bundle_id": self.bundle_id,
            "sent_at": self.sent_at,
            "destination": self.destination,
            "outcome": self.outcome.value,
            "outcome_at": self.outcome_at,
            "response_days": self.response_days,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "DisclosureLedgerEntry":
        return cls(
            bundle_id=data["bundle_id"],
            sent_at=int(data["sent_at"]),
            destination=data["destination"],
            outcome=DisclosureOutcome(data["outcome"]),
            outcome_at=data.get("outcome_at"),
            response_days=data.get("response_days"),
        )


@dataclass(frozen=True)
class LedgerStats:
    total: int
    removed: int
    removal_rate: Optional[float]
    median_response_days: dict[str, float]
    overall_median_response_days: Optional[float]


def ledger_stats(entries: Sequence[DisclosureLedgerEntry]) -> LedgerStats:
    """Removal rate plus median response time per destination."""
    if not entries:
        return LedgerStats(0, 0, None, {}, None)
    removed = sum(1 for e in entries if e.outcome is DisclosureOutcome.Removed)
    per_destination: dict[str, list[int]] = {}
    all_days: list[int] = []
    for entry in entries:
        if entry.response_days is not None:
            per_destination.setdefault(entry.destination, []).append(entry.response_days)
            all_days.append(entry.response_days)
    medians = {d: statistics.median(v) for d, v in sorted(per_destination.items())}
    return LedgerStats(
        total=len(entries),
        removed=removed,
        removal_rate=removed / len(entries),
        median_response_days=medians,
        overall_median_response_days=statistics.median(all_days) if all_days else None,
    )


def append_ledger(entry: DisclosureLedgerEntry, path: str | Path) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(entry.to_dict(), sort_keys=True) + "\n")


def read_ledger(path: str | Path) -> list[DisclosureLedgerEntry]:
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                entries.append(DisclosureLedgerEntry.from_dict(json.loads(line)))
    return entries


# ---------------------------------------------------------------------------
# Outbox

class Outbox:
    """Reviewed-before-send report store: outbox/<bundle_id>/report.txt + bundle.json.

    Duplicate suppression: one bundle per channel per suppression window
    unless the new bundle carries posts the previous one did not.
    """

    def __init__(self, root: str | Path, suppression_days: int = 30) -> None:
        self.root = Path(root)
        self.suppression_days = suppression_days
        self.root.mkdir(parents=True, exist_ok=True)

    def _existing(self) -> list[ReportBundle]:
        bundles = []
        for path in sorted(self.root.glob("*/bundle.json")):
            bundles.append(ReportBundle.from_dict(json.loads(path.read_text(encoding="utf-8"))))
        return bundles

    def should_send(self, channel_url: str, post_ids: Sequence[int], now: int) -> bool:
        window = self.suppression_days * 86400
        for bundle in self._existing():
            if bundle.channel_url != channel_url:
                continue
            if now - bundle.created_at >= window:
                continue
            previous = {s.post_id for s in bundle.post_summaries}
            if set(post_ids) - previous:
                return True  # new flagged posts appeared
            return False
        return True

    def write(self, bundle: ReportBundle) -> Path:
        directory = self.root / bundle.bundle_id
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "report.txt").write_text(render_email(bundle), encoding="utf-8")
        (directory / "bundle.json").write_text(
            json.dumps(bundle.to_dict(), sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        return directory
