"""Engagement and harm analytics.

Covers subscriber-growth windows and rank-based group comparisons, the
forwards/growth association, channel-migration detection, emoji reaction
distributions, reply statistics, piracy damage estimation in integer cents,
and public-suffix-aware domain overlap between link sets.
"""

from __future__ import annotations

import itertools
import math
import re
import statistics
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import Iterable, Mapping, Optional, Sequence
from urllib.parse import urlsplit

from darkgram.core import ChannelRecord, EngagementSnapshot, PipelineConfig, PostRecord
from darkgram.discover import harvest_tme_links
from darkgram.ingest import extract_links, latest_posts


class AnalyticsError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Growth windows

@dataclass(frozen=True)
class GrowthObservation:
    channel_id: str
    window: tuple[int, int]
    start_subs: int
    end_subs: int
    growth_rate: float


@dataclass(frozen=True)
class GrowthSeries:
    observations: tuple[GrowthObservation, ...]
    notes: tuple[str, ...]

    def __iter__(self):
        return iter(self.observations)

    def __len__(self) -> int:
        return len(self.observations)


def _value_at(snaps: Sequence[EngagementSnapshot], t: int) -> Optional[int]:
    value = None
    for snap in snaps:
        if snap.taken_at <= t:
            value = snap.subscribers
        else:
            break
    return value


def growth_series(snapshots: Sequence[EngagementSnapshot], config: PipelineConfig) -> GrowthSeries:
    """Non-overlapping growth windows per channel.

    Windows are anchored at each channel's first snapshot and advance in
    steps of ``growth_window_days``; a window is emitted only when the series
    covers both endpoints, and zero-subscriber starts are skipped with a note.
    """
    window_s = config.growth_window_days * 86400
    by_channel: dict[str, list[EngagementSnapshot]] = {}
    for snap in snapshots:
        by_channel.setdefault(snap.channel_id, []).append(snap)
    observations: list[GrowthObservation] = []
    notes: list[str] = []
    for channel_id in sorted(by_channel):
        snaps = sorted(by_channel[channel_id], key=lambda s: s.taken_at)
        t0 = snaps[0].taken_at
        t_last = snaps[-1].taken_at
        k = 0
        while t0 + (k + 1) * window_s <= t_last:
            start_t = t0 + k * window_s
            end_t = start_t + window_s
            start = _value_at(snaps, start_t)
            end = _value_at(snaps, end_t)
            k += 1
            if start is None or end is None:
                continue
            if start == 0:
                notes.append(f"{channel_id}: window at {start_t} skipped (zero start subscribers)")
                continue
            observations.append(
                GrowthObservation(channel_id, (start_t, end_t), start, end, (end - start) / start)
            )
    return GrowthSeries(tuple(observations), tuple(notes))


# ---------------------------------------------------------------------------
# Rank-based comparison (two-sided Mann-Whitney U)

@dataclass(frozen=True)
class GrowthComparison:
    median_a: float
    median_b: float
    u_statistic: float
    p_value: float
    method: str


def _midranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        rank = (i + j + 2) / 2  # 1-based average rank of the tie block
        for k in range(i, j + 1):
            ranks[order[k]] = rank
        i = j + 1
    return ranks


def _u_statistic(ranks: Sequence[float], n_a: int) -> float:
    rank_sum = sum(ranks[:n_a])
    return rank_sum - n_a * (n_a + 1) / 2


def _exact_counts(m: int, n: int) -> list[int]:
    """Null distribution of U for tie-free samples (count per U value)."""
    table: dict[tuple[int, int], list[int]] = {}

    def build(a: int, b: int) -> list[int]:
        if (a, b) in table:
            return table[(a, b)]
        if a == 0 or b == 0:
            result = [1]
        else:
            left = build(a - 1, b)
            right = build(a, b - 1)
            size = a * b + 1
            result = [0] * size
            for u in range(size):
                if u - b >= 0 and u - b < len(left):
                    result[u] += left[u - b]
                if u < len(right):
                    result[u] += right[u]
        table[(a, b)] = result
        return result

    return build(m, n)


def _two_sided_from_counts(counts: Sequence[int], u_obs: float, mu: float) -> float:
    total = sum(counts)
    dev = abs(u_obs - mu)
    hit = sum(c for u, c in enumerate(counts) if abs(u - mu) >= dev - 1e-9)
    return hit / total


def _exact_permutation_p(values: Sequence[float], n_a: int) -> tuple[float, float]:
    ranks = _midranks(values)
    n = len(values)
    mu = n_a * (n - n_a) / 2
    u_obs = _u_statistic(ranks, n_a)
    dev = abs(u_obs - mu)
    offset = n_a * (n_a + 1) / 2
    hit = 0
    total = 0
    for combo in itertools.combinations(range(n), n_a):
        u = sum(ranks[i] for i in combo) - offset
        if abs(u - mu) >= dev - 1e-9:
            hit += 1
        total += 1
    return u_obs, hit / total


def _normal_approx_p(values: Sequence[float], n_a: int) -> tuple[float, float]:
    ranks = _midranks(values)
    n = len(values)
    n_b = n - n_a
    u_obs = _u_statistic(ranks, n_a)
    mu = n_a * n_b / 2
    tie_term = 0.0
    counts: dict[float, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    for t in counts.values():
        tie_term += t**3 - t
    sigma_sq = n_a * n_b / 12 * ((n + 1) - tie_term / (n * (n - 1)))
    if sigma_sq <= 0:
        return u_obs, 1.0
    z = (abs(u_obs - mu) - 0.5) / math.sqrt(sigma_sq)
    z = max(z, 0.0)
    return u_obs, math.erfc(z / math.sqrt(2))


def compare_growth(group_a: Sequence[float], group_b: Sequence[float]) -> GrowthComparison:
    """Two-sided rank test on two growth-rate samples.

    Small samples are handled exactly: full permutation enumeration while
    both groups have at most 10 observations, the classical exact U
    distribution for tie-free samples up to 20 per group, and a
    tie-corrected normal approximation with continuity correction beyond
    that. Being rank-based, the p-value is invariant under any strictly
    monotone transform of the rates.
    """
    if len(group_a) < 2 or len(group_b) < 2:
        raise AnalyticsError("each group needs at least 2 observations")
    values = list(group_a) + list(group_b)
    n_a, n_b = len(group_a), len(group_b)
    has_ties = len(set(values)) < len(values)
    if n_a <= 10 and n_b <= 10:
        u_obs, p = _exact_permutation_p(values, n_a)
        method = "exact-permutation"
    elif not has_ties and n_a <= 20 and n_b <= 20:
        ranks = _midranks(values)
        u_obs = _u_statistic(ranks, n_a)
        counts = _exact_counts(n_a, n_b)
        p = _two_sided_from_counts(counts, u_obs, n_a * n_b / 2)
        method = "exact-distribution"
    else:
        u_obs, p = _normal_approx_p(values, n_a)
        method = "normal-approximation"
    return GrowthComparison(
        median_a=statistics.median(group_a),
        median_b=statistics.median(group_b),
        u_statistic=u_obs,
        p_value=min(1.0, p),
        method=method,
    )


# ---------------------------------------------------------------------------
# Forwards / growth association

@dataclass(frozen=True)
class ForwardAssociation:
    median_high: Optional[float]
    median_low: Optional[float]
    p_value: Optional[float]
    high_count: int
    low_count: int


def forward_growth_association(
    posts: Sequence[PostRecord],
    observations: Sequence[GrowthObservation],
    threshold: int = 100,
) -> ForwardAssociation:
    """Partition growth windows by whether any in-window post exceeded
    ``threshold`` forwards, then compare the two groups' growth rates."""
    if not observations:
        raise AnalyticsError("observations must be non-empty")
    current = latest_posts(posts)
    by_channel: dict[str, list[PostRecord]] = {}
    for post in current:
        by_channel.setdefault(post.channel_id, []).append(post)
    high: list[float] = []
    low: list[float] = []
    for obs in observations:
        start, end = obs.window
        hot = any(
            post.forwards > threshold and start <= post.posted_at < end
            for post in by_channel.get(obs.channel_id, ())
        )
        (high if hot else low).append(obs.growth_rate)
    p_value = None
    if len(high) >= 2 and len(low) >= 2:
        p_value = compare_growth(high, low).p_value
    return ForwardAssociation(
        median_high=statistics.median(high) if high else None,
        median_low=statistics.median(low) if low else None,
        p_value=p_value,
        high_count=len(high),
        low_count=len(low),
    )


# ---------------------------------------------------------------------------
# Channel migration

@dataclass(frozen=True)
class MigrationEvent:
    old_channel: str
    new_channel: str
    announced_at: int
    baseline_subs: int
    migrated_subs: Optional[int]
    rate: Optional[float]
    exceeds_base: Optional[bool]


def detect_migration(
    posts: Sequence[PostRecord],
    snapshots: Sequence[EngagementSnapshot],
    channels: Sequence[ChannelRecord],
    config: PipelineConfig,
    removed_channels: Iterable[str] = (),
    max_new_channel_age_days: int = 30,
) -> list[MigrationEvent]:
    """Migration candidates: posts in removed/ending channels that link a
    young channel. The migrated count is the new channel's subscriber gain
    within ``growth_window_days`` of the announcement; snapshots permitting,
    otherwise the event is emitted without it."""
    removed = {c.lower() for c in removed_channels}
    if not removed:
        return []
    by_id = {c.channel_id.lower(): c for c in channels}
    snaps: dict[str, list[EngagementSnapshot]] = {}
    for snap in snapshots:
        snaps.setdefault(snap.channel_id.lower(), []).append(snap)
    for series in snaps.values():
        series.sort(key=lambda s: s.taken_at)
    window_s = config.growth_window_days * 86400
    max_age_s = max_new_channel_age_days * 86400
    events: dict[tuple[str, str], MigrationEvent] = {}
    for post in sorted(latest_posts(posts), key=lambda p: (p.posted_at, p.channel_id, p.post_id)):
        old = post.channel_id.lower()
        if old not in removed:
            continue
        for handle in harvest_tme_links([post], known=[old]):
            record = by_id.get(handle)
            if record is None:
                continue
            age = post.posted_at - record.created_at
            if age < 0 or age > max_age_s:
                continue
            baseline = _value_at(snaps.get(old, ()), post.posted_at)
            if not baseline:
                continue
            migrated: Optional[int] = None
            new_series = snaps.get(handle, ())
            base_new = next((s for s in new_series if s.taken_at >= post.posted_at), None)
            end_value = _value_at(new_series, post.posted_at + window_s)
            if base_new is not None and end_value is not None:
                migrated = max(0, end_value - base_new.subscribers)
            rate = migrated / baseline if migrated is not None else None
            key = (old, handle)
            if key not in events:
                events[key] = MigrationEvent(
                    old_channel=old,
                    new_channel=handle,
                    announced_at=post.posted_at,
                    baseline_subs=baseline,
                    migrated_subs=migrated,
                    rate=rate,
                    exceeds_base=(rate > 1) if rate is not None else None,
                )
    return [events[k] for k in sorted(events)]


# ---------------------------------------------------------------------------
# Emoji reactions and replies

@dataclass(frozen=True)
class EmojiDistribution:
    ranked: tuple[tuple[str, int], ...]
    total: int

    def top_k_share(self, k: int) -> Optional[float]:
        if self.total == 0:
            return None
        if k <= 0:
            return 0.0
        return sum(count for _, count in self.ranked[:k]) / self.total


def emoji_distribution(posts: Sequence[PostRecord]) -> EmojiDistribution:
    """Reaction counts summed across posts; rank ties break lexicographically."""
    counts: dict[str, int] = {}
    for post in latest_posts(posts):
        for emoji, count in post.reactions.items():
            counts[emoji] = counts.get(emoji, 0) + count
    ranked = tuple(sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])))
    return EmojiDistribution(ranked, sum(counts.values()))


@dataclass(frozen=True)
class ReplyStats:
    fraction_without_replies: Optional[float]
    median_words: Optional[float]
    mean_words: Optional[float]


def reply_stats(posts: Sequence[PostRecord]) -> ReplyStats:
    """Share of posts with no replies, plus reply length statistics
    (whitespace-delimited words)."""
    current = latest_posts(posts)
    if not current:
        return ReplyStats(None, None, None)
    without = sum(1 for p in current if not p.replies)
    lengths = [len(reply.split()) for p in current for reply in p.replies]
    if not lengths:
        return ReplyStats(without / len(current), None, None)
    return ReplyStats(
        fraction_without_replies=without / len(current),
        median_words=statistics.median(lengths),
        mean_words=sum(lengths) / len(lengths),
    )


# ---------------------------------------------------------------------------
# Piracy damage estimation

class PricingModel(str, Enum):
    Freemium = "Freemium"
    Premium = "Premium"


@dataclass(frozen=True)
class PriceModel:
    """Pricing of one pirated app. ``price_usd`` is integer cents; freemium
    apps carry their subscription price."""

    app_id: str
    pricing: PricingModel
    price_usd: int
    category: str = "Uncategorized"

    def __post_init__(self) -> None:
        if self.price_usd < 0:
            raise ValueError("price_usd (cents) must be non-negative")


@dataclass(frozen=True)
class DamageRow:
    category_name: str
    app_count: int
    min_price: int
    max_price: int
    median_price: float
    mean_price: float
    estimated_loss: int

    def __post_init__(self) -> None:
        if not self.min_price <= self.median_price <= self.max_price:
            raise ValueError("price stats must satisfy min <= median <= max")
        if self.estimated_loss < 0:
            raise ValueError("estimated_loss must be non-negative")


@dataclass(frozen=True)
class DamageTable:
    rows: tuple[DamageRow, ...]
    overall: DamageRow
    conversion_rate: float

    def to_csv(self) -> str:
        header = f"Category,Min,Max,Median,Mean,{self.conversion_rate:.0%} conversion"
        lines = [header]
        for row in tuple(self.rows) + (self.overall,):
            lines.append(
                f"{row.category_name} ({row.app_count}),"
                f"{row.min_price / 100:.2f},{row.max_price / 100:.2f},"
                f"{row.median_price / 100:.2f},{row.mean_price / 100:.2f},"
                f"{row.estimated_loss / 100:.2f}"
            )
        return "\n".join(lines) + "\n"


def estimate_damage(
    apps: Sequence[tuple[PriceModel, int]], config: PipelineConfig
) -> DamageTable:
    """Estimated developer losses per app category in exact integer cents.

    Per-app loss is round(views x conversion_rate) converted downloads times
    the app price; rows are grouped by category with an overall row that sums
    the category losses.
    """
    losses: dict[str, int] = {}
    prices: dict[str, list[int]] = {}
    all_prices: list[int] = []
    for model, views in apps:
        if views < 0:
            raise AnalyticsError(f"negative views for app {model.app_id!r}")
        converted = round(views * config.conversion_rate)
        loss = converted * model.price_usd
        losses[model.category] = losses.get(model.category, 0) + loss
        prices.setdefault(model.category, []).append(model.price_usd)
        all_prices.append(model.price_usd)
    rows = []
    for category in sorted(prices):
        group = prices[category]
        rows.append(
            DamageRow(
                category_name=category,
                app_count=len(group),
                min_price=min(group),
                max_price=max(group),
                median_price=statistics.median(group),
                mean_price=sum(group) / len(group),
                estimated_loss=losses[category],
            )
        )
    if all_prices:
        overall = DamageRow(
            category_name="Overall",
            app_count=len(all_prices),
            min_price=min(all_prices),
            max_price=max(all_prices),
            median_price=statistics.median(all_prices),
            mean_price=sum(all_prices) / len(all_prices),
            estimated_loss=sum(row.estimated_loss for row in rows),
        )
    else:
        overall = DamageRow("Overall", 0, 0, 0, 0.0, 0.0, 0)
    return DamageTable(tuple(rows), overall, config.conversion_rate)


# ---------------------------------------------------------------------------
# Rule-based software annotation (stand-in with a fixed output contract)

@dataclass(frozen=True)
class SoftwareAnnotation:
    app_id: str
    category: str
    pricing: PricingModel
    price_usd: Optional[int]


_CATEGORY_KEYWORDS: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("Communication", ("messenger", "chat", "sms", "mail", "dialer")),
    ("Entertainment", ("stream", "movie", "anime", "netflix", "iptv")),
    ("Gaming", ("game", "cheat", "aimbot", "minecraft")),
    ("Hacking", ("hack", "exploit", "rat", "crypter", "keylogger")),
    ("Media & Video", ("video", "player", "editor", "screen recorder")),
    ("Music & Audio", ("music", "audio", "spotify", "equalizer")),
    ("Photo & Video", ("photo", "camera", "filter", "collage")),
    ("Productivity", ("office", "pdf", "notes", "scanner", "keyboard")),
    ("Social Media", ("instagram", "tiktok", "followers", "likes")),
    ("Utility", ("cleaner", "launcher", "file manager", "battery")),
    ("VPN", ("vpn", "proxy")),
)

_PRICE_RE = re.compile(r"\$\s*(\d+(?:\.\d{1,2})?)")


def annotate_software(text: str, filename: Optional[str] = None) -> SoftwareAnnotation:
    """Keyword-table annotation of a pirated-software post: app id, category,
    pricing model, and advertised price when present."""
    haystack = f"{text} {filename or ''}".lower()
    category = "Utility"
    for name, keywords in _CATEGORY_KEYWORDS:
        if any(k in haystack for k in keywords):
            category = name
            break
    pricing = PricingModel.Freemium if ("subscription" in haystack or "premium unlock" in haystack) else PricingModel.Premium
    price = None
    match = _PRICE_RE.search(text)
    if match:
        price = int(round(float(match.group(1)) * 100))
    app_id = (filename or (text.split()[0] if text.split() else "unknown")).lower()
    return SoftwareAnnotation(app_id=app_id, category=category, pricing=pricing, price_usd=price)


# ---------------------------------------------------------------------------
# Domain overlap

def _load_suffixes() -> tuple[frozenset[str], frozenset[str]]:
    exact: set[str] = set()
    wildcard: set[str] = set()
    with resources.files("darkgram.data").joinpath("public_suffixes.txt").open(
        "r", encoding="utf-8"
    ) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("//"):
                continue
            if line.startswith("*."):
                wildcard.add(line[2:])
            else:
                exact.add(line)
    return frozenset(exact), frozenset(wildcard)


_EXACT_SUFFIXES, _WILDCARD_SUFFIXES = _load_suffixes()


def registrable_domain(url_or_host: str) -> Optional[str]:
    """Reduce a URL or hostname to its registrable domain using the bundled
    public-suffix snapshot. IP literals pass through; unparseable input
    yields None."""
    host = url_or_host
    if "://" in host:
        host = urlsplit(host).hostname or ""
    host = host.strip().strip(".").lower()
    if not host:
        return None
    if host.replace(".", "").isdigit() or ":" in host:
        return host
    labels = host.split(".")
    if len(labels) == 1:
        return host
    suffix_start = len(labels)  # index where the public suffix begins
    for i in range(len(labels)):
        candidate = ".".join(labels[i:])
        if candidate in _EXACT_SUFFIXES:
            suffix_start = i
            break
        if i + 1 < len(labels) and ".".join(labels[i + 1 :]) in _WILDCARD_SUFFIXES:
            suffix_start = i
            break
    if suffix_start == len(labels):
        suffix_start = len(labels) - 1  # unknown TLD: assume one-label suffix
    if suffix_start == 0:
        return host  # the host itself is a public suffix
    return ".".join(labels[suffix_start - 1 :])


@dataclass(frozen=True)
class OverlapReport:
    left_domains: frozenset[str]
    right_domains: frozenset[str]
    intersection_count: int
    ratio: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.ratio <= 1.0:
            raise ValueError("ratio must be in [0, 1]")


def forum_overlap(left_urls: Sequence[str], right_texts: Sequence[str]) -> OverlapReport:
    """Share of the left side's registrable domains that also occur in URLs
    extracted from the right-side texts."""
    left = frozenset(d for d in (registrable_domain(u) for u in left_urls) if d)
    right_set: set[str] = set()
    for text in right_texts:
        for url in extract_links(text):
            domain = registrable_domain(url)
            if domain:
                right_set.add(domain)
    intersection = left & right_set
    ratio = len(intersection) / len(left) if left else 0.0
    return OverlapReport(left, frozenset(right_set), len(intersection), ratio)
