"""Shared test fixtures: template corpus generation and scripted sources."""

from __future__ import annotations

import random
from typing import Iterable, Optional, Sequence

from darkgram.classify import LabeledCorpus
from darkgram.core import (
    BENIGN_LABEL,
    AttachmentKind,
    AttachmentMeta,
    CacCategory,
    EngagementSnapshot,
    PostRecord,
)
from darkgram.ingest import ChannelDeletedError, ChannelUnreachableError

_BENIGN_TOPICS = [
    "gardening", "photography", "hiking", "chess", "pottery", "cycling", "astronomy",
    "birdwatching", "baking", "origami", "calligraphy", "kayaking", "woodworking",
]
_BENIGN_TEMPLATES = [
    "good morning everyone, today we talk about {a} and {b}",
    "weekly digest: {a} news plus a community meetup about {b}",
    "recipe of the day: roasted vegetables with notes on {a}",
    "match recap: the local {a} club won the friendly finals yesterday",
    "new blog post with {a} tips for beginners, feedback welcome",
    "reminder: the {a} workshop starts this weekend, bring your own {b}",
    "photo contest winners announced, theme was {a}",
]

_SERVICES = ["gmail", "hotmail", "netflix", "spotify", "yahoo", "outlook", "steam", "paypal"]
_COUNTRY_TOKENS = ["US", "UK", "DE", "FR", "BR", "IN", "CA", "AU"]
_CRED_TEMPLATES = [
    "{count} {service} account credentials leaked, combo list attached",
    "fresh {service} logins mail:pass format {country} hits only",
    "mega leak {service} user:pass combos valid tested {count}",
    "{service} accounts database breach, full combo download inside",
    "{service} session cookies pack, import to browser for instant access",
    "new combolist {service} {country} mix, proofs in comments",
]

_APPS = ["spotify", "photoshop", "minecraft", "office", "vpnmaster", "videoeditor", "camscanner", "drivebooster"]
_SOFT_TEMPLATES = [
    "{app} premium mod apk unlocked latest version",
    "{app} pro cracked full setup free, no license needed",
    "modded {app} with every feature unlocked, direct file below",
    "{app} patched build, ads removed, lifetime activation",
]

_TOOLS = ["silentloader", "darkrat", "cryptfox", "netstorm", "phishkit", "bruteforcer", "stealerpro"]
_BLACK_TEMPLATES = [
    "new {tool} exploit kit setup tutorial step by step",
    "{tool} rat builder with crypter bypass guide",
    "ddos botnet panel {tool} method, fresh config",
    "spamming course with smtp {tool} sender included",
]

_TITLES = ["onepiece", "darkmatter", "spacewars", "dragonsaga", "cityline", "wintercrown"]
_MEDIA_TEMPLATES = [
    "{title} episode {n} 1080p webrip, subbed",
    "{title} full movie hdrip download now",
    "new season of {title}, all episodes in 4k remux",
    "{title} complete series pack, dual audio",
]

_PLATFORMS = ["instagram", "tiktok", "youtube", "twitter", "facebook", "twitch"]
_SMM_TEMPLATES = [
    "buy {platform} followers cheap instant delivery",
    "{platform} likes and views boost, smm panel link below",
    "grow your {platform} by 10k followers fast, giveaway soon",
    "cheapest {platform} engagement service, resellers welcome",
]


def generate_text(category: Optional[CacCategory], rng: random.Random) -> str:
    """One synthetic post text for a category (None means benign)."""
    if category is None:
        template = rng.choice(_BENIGN_TEMPLATES)
        return template.format(a=rng.choice(_BENIGN_TOPICS), b=rng.choice(_BENIGN_TOPICS))
    if category is CacCategory.CredentialCompromise:
        return rng.choice(_CRED_TEMPLATES).format(
            count=rng.choice([500, 2500, 11000, 50000]),
            service=rng.choice(_SERVICES),
            country=rng.choice(_COUNTRY_TOKENS),
        )
    if category is CacCategory.PiratedSoftware:
        return rng.choice(_SOFT_TEMPLATES).format(app=rng.choice(_APPS))
    if category is CacCategory.BlackhatResources:
        return rng.choice(_BLACK_TEMPLATES).format(tool=rng.choice(_TOOLS))
    if category is CacCategory.PiratedMedia:
        return rng.choice(_MEDIA_TEMPLATES).format(title=rng.choice(_TITLES), n=rng.randint(1, 900))
    return rng.choice(_SMM_TEMPLATES).format(platform=rng.choice(_PLATFORMS))


def generate_corpus(n_per_class: int, seed: int) -> LabeledCorpus:
    rng = random.Random(seed)
    items: list[tuple[str, str]] = []
    for _ in range(n_per_class):
        items.append((generate_text(None, rng), BENIGN_LABEL))
        for category in CacCategory:
            items.append((generate_text(category, rng), category.value))
    rng.shuffle(items)
    return LabeledCorpus(tuple(items))


def make_post(
    channel_id: str,
    post_id: int,
    text: str = "",
    posted_at: Optional[int] = None,
    views: int = 0,
    forwards: int = 0,
    reactions: Optional[dict[str, int]] = None,
    replies: Sequence[str] = (),
    attachments: Sequence[AttachmentMeta] = (),
    links: Sequence[str] = (),
) -> PostRecord:
    return PostRecord(
        channel_id=channel_id,
        post_id=post_id,
        posted_at=posted_at if posted_at is not None else post_id * 60,
        text=text,
        attachments=tuple(attachments),
        links=tuple(links),
        views=views,
        forwards=forwards,
        reactions=dict(reactions or {}),
        replies=tuple(replies),
    )


def make_attachment(filename: str, kind: AttachmentKind = AttachmentKind.Document, digest=None) -> AttachmentMeta:
    return AttachmentMeta(filename=filename, size_bytes=1024, kind=kind, content_digest=digest)


class StaticSource:
    """In-memory ChannelSource for discovery and polling tests."""

    def __init__(self) -> None:
        self.posts: dict[str, list[PostRecord]] = {}
        self.subscribers: dict[str, int] = {}
        self.unreachable: set[str] = set()
        self.now = 0

    def add_channel(self, channel_id: str, posts: Iterable[PostRecord], subscribers: int = 1000) -> None:
        self.posts[channel_id] = sorted(posts, key=lambda p: (p.posted_at, p.post_id), reverse=True)
        self.subscribers[channel_id] = subscribers

    def add_posts(self, channel_id: str, posts: Iterable[PostRecord]) -> None:
        merged = list(self.posts.get(channel_id, [])) + list(posts)
        self.posts[channel_id] = sorted(merged, key=lambda p: (p.posted_at, p.post_id), reverse=True)

    def list_recent_posts(self, channel_id: str, n: int) -> list[PostRecord]:
        if channel_id in self.unreachable:
            raise ChannelUnreachableError(channel_id)
        if channel_id not in self.posts:
            raise ChannelDeletedError(channel_id)
        return self.posts[channel_id][:n]

    def fetch_post(self, channel_id: str, post_id: int) -> PostRecord:
        for post in self.list_recent_posts(channel_id, len(self.posts.get(channel_id, []))):
            if post.post_id == post_id:
                return post
        from darkgram.ingest import PostDeletedError

        raise PostDeletedError(f"{channel_id}/{post_id}")

    def snapshot(self, channel_id: str) -> EngagementSnapshot:
        if channel_id in self.unreachable:
            raise ChannelUnreachableError(channel_id)
        if channel_id not in self.posts:
            raise ChannelDeletedError(channel_id)
        return EngagementSnapshot(channel_id, self.now, self.subscribers.get(channel_id, 0))
