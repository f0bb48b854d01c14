"""Templated fixture-corpus generation for the six post labels.

The real labeled corpus cannot be redistributed, so training fixtures are
synthesized from per-category post templates. Deterministic for a seed.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from darkgram_trainer.manifest import CANONICAL_LABELS

_TEMPLATES: dict[str, tuple[str, ...]] = {
    "Benign": (
        "good morning everyone, today we talk about {a} and {b}",
        "weekly digest: {a} news plus a community meetup about {b}",
        "recipe of the day: roasted vegetables with notes on {a}",
        "match recap: the local {a} club won the friendly finals yesterday",
        "new blog post with {a} tips for beginners, feedback welcome",
        "reminder: the {a} workshop starts this weekend, bring your own {b}",
    ),
    "CredentialCompromise": (
        "{count} {service} account credentials leaked, combo list attached",
        "fresh {service} logins mail:pass format {country} hits only",
        "mega leak {service} user:pass combos valid tested {count}",
        "{service} accounts database breach, full combo download inside",
        "{service} session cookies pack, import to browser for instant access",
        "new combolist {service} {country} mix, proofs in comments",
    ),
    "PiratedSoftware": (
        "{app} premium mod apk unlocked latest version",
        "{app} pro cracked full setup free, no license needed",
        "modded {app} with every feature unlocked, direct file below",
        "{app} patched build, ads removed, lifetime activation",
    ),
    "BlackhatResources": (
        "new {tool} exploit kit setup tutorial step by step",
        "{tool} rat builder with crypter bypass guide",
        "ddos botnet panel {tool} method, fresh config",
        "spamming course with smtp {tool} sender included",
    ),
    "PiratedMedia": (
        "{title} episode {n} 1080p webrip, subbed",
        "{title} full movie hdrip download now",
        "new season of {title}, all episodes in 4k remux",
        "{title} complete series pack, dual audio",
    ),
    "SocialMediaManipulation": (
        "buy {platform} followers cheap instant delivery",
        "{platform} likes and views boost, smm panel link below",
        "grow your {platform} by 10k followers fast, giveaway soon",
        "cheapest {platform} engagement service, resellers welcome",
    ),
}

_SLOTS = {
    "a": ["gardening", "photography", "hiking", "chess", "pottery", "cycling", "astronomy", "baking"],
    "b": ["origami", "calligraphy", "kayaking", "woodworking", "birdwatching"],
    "service": ["gmail", "hotmail", "netflix", "spotify", "yahoo", "outlook", "steam", "paypal"],
    "country": ["US", "UK", "DE", "FR", "BR", "IN", "CA", "AU"],
    "app": ["spotify", "photoshop", "minecraft", "office", "vpnmaster", "videoeditor", "camscanner"],
    "tool": ["silentloader", "darkrat", "cryptfox", "netstorm", "phishkit", "bruteforcer"],
    "title": ["onepiece", "darkmatter", "spacewars", "dragonsaga", "cityline", "wintercrown"],
    "platform": ["instagram", "tiktok", "youtube", "twitter", "facebook", "twitch"],
}


def generate_text(label: str, rng: random.Random) -> str:
    template = rng.choice(_TEMPLATES[label])
    values = {
        "count": rng.choice([500, 2500, 11000, 50000]),
        "n": rng.randint(1, 900),
    }
    for slot, options in _SLOTS.items():
        values[slot] = rng.choice(options)
    return template.format(**values)


def generate_corpus(per_class: int, seed: int) -> list[tuple[str, str]]:
    rng = random.Random(seed)
    items = []
    for _ in range(per_class):
        for label in CANONICAL_LABELS:
            items.append((generate_text(label, rng), label))
    rng.shuffle(items)
    return items


def write_corpus(path: str | Path, per_class: int, seed: int) -> int:
    items = generate_corpus(per_class, seed)
    with open(path, "w", encoding="utf-8") as fh:
        for text, label in items:
            fh.write(json.dumps({"text": text, "label": label}, ensure_ascii=False) + "\n")
    return len(items)


def probe_texts(n: int, seed: int) -> list[str]:
    """Fixed probe set cycling through all six labels."""
    rng = random.Random(seed)
    return [generate_text(CANONICAL_LABELS[i % len(CANONICAL_LABELS)], rng) for i in range(n)]
