"""Rule-based payload analysis: token-cue classification of credential vs.
session-cookie posts, filename statistics, proof detection, external-link
probing, and bot-transcript taxonomy.

All rules run off an auditable cue-token table (data/cues.json) so the rule
set can be replaced without code changes. Nothing here ever downloads,
stores, or parses payload file contents; link probing aborts transfers
before any body persistence.
"""

from __future__ import annotations

import json
import re
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import Mapping, Optional, Protocol, Sequence
from urllib.parse import urlsplit

from darkgram.core import PipelineConfig, record_to_dict


class PayloadKind(str, Enum):
    UserCredentials = "UserCredentials"
    SessionCookies = "SessionCookies"
    Unknown = "Unknown"


class BotKind(str, Enum):
    PaymentGateway = "PaymentGateway"
    ContentAccess = "ContentAccess"
    FollowToAccess = "FollowToAccess"
    Unknown = "Unknown"


class ProbeStatus(str, Enum):
    DownloadObserved = "DownloadObserved"
    Paywalled = "Paywalled"
    Unreachable = "Unreachable"
    NoDownload = "NoDownload"


_WORD_RE = re.compile(r"[A-Za-z0-9]+")
_PROOF_RE = re.compile(r"(?i)\b(?:proof|proofs)\b")
_COUNT_RE = re.compile(r"(?<![A-Za-z0-9])(\d{1,3}(?:,\d{3})+|\d+)([kK])?(?![A-Za-z0-9])")


def _load_data(name: str):
    with resources.files("darkgram.data").joinpath(name).open("r", encoding="utf-8") as fh:
        return json.load(fh)


def load_cues() -> dict[str, list[str]]:
    """The bundled cue-token table: credential/cookie/proof/payment/follow."""
    return _load_data("cues.json")


_SERVICES: frozenset[str] = frozenset(_load_data("services.json"))
_COUNTRIES: frozenset[str] = frozenset(_load_data("countries.json"))
_DEFAULT_CUES = load_cues()


def _tokens(text: str) -> list[str]:
    return [t.lower() for t in _WORD_RE.findall(text)]


def _cue_grams(cues: Sequence[str]) -> list[tuple[str, ...]]:
    return [tuple(_tokens(c)) for c in cues if _tokens(c)]


def _contains_gram(tokens: Sequence[str], gram: tuple[str, ...]) -> bool:
    if len(gram) == 1:
        return gram[0] in tokens
    n = len(gram)
    return any(tuple(tokens[i : i + n]) == gram for i in range(len(tokens) - n + 1))


def _any_cue(tokens: Sequence[str], cues: Sequence[str]) -> bool:
    return any(_contains_gram(tokens, g) for g in _cue_grams(cues))


# ---------------------------------------------------------------------------
# Payload kind and filename statistics

def detect_payload_kind(
    text: str,
    filenames: Sequence[str] = (),
    cues: Optional[Mapping[str, list[str]]] = None,
) -> PayloadKind:
    """Distinguish credential posts from session-cookie posts.

    Cookie cues dominate credential cues when both fire (cookie posts
    routinely mention accounts as well); no cue at all yields Unknown.
    """
    table = cues or _DEFAULT_CUES
    tokens = _tokens(text)
    for name in filenames:
        tokens.extend(_tokens(name))
    if _any_cue(tokens, table["cookie"]):
        return PayloadKind.SessionCookies
    if _any_cue(tokens, table["credential"]):
        return PayloadKind.UserCredentials
    return PayloadKind.Unknown


@dataclass(frozen=True)
class CredentialStats:
    estimated_count: Optional[int]
    service: Optional[str]
    countries: frozenset[str]
    large_leak: bool


def parse_credential_stats(
    filename: str, text: str = "", config: Optional[PipelineConfig] = None
) -> CredentialStats:
    """Extract leak-size and scope hints from a payload filename and post text.

    The estimated count is the largest integer token (k/K suffix expands
    x1000, digit groups may be comma-separated); country codes are matched
    as uppercase two-letter tokens only, to keep ordinary words out.
    """
    config = config or PipelineConfig()
    combined = f"{filename} {text}"
    best: Optional[int] = None
    for match in _COUNT_RE.finditer(combined):
        value = int(match.group(1).replace(",", ""))
        if match.group(2):
            value *= 1000
        if best is None or value > best:
            best = value
    countries = frozenset(
        t for t in _WORD_RE.findall(combined) if len(t) == 2 and t.isupper() and t in _COUNTRIES
    )
    service = None
    for token in _tokens(filename) + _tokens(text):
        if token in _SERVICES:
            service = token
            break
    large = best is not None and best >= config.large_leak_threshold
    return CredentialStats(best, service, countries, large)


def detect_proof_post(text: str) -> bool:
    """Whole-word, case-insensitive match of proof/proofs."""
    return bool(_PROOF_RE.search(text))


# ---------------------------------------------------------------------------
# External-link probing

@dataclass(frozen=True)
class LinkProbeResult:
    url: str
    status: ProbeStatus
    page_title: Optional[str] = None
    download_filename: Optional[str] = None

    def __post_init__(self) -> None:
        observed = self.status is ProbeStatus.DownloadObserved
        if observed != (self.download_filename is not None):
            raise ValueError("download_filename present iff status=DownloadObserved")


class PageUnreachable(Exception):
    """Network-level failure loading a page."""


@dataclass(frozen=True)
class FetchedPage:
    title: Optional[str]
    text: str
    download_candidates: tuple[str, ...]


class PageClient(Protocol):
    """Page-interaction contract used by the probe.

    ``begin_download`` starts a transfer only far enough to learn the
    filename and must abort before any body bytes are persisted.
    ``persist_download`` exists solely so tests can assert it is never
    invoked by the pipeline.
    """

    def load_page(self, url: str) -> FetchedPage: ...

    def begin_download(self, url: str, href: str) -> Optional[str]: ...

    def persist_download(self, url: str, href: str) -> None: ...


def probe_external_link(
    url: str,
    client: PageClient,
    cues: Optional[Mapping[str, list[str]]] = None,
) -> LinkProbeResult:
    """Load a page, detect paywalls, and capture any initiated download's
    filename without saving the file. Network failure maps to Unreachable."""
    scheme = urlsplit(url).scheme.lower()
    if scheme not in ("http", "https"):
        raise ValueError(f"probe requires an http/https URL, got {url!r}")
    table = cues or _DEFAULT_CUES
    try:
        page = client.load_page(url)
    except PageUnreachable:
        return LinkProbeResult(url, ProbeStatus.Unreachable)
    if _any_cue(_tokens(page.text), table["payment"]):
        return LinkProbeResult(url, ProbeStatus.Paywalled, page.title)
    for href in page.download_candidates:
        try:
            filename = client.begin_download(url, href)
        except PageUnreachable:
            continue
        if filename:
            return LinkProbeResult(url, ProbeStatus.DownloadObserved, page.title, filename)
    return LinkProbeResult(url, ProbeStatus.NoDownload, page.title)


def probe_links(
    urls: Sequence[str],
    client: PageClient,
    cues: Optional[Mapping[str, list[str]]] = None,
    concurrency: int = 4,
) -> list[LinkProbeResult]:
    """Probe many links with bounded concurrency and per-host serialization."""
    locks: dict[str, threading.Lock] = {}
    guard = threading.Lock()

    def host_lock(url: str) -> threading.Lock:
        host = urlsplit(url).netloc.lower()
        with guard:
            return locks.setdefault(host, threading.Lock())

    def work(url: str) -> LinkProbeResult:
        with host_lock(url):
            return probe_external_link(url, client, cues)

    with ThreadPoolExecutor(max_workers=max(1, concurrency)) as pool:
        return list(pool.map(work, urls))


def append_probe_results(results: Sequence[LinkProbeResult], path: str) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        for result in results:
            fh.write(json.dumps(record_to_dict(result), sort_keys=True, ensure_ascii=False) + "\n")


class MockPageClient:
    """Scripted PageClient; counts persistence attempts for ethics guards."""

    def __init__(
        self,
        pages: Mapping[str, FetchedPage],
        downloads: Optional[Mapping[str, str]] = None,
        unreachable: Sequence[str] = (),
    ) -> None:
        self.pages = dict(pages)
        self.downloads = dict(downloads or {})
        self.unreachable = set(unreachable)
        self.persist_calls = 0
        self.begin_calls = 0

    def load_page(self, url: str) -> FetchedPage:
        if url in self.unreachable or url not in self.pages:
            raise PageUnreachable(url)
        return self.pages[url]

    def begin_download(self, url: str, href: str) -> Optional[str]:
        self.begin_calls += 1
        return self.downloads.get(href)

    def persist_download(self, url: str, href: str) -> None:
        self.persist_calls += 1
        raise AssertionError("persistence of downloaded payloads is forbidden")


_TITLE_RE = re.compile(r"(?is)<title[^>]*>(.*?)</title>")
_HREF_RE = re.compile(r"""(?is)<a[^>]+href=["']([^"'#]+)["']""")
_TAG_RE = re.compile(r"(?s)<[^>]+>")


class HttpPageClient:
    """PageClient over plain HTTP. Downloads are probed by streaming only the
    response headers; the connection is closed before any body is read."""

    def __init__(self, timeout: float = 10.0) -> None:
        import httpx

        self._client = httpx.Client(follow_redirects=True, timeout=timeout)
        self._httpx = httpx
        self.persist_calls = 0

    def close(self) -> None:
        self._client.close()

    def load_page(self, url: str) -> FetchedPage:
        try:
            response = self._client.get(url)
        except self._httpx.HTTPError as exc:
            raise PageUnreachable(str(exc)) from exc
        if response.status_code >= 500:
            raise PageUnreachable(f"status {response.status_code}")
        html = response.text
        title_match = _TITLE_RE.search(html)
        title = title_match.group(1).strip() if title_match else None
        from urllib.parse import urljoin

        hrefs = tuple(urljoin(str(response.url), h) for h in _HREF_RE.findall(html))
        return FetchedPage(title=title, text=_TAG_RE.sub(" ", html), download_candidates=hrefs)

    def begin_download(self, url: str, href: str) -> Optional[str]:
        try:
            with self._client.stream("GET", href) as response:
                if response.status_code != 200:
                    return None
                disposition = response.headers.get("content-disposition", "")
                match = re.search(r'filename="?([^";]+)"?', disposition)
                if match:
                    return match.group(1)
                content_type = response.headers.get("content-type", "").lower()
                if "attachment" in disposition or (
                    content_type and "html" not in content_type and "json" not in content_type
                ):
                    name = urlsplit(href).path.rsplit("/", 1)[-1]
                    return name or None
                return None
        except self._httpx.HTTPError:
            return None

    def persist_download(self, url: str, href: str) -> None:
        self.persist_calls += 1
        raise AssertionError("persistence of downloaded payloads is forbidden")


# ---------------------------------------------------------------------------
# Bot taxonomy

@dataclass(frozen=True)
class BotMessage:
    text: str
    attachments: tuple[str, ...] = ()
    links: tuple[str, ...] = ()


def classify_bot(
    transcript: Sequence[BotMessage],
    cues: Optional[Mapping[str, list[str]]] = None,
) -> BotKind:
    """Classify a recorded bot transcript into the three-way taxonomy.

    Precedence when several cues fire: FollowToAccess > PaymentGateway >
    ContentAccess. Delivery (ContentAccess) means a file or link arrives
    with no gating cue anywhere in the transcript.
    """
    if not transcript:
        return BotKind.Unknown
    table = cues or _DEFAULT_CUES
    all_tokens: list[str] = []
    delivered = False
    for message in transcript:
        all_tokens.extend(_tokens(message.text))
        if message.attachments or message.links:
            delivered = True
    if _any_cue(all_tokens, table["follow"]):
        return BotKind.FollowToAccess
    if _any_cue(all_tokens, table["payment"]):
        return BotKind.PaymentGateway
    if delivered:
        return BotKind.ContentAccess
    return BotKind.Unknown
