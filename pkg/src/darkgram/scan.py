"""Scanner verdict aggregation for URLs and executables.

External scanner services sit behind small wire contracts (reputation
lookups, a fallback phishing detector, a sandbox+antivirus analyzer) so the
pipeline can run against mocks or live clients interchangeably. Decision
rules: a URL is malicious when flagged by at least ``url_engine_threshold``
engines or by the fallback detector; a file is malicious only when the
sandbox detects it AND at least ``file_av_threshold`` antivirus engines
flag it (conjunctive).
"""

from __future__ import annotations

import hashlib
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Iterable, Mapping, Optional, Protocol, Sequence

from darkgram.core import PipelineConfig

logger = logging.getLogger(__name__)


class UrlDecision(str, Enum):
    Malicious = "Malicious"
    Benign = "Benign"
    Unreachable = "Unreachable"


class FileDecision(str, Enum):
    Malicious = "Malicious"
    NotMalicious = "NotMalicious"


class ScannerUnreachableError(Exception):
    """Scanner endpoint could not be reached."""


@dataclass(frozen=True)
class ReputationResponse:
    engine_hits: int
    engines_total: int
    raw: Any = None


@dataclass(frozen=True)
class SandboxResponse:
    sandbox_detected: bool
    av_hits: int
    previously_seen: bool


class ReputationClient(Protocol):
    """Multi-engine URL reputation service: {url} -> {engine_hits, engines_total, raw}."""

    def lookup(self, url: str) -> ReputationResponse: ...


class FallbackClient(Protocol):
    """Appearance/behavior phishing detector consulted below the engine threshold."""

    def check(self, url: str) -> bool: ...


class SandboxClient(Protocol):
    """File sandbox: {digest} -> {sandbox_detected, av_hits, previously_seen}."""

    def analyze(self, digest: str) -> SandboxResponse: ...


@dataclass(frozen=True)
class UrlVerdict:
    url: str
    engine_hits: int
    engines_total: int
    final: UrlDecision
    fallback_flag: Optional[bool] = None
    scanned_at: Optional[int] = None

    def __post_init__(self) -> None:
        if self.engines_total < 1:
            raise ValueError("engines_total must be positive")
        if not 0 <= self.engine_hits <= self.engines_total:
            raise ValueError("engine_hits must be in [0, engines_total]")

    @property
    def verdict_id(self) -> str:
        basis = f"{self.url}|{self.scanned_at or 0}".encode()
        return "url-" + hashlib.sha256(basis).hexdigest()[:16]


@dataclass(frozen=True)
class FileVerdict:
    content_digest: str
    sandbox_detected: bool
    av_hits: int
    previously_seen: bool
    final: FileDecision

    def __post_init__(self) -> None:
        if self.av_hits < 0:
            raise ValueError("av_hits must be non-negative")

    @property
    def verdict_id(self) -> str:
        return "file-" + hashlib.sha256(self.content_digest.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Rate limiting and caching

class RateLimiter:
    """Token bucket; ``acquire`` blocks until a permit is available."""

    def __init__(
        self,
        rate_per_s: float,
        burst: int = 1,
        clock: Callable[[], float] = time.monotonic,
        sleeper: Callable[[float], None] = time.sleep,
    ) -> None:
        if rate_per_s <= 0:
            raise ValueError("rate_per_s must be positive")
        self.rate = rate_per_s
        self.capacity = max(1, burst)
        self._tokens = float(self.capacity)
        self._clock = clock
        self._sleeper = sleeper
        self._last = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                self._tokens = min(self.capacity, self._tokens + (now - self._last) * self.rate)
                self._last = now
                # epsilon keeps accumulated float error from stalling a
                # virtual clock on an unrepresentably small remainder wait
                if self._tokens >= 1.0 - 1e-9:
                    self._tokens = max(0.0, self._tokens - 1.0)
                    return
                wait = (1.0 - self._tokens) / self.rate
            self._sleeper(wait)


class VerdictCache:
    """Caches URL verdicts by (url, day) and file verdicts by digest."""

    def __init__(self) -> None:
        self._urls: dict[tuple[str, int], UrlVerdict] = {}
        self._files: dict[str, FileVerdict] = {}
        self._lock = threading.Lock()

    def get_url(self, url: str, day: int) -> Optional[UrlVerdict]:
        with self._lock:
            return self._urls.get((url, day))

    def put_url(self, url: str, day: int, verdict: UrlVerdict) -> None:
        with self._lock:
            self._urls[(url, day)] = verdict

    def get_file(self, digest: str) -> Optional[FileVerdict]:
        with self._lock:
            return self._files.get(digest)

    def put_file(self, digest: str, verdict: FileVerdict) -> None:
        with self._lock:
            self._files[digest] = verdict


def _day_of(now: Optional[int]) -> int:
    return int(now if now is not None else time.time()) // 86400


# ---------------------------------------------------------------------------
# Operations

def scan_url(
    url: str,
    reputation_client: ReputationClient,
    fallback_client: Optional[FallbackClient],
    config: PipelineConfig,
    cache: Optional[VerdictCache] = None,
    now: Optional[int] = None,
    bypass_cache: bool = False,
) -> UrlVerdict:
    """Aggregate a URL verdict.

    The fallback detector is consulted only when the engine count falls short
    of the threshold; an unreachable reputation service yields an Unreachable
    verdict without consulting the fallback.
    """
    day = _day_of(now)
    if cache is not None and not bypass_cache:
        hit = cache.get_url(url, day)
        if hit is not None:
            return hit
    scanned_at = int(now) if now is not None else int(time.time())
    try:
        response = reputation_client.lookup(url)
    except ScannerUnreachableError:
        verdict = UrlVerdict(url, 0, 1, UrlDecision.Unreachable, scanned_at=scanned_at)
        return verdict
    fallback_flag: Optional[bool] = None
    if response.engine_hits < config.url_engine_threshold and fallback_client is not None:
        try:
            fallback_flag = bool(fallback_client.check(url))
        except ScannerUnreachableError:
            logger.warning("fallback detector unreachable for %s; verdict from engines only", url)
            fallback_flag = None
    malicious = response.engine_hits >= config.url_engine_threshold or fallback_flag is True
    verdict = UrlVerdict(
        url=url,
        engine_hits=response.engine_hits,
        engines_total=response.engines_total,
        final=UrlDecision.Malicious if malicious else UrlDecision.Benign,
        fallback_flag=fallback_flag,
        scanned_at=scanned_at,
    )
    if cache is not None:
        cache.put_url(url, day, verdict)
    return verdict


_HEX_DIGITS = frozenset("0123456789abcdef")


def scan_file(
    digest: str,
    sandbox_client: SandboxClient,
    config: PipelineConfig,
    cache: Optional[VerdictCache] = None,
    bypass_cache: bool = False,
) -> FileVerdict:
    """Sandbox + antivirus verdict for an executable's content digest.

    The rule is conjunctive: sandbox detection alone or AV hits alone do not
    flag a file. An unreachable sandbox raises; verdicts are never fabricated.
    """
    normalized = digest.lower()
    if not normalized or any(c not in _HEX_DIGITS for c in normalized):
        raise ValueError(f"digest must be a hex content hash, got {digest!r}")
    if cache is not None and not bypass_cache:
        hit = cache.get_file(normalized)
        if hit is not None:
            return hit
    response = sandbox_client.analyze(normalized)
    malicious = response.sandbox_detected and response.av_hits >= config.file_av_threshold
    verdict = FileVerdict(
        content_digest=normalized,
        sandbox_detected=response.sandbox_detected,
        av_hits=response.av_hits,
        previously_seen=response.previously_seen,
        final=FileDecision.Malicious if malicious else FileDecision.NotMalicious,
    )
    if cache is not None:
        cache.put_file(normalized, verdict)
    return verdict


@dataclass(frozen=True)
class BatchScanSummary:
    scanned: int
    malicious: int
    unreachable: int
    malicious_fraction: Optional[float]


@dataclass(frozen=True)
class BatchScanResult:
    verdicts: tuple[UrlVerdict, ...]
    summary: BatchScanSummary


def batch_scan(
    urls: Sequence[str],
    reputation_client: ReputationClient,
    fallback_client: Optional[FallbackClient],
    config: PipelineConfig,
    cache: Optional[VerdictCache] = None,
    now: Optional[int] = None,
    concurrency: int = 8,
    rate_limiter: Optional[RateLimiter] = None,
) -> BatchScanResult:
    """Scan many URLs; deduplicates first, tolerates per-URL failures, and
    reports the malicious fraction (None when nothing was scanned)."""
    deduped = list(dict.fromkeys(urls))

    def work(url: str) -> UrlVerdict:
        if rate_limiter is not None:
            rate_limiter.acquire()
        return scan_url(url, reputation_client, fallback_client, config, cache, now)

    if deduped:
        with ThreadPoolExecutor(max_workers=max(1, concurrency)) as pool:
            verdicts = tuple(pool.map(work, deduped))
    else:
        verdicts = ()
    malicious = sum(1 for v in verdicts if v.final is UrlDecision.Malicious)
    unreachable = sum(1 for v in verdicts if v.final is UrlDecision.Unreachable)
    fraction = malicious / len(verdicts) if verdicts else None
    return BatchScanResult(
        verdicts,
        BatchScanSummary(len(verdicts), malicious, unreachable, fraction),
    )


# ---------------------------------------------------------------------------
# Mock clients (fixture-driven test doubles shipped with the wire contracts)

class MockReputationClient:
    def __init__(
        self,
        table: Mapping[str, tuple[int, int]],
        default: tuple[int, int] = (0, 80),
        unreachable: Iterable[str] = (),
    ) -> None:
        self.table = dict(table)
        self.default = default
        self.unreachable = set(unreachable)
        self.calls = 0
        self._lock = threading.Lock()

    def lookup(self, url: str) -> ReputationResponse:
        with self._lock:
            self.calls += 1
        if url in self.unreachable:
            raise ScannerUnreachableError(url)
        hits, total = self.table.get(url, self.default)
        return ReputationResponse(hits, total, raw={"url": url})


class MockFallbackClient:
    def __init__(self, flagged: Iterable[str] = (), unreachable: Iterable[str] = ()) -> None:
        self.flagged = set(flagged)
        self.unreachable = set(unreachable)
        self.calls = 0
        self._lock = threading.Lock()

    def check(self, url: str) -> bool:
        with self._lock:
            self.calls += 1
        if url in self.unreachable:
            raise ScannerUnreachableError(url)
        return url in self.flagged


class MockSandboxClient:
    def __init__(
        self,
        table: Mapping[str, SandboxResponse],
        unreachable: Iterable[str] = (),
    ) -> None:
        self.table = dict(table)
        self.unreachable = set(unreachable)
        self.calls = 0
        self._lock = threading.Lock()

    def analyze(self, digest: str) -> SandboxResponse:
        with self._lock:
            self.calls += 1
        if digest in self.unreachable:
            raise ScannerUnreachableError(digest)
        if digest not in self.table:
            return SandboxResponse(False, 0, False)
        return self.table[digest]
