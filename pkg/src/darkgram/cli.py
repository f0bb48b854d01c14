"""Pipeline entry point: ingest, classify, scan, discover, analyze, report.

Every run writes a RunManifest next to its outputs. In replay mode all
subcommands are deterministic: the same inputs, config, and seed produce
byte-identical outputs. Config comes from a plain key=value file with
DARKGRAM_* environment overrides; API tokens are environment-only.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional, Sequence

from darkgram import analytics, classify, discover, report, scan
from darkgram.core import PipelineConfig, channel_from_dict, dump_jsonl, record_to_dict
from darkgram.ingest import (
    ArchiveError,
    ReplaySource,
    archive_stats,
    read_archive,
    read_channels,
    run_replay,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_ENV = 2


class _InputError(Exception):
    pass


class _EnvironmentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse defaults to exit 2
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _log(run_id: str, level: str, message: str, **extra) -> None:
    entry = {"run_id": run_id, "level": level, "msg": message}
    entry.update(extra)
    print(json.dumps(entry, sort_keys=True), file=sys.stderr)


# ---------------------------------------------------------------------------
# Config

def load_config(path: Optional[str]) -> PipelineConfig:
    """Key = value config file with DARKGRAM_* environment overrides."""
    values: dict[str, str] = {}
    if path:
        p = Path(path)
        if not p.is_file():
            raise _InputError(f"config file not found: {path}")
        for lineno, line in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise _InputError(f"config line {lineno}: expected key = value")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    kwargs = {}
    for f in fields(PipelineConfig):
        raw = os.environ.get(f"DARKGRAM_{f.name.upper()}", values.get(f.name))
        if raw is None:
            continue
        try:
            kwargs[f.name] = float(raw) if f.name == "conversion_rate" else int(raw)
        except ValueError as exc:
            raise _InputError(f"config value for {f.name}: {exc}") from exc
    try:
        return PipelineConfig(**kwargs)
    except ValueError as exc:
        raise _InputError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Run manifest

@dataclass(frozen=True)
class RunManifest:
    run_id: str
    started_at: int
    subcommand: str
    config: dict
    inputs: dict
    outputs: dict
    counters: dict
    seed: Optional[int] = None


def _make_run_id(subcommand: str, config: PipelineConfig, inputs: dict, seed: Optional[int]) -> str:
    basis = json.dumps(
        {"cmd": subcommand, "config": record_to_dict(config), "inputs": inputs, "seed": seed},
        sort_keys=True,
    )
    return hashlib.sha256(basis.encode()).hexdigest()[:12]


def _write_manifest(manifest: RunManifest, anchor: Path) -> Path:
    if anchor.is_dir():
        path = anchor / "run_manifest.json"
    else:
        path = anchor.parent / f"{anchor.stem}_manifest.json"
    path.write_text(
        json.dumps(record_to_dict(manifest), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return path


def _require_file(value: str, label: str) -> Path:
    path = Path(value)
    if not path.is_file():
        raise _InputError(f"{label} not found: {value}")
    return path


def _load_model(path: str) -> classify.ClassifierBackend:
    try:
        return classify.load_external_backend(path)
    except classify.BackendUnavailableError as exc:
        raise _EnvironmentError(str(exc)) from exc
    except classify.ArtifactError as exc:
        raise _InputError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Subcommands

def _cmd_ingest(args, config: PipelineConfig) -> int:
    if args.source == "live":
        raise _EnvironmentError(
            "live source requires a platform API adapter and DARKGRAM_API_TOKEN; "
            "this build ships the replay source only"
        )
    fixture = _require_file(args.fixture, "fixture")
    inputs = {"fixture": str(fixture)}
    run_id = _make_run_id("ingest", config, inputs, None)
    out_dir = Path(args.out)
    result = run_replay(fixture, out_dir, config, cycles=args.cycles)
    manifest = RunManifest(
        run_id=run_id,
        started_at=ReplaySource.from_path(fixture).clock.now,
        subcommand="ingest",
        config=record_to_dict(config),
        inputs=inputs,
        outputs={"archive": "."},
        counters={
            "cycles": result.cycles,
            "post_rows": result.posts_written,
            "snapshots": result.snapshots_written,
            "channels": result.stats.channels,
            "posts": result.stats.posts,
        },
    )
    _write_manifest(manifest, out_dir)
    _log(run_id, "info", "ingest complete", posts=result.stats.posts, cycles=result.cycles)
    return EXIT_OK


def _cmd_classify(args, config: PipelineConfig) -> int:
    if args.train:
        corpus_path = _require_file(args.train, "corpus")
        corpus = classify.load_corpus(corpus_path)
        if args.split:
            corpus = classify.stratified_split(corpus, args.split, args.seed)
        try:
            model = classify.train_baseline(corpus, seed=args.seed)
        except classify.CorpusError as exc:
            raise _InputError(str(exc)) from exc
        model_dir = Path(args.model)
        classify.save_baseline(model, model_dir)
        counters = {"items": len(corpus.items)}
        if args.split:
            table = classify.evaluate(model, corpus.test_view())
            (model_dir / "metrics.csv").write_text(table.to_csv(), encoding="utf-8")
            counters["macro_f1"] = round(classify.macro_f1(table), 6)
        inputs = {"corpus": str(corpus_path)}
        run_id = _make_run_id("classify-train", config, inputs, args.seed)
        manifest = RunManifest(
            run_id=run_id, started_at=0, subcommand="classify",
            config=record_to_dict(config), inputs=inputs,
            outputs={"model": "."}, counters=counters, seed=args.seed,
        )
        _write_manifest(manifest, model_dir)
        _log(run_id, "info", "baseline trained", **counters)
        return EXIT_OK
    if not args.model or not args.infile or not args.out:
        raise _InputError("classify requires --model, --in, and --out (or --train)")
    model = _load_model(args.model)
    posts_path = _require_file(args.infile, "input archive")
    from darkgram.ingest import latest_posts

    posts = latest_posts(read_archive(posts_path))
    results = []
    flagged = 0
    for post in posts:
        result = classify.classify_post(model, post)
        flagged += int(result.is_ca)
        row = {"channel_id": post.channel_id, "post_id": post.post_id}
        row.update(result.to_dict())
        results.append(row)
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as fh:
        for row in results:
            fh.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")
    inputs = {"model": args.model, "in": str(posts_path)}
    run_id = _make_run_id("classify", config, inputs, args.seed)
    manifest = RunManifest(
        run_id=run_id, started_at=0, subcommand="classify",
        config=record_to_dict(config), inputs=inputs,
        outputs={"results": out_path.name},
        counters={"posts": len(results), "flagged": flagged}, seed=args.seed,
    )
    _write_manifest(manifest, out_path)
    _log(run_id, "info", "classification complete", posts=len(results), flagged=flagged)
    return EXIT_OK


def _load_scan_mock(path: Path):
    data = json.loads(path.read_text(encoding="utf-8"))
    reputation = scan.MockReputationClient(
        {url: tuple(hits) for url, hits in data.get("reputation", {}).items()},
        default=tuple(data.get("default", (0, 80))),
        unreachable=data.get("unreachable", ()),
    )
    fallback = scan.MockFallbackClient(flagged=data.get("fallback", ()))
    sandbox = scan.MockSandboxClient(
        {
            digest: scan.SandboxResponse(bool(v[0]), int(v[1]), bool(v[2]))
            for digest, v in data.get("sandbox", {}).items()
        }
    )
    return reputation, fallback, sandbox


def _cmd_scan(args, config: PipelineConfig) -> int:
    if not args.mock:
        raise _EnvironmentError(
            "live scanning requires DARKGRAM_SCANNER_KEY and scanner adapters; "
            "provide --mock for fixture-driven scans"
        )
    mock_path = _require_file(args.mock, "mock fixture")
    reputation, fallback, sandbox = _load_scan_mock(mock_path)
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    counters: dict = {}
    inputs = {"mock": str(mock_path)}
    rows = []
    if args.urls:
        urls_path = _require_file(args.urls, "urls file")
        urls = [u.strip() for u in urls_path.read_text(encoding="utf-8").splitlines() if u.strip()]
        inputs["urls"] = str(urls_path)
        result = scan.batch_scan(urls, reputation, fallback, config, now=args.now)
        for verdict in result.verdicts:
            row = record_to_dict(verdict)
            row["verdict_id"] = verdict.verdict_id
            rows.append(row)
        counters.update(
            scanned=result.summary.scanned,
            malicious=result.summary.malicious,
            malicious_fraction=result.summary.malicious_fraction,
        )
    if args.files:
        files_path = _require_file(args.files, "digest file")
        digests = [d.strip() for d in files_path.read_text(encoding="utf-8").splitlines() if d.strip()]
        inputs["files"] = str(files_path)
        malicious_files = 0
        for digest in digests:
            try:
                verdict = scan.scan_file(digest, sandbox, config)
            except scan.ScannerUnreachableError as exc:
                raise _EnvironmentError(f"sandbox unreachable: {exc}") from exc
            except ValueError as exc:
                raise _InputError(str(exc)) from exc
            malicious_files += int(verdict.final is scan.FileDecision.Malicious)
            row = record_to_dict(verdict)
            row["verdict_id"] = verdict.verdict_id
            rows.append(row)
        counters.update(files=len(digests), malicious_files=malicious_files)
    if not args.urls and not args.files:
        raise _InputError("scan requires --urls and/or --files")
    with open(out_path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")
    run_id = _make_run_id("scan", config, inputs, None)
    manifest = RunManifest(
        run_id=run_id, started_at=args.now, subcommand="scan",
        config=record_to_dict(config), inputs=inputs,
        outputs={"verdicts": out_path.name}, counters=counters,
    )
    _write_manifest(manifest, out_path)
    _log(run_id, "info", "scan complete", **counters)
    return EXIT_OK


def _cmd_discover(args, config: PipelineConfig) -> int:
    if args.source == "live":
        raise _EnvironmentError(
            "live source requires a platform API adapter and DARKGRAM_API_TOKEN"
        )
    seeds_path = _require_file(args.seeds, "seeds file")
    seeds = [
        line.strip().lower()
        for line in seeds_path.read_text(encoding="utf-8").splitlines()
        if line.strip() and not line.startswith("#")
    ]
    if not seeds:
        raise _InputError(f"seeds file is empty: {seeds_path}")
    fixture = _require_file(args.fixture, "fixture")
    source = ReplaySource.from_path(fixture)
    source.clock.now = source.end_time
    model = _load_model(args.model)
    result = discover.run_frontier(
        seeds, source, model, config, now=source.end_time, recheck_days=args.recheck_days
    )
    decisions = [result.decisions[ch] for ch in sorted(result.decisions)]
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as fh:
        for decision in decisions:
            fh.write(json.dumps(decision.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")
    flagged = sum(1 for d in decisions if d.decision is discover.FlagOutcome.Malicious)
    inputs = {"seeds": str(seeds_path), "fixture": str(fixture), "model": args.model}
    run_id = _make_run_id("discover", config, inputs, None)
    manifest = RunManifest(
        run_id=run_id, started_at=source.end_time, subcommand="discover",
        config=record_to_dict(config), inputs=inputs,
        outputs={"decisions": out_path.name},
        counters={
            "evaluated": len(decisions),
            "flagged": flagged,
            "deferred": sum(1 for d in decisions if d.decision is discover.FlagOutcome.Deferred),
            "errors": len(result.errors),
        },
    )
    _write_manifest(manifest, out_path)
    _log(run_id, "info", "frontier complete", evaluated=len(decisions), flagged=flagged)
    return EXIT_OK


def _read_archive_dir(archive_dir: str):
    root = Path(archive_dir)
    posts_path = root / "posts.jsonl"
    if not posts_path.is_file():
        raise _InputError(f"archive posts not found: {posts_path}")
    posts = list(read_archive(posts_path))
    snapshots = []
    snaps_path = root / "snapshots.jsonl"
    if snaps_path.is_file():
        from darkgram.core import snapshot_from_dict

        for line in snaps_path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                snapshots.append(snapshot_from_dict(json.loads(line)))
    channels = []
    channels_path = root / "channels.jsonl"
    if channels_path.is_file():
        channels = read_channels(channels_path)
    return posts, snapshots, channels


def _cmd_analyze(args, config: PipelineConfig) -> int:
    posts, snapshots, channels = _read_archive_dir(args.archive)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    counters: dict = {}
    inputs = {"archive": args.archive}

    def write_json(name: str, payload) -> None:
        (out_dir / name).write_text(
            json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )

    series = analytics.growth_series(snapshots, config)
    write_json(
        "growth.json",
        {
            "observations": [record_to_dict(o) for o in series.observations],
            "notes": list(series.notes),
        },
    )
    counters["growth_windows"] = len(series.observations)

    if series.observations:
        association = analytics.forward_growth_association(posts, series.observations)
        write_json("forwards.json", record_to_dict(association))

    distribution = analytics.emoji_distribution(posts)
    write_json(
        "emoji.json",
        {
            "ranked": [[e, c] for e, c in distribution.ranked],
            "total": distribution.total,
            "top_10_share": distribution.top_k_share(10),
        },
    )
    counters["distinct_emojis"] = len(distribution.ranked)

    write_json("replies.json", record_to_dict(analytics.reply_stats(posts)))

    if args.removed:
        removed_path = _require_file(args.removed, "removed-channels file")
        removed = [
            line.strip() for line in removed_path.read_text(encoding="utf-8").splitlines() if line.strip()
        ]
        inputs["removed"] = str(removed_path)
        events = analytics.detect_migration(posts, snapshots, channels, config, removed)
        write_json("migration.json", [record_to_dict(e) for e in events])
        counters["migrations"] = len(events)

    if args.apps:
        apps_path = _require_file(args.apps, "apps file")
        inputs["apps"] = str(apps_path)
        apps = []
        for line in apps_path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            row = json.loads(line)
            model = analytics.PriceModel(
                app_id=row["app_id"],
                pricing=analytics.PricingModel(row["pricing"]),
                price_usd=int(row["price_usd"]),
                category=row.get("category", "Uncategorized"),
            )
            apps.append((model, int(row["views"])))
        table = analytics.estimate_damage(apps, config)
        (out_dir / "damage.csv").write_text(table.to_csv(), encoding="utf-8")
        counters["damage_categories"] = len(table.rows)

    if args.forum:
        forum_path = _require_file(args.forum, "forum texts file")
        inputs["forum"] = str(forum_path)
        left_urls = [url for post in posts for url in post.links]
        right_texts = [
            line for line in forum_path.read_text(encoding="utf-8").splitlines() if line.strip()
        ]
        overlap = analytics.forum_overlap(left_urls, right_texts)
        write_json(
            "overlap.json",
            {
                "left_count": len(overlap.left_domains),
                "right_count": len(overlap.right_domains),
                "intersection_count": overlap.intersection_count,
                "ratio": overlap.ratio,
            },
        )
        counters["overlap_ratio"] = overlap.ratio

    run_id = _make_run_id("analyze", config, inputs, None)
    manifest = RunManifest(
        run_id=run_id, started_at=0, subcommand="analyze",
        config=record_to_dict(config), inputs=inputs,
        outputs={"reports": "."}, counters=counters,
    )
    _write_manifest(manifest, out_dir)
    _log(run_id, "info", "analytics written", **{k: v for k, v in counters.items() if v is not None})
    return EXIT_OK


def _cmd_report(args, config: PipelineConfig) -> int:
    if args.ledger_stats:
        ledger_path = _require_file(args.ledger_stats, "ledger")
        stats = report.ledger_stats(report.read_ledger(ledger_path))
        print(json.dumps(record_to_dict(stats), sort_keys=True))
        return EXIT_OK
    if not args.decisions or not args.archive or not args.outbox:
        raise _InputError("report requires --decisions, --archive, and --outbox (or --ledger-stats)")
    decisions_path = _require_file(args.decisions, "decisions")
    decisions = discover.load_decisions(str(decisions_path))
    posts, _, channels = _read_archive_dir(args.archive)
    channel_by_id = {c.channel_id: c for c in channels}

    refs: dict[tuple[str, int], list[str]] = {}
    verdicts = []
    if args.verdicts:
        verdict_path = _require_file(args.verdicts, "verdicts")
        for line in verdict_path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            row = json.loads(line)
            if "url" not in row:
                continue
            verdict = scan.UrlVerdict(
                url=row["url"],
                engine_hits=int(row["engine_hits"]),
                engines_total=int(row["engines_total"]),
                final=scan.UrlDecision(row["final"]),
                fallback_flag=row.get("fallback_flag"),
                scanned_at=row.get("scanned_at"),
            )
            verdicts.append(verdict)
        from darkgram.ingest import latest_posts

        by_url = {v.url: v for v in verdicts}
        for post in latest_posts(posts):
            for url in post.links:
                verdict = by_url.get(url)
                if verdict is not None and verdict.final is scan.UrlDecision.Malicious:
                    refs.setdefault((post.channel_id, post.post_id), []).append(verdict.verdict_id)

    evidence = report.EvidenceStore(posts, refs)
    outbox = report.Outbox(args.outbox)
    written = 0
    skipped = 0
    for decision in decisions:
        if decision.decision is not discover.FlagOutcome.Malicious:
            continue
        channel = channel_by_id.get(decision.channel_id)
        if channel is None:
            from darkgram.core import ChannelRecord, SourceKind

            channel = ChannelRecord(
                channel_id=decision.channel_id, title=decision.channel_id, description="",
                created_at=0, replies_enabled=False, category=decision.majority_category,
                source_kind=SourceKind.Replay,
            )
        bundle = report.build_report(
            channel, decision, evidence, now=args.now if args.now is not None else None
        )
        if not outbox.should_send(
            bundle.channel_url, [s.post_id for s in bundle.post_summaries], bundle.created_at
        ):
            skipped += 1
            continue
        outbox.write(bundle)
        written += 1
    counters = {"bundles": written, "suppressed": skipped}
    if args.blocklist:
        if not verdicts:
            raise _InputError("--blocklist requires --verdicts")
        path = report.export_blocklist(verdicts, args.blocklist, args.outbox)
        counters["blocklist_rows"] = len(path.read_text(encoding="utf-8").splitlines()) - 1
    inputs = {"decisions": str(decisions_path), "archive": args.archive}
    run_id = _make_run_id("report", config, inputs, None)
    manifest = RunManifest(
        run_id=run_id,
        started_at=args.now if args.now is not None else 0,
        subcommand="report",
        config=record_to_dict(config), inputs=inputs,
        outputs={"outbox": "."}, counters=counters,
    )
    _write_manifest(manifest, Path(args.outbox))
    _log(run_id, "info", "reports written", **counters)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="darkgram", description=__doc__)
    parser.add_argument("--config", default=None, help="key = value config file")
    parser.add_argument("--seed", type=int, default=0, help="seed for reproducible runs")
    # the same flags are accepted after the subcommand; SUPPRESS keeps the
    # subparser from clobbering values parsed at the top level
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def add_parser(name: str, help_text: str):
        return sub.add_parser(name, help=help_text, parents=[common])

    p_ingest = add_parser("ingest", "poll a source and write the archive")
    p_ingest.add_argument("--fixture", required=True, help="replay script (JSONL)")
    p_ingest.add_argument("--out", required=True, help="archive output directory")
    p_ingest.add_argument("--cycles", type=int, default=None)
    p_ingest.add_argument("--source", choices=["replay", "live"], default="replay")

    p_classify = add_parser("classify", "train the baseline or classify an archive")
    p_classify.add_argument("--train", help="labeled corpus JSONL to train on")
    p_classify.add_argument("--split", type=float, default=None, help="train share, e.g. 0.7")
    p_classify.add_argument("--model", help="model artifact directory")
    p_classify.add_argument("--in", dest="infile", help="posts.jsonl to classify")
    p_classify.add_argument("--out", help="results JSONL path")

    p_scan = add_parser("scan", "scan URLs and executable digests")
    p_scan.add_argument("--urls", help="file of URLs, one per line")
    p_scan.add_argument("--files", help="file of content digests, one per line")
    p_scan.add_argument("--out", required=True, help="verdicts JSONL path")
    p_scan.add_argument("--mock", help="mock scanner fixture (JSON)")
    p_scan.add_argument("--now", type=int, default=0, help="logical scan time (epoch s)")

    p_discover = add_parser("discover", "run the discovery frontier")
    p_discover.add_argument("--seeds", required=True, help="seed channel handles, one per line")
    p_discover.add_argument("--source", choices=["replay", "live"], default="replay")
    p_discover.add_argument("--fixture", required=True, help="replay script (JSONL)")
    p_discover.add_argument("--model", required=True, help="model artifact directory")
    p_discover.add_argument("--out", required=True, help="decisions JSONL path")
    p_discover.add_argument("--recheck-days", type=int, default=7)

    p_analyze = add_parser("analyze", "write all analytics reports")
    p_analyze.add_argument("--archive", required=True, help="archive directory from ingest")
    p_analyze.add_argument("--out", required=True, help="reports output directory")
    p_analyze.add_argument("--apps", help="apps JSONL for damage estimation")
    p_analyze.add_argument("--forum", help="forum post texts for overlap")
    p_analyze.add_argument("--removed", help="removed channel ids for migration detection")

    p_report = add_parser("report", "build bundles, blocklists, ledger stats")
    p_report.add_argument("--decisions", help="decisions JSONL from discover")
    p_report.add_argument("--archive", help="archive directory")
    p_report.add_argument("--outbox", help="outbox directory")
    p_report.add_argument("--verdicts", help="verdicts JSONL from scan")
    p_report.add_argument("--blocklist", help="export blocklist CSV for this destination")
    p_report.add_argument("--ledger-stats", help="ledger JSONL to summarize")
    p_report.add_argument("--now", type=int, default=None, help="logical report time (epoch s)")

    return parser


_HANDLERS = {
    "ingest": _cmd_ingest,
    "classify": _cmd_classify,
    "scan": _cmd_scan,
    "discover": _cmd_discover,
    "analyze": _cmd_analyze,
    "report": _cmd_report,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = load_config(args.config)
        return _HANDLERS[args.subcommand](args, config)
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ArchiveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except _EnvironmentError as exc:
        print(f"environment error: {exc}", file=sys.stderr)
        return EXIT_ENV


if __name__ == "__main__":
    raise SystemExit(main())
