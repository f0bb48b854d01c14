"""Trainer entry point: gen / prepare / train, all manifest-driven."""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from darkgram_trainer import gen_corpus
from darkgram_trainer.data import DatasetError, prepare_dataset
from darkgram_trainer.manifest import ManifestError, TrainingManifest
from darkgram_trainer.train import ExportError, train_and_export


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trainer", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_gen = sub.add_parser("gen", help="generate a templated fixture corpus")
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--per-class", type=int, default=1000)
    p_gen.add_argument("--seed", type=int, default=42)

    p_prepare = sub.add_parser("prepare", help="dedup and split a labeled corpus")
    p_prepare.add_argument("--manifest", required=True)

    p_train = sub.add_parser("train", help="train and export the artifact")
    p_train.add_argument("--manifest", required=True)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.subcommand == "gen":
            count = gen_corpus.write_corpus(args.out, args.per_class, args.seed)
            print(f"wrote {count} items to {args.out}")
        elif args.subcommand == "prepare":
            manifest = TrainingManifest.load(args.manifest)
            train_path, test_path = prepare_dataset(manifest.corpus, manifest)
            print(f"prepared {train_path} and {test_path}")
        else:
            manifest = TrainingManifest.load(args.manifest)
            export_dir = train_and_export(manifest)
            print(f"exported artifact to {export_dir}")
    except (ManifestError, DatasetError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
