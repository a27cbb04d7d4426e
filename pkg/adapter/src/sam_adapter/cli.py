"""sam-adapter command line.

Exit codes: 0 all jobs succeeded (or were validly skipped), 1 any job
failed (including model/checkpoint problems), 2 usage or manifest errors.
"""
from __future__ import annotations

import argparse
import sys

from .errors import AdapterError, ManifestError
from .jobs import parse_manifest
from .run import batch, make_generator_builder


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sam-adapter",
        description="Run the automatic mask generator over snapshots and "
                    "write interchange maskset files.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="process a JSON-lines jobs manifest")
    p.add_argument("--manifest", required=True,
                   help="JSONL: one {tile_id, snapshot, pps, mmra, ...} per line")
    p.add_argument("--checkpoint", required=True, help="model checkpoint path")
    p.add_argument("--out", required=True, help="output root; files land under "
                                                "masks/<tile_id>/pps<P>_mmra<M>.json")
    p.add_argument("--device", default="cpu")
    p.add_argument("--variant", default="vit_h",
                   help="model variant for jobs that do not name one")
    p.add_argument("--force", action="store_true",
                   help="regenerate outputs even when a valid file exists")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        jobs = parse_manifest(args.manifest, args.out,
                              default_variant=args.variant, device=args.device)
    except ManifestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not jobs:
        print("manifest lists no jobs; nothing to do", file=sys.stderr)
        return 0
    try:
        builder = make_generator_builder(args.checkpoint, args.variant,
                                         device=args.device)
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    summary = batch(jobs, builder, force=args.force)
    print(f"{summary['written']} written, {summary['skipped']} skipped, "
          f"{len(summary['failed'])} failed", file=sys.stderr)
    return 1 if summary["failed"] else 0


if __name__ == "__main__":
    sys.exit(main())
