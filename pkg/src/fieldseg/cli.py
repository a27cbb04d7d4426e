"""Command-line interface.

Exit codes: 0 on success, 2 for configuration/usage errors, 3 for data
errors (missing or malformed inputs).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError
from .harness import (
    ExperimentConfig,
    SampleResult,
    color_oracle_segmenter,
    emit_report,
    extract_tails,
    load_config_file,
    run_experiment,
)
from .masks import (
    LabelMap,
    MaskSet,
    PromptConfig,
    consolidate,
    filter_mmra,
    parse_maskset,
    prompt_grid,
    write_maskset,
)
from .metrics import ConsensusScores, score_label_maps
from .raster import (
    BandTriplet,
    MultispectralStack,
    StretchPolicy,
    extract_rgb_snapshot,
    snapshot_at_peak_greenness,
    tile_image,
)
from .stack_io import (
    read_label_raster,
    read_snapshot_png,
    read_stack_msst,
    read_stack_tiff_dir,
    write_label_raster,
    write_snapshot_png,
    write_stack_msst,
)
from .vectorize import build_shape_map, export_geojson


def _split_csv(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------


def _cmd_ingest(args: argparse.Namespace) -> int:
    src = Path(args.input)
    bands = _split_csv(args.bands)
    if src.is_dir():
        stack = read_stack_tiff_dir(src, bands, tile_id=args.tile_id)
    elif src.suffix == ".npy":
        try:
            data = np.load(src)
        except (OSError, ValueError) as exc:
            raise DataError(f"{src}: cannot load array: {exc}") from exc
        stack = MultispectralStack(data=data, band_names=bands,
                                   tile_id=args.tile_id or src.stem)
    else:
        raise ConfigError(f"{src}: input must be a .npy stack or a TIFF directory")
    write_stack_msst(stack, args.out)
    print(f"wrote {args.out} shape={stack.shape} bands={stack.band_names}")
    return 0


def _cmd_snapshot(args: argparse.Namespace) -> int:
    stack = read_stack_msst(args.stack)
    stretch = StretchPolicy(mode=args.stretch)
    rgb = tuple(_split_csv(args.rgb))
    if len(rgb) != 3:
        raise ConfigError(f"--rgb needs exactly 3 band names, got {rgb}")
    if args.timestep is not None:
        triplet = BandTriplet(*(stack.band_index(b) for b in rgb))
        snapshot = extract_rgb_snapshot(stack, args.timestep, triplet, stretch)
    else:
        snapshot = snapshot_at_peak_greenness(stack, args.nir, args.red, rgb, stretch)
    write_snapshot_png(snapshot, args.out)
    print(f"wrote {args.out} timestep={snapshot.source_timestep}")
    return 0


def _cmd_tile(args: argparse.Namespace) -> int:
    specs = tile_image(args.height, args.width, args.factor, stride=args.stride,
                       parent_tile_id=args.parent_id)
    doc = [
        {"tile_id": s.tile_id, "origin_row": s.origin_row, "origin_col": s.origin_col,
         "side": s.side}
        for s in specs
    ]
    print(json.dumps(doc, indent=2))
    return 0


def _cmd_prompts(args: argparse.Namespace) -> int:
    if args.pps is not None:
        pps = args.pps
    else:
        pps = PromptConfig.from_percent(args.side, args.pps_percent, 0.0).pps
    points = prompt_grid(args.side, pps)
    print(json.dumps({"side": args.side, "pps": pps,
                      "points": [[r, c] for r, c in points]}))
    return 0


def _cmd_segment_oracle(args: argparse.Namespace) -> int:
    snapshot = read_snapshot_png(args.snapshot)
    side = min(snapshot.height, snapshot.width)
    prompt = PromptConfig.from_percent(side, args.pps_percent, args.mmra_percent)
    raw = color_oracle_segmenter(snapshot, prompt, tolerance=args.tolerance)
    filtered = [filter_mmra(m, prompt.mmra) for m in raw.masks]
    filtered = [m for m in filtered if m.area > 0]
    mask_set = MaskSet(masks=filtered, image_id=raw.image_id, height=raw.height,
                       width=raw.width, generator_config=prompt)
    write_maskset(mask_set, args.out)
    print(f"wrote {args.out} masks={len(mask_set.masks)} pps={prompt.pps} "
          f"mmra={prompt.mmra}")
    return 0


def _cmd_consolidate(args: argparse.Namespace) -> int:
    mask_set = parse_maskset(args.maskset)
    label_map = consolidate(mask_set)
    write_label_raster(label_map.labels, args.out)
    print(f"wrote {args.out} labels={int(label_map.labels.max())} "
          f"unassigned={float(np.mean(label_map.labels == 0)):.4f}")
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    gt = read_label_raster(args.gt)
    if args.pred_maskset:
        pred = consolidate(parse_maskset(args.pred_maskset)).labels
    else:
        pred = read_label_raster(args.pred)
    scores = score_label_maps(gt, pred, args.exclude_background)
    doc = {k: round(v, 6) for k, v in scores.as_mapping().items()}
    doc["degenerate_flags"] = list(scores.degenerate_flags)
    print(json.dumps(doc, indent=2))
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    mapping = load_config_file(args.config) if args.config else {}
    if args.seed is not None:
        mapping["seed"] = args.seed
    if args.strict:
        mapping["strict"] = True
    config = ExperimentConfig.from_mapping(mapping)
    report = run_experiment(config, args.data_root)
    paths = emit_report(report, args.out_dir, fmt=args.format)
    ok = sum(1 for r in report.rows if r.status == "ok")
    failed = len(report.rows) - ok
    print(f"scored {ok} samples ({failed} failed, {len(report.skipped)} tiles skipped)")
    for path in paths:
        print(f"wrote {path}")
    return 0


def _cmd_tails(args: argparse.Namespace) -> int:
    path = Path(args.report)
    if not path.is_file():
        raise DataError(f"{path}: no such report")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid report JSON: {exc}") from exc
    rows = []
    for row in doc.get("rows", []):
        if row.get("status") != "ok":
            continue
        rows.append(SampleResult(
            tile_id=row["tile_id"],
            parent_tile_id=row.get("parent_tile_id", ""),
            origin_row=row.get("origin_row", 0),
            origin_col=row.get("origin_col", 0),
            side=row.get("side", 0),
            aoi_factor=row.get("aoi_factor", 1),
            pps_percent=row.get("pps_percent", 0.0),
            mmra_percent=row.get("mmra_percent", 0.0),
            pps=row.get("pps", 1),
            mmra=row.get("mmra", 0),
            status="ok",
            scores=ConsensusScores(**row["scores"]),
        ))
    print(json.dumps(extract_tails(rows, args.metric, args.k), indent=2))
    return 0


def _cmd_vectorize(args: argparse.Namespace) -> int:
    labels = read_label_raster(args.labels)
    shape_map = build_shape_map(LabelMap(labels=labels, image_id=args.image_id),
                                min_area=args.min_area)
    export_geojson(shape_map, args.out)
    print(f"wrote {args.out} polygons={len(shape_map.polygons)}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fieldseg",
        description="Evaluate class-agnostic segmentation masks against "
                    "crop-type rasters with clustering consensus metrics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="convert a .npy stack or TIFF directory to .msst")
    p.add_argument("--input", required=True)
    p.add_argument("--bands", required=True, help="comma-separated band names")
    p.add_argument("--tile-id", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("snapshot", help="render a stack as an RGB PNG (max-NDVI timestep)")
    p.add_argument("--stack", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--nir", default="B8")
    p.add_argument("--red", default="B4")
    p.add_argument("--rgb", default="B4,B3,B2")
    p.add_argument("--stretch", default="percentile", choices=("percentile", "minmax"))
    p.add_argument("--timestep", type=int, default=None,
                   help="render this timestep instead of the NDVI peak")
    p.set_defaults(func=_cmd_snapshot)

    p = sub.add_parser("tile", help="enumerate square sub-tile windows")
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--factor", type=int, required=True, choices=(1, 2, 4, 8))
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--parent-id", default="")
    p.set_defaults(func=_cmd_tile)

    p = sub.add_parser("prompts", help="print the prompt point grid for a side length")
    p.add_argument("--side", type=int, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--pps", type=int, default=None)
    group.add_argument("--pps-percent", type=float, default=None)
    p.set_defaults(func=_cmd_prompts)

    p = sub.add_parser("segment-oracle",
                       help="segment a snapshot with the color-oracle segmenter")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--pps-percent", type=float, required=True)
    p.add_argument("--mmra-percent", type=float, default=0.0)
    p.add_argument("--tolerance", type=int, default=12)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_segment_oracle)

    p = sub.add_parser("consolidate", help="flatten a maskset into a label raster")
    p.add_argument("--maskset", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_consolidate)

    p = sub.add_parser("score", help="score a prediction against ground truth")
    p.add_argument("--gt", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--pred", default=None, help="label raster .npy")
    group.add_argument("--pred-maskset", default=None, help="maskset .json")
    p.add_argument("--exclude-background", action="store_true")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("sweep", help="run the full experiment sweep")
    p.add_argument("--data-root", required=True)
    p.add_argument("--config", default=None, help=".toml or .json config file")
    p.add_argument("--out-dir", default="out")
    p.add_argument("--format", default="csv", choices=("csv", "json"))
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--strict", action="store_true",
                   help="fail the run on the first bad sample")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("tails", help="best/worst samples per metric from a JSON report")
    p.add_argument("--report", required=True)
    p.add_argument("--metric", default="fmi")
    p.add_argument("--k", type=int, default=5)
    p.set_defaults(func=_cmd_tails)

    p = sub.add_parser("vectorize", help="trace a label raster into GeoJSON polygons")
    p.add_argument("--labels", required=True)
    p.add_argument("--min-area", type=int, default=1)
    p.add_argument("--image-id", default="")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_vectorize)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
