"""Experiment harness: sweep prompt density and filter strength over tiles.

Data layout under a data root:

    stacks/<tile_id>.msst      multispectral stacks (optional when PNG exists)
    snapshots/<tile_id>.png    RGB snapshots (derived from stacks if absent)
    truth/<tile_id>.npy        crop-class rasters aligned with the snapshots
    masks/<tile_id>/pps<P>_mmra<M>.json   externally generated masksets
    exclusions.txt             manually excluded tile ids (optional)

A run enumerates sub-tiles per AOI factor, samples a fixed number of them
reproducibly, obtains a maskset per (pps%, mmra%) cell (from the built-in
color-oracle segmenter or from external files), consolidates it into a
label map, and scores it against ground truth with the consensus metrics.

Determinism contract: equal (config, data root) produce byte-identical
canonical report files. Scores are rounded to 6 decimals when rows are
built and every aggregate is computed from those rounded values, so
re-deriving aggregates from the per-sample CSV reproduces the aggregates
file exactly. Wall-clock timings are real and therefore live in a separate
non-canonical sidecar (timings.csv).
"""
from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import ConfigError, DataError, FieldsegError
from .masks import (
    FOUR_CONNECTED,
    BooleanMask,
    LabelMap,
    MaskSet,
    PromptConfig,
    consolidate,
    filter_mmra,
    maskset_filename,
    parse_maskset,
)
from .metrics import METRIC_NAMES, ConsensusScores, score_label_maps
from .raster import (
    RgbSnapshot,
    ScreenPolicy,
    StretchPolicy,
    TileSpec,
    sample_select,
    screen_clouds,
    snapshot_at_peak_greenness,
    tile_image,
)
from .stack_io import (
    load_exclusion_list,
    read_label_raster,
    read_snapshot_png,
    read_stack_msst,
)

QUANTILES = (1, 5, 25, 50, 75, 95, 99)


def round6(x: float) -> float:
    """The report rounding: 6 decimal places, as an exact double."""
    return float(f"{x:.6f}")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    """Everything a sweep needs besides the data root.

    aoi_factors picks sub-tile sizes (side = min(H, W) // factor);
    pps_percents and mmra_percents are fractions of the sub-tile side and
    area respectively, resolved per sub-tile with round-half-up.
    """

    aoi_factors: tuple[int, ...] = (1, 2, 4, 8)
    pps_percents: tuple[float, ...] = (0.01, 0.02, 0.04, 0.08)
    mmra_percents: tuple[float, ...] = (0.0, 0.001, 0.005, 0.01)
    samples_per_set: int = 300
    seed: int = 0
    segmenter: str = "color_oracle"        # or "external"
    color_tolerance: int = 12
    nir_band: str = "B8"
    red_band: str = "B4"
    rgb_bands: tuple[str, str, str] = ("B4", "B3", "B2")
    stretch: StretchPolicy = field(default_factory=StretchPolicy)
    brightness_threshold: int = 200
    cloud_fraction_threshold: float = 0.05
    exclude_predicted_background: bool = False
    strict: bool = False
    tails_k: int = 5

    def __post_init__(self) -> None:
        if not self.aoi_factors:
            raise ConfigError("aoi_factors must not be empty")
        for f_ in self.aoi_factors:
            if f_ not in (1, 2, 4, 8):
                raise ConfigError(f"aoi factor must be one of 1, 2, 4, 8; got {f_}")
        if not self.pps_percents:
            raise ConfigError("pps_percents must not be empty")
        for p in self.pps_percents:
            if not (0.0 < p <= 1.0):
                raise ConfigError(f"pps percent must lie in (0, 1], got {p}")
        for m in self.mmra_percents:
            if not (0.0 <= m <= 1.0):
                raise ConfigError(f"mmra percent must lie in [0, 1], got {m}")
        if not self.mmra_percents:
            raise ConfigError("mmra_percents must not be empty")
        if self.samples_per_set < 1:
            raise ConfigError(f"samples_per_set must be >= 1, got {self.samples_per_set}")
        if self.segmenter not in ("color_oracle", "external"):
            raise ConfigError(f"unknown segmenter {self.segmenter!r}")
        if self.color_tolerance < 0:
            raise ConfigError(f"color_tolerance must be >= 0, got {self.color_tolerance}")
        if self.tails_k < 1:
            raise ConfigError(f"tails_k must be >= 1, got {self.tails_k}")

    @classmethod
    def from_mapping(cls, mapping: dict) -> "ExperimentConfig":
        """Build a config from a parsed TOML/JSON document; unknown keys fail."""
        known = {f_.name for f_ in fields(cls)}
        unknown = set(mapping) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(mapping)
        for key in ("aoi_factors", "pps_percents", "mmra_percents", "rgb_bands"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        if "stretch" in kwargs and isinstance(kwargs["stretch"], dict):
            stretch_known = {f_.name for f_ in fields(StretchPolicy)}
            bad = set(kwargs["stretch"]) - stretch_known
            if bad:
                raise ConfigError(f"unknown stretch keys: {sorted(bad)}")
            kwargs["stretch"] = StretchPolicy(**kwargs["stretch"])
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(f"bad config: {exc}") from exc

    def as_dict(self) -> dict:
        doc = asdict(self)
        for key in ("aoi_factors", "pps_percents", "mmra_percents", "rgb_bands"):
            doc[key] = list(doc[key])
        return doc


def load_config_file(path: str | Path) -> dict:
    """Parse a .toml or .json config file into a plain mapping."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"{path}: no such config file")
    if path.suffix == ".json":
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    elif path.suffix == ".toml":
        try:
            import tomllib
        except ImportError:  # Python 3.10
            import tomli as tomllib
        try:
            doc = tomllib.loads(path.read_text(encoding="utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: invalid TOML: {exc}") from exc
    else:
        raise ConfigError(f"{path}: config must be .toml or .json")
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config root must be a table/object")
    return doc


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------


@dataclass
class SampleResult:
    """One scored (sub-tile, pps%, mmra%) cell, or a recorded failure."""

    tile_id: str
    parent_tile_id: str
    origin_row: int
    origin_col: int
    side: int
    aoi_factor: int
    pps_percent: float
    mmra_percent: float
    pps: int
    mmra: int
    status: str = "ok"
    reason: str = ""
    mask_count: int = 0
    unassigned_fraction: float = 0.0
    scores: ConsensusScores | None = None
    elapsed_s: float = 0.0


@dataclass
class AggregateCell:
    """Distribution summary of one metric over one sweep cell."""

    aoi_factor: int
    pps_percent: float
    mmra_percent: float
    metric: str
    count: int
    mean: float | None
    std: float | None
    quantiles: dict[int, float] | None  # keyed by percentile in QUANTILES


@dataclass
class ConsensusReport:
    rows: list[SampleResult]
    aggregates: list[AggregateCell]
    tails: dict[str, dict]
    skipped: list[dict]
    config: dict


# ---------------------------------------------------------------------------
# built-in segmenter (color oracle)
# ---------------------------------------------------------------------------


def color_oracle_segmenter(snapshot: RgbSnapshot, config: PromptConfig,
                           tolerance: int = 12) -> MaskSet:
    """Grow one region per prompt point by color similarity to the seed pixel.

    The region is the 4-connected component (within per-channel absolute
    tolerance of the seed color) containing the prompt. Identical regions
    from different prompts are emitted once. predicted_iou uses a
    compactness heuristic: 1 - clamp(perimeter / (4 * area), 0, 1), so big
    solid regions score high and ragged slivers score low.
    """
    img = snapshot.pixels.astype(np.int16)
    h, w = img.shape[:2]
    pps = config.pps

    label_cache: dict[tuple[int, int, int], np.ndarray] = {}
    seen: set[str] = set()
    masks: list[BooleanMask] = []
    for a in range(pps):
        r = int((a + 0.5) * h / pps)
        for b in range(pps):
            c = int((b + 0.5) * w / pps)
            color = (int(img[r, c, 0]), int(img[r, c, 1]), int(img[r, c, 2]))
            lab = label_cache.get(color)
            if lab is None:
                within = (np.abs(img - np.array(color, dtype=np.int16)) <= tolerance).all(axis=2)
                lab, _ = ndimage.label(within, structure=FOUR_CONNECTED)
                label_cache[color] = lab
            region = lab == lab[r, c]
            key = hashlib.sha1(np.packbits(region).tobytes()).hexdigest()
            if key in seen:
                continue
            seen.add(key)
            area = int(np.count_nonzero(region))
            perimeter = _region_perimeter(region)
            heuristic = min(1.0, max(0.0, perimeter / (4.0 * area)))
            masks.append(BooleanMask.from_bitmap(region, 1.0 - heuristic))
    return MaskSet(masks=masks, image_id=snapshot.tile_id, height=h, width=w,
                   generator_config=config)


def _region_perimeter(region: np.ndarray) -> int:
    """Count exposed pixel sides (image border counts as exposure)."""
    padded = np.zeros((region.shape[0] + 2, region.shape[1] + 2), dtype=bool)
    padded[1:-1, 1:-1] = region
    core = padded[1:-1, 1:-1]
    total = 0
    for shifted in (padded[:-2, 1:-1], padded[2:, 1:-1], padded[1:-1, :-2], padded[1:-1, 2:]):
        total += int(np.count_nonzero(core & ~shifted))
    return total


# ---------------------------------------------------------------------------
# the experiment
# ---------------------------------------------------------------------------


def discover_tiles(data_root: str | Path) -> list[str]:
    """Tile ids with ground truth under the data root, sorted."""
    truth_dir = Path(data_root) / "truth"
    if not truth_dir.is_dir():
        raise DataError(f"{truth_dir}: no truth directory under data root")
    return sorted(p.stem for p in truth_dir.glob("*.npy"))


def _load_parent(data_root: Path, tile_id: str,
                 config: ExperimentConfig) -> tuple[RgbSnapshot, np.ndarray]:
    png = data_root / "snapshots" / f"{tile_id}.png"
    if png.is_file():
        snapshot = read_snapshot_png(png, tile_id=tile_id)
    else:
        stack_path = data_root / "stacks" / f"{tile_id}.msst"
        if not stack_path.exists():
            raise DataError(f"tile {tile_id}: neither {png} nor {stack_path} exists")
        stack = read_stack_msst(stack_path, tile_id=tile_id)
        snapshot = snapshot_at_peak_greenness(
            stack, config.nir_band, config.red_band, config.rgb_bands, config.stretch
        )
    truth_path = data_root / "truth" / f"{tile_id}.npy"
    truth = read_label_raster(truth_path)
    if truth.shape != (snapshot.height, snapshot.width):
        raise DataError(
            f"{truth_path}: ground truth is {truth.shape}, snapshot is "
            f"{(snapshot.height, snapshot.width)}"
        )
    return snapshot, truth


def _obtain_maskset(
    data_root: Path,
    spec: TileSpec,
    crop: RgbSnapshot,
    prompt: PromptConfig,
    config: ExperimentConfig,
    oracle_cache: dict[tuple[str, int], MaskSet],
) -> MaskSet:
    if config.segmenter == "external":
        path = data_root / "masks" / spec.tile_id / maskset_filename(prompt.pps, prompt.mmra)
        mask_set = parse_maskset(path)
        if (mask_set.height, mask_set.width) != (spec.side, spec.side):
            raise DataError(
                f"{path}: maskset is {mask_set.height}x{mask_set.width}, "
                f"sub-tile is {spec.side}x{spec.side}"
            )
        gen = mask_set.generator_config
        if (gen.pps, gen.mmra) != (prompt.pps, prompt.mmra):
            raise DataError(
                f"{path}: generator (pps={gen.pps}, mmra={gen.mmra}) does not match "
                f"requested (pps={prompt.pps}, mmra={prompt.mmra})"
            )
        return mask_set

    cache_key = (spec.tile_id, prompt.pps)
    raw = oracle_cache.get(cache_key)
    if raw is None:
        raw = color_oracle_segmenter(
            crop, replace(prompt, mmra=0, mmra_percent=0.0), config.color_tolerance
        )
        oracle_cache[cache_key] = raw
    filtered = [filter_mmra(m, prompt.mmra) for m in raw.masks]
    filtered = [m for m in filtered if m.area > 0]
    return MaskSet(masks=filtered, image_id=spec.tile_id, height=raw.height,
                   width=raw.width, generator_config=prompt)


def run_experiment(config: ExperimentConfig, data_root: str | Path) -> ConsensusReport:
    """Run the full sweep and return an in-memory report.

    Unusable parents (cloud screen or exclusion list) are skipped and
    recorded. Per-sample failures (missing/invalid maskset, mismatched
    dimensions) become rows with status "failed" unless config.strict, in
    which case they raise.
    """
    data_root = Path(data_root)
    tile_ids = discover_tiles(data_root)
    if not tile_ids:
        raise DataError(f"{data_root}: no tiles with ground truth found")

    screen_policy = ScreenPolicy(
        brightness_threshold=config.brightness_threshold,
        fraction_threshold=config.cloud_fraction_threshold,
        excluded_ids=load_exclusion_list(data_root / "exclusions.txt"),
    )

    parents: dict[str, tuple[RgbSnapshot, np.ndarray]] = {}
    skipped: list[dict] = []
    for tile_id in tile_ids:
        snapshot, truth = _load_parent(data_root, tile_id, config)
        screen = screen_clouds(snapshot, screen_policy)
        if not screen.usable:
            skipped.append({"tile_id": tile_id, "reason": screen.reason})
            continue
        parents[tile_id] = (snapshot, truth)

    rows: list[SampleResult] = []
    oracle_cache: dict[tuple[str, int], MaskSet] = {}
    for factor in config.aoi_factors:
        pool: list[TileSpec] = []
        for tile_id in sorted(parents):
            snapshot, _ = parents[tile_id]
            pool.extend(tile_image(snapshot.height, snapshot.width, factor,
                                   parent_tile_id=tile_id))
        if not pool:
            continue
        n = min(config.samples_per_set, len(pool))
        selected = sample_select(pool, n, config.seed + factor)
        for spec in selected:
            snapshot, truth = parents[spec.parent_tile_id]
            rs, cs = spec.slices()
            crop = RgbSnapshot(pixels=snapshot.pixels[rs, cs],
                               source_timestep=snapshot.source_timestep,
                               tile_id=spec.tile_id)
            gt = truth[rs, cs]
            for pps_percent in config.pps_percents:
                for mmra_percent in config.mmra_percents:
                    prompt = PromptConfig.from_percent(spec.side, pps_percent, mmra_percent)
                    rows.append(_score_cell(
                        data_root, spec, factor, crop, gt, prompt, config, oracle_cache
                    ))

    aggregates = _aggregate(rows, config)
    ok_rows = [r for r in rows if r.status == "ok"]
    tails = {}
    if ok_rows:
        k = min(config.tails_k, len(ok_rows))
        tails = {metric: extract_tails(rows, metric, k) for metric in METRIC_NAMES}
    return ConsensusReport(rows=rows, aggregates=aggregates, tails=tails,
                           skipped=skipped, config=config.as_dict())


def _score_cell(
    data_root: Path,
    spec: TileSpec,
    factor: int,
    crop: RgbSnapshot,
    gt: np.ndarray,
    prompt: PromptConfig,
    config: ExperimentConfig,
    oracle_cache: dict[tuple[str, int], MaskSet],
) -> SampleResult:
    base = SampleResult(
        tile_id=spec.tile_id,
        parent_tile_id=spec.parent_tile_id,
        origin_row=spec.origin_row,
        origin_col=spec.origin_col,
        side=spec.side,
        aoi_factor=factor,
        pps_percent=prompt.pps_percent,
        mmra_percent=prompt.mmra_percent,
        pps=prompt.pps,
        mmra=prompt.mmra,
    )
    start = time.perf_counter()
    try:
        mask_set = _obtain_maskset(data_root, spec, crop, prompt, config, oracle_cache)
        pred = consolidate(mask_set)
        scores = score_label_maps(gt, pred.labels,
                                  config.exclude_predicted_background)
    except FieldsegError as exc:
        if config.strict:
            raise
        base.status = "failed"
        base.reason = str(exc)
        base.elapsed_s = time.perf_counter() - start
        return base
    base.mask_count = len(mask_set.masks)
    base.unassigned_fraction = round6(
        float(np.count_nonzero(pred.labels == 0)) / pred.labels.size
    )
    base.scores = ConsensusScores(
        fmi=round6(scores.fmi),
        ari=round6(scores.ari),
        nmi=round6(scores.nmi),
        v_measure=round6(scores.v_measure),
        homogeneity=round6(scores.homogeneity),
        completeness=round6(scores.completeness),
        degenerate_flags=scores.degenerate_flags,
    )
    base.elapsed_s = time.perf_counter() - start
    return base


# ---------------------------------------------------------------------------
# aggregation and tails
# ---------------------------------------------------------------------------


def _aggregate(rows: list[SampleResult], config: ExperimentConfig) -> list[AggregateCell]:
    cells = []
    for factor in config.aoi_factors:
        for pps_percent in config.pps_percents:
            for mmra_percent in config.mmra_percents:
                members = [
                    r for r in rows
                    if r.status == "ok"
                    and r.aoi_factor == factor
                    and r.pps_percent == pps_percent
                    and r.mmra_percent == mmra_percent
                ]
                for metric in METRIC_NAMES:
                    if not members:
                        cells.append(AggregateCell(factor, pps_percent, mmra_percent,
                                                   metric, 0, None, None, None))
                        continue
                    values = np.array([r.scores.as_mapping()[metric] for r in members])
                    qs = np.percentile(values, QUANTILES, method="linear")
                    cells.append(AggregateCell(
                        aoi_factor=factor,
                        pps_percent=pps_percent,
                        mmra_percent=mmra_percent,
                        metric=metric,
                        count=len(members),
                        mean=float(np.mean(values)),
                        std=float(np.std(values)),  # population std, ddof=0
                        quantiles={q: float(v) for q, v in zip(QUANTILES, qs)},
                    ))
    return cells


def extract_tails(rows: list[SampleResult], metric: str, k: int) -> dict:
    """k best and k worst scored samples for one metric.

    Ties break by tile_id ascending; best list is descending by score,
    worst list ascending. k must not exceed the number of scored rows.
    """
    if metric not in METRIC_NAMES:
        raise ConfigError(f"unknown metric {metric!r}; choose from {METRIC_NAMES}")
    ok_rows = [r for r in rows if r.status == "ok"]
    if not (1 <= k <= len(ok_rows)):
        raise ConfigError(f"k must lie in [1, {len(ok_rows)}], got {k}")

    def entry(r: SampleResult) -> dict:
        return {
            "tile_id": r.tile_id,
            "aoi_factor": r.aoi_factor,
            "pps_percent": r.pps_percent,
            "mmra_percent": r.mmra_percent,
            "score": r.scores.as_mapping()[metric],
        }

    top = sorted(ok_rows, key=lambda r: (-r.scores.as_mapping()[metric], r.tile_id))[:k]
    bottom = sorted(ok_rows, key=lambda r: (r.scores.as_mapping()[metric], r.tile_id))[:k]
    return {"top": [entry(r) for r in top], "bottom": [entry(r) for r in bottom]}


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------

SAMPLE_COLUMNS = (
    "tile_id", "parent_tile_id", "origin_row", "origin_col", "side", "aoi_factor",
    "pps_percent", "mmra_percent", "pps", "mmra", "status", "reason", "mask_count",
    "unassigned_fraction", "fmi", "ari", "nmi", "v_measure", "homogeneity",
    "completeness", "degenerate_flags",
)


def _f6(x: float) -> str:
    return f"{x:.6f}"


def _sample_row(r: SampleResult) -> list:
    row = [
        r.tile_id, r.parent_tile_id, r.origin_row, r.origin_col, r.side, r.aoi_factor,
        _f6(r.pps_percent), _f6(r.mmra_percent), r.pps, r.mmra, r.status, r.reason,
    ]
    if r.status == "ok":
        s = r.scores
        row += [r.mask_count, _f6(r.unassigned_fraction), _f6(s.fmi), _f6(s.ari),
                _f6(s.nmi), _f6(s.v_measure), _f6(s.homogeneity), _f6(s.completeness),
                "|".join(s.degenerate_flags)]
    else:
        row += ["", "", "", "", "", "", "", "", ""]
    return row


def emit_report(report: ConsensusReport, out_dir: str | Path,
                fmt: str = "csv") -> list[Path]:
    """Write report files; returns the canonical paths (sidecar excluded).

    fmt "csv" writes samples.csv, aggregates.csv, long.csv and tails.json;
    fmt "json" writes a single report.json. Both also write a timings.csv
    sidecar, which carries wall-clock measurements and is the one output
    exempt from the byte-identity guarantee. Aggregate floats are emitted
    at full precision (repr) so recomputing them from samples.csv matches
    exactly; per-sample scores are the canonical 6-decimal values.
    """
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown report format {fmt!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths: list[Path] = []

    if fmt == "csv":
        samples = out_dir / "samples.csv"
        with samples.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(SAMPLE_COLUMNS)
            for r in report.rows:
                writer.writerow(_sample_row(r))
        paths.append(samples)

        aggregates = out_dir / "aggregates.csv"
        with aggregates.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["aoi_factor", "pps_percent", "mmra_percent", "metric",
                             "count", "mean", "std"] + [f"q{q:02d}" for q in QUANTILES])
            for cell in report.aggregates:
                row = [cell.aoi_factor, _f6(cell.pps_percent), _f6(cell.mmra_percent),
                       cell.metric, cell.count]
                if cell.count:
                    row += [repr(cell.mean), repr(cell.std)]
                    row += [repr(cell.quantiles[q]) for q in QUANTILES]
                else:
                    row += [""] * (2 + len(QUANTILES))
                writer.writerow(row)
        paths.append(aggregates)

        long_path = out_dir / "long.csv"
        with long_path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["tile_id", "aoi_factor", "pps_percent", "mmra_percent",
                             "metric", "value"])
            for r in report.rows:
                if r.status != "ok":
                    continue
                for metric in METRIC_NAMES:
                    writer.writerow([r.tile_id, r.aoi_factor, _f6(r.pps_percent),
                                     _f6(r.mmra_percent), metric,
                                     _f6(r.scores.as_mapping()[metric])])
        paths.append(long_path)

        tails_path = out_dir / "tails.json"
        tails_path.write_text(
            json.dumps({"tails": report.tails, "skipped": report.skipped}, indent=2)
            + "\n",
            encoding="utf-8",
        )
        paths.append(tails_path)
    else:
        doc = {
            "config": report.config,
            "rows": [
                {
                    "tile_id": r.tile_id,
                    "parent_tile_id": r.parent_tile_id,
                    "origin_row": r.origin_row,
                    "origin_col": r.origin_col,
                    "side": r.side,
                    "aoi_factor": r.aoi_factor,
                    "pps_percent": r.pps_percent,
                    "mmra_percent": r.mmra_percent,
                    "pps": r.pps,
                    "mmra": r.mmra,
                    "status": r.status,
                    "reason": r.reason,
                    "mask_count": r.mask_count,
                    "unassigned_fraction": r.unassigned_fraction,
                    "scores": (r.scores.as_mapping() if r.status == "ok" else None),
                    "degenerate_flags": (list(r.scores.degenerate_flags)
                                         if r.status == "ok" else []),
                }
                for r in report.rows
            ],
            "aggregates": [
                {
                    "aoi_factor": c.aoi_factor,
                    "pps_percent": c.pps_percent,
                    "mmra_percent": c.mmra_percent,
                    "metric": c.metric,
                    "count": c.count,
                    "mean": c.mean,
                    "std": c.std,
                    "quantiles": ({str(q): v for q, v in c.quantiles.items()}
                                  if c.quantiles else None),
                }
                for c in report.aggregates
            ],
            "tails": report.tails,
            "skipped": report.skipped,
        }
        report_path = out_dir / "report.json"
        report_path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        paths.append(report_path)

    timings = out_dir / "timings.csv"
    with timings.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["tile_id", "aoi_factor", "pps_percent", "mmra_percent",
                         "elapsed_seconds"])
        for r in report.rows:
            writer.writerow([r.tile_id, r.aoi_factor, _f6(r.pps_percent),
                             _f6(r.mmra_percent), repr(r.elapsed_s)])
    return paths
