"""Binary masks, run-length encoding, prompt grids, and mask consolidation.

Masks are stored run-length encoded in row-major order. Runs alternate
background/foreground starting with background, so an image whose first
pixel is foreground starts with a zero-length background run. Run lengths
always sum to H*W.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import ConfigError, DataError, MaskFormatError
from .raster import round_half_up

# 4-connected structuring element (no diagonals) used everywhere in this module
FOUR_CONNECTED = ndimage.generate_binary_structure(2, 1)


# ---------------------------------------------------------------------------
# run-length encoding
# ---------------------------------------------------------------------------


def rle_encode(bitmap: np.ndarray) -> list[int]:
    """Encode a 2-D boolean bitmap as alternating run lengths.

    The first run is background; it has length 0 when pixel (0, 0) is set.
    """
    bitmap = np.asarray(bitmap)
    if bitmap.ndim != 2 or bitmap.dtype != bool:
        raise DataError(f"expected 2-D boolean bitmap, got {bitmap.dtype} {bitmap.shape}")
    flat = bitmap.ravel()
    changes = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], changes, [flat.size]))
    runs = np.diff(bounds).tolist()
    if flat[0]:
        runs.insert(0, 0)
    return [int(r) for r in runs]


def rle_decode(runs: list[int], height: int, width: int) -> np.ndarray:
    """Decode alternating run lengths back into a (height, width) bitmap."""
    total = sum(runs)
    if total != height * width:
        raise MaskFormatError(
            f"run lengths sum to {total}, expected {height}x{width} = {height * width}"
        )
    if any(r < 0 for r in runs):
        raise MaskFormatError("run lengths must be non-negative")
    values = np.arange(len(runs)) % 2  # even index = background, odd = foreground
    flat = np.repeat(values.astype(bool), runs)
    return flat.reshape(height, width)


def rle_foreground_area(runs: list[int]) -> int:
    """Foreground pixel count straight from the runs (odd positions)."""
    return int(sum(runs[1::2]))


# ---------------------------------------------------------------------------
# core types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PromptConfig:
    """Resolved prompt-grid and filter parameters for one image side length.

    pps is the point-per-side count (the grid has pps**2 prompts); mmra is
    the minimum mask region area in pixels. The *_percent fields keep the
    fractions they were resolved from, for provenance.
    """

    pps: int
    mmra: int
    pps_percent: float = 0.0
    mmra_percent: float = 0.0

    def __post_init__(self) -> None:
        if self.pps < 1:
            raise ConfigError(f"pps must be >= 1, got {self.pps}")
        if self.mmra < 0:
            raise ConfigError(f"mmra must be >= 0, got {self.mmra}")

    @classmethod
    def from_percent(cls, side: int, pps_percent: float, mmra_percent: float) -> "PromptConfig":
        """Resolve fractional parameters against a concrete side length.

        pps = round-half-up(pps_percent * side), floored at 1;
        mmra = round-half-up(mmra_percent * side**2).
        """
        if side < 1:
            raise ConfigError(f"side must be >= 1, got {side}")
        if not (0.0 < pps_percent <= 1.0):
            raise ConfigError(f"pps_percent must lie in (0, 1], got {pps_percent}")
        if not (0.0 <= mmra_percent <= 1.0):
            raise ConfigError(f"mmra_percent must lie in [0, 1], got {mmra_percent}")
        pps = max(1, round_half_up(pps_percent * side))
        mmra = round_half_up(mmra_percent * side * side)
        return cls(pps=pps, mmra=mmra, pps_percent=pps_percent, mmra_percent=mmra_percent)


@dataclass
class BooleanMask:
    """One predicted region: RLE bitmap plus generator metadata."""

    rle: list[int]
    height: int
    width: int
    predicted_iou: float
    area: int

    def __post_init__(self) -> None:
        if self.height < 1 or self.width < 1:
            raise MaskFormatError(f"mask dimensions must be positive, got "
                                  f"{self.height}x{self.width}")
        if not np.isfinite(self.predicted_iou):
            raise MaskFormatError(f"predicted_iou must be finite, got {self.predicted_iou}")
        if self.area < 0:
            raise MaskFormatError(f"area must be >= 0, got {self.area}")
        if sum(self.rle) != self.height * self.width:
            raise MaskFormatError(
                f"run lengths sum to {sum(self.rle)}, expected {self.height * self.width}"
            )
        if rle_foreground_area(self.rle) != self.area:
            raise MaskFormatError(
                f"area {self.area} does not match decoded foreground "
                f"{rle_foreground_area(self.rle)}"
            )

    @classmethod
    def from_bitmap(cls, bitmap: np.ndarray, predicted_iou: float) -> "BooleanMask":
        runs = rle_encode(bitmap)
        return cls(
            rle=runs,
            height=int(bitmap.shape[0]),
            width=int(bitmap.shape[1]),
            predicted_iou=float(predicted_iou),
            area=rle_foreground_area(runs),
        )

    def to_bitmap(self) -> np.ndarray:
        return rle_decode(self.rle, self.height, self.width)


@dataclass
class MaskSet:
    """All masks produced for one image, plus the generator parameters."""

    masks: list[BooleanMask]
    image_id: str
    height: int
    width: int
    generator_config: PromptConfig = field(
        default_factory=lambda: PromptConfig(pps=1, mmra=0)
    )

    def __post_init__(self) -> None:
        if self.height < 1 or self.width < 1:
            raise MaskFormatError(
                f"maskset dimensions must be positive, got {self.height}x{self.width}"
            )
        for i, m in enumerate(self.masks):
            if (m.height, m.width) != (self.height, self.width):
                raise MaskFormatError(
                    f"mask {i} is {m.height}x{m.width}, maskset is "
                    f"{self.height}x{self.width}"
                )


@dataclass
class LabelMap:
    """Dense per-pixel labels; 0 is background / unassigned."""

    labels: np.ndarray
    image_id: str = ""

    def __post_init__(self) -> None:
        self.labels = np.asarray(self.labels)
        if self.labels.ndim != 2 or not np.issubdtype(self.labels.dtype, np.integer):
            raise DataError(
                f"label map must be 2-D integer, got {self.labels.dtype} {self.labels.shape}"
            )
        if self.labels.size == 0:
            raise DataError("label map must be non-empty")
        if self.labels.min() < 0:
            raise DataError("label map contains negative labels")

    @property
    def height(self) -> int:
        return int(self.labels.shape[0])

    @property
    def width(self) -> int:
        return int(self.labels.shape[1])


# ---------------------------------------------------------------------------
# prompt grids
# ---------------------------------------------------------------------------


def prompt_grid(side: int, pps: int) -> list[tuple[float, float]]:
    """Regular pps x pps grid of (row, col) prompt points, row-major.

    Point (a, b) sits at ((a + 0.5) * side / pps, (b + 0.5) * side / pps),
    strictly inside the image for any pps >= 1.
    """
    if side < 1:
        raise ConfigError(f"side must be >= 1, got {side}")
    if pps < 1:
        raise ConfigError(f"pps must be >= 1, got {pps}")
    step = side / pps
    return [((a + 0.5) * step, (b + 0.5) * step) for a in range(pps) for b in range(pps)]


# ---------------------------------------------------------------------------
# filtering and consolidation
# ---------------------------------------------------------------------------


def filter_mmra(mask: BooleanMask, mmra: int) -> BooleanMask:
    """Drop small disconnected regions, then fill small enclosed holes.

    Both passes use 4-connectivity and the strict threshold area < mmra.
    Removal runs first so that holes of removed islands cannot resurrect
    them; with that order the operation is idempotent. A hole only counts
    as such when its background component does not touch the image border.
    """
    if mmra < 0:
        raise ConfigError(f"mmra must be >= 0, got {mmra}")
    if mmra == 0:
        return mask
    bitmap = mask.to_bitmap()

    comp, n = ndimage.label(bitmap, structure=FOUR_CONNECTED)
    if n:
        areas = np.bincount(comp.ravel())
        small = np.flatnonzero(areas < mmra)
        small = small[small > 0]
        if small.size:
            bitmap[np.isin(comp, small)] = False

    bg, n = ndimage.label(~bitmap, structure=FOUR_CONNECTED)
    if n:
        border = np.unique(np.concatenate([bg[0], bg[-1], bg[:, 0], bg[:, -1]]))
        areas = np.bincount(bg.ravel())
        fill = np.flatnonzero(areas < mmra)
        fill = np.setdiff1d(fill[fill > 0], border)
        if fill.size:
            bitmap[np.isin(bg, fill)] = True

    return BooleanMask.from_bitmap(bitmap, mask.predicted_iou)


def consolidate(mask_set: MaskSet) -> LabelMap:
    """Flatten overlapping masks into one label map by predicted-IoU priority.

    Masks are ranked by descending predicted_iou, ties by descending area,
    then by original index; rank r (1-based) becomes label r. Each pixel goes
    to the highest-priority mask that claims it; unclaimed pixels end up 0.
    Labels are not compacted, so a fully shadowed mask leaves its label unused.
    """
    out = np.zeros((mask_set.height, mask_set.width), dtype=np.int32)
    order = sorted(
        range(len(mask_set.masks)),
        key=lambda i: (-mask_set.masks[i].predicted_iou, -mask_set.masks[i].area, i),
    )
    for rank, idx in enumerate(order, start=1):
        bitmap = mask_set.masks[idx].to_bitmap()
        out[bitmap & (out == 0)] = rank
    return LabelMap(labels=out, image_id=mask_set.image_id)


# ---------------------------------------------------------------------------
# interchange files
# ---------------------------------------------------------------------------


def _require(cond: bool, path: str | Path, msg: str) -> None:
    if not cond:
        raise MaskFormatError(f"{path}: {msg}")


def parse_maskset(path: str | Path) -> MaskSet:
    """Load and validate a maskset interchange JSON file."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such maskset file")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise MaskFormatError(f"{path}: invalid JSON: {exc}") from exc

    _require(isinstance(doc, dict), path, "top level must be an object")
    _require(doc.get("version") == 1, path, f"unsupported version {doc.get('version')!r}")
    for key in ("image_id", "height", "width", "generator", "masks"):
        _require(key in doc, path, f"missing field {key!r}")
    _require(isinstance(doc["image_id"], str), path, "image_id must be a string")
    _require(isinstance(doc["height"], int) and isinstance(doc["width"], int),
             path, "height/width must be integers")
    gen = doc["generator"]
    _require(isinstance(gen, dict), path, "generator must be an object")
    for key in ("pps", "mmra", "pps_percent", "mmra_percent"):
        _require(key in gen, path, f"generator missing field {key!r}")
    _require(isinstance(gen["pps"], int) and isinstance(gen["mmra"], int),
             path, "generator pps/mmra must be integers")
    _require(isinstance(doc["masks"], list), path, "masks must be a list")

    try:
        config = PromptConfig(
            pps=gen["pps"],
            mmra=gen["mmra"],
            pps_percent=float(gen["pps_percent"]),
            mmra_percent=float(gen["mmra_percent"]),
        )
    except (ConfigError, TypeError, ValueError) as exc:
        raise MaskFormatError(f"{path}: bad generator block: {exc}") from exc

    masks = []
    for i, entry in enumerate(doc["masks"]):
        _require(isinstance(entry, dict), path, f"mask {i} must be an object")
        for key in ("predicted_iou", "area", "rle"):
            _require(key in entry, path, f"mask {i} missing field {key!r}")
        rle = entry["rle"]
        _require(isinstance(rle, list) and all(isinstance(r, int) and r >= 0 for r in rle),
                 path, f"mask {i} rle must be a list of non-negative integers")
        _require(isinstance(entry["area"], int), path, f"mask {i} area must be an integer")
        _require(isinstance(entry["predicted_iou"], (int, float)),
                 path, f"mask {i} predicted_iou must be a number")
        try:
            masks.append(BooleanMask(
                rle=list(rle),
                height=doc["height"],
                width=doc["width"],
                predicted_iou=float(entry["predicted_iou"]),
                area=entry["area"],
            ))
        except MaskFormatError as exc:
            raise MaskFormatError(f"{path}: mask {i}: {exc}") from exc

    try:
        return MaskSet(masks=masks, image_id=doc["image_id"], height=doc["height"],
                       width=doc["width"], generator_config=config)
    except MaskFormatError as exc:
        raise MaskFormatError(f"{path}: {exc}") from exc


def write_maskset(mask_set: MaskSet, path: str | Path) -> None:
    """Write a maskset with canonical field order; re-writing a parsed file
    is byte-identical."""
    gen = mask_set.generator_config
    doc = {
        "version": 1,
        "image_id": mask_set.image_id,
        "height": mask_set.height,
        "width": mask_set.width,
        "generator": {
            "pps": gen.pps,
            "mmra": gen.mmra,
            "pps_percent": gen.pps_percent,
            "mmra_percent": gen.mmra_percent,
        },
        "masks": [
            {"predicted_iou": m.predicted_iou, "area": m.area, "rle": m.rle}
            for m in mask_set.masks
        ],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, separators=(",", ":")) + "\n", encoding="utf-8")


def maskset_filename(pps: int, mmra: int) -> str:
    """Canonical per-tile maskset filename for a resolved parameter pair."""
    return f"pps{pps}_mmra{mmra}.json"
