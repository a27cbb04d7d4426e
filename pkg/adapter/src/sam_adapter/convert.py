"""Convert automatic-mask-generator output into interchange maskset files.

The generator library reports each mask either as a boolean array or as an
uncompressed COCO RLE, whose runs go down columns (column-major). The
interchange format wants row-major runs, alternating background/foreground
starting with background, summing to height*width. Conversion always decodes
to a bitmap and re-encodes row-major, and recomputes the area from the
decoded pixels rather than trusting the generator's metadata.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import JobError


def bitmap_from_segmentation(segmentation: Any) -> np.ndarray:
    """Decode a generator 'segmentation' value to a row-major bool array."""
    if isinstance(segmentation, np.ndarray):
        if segmentation.ndim != 2:
            raise JobError(f"segmentation array must be 2-D, got {segmentation.ndim}-D")
        return segmentation.astype(bool)
    if isinstance(segmentation, Mapping):
        try:
            height, width = (int(v) for v in segmentation["size"])
            counts = segmentation["counts"]
        except (KeyError, TypeError, ValueError) as exc:
            raise JobError(f"bad RLE segmentation: {exc}") from exc
        if isinstance(counts, (str, bytes)):
            raise JobError("compressed RLE segmentation is not supported; "
                           "run the generator in binary_mask or uncompressed_rle mode")
        counts = [int(c) for c in counts]
        if any(c < 0 for c in counts) or sum(counts) != height * width:
            raise JobError(f"RLE runs must be >= 0 and sum to {height * width}, "
                           f"got sum {sum(counts)}")
        values = np.arange(len(counts)) % 2  # starts with background
        flat = np.repeat(values, counts).astype(bool)
        # COCO runs go down columns; restore shape in column-major order
        return flat.reshape((height, width), order="F")
    raise JobError(f"unsupported segmentation type {type(segmentation).__name__}")


def rle_row_major(bitmap: np.ndarray) -> list[int]:
    """Row-major alternating runs starting with background (leading 0 if
    pixel (0,0) is set)."""
    flat = np.asarray(bitmap, dtype=bool).ravel()
    if flat.size == 0:
        return [0]
    changes = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], changes, [flat.size]))
    runs = np.diff(bounds).tolist()
    if flat[0]:
        runs.insert(0, 0)
    return runs


def mask_entry(sam_mask: Mapping[str, Any], height: int, width: int) -> dict:
    """One interchange mask record from one generator output dict."""
    if "segmentation" not in sam_mask:
        raise JobError("generator mask has no 'segmentation' field")
    bitmap = bitmap_from_segmentation(sam_mask["segmentation"])
    if bitmap.shape != (height, width):
        raise JobError(f"mask shape {bitmap.shape} does not match "
                       f"snapshot ({height}, {width})")
    predicted_iou = float(sam_mask.get("predicted_iou", 0.0))
    if not np.isfinite(predicted_iou):
        raise JobError(f"predicted_iou must be finite, got {predicted_iou}")
    return {
        "predicted_iou": predicted_iou,
        "area": int(bitmap.sum()),
        "rle": rle_row_major(bitmap),
    }


def write_interchange(path: str | Path, image_id: str, height: int, width: int,
                      pps: int, mmra: int, pps_percent: float,
                      mmra_percent: float, entries: Sequence[Mapping]) -> Path:
    """Write one maskset file in the canonical interchange form."""
    doc = {
        "version": 1,
        "image_id": image_id,
        "height": height,
        "width": width,
        "generator": {
            "pps": pps,
            "mmra": mmra,
            "pps_percent": pps_percent,
            "mmra_percent": mmra_percent,
        },
        "masks": [
            {"predicted_iou": e["predicted_iou"], "area": e["area"],
             "rle": list(e["rle"])}
            for e in entries
        ],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, separators=(",", ":")) + "\n", encoding="utf-8")
    return path


def is_valid_interchange_file(path: str | Path) -> bool:
    """Cheap structural check used to decide whether a file can be skipped
    on resume: parseable, right keys, runs sum to the pixel count, and the
    recorded area equals the decoded foreground count."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError):
        return False
    if not isinstance(doc, dict) or doc.get("version") != 1:
        return False
    if not all(key in doc for key in ("image_id", "height", "width",
                                      "generator", "masks")):
        return False
    generator = doc["generator"]
    if not isinstance(generator, dict) or not all(
            key in generator for key in ("pps", "mmra", "pps_percent",
                                         "mmra_percent")):
        return False
    if not isinstance(doc["masks"], list):
        return False
    try:
        total = int(doc["height"]) * int(doc["width"])
        for mask in doc["masks"]:
            runs = mask["rle"]
            if any(int(r) < 0 for r in runs) or sum(runs) != total:
                return False
            if int(mask["area"]) != sum(runs[1::2]):
                return False
            float(mask["predicted_iou"])
    except (KeyError, TypeError, ValueError):
        return False
    return True
