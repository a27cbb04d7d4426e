"""Run the automatic mask generator over snapshots and emit maskset files.

The model dependency is imported lazily inside ``make_generator_builder`` so
that everything else (manifest handling, conversion, batching, resume) works
without it; tests and other callers can inject any builder with the same
shape:

    builder(pps, mmra) -> generate(image: uint8 HxWx3) -> list[dict]

where each dict carries at least ``segmentation`` and ``predicted_iou``.
"""
from __future__ import annotations

import sys
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from .convert import is_valid_interchange_file, mask_entry, write_interchange
from .errors import AdapterError, JobError
from .jobs import AdapterJob

GeneratorBuilder = Callable[[int, int], Callable[[np.ndarray], Sequence[Mapping]]]


def make_generator_builder(checkpoint: str | Path, variant: str,
                           device: str = "cpu") -> GeneratorBuilder:
    """Load the model once; return a builder of per-(pps, mmra) generators."""
    checkpoint = Path(checkpoint)
    if not checkpoint.is_file():
        raise AdapterError(f"{checkpoint}: checkpoint not found")
    try:
        from segment_anything import SamAutomaticMaskGenerator, sam_model_registry
    except ImportError as exc:
        raise AdapterError(
            "the 'segment_anything' package is not installed; install the "
            "[model] extra to run real inference") from exc
    if variant not in sam_model_registry:
        raise AdapterError(f"unknown model variant {variant!r}; "
                           f"available: {sorted(sam_model_registry)}")
    try:
        model = sam_model_registry[variant](checkpoint=str(checkpoint))
        model.to(device)
    except Exception as exc:  # torch raises library-specific types
        raise AdapterError(f"cannot load {variant} from {checkpoint} "
                           f"on {device!r}: {exc}") from exc

    def builder(pps: int, mmra: int):
        generator = SamAutomaticMaskGenerator(
            model, points_per_side=pps, min_mask_region_area=mmra)
        return generator.generate

    return builder


def load_snapshot(path: str | Path) -> np.ndarray:
    """Read a snapshot PNG as uint8 (H, W, 3); anything else is an error."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            if img.mode != "RGB":
                raise JobError(f"{path}: snapshot must be 3-channel 8-bit RGB, "
                               f"got mode {img.mode!r}")
            return np.asarray(img, dtype=np.uint8)
    except FileNotFoundError as exc:
        raise JobError(f"{path}: no such snapshot") from exc
    except UnidentifiedImageError as exc:
        raise JobError(f"{path}: not a readable image: {exc}") from exc


def run_amg(job: AdapterJob, builder: GeneratorBuilder) -> Path:
    """Segment one snapshot and write its interchange maskset file."""
    image = load_snapshot(job.snapshot)
    height, width = image.shape[:2]
    generate = builder(job.pps, job.mmra)
    try:
        raw_masks = generate(image)
    except AdapterError:
        raise
    except Exception as exc:
        raise JobError(f"{job.tile_id}: mask generation failed: {exc}") from exc
    entries = [mask_entry(m, height, width) for m in raw_masks]
    return write_interchange(job.out_path, job.tile_id, height, width,
                             job.pps, job.mmra, job.pps_percent,
                             job.mmra_percent, entries)


def batch(jobs: Sequence[AdapterJob], builder: GeneratorBuilder,
          force: bool = False, log=None) -> dict:
    """Run jobs sequentially; resumable and fault-tolerant.

    Existing valid output files are skipped unless force is set. Per-job
    failures are logged and counted, not fatal. Returns
    {"written": n, "skipped": n, "failed": [(tile_id, message), ...]}.
    """
    log = log if log is not None else sys.stderr
    written, skipped, failed = 0, 0, []
    for job in jobs:
        if not force and job.out_path.exists() and is_valid_interchange_file(job.out_path):
            skipped += 1
            print(f"skip {job.out_path} (already valid)", file=log)
            continue
        try:
            path = run_amg(job, builder)
        except AdapterError as exc:
            failed.append((job.tile_id, str(exc)))
            print(f"fail {job.tile_id}: {exc}", file=log)
            continue
        written += 1
        print(f"wrote {path}", file=log)
    return {"written": written, "skipped": skipped, "failed": failed}
