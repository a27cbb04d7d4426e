"""Job descriptions and the JSON-lines manifest that batches them."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ManifestError


@dataclass(frozen=True)
class AdapterJob:
    """One snapshot to segment with resolved grid/filter parameters.

    pps >= 1 (the prompt grid has pps**2 points); mmra is a pixel area
    (>= 0). pps_percent / mmra_percent carry the fractions the integers were
    resolved from, recorded in the output for provenance; they default to 0
    when the caller resolved the integers some other way.
    """

    tile_id: str
    snapshot: Path
    out_path: Path
    pps: int
    mmra: int
    pps_percent: float = 0.0
    mmra_percent: float = 0.0
    variant: str = "vit_h"
    device: str = "cpu"

    def __post_init__(self) -> None:
        if not self.tile_id:
            raise ManifestError("job tile_id must be non-empty")
        if self.pps < 1:
            raise ManifestError(f"job {self.tile_id!r}: pps must be >= 1, got {self.pps}")
        if self.mmra < 0:
            raise ManifestError(f"job {self.tile_id!r}: mmra must be >= 0, got {self.mmra}")


def output_path(out_dir: str | Path, tile_id: str, pps: int, mmra: int) -> Path:
    """The layout the downstream harness reads: masks/<tile>/pps<P>_mmra<M>.json."""
    return Path(out_dir) / "masks" / tile_id / f"pps{pps}_mmra{mmra}.json"


def parse_manifest(path: str | Path, out_dir: str | Path,
                   default_variant: str = "vit_h",
                   device: str = "cpu") -> list[AdapterJob]:
    """Read a JSON-lines manifest: one job object per non-empty line.

    Required keys per line: tile_id, snapshot, pps, mmra. Optional:
    pps_percent, mmra_percent, variant.
    """
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"{path}: no such manifest")
    jobs = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ManifestError(f"{path}:{lineno}: job must be an object")
        missing = [k for k in ("tile_id", "snapshot", "pps", "mmra") if k not in doc]
        if missing:
            raise ManifestError(f"{path}:{lineno}: missing keys {missing}")
        if not isinstance(doc["pps"], int) or not isinstance(doc["mmra"], int):
            raise ManifestError(f"{path}:{lineno}: pps/mmra must be integers")
        jobs.append(AdapterJob(
            tile_id=str(doc["tile_id"]),
            snapshot=Path(doc["snapshot"]),
            out_path=output_path(out_dir, str(doc["tile_id"]),
                                 doc["pps"], doc["mmra"]),
            pps=doc["pps"],
            mmra=doc["mmra"],
            pps_percent=float(doc.get("pps_percent", 0.0)),
            mmra_percent=float(doc.get("mmra_percent", 0.0)),
            variant=str(doc.get("variant", default_variant)),
            device=device,
        ))
    return jobs
