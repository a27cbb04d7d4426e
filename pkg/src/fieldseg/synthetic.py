"""Synthetic labeled scenes for tests, demos, and the acceptance sweep.

Scenes are flat-colored regions with a matching crop-class raster, built so
that a color-based segmenter can recover regions exactly: every region gets
a color far outside the segmenter's tolerance from its neighbors. Roads can
be painted over a scene to fragment fields the way linear infrastructure
fragments real ones; they carry their own class.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ConfigError
from .raster import MultispectralStack, RgbSnapshot
from .stack_io import write_label_raster, write_snapshot_png

# Distinct flat colors; min channel stays below the cloud-screen brightness
# threshold so synthetic fields never read as cloud.
PALETTE = (
    (200, 60, 40),
    (60, 180, 70),
    (50, 90, 200),
    (220, 200, 60),
    (150, 60, 170),
    (80, 190, 185),
    (230, 120, 30),
    (120, 120, 120),
)

ROAD_COLOR = (60, 60, 60)


def flat_fields_scene(side: int, n_fields: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Vertical bands of distinct flat colors; band b carries class b+1.

    Returns (rgb uint8 (side, side, 3), labels int32 (side, side)).
    """
    if n_fields < 1 or n_fields > len(PALETTE):
        raise ConfigError(f"n_fields must be in [1, {len(PALETTE)}], got {n_fields}")
    if side < n_fields:
        raise ConfigError(f"side {side} too small for {n_fields} bands")
    rgb = np.zeros((side, side, 3), dtype=np.uint8)
    labels = np.zeros((side, side), dtype=np.int32)
    for b in range(n_fields):
        c0 = b * side // n_fields
        c1 = (b + 1) * side // n_fields
        rgb[:, c0:c1] = PALETTE[b]
        labels[:, c0:c1] = b + 1
    return rgb, labels


def add_road_grid(
    rgb: np.ndarray,
    labels: np.ndarray,
    road_rows: tuple[int, ...] = (),
    road_cols: tuple[int, ...] = (),
    width: int = 4,
    road_label: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Paint horizontal/vertical road strips over a scene (copies, no mutation).

    Each entry in road_rows / road_cols is the first row/col of a strip of
    the given width. Roads get ROAD_COLOR and their own class (defaults to
    max existing label + 1).
    """
    if width < 1:
        raise ConfigError(f"road width must be >= 1, got {width}")
    rgb = rgb.copy()
    labels = labels.copy()
    if road_label is None:
        road_label = int(labels.max()) + 1
    for r in road_rows:
        rgb[r:r + width, :] = ROAD_COLOR
        labels[r:r + width, :] = road_label
    for c in road_cols:
        rgb[:, c:c + width] = ROAD_COLOR
        labels[:, c:c + width] = road_label
    return rgb, labels


def voronoi_scene(side: int, n_cells: int, n_classes: int,
                  seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Random field mosaic: nearest-center cells, classes drawn per cell.

    Distinct cells may share a class (disjoint same-class regions, like two
    fields of the same crop), but adjacent cells always get colors that a
    tolerance-12 color segmenter keeps apart: each cell's color is its class
    palette color plus a per-cell offset of +-(16..40) per channel.
    """
    if n_cells < 1 or n_classes < 1 or n_classes > len(PALETTE):
        raise ConfigError(f"bad voronoi parameters: n_cells={n_cells}, n_classes={n_classes}")
    rng = np.random.Generator(np.random.PCG64(seed))
    centers = rng.uniform(0, side, size=(n_cells, 2))
    cell_class = rng.integers(1, n_classes + 1, size=n_cells)
    jitter = rng.integers(16, 41, size=(n_cells, 3)) * rng.choice([-1, 1], size=(n_cells, 3))

    rr, cc = np.mgrid[0:side, 0:side]
    d2 = (rr[..., None] - centers[:, 0]) ** 2 + (cc[..., None] - centers[:, 1]) ** 2
    cell = np.argmin(d2, axis=-1)

    labels = cell_class[cell].astype(np.int32)
    base = np.array(PALETTE, dtype=np.int32)[cell_class - 1]
    colors = np.clip(base + jitter, 10, 245).astype(np.uint8)
    rgb = colors[cell]
    return rgb, labels


def stack_from_rgb(rgb: np.ndarray, tile_id: str, timesteps: int = 4,
                   peak: int = 2) -> MultispectralStack:
    """Wrap an RGB scene into a 4-band stack whose NDVI peaks at one timestep.

    Bands are B2/B3/B4 (visible, constant over time) and B8 (near-infrared,
    highest at the peak timestep), so the snapshot pipeline recovers the
    scene at the peak.
    """
    if not (0 <= peak < timesteps):
        raise ConfigError(f"peak {peak} out of range for {timesteps} timesteps")
    h, w, _ = rgb.shape
    vis = rgb.astype(np.float32) / 255.0 * 0.4
    data = np.zeros((timesteps, h, w, 4), dtype=np.float32)
    for t in range(timesteps):
        data[t, :, :, 0] = vis[:, :, 2]  # B2 blue
        data[t, :, :, 1] = vis[:, :, 1]  # B3 green
        data[t, :, :, 2] = vis[:, :, 0]  # B4 red
        data[t, :, :, 3] = 0.9 if t == peak else 0.1 + 0.01 * t
    return MultispectralStack(data=data, band_names=["B2", "B3", "B4", "B8"],
                              tile_id=tile_id)


def write_scene(data_root: str | Path, tile_id: str, rgb: np.ndarray,
                labels: np.ndarray) -> tuple[Path, Path]:
    """Drop a scene into the on-disk layout the harness consumes."""
    root = Path(data_root)
    snap_path = root / "snapshots" / f"{tile_id}.png"
    truth_path = root / "truth" / f"{tile_id}.npy"
    write_snapshot_png(RgbSnapshot(pixels=rgb, source_timestep=0, tile_id=tile_id),
                       snap_path)
    write_label_raster(labels.astype(np.int32), truth_path)
    return snap_path, truth_path
