"""On-disk formats: MSST stacks, PNG snapshots, label rasters, exclusion lists.

MSST is a deliberately small binary container for multispectral time series:

    magic   4 bytes  b"MSST"
    version u32 LE   currently 1
    T,H,W,C u32 LE   array dimensions
    bands   C entries of (u32 LE name length, UTF-8 name bytes)
    body    T*H*W*C float32 LE values in C order (T, H, W, C)

A path may also be a directory of .msst files; they are concatenated along
the time axis in sorted filename order and must agree on H, W, C and band
names.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
from PIL import Image
from PIL.PngImagePlugin import PngInfo

from .errors import DataError
from .raster import MultispectralStack, RgbSnapshot

MSST_MAGIC = b"MSST"
MSST_VERSION = 1


# ---------------------------------------------------------------------------
# MSST stacks
# ---------------------------------------------------------------------------


def write_stack_msst(stack: MultispectralStack, path: str | Path) -> None:
    """Serialize a stack to a single .msst file."""
    path = Path(path)
    t, h, w, c = stack.shape
    parts = [MSST_MAGIC, struct.pack("<5I", MSST_VERSION, t, h, w, c)]
    for name in stack.band_names:
        raw = name.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)))
        parts.append(raw)
    parts.append(np.ascontiguousarray(stack.data, dtype="<f4").tobytes())
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(b"".join(parts))


def _read_msst_file(path: Path, tile_id: str) -> MultispectralStack:
    raw = path.read_bytes()
    if len(raw) < 24 or raw[:4] != MSST_MAGIC:
        raise DataError(f"{path}: not an MSST file (bad magic)")
    version, t, h, w, c = struct.unpack_from("<5I", raw, 4)
    if version != MSST_VERSION:
        raise DataError(f"{path}: unsupported MSST version {version}")
    offset = 24
    band_names = []
    for _ in range(c):
        if offset + 4 > len(raw):
            raise DataError(f"{path}: truncated band table")
        (nlen,) = struct.unpack_from("<I", raw, offset)
        offset += 4
        if offset + nlen > len(raw):
            raise DataError(f"{path}: truncated band name")
        band_names.append(raw[offset:offset + nlen].decode("utf-8"))
        offset += nlen
    expected = t * h * w * c * 4
    body = raw[offset:]
    if len(body) != expected:
        raise DataError(
            f"{path}: body has {len(body)} bytes, expected {expected} for shape "
            f"({t}, {h}, {w}, {c})"
        )
    data = np.frombuffer(body, dtype="<f4").reshape(t, h, w, c)
    return MultispectralStack(data=data.copy(), band_names=band_names, tile_id=tile_id)


def read_stack_msst(path: str | Path, tile_id: str | None = None) -> MultispectralStack:
    """Load a stack from one .msst file or a directory of them.

    Directory contents are concatenated along T in sorted filename order;
    every file must share H, W, C and band names.
    """
    path = Path(path)
    if tile_id is None:
        tile_id = path.stem if path.is_file() else path.name
    if path.is_file():
        return _read_msst_file(path, tile_id)
    if not path.is_dir():
        raise DataError(f"{path}: no such file or directory")
    files = sorted(p for p in path.iterdir() if p.suffix == ".msst" and p.is_file())
    if not files:
        raise DataError(f"{path}: directory contains no .msst files")
    pieces = [_read_msst_file(p, tile_id) for p in files]
    first = pieces[0]
    for piece, p in zip(pieces[1:], files[1:]):
        if piece.shape[1:] != first.shape[1:] or piece.band_names != first.band_names:
            raise DataError(
                f"{p}: shape/bands {piece.shape[1:]}/{piece.band_names} do not match "
                f"{files[0].name} {first.shape[1:]}/{first.band_names}"
            )
    data = np.concatenate([p.data for p in pieces], axis=0)
    return MultispectralStack(data=data, band_names=first.band_names, tile_id=tile_id)


def read_stack_tiff_dir(path: str | Path, band_names: list[str],
                        tile_id: str | None = None) -> MultispectralStack:
    """Optional adapter: a directory of multi-channel TIFFs, one per timestep.

    Each file must decode to (H, W, C) with C == len(band_names); multi-frame
    TIFFs are read frame-per-band. Sorted filename order defines T.
    """
    path = Path(path)
    if not path.is_dir():
        raise DataError(f"{path}: no such directory")
    files = sorted(p for p in path.iterdir()
                   if p.suffix.lower() in (".tif", ".tiff") and p.is_file())
    if not files:
        raise DataError(f"{path}: directory contains no TIFF files")
    frames = []
    for p in files:
        with Image.open(p) as img:
            n = getattr(img, "n_frames", 1)
            if n > 1:
                chans = []
                for k in range(n):
                    img.seek(k)
                    chans.append(np.asarray(img, dtype=np.float32))
                arr = np.stack(chans, axis=-1)
            else:
                arr = np.asarray(img, dtype=np.float32)
                if arr.ndim == 2:
                    arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] != len(band_names):
            raise DataError(
                f"{p}: decoded shape {arr.shape} does not provide {len(band_names)} bands"
            )
        frames.append(arr)
    data = np.stack(frames, axis=0)
    if tile_id is None:
        tile_id = path.name
    return MultispectralStack(data=data, band_names=list(band_names), tile_id=tile_id)


# ---------------------------------------------------------------------------
# PNG snapshots
# ---------------------------------------------------------------------------


def write_snapshot_png(snapshot: RgbSnapshot, path: str | Path) -> None:
    """Write an RGB snapshot as PNG, keeping provenance in tEXt chunks."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    info = PngInfo()
    info.add_text("tile_id", snapshot.tile_id)
    info.add_text("source_timestep", str(snapshot.source_timestep))
    Image.fromarray(snapshot.pixels, mode="RGB").save(path, format="PNG", pnginfo=info)


def read_snapshot_png(path: str | Path, tile_id: str | None = None) -> RgbSnapshot:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such snapshot")
    try:
        with Image.open(path) as img:
            text = dict(getattr(img, "text", {}) or {})
            pixels = np.asarray(img.convert("RGB"), dtype=np.uint8)
    except (OSError, SyntaxError) as exc:
        raise DataError(f"{path}: cannot decode PNG: {exc}") from exc
    if tile_id is None:
        tile_id = text.get("tile_id", path.stem)
    try:
        timestep = int(text.get("source_timestep", "0"))
    except ValueError:
        timestep = 0
    return RgbSnapshot(pixels=pixels, source_timestep=timestep, tile_id=tile_id)


# ---------------------------------------------------------------------------
# label rasters and exclusion lists
# ---------------------------------------------------------------------------


def write_label_raster(labels: np.ndarray, path: str | Path,
                       legend: dict[str, str] | None = None) -> None:
    """Persist a 2-D non-negative integer label raster (.npy + optional legend)."""
    labels = np.asarray(labels)
    if labels.ndim != 2 or not np.issubdtype(labels.dtype, np.integer):
        raise DataError(f"label raster must be 2-D integer, got {labels.dtype} {labels.shape}")
    if labels.size and labels.min() < 0:
        raise DataError("label raster contains negative labels")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.save(path, labels)
    if legend is not None:
        path.with_suffix(".legend.json").write_text(
            json.dumps(legend, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


def read_label_raster(path: str | Path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such label raster")
    try:
        labels = np.load(path)
    except (OSError, ValueError) as exc:
        raise DataError(f"{path}: cannot load label raster: {exc}") from exc
    if labels.ndim != 2 or not np.issubdtype(labels.dtype, np.integer):
        raise DataError(f"{path}: label raster must be 2-D integer, got {labels.dtype} {labels.shape}")
    if labels.size and labels.min() < 0:
        raise DataError(f"{path}: label raster contains negative labels")
    return labels


def load_exclusion_list(path: str | Path) -> frozenset[str]:
    """Newline-delimited tile ids; blank lines ignored. Missing file -> empty."""
    path = Path(path)
    if not path.is_file():
        return frozenset()
    ids = (line.strip() for line in path.read_text(encoding="utf-8").splitlines())
    return frozenset(i for i in ids if i)
