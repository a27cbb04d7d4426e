"""Multispectral stack handling: NDVI, snapshot extraction, screening, tiling.

A stack is a (T, H, W, C) float32 array of reflectances with named bands.
The visual products derived here (max-NDVI RGB snapshots) are what the
downstream segmenters consume; everything else in the pipeline is spatial.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, UnusableTileError

# ---------------------------------------------------------------------------
# core types
# ---------------------------------------------------------------------------


@dataclass
class MultispectralStack:
    """Time series of multispectral images for one tile.

    data is (T, H, W, C) float32, reflectance-like (finite, >= 0).
    band_names has length C with no duplicates.
    """

    data: np.ndarray
    band_names: list[str]
    tile_id: str

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=np.float32)
        if self.data.ndim != 4:
            raise DataError(
                f"stack {self.tile_id!r}: expected (T, H, W, C) array, got ndim={self.data.ndim}"
            )
        t, h, w, c = self.data.shape
        if min(t, h, w, c) < 1:
            raise DataError(f"stack {self.tile_id!r}: empty dimension in shape {self.data.shape}")
        if len(self.band_names) != c:
            raise DataError(
                f"stack {self.tile_id!r}: {len(self.band_names)} band names for {c} channels"
            )
        if len(set(self.band_names)) != len(self.band_names):
            raise DataError(f"stack {self.tile_id!r}: duplicate band names {self.band_names}")
        if not np.all(np.isfinite(self.data)):
            raise DataError(f"stack {self.tile_id!r}: non-finite reflectance values")
        if np.any(self.data < 0):
            raise DataError(f"stack {self.tile_id!r}: negative reflectance values")

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return tuple(self.data.shape)  # type: ignore[return-value]

    def band_index(self, name: str) -> int:
        try:
            return self.band_names.index(name)
        except ValueError:
            raise ConfigError(
                f"stack {self.tile_id!r} has no band {name!r}; available: {self.band_names}"
            ) from None


@dataclass(frozen=True)
class BandTriplet:
    """Channel indices used to build an RGB composite."""

    red: int
    green: int
    blue: int

    def __post_init__(self) -> None:
        idx = (self.red, self.green, self.blue)
        if len(set(idx)) != 3:
            raise ConfigError(f"band triplet must use three distinct channels, got {idx}")
        if min(idx) < 0:
            raise ConfigError(f"band indices must be non-negative, got {idx}")


@dataclass
class NdviSeries:
    """Per-timestep spatial-mean NDVI plus validity flags.

    values[t] is the mean over pixels with a nonzero denominator; it is NaN
    exactly where valid[t] is False (no pixel had a nonzero denominator).
    per_pixel keeps the full (T, H, W) field with NaN at invalid pixels.
    """

    values: np.ndarray
    valid: np.ndarray
    per_pixel: np.ndarray
    per_pixel_valid: np.ndarray


@dataclass
class RgbSnapshot:
    """8-bit RGB composite of one timestep of a stack."""

    pixels: np.ndarray  # (H, W, 3) uint8
    source_timestep: int
    tile_id: str

    def __post_init__(self) -> None:
        self.pixels = np.asarray(self.pixels)
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3:
            raise DataError(
                f"snapshot {self.tile_id!r}: expected (H, W, 3) pixels, got {self.pixels.shape}"
            )
        if self.pixels.dtype != np.uint8:
            raise DataError(f"snapshot {self.tile_id!r}: pixels must be uint8, got {self.pixels.dtype}")

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])


@dataclass(frozen=True)
class StretchPolicy:
    """Contrast stretch applied per channel when building snapshots.

    mode "percentile" maps [low_pct, high_pct] percentiles to [0, 255] and
    clips; "minmax" uses the channel min/max. A flat channel (lo == hi)
    renders as uniform mid-gray 128.
    """

    mode: str = "percentile"
    low_pct: float = 2.0
    high_pct: float = 98.0

    def __post_init__(self) -> None:
        if self.mode not in ("percentile", "minmax"):
            raise ConfigError(f"unknown stretch mode {self.mode!r}")
        if not (0.0 <= self.low_pct < self.high_pct <= 100.0):
            raise ConfigError(
                f"percentile bounds must satisfy 0 <= low < high <= 100, got "
                f"({self.low_pct}, {self.high_pct})"
            )


@dataclass(frozen=True)
class ScreenPolicy:
    """Brightness-based cloud screen plus a manual exclusion list."""

    brightness_threshold: int = 200
    fraction_threshold: float = 0.05
    excluded_ids: frozenset[str] = field(default_factory=frozenset)


@dataclass(frozen=True)
class ScreenResult:
    usable: bool
    score: float  # fraction of bright pixels
    reason: str = ""


@dataclass(frozen=True)
class TileSpec:
    """One square window into a parent raster."""

    parent_tile_id: str
    origin_row: int
    origin_col: int
    side: int

    def __post_init__(self) -> None:
        if self.side < 1:
            raise ConfigError(f"tile side must be >= 1, got {self.side}")
        if self.origin_row < 0 or self.origin_col < 0:
            raise ConfigError(f"tile origin must be non-negative, got "
                              f"({self.origin_row}, {self.origin_col})")

    @property
    def tile_id(self) -> str:
        return f"{self.parent_tile_id}_r{self.origin_row}_c{self.origin_col}_s{self.side}"

    def slices(self) -> tuple[slice, slice]:
        return (
            slice(self.origin_row, self.origin_row + self.side),
            slice(self.origin_col, self.origin_col + self.side),
        )


# ---------------------------------------------------------------------------
# NDVI and snapshot extraction
# ---------------------------------------------------------------------------


def compute_ndvi(stack: MultispectralStack, nir_index: int, red_index: int) -> NdviSeries:
    """NDVI = (NIR - RED) / (NIR + RED) per pixel and timestep.

    Pixels where the denominator is zero are flagged invalid and left NaN;
    the per-timestep mean is taken over valid pixels only, so a few bad
    pixels never poison a timestep.
    """
    t, h, w, c = stack.shape
    for idx, what in ((nir_index, "nir"), (red_index, "red")):
        if not (0 <= idx < c):
            raise ConfigError(f"{what} band index {idx} out of range for {c} channels")
    if nir_index == red_index:
        raise ConfigError(f"nir and red band indices must differ, both are {nir_index}")

    nir = stack.data[..., nir_index].astype(np.float64)
    red = stack.data[..., red_index].astype(np.float64)
    denom = nir + red
    valid = denom > 0  # reflectances are >= 0, so denom == 0 means both bands are 0
    per_pixel = np.full((t, h, w), np.nan)
    np.divide(nir - red, denom, out=per_pixel, where=valid)

    values = np.full(t, np.nan)
    valid_t = np.zeros(t, dtype=bool)
    for ti in range(t):
        m = valid[ti]
        if m.any():
            values[ti] = per_pixel[ti][m].mean()
            valid_t[ti] = True
    return NdviSeries(values=values, valid=valid_t, per_pixel=per_pixel, per_pixel_valid=valid)


def select_max_ndvi_timestep(series: NdviSeries) -> int:
    """Index of the timestep with the highest spatial-mean NDVI.

    Ties resolve to the smallest index. Raises UnusableTileError when no
    timestep has any valid pixel.
    """
    if not series.valid.any():
        raise UnusableTileError("no timestep has a valid NDVI value; tile is unusable")
    masked = np.where(series.valid, series.values, -np.inf)
    return int(np.argmax(masked))  # argmax returns the first maximum


def _stretch_channel(values: np.ndarray, policy: StretchPolicy) -> np.ndarray:
    if policy.mode == "percentile":
        lo, hi = np.percentile(values, [policy.low_pct, policy.high_pct])
    else:
        lo, hi = float(values.min()), float(values.max())
    if hi <= lo:
        return np.full(values.shape, 128, dtype=np.uint8)
    scaled = np.clip((values - lo) / (hi - lo), 0.0, 1.0) * 255.0
    return np.rint(scaled).astype(np.uint8)


def extract_rgb_snapshot(
    stack: MultispectralStack,
    timestep: int,
    bands: BandTriplet,
    stretch: StretchPolicy | None = None,
) -> RgbSnapshot:
    """Render one timestep of the stack as an 8-bit RGB image."""
    t, h, w, c = stack.shape
    if not (0 <= timestep < t):
        raise ConfigError(f"timestep {timestep} out of range for {t} timesteps")
    for idx in (bands.red, bands.green, bands.blue):
        if idx >= c:
            raise ConfigError(f"band index {idx} out of range for {c} channels")
    stretch = stretch or StretchPolicy()

    out = np.empty((h, w, 3), dtype=np.uint8)
    for k, idx in enumerate((bands.red, bands.green, bands.blue)):
        out[..., k] = _stretch_channel(stack.data[timestep, :, :, idx].astype(np.float64), stretch)
    return RgbSnapshot(pixels=out, source_timestep=timestep, tile_id=stack.tile_id)


def snapshot_at_peak_greenness(
    stack: MultispectralStack,
    nir_band: str,
    red_band: str,
    rgb_bands: tuple[str, str, str],
    stretch: StretchPolicy | None = None,
) -> RgbSnapshot:
    """Convenience: pick the max-NDVI timestep and render it as RGB."""
    series = compute_ndvi(stack, stack.band_index(nir_band), stack.band_index(red_band))
    t_max = select_max_ndvi_timestep(series)
    triplet = BandTriplet(*(stack.band_index(b) for b in rgb_bands))
    return extract_rgb_snapshot(stack, t_max, triplet, stretch)


# ---------------------------------------------------------------------------
# screening
# ---------------------------------------------------------------------------


def screen_clouds(snapshot: RgbSnapshot, policy: ScreenPolicy | None = None) -> ScreenResult:
    """Mark snapshots that are mostly bright (cloudy) or manually excluded.

    A pixel counts as bright when min(R, G, B) exceeds the brightness
    threshold; the tile is unusable when the bright fraction exceeds the
    fraction threshold or the tile id is on the exclusion list.
    """
    policy = policy or ScreenPolicy()
    bright = snapshot.pixels.min(axis=2) > policy.brightness_threshold
    score = float(np.count_nonzero(bright)) / bright.size
    if snapshot.tile_id in policy.excluded_ids:
        return ScreenResult(usable=False, score=score, reason="excluded by list")
    if score > policy.fraction_threshold:
        return ScreenResult(usable=False, score=score,
                            reason=f"bright fraction {score:.4f} > {policy.fraction_threshold}")
    return ScreenResult(usable=True, score=score)


# ---------------------------------------------------------------------------
# tiling and sampling
# ---------------------------------------------------------------------------


def _axis_origins(dim: int, side: int, stride: int) -> list[int]:
    origins = list(range(0, dim - side + 1, stride))
    if not origins:
        origins = [0]
    if origins[-1] + side < dim:
        clamped = dim - side
        if clamped != origins[-1]:
            origins.append(clamped)
    return origins


def tile_image(
    height: int,
    width: int,
    factor: int,
    stride: int | None = None,
    parent_tile_id: str = "",
) -> list[TileSpec]:
    """Cut an image into square sub-tiles of side min(H, W) // factor.

    Windows start at multiples of the stride (default: the side, i.e.
    non-overlapping); a final clamped window flush with each edge is added
    when the last strided window does not reach it. Row-major order.
    """
    if factor not in (1, 2, 4, 8):
        raise ConfigError(f"tiling factor must be one of 1, 2, 4, 8; got {factor}")
    if height < 1 or width < 1:
        raise ConfigError(f"image dimensions must be positive, got {height}x{width}")
    side = min(height, width) // factor
    if side == 0:
        raise ConfigError(
            f"tiling factor {factor} yields side 0 for a {height}x{width} image"
        )
    if stride is None:
        stride = side
    if stride < 1:
        raise ConfigError(f"stride must be >= 1, got {stride}")

    rows = _axis_origins(height, side, stride)
    cols = _axis_origins(width, side, stride)
    return [
        TileSpec(parent_tile_id=parent_tile_id, origin_row=r, origin_col=c, side=side)
        for r in rows
        for c in cols
    ]


def sample_select(items: list, n: int, seed: int) -> list:
    """Select n items uniformly without replacement, reproducibly.

    Uses a named, seedable generator (PCG64); equal seeds give equal
    selections regardless of platform. n must not exceed the population.
    """
    if n < 0:
        raise ConfigError(f"sample size must be >= 0, got {n}")
    if n > len(items):
        raise ConfigError(f"sample size {n} exceeds population of {len(items)}")
    rng = np.random.Generator(np.random.PCG64(seed))
    order = rng.permutation(len(items))
    return [items[int(i)] for i in order[:n]]


def round_half_up(x: float) -> int:
    """Round to nearest integer with exact halves going up (3.5 -> 4)."""
    return int(math.floor(x + 0.5))
