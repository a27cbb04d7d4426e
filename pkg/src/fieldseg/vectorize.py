"""Label maps to polygon shape maps: component extraction, boundary tracing.

Boundaries live on the pixel-corner lattice: corner (r, c) is the top-left
corner of pixel (r, c), so a single pixel at (0, 0) traces to the ring
(0,0) -> (0,1) -> (1,1) -> (1,0) -> (0,0). Rings follow exposed pixel sides
with foreground kept on the right-hand side of the walk; in the (x=col,
y=row) frame that makes exterior rings positively signed and hole rings
negatively signed, and the signed areas of a component's rings sum to its
pixel count.

Connectivity is 4-connected for both foreground components and enclosed
background holes. At degree-4 "pinch" corners (two foreground pixels
touching diagonally) the walk always takes the left turn, which keeps every
ring simple and keeps diagonally-joined foreground in one ring.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import ConfigError, DataError
from .masks import FOUR_CONNECTED, LabelMap

Ring = list[tuple[int, int]]  # closed: first vertex == last vertex


# ---------------------------------------------------------------------------
# connected components
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComponentInfo:
    component_id: int  # 1-based, ordered by first pixel in row-major scan
    label: int         # source label value
    area: int          # pixel count


def connected_components(labels: np.ndarray) -> tuple[np.ndarray, list[ComponentInfo]]:
    """Split a label map into 4-connected same-label components.

    Returns (component_map, infos): component_map assigns every non-background
    pixel a component id numbered 1..K by the row-major position of each
    component's first pixel; background (label 0) stays 0.
    """
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise DataError(f"label map must be 2-D, got shape {labels.shape}")
    comp_map = np.zeros(labels.shape, dtype=np.int32)
    found = []  # (first_flat_index, label, area, value_component_array, local_id)
    for value in np.unique(labels):
        if value == 0:
            continue
        lab, k = ndimage.label(labels == value, structure=FOUR_CONNECTED)
        if k == 0:
            continue
        ids, first, counts = np.unique(lab.ravel(), return_index=True, return_counts=True)
        for i, local in enumerate(ids):
            if local == 0:
                continue
            found.append((int(first[i]), int(value), int(counts[i]), lab, int(local)))
    found.sort(key=lambda e: e[0])

    infos = []
    for new_id, (_, value, area, lab, local) in enumerate(found, start=1):
        sel = lab == local
        comp_map[sel] = new_id
        infos.append(ComponentInfo(component_id=new_id, label=value, area=area))
    return comp_map, infos


# ---------------------------------------------------------------------------
# boundary tracing
# ---------------------------------------------------------------------------


def _directed_edges(bitmap: np.ndarray) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """All exposed pixel sides as directed corner-to-corner edges.

    Orientation keeps foreground on the right: top sides head east, right
    sides south, bottom sides west, left sides north.
    """
    padded = np.zeros((bitmap.shape[0] + 2, bitmap.shape[1] + 2), dtype=bool)
    padded[1:-1, 1:-1] = bitmap
    core = padded[1:-1, 1:-1]
    edges = []
    exposed_top = np.argwhere(core & ~padded[:-2, 1:-1])
    for r, c in exposed_top:
        edges.append(((r, c), (r, c + 1)))
    exposed_right = np.argwhere(core & ~padded[1:-1, 2:])
    for r, c in exposed_right:
        edges.append(((r, c + 1), (r + 1, c + 1)))
    exposed_bottom = np.argwhere(core & ~padded[2:, 1:-1])
    for r, c in exposed_bottom:
        edges.append(((r + 1, c + 1), (r + 1, c)))
    exposed_left = np.argwhere(core & ~padded[1:-1, :-2])
    for r, c in exposed_left:
        edges.append(((r + 1, c), (r, c)))
    return [((int(a0), int(a1)), (int(b0), int(b1))) for (a0, a1), (b0, b1) in edges]


def _merge_collinear(ring: Ring) -> Ring:
    # ring is open (no duplicate endpoint) and made of unit steps; a vertex
    # survives only where the step direction changes
    out = []
    k = len(ring)
    for i in range(k):
        prev, cur, nxt = ring[(i - 1) % k], ring[i], ring[(i + 1) % k]
        if (cur[0] - prev[0], cur[1] - prev[1]) != (nxt[0] - cur[0], nxt[1] - cur[1]):
            out.append(cur)
    return out


def _canonical_ring(vertices: Ring) -> Ring:
    """Merge straight runs, rotate to the smallest vertex, close the ring."""
    core = _merge_collinear(vertices)
    pivot = core.index(min(core))
    core = core[pivot:] + core[:pivot]
    return core + [core[0]]


def ring_signed_area(ring: Ring) -> int:
    """Shoelace area in the (x=col, y=row) frame; exact integer arithmetic."""
    a2 = 0
    for (r0, c0), (r1, c1) in zip(ring, ring[1:]):
        a2 += c0 * r1 - c1 * r0
    return a2 // 2


def trace_boundary(bitmap: np.ndarray) -> tuple[Ring, list[Ring]]:
    """Trace one 4-connected foreground component into exterior + hole rings.

    The caller guarantees bitmap holds a single 4-connected component.
    Returns (exterior, holes): the exterior ring has positive signed area,
    hole rings negative; all rings are simple, closed, and collinear-merged,
    starting at their lexicographically smallest (row, col) corner.
    """
    bitmap = np.asarray(bitmap)
    if bitmap.dtype != bool or bitmap.ndim != 2:
        raise DataError(f"expected 2-D boolean bitmap, got {bitmap.dtype} {bitmap.shape}")
    if not bitmap.any():
        raise DataError("cannot trace an empty bitmap")

    edges = _directed_edges(bitmap)
    outgoing: dict[tuple[int, int], list[tuple[tuple[int, int], int]]] = {}
    for ei, (start, end) in enumerate(edges):
        outgoing.setdefault(start, []).append((end, ei))
    used = [False] * len(edges)

    rings: list[Ring] = []
    for start_ei, (start, end) in enumerate(edges):
        if used[start_ei]:
            continue
        vertices = [start]
        used[start_ei] = True
        cur, prev = end, start
        while cur != start:
            vertices.append(cur)
            d_in = (cur[0] - prev[0], cur[1] - prev[1])
            candidates = [(e, i) for (e, i) in outgoing[cur] if not used[i]]
            if len(candidates) > 1:
                # pinch corner: take the left turn (cross product +1)
                candidates = [
                    (e, i) for (e, i) in candidates
                    if d_in[0] * (e[1] - cur[1]) - d_in[1] * (e[0] - cur[0]) > 0
                ]
            if len(candidates) != 1:
                raise DataError("boundary topology broke; is the input a single component?")
            (nxt, ei) = candidates[0]
            used[ei] = True
            prev, cur = cur, nxt
        rings.append(_canonical_ring(vertices))

    exterior = None
    holes = []
    for ring in rings:
        if ring_signed_area(ring) > 0:
            if exterior is not None:
                raise DataError("found two exterior rings; input is not a single component")
            exterior = ring
        else:
            holes.append(ring)
    if exterior is None:
        raise DataError("no exterior ring found")
    holes.sort(key=lambda ring: ring[0])
    return exterior, holes


# ---------------------------------------------------------------------------
# shape maps
# ---------------------------------------------------------------------------


@dataclass
class FieldPolygon:
    """One traced component: exterior ring, hole rings, and provenance."""

    exterior: Ring
    holes: list[Ring]
    label: int
    area: int
    component_id: int


@dataclass
class ShapeMap:
    """All polygons traced from one label map, with image provenance."""

    polygons: list[FieldPolygon]
    height: int
    width: int
    image_id: str = ""
    # Optional affine georeferencing hook (a, b, c, d, e, f) mapping
    # (col, row) -> (x, y) as x = a*col + b*row + c, y = d*col + e*row + f.
    transform: tuple[float, ...] | None = None


def build_shape_map(label_map: LabelMap | np.ndarray, min_area: int = 1,
                    image_id: str = "") -> ShapeMap:
    """Trace every same-label connected component into a polygon.

    Components with fewer than min_area pixels are skipped. Polygon order
    follows component ids (row-major first-pixel order), so output is
    deterministic for a given input.
    """
    if isinstance(label_map, LabelMap):
        labels = label_map.labels
        image_id = image_id or label_map.image_id
    else:
        labels = np.asarray(label_map)
    if min_area < 1:
        raise ConfigError(f"min_area must be >= 1, got {min_area}")

    comp_map, infos = connected_components(labels)
    boxes = ndimage.find_objects(comp_map)
    polygons = []
    for info in infos:
        if info.area < min_area:
            continue
        sl = boxes[info.component_id - 1]
        bitmap = comp_map[sl] == info.component_id
        exterior, holes = trace_boundary(bitmap)
        dr, dc = sl[0].start, sl[1].start
        shift = lambda ring: [(r + dr, c + dc) for (r, c) in ring]
        polygons.append(FieldPolygon(
            exterior=shift(exterior),
            holes=[shift(h) for h in holes],
            label=info.label,
            area=info.area,
            component_id=info.component_id,
        ))
    return ShapeMap(polygons=polygons, height=int(labels.shape[0]),
                    width=int(labels.shape[1]), image_id=image_id)


# ---------------------------------------------------------------------------
# rasterization (round-trip support)
# ---------------------------------------------------------------------------


def rasterize_rings(rings: list[Ring], height: int, width: int) -> np.ndarray:
    """Fill rings back into a boolean bitmap by integer winding numbers.

    Exact for corner-lattice rectilinear rings: a pixel is set iff the
    total winding of the rings around its center is nonzero, so exterior
    minus holes reproduces the traced component bit-for-bit.
    """
    diff = np.zeros((height, width + 1), dtype=np.int32)
    for ring in rings:
        for (r0, c0), (r1, c1) in zip(ring, ring[1:]):
            if c0 != c1:
                continue  # horizontal segments never cross a horizontal ray
            lo, hi = (r0, r1) if r0 < r1 else (r1, r0)
            diff[lo:hi, c0] += 1 if r1 > r0 else -1
    # winding at pixel (r, pc) = sum of signed crossings strictly right of pc
    winding = np.flip(np.cumsum(np.flip(diff[:, 1:], axis=1), axis=1), axis=1)
    return winding != 0


def rasterize_polygon(polygon: FieldPolygon, height: int, width: int) -> np.ndarray:
    return rasterize_rings([polygon.exterior] + polygon.holes, height, width)


def rasterize_shape_map(shape_map: ShapeMap) -> np.ndarray:
    """Paint every polygon's pixels with its label (components are disjoint)."""
    out = np.zeros((shape_map.height, shape_map.width), dtype=np.int32)
    for poly in shape_map.polygons:
        out[rasterize_polygon(poly, shape_map.height, shape_map.width)] = poly.label
    return out


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def export_geojson(shape_map: ShapeMap, path: str | Path | None = None) -> dict:
    """Render a shape map as a GeoJSON-style FeatureCollection.

    Positions are [x, y] = [col, row] on the pixel-corner lattice (y grows
    downward). When shape_map.transform is set it is attached as a foreign
    member so consumers can map pixel corners to world coordinates.
    """
    def ring_coords(ring: Ring) -> list[list[int]]:
        return [[c, r] for (r, c) in ring]

    features = []
    for poly in shape_map.polygons:
        features.append({
            "type": "Feature",
            "geometry": {
                "type": "Polygon",
                "coordinates": [ring_coords(poly.exterior)]
                               + [ring_coords(h) for h in poly.holes],
            },
            "properties": {
                "label": poly.label,
                "area": poly.area,
                "component_id": poly.component_id,
            },
        })
    doc = {
        "type": "FeatureCollection",
        "features": features,
        "image": {
            "id": shape_map.image_id,
            "height": shape_map.height,
            "width": shape_map.width,
        },
    }
    if shape_map.transform is not None:
        doc["transform"] = list(shape_map.transform)
    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(doc, separators=(",", ":")) + "\n", encoding="utf-8")
    return doc
