"""Independent brute-force reference implementations for the test suite.

Everything here is deliberately written the slow, obvious way and shares no
code with the package: pairwise O(n^2) counting over all pixel pairs,
Counter-based entropies with the joint-entropy factorization, BFS flood
fill, per-pixel priority scans, even-odd polygon fill by ray casting.
"""
from __future__ import annotations

import math
from collections import Counter, deque

import numpy as np


# ---------------------------------------------------------------------------
# consensus metrics
# ---------------------------------------------------------------------------


def _canon(labels):
    seen = {}
    out = []
    for x in labels:
        if x not in seen:
            seen[x] = len(seen)
        out.append(seen[x])
    return out


def brute_force_scores(gt, pred) -> dict:
    """All consensus metrics via O(n^2) pair enumeration and Counter entropies."""
    gt = [int(x) for x in np.asarray(gt).ravel()]
    pred = [int(x) for x in np.asarray(pred).ravel()]
    assert len(gt) == len(pred) and gt
    n = len(gt)

    tp = p_gt = p_pred = 0
    for i in range(n):
        for j in range(i + 1, n):
            same_g = gt[i] == gt[j]
            same_p = pred[i] == pred[j]
            tp += same_g and same_p
            p_gt += same_g
            p_pred += same_p

    fmi = 0.0 if p_gt * p_pred == 0 else tp / math.sqrt(p_gt * p_pred)

    total = n * (n - 1) // 2
    if total == 0 or total * (p_gt + p_pred) == 2 * p_gt * p_pred:
        ari = 1.0 if _canon(gt) == _canon(pred) else 0.0
    else:
        expected = p_gt * p_pred / total
        max_index = (p_gt + p_pred) / 2
        ari = (tp - expected) / (max_index - expected)

    def entropy(counter):
        return -sum((c / n) * math.log(c / n) for c in counter.values())

    h_u = entropy(Counter(gt))
    h_v = entropy(Counter(pred))
    h_uv = entropy(Counter(zip(gt, pred)))
    h_u_given_v = h_uv - h_v
    h_v_given_u = h_uv - h_u
    mutual = h_u + h_v - h_uv

    h = 1.0 if h_u == 0.0 else min(1.0, max(0.0, 1.0 - h_u_given_v / h_u))
    c = 1.0 if h_v == 0.0 else min(1.0, max(0.0, 1.0 - h_v_given_u / h_v))
    v = 0.0 if h + c == 0.0 else 2.0 * h * c / (h + c)

    if h_u == 0.0 and h_v == 0.0:
        nmi = 1.0
    elif h_u == 0.0 or h_v == 0.0:
        nmi = 0.0
    else:
        nmi = mutual / ((h_u + h_v) / 2.0)

    return {
        "fmi": fmi, "ari": ari, "nmi": nmi, "v_measure": v,
        "homogeneity": h, "completeness": c,
        "h_gt": h_u, "h_pred": h_v,
        "h_gt_given_pred": h_u_given_v, "h_pred_given_gt": h_v_given_u,
        "mutual_info": mutual,
    }


# ---------------------------------------------------------------------------
# flood fill
# ---------------------------------------------------------------------------


def flood_fill_components(labels) -> tuple[np.ndarray, list[tuple[int, int, int]]]:
    """4-connected same-label components by BFS; ids 1..K in row-major
    first-pixel order; background label 0 ignored.

    Returns (component_map, [(component_id, label, area), ...]).
    """
    labels = np.asarray(labels)
    h, w = labels.shape
    comp = np.zeros((h, w), dtype=np.int32)
    infos = []
    next_id = 1
    for r in range(h):
        for c in range(w):
            if labels[r, c] == 0 or comp[r, c] != 0:
                continue
            value = int(labels[r, c])
            queue = deque([(r, c)])
            comp[r, c] = next_id
            area = 0
            while queue:
                cr, cc = queue.popleft()
                area += 1
                for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                    nr, nc = cr + dr, cc + dc
                    if 0 <= nr < h and 0 <= nc < w and comp[nr, nc] == 0 \
                            and labels[nr, nc] == value:
                        comp[nr, nc] = next_id
                        queue.append((nr, nc))
            infos.append((next_id, value, area))
            next_id += 1
    return comp, infos


def flood_fill_binary(bitmap) -> tuple[np.ndarray, int]:
    """4-connected components of a boolean map; ids 1..K row-major."""
    comp, infos = flood_fill_components(np.asarray(bitmap).astype(np.int32))
    return comp, len(infos)


def brute_filter_mmra(bitmap: np.ndarray, mmra: int) -> np.ndarray:
    """Reference semantics: drop small foreground components (4-connected,
    area < mmra), then fill small enclosed background components."""
    out = np.asarray(bitmap).copy()
    if mmra == 0:
        return out

    comp, infos = flood_fill_components(out.astype(np.int32))
    for cid, _, area in infos:
        if area < mmra:
            out[comp == cid] = False

    bg_comp, bg_infos = flood_fill_components((~out).astype(np.int32))
    for cid, _, area in bg_infos:
        cells = bg_comp == cid
        touches_border = cells[0].any() or cells[-1].any() \
            or cells[:, 0].any() or cells[:, -1].any()
        if not touches_border and area < mmra:
            out[cells] = True
    return out


def brute_consolidate(bitmaps: list[np.ndarray], ious: list[float],
                      h: int, w: int) -> np.ndarray:
    """Per-pixel scan: each pixel goes to the highest-priority claiming mask.

    Priority order: descending predicted_iou, then descending area, then
    original index; the mask ranked r (1-based) paints label r.
    """
    areas = [int(np.count_nonzero(b)) for b in bitmaps]
    order = sorted(range(len(bitmaps)), key=lambda i: (-ious[i], -areas[i], i))
    rank_of = {idx: rank for rank, idx in enumerate(order, start=1)}
    out = np.zeros((h, w), dtype=np.int32)
    for r in range(h):
        for c in range(w):
            best = 0
            for idx, bitmap in enumerate(bitmaps):
                if bitmap[r, c] and (best == 0 or rank_of[idx] < best):
                    best = rank_of[idx]
            out[r, c] = best
    return out


# ---------------------------------------------------------------------------
# tiling
# ---------------------------------------------------------------------------


def window_origins_oracle(dim: int, side: int, stride: int) -> list[int]:
    """Valid window origins: every multiple of stride that fits, plus a final
    flush window when the strided ones stop short of the edge."""
    strided = [o for o in range(0, dim - side + 1) if o % stride == 0]
    out = set(strided)
    covered_to = max(o + side for o in strided) if strided else 0
    if covered_to < dim:
        out.add(dim - side)
    return sorted(out)


# ---------------------------------------------------------------------------
# polygon fill
# ---------------------------------------------------------------------------


def even_odd_fill(rings, height: int, width: int) -> np.ndarray:
    """Ray-casting even-odd fill of corner-lattice rectilinear rings.

    A pixel is inside when a ray cast rightward from its center crosses an
    odd number of vertical ring segments.
    """
    segs = []
    for ring in rings:
        for (r0, c0), (r1, c1) in zip(ring, ring[1:]):
            if c0 == c1:
                segs.append((c0, min(r0, r1), max(r0, r1)))
    out = np.zeros((height, width), dtype=bool)
    for pr in range(height):
        y = pr + 0.5
        for pc in range(width):
            x = pc + 0.5
            crossings = sum(1 for (c, rlo, rhi) in segs if c > x and rlo < y < rhi)
            out[pr, pc] = crossings % 2 == 1
    return out
