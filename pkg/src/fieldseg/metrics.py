"""Clustering-consensus metrics between two pixel partitions.

Ground truth and prediction label maps are flattened and treated as two
clusterings of the same pixel set; agreement is scored with pair-counting
metrics (Fowlkes-Mallows, adjusted Rand) and information-theoretic ones
(homogeneity, completeness, V-measure, NMI). No correspondence between
label values is assumed, which is the point: the prediction is
class-agnostic.

Numerical notes, because acceptance demands exact invariances:
- pair counting is done in Python integers (at 1.2M pixels the products
  reach ~5e23, far past int64);
- entropy sums accumulate in sorted order of (count, marginal) so that
  relabeling either side, or swapping the two sides, reproduces results
  bit-for-bit, not merely within a tolerance;
- NMI uses the arithmetic-mean normalization I/((H(U)+H(V))/2), which is
  identical to the V-measure (including the degenerate conventions), so it
  is computed through the same code path to keep the identity exact.

Degenerate inputs never produce NaN; they produce the documented
conventional value plus a flag in ConsensusScores.degenerate_flags.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError

# ---------------------------------------------------------------------------
# contingency table
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ContingencyTable:
    """Sparse co-occurrence counts between two flat label arrays.

    Only nonzero cells are stored: cell k says that cell_count[k] pixels
    carry gt label cell_gt[k] and predicted label cell_pred[k]. Row and
    column marginals are kept alongside; cells are ordered by (gt, pred).
    """

    cell_gt: np.ndarray
    cell_pred: np.ndarray
    cell_count: np.ndarray
    row_labels: np.ndarray
    row_counts: np.ndarray
    col_labels: np.ndarray
    col_counts: np.ndarray
    n: int

    def as_dict(self) -> dict[tuple[int, int], int]:
        return {
            (int(g), int(p)): int(c)
            for g, p, c in zip(self.cell_gt, self.cell_pred, self.cell_count)
        }


def contingency(gt: np.ndarray, pred: np.ndarray) -> ContingencyTable:
    """Build the sparse contingency table for two equally-shaped label arrays."""
    gt = np.asarray(gt).ravel()
    pred = np.asarray(pred).ravel()
    if gt.shape != pred.shape:
        raise DataError(f"label arrays differ in size: {gt.size} vs {pred.size}")
    if gt.size == 0:
        raise DataError("cannot build a contingency table from zero pixels")
    gt = gt.astype(np.int64, copy=False)
    pred = pred.astype(np.int64, copy=False)

    row_labels, row_counts = np.unique(gt, return_counts=True)
    col_labels, col_counts = np.unique(pred, return_counts=True)

    # Encode (gt, pred) pairs into single int64 keys for one sorted pass.
    base = int(pred.max()) - int(pred.min()) + 1
    shifted = pred - int(pred.min())
    keys = (gt - int(gt.min())) * base + shifted
    uniq, counts = np.unique(keys, return_counts=True)
    cell_gt = uniq // base + int(gt.min())
    cell_pred = uniq % base + int(pred.min())

    return ContingencyTable(
        cell_gt=cell_gt,
        cell_pred=cell_pred,
        cell_count=counts.astype(np.int64),
        row_labels=row_labels,
        row_counts=row_counts.astype(np.int64),
        col_labels=col_labels,
        col_counts=col_counts.astype(np.int64),
        n=int(gt.size),
    )


# ---------------------------------------------------------------------------
# pair counting (exact integers)
# ---------------------------------------------------------------------------


def _comb2_sum(counts: np.ndarray) -> int:
    """Sum of C(c, 2) over counts, in exact Python integers."""
    return sum(int(c) * (int(c) - 1) // 2 for c in counts)


def pair_counts(table: ContingencyTable) -> tuple[int, int, int]:
    """(TP, P_gt, P_pred): co-clustered pair totals as exact integers.

    TP counts pixel pairs placed together by both partitions; P_gt / P_pred
    count pairs placed together by ground truth / prediction respectively.
    """
    tp = _comb2_sum(table.cell_count)
    p_gt = _comb2_sum(table.row_counts)
    p_pred = _comb2_sum(table.col_counts)
    return tp, p_gt, p_pred


def _partitions_identical(table: ContingencyTable) -> bool:
    # Identical as set-partitions iff every row and every column of the
    # table has exactly one nonzero cell.
    ncells = table.cell_count.size
    return ncells == table.row_labels.size and ncells == table.col_labels.size


def _fmi_flagged(table: ContingencyTable) -> tuple[float, list[str]]:
    tp, p_gt, p_pred = pair_counts(table)
    if p_gt == 0 or p_pred == 0:
        return 0.0, ["fmi_no_coclustered_pairs"]
    return tp / math.sqrt(p_gt * p_pred), []


def fmi(table: ContingencyTable) -> float:
    """Fowlkes-Mallows index: TP / sqrt(P_gt * P_pred).

    When either partition has no co-clustered pairs (all singletons) the
    index is 0 by convention.
    """
    return _fmi_flagged(table)[0]


def _ari_flagged(table: ContingencyTable) -> tuple[float, list[str]]:
    tp, p_gt, p_pred = pair_counts(table)
    total_pairs = table.n * (table.n - 1) // 2
    # Degenerate iff max_index == expected_index, checked in exact integers:
    # (P_gt + P_pred)/2 == P_gt*P_pred/C(n,2).
    if total_pairs * (p_gt + p_pred) == 2 * p_gt * p_pred:
        return (1.0 if _partitions_identical(table) else 0.0), ["ari_degenerate"]
    expected = p_gt * p_pred / total_pairs
    max_index = (p_gt + p_pred) / 2
    return (tp - expected) / (max_index - expected), []


def ari(table: ContingencyTable) -> float:
    """Adjusted Rand index: (TP - E) / (M - E) with E = P_gt*P_pred/C(n,2),
    M = (P_gt+P_pred)/2.

    When M == E (both partitions trivial in the same way) the value is 1 if
    the partitions are identical as set-partitions, else 0.
    """
    return _ari_flagged(table)[0]


# ---------------------------------------------------------------------------
# entropies (sorted accumulation for exact invariance)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EntropyTerms:
    h_gt: float
    h_pred: float
    h_gt_given_pred: float
    h_pred_given_gt: float
    mutual_info: float


def _entropy(counts: np.ndarray, n: int) -> float:
    # counts are all positive; sorting makes the accumulation order a pure
    # function of the count multiset, so any relabeling sums identically.
    c = np.sort(counts).astype(np.float64)
    p = c / n
    return float(np.sum(-p * np.log(p)))


def _conditional_entropy(cell_counts: np.ndarray, given_marginals: np.ndarray,
                         n: int) -> float:
    # H(A|B) = sum over cells (n_ab/n) * (ln b - ln n_ab); sorted by
    # (cell count, marginal) for order-independent accumulation.
    order = np.lexsort((given_marginals, cell_counts))
    c = cell_counts[order].astype(np.float64)
    m = given_marginals[order].astype(np.float64)
    return float(np.sum((c / n) * (np.log(m) - np.log(c))))


def entropy_terms(table: ContingencyTable) -> EntropyTerms:
    """Natural-log entropies of both partitions, both conditionals, and I."""
    row_of_cell = table.row_counts[np.searchsorted(table.row_labels, table.cell_gt)]
    col_of_cell = table.col_counts[np.searchsorted(table.col_labels, table.cell_pred)]
    h_gt = _entropy(table.row_counts, table.n)
    h_pred = _entropy(table.col_counts, table.n)
    h_gt_given_pred = _conditional_entropy(table.cell_count, col_of_cell, table.n)
    h_pred_given_gt = _conditional_entropy(table.cell_count, row_of_cell, table.n)
    return EntropyTerms(
        h_gt=h_gt,
        h_pred=h_pred,
        h_gt_given_pred=h_gt_given_pred,
        h_pred_given_gt=h_pred_given_gt,
        mutual_info=h_gt - h_gt_given_pred,
    )


def _v_measure_flagged(table: ContingencyTable) -> tuple[float, float, float, list[str]]:
    terms = entropy_terms(table)
    flags = []
    if terms.h_gt == 0.0:
        h = 1.0
        flags.append("homogeneity_trivial")
    else:
        h = min(1.0, max(0.0, 1.0 - terms.h_gt_given_pred / terms.h_gt))
    if terms.h_pred == 0.0:
        c = 1.0
        flags.append("completeness_trivial")
    else:
        c = min(1.0, max(0.0, 1.0 - terms.h_pred_given_gt / terms.h_pred))
    if h + c == 0.0:
        v = 0.0
        flags.append("v_measure_zero_information")
    else:
        v = 2.0 * h * c / (h + c)
    return h, c, v, flags


def v_measure(table: ContingencyTable) -> tuple[float, float, float]:
    """(homogeneity, completeness, V-measure).

    h = 1 - H(gt|pred)/H(gt) (1 when H(gt) = 0), c symmetrically, and
    v = 2hc/(h+c) (0 when h + c = 0). h and c are clamped to [0, 1].
    """
    h, c, v, _ = _v_measure_flagged(table)
    return h, c, v


def nmi(table: ContingencyTable) -> float:
    """Normalized mutual information, arithmetic-mean normalization.

    I/((H(gt)+H(pred))/2) equals the V-measure for every table, degenerate
    conventions included (1 when both entropies vanish, 0 when exactly one
    does), so this shares the V-measure code path and the equality is exact
    by construction rather than within a tolerance.
    """
    return _v_measure_flagged(table)[2]


# ---------------------------------------------------------------------------
# bundled scoring
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConsensusScores:
    """All consensus metrics for one (gt, pred) pair, plus degeneracy flags."""

    fmi: float
    ari: float
    nmi: float
    v_measure: float
    homogeneity: float
    completeness: float
    degenerate_flags: tuple[str, ...] = ()

    def as_mapping(self) -> dict[str, float]:
        return {
            "fmi": self.fmi,
            "ari": self.ari,
            "nmi": self.nmi,
            "v_measure": self.v_measure,
            "homogeneity": self.homogeneity,
            "completeness": self.completeness,
        }


METRIC_NAMES = ("fmi", "ari", "nmi", "v_measure", "homogeneity", "completeness")


def score_table(table: ContingencyTable) -> ConsensusScores:
    """Compute every consensus metric from one contingency table."""
    fmi_value, flags = _fmi_flagged(table)
    ari_value, ari_flags = _ari_flagged(table)
    h, c, v, v_flags = _v_measure_flagged(table)
    flags.extend(ari_flags)
    flags.extend(v_flags)
    return ConsensusScores(
        fmi=fmi_value,
        ari=ari_value,
        nmi=v,
        v_measure=v,
        homogeneity=h,
        completeness=c,
        degenerate_flags=tuple(sorted(flags)),
    )


def score_label_maps(gt: np.ndarray, pred: np.ndarray,
                     exclude_predicted_background: bool = False) -> ConsensusScores:
    """Score a predicted label map against ground truth.

    Both rasters are flattened and treated as clusterings; label values
    carry no meaning across the two sides. With exclude_predicted_background
    the pixels the prediction left unassigned (label 0) are dropped before
    scoring instead of forming their own cluster.
    """
    gt = np.asarray(gt)
    pred = np.asarray(pred)
    if gt.shape != pred.shape:
        raise DataError(f"gt and pred shapes differ: {gt.shape} vs {pred.shape}")
    g = gt.ravel()
    p = pred.ravel()
    if exclude_predicted_background:
        keep = p != 0
        if not keep.any():
            raise DataError("no pixels remain after excluding predicted background")
        g = g[keep]
        p = p[keep]
    return score_table(contingency(g, p))
