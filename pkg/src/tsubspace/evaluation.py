"""Partition-agreement metrics (adjusted Rand, Rand) and confusion tables.

Labels are arbitrary hashable identifiers compared by equality; both metrics
are invariant under renaming either partition.
"""

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import ShapeError


def _as_labels(x, name):
    arr = np.asarray(x).ravel()
    if arr.size == 0:
        raise ShapeError(f"{name} partition is empty")
    return arr


def _paired(truth, pred):
    t = _as_labels(truth, "truth")
    p = _as_labels(pred, "pred")
    if t.shape[0] != p.shape[0]:
        raise ShapeError(f"partition lengths differ: {t.shape[0]} vs {p.shape[0]}")
    return t, p


def _first_appearance_order(values):
    seen = {}
    for v in values.tolist():
        if v not in seen:
            seen[v] = len(seen)
    return list(seen)


@dataclass
class ConfusionTable:
    """Cross-tabulation of true classes (rows) against predicted clusters (columns)."""

    rows: list
    cols: list
    counts: np.ndarray

    @property
    def total(self):
        return int(self.counts.sum())

    def to_text(self):
        """Aligned text rendering with row/column headers."""
        headers = [""] + [str(c) for c in self.cols]
        body = [[str(r)] + [str(v) for v in row] for r, row in zip(self.rows, self.counts)]
        widths = [max(len(line[i]) for line in [headers] + body) for i in range(len(headers))]
        lines = [
            "  ".join(cell.rjust(w) for cell, w in zip(line, widths))
            for line in [headers] + body
        ]
        return "\n".join(lines)

    def to_csv_text(self):
        lines = ["truth\\pred," + ",".join(str(c) for c in self.cols)]
        for r, row in zip(self.rows, self.counts):
            lines.append(f"{r}," + ",".join(str(v) for v in row))
        return "\n".join(lines) + "\n"


def confusion(truth, pred) -> ConfusionTable:
    """Count matrix with rows/columns ordered by first appearance."""
    t, p = _paired(truth, pred)
    rows = _first_appearance_order(t)
    cols = _first_appearance_order(p)
    row_idx = {v: i for i, v in enumerate(rows)}
    col_idx = {v: i for i, v in enumerate(cols)}
    counts = np.zeros((len(rows), len(cols)), dtype=int)
    for tv, pv in zip(t.tolist(), p.tolist()):
        counts[row_idx[tv], col_idx[pv]] += 1
    return ConfusionTable(rows=rows, cols=cols, counts=counts)


def _pair_sums(counts):
    same_same = sum(comb(int(v), 2) for v in counts.ravel())
    row_pairs = sum(comb(int(v), 2) for v in counts.sum(axis=1))
    col_pairs = sum(comb(int(v), 2) for v in counts.sum(axis=0))
    return same_same, row_pairs, col_pairs


def ari(truth, pred):
    """Chance-corrected pair-counting agreement: 1 at perfect match, 0 expected
    under random labeling."""
    t, p = _paired(truth, pred)
    n = t.shape[0]
    if n < 2:
        raise ShapeError("ARI needs at least 2 observations")
    counts = confusion(t, p).counts
    same_same, row_pairs, col_pairs = _pair_sums(counts)
    total_pairs = comb(n, 2)
    expected = row_pairs * col_pairs / total_pairs
    maximum = 0.5 * (row_pairs + col_pairs)
    if maximum == expected:
        # Both partitions are trivial in the same way; treat as perfect agreement.
        return 1.0
    return float((same_same - expected) / (maximum - expected))


def rand_index(truth, pred):
    """Fraction of concordant pairs (grouped together in both, or apart in both)."""
    t, p = _paired(truth, pred)
    n = t.shape[0]
    if n < 2:
        raise ShapeError("Rand index needs at least 2 observations")
    counts = confusion(t, p).counts
    same_same, row_pairs, col_pairs = _pair_sums(counts)
    total_pairs = comb(n, 2)
    diff_diff = total_pairs - row_pairs - col_pairs + same_same
    return float((same_same + diff_diff) / total_pairs)
