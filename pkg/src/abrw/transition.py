"""Structural, attribute, and fused transition matrices.

The attribute transition matrix is built row-block by row-block so the
dense n-by-n cosine similarity matrix is never materialized: peak memory is
O(block * n) with a small constant block, plus the output sparsity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

ROW_SUM_TOL = 1e-9


@dataclass
class FusionConfig:
    """Fusion knobs: balancing factor and per-row top-k neighbour budget."""

    alpha: float = 0.8
    top_k: int = 30

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.top_k < 1:
            raise ValueError(f"top_k must be >= 1, got {self.top_k}")


class TransitionMatrix:
    """Sparse row-stochastic matrix; each row is a next-hop distribution.

    Rows either sum to 1 within ``ROW_SUM_TOL`` or hold no entries at all
    (dead ends are kept as all-zero rows rather than smoothed away).
    """

    def __init__(self, matrix: sp.spmatrix, validate: bool = True):
        m = sp.csr_matrix(matrix, dtype=np.float64)
        m.sum_duplicates()
        m.sort_indices()
        m.eliminate_zeros()
        self.matrix = m
        if validate:
            self._check()

    def _check(self):
        if self.matrix.shape[0] != self.matrix.shape[1]:
            raise ValueError(f"transition matrix must be square, got {self.matrix.shape}")
        if self.matrix.nnz:
            data = self.matrix.data
            if not np.all(np.isfinite(data)):
                raise ValueError("transition matrix contains NaN or Inf")
            if data.min() < 0 or data.max() > 1 + ROW_SUM_TOL:
                raise ValueError("transition probabilities must lie in [0, 1]")
        sums = np.asarray(self.matrix.sum(axis=1)).ravel()
        bad = ~((np.abs(sums - 1.0) <= ROW_SUM_TOL) | (sums == 0.0))
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise ValueError(f"row {i} sums to {sums[i]!r}, expected 1 or all-zero")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Column indices and probabilities of row ``i`` (sorted by column)."""
        start, end = self.matrix.indptr[i], self.matrix.indptr[i + 1]
        return self.matrix.indices[start:end], self.matrix.data[start:end]

    def zero_rows(self) -> np.ndarray:
        """Boolean mask of rows with no stored entries."""
        return np.diff(self.matrix.indptr) == 0

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def equals(self, other: "TransitionMatrix") -> bool:
        return self.matrix.shape == other.matrix.shape and (self.matrix != other.matrix).nnz == 0

    def save(self, path):
        """Debug dump as ``row col prob`` lines."""
        coo = self.matrix.tocoo()
        with open(path, "w", encoding="utf-8") as fh:
            for i, j, p in zip(coo.row, coo.col, coo.data):
                fh.write(f"{i} {j} {p!r}\n")


def row_normalize(W: sp.spmatrix) -> TransitionMatrix:
    """Divide each row by its sum; rows with zero sum stay all-zero."""
    W = sp.csr_matrix(W, dtype=np.float64)
    if W.shape[0] != W.shape[1]:
        raise ValueError(f"expected a square matrix, got {W.shape}")
    if W.nnz and W.data.min() < 0:
        raise ValueError("weights must be nonnegative")
    sums = np.asarray(W.sum(axis=1)).ravel()
    scale = np.divide(1.0, sums, out=np.zeros_like(sums), where=sums > 0)
    T = sp.diags(scale) @ W
    return TransitionMatrix(T)


def normalize_attribute_rows(A: sp.spmatrix) -> sp.csr_matrix:
    """Scale each attribute row to unit L2 norm; all-zero rows stay zero."""
    A = sp.csr_matrix(A, dtype=np.float64)
    norms = np.sqrt(np.asarray(A.multiply(A).sum(axis=1)).ravel())
    scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    return sp.diags(scale) @ A


def attribute_similarity_row(A: sp.spmatrix, i: int, normalized: sp.csr_matrix | None = None) -> np.ndarray:
    """Clamped cosine similarity of node ``i``'s attributes against all nodes.

    Entries involving an all-zero attribute row are 0, the diagonal entry is
    forced to 0, and negative cosines are clamped to 0 (entries double as
    unnormalized transition probabilities). Pass ``normalized`` to reuse a
    precomputed :func:`normalize_attribute_rows` result across calls.
    """
    N = normalize_attribute_rows(A) if normalized is None else normalized
    row = np.asarray((N @ N[i].T).todense()).ravel()
    np.maximum(row, 0.0, out=row)
    row[i] = 0.0
    return row


def sparsify_topk(row: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Keep the k largest strictly-positive entries of a dense row.

    Returns (column indices, values) sorted by column. Ties at the k-th
    value are broken toward smaller column indices. Selection uses
    introselect (np.partition), not a full sort.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    row = np.asarray(row, dtype=np.float64)
    pos = np.flatnonzero(row > 0)
    if len(pos) <= k:
        return pos, row[pos]
    vals = row[pos]
    kth = np.partition(vals, len(vals) - k)[len(vals) - k]
    above = pos[vals > kth]
    ties = pos[vals == kth][: k - len(above)]  # pos is ascending, so smallest columns win
    keep = np.sort(np.concatenate([above, ties]))
    return keep, row[keep]


def build_attribute_transition(A: sp.spmatrix, top_k: int, block_size: int = 128) -> TransitionMatrix:
    """Attribute transition matrix: cosine rows -> top-k -> row normalize.

    Processes ``block_size`` rows at a time; the output is independent of
    the block size, so per-row computation can be distributed freely.
    Rows for all-zero attribute vectors come out all-zero.
    """
    if top_k < 1:
        raise ValueError(f"top_k must be >= 1, got {top_k}")
    N = normalize_attribute_rows(A)
    n = N.shape[0]
    NT = N.T.tocsc()

    indptr = np.zeros(n + 1, dtype=np.int64)
    col_parts, data_parts = [], []
    for start in range(0, n, block_size):
        stop = min(start + block_size, n)
        block = np.asarray((N[start:stop] @ NT).todense())
        np.maximum(block, 0.0, out=block)
        for i in range(start, stop):
            row = block[i - start]
            row[i] = 0.0
            cols, vals = sparsify_topk(row, top_k)
            total = vals.sum()
            if total > 0:
                col_parts.append(cols)
                data_parts.append(vals / total)
                indptr[i + 1] = indptr[i] + len(cols)
            else:
                indptr[i + 1] = indptr[i]
    col_idx = np.concatenate(col_parts) if col_parts else np.zeros(0, dtype=np.int64)
    data = np.concatenate(data_parts) if data_parts else np.zeros(0)
    T = sp.csr_matrix((data, col_idx, indptr), shape=(n, n))
    return TransitionMatrix(T)


def build_biased_transition(
    Tw: TransitionMatrix, Ta: TransitionMatrix, alpha: float
) -> TransitionMatrix:
    """Fuse structural and attribute transitions row by row.

    Rows with no structural mass fall back to the attribute row; rows with
    no attribute mass fall back to the structural row (keeps rows
    stochastic); all other rows mix as alpha * structural +
    (1 - alpha) * attribute. Rows zero in both inputs stay zero.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if Tw.matrix.shape != Ta.matrix.shape:
        raise ValueError(f"dimension mismatch: {Tw.matrix.shape} vs {Ta.matrix.shape}")
    w_zero = Tw.zero_rows()
    a_zero = Ta.zero_rows()
    w_weight = np.where(w_zero, 0.0, np.where(a_zero, 1.0, alpha))
    a_weight = np.where(w_zero, 1.0, np.where(a_zero, 0.0, 1.0 - alpha))
    fused = sp.diags(w_weight) @ Tw.matrix + sp.diags(a_weight) @ Ta.matrix
    return TransitionMatrix(fused)


def save_transition(T: TransitionMatrix, path):
    T.save(path)
