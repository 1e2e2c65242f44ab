"""Single-source baselines: structure-only DeepWalk and attribute-only
AttrPure (truncated SVD of the full cosine similarity matrix)."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .sgns import EmbeddingMatrix, TrainConfig, UnigramSampler, extract_pairs, train
from .transition import normalize_attribute_rows, row_normalize
from .walker import WalkConfig, generate_walks


def deepwalk_embed(adjacency: sp.spmatrix, walk_cfg: WalkConfig, train_cfg: TrainConfig) -> EmbeddingMatrix:
    """Walk-and-train embedding using only link structure.

    Attribute information never enters: the function takes the adjacency
    matrix alone. Isolated nodes yield length-1 walks and keep
    near-initialization embeddings.
    """
    adjacency = sp.csr_matrix(adjacency)
    if adjacency.nnz == 0:
        raise ValueError("graph has no links; nothing to walk on")
    T = row_normalize(adjacency)
    corpus = generate_walks(T, walk_cfg)
    pairs = extract_pairs(corpus, train_cfg.window)
    sampler = UnigramSampler.from_corpus(corpus, train_cfg.ns_exponent)
    return train(pairs, sampler, train_cfg)


def _fix_signs(U: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of each column positive."""
    for j in range(U.shape[1]):
        i = int(np.argmax(np.abs(U[:, j])))
        if U[i, j] < 0:
            U[:, j] = -U[:, j]
    return U


def randomized_gram_eigh(
    N: sp.spmatrix, k: int, oversample: int = 10, power_iters: int = 4, seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Top-k eigenpairs of the Gram matrix S = N @ N.T without forming S.

    Randomized range finder with oversampling and power iterations; S is
    symmetric positive semidefinite, so its eigendecomposition coincides
    with its SVD. Returns (U, eigenvalues) with descending eigenvalues and
    sign-fixed columns.
    """
    n = N.shape[0]
    rank = min(n, k + oversample)
    rng = np.random.default_rng(seed)
    Y = N @ (N.T @ rng.standard_normal((n, rank)))
    Q, _ = np.linalg.qr(Y)
    for _ in range(power_iters):
        Q, _ = np.linalg.qr(N @ (N.T @ Q))
    B = Q.T @ (N @ (N.T @ Q))
    w, V = np.linalg.eigh((B + B.T) / 2.0)
    top = np.argsort(w)[::-1][:k]
    U = _fix_signs(Q @ V[:, top])
    return U, np.clip(w[top], 0.0, None)


def attrpure_embed(
    attributes: sp.spmatrix, dim: int, seed: int = 0,
    oversample: int = 10, power_iters: int = 4,
) -> EmbeddingMatrix:
    """Embedding from attributes alone: truncated SVD of the dense cosine
    similarity matrix (unit diagonal for nodes with attributes, computed
    implicitly as a Gram matrix of L2-normalized rows).

    The embedding is U_d * sqrt(sigma_d), the symmetric factor of the
    rank-d approximation.
    """
    attributes = sp.csr_matrix(attributes)
    n = attributes.shape[0]
    if n < dim:
        raise ValueError(f"need at least dim={dim} nodes, got {n}")
    N = normalize_attribute_rows(attributes)
    U, w = randomized_gram_eigh(N, dim, oversample=oversample, power_iters=power_iters, seed=seed)
    return EmbeddingMatrix(vectors=U * np.sqrt(w))
