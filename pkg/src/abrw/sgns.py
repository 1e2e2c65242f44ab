"""Skip-gram negative sampling over walk corpora.

``pair_objective``/``pair_gradient`` are the float64 reference forms of the
per-pair objective; training runs a float32 stochastic gradient ascent
kernel over all pairs. Negative draws come from stateless per-visit
splitmix64 streams, so deterministic mode is bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
from numba import njit, prange

from .walker import AliasTable, WalkCorpus, build_alias

_MASK64 = 0xFFFFFFFFFFFFFFFF


@dataclass
class TrainConfig:
    dim: int = 128
    window: int = 10
    negatives: int = 5
    ns_exponent: float = 0.75
    epochs: int = 5
    lr_initial: float = 0.025
    lr_final: float = 0.0001
    seed: int = 0
    deterministic: bool = True
    threads: int = 1

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.window < 2:
            raise ValueError(f"window must be >= 2, got {self.window}")
        if self.negatives < 0:
            raise ValueError(f"negatives must be >= 0, got {self.negatives}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.lr_initial <= 0:
            raise ValueError(f"lr_initial must be positive, got {self.lr_initial}")
        if self.lr_final > self.lr_initial:
            raise ValueError("lr_final must not exceed lr_initial")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")


@dataclass
class PairCorpus:
    """(center, context) training pairs; co-occurrence counts are implicit
    in pair multiplicity."""

    centers: np.ndarray  # int32
    contexts: np.ndarray  # int32
    n: int

    def __len__(self):
        return len(self.centers)

    def pairs(self) -> np.ndarray:
        return np.column_stack([self.centers, self.contexts])


@dataclass
class EmbeddingMatrix:
    """Learned target vectors Z (and the training-internal context vectors)."""

    vectors: np.ndarray  # n x d float32
    context: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@njit(cache=True)
def _count_pairs(offsets, window):
    total = 0
    for w in range(len(offsets) - 1):
        length = offsets[w + 1] - offsets[w]
        if length >= window:
            total += (length - window + 1) * (window - 1)
        elif length > 1:
            total += length - 1
    return total


@njit(cache=True)
def _fill_pairs(tokens, offsets, window, centers, contexts):
    p = 0
    for w in range(len(offsets) - 1):
        start = offsets[w]
        length = offsets[w + 1] - start
        if length >= window:
            for a in range(length - window + 1):
                center = tokens[start + a]
                for b in range(1, window):
                    centers[p] = center
                    contexts[p] = tokens[start + a + b]
                    p += 1
        elif length > 1:
            center = tokens[start]
            for b in range(1, length):
                centers[p] = center
                contexts[p] = tokens[start + b]
                p += 1


def extract_pairs(corpus: WalkCorpus, window: int) -> PairCorpus:
    """Slide a length-``window`` window along each walk, one step at a time.

    The first node of each window is the center and the remaining
    ``window - 1`` nodes are its contexts, so a full-length walk of length l
    yields (l - window + 1) * (window - 1) pairs. Walks shorter than the
    window emit pairs from a single truncated window.
    """
    if window < 2:
        raise ValueError(f"window must be >= 2, got {window}")
    total = _count_pairs(corpus.offsets, window)
    centers = np.empty(total, dtype=np.int32)
    contexts = np.empty(total, dtype=np.int32)
    _fill_pairs(corpus.tokens, corpus.offsets, window, centers, contexts)
    return PairCorpus(centers=centers, contexts=contexts, n=corpus.n)


class UnigramSampler:
    """Negative-sample source: P(node) proportional to count^exponent over
    the corpus token counts."""

    def __init__(self, counts: np.ndarray, ns_exponent: float = 0.75):
        counts = np.asarray(counts, dtype=np.float64)
        if counts.sum() == 0:
            raise ValueError("corpus is empty: no tokens to build a unigram distribution")
        self.counts = counts
        self.ns_exponent = ns_exponent
        support = np.flatnonzero(counts > 0)
        weights = counts[support] ** ns_exponent
        probs = weights / weights.sum()
        self.support = support
        self.table = build_alias(support, probs)
        self._probs = probs

    @classmethod
    def from_corpus(cls, corpus: WalkCorpus, ns_exponent: float = 0.75) -> "UnigramSampler":
        counts = np.bincount(corpus.tokens, minlength=corpus.n)
        return cls(counts, ns_exponent)

    def distribution(self) -> np.ndarray:
        """Dense probability vector over all n nodes."""
        dense = np.zeros(len(self.counts))
        dense[self.support] = self._probs
        return dense

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.table.sample(rng, size)


# -- reference objective and gradient (float64) ------------------------------


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _log_sigmoid(x):
    return -np.logaddexp(0.0, -x)


def pair_objective(zi: np.ndarray, cj: np.ndarray, negatives) -> float:
    """log sigma(zi . cj) plus sum_k log sigma(-(zi . ck))."""
    value = _log_sigmoid(float(np.dot(zi, cj)))
    for ck in negatives:
        value += _log_sigmoid(-float(np.dot(zi, ck)))
    return float(value)


def pair_gradient(zi: np.ndarray, cj: np.ndarray, negatives):
    """Analytic gradients of :func:`pair_objective` w.r.t. zi, cj, and each
    negative context vector."""
    s_pos = _sigmoid(float(np.dot(zi, cj)))
    g_zi = (1.0 - s_pos) * np.asarray(cj, dtype=np.float64)
    g_cj = (1.0 - s_pos) * np.asarray(zi, dtype=np.float64)
    g_negatives = []
    for ck in negatives:
        s_neg = _sigmoid(float(np.dot(zi, ck)))
        g_zi = g_zi - s_neg * np.asarray(ck, dtype=np.float64)
        g_negatives.append(-s_neg * np.asarray(zi, dtype=np.float64))
    return g_zi, g_cj, g_negatives


# -- training kernels ---------------------------------------------------------

_GAMMA = np.uint64(0x9E3779B97F4A7C15)


@njit(inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(inline="always")
def _next_uniform(state):
    state = state + _GAMMA
    z = _mix64(state)
    return state, (z >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def _shuffle_pairs(centers, contexts, key):
    state = key
    for i in range(centers.shape[0] - 1, 0, -1):
        state, u = _next_uniform(state)
        j = int(u * (i + 1))
        if j > i:
            j = i
        centers[i], centers[j] = centers[j], centers[i]
        contexts[i], contexts[j] = contexts[j], contexts[i]


# quantized sigmoid, the classic word2vec trick: values of sigma(f) for f in
# [-_SIGMOID_RANGE, _SIGMOID_RANGE), clamped outside
_SIGMOID_RANGE = 6.0
_SIGMOID_TABLE = (
    1.0 / (1.0 + np.exp(-(np.arange(1024) / 1024.0 * 2.0 - 1.0) * _SIGMOID_RANGE))
).astype(np.float32)


@njit(inline="always", fastmath=True)
def _sigmoid_lookup(f):
    idx = int((f / _SIGMOID_RANGE + 1.0) * 512.0)
    if idx < 0:
        idx = 0
    elif idx > 1023:
        idx = 1023
    return _SIGMOID_TABLE[idx]


@njit(inline="always", fastmath=True)
def _sgd_visit(Z, C, work, ci, co, neg_prob, neg_alias, neg_support, negatives, lr, state):
    d = Z.shape[1]
    size = neg_support.shape[0]
    zi = Z[ci]
    cj = C[co]
    f = np.float32(0.0)
    for q in range(d):
        f += zi[q] * cj[q]
    g = lr * (np.float32(1.0) - _sigmoid_lookup(f))
    for q in range(d):
        work[q] = g * cj[q]
        cj[q] += g * zi[q]
    for _ in range(negatives):
        state, u1 = _next_uniform(state)
        state, u2 = _next_uniform(state)
        slot = int(u1 * size)
        if slot >= size:
            slot = size - 1
        if u2 >= neg_prob[slot]:
            slot = neg_alias[slot]
        ck = C[neg_support[slot]]
        f = np.float32(0.0)
        for q in range(d):
            f += zi[q] * ck[q]
        g = -lr * _sigmoid_lookup(f)
        for q in range(d):
            work[q] += g * ck[q]
            ck[q] += g * zi[q]
    for q in range(d):
        zi[q] += work[q]


@njit(cache=True, fastmath=True)
def _sgd_epoch_serial(
    Z, C, centers, contexts, neg_prob, neg_alias, neg_support,
    negatives, key, lr_initial, lr_final, visit_offset, total_visits,
):
    d = Z.shape[1]
    work = np.empty(d, dtype=np.float32)
    for i in range(centers.shape[0]):
        t = visit_offset + i
        lr = np.float32(lr_initial + (lr_final - lr_initial) * (t / total_visits))
        state = _mix64(key ^ (np.uint64(t + 1) * _GAMMA))
        _sgd_visit(
            Z, C, work, centers[i], contexts[i],
            neg_prob, neg_alias, neg_support, negatives, lr, state,
        )


@njit(cache=True, parallel=True, fastmath=True)
def _sgd_epoch_parallel(
    Z, C, centers, contexts, neg_prob, neg_alias, neg_support,
    negatives, key, lr_initial, lr_final, visit_offset, total_visits, chunks,
):
    d = Z.shape[1]
    num = centers.shape[0]
    for c in prange(chunks):
        work = np.empty(d, dtype=np.float32)
        lo = c * num // chunks
        hi = (c + 1) * num // chunks
        for i in range(lo, hi):
            t = visit_offset + i
            lr = np.float32(lr_initial + (lr_final - lr_initial) * (t / total_visits))
            state = _mix64(key ^ (np.uint64(t + 1) * _GAMMA))
            _sgd_visit(
                Z, C, work, centers[i], contexts[i],
                neg_prob, neg_alias, neg_support, negatives, lr, state,
            )


def _stream_key(seed: int, epoch: int, purpose: int) -> np.uint64:
    ss = np.random.SeedSequence([seed & _MASK64, epoch, purpose])
    return ss.generate_state(1, np.uint64)[0]


def init_embeddings(n: int, dim: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Standard skip-gram init: Z uniform in [-0.5/d, 0.5/d], C all zero."""
    rng = np.random.default_rng(seed)
    Z = ((rng.random((n, dim)) - 0.5) / dim).astype(np.float32)
    C = np.zeros((n, dim), dtype=np.float32)
    return Z, C


def train(pairs: PairCorpus, sampler: UnigramSampler, cfg: TrainConfig) -> EmbeddingMatrix:
    """Stochastic gradient ascent over all pairs for ``cfg.epochs`` passes.

    Negatives are resampled per pair per visit; the learning rate decays
    linearly from lr_initial to lr_final over the total pair-visit count.
    Pairs are shuffled once by seed up front; deterministic mode then runs
    single-threaded in that fixed order, while parallel mode allows
    lock-free concurrent updates.
    """
    if len(pairs) == 0:
        raise ValueError("pair corpus is empty")
    Z, C = init_embeddings(pairs.n, cfg.dim, cfg.seed)
    if cfg.epochs == 0:
        return EmbeddingMatrix(vectors=Z, context=C)

    centers = np.ascontiguousarray(pairs.centers, dtype=np.int32).copy()
    contexts = np.ascontiguousarray(pairs.contexts, dtype=np.int32).copy()
    neg_prob = sampler.table.prob
    neg_alias = sampler.table.alias
    neg_support = sampler.table.support.astype(np.int32)
    total_visits = cfg.epochs * len(pairs)

    threads = 1 if cfg.deterministic else max(1, cfg.threads)
    if threads > 1:
        threads = min(threads, numba.config.NUMBA_NUM_THREADS)
        numba.set_num_threads(threads)

    _shuffle_pairs(centers, contexts, _stream_key(cfg.seed, 0, 0))
    for epoch in range(cfg.epochs):
        key = _stream_key(cfg.seed, epoch, 1)
        visit_offset = epoch * len(pairs)
        if threads == 1:
            _sgd_epoch_serial(
                Z, C, centers, contexts, neg_prob, neg_alias, neg_support,
                cfg.negatives, key, cfg.lr_initial, cfg.lr_final,
                visit_offset, total_visits,
            )
        else:
            _sgd_epoch_parallel(
                Z, C, centers, contexts, neg_prob, neg_alias, neg_support,
                cfg.negatives, key, cfg.lr_initial, cfg.lr_final,
                visit_offset, total_visits, threads * 8,
            )
    return EmbeddingMatrix(vectors=Z, context=C)


# -- embedding text format ----------------------------------------------------


def save_embedding(path, embedding: EmbeddingMatrix | np.ndarray, node_ids):
    """Word-vector text layout: header ``n d`` then ``id v1 ... vd`` rows."""
    Z = embedding.vectors if isinstance(embedding, EmbeddingMatrix) else embedding
    Z = np.asarray(Z, dtype=np.float32)
    n, d = Z.shape
    if len(node_ids) != n:
        raise ValueError(f"{len(node_ids)} node ids for {n} embedding rows")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{n} {d}\n")
        for i in range(n):
            fh.write(node_ids[i] + " " + " ".join(str(v) for v in Z[i]) + "\n")


def load_embedding(path) -> tuple[list[str], np.ndarray]:
    """Read the text layout back; returns (node ids, float32 matrix)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: bad embedding header {header!r}")
        n, d = int(header[0]), int(header[1])
        ids = []
        Z = np.empty((n, d), dtype=np.float32)
        for i in range(n):
            tokens = fh.readline().split()
            if len(tokens) != d + 1:
                raise ValueError(f"{path}: row {i} has {len(tokens)} tokens, expected {d + 1}")
            ids.append(tokens[0])
            Z[i] = [np.float32(t) for t in tokens[1:]]
    return ids, Z
