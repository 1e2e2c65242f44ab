"""Weighted random walks over a transition matrix via alias sampling.

Every walk consumes its own counter-based random stream keyed by
(seed, round, start node), so the corpus is bit-identical no matter how
walk generation is scheduled or distributed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from numpy.random import Generator, Philox

from .transition import TransitionMatrix

_MASK64 = 0xFFFFFFFFFFFFFFFF


@dataclass
class WalkConfig:
    walks_per_node: int = 10
    walk_length: int = 80
    seed: int = 0

    def __post_init__(self):
        if self.walks_per_node < 1:
            raise ValueError(f"walks_per_node must be >= 1, got {self.walks_per_node}")
        if self.walk_length < 1:
            raise ValueError(f"walk_length must be >= 1, got {self.walk_length}")


@dataclass
class AliasTable:
    """O(1) sampler for one discrete distribution (Vose construction).

    ``support`` holds the candidate column indices; ``prob``/``alias`` are
    the acceptance probabilities and fallback slots over the same range.
    """

    support: np.ndarray
    prob: np.ndarray
    alias: np.ndarray

    def __len__(self):
        return len(self.support)

    def sample(self, rng: Generator, size: int) -> np.ndarray:
        """Draw ``size`` support values; two uniforms per draw."""
        u = rng.random((size, 2))
        slots = np.minimum((u[:, 0] * len(self)).astype(np.int64), len(self) - 1)
        reject = u[:, 1] >= self.prob[slots]
        slots[reject] = self.alias[slots[reject]]
        return self.support[slots]

    def reconstructed_probabilities(self) -> dict[int, float]:
        """Exact per-support sampling probability implied by the table."""
        L = len(self)
        out = {int(c): 0.0 for c in self.support}
        for slot in range(L):
            out[int(self.support[slot])] += self.prob[slot] / L
            if self.prob[slot] < 1.0:
                out[int(self.support[self.alias[slot]])] += (1.0 - self.prob[slot]) / L
        return out


def build_alias(support: np.ndarray, probs: np.ndarray) -> AliasTable:
    """Build an alias table for a probability row (must sum to 1)."""
    support = np.asarray(support, dtype=np.int64)
    probs = np.asarray(probs, dtype=np.float64)
    if len(probs) == 0:
        raise ValueError("cannot build an alias table for an all-zero row")
    if np.any(probs <= 0):
        raise ValueError("alias support entries must have positive probability")
    total = probs.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {total!r}, expected 1")

    L = len(probs)
    scaled = probs * (L / total)
    prob = np.empty(L, dtype=np.float64)
    alias = np.arange(L, dtype=np.int64)
    small = [i for i in range(L) if scaled[i] < 1.0]
    large = [i for i in range(L) if scaled[i] >= 1.0]
    while small and large:
        s = small.pop()
        g = large.pop()
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = (scaled[g] + scaled[s]) - 1.0
        if scaled[g] < 1.0:
            small.append(g)
        else:
            large.append(g)
    for i in large:
        prob[i] = 1.0
    for i in small:  # numerical leftovers
        prob[i] = 1.0
    return AliasTable(support=support, prob=prob, alias=alias)


class AliasTables:
    """Alias tables for every nonzero row of a transition matrix, packed
    into flat arrays so the walk kernel can index them by row.

    Built once per matrix and reused across corpus generations; rows with
    no entries (dead ends) have empty slices and are handled by the walker.
    """

    def __init__(self, indptr, support, prob, alias):
        self.indptr = indptr
        self.support = support
        self.prob = prob
        self.alias = alias

    @classmethod
    def from_transition(cls, T: TransitionMatrix) -> "AliasTables":
        m = T.matrix
        indptr = m.indptr.astype(np.int64)
        support = m.indices.astype(np.int64)
        prob = np.empty(m.nnz, dtype=np.float64)
        alias = np.empty(m.nnz, dtype=np.int64)
        for i in range(T.n):
            start, end = indptr[i], indptr[i + 1]
            if start == end:
                continue
            table = build_alias(support[start:end], m.data[start:end])
            prob[start:end] = table.prob
            alias[start:end] = table.alias
        return cls(indptr, support, prob, alias)


@dataclass
class WalkCorpus:
    """Ragged list of node-index walks stored as a flat token array."""

    tokens: np.ndarray  # int32, all walks concatenated
    offsets: np.ndarray  # int64, len = num_walks + 1
    n: int  # number of nodes in the underlying graph

    def __len__(self):
        return len(self.offsets) - 1

    def __getitem__(self, w: int) -> np.ndarray:
        return self.tokens[self.offsets[w] : self.offsets[w + 1]]

    def __iter__(self):
        for w in range(len(self)):
            yield self[w]

    def lengths(self) -> np.ndarray:
        return np.diff(self.offsets)

    def stats(self) -> dict:
        lengths = self.lengths()
        full = int(lengths.max()) if len(lengths) else 0
        return {
            "num_walks": len(self),
            "num_tokens": int(len(self.tokens)),
            "dead_ended": int(np.sum(lengths < full)),
            "min_length": int(lengths.min()) if len(lengths) else 0,
            "max_length": full,
        }

    @classmethod
    def from_lists(cls, walks: list[list[int]], n: int) -> "WalkCorpus":
        offsets = np.zeros(len(walks) + 1, dtype=np.int64)
        for w, walk in enumerate(walks):
            offsets[w + 1] = offsets[w] + len(walk)
        tokens = np.array([t for walk in walks for t in walk], dtype=np.int32)
        return cls(tokens=tokens, offsets=offsets, n=n)

    def save(self, path, node_ids):
        """One walk per line, space-separated external node ids."""
        with open(path, "w", encoding="utf-8") as fh:
            for walk in self:
                fh.write(" ".join(node_ids[t] for t in walk) + "\n")


@njit(cache=True)
def _walk_kernel(indptr, support, prob, alias, starts, uniforms, out, lengths, walk_length):
    for w in range(starts.shape[0]):
        node = starts[w]
        out[w, 0] = node
        length = 1
        for t in range(walk_length - 1):
            lo = indptr[node]
            size = indptr[node + 1] - lo
            if size == 0:
                break
            slot = int(uniforms[w, t, 0] * size)
            if slot >= size:
                slot = size - 1
            slot += lo
            if uniforms[w, t, 1] >= prob[slot]:
                slot = lo + alias[slot]
            node = np.int32(support[slot])
            out[w, length] = node
            length += 1
        lengths[w] = length


def _walk_uniforms(seed: int, rounds: int, n: int, steps: int) -> np.ndarray:
    """Per-walk uniforms from Philox streams keyed by (seed, round, node)."""
    u = np.empty((rounds * n, steps, 2), dtype=np.float64)
    k0 = np.uint64(seed & _MASK64)
    w = 0
    for rd in range(rounds):
        hi = np.uint64(rd) << np.uint64(32)
        for v in range(n):
            key = np.array([k0, hi | np.uint64(v)], dtype=np.uint64)
            u[w] = Generator(Philox(key=key)).random((steps, 2))
            w += 1
    return u


def generate_walks(
    T: TransitionMatrix, cfg: WalkConfig, tables: AliasTables | None = None
) -> WalkCorpus:
    """Run ``walks_per_node`` rounds of weighted walks from every node.

    Walks are stored round-major, then by start-node index; a walk hitting
    an all-zero row stops early. Output is deterministic for a fixed seed.
    """
    if tables is None:
        tables = AliasTables.from_transition(T)
    n = T.n
    r, l = cfg.walks_per_node, cfg.walk_length
    starts = np.tile(np.arange(n, dtype=np.int32), r)
    uniforms = _walk_uniforms(cfg.seed, r, n, l - 1)
    out = np.empty((r * n, l), dtype=np.int32)
    lengths = np.empty(r * n, dtype=np.int64)
    _walk_kernel(
        tables.indptr, tables.support, tables.prob, tables.alias,
        starts, uniforms, out, lengths, l,
    )
    offsets = np.zeros(r * n + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    tokens = np.empty(offsets[-1], dtype=np.int32)
    for w in range(r * n):
        tokens[offsets[w] : offsets[w + 1]] = out[w, : lengths[w]]
    return WalkCorpus(tokens=tokens, offsets=offsets, n=n)
