"""Attributed graph data model: file loading, link removal, negative sampling.

File formats (UTF-8, whitespace separated, ``#`` starts a comment line):

* edge list        -- ``src dst`` or ``src dst weight``
* attributes       -- dense ``node v1 ... vm`` or sparse ``node idx:val ...``
                      (sparse files need a ``# dims: m`` header line)
* labels           -- ``node label``
* edge samples     -- ``src dst polarity`` with polarity 1 (removed true link)
                      or -1 (sampled non-link)

Node identifiers are arbitrary strings. They are mapped to dense 0-based
indices in order of first appearance in the edge list; every matrix in the
toolkit is indexed by these dense indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
import scipy.sparse as sp


class FileFormatError(ValueError):
    """A loader hit a malformed line; message carries path and line number."""

    def __init__(self, path, lineno, message):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = str(path)
        self.lineno = lineno


@dataclass
class EdgeSample:
    """A node pair with polarity +1 (removed true link) or -1 (non-link)."""

    src: int
    dst: int
    polarity: int
    weight: float = 1.0

    def __post_init__(self):
        if self.src == self.dst:
            raise ValueError(f"self-pair ({self.src}, {self.dst}) not allowed")
        if self.polarity not in (1, -1):
            raise ValueError(f"polarity must be 1 or -1, got {self.polarity}")


@dataclass
class LabelSet:
    """Partial map from dense node index to a class label string."""

    labels: dict[int, str]

    def __len__(self):
        return len(self.labels)

    def __getitem__(self, index):
        return self.labels[index]

    def __contains__(self, index):
        return index in self.labels

    def items(self):
        return self.labels.items()

    @property
    def classes(self) -> list[str]:
        return sorted(set(self.labels.values()))

    def indices(self) -> np.ndarray:
        return np.array(sorted(self.labels), dtype=np.int64)


@dataclass
class AttributedGraph:
    """Immutable attributed network.

    ``adjacency`` is an n-by-n nonnegative CSR matrix (both directions stored
    for undirected graphs); ``attributes`` is an n-by-m CSR matrix whose rows
    are node attribute vectors, all-zero for nodes without attributes. ``m``
    is 0 until an attribute file is attached.
    """

    node_ids: tuple[str, ...]
    adjacency: sp.csr_matrix
    attributes: sp.csr_matrix
    directed: bool = False

    def __post_init__(self):
        self.adjacency = sp.csr_matrix(self.adjacency, dtype=np.float64)
        self.adjacency.sum_duplicates()
        self.adjacency.eliminate_zeros()
        self.attributes = sp.csr_matrix(self.attributes, dtype=np.float64)
        self.validate()

    # -- structure ---------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.node_ids)

    @cached_property
    def id_index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.node_ids)}

    @property
    def num_links(self) -> int:
        """Number of undirected links (or directed edges when directed)."""
        nnz = self.adjacency.nnz
        return nnz if self.directed else nnz // 2

    def link_array(self) -> np.ndarray:
        """Links as an (L, 2) index array; undirected links appear once, src < dst."""
        coo = self.adjacency.tocoo()
        if self.directed:
            pairs = np.column_stack([coo.row, coo.col])
        else:
            keep = coo.row < coo.col
            pairs = np.column_stack([coo.row[keep], coo.col[keep]])
        order = np.lexsort((pairs[:, 1], pairs[:, 0]))
        return pairs[order]

    def validate(self):
        n = self.n
        if len(set(self.node_ids)) != n:
            raise ValueError("node_ids are not unique")
        if self.adjacency.shape != (n, n):
            raise ValueError(f"adjacency shape {self.adjacency.shape} != ({n}, {n})")
        if self.adjacency.nnz:
            data = self.adjacency.data
            if not np.all(np.isfinite(data)):
                raise ValueError("adjacency contains NaN or Inf")
            if data.min() < 0:
                raise ValueError("adjacency contains negative weights")
        if self.adjacency.diagonal().any():
            raise ValueError("self-loops are not allowed")
        if not self.directed and (self.adjacency != self.adjacency.T).nnz:
            raise ValueError("undirected adjacency must be symmetric")
        if self.attributes.shape[0] != n:
            raise ValueError(
                f"attribute matrix has {self.attributes.shape[0]} rows, expected {n}"
            )
        if self.attributes.nnz and not np.all(np.isfinite(self.attributes.data)):
            raise ValueError("attributes contain NaN or Inf")

    def equals(self, other: "AttributedGraph") -> bool:
        return (
            self.node_ids == other.node_ids
            and self.directed == other.directed
            and self.adjacency.shape == other.adjacency.shape
            and (self.adjacency != other.adjacency).nnz == 0
            and self.attributes.shape == other.attributes.shape
            and (self.attributes != other.attributes).nnz == 0
        )


# -- line scanning ----------------------------------------------------------


def _data_lines(path):
    """Yield (lineno, tokens) for non-comment, non-blank lines."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield lineno, line.split()


def _comment_directives(path) -> dict[str, str]:
    """Collect ``# key: value`` comment directives (e.g. ``# dims: 1433``)."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line.startswith("#"):
                continue
            body = line.lstrip("#").strip()
            if ":" in body:
                key, _, value = body.partition(":")
                out[key.strip().lower()] = value.strip()
    return out


def _parse_weight(path, lineno, token):
    try:
        w = float(token)
    except ValueError:
        raise FileFormatError(path, lineno, f"non-numeric weight {token!r}") from None
    if not np.isfinite(w):
        raise FileFormatError(path, lineno, f"weight {token!r} is not finite")
    if w < 0:
        raise FileFormatError(path, lineno, f"negative weight {w}")
    return w


# -- loaders ----------------------------------------------------------------


def load_edge_list(path, directed: bool = False, weighted: bool = False) -> AttributedGraph:
    """Load an edge list into an :class:`AttributedGraph` (no attributes yet).

    Each data line is ``src dst`` (weight 1.0) or, with ``weighted=True``,
    ``src dst weight``. Repeated edges collapse to the last weight seen;
    undirected input stores both directions; self-loops are rejected.
    """
    index: dict[str, int] = {}
    weights: dict[tuple[int, int], float] = {}

    def intern(node_id):
        if node_id not in index:
            index[node_id] = len(index)
        return index[node_id]

    expected = "2 or 3" if weighted else "2"
    for lineno, tokens in _data_lines(path):
        if weighted:
            ok = len(tokens) in (2, 3)
        else:
            ok = len(tokens) == 2
        if not ok:
            raise FileFormatError(
                path, lineno, f"expected {expected} tokens, got {len(tokens)}"
            )
        w = _parse_weight(path, lineno, tokens[2]) if len(tokens) == 3 else 1.0
        i = intern(tokens[0])
        j = intern(tokens[1])
        if i == j:
            raise FileFormatError(path, lineno, f"self-loop on {tokens[0]!r}")
        key = (i, j) if directed else (min(i, j), max(i, j))
        weights[key] = w

    n = len(index)
    node_ids = tuple(index)
    rows, cols, data = [], [], []
    for (i, j), w in weights.items():
        rows.append(i)
        cols.append(j)
        data.append(w)
        if not directed:
            rows.append(j)
            cols.append(i)
            data.append(w)
    adjacency = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    return AttributedGraph(
        node_ids=node_ids,
        adjacency=adjacency,
        attributes=sp.csr_matrix((n, 0)),
        directed=directed,
    )


def load_attributes(graph: AttributedGraph, path) -> AttributedGraph:
    """Return a copy of ``graph`` with the attribute matrix attached.

    Dense rows are ``node v1 ... vm`` with m inferred from the first data
    line; sparse rows are ``node idx:val ...`` with 0-based indices and m
    declared by a ``# dims: m`` header. Nodes absent from the file keep
    all-zero rows (the missing-attribute encoding); duplicate node lines
    collapse to the last one seen.
    """
    directives = _comment_directives(path)
    sparse_mode = None
    m = None
    if "dims" in directives:
        try:
            m = int(directives["dims"])
        except ValueError:
            raise FileFormatError(path, 0, f"bad dims header {directives['dims']!r}") from None
        if m < 1:
            raise FileFormatError(path, 0, f"dims header must be positive, got {m}")

    rows: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for lineno, tokens in _data_lines(path):
        node_id = tokens[0]
        if node_id not in graph.id_index:
            raise FileFormatError(path, lineno, f"unknown node id {node_id!r}")
        values = tokens[1:]
        if not values:
            raise FileFormatError(path, lineno, "node line has no attribute values")
        if sparse_mode is None:
            sparse_mode = any(":" in tok for tok in values)
            if sparse_mode and m is None:
                raise FileFormatError(
                    path, lineno, "sparse attribute file needs a '# dims: m' header"
                )
            if not sparse_mode and m is None:
                m = len(values)
        if sparse_mode:
            idxs, vals = [], []
            for tok in values:
                if ":" not in tok:
                    raise FileFormatError(path, lineno, f"expected idx:val, got {tok!r}")
                stridx, _, strval = tok.partition(":")
                try:
                    idx = int(stridx)
                    val = float(strval)
                except ValueError:
                    raise FileFormatError(path, lineno, f"bad idx:val token {tok!r}") from None
                if not 0 <= idx < m:
                    raise FileFormatError(path, lineno, f"attribute index {idx} out of range [0, {m})")
                if not np.isfinite(val):
                    raise FileFormatError(path, lineno, f"non-finite value in {tok!r}")
                idxs.append(idx)
                vals.append(val)
            cols = np.array(idxs, dtype=np.int64)
            data = np.array(vals, dtype=np.float64)
        else:
            if len(values) != m:
                raise FileFormatError(
                    path, lineno, f"expected {m} attribute values, got {len(values)}"
                )
            try:
                dense = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError:
                raise FileFormatError(path, lineno, "non-numeric attribute value") from None
            if not np.all(np.isfinite(dense)):
                raise FileFormatError(path, lineno, "non-finite attribute value")
            cols = np.flatnonzero(dense)
            data = dense[cols]
        rows[graph.id_index[node_id]] = (cols, data)

    if m is None:
        m = 0
    indptr = np.zeros(graph.n + 1, dtype=np.int64)
    col_parts, data_parts = [], []
    for i in range(graph.n):
        if i in rows:
            cols, data = rows[i]
            order = np.argsort(cols)
            col_parts.append(cols[order])
            data_parts.append(data[order])
            indptr[i + 1] = indptr[i] + len(cols)
        else:
            indptr[i + 1] = indptr[i]
    col_idx = np.concatenate(col_parts) if col_parts else np.zeros(0, dtype=np.int64)
    data_arr = np.concatenate(data_parts) if data_parts else np.zeros(0)
    attributes = sp.csr_matrix((data_arr, col_idx, indptr), shape=(graph.n, m))
    return replace(graph, attributes=attributes)


def load_labels(graph: AttributedGraph, path) -> LabelSet:
    """Load a ``node label`` file; duplicate node lines keep the last label."""
    labels: dict[int, str] = {}
    for lineno, tokens in _data_lines(path):
        if len(tokens) != 2:
            raise FileFormatError(path, lineno, f"expected 2 tokens, got {len(tokens)}")
        node_id, label = tokens
        if node_id not in graph.id_index:
            raise FileFormatError(path, lineno, f"unknown node id {node_id!r}")
        labels[graph.id_index[node_id]] = label
    return LabelSet(labels)


def load_edge_samples(graph: AttributedGraph, path) -> list[EdgeSample]:
    """Load an edge-sample file (``src dst polarity``)."""
    samples = []
    for lineno, tokens in _data_lines(path):
        if len(tokens) != 3:
            raise FileFormatError(path, lineno, f"expected 3 tokens, got {len(tokens)}")
        for node_id in tokens[:2]:
            if node_id not in graph.id_index:
                raise FileFormatError(path, lineno, f"unknown node id {node_id!r}")
        try:
            polarity = int(tokens[2])
        except ValueError:
            raise FileFormatError(path, lineno, f"bad polarity {tokens[2]!r}") from None
        if polarity not in (1, -1):
            raise FileFormatError(path, lineno, f"polarity must be 1 or -1, got {polarity}")
        samples.append(
            EdgeSample(graph.id_index[tokens[0]], graph.id_index[tokens[1]], polarity)
        )
    return samples


# -- writers ----------------------------------------------------------------


def save_edge_list(graph: AttributedGraph, path):
    """Write the adjacency as an edge list (canonical index order).

    Weights are written only when some weight differs from 1.0, so
    unweighted graphs round-trip through the 2-token format.
    """
    pairs = graph.link_array()
    weighted = bool(graph.adjacency.nnz) and not np.all(graph.adjacency.data == 1.0)
    with open(path, "w", encoding="utf-8") as fh:
        for i, j in pairs:
            src, dst = graph.node_ids[i], graph.node_ids[j]
            if weighted:
                fh.write(f"{src} {dst} {graph.adjacency[i, j]!r}\n")
            else:
                fh.write(f"{src} {dst}\n")


def save_attributes(graph: AttributedGraph, path):
    """Write attributes in the sparse ``idx:val`` format with a dims header."""
    A = graph.attributes.tocsr()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# dims: {A.shape[1]}\n")
        for i in range(graph.n):
            start, end = A.indptr[i], A.indptr[i + 1]
            if start == end:
                continue
            toks = " ".join(
                f"{c}:{v!r}" for c, v in zip(A.indices[start:end], A.data[start:end])
            )
            fh.write(f"{graph.node_ids[i]} {toks}\n")


def save_labels(graph: AttributedGraph, labels: LabelSet, path):
    with open(path, "w", encoding="utf-8") as fh:
        for i in sorted(labels.labels):
            fh.write(f"{graph.node_ids[i]} {labels.labels[i]}\n")


def save_edge_samples(graph: AttributedGraph, samples: list[EdgeSample], path):
    """Write edge samples as ``src dst polarity`` lines."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            fh.write(f"{graph.node_ids[s.src]} {graph.node_ids[s.dst]} {s.polarity}\n")


# -- perturbation -----------------------------------------------------------


def remove_links(
    graph: AttributedGraph, fraction: float, seed: int
) -> tuple[AttributedGraph, list[EdgeSample]]:
    """Remove ``floor(fraction * num_links)`` links uniformly at random.

    Undirected links are removed atomically (both stored directions).
    Returns the reduced graph (same node universe) and the removed links as
    positive-polarity samples carrying their original weights, so re-adding
    them reconstructs the original adjacency exactly.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must be in [0, 1], got {fraction}")
    pairs = graph.link_array()
    num_remove = int(np.floor(fraction * len(pairs)))
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(pairs), size=num_remove, replace=False) if num_remove else []

    removed = []
    mask = np.ones(len(pairs), dtype=bool)
    for idx in chosen:
        i, j = int(pairs[idx, 0]), int(pairs[idx, 1])
        removed.append(EdgeSample(i, j, polarity=1, weight=float(graph.adjacency[i, j])))
        mask[idx] = False

    kept = pairs[mask]
    rows = kept[:, 0]
    cols = kept[:, 1]
    data = np.asarray(graph.adjacency[rows, cols]).ravel()
    if not graph.directed:
        rows, cols = np.concatenate([rows, cols]), np.concatenate([cols, rows])
        data = np.concatenate([data, data])
    reduced = sp.csr_matrix((data, (rows, cols)), shape=graph.adjacency.shape)
    return replace(graph, adjacency=reduced), removed


def add_links(graph: AttributedGraph, samples: list[EdgeSample]) -> AttributedGraph:
    """Re-add removed links (inverse of :func:`remove_links`)."""
    adj = graph.adjacency.tolil(copy=True)
    for s in samples:
        adj[s.src, s.dst] = s.weight
        if not graph.directed:
            adj[s.dst, s.src] = s.weight
    return replace(graph, adjacency=adj.tocsr())


def sample_negative_edges(graph: AttributedGraph, count: int, seed: int) -> list[EdgeSample]:
    """Sample ``count`` distinct non-links by seeded rejection sampling.

    Pairs are checked against the adjacency of the graph passed in, which
    for link-prediction ground truth must be the original, pre-removal
    graph. Raises when the graph has too few non-links.
    """
    if count < 0:
        raise ValueError(f"count must be nonnegative, got {count}")
    if count == 0:
        return []
    n = graph.n
    total_pairs = n * (n - 1) if graph.directed else n * (n - 1) // 2
    if count > total_pairs - graph.num_links:
        raise ValueError(
            f"cannot sample {count} non-links: graph has only "
            f"{total_pairs - graph.num_links} of them"
        )
    existing = set()
    coo = graph.adjacency.tocoo()
    for i, j in zip(coo.row, coo.col):
        existing.add((int(i), int(j)))

    rng = np.random.default_rng(seed)
    seen = set()
    samples = []
    budget = 200 * count + 10_000
    attempts = 0
    while len(samples) < count:
        if attempts >= budget:
            raise ValueError(
                f"gave up after {budget} attempts: graph too dense to find "
                f"{count} non-links by rejection sampling"
            )
        attempts += 1
        i, j = (int(x) for x in rng.integers(0, n, size=2))
        if i == j:
            continue
        if not graph.directed and i > j:
            i, j = j, i
        if (i, j) in existing or (i, j) in seen:
            continue
        seen.add((i, j))
        samples.append(EdgeSample(i, j, polarity=-1))
    return samples
