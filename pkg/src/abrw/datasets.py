"""Synthetic attributed citation-style networks for tests and experiments.

Real benchmark datasets are not redistributed with the toolkit; the
generator below produces seeded stand-ins with matching shapes, homophilous
links (a tunable fraction stays within a class), and class-correlated
binary attributes, so both the structural and attribute channels carry
class signal the way citation networks do.
"""

from __future__ import annotations

import os

import numpy as np
import scipy.sparse as sp

from .graph import AttributedGraph, LabelSet, save_attributes, save_edge_list, save_labels

# (nodes, links, attributes, classes) of the citation benchmarks
CORA_SHAPE = (2708, 5429, 1433, 7)
CITESEER_SHAPE = (3327, 4732, 3703, 6)


def synthetic_citation(
    num_nodes: int,
    num_links: int,
    num_attrs: int,
    num_classes: int,
    seed: int = 0,
    intra_class: float = 0.85,
    attr_focus: float = 0.7,
    attrs_per_node: int = 18,
) -> tuple[AttributedGraph, LabelSet]:
    """Generate an undirected attributed network with planted classes.

    Every node ends up with at least one link (a random same-class-biased
    tree is laid first) and at least one attribute, mirroring citation
    benchmarks where no row is empty. ``intra_class`` is the probability a
    link stays within a class; ``attr_focus`` is the probability an
    attribute draw comes from the node's class vocabulary block.
    """
    if num_links < num_nodes - 1:
        raise ValueError("need at least num_nodes - 1 links to cover every node")
    max_links = num_nodes * (num_nodes - 1) // 2
    if num_links > max_links:
        raise ValueError(f"cannot place {num_links} links among {num_nodes} nodes")
    rng = np.random.default_rng(seed)

    # class assignment: every class occupied, sizes mildly uneven
    labels = np.empty(num_nodes, dtype=np.int64)
    labels[: 2 * num_classes] = np.arange(2 * num_classes) % num_classes
    class_weights = rng.dirichlet(np.full(num_classes, 4.0))
    labels[2 * num_classes :] = rng.choice(
        num_classes, size=num_nodes - 2 * num_classes, p=class_weights
    )
    members = [np.flatnonzero(labels == c) for c in range(num_classes)]

    # heavy-tailed node popularity drives degree heterogeneity
    popularity = 1.0 + rng.pareto(2.5, size=num_nodes)
    pop_all = popularity / popularity.sum()
    pop_class = [popularity[m] / popularity[m].sum() for m in members]

    edges: set[tuple[int, int]] = set()

    def add_edge(u, v):
        if u == v:
            return False
        key = (u, v) if u < v else (v, u)
        if key in edges:
            return False
        edges.add(key)
        return True

    # spanning-tree pass: every node attaches to an earlier node,
    # preferring its own class, so nobody is isolated
    order = rng.permutation(num_nodes)
    seen_by_class: dict[int, list[int]] = {c: [] for c in range(num_classes)}
    seen: list[int] = []
    for node in order:
        node = int(node)
        cls = int(labels[node])
        if seen:
            same = seen_by_class[cls]
            if same and rng.random() < intra_class:
                pool = same
            else:
                pool = seen
            weights = popularity[pool] / popularity[pool].sum()
            partner = int(rng.choice(pool, p=weights))
            add_edge(node, partner)
        seen.append(node)
        seen_by_class[cls].append(node)

    while len(edges) < num_links:
        u = int(rng.choice(num_nodes, p=pop_all))
        cls = int(labels[u])
        if rng.random() < intra_class and len(members[cls]) > 1:
            v = int(rng.choice(members[cls], p=pop_class[cls]))
        else:
            v = int(rng.choice(num_nodes, p=pop_all))
        add_edge(u, v)

    rows, cols = [], []
    for u, v in edges:
        rows += [u, v]
        cols += [v, u]
    adjacency = sp.csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(num_nodes, num_nodes)
    )

    # binary attributes: per-class vocabulary blocks plus shared noise words
    block = num_attrs // (num_classes + 1)
    attr_rows, attr_cols = [], []
    for node in range(num_nodes):
        cls = int(labels[node])
        count = max(1, int(rng.poisson(attrs_per_node)))
        words = set()
        for _ in range(count):
            if rng.random() < attr_focus:
                words.add(cls * block + int(rng.integers(block)))
            else:
                words.add(int(rng.integers(num_attrs)))
        attr_rows += [node] * len(words)
        attr_cols += sorted(words)
    attributes = sp.csr_matrix(
        (np.ones(len(attr_rows)), (attr_rows, attr_cols)),
        shape=(num_nodes, num_attrs),
    )

    node_ids = tuple(str(i) for i in range(num_nodes))
    graph = AttributedGraph(
        node_ids=node_ids, adjacency=adjacency, attributes=attributes, directed=False
    )
    label_set = LabelSet({i: f"c{labels[i]}" for i in range(num_nodes)})
    return graph, label_set


def cora_like(seed: int = 7, **kwargs) -> tuple[AttributedGraph, LabelSet]:
    """Stand-in with the Cora shape (2708 nodes, 5429 links, 1433 attrs, 7 classes)."""
    return synthetic_citation(*CORA_SHAPE, seed=seed, **kwargs)


def citeseer_like(seed: int = 7, **kwargs) -> tuple[AttributedGraph, LabelSet]:
    """Stand-in with the Citeseer shape (3327 nodes, 4732 links, 3703 attrs, 6 classes)."""
    return synthetic_citation(*CITESEER_SHAPE, seed=seed, **kwargs)


def write_dataset(directory, name: str, graph: AttributedGraph, labels: LabelSet) -> dict:
    """Write edge/attribute/label files; returns their paths."""
    os.makedirs(directory, exist_ok=True)
    paths = {
        "edges": os.path.join(directory, f"{name}.edges"),
        "attributes": os.path.join(directory, f"{name}.attrs"),
        "labels": os.path.join(directory, f"{name}.labels"),
    }
    save_edge_list(graph, paths["edges"])
    save_attributes(graph, paths["attributes"])
    save_labels(graph, labels, paths["labels"])
    return paths
