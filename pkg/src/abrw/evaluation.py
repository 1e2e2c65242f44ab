"""Evaluation protocols: link prediction AUC, node classification with
one-vs-rest logistic regression, 2-D PCA export, and the alpha/top-k
sensitivity sweep."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .graph import AttributedGraph, EdgeSample, LabelSet, remove_links, sample_negative_edges
from .pipeline import EmbedOptions, embed_graph


@dataclass
class LinkPredictionResult:
    auc: float
    num_positives: int
    num_negatives: int


@dataclass
class ClassificationResult:
    micro_f1: float
    train_fraction: float
    class_counts: dict[str, int] = field(default_factory=dict)
    untrained_classes: list[str] = field(default_factory=list)


def score_edge(Z: np.ndarray, i: int, j: int) -> float:
    """Cosine similarity of embedding rows i and j; 0 when either is zero."""
    zi = np.asarray(Z[i], dtype=np.float64)
    zj = np.asarray(Z[j], dtype=np.float64)
    denom = np.linalg.norm(zi) * np.linalg.norm(zj)
    if denom == 0.0:
        return 0.0
    return float(np.dot(zi, zj) / denom)


def auc_from_scores(pos_scores: np.ndarray, neg_scores: np.ndarray) -> float:
    """Rank-based (Mann-Whitney) AUC; tied scores contribute 0.5."""
    pos_scores = np.asarray(pos_scores, dtype=np.float64)
    neg_scores = np.asarray(neg_scores, dtype=np.float64)
    if len(pos_scores) == 0 or len(neg_scores) == 0:
        raise ValueError("need at least one positive and one negative sample")
    ranks = rankdata(np.concatenate([pos_scores, neg_scores]))  # average ranks
    p = len(pos_scores)
    return float((ranks[:p].sum() - p * (p + 1) / 2.0) / (p * len(neg_scores)))


def link_prediction_auc(Z: np.ndarray, samples: list[EdgeSample]) -> LinkPredictionResult:
    """AUC over cosine scores of positive vs negative edge samples."""
    pos = [s for s in samples if s.polarity == 1]
    neg = [s for s in samples if s.polarity == -1]
    auc = auc_from_scores(
        np.array([score_edge(Z, s.src, s.dst) for s in pos]),
        np.array([score_edge(Z, s.src, s.dst) for s in neg]),
    )
    return LinkPredictionResult(auc=auc, num_positives=len(pos), num_negatives=len(neg))


class LogisticRegression:
    """Binary L2-regularized logistic regression trained by full-batch
    gradient descent with backtracking line search.

    Deterministic convex optimizer: loss is non-increasing per iteration.
    The intercept is not penalized.
    """

    def __init__(self, l2: float = 1.0, max_iters: int = 500, tol: float = 1e-6):
        self.l2 = l2
        self.max_iters = max_iters
        self.tol = tol
        self.weights = None
        self.intercept = 0.0
        self.loss_history: list[float] = []

    def _loss_grad(self, X, y, w, b):
        margin = y * (X @ w + b)
        # log(1 + exp(-m)), stable for both signs of m
        loss = np.sum(np.logaddexp(0.0, -margin)) + 0.5 * self.l2 * np.dot(w, w)
        s = 1.0 / (1.0 + np.exp(np.clip(margin, -500, 500)))
        coef = -y * s
        grad_w = X.T @ coef + self.l2 * w
        grad_b = coef.sum()
        return loss, grad_w, grad_b

    def fit(self, X: np.ndarray, y01: np.ndarray) -> "LogisticRegression":
        X = np.asarray(X, dtype=np.float64)
        y = np.where(np.asarray(y01) > 0, 1.0, -1.0)
        w = np.zeros(X.shape[1])
        b = 0.0
        loss, grad_w, grad_b = self._loss_grad(X, y, w, b)
        self.loss_history = [loss]
        step = 1.0
        for _ in range(self.max_iters):
            gnorm2 = np.dot(grad_w, grad_w) + grad_b * grad_b
            if np.sqrt(gnorm2) <= self.tol:
                break
            step = min(step * 2.0, 1e4)  # allow growth after cautious iterations
            while True:
                w_new = w - step * grad_w
                b_new = b - step * grad_b
                loss_new, gw_new, gb_new = self._loss_grad(X, y, w_new, b_new)
                if loss_new <= loss - 1e-4 * step * gnorm2 or step < 1e-12:
                    break
                step *= 0.5
            w, b, loss, grad_w, grad_b = w_new, b_new, loss_new, gw_new, gb_new
            self.loss_history.append(loss)
        self.weights = w
        self.intercept = b
        return self

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.weights + self.intercept


def micro_f1(y_true, y_pred) -> float:
    """Micro-averaged F1; equals accuracy for single-label multiclass
    (micro precision and recall both reduce to the fraction correct)."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if len(y_true) == 0:
        raise ValueError("empty evaluation set")
    return float(np.mean(y_true == y_pred))


def node_classification(
    Z: np.ndarray,
    labels: LabelSet,
    train_fraction: float,
    seed: int,
    l2: float = 1.0,
) -> ClassificationResult:
    """One-vs-rest logistic regression on a seeded labeled-node split.

    A class absent from the training split cannot be learned: its
    classifier is skipped (score -inf), its test instances count as
    errors, and a warning is emitted.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    classes = labels.classes
    if len(classes) < 2:
        raise ValueError(f"need at least 2 classes, got {len(classes)}")

    indices = labels.indices()
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(indices))
    num_train = int(round(train_fraction * len(indices)))
    num_train = min(max(num_train, 1), len(indices) - 1)
    train_idx = indices[order[:num_train]]
    test_idx = indices[order[num_train:]]

    y_train = np.array([labels[i] for i in train_idx])
    y_test = np.array([labels[i] for i in test_idx])
    X_train = np.asarray(Z, dtype=np.float64)[train_idx]
    X_test = np.asarray(Z, dtype=np.float64)[test_idx]

    scores = np.full((len(test_idx), len(classes)), -np.inf)
    untrained = []
    for c, cls in enumerate(classes):
        mask = y_train == cls
        if not mask.any():
            untrained.append(cls)
            continue
        model = LogisticRegression(l2=l2).fit(X_train, mask.astype(float))
        scores[:, c] = model.decision_scores(X_test)
    if untrained:
        warnings.warn(
            f"classes absent from the training split: {untrained}; "
            "their test instances count as errors"
        )
    predictions = np.array([classes[c] for c in np.argmax(scores, axis=1)])
    counts = {cls: int(np.sum(y_test == cls)) for cls in classes}
    return ClassificationResult(
        micro_f1=micro_f1(y_test, predictions),
        train_fraction=train_fraction,
        class_counts=counts,
        untrained_classes=untrained,
    )


def pca_2d(Z: np.ndarray) -> np.ndarray:
    """Mean-centered projection onto the top two principal components.

    Component signs follow the largest-magnitude-entry-positive convention.
    """
    Z = np.asarray(Z, dtype=np.float64)
    if Z.shape[0] < 2:
        raise ValueError("need at least 2 points for a 2-D projection")
    centered = Z - Z.mean(axis=0)
    _, _, Vt = np.linalg.svd(centered, full_matrices=False)
    components = Vt[:2]
    for j in range(components.shape[0]):
        i = int(np.argmax(np.abs(components[j])))
        if components[j, i] < 0:
            components[j] = -components[j]
    return centered @ components.T


def save_coordinates(path, node_ids, coords: np.ndarray, labels: LabelSet | None = None):
    """Write ``id x y label`` lines for external plotting."""
    with open(path, "w", encoding="utf-8") as fh:
        for i, node_id in enumerate(node_ids):
            label = labels[i] if labels is not None and i in labels else "-"
            fh.write(f"{node_id} {coords[i, 0]!r} {coords[i, 1]!r} {label}\n")


# -- seeded experiment protocols ---------------------------------------------


def derive_seeds(seed: int, count: int) -> list[int]:
    """Independent per-stage substreams of one experiment seed."""
    return [int(s) for s in np.random.SeedSequence(seed & 0xFFFFFFFF).generate_state(count)]


def link_prediction_run(
    graph: AttributedGraph,
    opts: EmbedOptions,
    seed: int,
    ground_truth_fraction: float = 0.1,
    extra_removal: float = 0.0,
) -> LinkPredictionResult:
    """One seeded link-prediction experiment.

    First removes ``ground_truth_fraction`` of links as positives and
    samples an equal number of non-links (against the original graph) as
    negatives; then removes ``extra_removal`` of the REMAINING links, so
    the preserved percentage is measured against the post-ground-truth
    graph; finally embeds and scores.
    """
    s_gt, s_neg, s_extra, s_embed = derive_seeds(seed, 4)
    reduced, positives = remove_links(graph, ground_truth_fraction, s_gt)
    negatives = sample_negative_edges(graph, len(positives), s_neg)
    if extra_removal > 0.0:
        reduced, _ = remove_links(reduced, extra_removal, s_extra)
    embedding = embed_graph(reduced, opts.replace(seed=s_embed))
    return link_prediction_auc(embedding.vectors, positives + negatives)


def node_classification_run(
    graph: AttributedGraph,
    labels: LabelSet,
    opts: EmbedOptions,
    seed: int,
    removal_fraction: float = 0.0,
    train_fraction: float = 0.5,
) -> ClassificationResult:
    """One seeded node-classification experiment: remove links, embed,
    train the classifier on a split of the labeled nodes."""
    s_remove, s_embed, s_split = derive_seeds(seed, 3)
    reduced, _ = remove_links(graph, removal_fraction, s_remove)
    embedding = embed_graph(reduced, opts.replace(seed=s_embed))
    return node_classification(embedding.vectors, labels, train_fraction, s_split)


def run_sensitivity_sweep(
    graph: AttributedGraph,
    alphas: list[float],
    top_ks: list[int],
    opts: EmbedOptions,
    seeds: list[int],
    ground_truth_fraction: float = 0.1,
) -> list[dict]:
    """Link-prediction AUC for every (alpha, top_k) cell, one row per seed
    plus a mean row per cell."""
    rows = []
    for alpha in alphas:
        for top_k in top_ks:
            setting = f"alpha={alpha},topk={top_k}"
            cell_opts = opts.replace(method="abrw", alpha=alpha, topk=top_k)
            values = []
            for seed in seeds:
                result = link_prediction_run(
                    graph, cell_opts, seed, ground_truth_fraction=ground_truth_fraction
                )
                rows.append(
                    {"setting": setting, "seed": seed, "metric": "auc", "value": result.auc}
                )
                values.append(result.auc)
            rows.append(
                {"setting": setting, "seed": "mean", "metric": "auc",
                 "value": float(np.mean(values))}
            )
    return rows


def write_results_csv(path, rows: list[dict]):
    """CSV with the fixed ``setting, seed, metric, value`` header."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["setting", "seed", "metric", "value"])
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def summarize_metric(rows: list[dict], setting: str | None = None) -> float:
    """Mean of per-seed values (mean rows excluded)."""
    values = [
        float(r["value"])
        for r in rows
        if r["seed"] != "mean" and (setting is None or r["setting"] == setting)
    ]
    if not values:
        raise ValueError("no matching rows")
    return float(np.mean(values))
