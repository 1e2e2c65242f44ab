"""End-to-end embedding pipelines and the shared option bundle."""

from __future__ import annotations

from dataclasses import dataclass, fields

from .baselines import attrpure_embed, deepwalk_embed
from .graph import AttributedGraph
from .sgns import EmbeddingMatrix, TrainConfig, UnigramSampler, extract_pairs, train
from .transition import (
    FusionConfig,
    build_attribute_transition,
    build_biased_transition,
    row_normalize,
)
from .walker import WalkConfig, generate_walks

METHODS = ("abrw", "deepwalk", "attrpure")


@dataclass
class EmbedOptions:
    """Resolved hyperparameters for one embedding run (CLI defaults)."""

    method: str = "abrw"
    dim: int = 128
    walks: int = 10
    length: int = 80
    window: int = 10
    topk: int = 30
    alpha: float = 0.8
    negatives: int = 5
    ns_exponent: float = 0.75
    epochs: int = 5
    lr_initial: float = 0.025
    lr_final: float = 0.0001
    seed: int = 0
    deterministic: bool = True
    threads: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        self.fusion_config()  # range checks
        self.walk_config()
        self.train_config()

    def fusion_config(self) -> FusionConfig:
        return FusionConfig(alpha=self.alpha, top_k=self.topk)

    def walk_config(self) -> WalkConfig:
        return WalkConfig(walks_per_node=self.walks, walk_length=self.length, seed=self.seed)

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            dim=self.dim,
            window=self.window,
            negatives=self.negatives,
            ns_exponent=self.ns_exponent,
            epochs=self.epochs,
            lr_initial=self.lr_initial,
            lr_final=self.lr_final,
            seed=self.seed,
            deterministic=self.deterministic,
            threads=self.threads,
        )

    def replace(self, **updates) -> "EmbedOptions":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(updates)
        return EmbedOptions(**values)


def build_fused_transition(graph: AttributedGraph, fusion: FusionConfig):
    """Structural and attribute transitions fused into the walk matrix."""
    if graph.attributes.shape[1] == 0:
        raise ValueError("graph has no attributes; attach an attribute file first")
    Tw = row_normalize(graph.adjacency)
    Ta = build_attribute_transition(graph.attributes, fusion.top_k)
    return build_biased_transition(Tw, Ta, fusion.alpha)


def abrw_embed(
    graph: AttributedGraph,
    fusion: FusionConfig,
    walk_cfg: WalkConfig,
    train_cfg: TrainConfig,
) -> EmbeddingMatrix:
    """Fused-transition weighted walks plus skip-gram training."""
    T = build_fused_transition(graph, fusion)
    corpus = generate_walks(T, walk_cfg)
    pairs = extract_pairs(corpus, train_cfg.window)
    sampler = UnigramSampler.from_corpus(corpus, train_cfg.ns_exponent)
    return train(pairs, sampler, train_cfg)


def embed_graph(graph: AttributedGraph, opts: EmbedOptions) -> EmbeddingMatrix:
    """Dispatch one embedding run according to ``opts.method``."""
    if opts.method == "abrw":
        return abrw_embed(graph, opts.fusion_config(), opts.walk_config(), opts.train_config())
    if opts.method == "deepwalk":
        return deepwalk_embed(graph.adjacency, opts.walk_config(), opts.train_config())
    if opts.method == "attrpure":
        if graph.attributes.shape[1] == 0:
            raise ValueError("graph has no attributes; attach an attribute file first")
        return attrpure_embed(graph.attributes, opts.dim, seed=opts.seed)
    raise ValueError(f"unknown method {opts.method!r}")
