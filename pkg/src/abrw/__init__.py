"""Node embeddings for incomplete attributed networks.

The pipeline fuses a structural and an attribute-similarity transition
matrix into one biased walk matrix, generates weighted random walks over
it, and trains skip-gram negative-sampling embeddings; structure-only
(DeepWalk) and attribute-only (AttrPure) baselines plus a link-prediction /
node-classification / visualization harness round out the toolkit.
"""

__version__ = "0.1.0"

from .baselines import attrpure_embed, deepwalk_embed
from .evaluation import (
    ClassificationResult,
    LinkPredictionResult,
    auc_from_scores,
    link_prediction_auc,
    link_prediction_run,
    node_classification,
    node_classification_run,
    pca_2d,
    run_sensitivity_sweep,
    score_edge,
)
from .graph import (
    AttributedGraph,
    EdgeSample,
    FileFormatError,
    LabelSet,
    load_attributes,
    load_edge_list,
    load_edge_samples,
    load_labels,
    remove_links,
    sample_negative_edges,
    save_attributes,
    save_edge_list,
    save_edge_samples,
    save_labels,
)
from .pipeline import EmbedOptions, abrw_embed, build_fused_transition, embed_graph
from .sgns import (
    EmbeddingMatrix,
    PairCorpus,
    TrainConfig,
    UnigramSampler,
    extract_pairs,
    load_embedding,
    pair_gradient,
    pair_objective,
    save_embedding,
    train,
)
from .transition import (
    FusionConfig,
    TransitionMatrix,
    attribute_similarity_row,
    build_attribute_transition,
    build_biased_transition,
    row_normalize,
    sparsify_topk,
)
from .walker import AliasTable, WalkConfig, WalkCorpus, build_alias, generate_walks
