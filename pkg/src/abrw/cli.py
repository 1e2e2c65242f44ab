"""Command-line front end: ``perturb``, ``embed``, and ``eval`` subcommands.

Every command writes a run manifest next to its primary output; config
precedence is flags > ``--config`` file > defaults. Commands exit 0 only
when all outputs were fully written; partial outputs are removed on
failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import fields

import numpy as np

from . import __version__
from .evaluation import (
    auc_from_scores,
    node_classification,
    pca_2d,
    run_sensitivity_sweep,
    save_coordinates,
    score_edge,
    write_results_csv,
)
from .graph import (
    LabelSet,
    load_edge_list,
    remove_links,
    sample_negative_edges,
    save_edge_list,
    save_edge_samples,
)
from .graph import load_attributes as attach_attributes
from .manifest import RunManifest, parse_config_file
from .pipeline import METHODS, EmbedOptions, build_fused_transition
from .sgns import UnigramSampler, extract_pairs, load_embedding, save_embedding, train
from .transition import row_normalize
from .walker import generate_walks


def _fraction(text):
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"expected a fraction in [0, 1], got {text}")
    return value


def _open_fraction(text):
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"expected a fraction in (0, 1), got {text}")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _float_list(text):
    return [float(tok) for tok in text.split(",") if tok]


def _int_list(text):
    return [int(tok) for tok in text.split(",") if tok]


class _OutputTracker:
    """Remembers written paths so failures can clean up partial outputs."""

    def __init__(self):
        self.paths = []

    def register(self, path):
        if path is not None:
            self.paths.append(str(path))
        return path

    def cleanup(self):
        for path in self.paths:
            try:
                if os.path.exists(path):
                    os.remove(path)
            except OSError:
                pass


def _default_seed():
    return 0


def _env_threads():
    try:
        return max(1, int(os.environ.get("ABRW_THREADS", "1")))
    except ValueError:
        return 1


def _add_graph_flags(parser):
    parser.add_argument("--input", required=True, help="edge list file")
    parser.add_argument("--directed", action="store_true", help="treat edges as directed")
    parser.add_argument("--weighted", action="store_true", help="read a third weight column")


_EMBED_FLAGS = [
    ("dim", _positive_int, "embedding dimensionality"),
    ("walks", _positive_int, "walks per node"),
    ("length", _positive_int, "walk length (total nodes per walk)"),
    ("window", _positive_int, "skip-gram window size"),
    ("topk", _positive_int, "attribute neighbours kept per node"),
    ("alpha", _fraction, "structure/attribute balance in [0, 1]"),
    ("negatives", int, "negative samples per pair"),
    ("ns_exponent", float, "unigram distribution exponent"),
    ("epochs", int, "training passes over the pair corpus"),
    ("lr_initial", float, "initial learning rate"),
    ("lr_final", float, "final learning rate"),
]


def _add_embed_flags(parser):
    for name, ftype, doc in _EMBED_FLAGS:
        parser.add_argument(f"--{name.replace('_', '-')}", type=ftype, default=None, help=doc)
    parser.add_argument("--seed", type=int, default=None, help="random seed")
    parser.add_argument("--threads", type=_positive_int, default=None,
                        help="worker threads; >1 selects non-deterministic parallel training")
    parser.add_argument("--deterministic", action="store_true",
                        help="force single-threaded reproducible training (default)")
    parser.add_argument("--config", default=None,
                        help="key = value config file or a previous run manifest")


_BOOL_STRINGS = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def _coerce(name: str, value: str, target_type):
    if target_type is bool:
        lowered = value.lower()
        if lowered not in _BOOL_STRINGS:
            raise ValueError(f"config key {name}: expected a boolean, got {value!r}")
        return _BOOL_STRINGS[lowered]
    return target_type(value)


_FIELD_TYPES = {
    "method": str, "dim": int, "walks": int, "length": int, "window": int,
    "topk": int, "alpha": float, "negatives": int, "ns_exponent": float,
    "epochs": int, "lr_initial": float, "lr_final": float, "seed": int,
    "deterministic": bool, "threads": int,
}


def _resolve_options(args) -> EmbedOptions:
    """flags > config file > defaults (threads default from ABRW_THREADS)."""
    values = {f.name: f.default for f in fields(EmbedOptions)}
    values["threads"] = _env_threads()
    config_has_deterministic = False
    if getattr(args, "config", None):
        for key, raw in parse_config_file(args.config).items():
            if key not in _FIELD_TYPES:
                print(f"warning: ignoring unknown config key {key!r}", file=sys.stderr)
                continue
            values[key] = _coerce(key, raw, _FIELD_TYPES[key])
            config_has_deterministic |= key == "deterministic"
    for name in _FIELD_TYPES:
        if name == "deterministic":
            continue
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    # deterministic is the default mode; asking for >1 threads opts out
    # unless --deterministic (or a config entry) pins it.
    if getattr(args, "deterministic", False):
        values["deterministic"] = True
    elif not config_has_deterministic:
        values["deterministic"] = values["threads"] <= 1
    return EmbedOptions(**values)


# -- perturb -----------------------------------------------------------------


def cmd_perturb(args, outputs: _OutputTracker):
    graph = load_edge_list(args.input, directed=args.directed, weighted=args.weighted)
    reduced, removed = remove_links(graph, args.remove_links, args.seed)
    samples = list(removed)
    if not args.no_negatives and removed:
        neg_seed = int(np.random.SeedSequence([args.seed & 0xFFFFFFFF, 1]).generate_state(1)[0])
        samples += sample_negative_edges(graph, len(removed), neg_seed)

    save_edge_list(reduced, outputs.register(args.output))
    removed_path = args.removed or args.output + ".removed"
    save_edge_samples(graph, samples, outputs.register(removed_path))

    manifest = RunManifest(command="perturb", version=__version__)
    manifest.config = {
        "remove_links": str(args.remove_links),
        "seed": str(args.seed),
        "directed": str(args.directed).lower(),
        "weighted": str(args.weighted).lower(),
        "negatives": str(not args.no_negatives).lower(),
    }
    manifest.add_input("edges", args.input)
    manifest.outputs = {"reduced": str(args.output), "removed": str(removed_path)}
    manifest.write(outputs.register(args.output + ".manifest"))
    print(f"removed {len(removed)} of {graph.num_links + len(removed)} links -> {args.output}")


# -- embed -------------------------------------------------------------------


def cmd_embed(args, outputs: _OutputTracker):
    opts = _resolve_options(args)
    graph = load_edge_list(args.input, directed=args.directed, weighted=args.weighted)
    if opts.method in ("abrw", "attrpure"):
        if not args.attributes:
            raise ValueError(f"method {opts.method!r} requires --attributes")
        graph = attach_attributes(graph, args.attributes)
    elif args.attributes:
        print("warning: --attributes is ignored by deepwalk", file=sys.stderr)

    if opts.method == "attrpure":
        from .baselines import attrpure_embed

        embedding = attrpure_embed(graph.attributes, opts.dim, seed=opts.seed)
    else:
        if opts.method == "abrw":
            T = build_fused_transition(graph, opts.fusion_config())
        else:
            T = row_normalize(graph.adjacency)
        if args.dump_transition:
            T.save(outputs.register(args.dump_transition))
        corpus = generate_walks(T, opts.walk_config())
        if args.save_walks:
            corpus.save(outputs.register(args.save_walks), graph.node_ids)
        pairs = extract_pairs(corpus, opts.window)
        sampler = UnigramSampler.from_corpus(corpus, opts.ns_exponent)
        embedding = train(pairs, sampler, opts.train_config())

    save_embedding(outputs.register(args.output), embedding, graph.node_ids)

    manifest = RunManifest(command="embed", version=__version__)
    manifest.config = {f.name: str(getattr(opts, f.name)) for f in fields(EmbedOptions)}
    manifest.config["directed"] = str(args.directed).lower()
    manifest.config["weighted"] = str(args.weighted).lower()
    manifest.add_input("edges", args.input)
    if args.attributes and opts.method != "deepwalk":
        manifest.add_input("attributes", args.attributes)
    manifest.outputs["embedding"] = str(args.output)
    manifest.write(outputs.register(args.output + ".manifest"))
    print(f"{opts.method}: embedded {graph.n} nodes into {opts.dim} dims -> {args.output}")


# -- eval --------------------------------------------------------------------


def _load_label_file(path, id_index) -> LabelSet:
    labels = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if len(tokens) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 tokens, got {len(tokens)}")
            if tokens[0] not in id_index:
                raise ValueError(f"{path}:{lineno}: node {tokens[0]!r} has no embedding row")
            labels[id_index[tokens[0]]] = tokens[1]
    return LabelSet(labels)


def cmd_eval_lp(args, outputs: _OutputTracker):
    ids, Z = load_embedding(args.embedding)
    id_index = {v: i for i, v in enumerate(ids)}
    pos_scores, neg_scores = [], []
    missing = 0
    with open(args.samples, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if len(tokens) != 3 or tokens[2] not in ("1", "-1"):
                raise ValueError(f"{args.samples}:{lineno}: expected 'src dst polarity'")
            src, dst = id_index.get(tokens[0]), id_index.get(tokens[1])
            if src is None or dst is None:
                missing += 1
                score = 0.0  # unembedded endpoint carries no signal
            else:
                score = score_edge(Z, src, dst)
            (pos_scores if tokens[2] == "1" else neg_scores).append(score)
    if missing:
        print(f"warning: {missing} sample pairs had endpoints without embeddings "
              "(scored 0)", file=sys.stderr)
    auc = auc_from_scores(np.array(pos_scores), np.array(neg_scores))
    rows = [
        {"setting": "lp", "seed": "-", "metric": "auc", "value": auc},
        {"setting": "lp", "seed": "-", "metric": "num_positives", "value": len(pos_scores)},
        {"setting": "lp", "seed": "-", "metric": "num_negatives", "value": len(neg_scores)},
    ]
    write_results_csv(outputs.register(args.output), rows)
    _write_eval_manifest(args, outputs, "lp", {"embedding": args.embedding, "samples": args.samples})
    print(f"lp: auc = {auc:.6f} ({len(pos_scores)} positives, {len(neg_scores)} negatives)")


def cmd_eval_nc(args, outputs: _OutputTracker):
    ids, Z = load_embedding(args.embedding)
    id_index = {v: i for i, v in enumerate(ids)}
    labels = _load_label_file(args.labels, id_index)
    rows = []
    values = []
    for offset in range(args.seeds):
        seed = args.seed + offset
        result = node_classification(Z, labels, args.train_fraction, seed)
        rows.append({"setting": "nc", "seed": seed, "metric": "micro_f1",
                     "value": result.micro_f1})
        values.append(result.micro_f1)
    rows.append({"setting": "nc", "seed": "mean", "metric": "micro_f1",
                 "value": float(np.mean(values))})
    write_results_csv(outputs.register(args.output), rows)
    _write_eval_manifest(args, outputs, "nc", {"embedding": args.embedding, "labels": args.labels})
    print(f"nc: mean micro-F1 = {np.mean(values):.6f} over {args.seeds} seeds")


def cmd_eval_viz(args, outputs: _OutputTracker):
    ids, Z = load_embedding(args.embedding)
    labels = None
    if args.labels:
        labels = _load_label_file(args.labels, {v: i for i, v in enumerate(ids)})
    coords = pca_2d(Z)
    save_coordinates(outputs.register(args.output), ids, coords, labels)
    _write_eval_manifest(args, outputs, "viz", {"embedding": args.embedding})
    print(f"viz: wrote {len(ids)} 2-D coordinates -> {args.output}")


def cmd_eval_sweep(args, outputs: _OutputTracker):
    opts = _resolve_options(args).replace(method="abrw")
    graph = load_edge_list(args.input, directed=args.directed, weighted=args.weighted)
    graph = attach_attributes(graph, args.attributes)
    seeds = [args.seed + i for i in range(args.seeds)]
    rows = run_sensitivity_sweep(
        graph, args.alphas, args.topks, opts, seeds,
        ground_truth_fraction=args.ground_truth_fraction,
    )
    write_results_csv(outputs.register(args.output), rows)
    _write_eval_manifest(args, outputs, "sweep",
                         {"edges": args.input, "attributes": args.attributes})
    print(f"sweep: {len(args.alphas) * len(args.topks)} cells x {args.seeds} seeds -> {args.output}")


def _write_eval_manifest(args, outputs, task, inputs):
    manifest = RunManifest(command=f"eval {task}", version=__version__)
    for key in ("train_fraction", "seeds", "seed", "ground_truth_fraction",
                "alphas", "topks"):
        if hasattr(args, key) and getattr(args, key) is not None:
            manifest.config[key] = str(getattr(args, key))
    for name, path in inputs.items():
        manifest.add_input(name, path)
    manifest.outputs["results"] = str(args.output)
    manifest.write(outputs.register(args.output + ".manifest"))


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abrw",
        description="Attributed biased random-walk embeddings and their evaluation harness",
    )
    parser.add_argument("--version", action="version", version=f"abrw {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    perturb = commands.add_parser("perturb", help="remove links and emit ground-truth samples")
    _add_graph_flags(perturb)
    perturb.add_argument("--output", required=True, help="reduced edge list path")
    perturb.add_argument("--removed", default=None,
                         help="edge-sample output (default: OUTPUT.removed)")
    perturb.add_argument("--remove-links", type=_fraction, required=True,
                         help="fraction of links to remove")
    perturb.add_argument("--seed", type=int, default=_default_seed())
    perturb.add_argument("--no-negatives", action="store_true",
                         help="do not append sampled non-links to the removed file")
    perturb.set_defaults(func=cmd_perturb)

    embed = commands.add_parser("embed", help="train node embeddings")
    _add_graph_flags(embed)
    embed.add_argument("--attributes", default=None, help="attribute file")
    embed.add_argument("--method", choices=METHODS, default=None,
                       help="embedding method (default: abrw)")
    embed.add_argument("--output", required=True, help="embedding output path")
    embed.add_argument("--save-walks", default=None, help="also dump the walk corpus")
    embed.add_argument("--dump-transition", default=None,
                       help="also dump the walk transition matrix as 'row col prob'")
    _add_embed_flags(embed)
    embed.set_defaults(func=cmd_embed)

    evaluate = commands.add_parser("eval", help="evaluation tasks")
    tasks = evaluate.add_subparsers(dest="task", required=True)

    lp = tasks.add_parser("lp", help="link prediction AUC from an embedding and samples")
    lp.add_argument("--embedding", required=True)
    lp.add_argument("--samples", required=True, help="ground-truth edge-sample file")
    lp.add_argument("--output", required=True, help="CSV results path")
    lp.set_defaults(func=cmd_eval_lp)

    nc = tasks.add_parser("nc", help="node classification micro-F1")
    nc.add_argument("--embedding", required=True)
    nc.add_argument("--labels", required=True)
    nc.add_argument("--train-fraction", type=_open_fraction, default=0.5)
    nc.add_argument("--seeds", type=_positive_int, default=10)
    nc.add_argument("--seed", type=int, default=_default_seed())
    nc.add_argument("--output", required=True)
    nc.set_defaults(func=cmd_eval_nc)

    viz = tasks.add_parser("viz", help="2-D PCA coordinates for plotting")
    viz.add_argument("--embedding", required=True)
    viz.add_argument("--labels", default=None)
    viz.add_argument("--output", required=True)
    viz.set_defaults(func=cmd_eval_viz)

    sweep = tasks.add_parser("sweep", help="alpha/top-k link-prediction sensitivity grid")
    _add_graph_flags(sweep)
    sweep.add_argument("--attributes", required=True)
    sweep.add_argument("--alphas", type=_float_list, default=[0.2, 0.4, 0.6, 0.8])
    sweep.add_argument("--topks", type=_int_list, default=[30])
    sweep.add_argument("--seeds", type=_positive_int, default=5)
    sweep.add_argument("--ground-truth-fraction", type=_fraction, default=0.1)
    sweep.add_argument("--output", required=True)
    _add_embed_flags(sweep)
    sweep.set_defaults(func=cmd_eval_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exits:
        return int(exits.code or 0)
    outputs = _OutputTracker()
    try:
        args.func(args, outputs)
        return 0
    except Exception as error:  # CLI boundary: report, clean partial outputs
        print(f"error: {error}", file=sys.stderr)
        outputs.cleanup()
        return 1


if __name__ == "__main__":
    sys.exit(main())
