"""Command-line driver chaining the pipeline stages through an output directory.

Each subcommand reads the previous stage's exported files, so every step of
the pipeline is independently inspectable and rerunnable.  Progress lines go
to standard error; machine-readable output goes only to files.  Exit codes:
0 success, 1 validation error, 2 I/O error, 3 configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .dataset import (
    ContentCatalog,
    RatingMatrix,
    events_to_ratings,
    export_content,
    export_ratings,
    ingest_content,
    ingest_events,
    ingest_ratings,
)
from .errors import BgmError, ConfigError
from .evaluation import ALL_METHODS, BenchmarkSettings, run_benchmark
from .figures import render_precision_figure
from .graphs import build_forest_from_matrix, expand_items, export_forest, load_forest
from .matching import export_bridges, load_bridge_rows, match_forests
from .recommend import export_recommendations, recommend_top_n
from .synth import SynthConfig, generate_synthetic
from .training import (
    NaiveBayesModel,
    TrainConfig,
    TrainingSample,
    export_training_set,
    load_training_set,
    train,
)
from .trees import build_trees, export_trees, load_trees

FORMAT_VERSION = 1

COMMANDS = (
    "ingest",
    "build-graphs",
    "build-trees",
    "match",
    "build-training",
    "train",
    "recommend",
    "evaluate",
    "synth",
)


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as handle:
            config = json.load(handle)
    except json.JSONDecodeError as error:
        raise ConfigError(f"config file {path}: invalid JSON: {error}") from None
    if not isinstance(config, dict):
        raise ConfigError(f"config file {path}: top level must be a JSON object")
    return config


def _require(config: dict, field: str):
    if field not in config:
        raise ConfigError(f"config is missing required field {field!r}")
    return config[field]


def _require_domain(config: dict, domain: str) -> dict:
    section = _require(config, domain)
    if not isinstance(section, dict):
        raise ConfigError(f"config field {domain!r} must be an object")
    return section


class Stage:
    """Resolves stage file paths inside the output directory and reloads
    earlier stages' exports on demand."""

    def __init__(self, config: dict, output_dir: str) -> None:
        self.config = config
        self.output_dir = output_dir
        os.makedirs(output_dir, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.output_dir, name)

    def _domain_k(self, domain: str) -> int:
        manifest_path = self.path("dataset.json")
        if os.path.exists(manifest_path):
            with open(manifest_path, encoding="utf-8") as handle:
                manifest = json.load(handle)
            key = f"{domain}_k"
            if key in manifest:
                return int(manifest[key])
        section = _require_domain(self.config, domain)
        return int(_require(section, "k"))

    def write_manifest(self, source_k: int, target_k: int) -> None:
        payload = {
            "format_version": FORMAT_VERSION,
            "source_k": source_k,
            "target_k": target_k,
        }
        with open(self.path("dataset.json"), "w", encoding="utf-8") as handle:
            json.dump(payload, handle, sort_keys=True, indent=2)
            handle.write("\n")

    def ratings(self, domain: str) -> RatingMatrix:
        return ingest_ratings(
            self.path(f"{domain}_ratings.csv"), self._domain_k(domain), domain
        )

    def content(self, domain: str) -> ContentCatalog:
        return ingest_content(self.path(f"{domain}_content.csv"), domain)

    def forest(self, domain: str, threshold: float):
        node_users = {
            node.key: node.users for node in expand_items(self.ratings(domain))
        }
        return load_forest(
            self.path(f"{domain}_nodes.csv"),
            self.path(f"{domain}_edges.csv"),
            node_users,
            domain_id=domain,
            threshold=threshold,
        )

    def trees(self, domain: str, threshold: float):
        return load_trees(
            self.path(f"{domain}_trees.csv"), self.forest(domain, threshold)
        )


# -- subcommands ---------------------------------------------------------------


def _ingest_domain(config: dict, domain: str) -> tuple[RatingMatrix, ContentCatalog]:
    section = _require_domain(config, domain)
    k = int(_require(section, "k"))
    has_ratings = "ratings" in section
    has_events = "events" in section
    if has_ratings == has_events:
        raise ConfigError(
            f"config field {domain!r} must name exactly one of 'ratings' or 'events'"
        )
    if has_ratings:
        matrix = ingest_ratings(section["ratings"], k, domain)
    else:
        weights = _require(section, "event_weights")
        if not isinstance(weights, dict):
            raise ConfigError(f"config field '{domain}.event_weights' must be an object")
        log = ingest_events(section["events"])
        matrix = events_to_ratings(log, weights, k, domain)
    catalog = ingest_content(_require(section, "content"), domain)
    catalog.require_items(matrix.items())
    return matrix, catalog


def cmd_ingest(stage: Stage) -> None:
    source, source_content = _ingest_domain(stage.config, "source")
    target, target_content = _ingest_domain(stage.config, "target")
    export_ratings(source, stage.path("source_ratings.csv"))
    export_ratings(target, stage.path("target_ratings.csv"))
    export_content(source_content, stage.path("source_content.csv"))
    export_content(target_content, stage.path("target_content.csv"))
    stage.write_manifest(source.k, target.k)
    _log(
        f"ingested {len(source)} source and {len(target)} target ratings, "
        f"{len(source_content.features)} + {len(target_content.features)} content vectors"
    )


def cmd_synth(stage: Stage, seed: int) -> None:
    section = _require(stage.config, "synth")
    if not isinstance(section, dict):
        raise ConfigError("config field 'synth' must be an object")
    try:
        synth_config = SynthConfig(seed=seed, **section)
    except TypeError as error:
        raise ConfigError(f"config field 'synth': {error}") from None
    dataset = generate_synthetic(synth_config)
    export_ratings(dataset.source_ratings, stage.path("source_ratings.csv"))
    export_ratings(dataset.target_ratings, stage.path("target_ratings.csv"))
    export_content(dataset.source_content, stage.path("source_content.csv"))
    export_content(dataset.target_content, stage.path("target_content.csv"))
    stage.write_manifest(dataset.source_ratings.k, dataset.target_ratings.k)
    _log(
        f"generated {len(dataset.source_ratings)} source and "
        f"{len(dataset.target_ratings)} target ratings for "
        f"{len(dataset.source_ratings.users())} users"
    )


def cmd_build_graphs(stage: Stage, threshold: float) -> None:
    drop = bool(stage.config.get("drop_singletons", False))
    for domain in ("source", "target"):
        forest = build_forest_from_matrix(stage.ratings(domain), threshold, drop)
        export_forest(
            forest,
            stage.path(f"{domain}_nodes.csv"),
            stage.path(f"{domain}_edges.csv"),
        )
        _log(
            f"{domain}: {sum(len(g.nodes) for g in forest.graphs)} nodes in "
            f"{len(forest.graphs)} behavior graphs"
        )


def cmd_build_trees(stage: Stage, threshold: float) -> None:
    for domain in ("source", "target"):
        trees = build_trees(stage.forest(domain, threshold))
        export_trees(trees, stage.path(f"{domain}_trees.csv"))
        _log(f"{domain}: built {len(trees)} behavior trees")


def cmd_match(stage: Stage, threshold: float) -> None:
    source_trees = stage.trees("source", threshold)
    target_trees = stage.trees("target", threshold)
    bridges = match_forests(
        source_trees,
        target_trees,
        unique_tree_pairing=bool(stage.config.get("unique_tree_pairing", False)),
    )
    export_bridges(bridges, stage.path("bridges.csv"))
    _log(f"matched {len(bridges)} bridges")


def cmd_build_training(stage: Stage) -> None:
    source_content = stage.content("source")
    target_content = stage.content("target")
    samples = [
        TrainingSample(
            source_features=source_content.vector(src_item),
            source_rating=src_rating,
            target_features=target_content.vector(tgt_item),
            label=tgt_rating,
        )
        for src_item, src_rating, tgt_item, tgt_rating in load_bridge_rows(
            stage.path("bridges.csv")
        )
    ]
    export_training_set(samples, stage.path("training_samples.csv"))
    _log(f"materialized {len(samples)} training samples")


def cmd_train(stage: Stage) -> None:
    samples = load_training_set(stage.path("training_samples.csv"))
    config = TrainConfig(
        k_source=stage._domain_k("source"),
        k_target=stage._domain_k("target"),
        classifier=stage.config.get("classifier", "naive_bayes"),
        bins=int(stage.config.get("bins", 5)),
        min_samples=int(stage.config.get("min_train_samples", 10)),
    )
    model = train(samples, config)
    model.save(stage.path("model.json"))
    _log(f"trained on {model.sample_count} samples, saved model.json")


def cmd_recommend(stage: Stage) -> None:
    model = NaiveBayesModel.load(stage.path("model.json"))
    source = stage.ratings("source")
    source_content = stage.content("source")
    target_content = stage.content("target")
    users = stage.config.get("recommend_users")
    if users is None:
        users = sorted(source.users())
    top_n = int(stage.config.get("top_n", 10))
    candidates = target_content.item_ids()
    per_user = {}
    for user_id in users:
        user_ratings = sorted(source.ratings_of_user(user_id).items())
        per_user[user_id] = recommend_top_n(
            model, user_ratings, candidates, source_content, target_content, top_n
        )
    export_recommendations(per_user, stage.path("recommendations.csv"))
    _log(f"wrote top-{top_n} recommendations for {len(per_user)} users")


def cmd_evaluate(stage: Stage, threshold: float, seed: int) -> None:
    config = stage.config
    methods = tuple(config.get("methods", list(ALL_METHODS)))
    settings = BenchmarkSettings(
        threshold=threshold,
        seed=seed,
        folds=int(config.get("folds", 10)),
        methods=methods,
        n_values=tuple(config.get("n_values", [5, 10, 15, 20, 50, 100])),
        t_test_n_values=tuple(config.get("t_test_n_values", [5, 10, 15, 20])),
        drop_singletons=bool(config.get("drop_singletons", False)),
        unique_tree_pairing=bool(config.get("unique_tree_pairing", False)),
        classifier=config.get("classifier", "naive_bayes"),
        bins=int(config.get("bins", 5)),
        min_train_samples=int(config.get("min_train_samples", 10)),
        knn_neighbors=int(config.get("knn_neighbors", 20)),
        tau_sim=float(config.get("tau_sim", 0.5)),
        coverage=float(config.get("coverage", 0.8)),
        positive_threshold=config.get("positive_threshold"),
        progress=_log,
    )
    report = run_benchmark(
        stage.ratings("source"),
        stage.ratings("target"),
        stage.content("source"),
        stage.content("target"),
        settings,
    )
    with open(stage.path("report.json"), "w", encoding="utf-8") as handle:
        json.dump(report.to_json_dict(), handle, sort_keys=True, indent=2)
        handle.write("\n")
    with open(stage.path("summary.csv"), "w", newline="", encoding="utf-8") as handle:
        handle.write("method,N,mean_precision\n")
        for method, n, value in report.summary_rows():
            handle.write(f"{method},{n},{value:.6f}\n")
    render_precision_figure(report, stage.path("precision.png"))
    _log("wrote report.json, summary.csv, precision.png")


# -- entry point ---------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bgm",
        description="Cross-domain recommendation pipeline over behavior graphs.",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"bgm {__version__} (file format v{FORMAT_VERSION})",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        sub = subparsers.add_parser(command)
        sub.add_argument("--config", required=True, help="path to the JSON config")
        sub.add_argument("--output", help="override the config output directory")
    return parser


def _dispatch(args: argparse.Namespace) -> None:
    config = _load_config(args.config)
    threshold = _require(config, "threshold")
    if not isinstance(threshold, (int, float)) or isinstance(threshold, bool):
        raise ConfigError(f"config field 'threshold' must be a number, got {threshold!r}")
    seed = _require(config, "seed")
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError(f"config field 'seed' must be an integer, got {seed!r}")
    output_dir = args.output if args.output else _require(config, "output_dir")
    if not isinstance(output_dir, str) or not output_dir:
        raise ConfigError("config field 'output_dir' must be a non-empty string")
    stage = Stage(config, output_dir)

    command = args.command
    if command == "ingest":
        cmd_ingest(stage)
    elif command == "synth":
        cmd_synth(stage, seed)
    elif command == "build-graphs":
        cmd_build_graphs(stage, float(threshold))
    elif command == "build-trees":
        cmd_build_trees(stage, float(threshold))
    elif command == "match":
        cmd_match(stage, float(threshold))
    elif command == "build-training":
        cmd_build_training(stage)
    elif command == "train":
        cmd_train(stage)
    elif command == "recommend":
        cmd_recommend(stage)
    elif command == "evaluate":
        cmd_evaluate(stage, float(threshold), seed)
    else:  # pragma: no cover - argparse restricts the choices
        raise ConfigError(f"unknown command {command!r}")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _dispatch(args)
    except ConfigError as error:
        _log(f"configuration error: {error}")
        return 3
    except OSError as error:
        _log(f"i/o error: {error}")
        return 2
    except BgmError as error:
        _log(f"validation error: {error}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
