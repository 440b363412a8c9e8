"""Command-line front end.

Subcommands: ingest (validate a survey CSV), pipeline (cluster + train +
snapshot), experiment (rq1/rq2/rq3 harness runs), serve (HTTP service),
synth (planted synthetic data generator).

Exit codes: 0 success, 2 usage or validation failure, 3 runtime failure.
Option precedence: command-line flag > --config file entry > built-in
default.  Every artifact-producing command embeds its seed and the sha256
digests of its file inputs into the report it writes.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import sys
from pathlib import Path

from . import corpus
from .classifier import TrainConfig, save_model, train
from .clustering import (
    clustering_summary,
    kmedoids,
    profile_names,
    relabel_by_allow_rate,
    silhouette,
    write_clustering_csv,
    write_clustering_json,
)
from .errors import (
    DataValueError,
    DuplicateUserError,
    ParameterError,
    PrivProfError,
    SchemaError,
    UndefinedMetricError,
    UnknownSubsetError,
)
from .experiments import (
    run_recommendation_sweep,
    run_selflabel_consistency,
    run_subset_clustering,
    save_report,
)
from .similarity import distance_matrix, similarity_matrix, tfidf_weights

logger = logging.getLogger(__name__)

VALIDATION_ERRORS = (
    SchemaError,
    DataValueError,
    DuplicateUserError,
    ParameterError,
    UnknownSubsetError,
    UndefinedMetricError,
    FileNotFoundError,
)


def _sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_json(payload: dict, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _resolve(flag_value, config: dict, key: str, default):
    if flag_value is not None:
        return flag_value
    if key in config:
        return config[key]
    return default


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        loaded = json.load(fh)
    if not isinstance(loaded, dict):
        raise ParameterError("config file must hold a JSON object")
    return loaded


def _load_inputs(data: str, taxonomy: str | None):
    """Dataset plus input digests; taxonomy defaults to the packaged one."""
    if taxonomy is None:
        taxonomy_path = corpus.reference_taxonomy_path()
        digest_label = "packaged"
    else:
        taxonomy_path = Path(taxonomy)
        digest_label = _sha256(taxonomy_path)
    catalog = corpus.load_taxonomy(taxonomy_path)
    dataset = corpus.load_dataset(data, catalog)
    digests = {"data": _sha256(data), "taxonomy": digest_label}
    return dataset, digests


def _parse_synthetic(spec: str):
    """'users=300,width=60,planted=3,noise=0.05' -> generator arguments."""
    allowed = {"users": int, "width": int, "planted": int, "noise": float, "seed": int}
    values = {"users": 300, "width": 60, "planted": 3, "noise": 0.05}
    for part in spec.split(","):
        if not part:
            continue
        if "=" not in part:
            raise ParameterError(f"bad synthetic spec field {part!r}")
        key, _, raw = part.partition("=")
        key = key.strip()
        if key not in allowed:
            raise ParameterError(f"unknown synthetic spec field {key!r}")
        values[key] = allowed[key](raw)
    return values


def _experiment_dataset(args, config: dict, seed: int):
    """Dataset for an experiment run: file inputs or a planted synthetic."""
    synthetic = _resolve(args.synthetic, config, "synthetic", None)
    data = _resolve(args.data, config, "data", None)
    if synthetic is not None:
        values = _parse_synthetic(synthetic)
        dataset, labels = corpus.generate_synthetic(
            values["users"], values["width"], values["planted"],
            values["noise"], values.get("seed", seed),
        )
        dataset = corpus.set_self_labels(dataset, labels)
        digests = {"synthetic": synthetic}
        return dataset, digests
    if data is None:
        raise ParameterError("provide --data or --synthetic")
    return _load_inputs(data, _resolve(args.taxonomy, config, "taxonomy", None))


def _train_config(config: dict, seed: int, args) -> TrainConfig:
    section = config.get("train", {})
    return TrainConfig(
        learning_rate=section.get("learning_rate", 0.3),
        epochs=_resolve(getattr(args, "epochs", None), section, "epochs", 300),
        batch_size=section.get("batch_size", 32),
        seed=section.get("seed", seed),
        hidden_width=section.get("hidden_width", 32),
    )


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_ingest(args) -> int:
    config = _load_config(args.config)
    out_dir = Path(_resolve(args.out_dir, config, "out_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset, digests = _load_inputs(args.data, _resolve(args.taxonomy, config, "taxonomy", None))

    group_counts: dict[str, int] = {}
    for q in dataset.catalog.questions:
        group_counts[q.group] = group_counts.get(q.group, 0) + 1
    report = {
        "command": "ingest",
        "inputs": digests,
        "n_users": dataset.n_users,
        "n_questions": dataset.catalog.width,
        "group_counts": group_counts,
        "subsets": {name: len(ids) for name, ids in sorted(dataset.catalog.named_subsets.items())},
        "artifacts": ["dataset_normalized.csv"],
    }
    corpus.write_dataset_csv(dataset, out_dir / "dataset_normalized.csv", include_self_label=True)
    _write_json(report, out_dir / "ingest_report.json")
    print(f"ok: {dataset.n_users} users x {dataset.catalog.width} questions")
    return 0


def cmd_pipeline(args) -> int:
    config = _load_config(args.config)
    out_dir = Path(_resolve(args.out_dir, config, "out_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = _resolve(args.seed, config, "seed", 0)
    kappa = _resolve(args.kappa, config, "kappa", 3)
    subset = _resolve(args.subset, config, "subset", "G+AP2")
    restarts = _resolve(args.restarts, config, "restarts", 20)

    dataset, digests = _load_inputs(args.data, _resolve(args.taxonomy, config, "taxonomy", None))
    projected = corpus.select_subset(dataset, subset.split("+"))
    matrix = projected.matrix()

    dist = distance_matrix(similarity_matrix(tfidf_weights(projected), projected.user_ids))
    clustering = kmedoids(dist, kappa, seed=seed, restarts=restarts)
    mean_sil = None
    if kappa < 2:
        logger.warning("kappa=1 is a single degenerate cluster; silhouette undefined")
    else:
        _, mean_sil = silhouette(clustering, dist)
    clustering = relabel_by_allow_rate(clustering, matrix)
    names = profile_names(kappa)

    cfg = _train_config(config, seed, args)
    model = train(
        matrix,
        clustering.assignment,
        cfg,
        n_classes=kappa,
        feature_aliases=projected.catalog.aliases,
    )

    corpus.write_taxonomy(projected.catalog, out_dir / "taxonomy.csv")
    write_clustering_csv(clustering, projected.user_ids, out_dir / "clustering.csv")
    write_clustering_json(
        clustering_summary(clustering, mean_silhouette=mean_sil), out_dir / "clustering.json"
    )
    corpus.write_dataset_csv(projected, out_dir / "dataset_subset.csv")
    model_digest = save_model(model, out_dir / "model.json")

    report = {
        "command": "pipeline",
        "config": {
            "subset": subset,
            "kappa": kappa,
            "seed": seed,
            "restarts": restarts,
            "train": dataclasses.asdict(cfg),
        },
        "inputs": digests,
        "profile_names": names,
        "cluster_sizes": [int((clustering.assignment == c).sum()) for c in range(kappa)],
        "mean_silhouette": mean_sil,
        "model_digest": model_digest,
        "artifacts": [
            "taxonomy.csv",
            "clustering.csv",
            "clustering.json",
            "dataset_subset.csv",
            "model.json",
        ],
    }
    _write_json(report, out_dir / "pipeline_report.json")
    print(f"ok: kappa={kappa} subset={subset} model digest {model_digest[:12]}")
    return 0


def cmd_experiment(args) -> int:
    config = _load_config(args.config)
    out_dir = Path(_resolve(args.out_dir, config, "out_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = _resolve(args.seed, config, "seed", 0)
    dataset, digests = _experiment_dataset(args, config, seed)
    cfg = _train_config(config, seed, args)

    if args.suite_id == "rq1":
        report = run_selflabel_consistency(
            dataset,
            out_dir,
            n_folds=_resolve(args.n_folds, config, "n_folds", 10),
            seed=seed,
            neighbor_threshold=_resolve(args.threshold, config, "threshold", None),
            permute_labels=bool(args.permute_labels or config.get("permute_labels", False)),
            train_config=cfg,
        )
    elif args.suite_id == "rq2":
        suites = tuple(_resolve(args.suite, config, "suite", ["QS1", "QS2", "QS3"]))
        kappas = tuple(_resolve(args.kappa, config, "kappa", [2, 3, 4, 5, 6, 7]))
        n_seeds = _resolve(args.n_seeds, config, "n_seeds", 1)
        report = run_subset_clustering(
            dataset,
            out_dir,
            suites=suites,
            kappa_range=kappas,
            seeds=tuple(seed + i for i in range(n_seeds)),
            restarts=_resolve(args.restarts, config, "restarts", 20),
        )
    else:  # rq3
        kappa = _resolve(args.kappa, config, "kappa", [3])
        kappa = kappa[0] if isinstance(kappa, list) else kappa
        dist = distance_matrix(similarity_matrix(tfidf_weights(dataset), dataset.user_ids))
        clustering = kmedoids(dist, kappa, seed=seed, restarts=_resolve(args.restarts, config, "restarts", 20))
        clustering = relabel_by_allow_rate(clustering, dataset.matrix())
        n_seeds = _resolve(args.n_seeds, config, "n_seeds", 1)
        report = run_recommendation_sweep(
            dataset,
            clustering,
            out_dir,
            alpha_set=tuple(_resolve(args.alpha, config, "alpha", [0.1, 0.3, 0.5])),
            k_set=tuple(_resolve(args.k, config, "k", [3, 5, 10, 15])),
            n_max=_resolve(args.n_max, config, "n_max", 50),
            seeds=tuple(seed + i for i in range(n_seeds)),
            n_folds=_resolve(args.n_folds, config, "n_folds", 10),
            train_config=cfg,
        )

    report.config["inputs"] = digests
    path = save_report(report, out_dir)
    print(f"ok: {report.experiment_id} -> {path.name} + {len(report.artifacts)} curve files")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import build_state, create_app

    config = _load_config(args.config)
    model_path = _resolve(args.model, config, "model", None)
    if model_path is None or not Path(model_path).exists():
        raise ParameterError("serve requires --model pointing at a model snapshot")
    data = _resolve(args.data, config, "data", None)
    taxonomy = _resolve(args.taxonomy, config, "taxonomy", None)
    clustering_csv = _resolve(args.clustering, config, "clustering", None)
    subset = _resolve(args.subset, config, "subset", "G+AP2")
    port = _resolve(args.port, config, "port", 8080)

    state = build_state(
        model_path=model_path,
        data_path=data,
        taxonomy_path=taxonomy,
        clustering_path=clustering_csv,
        subset=subset,
    )
    app = create_app(state)
    if not state.recommender_ready:
        logger.warning("no dataset bundle: running in classify-only mode")
    uvicorn.run(app, host=args.host, port=int(port), log_level="warning")
    return 0


def cmd_synth(args) -> int:
    config = _load_config(args.config)
    out_dir = Path(_resolve(args.out_dir, config, "out_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = _resolve(args.seed, config, "seed", 0)
    dataset, labels = corpus.generate_synthetic(
        n_users=_resolve(args.users, config, "users", 300),
        catalog_width=_resolve(args.width, config, "width", 60),
        n_planted=_resolve(args.planted, config, "planted", 3),
        noise=_resolve(args.noise, config, "noise", 0.05),
        seed=seed,
    )
    dataset = corpus.set_self_labels(dataset, labels)
    corpus.write_dataset_csv(dataset, out_dir / "dataset.csv", include_self_label=True)
    corpus.write_taxonomy(dataset.catalog, out_dir / "taxonomy.csv")
    corpus.write_labels_csv(dataset.user_ids, labels, out_dir / "labels.csv")
    _write_json(
        {
            "command": "synth",
            "seed": seed,
            "n_users": dataset.n_users,
            "width": dataset.catalog.width,
            "artifacts": ["dataset.csv", "taxonomy.csv", "labels.csv"],
        },
        out_dir / "synth_report.json",
    )
    print(f"ok: {dataset.n_users} synthetic users -> {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="privprof",
        description="Privacy-profile engine: cluster, classify, recommend, evaluate, serve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file mirroring the flags")
        p.add_argument("--out-dir", help="artifact directory (default .)")
        p.add_argument("--seed", type=int, help="master random seed (default 0)")

    p = sub.add_parser("ingest", help="validate and normalize a survey CSV")
    p.add_argument("--data", required=True, help="survey answers CSV")
    p.add_argument("--taxonomy", help="question taxonomy CSV (default: packaged)")
    common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("pipeline", help="cluster users, train the classifier, write snapshots")
    p.add_argument("--data", required=True)
    p.add_argument("--taxonomy")
    p.add_argument("--subset", help="'+'-joined subset names (default G+AP2)")
    p.add_argument("--kappa", type=int, help="number of clusters (default 3)")
    p.add_argument("--restarts", type=int, help="k-medoids restarts (default 20)")
    p.add_argument("--epochs", type=int, help="training epochs (default 300)")
    common(p)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("experiment", help="run an evaluation suite")
    p.add_argument("suite_id", choices=["rq1", "rq2", "rq3"])
    p.add_argument("--data")
    p.add_argument("--taxonomy")
    p.add_argument("--synthetic", help="e.g. users=300,width=60,planted=3,noise=0.05")
    p.add_argument("--n-folds", type=int)
    p.add_argument("--permute-labels", action="store_true", help="rq1 negative control")
    p.add_argument("--threshold", type=float, help="rq1 neighbor similarity floor")
    p.add_argument("--suite", nargs="+", help="rq2 suite names (default QS1 QS2 QS3)")
    p.add_argument("--kappa", type=int, nargs="+", help="rq2 sweep / rq3 cluster count")
    p.add_argument("--restarts", type=int)
    p.add_argument("--alpha", type=float, nargs="+", help="rq3 revealed fractions")
    p.add_argument("--k", type=int, nargs="+", help="rq3 neighbor counts")
    p.add_argument("--n-max", type=int, help="rq3 deepest cutoff (default 50)")
    p.add_argument("--n-seeds", type=int, help="consecutive seeds to run (default 1)")
    p.add_argument("--epochs", type=int)
    common(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--model", help="model snapshot JSON from pipeline")
    p.add_argument("--data", help="dataset CSV enabling recommendations")
    p.add_argument("--taxonomy")
    p.add_argument("--clustering", help="clustering.csv from pipeline")
    p.add_argument("--subset", help="active question subset (default G+AP2)")
    p.add_argument("--port", type=int, help="default 8080")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--config", help="JSON file mirroring the flags")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("synth", help="write a planted synthetic dataset")
    p.add_argument("--users", type=int)
    p.add_argument("--width", type=int)
    p.add_argument("--planted", type=int)
    p.add_argument("--noise", type=float)
    common(p)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PrivProfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # pragma: no cover - last-resort guard
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
