"""Acceptance gate: one orthogonal check per release criterion.

Each test prints a `[ACCEPT] <criterion>: PASS|FAIL` line directly to the
terminal (bypassing capture) and enforces its runtime budget.
"""

import json
import time

import numpy as np
import pytest

from privacy_profiles.classifier import TrainConfig, gradient_check, init_model
from privacy_profiles.cli import main
from privacy_profiles.clustering import (
    Clustering,
    brute_force_kmedoids,
    kmedoids,
    label_agreement,
    relabel_by_allow_rate,
    silhouette,
)
from privacy_profiles.corpus import generate_synthetic, set_self_labels
from privacy_profiles.experiments import (
    run_recommendation_sweep,
    run_selflabel_consistency,
    run_subset_clustering,
    save_report,
)
from privacy_profiles.metrics import (
    confusion_from_decisions,
    precision_recall,
    roc_curve,
)
from privacy_profiles.similarity import distance_matrix, similarity_matrix, tfidf_weights


@pytest.fixture
def gate(capfd):
    def _check(name: str, ok: bool, budget_s: float, elapsed_s: float):
        within = elapsed_s < budget_s
        verdict = "PASS" if (ok and within) else "FAIL"
        with capfd.disabled():
            print(f"[ACCEPT] {name}: {verdict} ({elapsed_s:.1f}s / budget {budget_s:.0f}s)")
        assert ok, name
        assert within, f"{name}: {elapsed_s:.1f}s exceeded {budget_s:.0f}s budget"

    return _check


def random_distances(rng, n, tie_heavy=False):
    if tie_heavy:
        raw = rng.integers(0, 4, size=(n, n)).astype(np.float64)
        d = (raw + raw.T) / 2
    else:
        pts = rng.random((n, 3))
        d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    np.fill_diagonal(d, 0.0)
    return (d + d.T) / 2


def test_kmedoids_matches_brute_force(gate):
    start = time.monotonic()
    rng = np.random.default_rng(20260814)
    ok = True
    for trial in range(200):
        n = int(rng.integers(4, 9))
        kappa = int(rng.integers(2, 4))
        d = random_distances(rng, n, tie_heavy=trial % 2 == 0)
        found = kmedoids(d, kappa, seed=trial, restarts=20).total_cost
        best = brute_force_kmedoids(d, kappa).total_cost
        if found != best:
            ok = False
            break
    gate("k-medoids equals brute-force cost on 200 random instances", ok, 10, time.monotonic() - start)


def naive_weights(matrix, n_users):
    out = np.zeros_like(matrix, dtype=np.float64)
    for j in range(matrix.shape[1]):
        active = sum(1 for v in matrix[:, j] if v > 0)
        idf = np.log(n_users / active) if active else 0.0
        for i in range(matrix.shape[0]):
            out[i, j] = matrix[i, j] * idf
    return out


def test_tfidf_cosine_matches_naive_reference(gate):
    from conftest import make_dataset

    start = time.monotonic()
    rng = np.random.default_rng(99)
    worst = 0.0
    for trial in range(100):
        answers = (rng.random((200, 200)) < rng.uniform(0.2, 0.8)).astype(float)
        answers[rng.integers(0, 200)] = 0.0
        ds = make_dataset(answers)
        weights = tfidf_weights(ds)
        expected_w = naive_weights(answers, 200)
        worst = max(worst, float(np.abs(weights - expected_w).max()))

        sims = similarity_matrix(weights, list(ds.user_ids)).values
        norms = np.sqrt((expected_w**2).sum(axis=1))
        for i in range(0, 200, 17):  # spot rows, full pair loop per row
            for j in range(200):
                denom = norms[i] * norms[j]
                ref = float(np.dot(expected_w[i], expected_w[j]) / denom) if denom > 0 else 0.0
                if i == j and norms[i] > 0:
                    ref = 1.0
                worst = max(worst, abs(float(sims[i, j]) - ref))
    gate(
        "tf-idf and cosine match a naive reference within 1e-12 on 100 datasets",
        worst < 1e-12,
        30,
        time.monotonic() - start,
    )


def test_classifier_gradients_match_finite_differences(gate):
    start = time.monotonic()
    rng = np.random.default_rng(7)
    worst = 0.0
    for trial in range(100):
        width = int(rng.integers(3, 7))
        kappa = int(rng.integers(2, 5))
        hidden = int(rng.integers(4, 9))
        model = init_model(width, kappa, TrainConfig(hidden_width=hidden, seed=trial))
        for p in (model.w1, model.b1, model.w2, model.b2):
            p += rng.normal(0, 0.3, size=p.shape)
        x = (rng.random(width) < 0.5).astype(float)
        label = int(rng.integers(0, kappa))
        worst = max(worst, gradient_check(model, x, label))
    gate(
        "analytic gradients within 1e-4 of central differences on 100 models",
        worst < 1e-4,
        30,
        time.monotonic() - start,
    )


@pytest.fixture(scope="module")
def planted_300():
    ds, labels = generate_synthetic(300, 60, 3, 0.05, seed=4242)
    dist = distance_matrix(similarity_matrix(tfidf_weights(ds), list(ds.user_ids)))
    clustering = kmedoids(dist, 3, seed=0)
    return ds, labels, clustering


def test_planted_profiles_recovered_and_predictable(gate, planted_300, tmp_path):
    start = time.monotonic()
    ds, labels, clustering = planted_300
    agreement = label_agreement(clustering.assignment, labels)
    relabeled = set_self_labels(ds, [int(v) for v in clustering.assignment])
    report = run_selflabel_consistency(
        relabeled, tmp_path, n_folds=10, seed=0, train_config=TrainConfig(epochs=150, seed=0)
    )
    aucs = list(report.aggregate["auc_per_class"].values())
    ok = agreement >= 0.9 and len(aucs) == 3 and all(a >= 0.9 for a in aucs)
    gate(
        "planted profiles: clustering agreement >= 0.9 and per-class AUC >= 0.9",
        ok,
        120,
        time.monotonic() - start,
    )


def test_permuted_labels_collapse_to_chance(gate, planted_300, tmp_path):
    start = time.monotonic()
    ds, labels, _ = planted_300
    labeled = set_self_labels(ds, [int(v) for v in labels])
    cfg = TrainConfig(epochs=150, seed=0)
    true_rep = run_selflabel_consistency(labeled, tmp_path / "true", seed=0, train_config=cfg)
    perm_rep = run_selflabel_consistency(
        labeled, tmp_path / "perm", seed=0, permute_labels=True, train_config=cfg
    )
    perm_aucs = list(perm_rep.aggregate["auc_per_class"].values())
    ok = (
        all(0.4 <= a <= 0.6 for a in perm_aucs)
        and perm_rep.aggregate["cross_class_rate"] >= 0.6
        and true_rep.aggregate["cross_class_rate"] <= 0.1
    )
    gate(
        "permuted labels: AUC in [0.4,0.6], cross-class rate >= 0.6 vs <= 0.1 true",
        ok,
        120,
        time.monotonic() - start,
    )


def test_masked_recommendation_trends(gate, tmp_path):
    start = time.monotonic()
    ds, _ = generate_synthetic(150, 240, 3, 0.15, seed=77)
    dist = distance_matrix(similarity_matrix(tfidf_weights(ds), list(ds.user_ids)))
    clustering = relabel_by_allow_rate(kmedoids(dist, 3, seed=0, restarts=20), ds.matrix())
    report = run_recommendation_sweep(
        ds,
        clustering,
        tmp_path,
        alpha_set=(0.1, 0.3, 0.5),
        k_set=(3, 15),
        n_max=50,
        seeds=tuple(range(30)),
        n_folds=10,
        train_config=TrainConfig(epochs=100, seed=0),
    )
    curves = report.aggregate["curves"]
    recall_at_50 = {a: curves[f"alpha={a:g},k=15"]["recall"][49] for a in (0.1, 0.3, 0.5)}
    prec_at_50 = {k: curves[f"alpha=0.3,k={k}"]["precision"][49] for k in (3, 15)}

    per_seed = {(r["seed"], r["alpha"], r["k"]): r for r in report.per_fold}
    wins_recall_53 = sum(
        per_seed[(s, 0.5, 15)]["recall"][49] > per_seed[(s, 0.3, 15)]["recall"][49]
        for s in range(30)
    )
    wins_recall_31 = sum(
        per_seed[(s, 0.3, 15)]["recall"][49] > per_seed[(s, 0.1, 15)]["recall"][49]
        for s in range(30)
    )
    wins_precision = sum(
        per_seed[(s, 0.3, 15)]["precision"][49] >= per_seed[(s, 0.3, 3)]["precision"][49]
        for s in range(30)
    )
    ok = (
        recall_at_50[0.5] > recall_at_50[0.3] > recall_at_50[0.1]
        and prec_at_50[15] >= prec_at_50[3]
        and wins_recall_53 >= 24
        and wins_recall_31 >= 24
        and wins_precision >= 24
    )
    gate(
        "masked sweep: recall rises with alpha and k=15 precision >= k=3 (>=24/30 seeds)",
        ok,
        300,
        time.monotonic() - start,
    )


def test_metric_properties_hold_on_random_cases(gate):
    start = time.monotonic()
    rng = np.random.default_rng(31337)
    ok = True

    for _ in range(400):  # ROC endpoints, monotonicity, negation antisymmetry
        n = int(rng.integers(4, 40))
        scores = np.round(rng.random(n), int(rng.integers(1, 3)))
        truth = rng.integers(0, 2, size=n)
        if truth.min() == truth.max():
            truth[0] = 1 - truth[0]
        curve = roc_curve(scores, truth, class_id=1)
        neg = roc_curve(-scores, truth, class_id=1)
        xs = [p[0] for p in curve.points]
        ys = [p[1] for p in curve.points]
        ok = ok and curve.points[0] == (0.0, 0.0) and curve.points[-1] == (1.0, 1.0)
        ok = ok and xs == sorted(xs) and ys == sorted(ys)
        ok = ok and abs(curve.auc + neg.auc - 1.0) < 1e-9

    for _ in range(300):  # recall at top-N never decreases with N
        n = int(rng.integers(5, 30))
        truth = rng.integers(0, 2, size=n)
        truth[int(rng.integers(0, n))] = 1
        order = rng.permutation(n)
        prev = -1.0
        for cutoff in range(1, n + 1):
            decisions = np.zeros(n)
            decisions[order[:cutoff]] = 1
            _, recall, _ = precision_recall(confusion_from_decisions(decisions, truth))
            ok = ok and recall >= prev - 1e-12
            prev = recall

    for trial in range(300):  # silhouette stays within [-1, 1]
        n = int(rng.integers(4, 26))
        kappa = int(rng.integers(2, 5))
        d = random_distances(rng, n, tie_heavy=trial % 3 == 0)
        assignment = rng.integers(0, kappa, size=n).astype(np.int64)
        clustering = Clustering(
            kappa=kappa, medoid_ids=list(range(kappa)), assignment=assignment,
            total_cost=0.0, seed=0,
        )
        per_user, mean = silhouette(clustering, d)
        ok = ok and bool((per_user >= -1).all() and (per_user <= 1).all())
        ok = ok and -1.0 <= mean <= 1.0

    gate(
        "metric properties hold on 1000 random cases",
        ok,
        30,
        time.monotonic() - start,
    )


def test_reruns_are_byte_identical(gate, tmp_path):
    start = time.monotonic()
    ok = True

    synth = tmp_path / "synth"
    assert main(["synth", "--users", "40", "--width", "24", "--seed", "7", "--out-dir", str(synth)]) == 0
    pipeline_artifacts = [
        "taxonomy.csv", "clustering.csv", "clustering.json",
        "dataset_subset.csv", "model.json", "pipeline_report.json",
    ]
    for sub in ("p1", "p2"):
        code = main([
            "pipeline", "--data", str(synth / "dataset.csv"),
            "--taxonomy", str(synth / "taxonomy.csv"),
            "--subset", "DATA", "--kappa", "3", "--epochs", "60",
            "--seed", "0", "--out-dir", str(tmp_path / sub),
        ])
        ok = ok and code == 0
    for name in pipeline_artifacts:
        ok = ok and (tmp_path / "p1" / name).read_bytes() == (tmp_path / "p2" / name).read_bytes()

    ds, labels = generate_synthetic(45, 24, 3, 0.05, seed=3)
    ds = set_self_labels(ds, [int(v) for v in labels])
    dist = distance_matrix(similarity_matrix(tfidf_weights(ds), list(ds.user_ids)))
    clustering = kmedoids(dist, 3, seed=0)
    cfg = TrainConfig(epochs=40, seed=0)

    def run_all(out):
        out.mkdir(parents=True, exist_ok=True)
        reports = [
            run_selflabel_consistency(ds, out, n_folds=5, seed=0, train_config=cfg),
            run_subset_clustering(ds, out, suites=("ALL",), kappa_range=(2, 3), seeds=(0,)),
            run_recommendation_sweep(
                ds, clustering, out, alpha_set=(0.3,), k_set=(3,), n_max=5,
                seeds=(0,), n_folds=4, train_config=cfg,
            ),
        ]
        names = []
        for rep in reports:
            names.append(save_report(rep, out).name)
            names.extend(rep.artifacts)
        return sorted(names)

    names_a = run_all(tmp_path / "e1")
    names_b = run_all(tmp_path / "e2")
    ok = ok and names_a == names_b
    for name in names_a:
        ok = ok and (tmp_path / "e1" / name).read_bytes() == (tmp_path / "e2" / name).read_bytes()

    gate(
        "pipeline and every experiment suite rerun byte-identically",
        ok,
        120,
        time.monotonic() - start,
    )
