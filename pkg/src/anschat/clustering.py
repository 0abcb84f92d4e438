"""Candidate pairs, conservative seeds and the two-cluster answer/non-answer loops.

Three variants share the pair representation:

* ``run_ans_chat``: seeded ("conservative") KDE clustering. Seed pairs are pinned
  to their cluster; free pairs go to A when ``log f_A(x) >= log f_N(x)``.
* ``run_regular``: the same KDE loop with every pair free to move and a strict
  ``>`` for A, initialized by a heuristic.
* ``run_kmeans_baseline``: Lloyd's algorithm with k=2.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import kde
from .errors import DegenerateData, DegenerateInit, EmptySeedCluster, PreconditionError
from .features import FeatureConfig, FeatureVector, featurize, standardize_matrix, to_matrix
from .ingestion import AckConfig, Feed, QuestionSet, is_acknowledgment

log = logging.getLogger(__name__)

ANSWER_SEED = "answer_seed"
NON_ANSWER_SEED = "non_answer_seed"
FREE = "free"
SEED_LABELS = {ANSWER_SEED: "answer", NON_ANSWER_SEED: "non_answer", FREE: "free"}


@dataclass
class CandidatePair:
    question_id: str
    candidate_id: str
    question_index: int
    candidate_index: int
    features: FeatureVector | None = None
    raw: dict = field(default_factory=dict)
    seed: str = FREE
    assignment: str = "N"

    @property
    def key(self) -> tuple[str, str]:
        return (self.question_id, self.candidate_id)

    @property
    def msg_dist(self) -> int:
        return self.candidate_index - self.question_index


@dataclass(frozen=True)
class ClusterConfig:
    window_w: int = 10
    max_iters: int = 15
    switch_threshold: int = 10
    min_answer_dt: float = 1.0
    max_answer_dt: float = 36000.0
    init_heuristic: str = "seed_rules"
    rng_seed: int = 0
    ack: AckConfig = AckConfig()

    def __post_init__(self):
        if self.window_w < 1:
            raise ValueError("window_w must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.switch_threshold < 0:
            raise ValueError("switch_threshold must be >= 0")
        if not self.max_answer_dt > self.min_answer_dt >= 0:
            raise ValueError("need max_answer_dt > min_answer_dt >= 0")
        if self.init_heuristic not in ("seed_rules", "jaccard_median"):
            raise ValueError("init_heuristic must be 'seed_rules' or 'jaccard_median'")


@dataclass
class ClusterState:
    pairs: list[CandidatePair]
    variant: str
    iteration: int = 0
    switch_history: list[int] = field(default_factory=list)
    converged: bool = False
    # models after the last refit, and the ones that produced the final assignment
    models: tuple | None = None
    assign_models: tuple | None = None
    bandwidth_history: list[tuple[float, float]] = field(default_factory=list)
    collapsed: bool = False

    @property
    def answers(self) -> list[CandidatePair]:
        return [p for p in self.pairs if p.assignment == "A"]

    def predicted(self) -> set[tuple[str, str]]:
        return {p.key for p in self.pairs if p.assignment == "A"}

    def assignment_rows(self) -> list[dict]:
        return [
            {"q": p.question_id, "a": p.candidate_id, "cluster": p.assignment, "seed": SEED_LABELS[p.seed]}
            for p in self.pairs
        ]

    def metadata(self) -> dict:
        meta = {
            "variant": self.variant,
            "iterations": self.iteration,
            "switch_history": list(self.switch_history),
            "converged": self.converged,
            "n_pairs": len(self.pairs),
            "n_answers": sum(p.assignment == "A" for p in self.pairs),
            "n_answer_seeds": sum(p.seed == ANSWER_SEED for p in self.pairs),
            "n_non_answer_seeds": sum(p.seed == NON_ANSWER_SEED for p in self.pairs),
            "schema": list(self.pairs[0].features.schema) if self.pairs and self.pairs[0].features else [],
        }
        if self.models is not None:
            meta["bandwidths"] = {"A": self.models[0].bandwidth, "N": self.models[1].bandwidth}
            meta["bandwidth_history"] = [{"A": a, "N": n} for a, n in self.bandwidth_history]
        if self.collapsed:
            meta["collapsed"] = True
        return meta


# -- pair construction ------------------------------------------------------------------


def build_pairs(feed: Feed, questions: QuestionSet, config: ClusterConfig = ClusterConfig()) -> list[CandidatePair]:
    pairs = []
    last = len(feed) - 1
    for qid in questions:
        if qid not in feed:
            raise PreconditionError(f"question {qid!r} is not in the feed")
        q = feed.get(qid)
        for i in range(q.index + 1, min(q.index + config.window_w, last) + 1):
            pairs.append(CandidatePair(q.id, feed[i].id, q.index, i))
    return pairs


def _acknowledged(q, c, feed: Feed, config: ClusterConfig) -> bool:
    last = min(q.index + config.window_w, len(feed) - 1)
    for i in range(c.index + 1, last + 1):
        m = feed[i]
        if m.author != q.author:
            continue
        if not is_acknowledgment(m.text, config.ack):
            return False
        # c must be the latest non-asker message before the ack
        between = [feed[j] for j in range(c.index + 1, i)]
        return c.author != q.author and all(b.author == q.author for b in between)
    return False


def seed_label(q, c, feed: Feed, config: ClusterConfig = ClusterConfig()) -> str:
    dt = c.timestamp - q.timestamp
    if c.author == q.author or dt < config.min_answer_dt or dt > config.max_answer_dt:
        return NON_ANSWER_SEED
    if c.author in q.mentions or _acknowledged(q, c, feed, config):
        return ANSWER_SEED
    return FREE


def seed_clusters(pairs: Sequence[CandidatePair], feed: Feed, config: ClusterConfig = ClusterConfig()) -> list[CandidatePair]:
    out = []
    for p in pairs:
        label = seed_label(feed[p.question_index], feed[p.candidate_index], feed, config)
        out.append(replace(p, seed=label, assignment="A" if label == ANSWER_SEED else "N"))
    return out


def attach_features(pairs: Sequence[CandidatePair], feed: Feed, config: FeatureConfig = FeatureConfig()) -> list[CandidatePair]:
    """Compute feature vectors for *pairs* (standardized over the whole pair population if configured)."""
    if not pairs:
        return []
    msg_pairs = [(feed[p.question_index], feed[p.candidate_index]) for p in pairs]
    raw_config = replace(config, feature_set="text_and_structure", distance_unit="messages")
    raw = featurize(msg_pairs, feed, raw_config)
    vectors = featurize(msg_pairs, feed, config)
    if config.standardize:
        X = standardize_matrix(to_matrix(vectors))
        schema = vectors[0].schema
        vectors = [FeatureVector(tuple(float(v) for v in row), schema) for row in X]
    return [replace(p, features=v, raw=r.as_dict()) for p, v, r in zip(pairs, vectors, raw)]


def prepare_pairs(feed: Feed, questions: QuestionSet, cluster_config: ClusterConfig = ClusterConfig(),
                  feature_config: FeatureConfig | None = None) -> list[CandidatePair]:
    """build_pairs, seed_clusters and attach_features in one call, sharing the window size."""
    if feature_config is None:
        feature_config = FeatureConfig(window_w=cluster_config.window_w)
    elif feature_config.window_w != cluster_config.window_w:
        feature_config = replace(feature_config, window_w=cluster_config.window_w)
    pairs = build_pairs(feed, questions, cluster_config)
    pairs = seed_clusters(pairs, feed, cluster_config)
    return attach_features(pairs, feed, feature_config)


# -- KDE loops --------------------------------------------------------------------------


def fit_cluster_model(points: np.ndarray, config: kde.BandwidthConfig) -> kde.KdeModel:
    """Fit a KDE with a cross-validated bandwidth.

    Clusters smaller than ``config.folds`` fall back to leave-one-out CV; a
    single point gets unit bandwidth (features are standardized).
    """
    n = len(points)
    if n >= config.folds:
        sigma = kde.select_bandwidth(points, config)
    elif n >= 2:
        sigma = kde.select_bandwidth(points, replace(config, folds=n))
    else:
        sigma = 1.0
    return kde.fit_kde(points, sigma)


def _feature_matrix(pairs: Sequence[CandidatePair]) -> np.ndarray:
    if any(p.features is None for p in pairs):
        raise PreconditionError("all pairs need feature vectors")
    return to_matrix([p.features for p in pairs])


def _finish(pairs, in_a: np.ndarray, state: ClusterState) -> ClusterState:
    state.pairs = [replace(p, assignment="A" if a else "N") for p, a in zip(pairs, in_a)]
    return state


IterationCallback = Callable[[int, np.ndarray], None]


def run_ans_chat(pairs: Sequence[CandidatePair], config: ClusterConfig = ClusterConfig(),
                 bandwidth_config: kde.BandwidthConfig = kde.BandwidthConfig(),
                 on_iteration: IterationCallback | None = None) -> ClusterState:
    """Conservative KDE clustering.

    ``on_iteration(iteration, in_a)`` is called after every assignment pass
    with the boolean A-membership of all pairs.
    """
    pairs = list(pairs)
    X = _feature_matrix(pairs)
    seeds = np.array([p.seed for p in pairs])
    seed_a = seeds == ANSWER_SEED
    seed_n = seeds == NON_ANSWER_SEED
    free = ~(seed_a | seed_n)
    if not seed_a.any() or not seed_n.any():
        raise EmptySeedCluster(
            f"seed clusters need members on both sides (answer seeds: {int(seed_a.sum())}, "
            f"non-answer seeds: {int(seed_n.sum())})"
        )

    f_a = fit_cluster_model(X[seed_a], bandwidth_config)
    f_n = fit_cluster_model(X[seed_n], bandwidth_config)
    state = ClusterState(pairs=pairs, variant="anschat", models=(f_a, f_n))
    state.bandwidth_history.append((f_a.bandwidth, f_n.bandwidth))

    X_free = X[free]
    in_a = seed_a.copy()
    prev = None
    for it in range(1, config.max_iters + 1):
        # ties go to A
        new = kde.log_density_many(f_a, X_free) >= kde.log_density_many(f_n, X_free)
        switches = int(free.sum()) if prev is None else int((new != prev).sum())
        prev = new
        in_a[free] = new
        state.iteration = it
        state.switch_history.append(switches)
        state.assign_models = (f_a, f_n)
        if on_iteration is not None:
            on_iteration(it, in_a.copy())
        f_a = fit_cluster_model(X[in_a], bandwidth_config)
        f_n = fit_cluster_model(X[~in_a], bandwidth_config)
        state.models = (f_a, f_n)
        state.bandwidth_history.append((f_a.bandwidth, f_n.bandwidth))
        log.debug("anschat iteration %d: %d switches, |A|=%d", it, switches, int(in_a.sum()))
        if switches < config.switch_threshold:
            state.converged = True
            break
    return _finish(pairs, in_a, state)


def initial_partition(pairs: Sequence[CandidatePair], heuristic: str = "seed_rules") -> np.ndarray:
    if heuristic == "seed_rules":
        return np.array([p.seed == ANSWER_SEED for p in pairs], dtype=bool)
    if heuristic == "jaccard_median":
        jac = np.array([p.raw["jaccard"] for p in pairs], dtype=float)
        return jac > np.median(jac)
    raise ValueError(f"unknown init heuristic {heuristic!r}")


def run_regular(pairs: Sequence[CandidatePair], config: ClusterConfig = ClusterConfig(),
                bandwidth_config: kde.BandwidthConfig = kde.BandwidthConfig(),
                on_iteration: IterationCallback | None = None) -> ClusterState:
    """Unconstrained KDE clustering: every pair may move; strictly higher A density assigns to A."""
    pairs = list(pairs)
    X = _feature_matrix(pairs)
    in_a = initial_partition(pairs, config.init_heuristic)
    if in_a.all() or not in_a.any():
        raise DegenerateInit(
            f"heuristic {config.init_heuristic!r} left a cluster empty (|A|={int(in_a.sum())}, |X|={len(pairs)})"
        )
    f_a = fit_cluster_model(X[in_a], bandwidth_config)
    f_n = fit_cluster_model(X[~in_a], bandwidth_config)
    state = ClusterState(pairs=pairs, variant="regular", models=(f_a, f_n))
    state.bandwidth_history.append((f_a.bandwidth, f_n.bandwidth))
    for it in range(1, config.max_iters + 1):
        new = kde.log_density_many(f_a, X) > kde.log_density_many(f_n, X)
        switches = int((new != in_a).sum())
        in_a = new
        state.iteration = it
        state.switch_history.append(switches)
        state.assign_models = (f_a, f_n)
        if on_iteration is not None:
            on_iteration(it, in_a.copy())
        if in_a.all() or not in_a.any():
            # one cluster absorbed everything; nothing left to refit
            state.collapsed = True
            break
        f_a = fit_cluster_model(X[in_a], bandwidth_config)
        f_n = fit_cluster_model(X[~in_a], bandwidth_config)
        state.models = (f_a, f_n)
        state.bandwidth_history.append((f_a.bandwidth, f_n.bandwidth))
        if switches < config.switch_threshold:
            state.converged = True
            break
    return _finish(pairs, in_a, state)


def run_kmeans_baseline(pairs: Sequence[CandidatePair], config: ClusterConfig = ClusterConfig(),
                        max_iter: int = 100, tol: float = 1e-9) -> ClusterState:
    pairs = list(pairs)
    X = _feature_matrix(pairs)
    order = np.random.default_rng(config.rng_seed).permutation(len(X))
    first = X[order[0]]
    second = next((X[j] for j in order[1:] if not np.array_equal(X[j], first)), None)
    if second is None:
        raise DegenerateData("k-means needs at least two distinct feature vectors")
    centroids = np.stack([first, second]).astype(float)

    state = ClusterState(pairs=pairs, variant="kmeans")
    labels = None
    for it in range(1, max_iter + 1):
        d = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new = np.argmin(d, axis=1)  # ties -> cluster 0
        state.switch_history.append(len(X) if labels is None else int((new != labels).sum()))
        labels = new
        state.iteration = it
        updated = centroids.copy()
        for k in (0, 1):
            if (labels == k).any():
                updated[k] = X[labels == k].mean(axis=0)
        shift = float(np.abs(updated - centroids).max())
        centroids = updated
        if shift < tol:
            state.converged = True
            break

    seeds = np.array([p.seed == ANSWER_SEED for p in pairs])
    counts = [int((seeds & (labels == k)).sum()) for k in (0, 1)]
    if counts[0] != counts[1]:
        a_label = int(np.argmax(counts))
    else:
        dist = np.array([p.msg_dist for p in pairs], dtype=float)
        means = [dist[labels == k].mean() if (labels == k).any() else np.inf for k in (0, 1)]
        a_label = 0 if means[0] <= means[1] else 1
    return _finish(pairs, labels == a_label, state)


VARIANTS = {
    "anschat": run_ans_chat,
    "regular": run_regular,
}


def run_variant(variant: str, pairs, config: ClusterConfig = ClusterConfig(),
                bandwidth_config: kde.BandwidthConfig = kde.BandwidthConfig()) -> ClusterState:
    if variant == "kmeans":
        return run_kmeans_baseline(pairs, config)
    try:
        fn = VARIANTS[variant]
    except KeyError:
        raise ValueError(f"unknown variant {variant!r}") from None
    return fn(pairs, config, bandwidth_config)
