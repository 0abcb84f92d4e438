"""Find question -> answer links in chat feeds with seeded KDE clustering.

Pairs each question with the messages that follow it, pins high-confidence
pairs into seed clusters, and grows an answer cluster by comparing kernel
density estimates of the answer and non-answer clusters.
"""

from .clustering import (
    CandidatePair,
    ClusterConfig,
    ClusterState,
    build_pairs,
    prepare_pairs,
    run_ans_chat,
    run_kmeans_baseline,
    run_regular,
    seed_clusters,
)
from .evaluation import EvalReport, GoldAnnotations, fleiss_kappa, majority_vote, score
from .features import FeatureConfig, FeatureVector, extract_features, jaccard, standardize, tokenize_stem
from .ingestion import (
    AckConfig,
    Feed,
    Message,
    QuestionDetectorConfig,
    QuestionSet,
    detect_questions,
    extract_mentions,
    is_acknowledgment,
    parse_feed,
)
from .kde import BandwidthConfig, KdeModel, density, fit_kde, log_density, select_bandwidth
from .synthgen import GenConfig, corpus_stats, generate

__version__ = "0.1.0"
