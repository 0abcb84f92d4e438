"""Pair features: message distances, asker follow-up, mentions and Jaccard overlap."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from nltk.stem.porter import PorterStemmer

from .errors import PreconditionError, SchemaMismatch
from .ingestion import MENTION_RE, Feed, Message, strip_urls

STRUCTURE_FEATURES = ("msg_dist", "asker_next_dist", "mention_flag")
TEXT_FEATURES = ("jaccard",)
FEATURE_SETS = {
    "text": TEXT_FEATURES,
    "structure": STRUCTURE_FEATURES,
    "text_and_structure": STRUCTURE_FEATURES + TEXT_FEATURES,
}

_TOKEN_RE = re.compile(r"[^\W_]+")
_stemmer = PorterStemmer()


@lru_cache(maxsize=None)
def _stem(token: str) -> str:
    return _stemmer.stem(token)


@lru_cache(maxsize=8)
def load_stopwords(path: str | None = None) -> frozenset:
    """Stopword list, one token per line. ``None`` loads the bundled English list."""
    if path is None:
        text = resources.files("anschat").joinpath("data/stopwords_en.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip())


@dataclass(frozen=True)
class FeatureConfig:
    feature_set: str = "text_and_structure"
    window_w: int = 10
    standardize: bool = True
    stopword_list: str | None = None
    stemmer: str = "porter"
    # "seconds" swaps msg_dist for the question-to-candidate time gap
    distance_unit: str = "messages"

    def __post_init__(self):
        if self.feature_set not in FEATURE_SETS:
            raise ValueError(f"feature_set must be one of {sorted(FEATURE_SETS)}")
        if self.window_w < 1:
            raise ValueError("window_w must be >= 1")
        if self.stemmer != "porter":
            raise ValueError("only the porter stemmer is supported")
        if self.distance_unit not in ("messages", "seconds"):
            raise ValueError("distance_unit must be 'messages' or 'seconds'")

    @property
    def schema(self) -> tuple[str, ...]:
        names = FEATURE_SETS[self.feature_set]
        if self.distance_unit == "seconds":
            names = tuple("time_dist" if n == "msg_dist" else n for n in names)
        return names


@dataclass(frozen=True)
class FeatureVector:
    values: tuple[float, ...]
    schema: tuple[str, ...]

    def __post_init__(self):
        if len(self.values) != len(self.schema):
            raise SchemaMismatch("values and schema differ in length")

    def as_dict(self) -> dict:
        return dict(zip(self.schema, self.values))

    def __getitem__(self, name):
        return self.values[self.schema.index(name)]


def tokenize_stem(text: str, config: FeatureConfig = FeatureConfig()) -> frozenset:
    stopwords = load_stopwords(config.stopword_list)
    text = MENTION_RE.sub(" ", strip_urls(text.lower()))
    return frozenset(_stem(t) for t in _TOKEN_RE.findall(text) if t not in stopwords)


def jaccard(a, b) -> float:
    a, b = set(a), set(b)
    union = len(a | b)
    if union == 0:
        return 0.0
    return len(a & b) / union


def asker_next_distance(question: Message, candidate: Message, feed: Feed, window_w: int) -> int:
    last = min(question.index + window_w, len(feed) - 1)
    for i in range(candidate.index + 1, last + 1):
        if feed[i].author == question.author:
            return i - candidate.index
    return window_w + 1


def _raw_features(question, candidate, feed, config, tokens_q, tokens_c) -> dict:
    return {
        "msg_dist": float(candidate.index - question.index),
        "time_dist": float(candidate.timestamp - question.timestamp),
        "asker_next_dist": float(asker_next_distance(question, candidate, feed, config.window_w)),
        "mention_flag": 1.0 if candidate.author in question.mentions else 0.0,
        "jaccard": jaccard(tokens_q, tokens_c),
    }


def _check_window(question: Message, candidate: Message, window_w: int):
    gap = candidate.index - question.index
    if gap < 1 or gap > window_w:
        raise PreconditionError(
            f"candidate {candidate.id!r} is not within {window_w} messages after question {question.id!r}"
        )


def extract_features(pair: tuple[Message, Message], feed: Feed, config: FeatureConfig = FeatureConfig()) -> FeatureVector:
    question, candidate = pair
    _check_window(question, candidate, config.window_w)
    raw = _raw_features(
        question, candidate, feed, config,
        tokenize_stem(question.text, config), tokenize_stem(candidate.text, config),
    )
    schema = config.schema
    return FeatureVector(tuple(raw[n] for n in schema), schema)


def featurize(pairs: Iterable[tuple[Message, Message]], feed: Feed, config: FeatureConfig = FeatureConfig()) -> list[FeatureVector]:
    """Batch version of :func:`extract_features`; each message is tokenized once."""
    tokens = {}

    def toks(m):
        if m.id not in tokens:
            tokens[m.id] = tokenize_stem(m.text, config)
        return tokens[m.id]

    schema = config.schema
    out = []
    for question, candidate in pairs:
        _check_window(question, candidate, config.window_w)
        raw = _raw_features(question, candidate, feed, config, toks(question), toks(candidate))
        out.append(FeatureVector(tuple(raw[n] for n in schema), schema))
    return out


def to_matrix(vectors: Sequence[FeatureVector]) -> np.ndarray:
    if not vectors:
        return np.zeros((0, 0))
    schema = vectors[0].schema
    if any(v.schema != schema for v in vectors):
        raise SchemaMismatch("feature vectors do not share one schema")
    return np.array([v.values for v in vectors], dtype=float).reshape(len(vectors), len(schema))


def standardize_matrix(X: np.ndarray) -> np.ndarray:
    """Column-wise z-score with population std; constant columns become zero."""
    X = np.asarray(X, dtype=float)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    centered = X - mean
    # relative guard: a column that is constant up to rounding counts as constant
    scale = np.maximum(np.abs(mean), 1.0)
    degenerate = std <= 1e-12 * scale
    out = np.zeros_like(centered)
    ok = ~degenerate
    out[:, ok] = centered[:, ok] / std[ok]
    return out


def standardize(vectors: Sequence[FeatureVector]) -> list[FeatureVector]:
    if not vectors:
        raise PreconditionError("cannot standardize an empty list")
    X = standardize_matrix(to_matrix(vectors))
    schema = vectors[0].schema
    return [FeatureVector(tuple(float(v) for v in row), schema) for row in X]
