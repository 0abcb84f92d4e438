"""Gold annotations, inter-tagger agreement and precision/recall scoring of answer pairs."""

from __future__ import annotations

import csv
import io
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import FormatError, PreconditionError, UndefinedKappa
from .ingestion import Feed, read_jsonl

Pair = tuple[str, str]


@dataclass(frozen=True)
class GoldAnnotations:
    taggers: Mapping[str, frozenset] = field(default_factory=dict)

    @property
    def tagger_count(self) -> int:
        return len(self.taggers)

    @property
    def questions(self) -> frozenset:
        return frozenset(q for marks in self.taggers.values() for q, _ in marks)

    @classmethod
    def single(cls, pairs: Iterable[Pair], tagger: str = "gold") -> "GoldAnnotations":
        return cls({tagger: frozenset(pairs)})


@dataclass(frozen=True)
class EvalReport:
    precision: float
    recall: float
    f_score: float
    tp: int
    fp: int
    fn: int
    degenerate_flags: frozenset = frozenset()

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f_score": self.f_score,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "degenerate_flags": sorted(self.degenerate_flags),
        }


def load_gold(path, feed: Feed | None = None, window_w: int | None = None) -> GoldAnnotations:
    """Read ``{"question_id", "answer_ids", "tagger"}`` lines.

    With *feed* given, ids are checked against it; with *window_w* as well,
    every answer must fall inside its question's window.
    """
    marks = defaultdict(set)
    for lineno, obj in read_jsonl(path):
        if not isinstance(obj, dict):
            raise FormatError("expected a JSON object", line=lineno, path=path)
        qid, answers, tagger = obj.get("question_id"), obj.get("answer_ids"), obj.get("tagger", "gold")
        if not isinstance(qid, str) or not isinstance(tagger, str):
            raise FormatError("'question_id' and 'tagger' must be strings", line=lineno, path=path)
        if not isinstance(answers, list) or not all(isinstance(a, str) for a in answers):
            raise FormatError("'answer_ids' must be a list of strings", line=lineno, path=path)
        if feed is not None:
            for mid in [qid, *answers]:
                if mid not in feed:
                    raise FormatError(f"unknown message id {mid!r}", line=lineno, path=path)
            if window_w is not None:
                qi = feed.get(qid).index
                for a in answers:
                    if not 1 <= feed.get(a).index - qi <= window_w:
                        raise FormatError(f"answer {a!r} is outside the window of {qid!r}", line=lineno, path=path)
        marks[tagger]  # a tagger with an empty line still counts as a rater
        marks[tagger].update((qid, a) for a in answers)
    return GoldAnnotations({t: frozenset(s) for t, s in sorted(marks.items())})


def gold_rows(gold: GoldAnnotations) -> list[dict]:
    rows = []
    for tagger, marks in gold.taggers.items():
        by_q = defaultdict(list)
        for q, a in marks:
            by_q[q].append(a)
        for q in sorted(by_q):
            rows.append({"question_id": q, "answer_ids": sorted(by_q[q]), "tagger": tagger})
    return rows


def majority_vote(gold: GoldAnnotations) -> set[Pair]:
    if gold.tagger_count < 1:
        raise PreconditionError("majority vote needs at least one tagger")
    votes = Counter(p for marks in gold.taggers.values() for p in marks)
    return {p for p, n in votes.items() if n > gold.tagger_count / 2}


def fleiss_kappa_matrix(counts) -> float:
    """Fleiss' kappa from an items x categories matrix of rating counts.

    Every row must sum to the same number of raters n >= 2.
    """
    counts = np.asarray(counts, dtype=float)
    if counts.ndim != 2 or counts.shape[0] == 0:
        raise PreconditionError("need a non-empty items x categories matrix")
    n = counts.sum(axis=1)
    if not np.all(n == n[0]) or n[0] < 2:
        raise PreconditionError("every item needs the same number (>= 2) of ratings")
    n = n[0]
    p_j = counts.sum(axis=0) / counts.sum()
    p_i = ((counts ** 2).sum(axis=1) - n) / (n * (n - 1))
    p_bar = p_i.mean()
    p_e = float((p_j ** 2).sum())
    if p_e >= 1.0:
        raise UndefinedKappa("expected agreement is 1: every rating falls in one category")
    return float((p_bar - p_e) / (1.0 - p_e))


def rating_matrix(gold: GoldAnnotations, universe: Iterable[Pair]) -> np.ndarray:
    universe = list(dict.fromkeys(universe))
    known = set(universe)
    for tagger, marks in gold.taggers.items():
        stray = marks - known
        if stray:
            raise PreconditionError(f"tagger {tagger!r} marked pairs outside the candidate universe: {sorted(stray)[:3]}")
    yes = np.array([sum(p in marks for marks in gold.taggers.values()) for p in universe])
    return np.stack([yes, gold.tagger_count - yes], axis=1)


def fleiss_kappa(gold: GoldAnnotations, universe: Iterable[Pair]) -> float:
    """Agreement on the answer / non-answer label over every pair in *universe*."""
    if gold.tagger_count < 2:
        raise PreconditionError("Fleiss kappa needs at least two taggers")
    universe = list(universe)
    if not universe:
        raise PreconditionError("empty item universe")
    return fleiss_kappa_matrix(rating_matrix(gold, universe))


def score(predicted: Iterable[Pair], gold: Iterable[Pair]) -> EvalReport:
    predicted, gold = set(predicted), set(gold)
    tp = len(predicted & gold)
    fp = len(predicted - gold)
    fn = len(gold - predicted)
    if not predicted and not gold:
        return EvalReport(1.0, 1.0, 1.0, 0, 0, 0, frozenset({"empty_prediction", "empty_gold"}))
    if not predicted:
        return EvalReport(0.0, 0.0, 0.0, tp, fp, fn, frozenset({"empty_prediction"}))
    if not gold:
        return EvalReport(0.0, 0.0, 0.0, tp, fp, fn, frozenset({"empty_gold"}))
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    f_score = 2 * precision * recall / (precision + recall) if tp else 0.0
    return EvalReport(precision, recall, f_score, tp, fp, fn)


def per_question(predicted: Iterable[Pair], gold: Iterable[Pair]) -> list[dict]:
    predicted, gold = set(predicted), set(gold)
    questions = sorted({q for q, _ in predicted} | {q for q, _ in gold})
    rows = []
    for q in questions:
        pq = {p for p in predicted if p[0] == q}
        gq = {p for p in gold if p[0] == q}
        r = score(pq, gq)
        rows.append({
            "question_id": q, "n_gold": len(gq), "n_predicted": len(pq), "tp": r.tp,
            "precision": r.precision, "recall": r.recall, "f_score": r.f_score,
        })
    return rows


def per_question_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    fields = ["question_id", "n_gold", "n_predicted", "tp", "precision", "recall", "f_score"]
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def load_assignments(path) -> tuple[set[Pair], list[dict]]:
    """Read a cluster assignment dump; returns the A-cluster pairs and all rows."""
    rows = []
    for lineno, obj in read_jsonl(path):
        if not isinstance(obj, dict) or not all(isinstance(obj.get(k), str) for k in ("q", "a", "cluster")):
            raise FormatError("expected {\"q\", \"a\", \"cluster\"} strings", line=lineno, path=path)
        if obj["cluster"] not in ("A", "N"):
            raise FormatError(f"cluster must be 'A' or 'N', got {obj['cluster']!r}", line=lineno, path=path)
        rows.append(obj)
    return {(r["q"], r["a"]) for r in rows if r["cluster"] == "A"}, rows
