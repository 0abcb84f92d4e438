import math
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from anschat.clustering import ANSWER_SEED, build_pairs, seed_clusters
from anschat.errors import ConfigError
from anschat.ingestion import QuestionSet, build_feed, feed_rows
from anschat.jsonio import write_jsonl
from anschat.synthgen import GenConfig, corpus_stats, generate


def test_generation_is_byte_identical(tmp_path):
    cfg = GenConfig(n_messages=300, rng_seed=9)
    paths = []
    for k in range(2):
        feed, qs, gold = generate(cfg)
        p = tmp_path / f"feed{k}.jsonl"
        write_jsonl(p, feed_rows(feed))
        paths.append(p)
        assert list(qs) == list(generate(cfg)[1])
        assert gold == generate(cfg)[2]
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_different_seeds_differ():
    a = generate(GenConfig(n_messages=200, rng_seed=1))[0]
    b = generate(GenConfig(n_messages=200, rng_seed=2))[0]
    assert [m.text for m in a] != [m.text for m in b]


def test_no_questions():
    feed, qs, gold = generate(GenConfig(n_messages=200, question_prob=0.0))
    assert len(feed) == 200 and len(qs) == 0 and gold == set()


def test_question_rate_within_binomial_bound():
    feed, qs, _ = generate(GenConfig(n_messages=1000, question_prob=0.1, rng_seed=42))
    # sd of Binomial(1000, 0.1) is sqrt(90)
    assert abs(len(qs) - 100) <= 3 * math.sqrt(90)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 12))
def test_gold_invariants(seed, w):
    cfg = GenConfig(n_messages=300, rng_seed=seed, window_w=w)
    feed, qs, gold = generate(cfg)
    ts = [m.timestamp for m in feed]
    assert ts == sorted(ts)
    assert len({m.id for m in feed}) == len(feed)
    assert {m.author for m in feed} <= {f"user{i:02d}" for i in range(cfg.n_users)}
    qset = set(qs)
    per_q = Counter(q for q, _ in gold)
    assert max(per_q.values(), default=0) <= 2
    for q, a in gold:
        assert q in qset
        qm, am = feed.get(q), feed.get(a)
        assert 1 <= am.index - qm.index <= w
        assert am.author != qm.author


@pytest.mark.parametrize("seed", range(5))
def test_seed_precision_with_mentions_always_on(seed):
    cfg = GenConfig(mention_prob=1.0, noise_mention_prob=0.0, rng_seed=seed)
    feed, qs, gold = generate(cfg)
    pairs = seed_clusters(build_pairs(feed, qs), feed)
    seeds = {p.key for p in pairs if p.seed == ANSWER_SEED}
    assert seeds
    assert seeds <= gold


def test_default_seed_precision():
    feed, qs, gold = generate(GenConfig(rng_seed=3))
    pairs = seed_clusters(build_pairs(feed, qs), feed)
    seeds = {p.key for p in pairs if p.seed == ANSWER_SEED}
    assert seeds and seeds <= gold


def test_corpus_stats_counting_oracle():
    feed, qs, gold = generate(GenConfig(n_messages=500, rng_seed=5))
    by_user = {}
    for m in feed:
        by_user[m.author] = by_user.get(m.author, 0) + 1
    counts = sorted(by_user.values())
    k = len(counts)
    median = counts[k // 2] if k % 2 else (counts[k // 2 - 1] + counts[k // 2]) / 2
    stats = corpus_stats(feed, qs, gold)
    assert stats == {
        "n_messages": 500,
        "n_users": k,
        "median_msgs_per_user": median,
        "n_questions": len(list(qs)),
        "question_rate": len(list(qs)) / 500,
        "n_gold_pairs": len(gold),
    }


def test_corpus_stats_small_cases():
    feed = build_feed([{"id": str(i), "ts": i, "user": "solo", "text": ""} for i in range(3)])
    stats = corpus_stats(feed, QuestionSet(()), set())
    assert stats["median_msgs_per_user"] == 3
    assert stats["n_gold_pairs"] == 0


@pytest.mark.parametrize("bad", [
    dict(question_prob=1.5),
    dict(answers_per_question=(0.5, 0.5, 0.5)),
    dict(answer_delay=0.0),
    dict(n_users=1),
    dict(vocab_size=0),
    dict(inter_message_dt=-1.0),
])
def test_invalid_config(bad):
    with pytest.raises(ConfigError):
        GenConfig(**bad)
