"""Synthetic group-chat corpora with known question -> answer links.

Messages are bags of pseudo-words drawn from a Zipf-distributed vocabulary.
Questions are laid down first (one Bernoulli draw per slot); each question
then schedules its answers a geometric number of slots later, optionally
mentions its first answerer and optionally gets acknowledged by the asker
right after an answer. Remaining slots are filled with chatter.

Scheduling keeps the conservative seed rules honest: a mentioned answerer
never posts anything but answers inside the question's window, and a user
never asks twice within ``window_w + 1`` slots, so an acknowledgment cannot
land in the window of another question by the same asker.
"""

from __future__ import annotations

import statistics
from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError
from .ingestion import Feed, QuestionSet, build_feed

ACK_TEXTS = ("ok", "thanks", "ok thanks", "thank you", "gotcha", "right gotcha", "thx", "\U0001F44D", "yep")
QUESTION_OPENERS = ("how", "what", "where", "which", "is", "can", "does", "anyone", "why", "should")
START_TS = 1_500_000_000.0


@dataclass(frozen=True)
class GenConfig:
    n_messages: int = 1000
    n_users: int = 20
    question_prob: float = 0.1
    answers_per_question: tuple[float, float, float] = (0.15, 0.6, 0.25)
    answer_delay: float = 0.35
    mention_prob: float = 0.5
    ack_prob: float = 0.4
    vocab_size: int = 1000
    topic_overlap: float = 0.4
    inter_message_dt: float = 60.0
    rng_seed: int = 0
    window_w: int = 10
    noise_mention_prob: float = 0.05
    chatter_topic_prob: float = 0.3
    mean_tokens: float = 6.0
    zipf_exponent: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "answers_per_question", tuple(float(p) for p in self.answers_per_question))
        problems = []
        if self.n_messages < 1 or self.n_users < 2:
            problems.append("need n_messages >= 1 and n_users >= 2")
        for name in ("question_prob", "mention_prob", "ack_prob", "topic_overlap", "noise_mention_prob",
                     "chatter_topic_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                problems.append(f"{name} must lie in [0, 1]")
        apq = self.answers_per_question
        if len(apq) != 3 or any(p < 0 for p in apq) or abs(sum(apq) - 1.0) > 1e-9:
            problems.append("answers_per_question must be 3 non-negative probabilities summing to 1")
        if not 0.0 < self.answer_delay <= 1.0:
            problems.append("answer_delay must lie in (0, 1]")
        if self.vocab_size < 1 or self.window_w < 1:
            problems.append("vocab_size and window_w must be positive")
        if self.inter_message_dt <= 0 or self.mean_tokens <= 0 or self.zipf_exponent < 0:
            problems.append("inter_message_dt and mean_tokens must be positive, zipf_exponent non-negative")
        if problems:
            raise ConfigError("; ".join(problems))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["answers_per_question"] = list(self.answers_per_question)
        return d


@dataclass
class _Slot:
    kind: str = "noise"  # question | answer | ack | noise
    author: str | None = None
    question: int | None = None  # slot of the question this answer/ack belongs to
    mention: str | None = None
    banned: set = field(default_factory=set)


class _Generator:
    def __init__(self, config: GenConfig):
        self.c = config
        self.rng = np.random.default_rng(config.rng_seed)
        self.users = [f"user{k:02d}" for k in range(config.n_users)]
        activity = 1.0 / np.arange(1, config.n_users + 1) ** 0.8
        self.activity = self.rng.permutation(activity / activity.sum())
        ranks = np.arange(1, config.vocab_size + 1, dtype=float)
        zipf = ranks ** -config.zipf_exponent
        self.vocab_p = zipf / zipf.sum()
        self.slots = [_Slot() for _ in range(config.n_messages)]
        self.texts: dict[int, list[str]] = {}

    # -- sampling helpers
    def pick_user(self, exclude=()):
        mask = np.array([u not in exclude for u in self.users])
        if not mask.any():
            return None
        p = self.activity * mask
        return self.users[self.rng.choice(len(self.users), p=p / p.sum())]

    def words(self, n):
        ids = self.rng.choice(self.c.vocab_size, size=n, p=self.vocab_p)
        return [f"t{k:04d}" for k in ids]

    def length(self):
        return 1 + int(self.rng.poisson(self.c.mean_tokens - 1)) if self.c.mean_tokens > 1 else 1

    def delay(self):
        # geometric on {1, 2, ...} conditioned on <= window_w
        while True:
            d = int(self.rng.geometric(self.c.answer_delay))
            if d <= self.c.window_w:
                return d

    def free(self, s):
        return 0 <= s < len(self.slots) and self.slots[s].kind == "noise" and self.slots[s].author is None

    # -- construction
    def run(self):
        c = self.c
        n = c.n_messages
        is_question = self.rng.random(n) < c.question_prob
        for i in np.flatnonzero(is_question):
            self.slots[i].kind = "question"
        last_asked: dict[str, int] = {}
        gold = []
        for i in range(n):
            slot = self.slots[i]
            if slot.kind == "question":
                gold.extend(self.place_question(i, last_asked))
        for i, slot in enumerate(self.slots):
            if slot.author is None:
                slot.author = self.pick_user(exclude=slot.banned) or self.users[0]
        return gold

    def place_question(self, i, last_asked):
        c = self.c
        slot = self.slots[i]
        blocked = set(slot.banned) | {u for u, j in last_asked.items() if i - j <= c.window_w + 1}
        asker = self.pick_user(exclude=blocked)
        if asker is None:
            # nobody may ask here; the slot degrades to chatter
            slot.kind = "noise"
            return []
        slot.author = asker
        last_asked[asker] = i
        q_tokens = self.words(self.length())
        self.texts[i] = q_tokens

        window = range(i + 1, min(i + c.window_w, len(self.slots) - 1) + 1)
        busy = {self.slots[s].author for s in window if self.slots[s].author is not None}
        n_answers = int(self.rng.choice(3, p=c.answers_per_question))
        placed = []
        answerer = None
        for k in range(n_answers):
            target = i + self.delay()
            spot = next((s for s in range(target, i + c.window_w + 1) if self.free(s)), None)
            if spot is None:
                continue
            if answerer is None or self.rng.random() < 0.5:
                candidate = self.pick_user(exclude=busy | {asker} | self.slots[spot].banned)
                if candidate is None:
                    continue
                answerer = candidate
            elif answerer in self.slots[spot].banned:
                continue
            s = self.slots[spot]
            s.kind, s.author, s.question = "answer", answerer, i
            placed.append(spot)
        if placed and self.rng.random() < c.mention_prob:
            mentioned = self.slots[placed[0]].author
            slot.mention = mentioned
            own = {p for p in placed if self.slots[p].author == mentioned}
            for s in window:
                if s not in own:
                    self.slots[s].banned.add(mentioned)
        for spot in placed:
            self.texts[spot] = self.on_topic(q_tokens)
            if self.rng.random() < c.ack_prob and self.free(spot + 1) and asker not in self.slots[spot + 1].banned:
                ack = self.slots[spot + 1]
                ack.kind, ack.author, ack.question = "ack", asker, i
                self.texts[spot + 1] = [ACK_TEXTS[self.rng.integers(len(ACK_TEXTS))]]
        return [(i, spot) for spot in placed]

    def on_topic(self, q_tokens):
        overlap = self.rng.random(self.length()) < self.c.topic_overlap
        fresh = iter(self.words(int((~overlap).sum())))
        return [q_tokens[self.rng.integers(len(q_tokens))] if hit else next(fresh) for hit in overlap]

    def chatter_tokens(self, i):
        # chatter may carry on the topic of a question still open at slot i
        if self.rng.random() < self.c.chatter_topic_prob:
            lo = max(0, i - self.c.window_w)
            open_q = [j for j in range(lo, i) if self.slots[j].kind == "question"]
            if open_q:
                return self.on_topic(self.texts[open_q[self.rng.integers(len(open_q))]])
        return self.words(self.length())

    def render(self, i):
        slot = self.slots[i]
        if slot.kind == "question":
            opener = QUESTION_OPENERS[self.rng.integers(len(QUESTION_OPENERS))]
            body = " ".join(self.texts[i])
            prefix = f"<@{slot.mention}>: " if slot.mention else ""
            return f"{prefix}{opener} {body}?"
        if slot.kind in ("answer", "ack"):
            return " ".join(self.texts[i])
        tokens = self.chatter_tokens(i)
        if self.rng.random() < self.c.noise_mention_prob:
            other = self.pick_user(exclude={slot.author})
            if other is not None:
                return f"<@{other}> " + " ".join(tokens)
        return " ".join(tokens)


def generate(config: GenConfig = GenConfig()) -> tuple[Feed, QuestionSet, set[tuple[str, str]]]:
    """Generate ``(feed, questions, gold_pairs)``; fully determined by ``config.rng_seed``."""
    g = _Generator(config)
    gold_slots = g.run()
    gaps = g.rng.exponential(config.inter_message_dt, size=config.n_messages)
    ts = START_TS + np.cumsum(gaps)
    ids = [f"m{i:05d}" for i in range(config.n_messages)]
    records = [
        {"id": ids[i], "ts": round(float(ts[i]), 3), "user": g.slots[i].author, "text": g.render(i)}
        for i in range(config.n_messages)
    ]
    feed = build_feed(records)
    questions = QuestionSet(tuple(ids[i] for i, s in enumerate(g.slots) if s.kind == "question"), source="external-tags")
    gold = {(ids[q], ids[a]) for q, a in gold_slots}
    return feed, questions, gold


def corpus_stats(feed: Feed, questions: QuestionSet, gold) -> dict:
    counts = Counter(m.author for m in feed)
    n = len(feed)
    return {
        "n_messages": n,
        "n_users": len(counts),
        "median_msgs_per_user": statistics.median(counts.values()) if counts else 0,
        "n_questions": len(questions),
        "question_rate": len(questions) / n if n else 0.0,
        "n_gold_pairs": len(set(gold)),
    }
