"""Chat-log ingestion: feed parsing, mentions, question and acknowledgment detection."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import DuplicateId, FormatError, IoError

MENTION_RE = re.compile(r"<@([^<>]+?)>")
# Slack wraps links in angle brackets; bare links are matched too.
URL_RE = re.compile(r"<\s*(?:https?|ftp)://[^>]*>|(?:https?|ftp)://\S+|www\.\S+", re.IGNORECASE)
EMOJI_ALIAS_RE = re.compile(r":[a-z0-9_+\-]+:")
THUMBS_UP_ALIASES = (":+1:", ":thumbsup:", ":thumbs_up:", ":thumbs-up:")
THUMBS_UP = "\U0001F44D"

INTERROGATIVES = frozenset(
    "who what when where why how which is are can should do does did will would "
    "could any anyone".split()
)
ACK_LEXICON = (
    "ok", "okay", "thanks", "thank you", "thx", "yes", "yep", "gotcha",
    "right", "sure", THUMBS_UP, "thumbs up",
)

REQUIRED_KEYS = ("id", "ts", "user", "text")


@dataclass(frozen=True)
class Message:
    id: str
    index: int
    timestamp: float
    author: str
    text: str
    mentions: frozenset = frozenset()


@dataclass(frozen=True)
class Feed:
    messages: tuple[Message, ...] = ()
    _by_id: Mapping[str, Message] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self._by_id and self.messages:
            object.__setattr__(self, "_by_id", {m.id: m for m in self.messages})

    @property
    def users(self) -> frozenset:
        return frozenset(m.author for m in self.messages)

    def __len__(self):
        return len(self.messages)

    def __getitem__(self, index):
        return self.messages[index]

    def __iter__(self):
        return iter(self.messages)

    def get(self, message_id: str) -> Message:
        return self._by_id[message_id]

    def __contains__(self, message_id) -> bool:
        return message_id in self._by_id


@dataclass(frozen=True)
class QuestionSet:
    question_ids: tuple[str, ...] = ()
    source: str = "heuristic"  # or "external-tags"

    def __contains__(self, message_id) -> bool:
        return message_id in self.question_ids

    def __len__(self):
        return len(self.question_ids)

    def __iter__(self):
        return iter(self.question_ids)


@dataclass(frozen=True)
class QuestionDetectorConfig:
    use_question_mark: bool = True
    use_lexicon: bool = True
    lexicon: frozenset = INTERROGATIVES


@dataclass(frozen=True)
class AckConfig:
    max_ack_tokens: int = 3
    lexicon: tuple[str, ...] = ACK_LEXICON


def extract_mentions(text: str, pattern: re.Pattern = MENTION_RE) -> frozenset:
    """Return the set of user ids referenced as ``<@user>`` in *text*."""
    return frozenset(m.group(1) for m in pattern.finditer(text))


def build_feed(records: Iterable[Mapping], mention_pattern: re.Pattern = MENTION_RE) -> Feed:
    """Build a feed from already-validated ``{id, ts, user, text}`` records.

    Messages are ordered by timestamp, ties broken by record order.
    """
    records = list(records)
    seen = set()
    for lineno, rec in enumerate(records, 1):
        if rec["id"] in seen:
            raise DuplicateId(f"duplicate message id {rec['id']!r}", line=lineno)
        seen.add(rec["id"])
    order = sorted(range(len(records)), key=lambda i: (float(records[i]["ts"]), i))
    messages = tuple(
        Message(
            id=records[i]["id"],
            index=pos,
            timestamp=float(records[i]["ts"]),
            author=records[i]["user"],
            text=records[i]["text"],
            mentions=extract_mentions(records[i]["text"], mention_pattern),
        )
        for pos, i in enumerate(order)
    )
    return Feed(messages)


def _check_record(obj, lineno, path):
    if not isinstance(obj, dict):
        raise FormatError("expected a JSON object", line=lineno, path=path)
    missing = [k for k in REQUIRED_KEYS if k not in obj]
    if missing:
        raise FormatError(f"missing key(s) {', '.join(missing)}", line=lineno, path=path)
    for key in ("id", "user", "text"):
        if not isinstance(obj[key], str):
            raise FormatError(f"{key!r} must be a string", line=lineno, path=path)
    ts = obj["ts"]
    if isinstance(ts, bool) or not isinstance(ts, (int, float)) or not math.isfinite(ts) or ts < 0:
        raise FormatError("'ts' must be a finite non-negative number", line=lineno, path=path)


def read_jsonl(path) -> list[tuple[int, object]]:
    """Read a JSON Lines file, returning ``(line_number, object)`` pairs; blank lines are skipped."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"not valid UTF-8 ({exc.reason})", path=path) from exc
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            rows.append((lineno, json.loads(line)))
        except json.JSONDecodeError as exc:
            raise FormatError(f"malformed JSON ({exc.msg})", line=lineno, path=path) from exc
    return rows


def parse_feed(path, format: str = "jsonl", mention_pattern: re.Pattern = MENTION_RE) -> Feed:
    if format != "jsonl":
        raise FormatError(f"unsupported feed format {format!r}")
    rows = read_jsonl(path)
    records = []
    seen = {}
    for lineno, obj in rows:
        _check_record(obj, lineno, path)
        if obj["id"] in seen:
            raise DuplicateId(
                f"duplicate message id {obj['id']!r} (first seen on line {seen[obj['id']]})",
                line=lineno,
                path=path,
            )
        seen[obj["id"]] = lineno
        records.append(obj)
    return build_feed(records, mention_pattern)


def strip_urls(text: str) -> str:
    return URL_RE.sub(" ", text)


def _first_word(text: str) -> str | None:
    text = MENTION_RE.sub(" ", strip_urls(text))
    match = re.search(r"\w+", text.casefold())
    return match.group(0) if match else None


def is_question_text(text: str, config: QuestionDetectorConfig = QuestionDetectorConfig()) -> bool:
    if config.use_question_mark and "?" in strip_urls(text):
        return True
    if config.use_lexicon and _first_word(text) in config.lexicon:
        return True
    return False


def detect_questions(feed: Feed, config: QuestionDetectorConfig = QuestionDetectorConfig()) -> QuestionSet:
    ids = tuple(m.id for m in feed if is_question_text(m.text, config))
    return QuestionSet(ids, source="heuristic")


def _ack_tokens(text: str) -> list[str]:
    text = text.casefold()
    for alias in THUMBS_UP_ALIASES:
        text = text.replace(alias, f" {THUMBS_UP} ")
    text = EMOJI_ALIAS_RE.sub(" ", text)
    text = MENTION_RE.sub(" ", strip_urls(text))
    return re.findall(rf"[\w']+|{THUMBS_UP}", text)


def is_acknowledgment(text: str, config: AckConfig = AckConfig()) -> bool:
    tokens = _ack_tokens(text)
    if not tokens or len(tokens) > config.max_ack_tokens:
        return False
    phrases = [tuple(p.casefold().split()) for p in config.lexicon]
    for phrase in phrases:
        n = len(phrase)
        if any(tuple(tokens[i:i + n]) == phrase for i in range(len(tokens) - n + 1)):
            return True
    return False


def load_question_tags(path, feed: Feed) -> QuestionSet:
    """Load a ``{"question_id": ...}`` JSONL tag file; ids are returned in feed order."""
    wanted = set()
    for lineno, obj in read_jsonl(path):
        if not isinstance(obj, dict) or not isinstance(obj.get("question_id"), str):
            raise FormatError("expected {\"question_id\": string}", line=lineno, path=path)
        if obj["question_id"] not in feed:
            raise FormatError(f"unknown message id {obj['question_id']!r}", line=lineno, path=path)
        wanted.add(obj["question_id"])
    return QuestionSet(tuple(m.id for m in feed if m.id in wanted), source="external-tags")


def question_tag_rows(questions: QuestionSet) -> list[dict]:
    return [{"question_id": qid} for qid in questions]


def feed_rows(feed: Feed) -> list[dict]:
    return [{"id": m.id, "ts": m.timestamp, "user": m.author, "text": m.text} for m in feed]

