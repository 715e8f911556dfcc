"""Corpus ingestion and the two tokenizations everything downstream consumes.

Each tweet is tokenized twice.  The *model stream* is lowercased, stripped of
URLs, punctuation and stopwords, and routes ``#hashtags`` into a separate
channel; it feeds the classifier features.  The *chain stream* is a plain
whitespace split with case and punctuation left untouched; it is what the
Markov chain is trained on and what the rewriter edits, so that rewritten
text still reads like the original author wrote it.
"""

from __future__ import annotations

import csv
import json
import string
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

from .errors import MalformedRowError, MissingColumnError

# Characters stripped from the edges of model tokens: ASCII punctuation plus
# the unicode quotes/dashes/ellipsis common in tweet text.  Emoji are not
# punctuation and deliberately pass through as ordinary tokens.
PUNCT_CHARS = string.punctuation + "¡¿‘’“”«»–—…"

CSV_COLUMNS = ("id", "text", "kind", "hashtags", "label")


class TweetKind(Enum):
    ORIGINAL = "original"
    RETWEET = "retweet"
    REPLY = "reply"


class Label(Enum):
    TROLL = "troll"
    NONTROLL = "nontroll"


@dataclass(frozen=True)
class TweetRecord:
    """One tweet as ingested: raw text plus the structured columns."""

    id: str
    text: str
    kind: TweetKind
    hashtags: tuple[str, ...] = ()
    label: Label | None = None

    def __post_init__(self):
        for tag in self.hashtags:
            if "#" in tag or any(ch.isspace() for ch in tag) or not tag:
                raise ValueError(f"invalid hashtag {tag!r}: no '#', no whitespace, non-empty")


@dataclass(frozen=True)
class TokenizedTweet:
    """Both token streams for one tweet, plus the per-tweet scalars."""

    model_tokens: tuple[str, ...]
    chain_tokens: tuple[str, ...]
    hashtag_tokens: tuple[str, ...]
    cap_ratio: float
    kind: TweetKind


def capitalization_ratio(text: str) -> float:
    """Uppercase letters over all alphabetic characters; 0.0 if there are none."""
    alpha = [ch for ch in text if ch.isalpha()]
    if not alpha:
        return 0.0
    return sum(1 for ch in alpha if ch.isupper()) / len(alpha)


def strip_punctuation(token: str) -> str:
    """Strip leading/trailing punctuation, keeping interior marks ("don't")."""
    return token.strip(PUNCT_CHARS)


def tokenize(record: TweetRecord, stoplist: frozenset[str] | set[str]) -> TokenizedTweet:
    """Produce the model and chain streams for one record.

    Model stream rules, applied per whitespace token: URLs are dropped,
    ``#``-prefixed tokens are routed to the hashtag channel (lowercased,
    stripped), ``@`` mentions keep their token with the ``@`` removed, and
    everything else is lowercased, edge-punctuation-stripped, then dropped if
    empty or in the stoplist.  The chain stream is the untouched whitespace
    split; joining it with single spaces reproduces the whitespace-normalized
    input.
    """
    chain = tuple(record.text.split())
    model: list[str] = []
    inline_tags: list[str] = []
    for raw in chain:
        lowered = raw.lower()
        if lowered.startswith("http://") or lowered.startswith("https://"):
            continue
        if raw.startswith("#"):
            tag = strip_punctuation(raw[1:]).lower()
            if tag:
                inline_tags.append(tag)
            continue
        token = raw[1:] if raw.startswith("@") else raw
        token = strip_punctuation(token).lower()
        if token and token not in stoplist:
            model.append(token)
    # Structured hashtags first, then inline ones; lowercase and dedup.
    tags: list[str] = []
    for tag in [t.lower() for t in record.hashtags] + inline_tags:
        if tag not in tags:
            tags.append(tag)
    return TokenizedTweet(
        model_tokens=tuple(model),
        chain_tokens=chain,
        hashtag_tokens=tuple(tags),
        cap_ratio=capitalization_ratio(record.text),
        kind=record.kind,
    )


def _parse_kind(value: str, line_no: int) -> TweetKind:
    try:
        return TweetKind(value.strip().lower())
    except ValueError:
        raise MalformedRowError(line_no, f"unknown tweet kind {value!r}") from None


def _parse_label(value: str | None, line_no: int) -> Label | None:
    if value is None or value.strip() == "":
        return None
    try:
        return Label(value.strip().lower())
    except ValueError:
        raise MalformedRowError(line_no, f"unknown label {value!r}") from None


def _parse_hashtags(raw_tags, line_no: int) -> tuple[str, ...]:
    tags = []
    for tag in raw_tags:
        tag = tag.strip()
        if tag.startswith("#"):
            tag = tag[1:]
        if not tag:
            continue
        if "#" in tag or any(ch.isspace() for ch in tag):
            raise MalformedRowError(line_no, f"invalid hashtag {tag!r}")
        tags.append(tag)
    return tuple(tags)


def _load_csv(path: Path) -> list[TweetRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return []  # empty file
        missing = [c for c in ("id", "text", "kind", "hashtags") if c not in reader.fieldnames]
        if missing:
            raise MissingColumnError(f"{path}: missing column(s) {', '.join(missing)}")
        records = []
        for row in reader:
            line_no = reader.line_num
            if row.get("text") is None or row.get("id") is None or row.get("kind") is None:
                raise MalformedRowError(line_no, "row shorter than header")
            raw_tags = (row.get("hashtags") or "").split(";")
            records.append(
                TweetRecord(
                    id=row["id"],
                    text=row["text"],
                    kind=_parse_kind(row["kind"], line_no),
                    hashtags=_parse_hashtags(raw_tags, line_no),
                    label=_parse_label(row.get("label"), line_no),
                )
            )
    return records


def _load_jsonl(path: Path) -> list[TweetRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRowError(line_no, f"invalid JSON: {exc}") from None
            if not isinstance(obj, dict):
                raise MalformedRowError(line_no, "expected a JSON object")
            for field in ("id", "text", "kind"):
                if field not in obj:
                    raise MalformedRowError(line_no, f"missing field {field!r}")
            raw_tags = obj.get("hashtags") or []
            if not isinstance(raw_tags, list):
                raise MalformedRowError(line_no, "hashtags must be a list")
            records.append(
                TweetRecord(
                    id=str(obj["id"]),
                    text=str(obj["text"]),
                    kind=_parse_kind(str(obj["kind"]), line_no),
                    hashtags=_parse_hashtags(raw_tags, line_no),
                    label=_parse_label(obj.get("label"), line_no),
                )
            )
    return records


def load_corpus(path, format: str | None = None) -> list[TweetRecord]:
    """Load a labelled or unlabelled corpus from CSV or JSONL.

    CSV files need a header row ``id,text,kind,hashtags,label`` (``label``
    optional); hashtags are ``;``-separated.  JSONL mirrors the field names.
    An empty file yields an empty list.
    """
    path = Path(path)
    if format is None:
        format = "jsonl" if path.suffix.lower() in (".jsonl", ".ndjson") else "csv"
    format = format.lower()
    if format == "csv":
        return _load_csv(path)
    if format == "jsonl":
        return _load_jsonl(path)
    raise ValueError(f"unknown corpus format {format!r}")


def load_stoplist(path) -> frozenset[str]:
    """One token per line; ``#``-prefixed comment lines and blanks ignored."""
    tokens = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens.add(line.lower())
    return frozenset(tokens)


def default_stoplist() -> frozenset[str]:
    """The stoplist shipped with the package (negation words are kept out)."""
    ref = resources.files("trollkit.data").joinpath("stopwords.txt")
    with resources.as_file(ref) as path:
        return load_stoplist(path)
