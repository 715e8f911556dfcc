"""Engineered feature block: hashtag categories, tropes, sentiment, behaviour.

The rules are data, not code.  A :class:`RuleSet` holds an ordered list of
hashtag categories (substring patterns over individual hashtags) and an
ordered list of tropes (conjunctions of alternative-stem groups over the
model token stream), so a new wave of recycled slogans only needs a new JSON
file.  The defaults shipped in-repo target the early-2020 pandemic discourse.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping

from .corpus import TokenizedTweet, TweetKind

# Normalization constant for squashing raw valence sums into (-1, 1).
SENTIMENT_ALPHA = 15.0
# A negator flips a valence hit when it occurs within this many preceding tokens.
NEGATION_WINDOW = 3

KIND_ORDER = (TweetKind.ORIGINAL, TweetKind.RETWEET, TweetKind.REPLY)


@dataclass(frozen=True)
class RuleSet:
    """Ordered hashtag categories and trope rules.

    ``hashtag_categories``: (name, patterns); a category fires when any
    hashtag contains any pattern as a substring.
    ``trope_rules``: (name, groups); a trope fires when *every* group has at
    least one model token matching one of its stems by prefix ("effect"
    matches "effective").
    """

    hashtag_categories: tuple[tuple[str, tuple[str, ...]], ...]
    trope_rules: tuple[tuple[str, tuple[tuple[str, ...], ...]], ...]

    def __post_init__(self):
        names = [n for n, _ in self.hashtag_categories] + [n for n, _ in self.trope_rules]
        if len(set(names)) != len(names):
            raise ValueError("category and trope names must be unique")
        for name, patterns in self.hashtag_categories:
            _check_patterns(name, patterns)
        for name, groups in self.trope_rules:
            if not groups:
                raise ValueError(f"trope {name!r} has no groups")
            for group in groups:
                _check_patterns(name, group)

    @property
    def n_categories(self) -> int:
        return len(self.hashtag_categories)

    @property
    def n_tropes(self) -> int:
        return len(self.trope_rules)


def _check_patterns(name, patterns):
    if not patterns:
        raise ValueError(f"rule {name!r} has an empty pattern list")
    for pat in patterns:
        if not pat or pat != pat.lower():
            raise ValueError(f"rule {name!r}: patterns must be non-empty lowercase, got {pat!r}")


@dataclass(frozen=True)
class SentimentLexicon:
    """Token valences (typically in [-4, 4]) plus the set of negation tokens."""

    valences: Mapping[str, float]
    negators: frozenset[str]

    def __post_init__(self):
        for token, valence in self.valences.items():
            if token != token.lower():
                raise ValueError(f"lexicon tokens must be lowercase: {token!r}")
            if not math.isfinite(valence):
                raise ValueError(f"non-finite valence for {token!r}")


@dataclass(frozen=True)
class EngineeredFeatures:
    """The fixed-order engineered block for one tweet."""

    hashtag_flags: tuple[int, ...]
    trope_flags: tuple[int, ...]
    sentiment: float
    kind_onehot: tuple[int, ...]
    cap_ratio: float

    def values(self) -> tuple[float, ...]:
        """Concatenate in block order: categories, tropes, sentiment, kind, caps."""
        return (
            tuple(float(f) for f in self.hashtag_flags)
            + tuple(float(f) for f in self.trope_flags)
            + (self.sentiment,)
            + tuple(float(f) for f in self.kind_onehot)
            + (self.cap_ratio,)
        )


def feature_names(rules: RuleSet) -> tuple[str, ...]:
    """Column names of the engineered block, in output order."""
    return (
        tuple(name for name, _ in rules.hashtag_categories)
        + tuple(name for name, _ in rules.trope_rules)
        + ("sentiment",)
        + tuple(f"kind_{k.value}" for k in KIND_ORDER)
        + ("cap_ratio",)
    )


def match_hashtag_categories(hashtag_tokens, rules: RuleSet) -> tuple[int, ...]:
    """Binary flag per category: any hashtag contains any pattern as substring."""
    flags = []
    for _, patterns in rules.hashtag_categories:
        hit = any(pat in tag for tag in hashtag_tokens for pat in patterns)
        flags.append(1 if hit else 0)
    return tuple(flags)


def match_tropes(model_tokens, rules: RuleSet) -> tuple[int, ...]:
    """Binary flag per trope: every group needs >=1 token matching by prefix."""
    flags = []
    for _, groups in rules.trope_rules:
        hit = all(
            any(tok.startswith(stem) for tok in model_tokens for stem in group)
            for group in groups
        )
        flags.append(1 if hit else 0)
    return tuple(flags)


def sentiment_score(model_tokens, lexicon: SentimentLexicon) -> float:
    """Sum lexicon valences (sign-flipped after a nearby negator) and squash.

    The raw sum ``s`` maps to ``s / sqrt(s^2 + 15)``, so the score stays
    strictly inside (-1, 1) and keeps the sign of ``s``.  No hits yield 0.
    """
    s = 0.0
    for i, token in enumerate(model_tokens):
        valence = lexicon.valences.get(token)
        if valence is None:
            continue
        window = model_tokens[max(0, i - NEGATION_WINDOW) : i]
        if any(tok in lexicon.negators for tok in window):
            valence = -valence
        s += valence
    if s == 0.0:
        return 0.0
    return s / math.sqrt(s * s + SENTIMENT_ALPHA)


def engineer(tweet: TokenizedTweet, rules: RuleSet, lexicon: SentimentLexicon) -> EngineeredFeatures:
    """Compute the full engineered block for one tokenized tweet."""
    return EngineeredFeatures(
        hashtag_flags=match_hashtag_categories(tweet.hashtag_tokens, rules),
        trope_flags=match_tropes(tweet.model_tokens, rules),
        sentiment=sentiment_score(tweet.model_tokens, lexicon),
        kind_onehot=tuple(1 if tweet.kind is k else 0 for k in KIND_ORDER),
        cap_ratio=tweet.cap_ratio,
    )


def load_rules(path) -> RuleSet:
    """Load a RuleSet from its JSON file format."""
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    return RuleSet(
        hashtag_categories=tuple(
            (cat["name"], tuple(cat["patterns"])) for cat in obj["hashtag_categories"]
        ),
        trope_rules=tuple(
            (tr["name"], tuple(tuple(group) for group in tr["groups"])) for tr in obj["tropes"]
        ),
    )


def load_lexicon(valence_path, negator_path) -> SentimentLexicon:
    """Load token valences (``token<TAB>valence``) and one-per-line negators."""
    valences = {}
    for line in Path(valence_path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        token, _, raw = line.partition("\t")
        valences[token.strip()] = float(raw)
    negators = set()
    for line in Path(negator_path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            negators.add(line.lower())
    return SentimentLexicon(valences=valences, negators=frozenset(negators))


def default_rules() -> RuleSet:
    ref = resources.files("trollkit.data").joinpath("rules.json")
    with resources.as_file(ref) as path:
        return load_rules(path)


def default_lexicon() -> SentimentLexicon:
    data = resources.files("trollkit.data")
    with resources.as_file(data.joinpath("sentiment_lexicon.tsv")) as vpath:
        with resources.as_file(data.joinpath("negators.txt")) as npath:
            return load_lexicon(vpath, npath)
