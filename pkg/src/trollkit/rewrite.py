"""Bigram Markov chain and the target-word rewriting engine.

The chain is trained on the raw whitespace token stream, case and
punctuation intact, so its states look like real tweet tokens ("brillig,",
"#COVID19").  Rewriting walks a tweet left to right: every occurrence of a
target word is replaced by a weighted draw from the transitions of the token
now preceding it, or removed outright when the chain has never seen that
preceding token (long hashtag runs end up here a lot).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import PUNCT_CHARS, strip_punctuation
from .serialize import content_hash, read_artifact, write_artifact
from .targets import TargetWordList

MAX_REDRAWS = 10


@dataclass(frozen=True)
class MarkovChain:
    """Bigram transition counts; probabilities are derived per initial state."""

    counts: dict[str, dict[str, int]]
    token_count: int

    def has_state(self, state: str) -> bool:
        return state in self.counts

    def transitions(self, state: str) -> list[tuple[str, float]]:
        """(next token, probability) pairs in lexicographic token order."""
        nexts = self.counts.get(state)
        if not nexts:
            return []
        total = sum(nexts.values())
        return [(tok, nexts[tok] / total) for tok in sorted(nexts)]

    @property
    def n_states(self) -> int:
        return len(self.counts)

    def to_payload(self) -> dict:
        return {
            "token_count": self.token_count,
            "transitions": {s: dict(sorted(n.items())) for s, n in sorted(self.counts.items())},
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "MarkovChain":
        return cls(
            counts={s: dict(n) for s, n in payload["transitions"].items()},
            token_count=payload["token_count"],
        )

    @property
    def fingerprint(self) -> str:
        return content_hash(self.to_payload())


def build_chain(token_streams) -> MarkovChain:
    """Count adjacent pairs within each stream; streams never chain together."""
    counts: dict[str, dict[str, int]] = {}
    token_count = 0
    for stream in token_streams:
        stream = list(stream)
        token_count += len(stream)
        for a, b in zip(stream, stream[1:]):
            nexts = counts.setdefault(a, {})
            nexts[b] = nexts.get(b, 0) + 1
    return MarkovChain(counts=counts, token_count=token_count)


def save_chain(chain: MarkovChain, path, metadata: dict | None = None) -> None:
    payload = chain.to_payload()
    if metadata:
        payload["provenance"] = metadata
    write_artifact(path, "markov-chain", payload)


def load_chain(path, verify: bool = False) -> MarkovChain:
    body = read_artifact(path, "markov-chain", verify=verify)
    return MarkovChain.from_payload(body)


@dataclass(frozen=True)
class RewriteEdit:
    position: int  # index into the input token stream
    original: str
    action: str  # "replaced" | "removed"
    replacement: str | None
    preceding: str | None


@dataclass(frozen=True)
class RewriteTrace:
    edits: tuple[RewriteEdit, ...]


def _token_core(token: str) -> tuple[str, str]:
    """(channel, normalized core) of a stream token for target matching."""
    if token.startswith("#"):
        return "hashtag", strip_punctuation(token[1:]).lower()
    stripped = token[1:] if token.startswith("@") else token
    return "text", strip_punctuation(stripped).lower()


def _is_target(token: str, targets: TargetWordList) -> bool:
    channel, core = _token_core(token)
    if not core:
        return False
    pool = targets.hashtag_tokens if channel == "hashtag" else targets.text_tokens
    return core in pool


def _trailing_punct(token: str) -> str:
    core = token.rstrip(PUNCT_CHARS)
    return token[len(core):]


def _adapt_punctuation(sampled: str, original: str) -> str:
    """Carry the replaced token's trailing punctuation onto the replacement.

    "borogoves," replaced by the state "wabe;" comes out as "wabe,": the
    sampled state is kept verbatim except that its own trailing mark yields
    to the one the original carried.  Without original trailing punctuation
    the sampled state is used untouched.
    """
    tail = _trailing_punct(original)
    if not tail:
        return sampled
    core = sampled.rstrip(PUNCT_CHARS)
    if not core:
        return sampled
    return core + tail


def _sample_state(chain: MarkovChain, state: str, rng) -> str:
    pairs = chain.transitions(state)
    draw = rng.random()
    acc = 0.0
    for token, prob in pairs:
        acc += prob
        if draw < acc:
            return token
    return pairs[-1][0]  # guard against accumulated float error


def rewrite(
    tokens, targets: TargetWordList, chain: MarkovChain, seed: int
) -> tuple[list[str], RewriteTrace]:
    """Replace or remove every target occurrence in one chain-token stream.

    The preceding state is read from the output built so far, so edits
    cascade left to right.  Sampled replacements that are themselves targets
    are redrawn (at most 10 times) and the occurrence is removed when the
    redraws run out, when the token opens the stream, or when the chain has
    no transitions for the preceding token.  Deterministic under ``seed``.
    """
    rng = np.random.default_rng(seed)
    output: list[str] = []
    edits: list[RewriteEdit] = []
    for position, token in enumerate(tokens):
        if not _is_target(token, targets):
            output.append(token)
            continue
        preceding = output[-1] if output else None
        replacement = None
        if preceding is not None and chain.has_state(preceding):
            for _ in range(1 + MAX_REDRAWS):
                candidate = _sample_state(chain, preceding, rng)
                if not _is_target(candidate, targets):
                    replacement = _adapt_punctuation(candidate, token)
                    break
        if replacement is None:
            edits.append(RewriteEdit(position, token, "removed", None, preceding))
        else:
            edits.append(RewriteEdit(position, token, "replaced", replacement, preceding))
            output.append(replacement)
    assert not any(_is_target(tok, targets) for tok in output)
    return output, RewriteTrace(edits=tuple(edits))
