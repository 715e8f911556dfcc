"""TF-IDF vocabularies, sparse vectors, and the assembled feature space.

The full feature vector is a block concatenation

    [ engineered block | text TF-IDF | hashtag TF-IDF ]

and the :class:`FeatureSpace` keeps a provenance map from every column back
to the engineered feature name or vocabulary token it came from, which is
what lets the attack side turn tree importances back into words.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, EmptyCorpusError
from .serialize import content_hash, read_artifact, write_artifact


@dataclass(frozen=True, eq=False)
class SparseVector:
    """Sorted-index sparse vector with a fixed logical dimension."""

    indices: np.ndarray  # int64, strictly increasing
    values: np.ndarray  # float64, finite and nonzero
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "indices", np.asarray(self.indices, dtype=np.int64))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        if self.indices.shape != self.values.shape or self.indices.ndim != 1:
            raise ValueError("indices and values must be parallel 1-d arrays")
        if self.indices.size:
            if np.any(np.diff(self.indices) <= 0):
                raise ValueError("indices must be strictly increasing")
            if self.indices[0] < 0 or self.indices[-1] >= self.dim:
                raise ValueError("index out of range")
            if not np.all(np.isfinite(self.values)) or np.any(self.values == 0.0):
                raise ValueError("values must be finite and nonzero")

    @classmethod
    def from_entries(cls, entries: dict[int, float], dim: int) -> "SparseVector":
        """Build from an index->value mapping, dropping exact zeros."""
        items = sorted((i, v) for i, v in entries.items() if v != 0.0)
        idx = np.array([i for i, _ in items], dtype=np.int64)
        val = np.array([v for _, v in items], dtype=np.float64)
        return cls(indices=idx, values=val, dim=dim)

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.dim, dtype=np.float64)
        dense[self.indices] = self.values
        return dense

    def dot_dense(self, w: np.ndarray) -> float:
        if w.shape[0] != self.dim:
            raise DimensionMismatchError(f"vector dim {self.dim} vs weights {w.shape[0]}")
        return float(np.dot(w[self.indices], self.values))

    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.values, self.values)))

    def __eq__(self, other):
        return (
            isinstance(other, SparseVector)
            and self.dim == other.dim
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
        )


def sparse_dot(a: SparseVector, b: SparseVector) -> float:
    """Inner product of two sparse vectors of equal dimension."""
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dims {a.dim} vs {b.dim}")
    common, ia, ib = np.intersect1d(a.indices, b.indices, assume_unique=True, return_indices=True)
    if common.size == 0:
        return 0.0
    return float(np.dot(a.values[ia], b.values[ib]))


@dataclass(frozen=True)
class Vocabulary:
    """Token->column mapping with the document frequencies it was fit on."""

    index: dict[str, int]
    df: dict[str, int]
    n_docs: int
    min_df: float | int

    @property
    def size(self) -> int:
        return len(self.index)

    def idf(self, token: str) -> float:
        return math.log((1 + self.n_docs) / (1 + self.df[token])) + 1.0

    def tokens_in_order(self) -> list[str]:
        return sorted(self.index, key=self.index.get)


def fit_vocabulary(token_lists, min_df: float | int = 0.0) -> Vocabulary:
    """Fit a vocabulary, dropping tokens seen in too few documents.

    A float ``min_df`` is a fraction of documents (threshold
    ``ceil(min_df * N)``); an int is an absolute document count.  Retained
    tokens are assigned columns in lexicographic order.
    """
    token_lists = list(token_lists)
    n_docs = len(token_lists)
    if n_docs == 0:
        raise EmptyCorpusError("cannot fit a vocabulary on zero documents")
    if isinstance(min_df, float):
        if not 0.0 <= min_df <= 1.0:
            raise ValueError("fractional min_df must be within [0, 1]")
        threshold = math.ceil(min_df * n_docs)
    else:
        if min_df < 0:
            raise ValueError("absolute min_df must be >= 0")
        threshold = min_df
    df: Counter[str] = Counter()
    for tokens in token_lists:
        df.update(set(tokens))
    retained = sorted(tok for tok, count in df.items() if count >= threshold)
    return Vocabulary(
        index={tok: i for i, tok in enumerate(retained)},
        df={tok: df[tok] for tok in retained},
        n_docs=n_docs,
        min_df=min_df,
    )


def tfidf_vector(tokens, vocab: Vocabulary) -> SparseVector:
    """Raw-count tf times smooth idf, L2-normalized; OOV tokens are ignored.

    idf(t) = ln((1 + N) / (1 + df(t))) + 1, which is strictly positive, so
    every retained column stays live.  A document with no in-vocabulary
    tokens maps to the zero vector.
    """
    counts: Counter[str] = Counter(tok for tok in tokens if tok in vocab.index)
    if not counts:
        return SparseVector(np.empty(0, dtype=np.int64), np.empty(0), dim=vocab.size)
    entries = {vocab.index[tok]: count * vocab.idf(tok) for tok, count in counts.items()}
    vec = SparseVector.from_entries(entries, dim=vocab.size)
    norm = vec.norm()
    return SparseVector(indices=vec.indices, values=vec.values / norm, dim=vocab.size)


@dataclass(frozen=True)
class FeatureSpace:
    """Column layout of the assembled vector, with full provenance."""

    engineered_names: tuple[str, ...]
    text_vocab: Vocabulary
    hashtag_vocab: Vocabulary
    _text_tokens: tuple[str, ...] = field(init=False, repr=False, compare=False)
    _hash_tokens: tuple[str, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_text_tokens", tuple(self.text_vocab.tokens_in_order()))
        object.__setattr__(self, "_hash_tokens", tuple(self.hashtag_vocab.tokens_in_order()))

    @property
    def n_engineered(self) -> int:
        return len(self.engineered_names)

    @property
    def n_text(self) -> int:
        return self.text_vocab.size

    @property
    def n_hashtag(self) -> int:
        return self.hashtag_vocab.size

    @property
    def dim(self) -> int:
        return self.n_engineered + self.n_text + self.n_hashtag

    def provenance(self, column: int) -> tuple[str, str]:
        """Map a column to ("engineered"|"text"|"hashtag", name-or-token)."""
        if not 0 <= column < self.dim:
            raise DimensionMismatchError(f"column {column} outside 0..{self.dim - 1}")
        if column < self.n_engineered:
            return ("engineered", self.engineered_names[column])
        column -= self.n_engineered
        if column < self.n_text:
            return ("text", self._text_tokens[column])
        return ("hashtag", self._hash_tokens[column - self.n_text])

    def to_payload(self) -> dict:
        return {
            "engineered_names": list(self.engineered_names),
            "text_vocab": _vocab_payload(self.text_vocab),
            "hashtag_vocab": _vocab_payload(self.hashtag_vocab),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "FeatureSpace":
        return cls(
            engineered_names=tuple(payload["engineered_names"]),
            text_vocab=_vocab_from_payload(payload["text_vocab"]),
            hashtag_vocab=_vocab_from_payload(payload["hashtag_vocab"]),
        )

    @property
    def fingerprint(self) -> str:
        """Content hash of the layout; models record it to refuse wrong spaces."""
        return content_hash(self.to_payload())


def _vocab_payload(vocab: Vocabulary) -> dict:
    return {
        "tokens": vocab.tokens_in_order(),
        "df": [vocab.df[tok] for tok in vocab.tokens_in_order()],
        "n_docs": vocab.n_docs,
        "min_df": vocab.min_df,
    }


def _vocab_from_payload(payload: dict) -> Vocabulary:
    tokens = payload["tokens"]
    return Vocabulary(
        index={tok: i for i, tok in enumerate(tokens)},
        df=dict(zip(tokens, payload["df"])),
        n_docs=payload["n_docs"],
        min_df=payload["min_df"],
    )


def save_feature_space(space: FeatureSpace, path, metadata: dict | None = None) -> None:
    payload = {"space": space.to_payload(), "fingerprint": space.fingerprint}
    if metadata:
        payload["provenance"] = metadata
    write_artifact(path, "feature-space", payload)


def load_feature_space(path, verify: bool = False) -> FeatureSpace:
    body = read_artifact(path, "feature-space", verify=verify)
    return FeatureSpace.from_payload(body["space"])


def assemble(
    engineered_values,
    text_vec: SparseVector,
    hash_vec: SparseVector,
    space: FeatureSpace,
) -> SparseVector:
    """Concatenate the three blocks at offsets [0, E, E + V_text)."""
    engineered_values = tuple(engineered_values)
    if len(engineered_values) != space.n_engineered:
        raise DimensionMismatchError(
            f"engineered block is {len(engineered_values)}, space expects {space.n_engineered}"
        )
    if text_vec.dim != space.n_text:
        raise DimensionMismatchError(f"text block is {text_vec.dim}, space expects {space.n_text}")
    if hash_vec.dim != space.n_hashtag:
        raise DimensionMismatchError(
            f"hashtag block is {hash_vec.dim}, space expects {space.n_hashtag}"
        )
    entries: dict[int, float] = {}
    for i, value in enumerate(engineered_values):
        if value != 0.0:
            entries[i] = float(value)
    offset = space.n_engineered
    for i, v in zip(text_vec.indices, text_vec.values):
        entries[offset + int(i)] = float(v)
    offset += space.n_text
    for i, v in zip(hash_vec.indices, hash_vec.values):
        entries[offset + int(i)] = float(v)
    return SparseVector.from_entries(entries, dim=space.dim)
