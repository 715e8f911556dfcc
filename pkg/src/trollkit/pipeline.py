"""End-to-end featurization: records in, assembled sparse vectors out.

A :class:`Featurizer` bundles the stoplist, rule set, sentiment lexicon and
fitted :class:`FeatureSpace` so that training, classification, and the
arms-race harness all push tweets through exactly the same columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import TweetRecord, default_stoplist, tokenize
from .features import RuleSet, SentimentLexicon, default_lexicon, default_rules, engineer, feature_names
from .vectorspace import FeatureSpace, SparseVector, assemble, fit_vocabulary, tfidf_vector

DEFAULT_TEXT_MIN_DF = 0.01  # fraction of documents
DEFAULT_HASHTAG_MIN_DF = 2  # absolute document count


@dataclass(frozen=True)
class Featurizer:
    stoplist: frozenset[str]
    rules: RuleSet
    lexicon: SentimentLexicon
    space: FeatureSpace

    def tokenized(self, record: TweetRecord):
        return tokenize(record, self.stoplist)

    def vector(self, record: TweetRecord) -> SparseVector:
        tok = self.tokenized(record)
        eng = engineer(tok, self.rules, self.lexicon)
        text_vec = tfidf_vector(tok.model_tokens, self.space.text_vocab)
        hash_vec = tfidf_vector(tok.hashtag_tokens, self.space.hashtag_vocab)
        return assemble(eng.values(), text_vec, hash_vec, self.space)

    def vectors(self, records) -> list[SparseVector]:
        return [self.vector(r) for r in records]

    def text_block_vector(self, record: TweetRecord) -> tuple[SparseVector, SparseVector]:
        """Just the two TF-IDF blocks, for the text-only substitute model."""
        tok = self.tokenized(record)
        return (
            tfidf_vector(tok.model_tokens, self.space.text_vocab),
            tfidf_vector(tok.hashtag_tokens, self.space.hashtag_vocab),
        )


def fit_featurizer(
    records,
    stoplist: frozenset[str] | None = None,
    rules: RuleSet | None = None,
    lexicon: SentimentLexicon | None = None,
    text_min_df: float | int = DEFAULT_TEXT_MIN_DF,
    hashtag_min_df: float | int = DEFAULT_HASHTAG_MIN_DF,
) -> Featurizer:
    """Fit both vocabularies on a corpus and freeze the column layout."""
    stoplist = default_stoplist() if stoplist is None else stoplist
    rules = default_rules() if rules is None else rules
    lexicon = default_lexicon() if lexicon is None else lexicon
    tokenized = [tokenize(r, stoplist) for r in records]
    space = FeatureSpace(
        engineered_names=feature_names(rules),
        text_vocab=fit_vocabulary([t.model_tokens for t in tokenized], text_min_df),
        hashtag_vocab=fit_vocabulary([t.hashtag_tokens for t in tokenized], hashtag_min_df),
    )
    return Featurizer(stoplist=stoplist, rules=rules, lexicon=lexicon, space=space)


def text_block_matrix(featurizer: Featurizer, records) -> np.ndarray:
    """Dense (n_records, V_text + V_hash) matrix of the two TF-IDF blocks."""
    space = featurizer.space
    n_cols = space.n_text + space.n_hashtag
    X = np.zeros((len(records), n_cols))
    for i, record in enumerate(records):
        text_vec, hash_vec = featurizer.text_block_vector(record)
        X[i, text_vec.indices] = text_vec.values
        X[i, space.n_text + hash_vec.indices] = hash_vec.values
    return X
