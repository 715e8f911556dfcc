"""Substitute decision tree and statistical selection of target words.

The attack side never sees the deployed classifier's internals.  It trains a
single CART tree on the text-only feature blocks, reads Gini feature
importances off it, and keeps the columns whose presence is positively and
significantly correlated with the troll label.  Provenance then maps those
columns back to the actual words and hashtags worth rewriting.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betainc

from .errors import (
    ConstantVectorError,
    DimensionMismatchError,
    EmptySetError,
    LengthMismatchError,
    SingleClassError,
)
from .serialize import content_hash, read_artifact, write_artifact

P_VALUE_CUTOFF = 0.05


def gini_impurity(class_counts) -> float:
    """1 - sum((c_i / total)^2) over the class counts of one sample set."""
    counts = np.asarray(class_counts, dtype=np.float64)
    total = counts.sum()
    if counts.size == 0 or total <= 0:
        raise EmptySetError("impurity of an empty sample set is undefined")
    if np.any(counts < 0):
        raise ValueError("class counts must be non-negative")
    return 1.0 - float(np.sum((counts / total) ** 2))


@dataclass
class TreeNode:
    counts: np.ndarray  # per-class sample counts reaching this node
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    @property
    def n(self) -> int:
        return int(self.counts.sum())


@dataclass
class DecisionTree:
    root: TreeNode
    classes: np.ndarray
    n_features: int
    n_samples: int
    max_depth: int
    min_samples_split: int

    @property
    def node_count(self) -> int:
        def count(node):
            if node.is_leaf:
                return 1
            return 1 + count(node.left) + count(node.right)

        return count(self.root)


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 20
    min_samples_split: int = 2


def _best_split(X, y_idx, idx, n_classes):
    """Best (gain, feature, threshold) at a node; None when nothing splits.

    Features are scanned in ascending order and only strictly better gains
    replace the incumbent, so ties resolve to the lowest feature index and,
    within a feature, to the lowest threshold (argmax keeps the first of
    equal gains along the ascending sweep).
    """
    n = idx.size
    parent_counts = np.bincount(y_idx[idx], minlength=n_classes)
    parent_gini = 1.0 - float(np.sum((parent_counts / n) ** 2))
    best = None
    best_gain = -np.inf
    for f in range(X.shape[1]):
        col = X[idx, f]
        order = np.argsort(col, kind="stable")
        sv = col[order]
        boundaries = np.flatnonzero(sv[:-1] != sv[1:])
        if boundaries.size == 0:
            continue
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), y_idx[idx][order]] = 1.0
        cum = np.cumsum(onehot, axis=0)
        left_counts = cum[boundaries]
        right_counts = parent_counts - left_counts
        n_left = (boundaries + 1).astype(np.float64)
        n_right = n - n_left
        gini_left = 1.0 - np.sum((left_counts / n_left[:, None]) ** 2, axis=1)
        gini_right = 1.0 - np.sum((right_counts / n_right[:, None]) ** 2, axis=1)
        gains = parent_gini - (n_left / n) * gini_left - (n_right / n) * gini_right
        pos = int(np.argmax(gains))
        if gains[pos] > best_gain:
            best_gain = float(gains[pos])
            i = boundaries[pos]
            best = (best_gain, f, float((sv[i] + sv[i + 1]) / 2.0))
    return best


def _weighted_decrease(node: TreeNode, n_total: int) -> float:
    """This node's contribution to importance: parent minus children, N-weighted."""
    g = gini_impurity(node.counts)
    gl = gini_impurity(node.left.counts)
    gr = gini_impurity(node.right.counts)
    return (
        (node.n / n_total) * g
        - (node.left.n / n_total) * gl
        - (node.right.n / n_total) * gr
    )


def _prune_dead_subtrees(node: TreeNode, n_total: int) -> float:
    """Collapse subtrees whose total impurity decrease is zero.

    A split can be locally zero-gain yet enable pure children further down
    (two interleaved features is the classic case), so growth cannot stop on
    zero gain alone; instead, subtrees that never pay off are folded back
    into leaves afterwards.  Returns the subtree's total decrease.
    """
    if node.is_leaf:
        return 0.0
    total = (
        _weighted_decrease(node, n_total)
        + _prune_dead_subtrees(node.left, n_total)
        + _prune_dead_subtrees(node.right, n_total)
    )
    if total <= 0.0:
        node.feature = None
        node.threshold = None
        node.left = None
        node.right = None
        return 0.0
    return total


def train_substitute(X, y, params: TreeParams = TreeParams()) -> DecisionTree:
    """Grow a CART tree with Gini splits on a dense feature matrix.

    Rows are samples, columns the text/hashtag features.  Growth stops at
    ``max_depth``, below ``min_samples_split``, on pure nodes, or when no
    feature has two distinct values.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionMismatchError("X must be (n_samples, n_features) matching y")
    classes, y_idx = np.unique(y, return_inverse=True)
    if classes.size < 2:
        raise SingleClassError("substitute training data contains a single class")

    def build(idx: np.ndarray, depth: int) -> TreeNode:
        counts = np.bincount(y_idx[idx], minlength=classes.size)
        node = TreeNode(counts=counts)
        if (
            np.count_nonzero(counts) < 2
            or depth >= params.max_depth
            or idx.size < params.min_samples_split
        ):
            return node
        best = _best_split(X, y_idx, idx, classes.size)
        if best is None:
            return node
        _, f, threshold = best
        mask = X[idx, f] <= threshold
        node.feature = f
        node.threshold = threshold
        node.left = build(idx[mask], depth + 1)
        node.right = build(idx[~mask], depth + 1)
        return node

    root = build(np.arange(X.shape[0]), 0)
    tree = DecisionTree(
        root=root,
        classes=classes,
        n_features=X.shape[1],
        n_samples=X.shape[0],
        max_depth=params.max_depth,
        min_samples_split=params.min_samples_split,
    )
    _prune_dead_subtrees(tree.root, tree.n_samples)
    return tree


def predict(tree: DecisionTree, X) -> np.ndarray:
    """Majority-class prediction per row."""
    X = np.asarray(X, dtype=np.float64)
    out = []
    for row in X:
        node = tree.root
        while not node.is_leaf:
            node = node.left if row[node.feature] <= node.threshold else node.right
        out.append(tree.classes[int(np.argmax(node.counts))])
    return np.array(out)


def feature_importances(tree: DecisionTree) -> np.ndarray:
    """Per-feature share of the total N-weighted impurity decrease.

    Sums to 1 whenever the tree kept at least one split; a single-leaf tree
    yields all zeros with a warning rather than an error.
    """
    raw = np.zeros(tree.n_features)

    def walk(node: TreeNode):
        if node.is_leaf:
            return
        raw[node.feature] += _weighted_decrease(node, tree.n_samples)
        walk(node.left)
        walk(node.right)

    walk(tree.root)
    total = float(np.sum(raw))
    if total <= 0.0:
        warnings.warn("tree has no effective splits; importances are all zero")
        return np.zeros(tree.n_features)
    return raw / total


def student_t_two_sided_p(t: float, df: int) -> float:
    """Two-sided tail probability of Student's t via the regularized beta."""
    if df < 1:
        raise ValueError("degrees of freedom must be >= 1")
    t2 = float(t) * float(t)
    return float(betainc(df / 2.0, 0.5, df / (df + t2)))


def pearson_correlation(x, y) -> tuple[float, float]:
    """Pearson r with its two-sided p-value from the t distribution.

    Needs length >= 3 and two non-constant vectors; |r| = 1 maps to p = 0.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatchError("x and y must be 1-d vectors of equal length")
    n = x.size
    if n < 3:
        raise ValueError("correlation needs at least 3 observations")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(np.sqrt(np.mean(dx * dx)))
    sy = float(np.sqrt(np.mean(dy * dy)))
    if sx == 0.0 or sy == 0.0:
        raise ConstantVectorError("correlation of a constant vector is undefined")
    r = float(np.mean(dx * dy)) / (sx * sy)
    r = max(-1.0, min(1.0, r))
    df = n - 2
    if 1.0 - r * r <= 0.0:
        return r, 0.0
    t = r * np.sqrt(df / (1.0 - r * r))
    return r, student_t_two_sided_p(t, df)


@dataclass(frozen=True)
class TargetWord:
    token: str
    channel: str  # "text" | "hashtag"
    importance: float
    pearson_r: float
    p_value: float

    def __post_init__(self):
        if self.channel not in ("text", "hashtag"):
            raise ValueError(f"unknown channel {self.channel!r}")
        if self.importance <= 0 or self.pearson_r <= 0 or self.p_value >= P_VALUE_CUTOFF:
            raise ValueError(f"entry fails the target filter predicates: {self}")


@dataclass(frozen=True)
class TargetWordList:
    entries: tuple[TargetWord, ...]
    text_tokens: frozenset[str] = field(init=False, repr=False, compare=False)
    hashtag_tokens: frozenset[str] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "text_tokens", frozenset(e.token for e in self.entries if e.channel == "text")
        )
        object.__setattr__(
            self,
            "hashtag_tokens",
            frozenset(e.token for e in self.entries if e.channel == "hashtag"),
        )

    def __len__(self) -> int:
        return len(self.entries)

    def to_payload(self) -> dict:
        return {
            "targets": [
                {
                    "token": e.token,
                    "channel": e.channel,
                    "importance": e.importance,
                    "r": e.pearson_r,
                    "p": e.p_value,
                }
                for e in self.entries
            ]
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "TargetWordList":
        return cls(
            entries=tuple(
                TargetWord(
                    token=e["token"],
                    channel=e["channel"],
                    importance=e["importance"],
                    pearson_r=e["r"],
                    p_value=e["p"],
                )
                for e in payload["targets"]
            )
        )

    @property
    def fingerprint(self) -> str:
        return content_hash(self.to_payload())


def select_targets(space, importances, samples, labels) -> TargetWordList:
    """Keep columns with positive importance, positive r, and p < 0.05.

    ``importances`` and the columns of ``samples`` are aligned with the
    text+hashtag blocks of ``space`` (engineered columns excluded).  Columns
    whose presence vector is constant are skipped, not fatal.
    """
    importances = np.asarray(importances, dtype=np.float64)
    samples = np.asarray(samples, dtype=np.float64)
    n_cols = space.n_text + space.n_hashtag
    if importances.shape[0] != n_cols or samples.shape[1] != n_cols:
        raise DimensionMismatchError(
            f"expected {n_cols} text+hashtag columns, got {importances.shape[0]}"
        )
    y = np.array([1.0 if _is_positive(l) else 0.0 for l in labels])
    entries = []
    for col in np.flatnonzero(importances > 0):
        presence = (samples[:, col] != 0.0).astype(np.float64)
        try:
            r, p = pearson_correlation(presence, y)
        except ConstantVectorError:
            continue
        if r > 0 and p < P_VALUE_CUTOFF:
            channel, token = space.provenance(space.n_engineered + int(col))
            entries.append(
                TargetWord(
                    token=token,
                    channel=channel,
                    importance=float(importances[col]),
                    pearson_r=r,
                    p_value=p,
                )
            )
    return TargetWordList(entries=tuple(entries))


def _is_positive(label) -> bool:
    from .corpus import Label

    if isinstance(label, Label):
        return label is Label.TROLL
    return bool(label)


def save_targets(targets: TargetWordList, path, metadata: dict | None = None) -> None:
    payload = targets.to_payload()
    if metadata:
        payload["provenance"] = metadata
    write_artifact(path, "target-words", payload)


def load_targets(path, verify: bool = False) -> TargetWordList:
    body = read_artifact(path, "target-words", verify=verify)
    return TargetWordList.from_payload(body)
