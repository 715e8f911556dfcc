"""The linear support-vector classifier: training, metrics, serialization.

Training minimizes the L2-regularized hinge objective

    J(w, b) = 0.5 * ||w||^2 + C * sum_i max(0, 1 - y_i (w . x_i + b))

by seeded, epoch-shuffled stochastic subgradient descent with the classic
1/(lambda * t) step schedule, where lambda = 1 / (C * m).  The weight vector
is kept as ``scale * direction`` so each step costs O(nnz) rather than O(D).
The bias is trained as an appended constant feature.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    CorruptFileError,
    DimensionMismatchError,
    EmptyInputError,
    FingerprintMismatchError,
    LengthMismatchError,
    SingleClassError,
)
from .balance import SmoteConfig, smote_oversample
from .corpus import Label
from .serialize import content_hash, derive_seed, read_artifact, write_artifact
from .vectorspace import SparseVector


@dataclass(frozen=True)
class Hyperparams:
    C: float = 1.0
    epochs: int = 20
    seed: int = 0
    tolerance: float = 1e-6

    def to_payload(self) -> dict:
        return {"C": self.C, "epochs": self.epochs, "seed": self.seed, "tolerance": self.tolerance}

    @classmethod
    def from_payload(cls, payload: dict) -> "Hyperparams":
        return cls(**payload)


@dataclass(frozen=True, eq=False)
class LinearModel:
    weights: np.ndarray  # float64, length = feature space dimension
    bias: float
    hyperparams: Hyperparams
    feature_space_fingerprint: str = ""

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=np.float64))
        if not np.all(np.isfinite(self.weights)) or not np.isfinite(self.bias):
            raise ValueError("model weights must be finite")

    @property
    def dim(self) -> int:
        return int(self.weights.shape[0])

    def require_space(self, fingerprint: str) -> None:
        if self.feature_space_fingerprint != fingerprint:
            raise FingerprintMismatchError(
                "model was trained against a different feature space "
                f"({self.feature_space_fingerprint[:12]}... vs {fingerprint[:12]}...)"
            )

    def to_payload(self) -> dict:
        return {
            "hyperparams": self.hyperparams.to_payload(),
            "weights": self.weights.tolist(),
            "bias": self.bias,
            "feature_space_fingerprint": self.feature_space_fingerprint,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "LinearModel":
        return cls(
            weights=np.array(payload["weights"], dtype=np.float64),
            bias=float(payload["bias"]),
            hyperparams=Hyperparams.from_payload(payload["hyperparams"]),
            feature_space_fingerprint=payload["feature_space_fingerprint"],
        )

    @property
    def fingerprint(self) -> str:
        return content_hash(self.to_payload())


@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    fn: int
    tn: int
    accuracy: float
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int, tn: int) -> "Metrics":
        total = tp + fp + fn + tn
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        return cls(
            tp=tp,
            fp=fp,
            fn=fn,
            tn=tn,
            accuracy=(tp + tn) / total,
            precision=precision,
            recall=recall,
            f1=f1,
        )

    def to_payload(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "Metrics":
        return cls(**payload)


@dataclass(frozen=True)
class MetricMeans:
    """Unweighted per-fold means; deliberately carries no confusion counts."""

    accuracy: float
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class KFoldResult:
    folds: tuple[Metrics, ...]
    mean: MetricMeans


def _as_sign(label) -> int:
    if isinstance(label, Label):
        return 1 if label is Label.TROLL else -1
    return 1 if label else -1


def train(samples, hp: Hyperparams, feature_space_fingerprint: str = "") -> LinearModel:
    """Fit the hinge-loss classifier on (SparseVector, label) pairs.

    Labels may be :class:`Label` values or truthy flags (truthy = troll).
    Training stops at the epoch limit or when an epoch moves the weight
    vector by less than ``hp.tolerance`` in L2 norm.
    """
    samples = list(samples)
    if not samples:
        raise EmptyInputError("no training samples")
    dim = samples[0][0].dim
    ys = np.array([_as_sign(label) for _, label in samples], dtype=np.float64)
    if np.all(ys == ys[0]):
        raise SingleClassError("training data contains a single class")
    index_lists = []
    value_lists = []
    for vec, _ in samples:
        if vec.dim != dim:
            raise DimensionMismatchError(f"sample dim {vec.dim} vs {dim}")
        index_lists.append(vec.indices)
        value_lists.append(vec.values)

    m = len(samples)
    lam = 1.0 / (hp.C * m)
    bias_col = dim  # appended constant feature carries the bias
    v = np.zeros(dim + 1)
    scale = 1.0
    rng = np.random.default_rng(hp.seed)
    t = 0
    w_prev = np.zeros(dim + 1)
    for _ in range(hp.epochs):
        for i in rng.permutation(m):
            t += 1
            idx, vals, y = index_lists[i], value_lists[i], ys[i]
            margin = y * scale * (np.dot(v[idx], vals) + v[bias_col])
            scale *= 1.0 - 1.0 / t
            if scale == 0.0:  # only at t == 1
                v[:] = 0.0
                scale = 1.0
            if margin < 1.0:
                step = y / (lam * t * scale)
                v[idx] += step * vals
                v[bias_col] += step
        w_now = scale * v
        delta = float(np.linalg.norm(w_now - w_prev))
        w_prev = w_now
        if delta < hp.tolerance:
            break
    return LinearModel(
        weights=w_prev[:dim],
        bias=float(w_prev[bias_col]),
        hyperparams=hp,
        feature_space_fingerprint=feature_space_fingerprint,
    )


def decision_value(model: LinearModel, x: SparseVector) -> float:
    """w . x + b, computed exactly over the nonzero entries."""
    if x.dim != model.dim:
        raise DimensionMismatchError(f"input dim {x.dim} vs model {model.dim}")
    return float(np.dot(model.weights[x.indices], x.values)) + model.bias


def classify(model: LinearModel, x: SparseVector) -> Label:
    """Troll iff the decision value is strictly positive; ties are non-troll."""
    return Label.TROLL if decision_value(model, x) > 0.0 else Label.NONTROLL


def hinge_objective(model: LinearModel, samples) -> float:
    """The trained objective J(w, b); exposed for convergence checks."""
    total = 0.5 * float(np.dot(model.weights, model.weights))
    hp = model.hyperparams
    for vec, label in samples:
        margin = _as_sign(label) * decision_value(model, vec)
        total += hp.C * max(0.0, 1.0 - margin)
    return total


def compute_metrics(predictions, labels) -> Metrics:
    """Confusion-based metrics with troll as the positive class.

    Zero-denominator precision/recall are defined as 0.
    """
    predictions = list(predictions)
    labels = list(labels)
    if len(predictions) != len(labels):
        raise LengthMismatchError(f"{len(predictions)} predictions vs {len(labels)} labels")
    if not predictions:
        raise EmptyInputError("no predictions to score")
    tp = fp = fn = tn = 0
    for pred, truth in zip(predictions, labels):
        p = _as_sign(pred) > 0
        y = _as_sign(truth) > 0
        if p and y:
            tp += 1
        elif p and not y:
            fp += 1
        elif not p and y:
            fn += 1
        else:
            tn += 1
    return Metrics.from_counts(tp, fp, fn, tn)


def stratified_folds(labels, k: int, seed: int) -> list[np.ndarray]:
    """Deterministic stratified fold assignment (round-robin per class)."""
    if k < 2:
        raise ValueError("k-fold validation needs k >= 2")
    labels = [_as_sign(l) for l in labels]
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(labels), dtype=np.int64)
    for cls in (1, -1):
        members = np.array([i for i, y in enumerate(labels) if y == cls], dtype=np.int64)
        rng.shuffle(members)
        for pos, i in enumerate(members):
            fold_of[i] = pos % k
    return [np.flatnonzero(fold_of == f) for f in range(k)]


def kfold_evaluate(vectors, labels, k: int, hp: Hyperparams, smote_cfg: SmoteConfig) -> KFoldResult:
    """Stratified k-fold evaluation with SMOTE applied inside each training split.

    Oversampling never sees the held-out fold, so synthetic near-copies of
    test tweets cannot leak into training.  The summary is the unweighted
    mean of the per-fold metrics.
    """
    vectors = list(vectors)
    labels = list(labels)
    if len(vectors) != len(labels):
        raise LengthMismatchError(f"{len(vectors)} vectors vs {len(labels)} labels")
    folds = stratified_folds(labels, k, seed=derive_seed(hp.seed, "folds"))
    signs = np.array([_as_sign(l) for l in labels])
    per_fold = []
    for f, test_idx in enumerate(folds):
        test_mask = np.zeros(len(labels), dtype=bool)
        test_mask[test_idx] = True
        train_idx = np.flatnonzero(~test_mask)
        minority = [vectors[i] for i in train_idx if signs[i] > 0]
        majority_count = int(np.sum(signs[train_idx] < 0))
        fold_cfg = replace(smote_cfg, rng_seed=derive_seed(smote_cfg.rng_seed, "smote-fold", f))
        synthetics = smote_oversample(minority, majority_count, fold_cfg)
        train_samples = [(vectors[i], signs[i] > 0) for i in train_idx]
        train_samples += [(vec, True) for vec in synthetics]
        model = train(train_samples, replace(hp, seed=derive_seed(hp.seed, "fold", f)))
        preds = [classify(model, vectors[i]) for i in test_idx]
        truth = [labels[i] for i in test_idx]
        per_fold.append(compute_metrics(preds, truth))
    mean = MetricMeans(
        accuracy=float(np.mean([m.accuracy for m in per_fold])),
        precision=float(np.mean([m.precision for m in per_fold])),
        recall=float(np.mean([m.recall for m in per_fold])),
        f1=float(np.mean([m.f1 for m in per_fold])),
    )
    return KFoldResult(folds=tuple(per_fold), mean=mean)


def save_model(model: LinearModel, path, metadata: dict | None = None) -> None:
    payload = model.to_payload()
    if metadata:
        payload["provenance"] = metadata
    write_artifact(path, "linear-model", payload)


def load_model(path, verify: bool = False) -> LinearModel:
    body = read_artifact(path, "linear-model", verify=verify)
    try:
        return LinearModel.from_payload(body)
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFileError(f"{path}: {exc}") from exc
