"""Synthetic minority oversampling in the assembled feature space.

Each synthetic sample lies on the segment between a minority point and one
of its k nearest minority neighbours: ``x + u * (n - x)`` with
``u ~ Uniform[0, 1)``.  The walk is driven by one seeded generator, so the
same config always yields bit-identical synthetics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyMinorityError
from .vectorspace import SparseVector, sparse_dot


@dataclass(frozen=True)
class SmoteConfig:
    k_neighbors: int = 5
    target_ratio: float = 1.0  # 1.0 = bring the minority up to the majority count
    rng_seed: int = 0

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")
        if self.target_ratio <= 0:
            raise ValueError("target_ratio must be > 0")


def _neighbor_table(minority: list[SparseVector], k: int) -> list[np.ndarray]:
    """k nearest minority neighbours per point, ties broken by lowest index.

    A minority smaller than k+1 uses all other points; a singleton minority
    is its own neighbour (synthetics degenerate to exact copies).
    """
    n = len(minority)
    if n == 1:
        return [np.array([0])]
    norms = np.array([sparse_dot(v, v) for v in minority])
    dist2 = np.empty((n, n))
    for i in range(n):
        dist2[i, i] = np.inf  # exclude self
        for j in range(i + 1, n):
            d = norms[i] + norms[j] - 2.0 * sparse_dot(minority[i], minority[j])
            dist2[i, j] = dist2[j, i] = d
    k_eff = min(k, n - 1)
    return [np.argsort(dist2[i], kind="stable")[:k_eff] for i in range(n)]


def _interpolate(x: SparseVector, n: SparseVector, u: float) -> SparseVector:
    union = np.union1d(x.indices, n.indices)
    xd = np.zeros(union.size)
    nd = np.zeros(union.size)
    xd[np.searchsorted(union, x.indices)] = x.values
    nd[np.searchsorted(union, n.indices)] = n.values
    synth = xd + u * (nd - xd)
    keep = synth != 0.0
    return SparseVector(indices=union[keep], values=synth[keep], dim=x.dim)


def smote_oversample(
    minority: list[SparseVector], majority_count: int, cfg: SmoteConfig
) -> list[SparseVector]:
    """Emit ``ceil(target_ratio * majority_count) - len(minority)`` synthetics.

    Returns an empty list when the minority already meets the target.
    """
    if not minority:
        raise EmptyMinorityError("no minority samples to oversample")
    n_needed = math.ceil(cfg.target_ratio * majority_count) - len(minority)
    if n_needed <= 0:
        return []
    neighbors = _neighbor_table(minority, cfg.k_neighbors)
    rng = np.random.default_rng(cfg.rng_seed)
    synthetics = []
    for _ in range(n_needed):
        i = int(rng.integers(len(minority)))
        j = int(neighbors[i][int(rng.integers(len(neighbors[i])))])
        u = float(rng.random())
        synthetics.append(_interpolate(minority[i], minority[j], u))
    return synthetics
