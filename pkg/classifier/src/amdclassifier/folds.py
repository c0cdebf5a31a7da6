"""Stratified cross-validation fold assignment."""

from __future__ import annotations

import numpy as np


def stratified_folds(labels, k: int = 5, seed: int = 0) -> np.ndarray:
    """Assign each sample a fold id in [0, k) with per-class balance.

    Samples of each class are shuffled (deterministically from ``seed``) and
    dealt round-robin, so every fold holds floor(n_c / k) or ceil(n_c / k)
    samples of class c: the per-fold class ratio is within one sample of the
    global ratio. Folds are disjoint and cover all samples.
    """
    y = np.asarray(labels)
    if y.ndim != 1:
        raise ValueError("labels must be 1D")
    if k < 2:
        raise ValueError("need at least 2 folds")
    rng = np.random.default_rng(seed)
    assignment = np.full(len(y), -1, dtype=np.int64)
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        if len(idx) < k:
            raise ValueError(
                f"class {cls!r} has {len(idx)} samples, fewer than {k} folds"
            )
        rng.shuffle(idx)
        assignment[idx] = np.arange(len(idx)) % k
    return assignment
