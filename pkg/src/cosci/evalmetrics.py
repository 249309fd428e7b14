"""Screening and clustering quality measures."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class ConfusionCounts:
    false_negatives: int
    false_positives: int
    true_positives: int
    true_negatives: int

    @property
    def p(self) -> int:
        return (self.false_negatives + self.false_positives
                + self.true_positives + self.true_negatives)


def confusion_counts(selected: Iterable[int], truth: Iterable[int],
                     p: int) -> ConfusionCounts:
    """Counts of a selected index set against the true signal set.

    Indices are 0-based and must lie in ``range(p)``.
    """
    sel, tru = set(int(i) for i in selected), set(int(i) for i in truth)
    for name, s in (("selected", sel), ("truth", tru)):
        bad = [i for i in s if not 0 <= i < p]
        if bad:
            raise InputError(f"{name} index {bad[0]} outside 0..{p - 1}")
    tp = len(sel & tru)
    fp = len(sel - tru)
    fn = len(tru - sel)
    return ConfusionCounts(false_negatives=fn, false_positives=fp,
                           true_positives=tp, true_negatives=p - tp - fp - fn)


def _codes(labels) -> np.ndarray:
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise InputError("a labeling must be 1-d")
    return np.unique(arr, return_inverse=True)[1].ravel()


def _pairs(counts) -> int:
    c = np.asarray(counts, dtype=np.int64)
    return int(np.sum(c * (c - 1) // 2))


def rand_index(a, b) -> float:
    """Fraction of observation pairs on which two labelings agree.

    Uses the contingency table: agreeing pairs are the pairs joined in
    both labelings plus the pairs separated in both.
    """
    ca, cb = _codes(a), _codes(b)
    n = ca.shape[0]
    if cb.shape[0] != n:
        raise InputError(f"labelings differ in length ({n} vs {cb.shape[0]})")
    if n < 2:
        raise InputError("need at least 2 observations")
    table = np.zeros((ca.max() + 1, cb.max() + 1), dtype=np.int64)
    np.add.at(table, (ca, cb), 1)
    both = _pairs(table)
    in_a = _pairs(table.sum(axis=1))
    in_b = _pairs(table.sum(axis=0))
    total = n * (n - 1) // 2
    agree = total + 2 * both - in_a - in_b
    return agree / total


def cer(a, b) -> float:
    """Classification error rate, one minus the Rand index."""
    ca, cb = _codes(a), _codes(b)
    n = ca.shape[0]
    if cb.shape[0] != n:
        raise InputError(f"labelings differ in length ({n} vs {cb.shape[0]})")
    if n < 2:
        raise InputError("need at least 2 observations")
    table = np.zeros((ca.max() + 1, cb.max() + 1), dtype=np.int64)
    np.add.at(table, (ca, cb), 1)
    total = n * (n - 1) // 2
    disagree = _pairs(table.sum(axis=1)) + _pairs(table.sum(axis=0)) \
        - 2 * _pairs(table)
    return disagree / total


def per_signal_cer(predicted, truth_per_signal: Sequence) -> float:
    """Mean CER of one predicted labeling against each signal's labeling."""
    truths = list(truth_per_signal.values()) \
        if isinstance(truth_per_signal, dict) else list(truth_per_signal)
    if not truths:
        raise InputError("no signal labelings given")
    return float(np.mean([cer(predicted, t) for t in truths]))


# -- k-means ---------------------------------------------------------------

def _plus_plus(X, k, rng):
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = rng.integers(n)
        else:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total,
                                      side="right"))
            idx = min(idx, n - 1)
        centers[c] = X[idx]
        d2 = np.minimum(d2, np.sum((X - centers[c]) ** 2, axis=1))
    return centers


def _assign(X, centers):
    d2 = (np.sum(X * X, axis=1)[:, None] - 2.0 * X @ centers.T
          + np.sum(centers * centers, axis=1)[None, :])
    labels = np.argmin(d2, axis=1)
    return labels, float(np.sum((X - centers[labels]) ** 2))


def _lloyd(X, k, rng, max_iter=100, tol=1e-8, check=False):
    centers = _plus_plus(X, k, rng)
    labels, sse = _assign(X, centers)
    for _ in range(max_iter):
        for c in range(k):
            members = labels == c
            if members.any():
                centers[c] = X[members].mean(axis=0)
            else:
                # refill an empty cluster with the worst-fitted point
                far = int(np.argmax(np.sum((X - centers[labels]) ** 2, axis=1)))
                centers[c] = X[far]
        labels, new = _assign(X, centers)
        if check and new > sse * (1 + 1e-12) + 1e-12:
            raise AssertionError("k-means objective increased")
        done = sse - new <= tol * max(sse, 1e-300)
        sse = new
        if done:
            break
    return labels, sse


def kmeans_lloyd(X, clusters: int, restarts: int = 10, seed: int = 0,
                 threads: Optional[int] = 1, check: bool = False) -> np.ndarray:
    """Best of ``restarts`` Lloyd runs from k-means++ seeds.

    Parameters
    ----------
    X : array_like, shape (n,) or (n, d)
    clusters : int
    restarts : int
    seed : int
        Restart ``r`` uses the ``r``-th child of ``SeedSequence(seed)``.
    threads : int
        Restarts run on this many threads; the result does not depend on it.
    check : bool
        Assert that the objective never increases between iterations.

    Returns
    -------
    ndarray of int
        Cluster label per row, in ``0..clusters-1``.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    k = int(clusters)
    if k < 1:
        raise InputError("clusters must be positive")
    if k > n:
        raise InputError(f"cannot form {k} clusters from {n} points")
    if k == 1:
        return np.zeros(n, dtype=np.int64)
    children = np.random.SeedSequence(int(seed)).spawn(max(int(restarts), 1))

    def run(child):
        return _lloyd(X, k, np.random.default_rng(child), check=check)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            runs = list(pool.map(run, children))
    else:
        runs = [run(c) for c in children]
    best = min(range(len(runs)), key=lambda r: runs[r][1])
    return runs[best][0].astype(np.int64)
