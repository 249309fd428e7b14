"""Univariate merge path of the fusion-penalized clustering criterion.

For sorted observations ``x_1 <= ... <= x_n`` the solution path of

    min_c  sum_i (x_i - c_i)^2 + lam * sum_{k<l} |c_k - c_l|

is traced by repeatedly fusing the two adjacent clusters with the smallest
weighted gap ``(c_{r+1} - c_r) / (s_r + s_{r+1})``.  Fusion happens at
``lam = 2 * gap``, and the gaps of successive merges are non-decreasing, so
the merge order *is* the order in which centroids fuse along the path.

The merge loop runs in a compiled kernel over an indexed binary heap of
adjacent gaps (doubly linked cluster list, entries updated in place),
giving ``O(n log n)`` work per feature.  The kernel releases the GIL, so
features can be scored from a thread pool.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numba
import numpy as np

from .errors import InputError

__all__ = [
    "SortedFeature",
    "MergeEvent",
    "MergeTrace",
    "FeatureScore",
    "sort_feature",
    "merge_size",
    "merge_path",
    "clustering_score",
    "restricted_score",
    "score_feature",
    "score_columns",
]


# --------------------------------------------------------------------------
# compiled kernel
# --------------------------------------------------------------------------

@numba.njit(inline="always")
def _before(ka, ia, kb, ib):
    # heap order: gap, then smallest left index
    return ka < kb or (ka == kb and ia < ib)


@numba.njit(inline="always")
def _sift_down(hk, hid, pos, i, size):
    k = hk[i]
    item = hid[i]
    while True:
        c = 2 * i + 1
        if c >= size:
            break
        if c + 1 < size and _before(hk[c + 1], hid[c + 1], hk[c], hid[c]):
            c += 1
        if _before(hk[c], hid[c], k, item):
            hk[i] = hk[c]
            hid[i] = hid[c]
            pos[hid[i]] = i
            i = c
        else:
            break
    hk[i] = k
    hid[i] = item
    pos[item] = i


@numba.njit(inline="always")
def _resift(hk, hid, pos, i, size):
    # restore heap order after the key at slot i changed in either direction
    k = hk[i]
    item = hid[i]
    moved = False
    while i > 0:
        parent = (i - 1) >> 1
        if _before(k, item, hk[parent], hid[parent]):
            hk[i] = hk[parent]
            hid[i] = hid[parent]
            pos[hid[i]] = i
            i = parent
            moved = True
        else:
            break
    hk[i] = k
    hid[i] = item
    pos[item] = i
    if not moved:
        _sift_down(hk, hid, pos, i, size)


@numba.njit(inline="always")
def _drop(hk, hid, pos, item, size):
    i = pos[item]
    size -= 1
    if i != size:
        hk[i] = hk[size]
        hid[i] = hid[size]
        pos[hid[i]] = i
        _resift(hk, hid, pos, i, size)
    return size


@numba.njit(inline="always")
def _centroid(x, total, size, start):
    # clamped into the cluster's range so constant clusters stay exact
    c = total / size
    if c < x[start]:
        c = x[start]
    elif c > x[start + size - 1]:
        c = x[start + size - 1]
    return c


@numba.njit(nogil=True, cache=True)
def _merge_kernel(x):
    """Merge sequence of sorted ``x``.

    Clusters are identified by the sorted index of their first member.  The
    heap holds one entry per cluster that has a right neighbour, keyed by
    the weighted gap to that neighbour; entries are updated in place.
    """
    n = x.shape[0]
    m = n - 1
    size = np.ones(n, np.int64)
    total = x.copy()
    nxt = np.arange(1, n + 1)
    prv = np.arange(-1, n - 1)

    hk = np.empty(m, np.float64)
    hid = np.arange(m)
    pos = np.arange(n)
    for i in range(m):
        hk[i] = (x[i + 1] - x[i]) / 2.0
    hn = m
    for i in range((m - 2) // 2, -1, -1):
        _sift_down(hk, hid, pos, i, hn)

    out_left = np.empty(m, np.int64)
    out_right = np.empty(m, np.int64)
    out_lstart = np.empty(m, np.int64)
    out_rstart = np.empty(m, np.int64)
    for step in range(m):
        l = hid[0]
        r = nxt[l]
        out_left[step] = size[l]
        out_right[step] = size[r]
        out_lstart[step] = l
        out_rstart[step] = r

        after = nxt[r]
        if after < n:
            hn = _drop(hk, hid, pos, r, hn)
        size[l] += size[r]
        total[l] += total[r]
        nxt[l] = after
        cl = _centroid(x, total[l], size[l], l)
        if after < n:
            prv[after] = l
            i = pos[l]
            hk[i] = ((_centroid(x, total[after], size[after], after) - cl)
                     / (size[l] + size[after]))
            _resift(hk, hid, pos, i, hn)
        else:
            hn = _drop(hk, hid, pos, l, hn)
        before = prv[l]
        if before >= 0:
            i = pos[before]
            hk[i] = ((cl - _centroid(x, total[before], size[before], before))
                     / (size[before] + size[l]))
            _resift(hk, hid, pos, i, hn)
    return out_left, out_right, out_lstart, out_rstart


# --------------------------------------------------------------------------
# domain types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SortedFeature:
    """Observations of one feature in ascending order.

    ``values[k] == original[original_indices[k]]``.
    """

    values: np.ndarray
    original_indices: np.ndarray

    @property
    def n(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True)
class MergeEvent:
    step: int
    left_size: int
    right_size: int
    mass_after: float
    alpha: float
    midpoint: float


@dataclass(frozen=True)
class FeatureScore:
    """Clustering score of one feature, optionally with its quantile-band
    restricted variant."""

    score: float
    restricted_score: Optional[float] = None
    tau: Optional[float] = None


class MergeTrace:
    """Full merge history of one feature.

    Stored as parallel arrays, one entry per merge in the order merges
    happen.  The two merged clusters are the contiguous sorted ranges
    ``[left_start, right_start)`` and ``[right_start, right_start +
    right_size)``.  Iterating yields :class:`MergeEvent` objects.
    """

    __slots__ = ("n", "left_size", "right_size", "left_start",
                 "right_start", "midpoint")

    def __init__(self, n, left_size, right_size, left_start, right_start,
                 midpoint):
        self.n = int(n)
        self.left_size = np.asarray(left_size, dtype=np.int64)
        self.right_size = np.asarray(right_size, dtype=np.int64)
        self.left_start = np.asarray(left_start, dtype=np.int64)
        self.right_start = np.asarray(right_start, dtype=np.int64)
        self.midpoint = np.asarray(midpoint, dtype=np.float64)

    def __len__(self) -> int:
        return int(self.left_size.shape[0])

    @property
    def mass_after(self) -> np.ndarray:
        return (self.left_size + self.right_size) / self.n

    @property
    def alpha(self) -> np.ndarray:
        merged = self.left_size + self.right_size
        smaller = np.minimum(self.left_size, self.right_size)
        # integer form of mass >= 0.5, exact at the boundary
        return np.where(2 * merged >= self.n, smaller / self.n, 0.0)

    def __getitem__(self, k: int) -> MergeEvent:
        k = range(len(self))[k]
        ls = int(self.left_size[k])
        rs = int(self.right_size[k])
        return MergeEvent(
            step=k + 1,
            left_size=ls,
            right_size=rs,
            mass_after=(ls + rs) / self.n,
            alpha=merge_size(ls, rs, self.n),
            midpoint=float(self.midpoint[k]),
        )

    def __iter__(self) -> Iterator[MergeEvent]:
        for k in range(len(self)):
            yield self[k]

    @property
    def events(self) -> list:
        return list(self)


# --------------------------------------------------------------------------
# operations
# --------------------------------------------------------------------------

def sort_feature(values) -> SortedFeature:
    """Sort one feature ascending, keeping the permutation back to input order.

    Raises
    ------
    InputError
        If fewer than two values are given or any value is not finite.
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.shape[0] < 2:
        raise InputError(f"need at least 2 observations, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        bad = int(np.flatnonzero(~np.isfinite(x))[0])
        raise InputError(f"non-finite value {x[bad]!r} at position {bad}")
    order = np.argsort(x, kind="stable")
    return SortedFeature(values=x[order], original_indices=order)


def merge_size(left_size: int, right_size: int, n: int) -> float:
    """Size of a merge: the smaller side over ``n``, or 0 when the merged
    cluster holds less than half the sample."""
    if left_size < 1 or right_size < 1 or n < 1:
        raise InputError("cluster sizes and n must be positive")
    if left_size + right_size > n:
        raise InputError(
            f"merged size {left_size + right_size} exceeds n={n}")
    if 2 * (left_size + right_size) >= n:
        return min(left_size, right_size) / n
    return 0.0


def merge_path(feature: SortedFeature) -> MergeTrace:
    """Run the merge algorithm on a sorted feature.

    Ties between equal minimal gaps go to the pair with the smallest left
    index; duplicate values therefore fuse first, left to right.
    """
    x = np.ascontiguousarray(feature.values, dtype=np.float64)
    if x.shape[0] < 2:
        raise InputError("need at least 2 observations")
    left, right, lstart, rstart = _merge_kernel(x)
    midpoint = 0.5 * (x[rstart - 1] + x[rstart])
    return MergeTrace(x.shape[0], left, right, lstart, rstart, midpoint)


def clustering_score(trace: MergeTrace) -> FeatureScore:
    """Largest merge size along the trace."""
    if len(trace) == 0:
        raise InputError("empty merge trace")
    return FeatureScore(score=float(trace.alpha.max()))


def _band(values: np.ndarray, tau: float):
    lo, hi = np.quantile(values, [tau, 1.0 - tau])
    return lo, hi


def restricted_score(trace: MergeTrace, feature: SortedFeature,
                     tau: float) -> float:
    """Largest merge size over merges whose midpoint lies inside the
    empirical ``[tau, 1 - tau]`` quantile band (0 if none does)."""
    if not 0.0 <= tau < 0.5:
        raise InputError(f"tau must lie in [0, 0.5), got {tau}")
    if len(trace) == 0:
        raise InputError("empty merge trace")
    lo, hi = _band(feature.values, tau)
    inside = (trace.midpoint >= lo) & (trace.midpoint <= hi)
    alpha = trace.alpha[inside]
    return float(alpha.max()) if alpha.size else 0.0


def score_feature(values, tau: Optional[float] = None) -> FeatureScore:
    """Sort, trace and score one feature."""
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.shape[0] < 2:
        raise InputError(f"need at least 2 observations, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise InputError("feature contains non-finite values")
    # argsort is not needed for scoring
    feature = SortedFeature(values=np.sort(x), original_indices=np.empty(0))
    trace = merge_path(feature)
    score = float(trace.alpha.max())
    if tau is None:
        return FeatureScore(score=score)
    return FeatureScore(score=score,
                        restricted_score=restricted_score(trace, feature, tau),
                        tau=float(tau))


def default_threads() -> int:
    env = os.environ.get("COSCI_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise InputError(f"COSCI_THREADS must be an integer, got {env!r}")
        if value < 1:
            raise InputError("COSCI_THREADS must be positive")
        return value
    return os.cpu_count() or 1


def score_columns(X, tau: Optional[float] = None,
                  threads: Optional[int] = None) -> list:
    """Score every column of an ``n x p`` matrix.

    Columns are scored on a pool of ``threads`` workers; the result list is
    in column order and does not depend on the thread count.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise InputError("expected a 2-d matrix")
    threads = default_threads() if threads is None else int(threads)
    if threads < 1:
        raise InputError("threads must be positive")
    p = X.shape[1]
    if threads == 1 or p < 2:
        return [score_feature(X[:, j], tau) for j in range(p)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda j: score_feature(X[:, j], tau), range(p)))


def scores_array(scores: Sequence) -> np.ndarray:
    """Plain score values from a sequence of FeatureScore or floats."""
    return np.array([s.score if isinstance(s, FeatureScore) else float(s)
                     for s in scores], dtype=np.float64)
