"""Screening for feature pairs that cluster only jointly.

Each pair of standardized columns is projected onto a grid of directions
on the half circle and scored like a single feature; the best direction
tells which of the two features carries the structure.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .errors import InputError
from .merge_engine import (default_threads, score_columns, score_feature,
                           scores_array)

AXIS_CUTOFF = 0.95


@dataclass(frozen=True)
class DirectionGrid:
    """``m`` unit directions at angles ``pi k / m``, ``k = 0..m-1``."""

    m: int
    angles: np.ndarray
    directions: np.ndarray  # shape (m, 2)


@dataclass(frozen=True)
class PairScore:
    """Best projected score of the pair ``(i, j)`` and its direction."""

    i: int
    j: int
    score: float
    u_star: tuple


def direction_grid(m: int) -> DirectionGrid:
    m = int(m)
    if m < 2:
        raise InputError("direction grid needs m >= 2")
    angles = np.pi * np.arange(m) / m
    dirs = np.column_stack([np.cos(angles), np.sin(angles)])
    # exact axes, so the axis directions reproduce the raw columns
    dirs[np.isclose(dirs, 0.0, atol=1e-15)] = 0.0
    return DirectionGrid(m=m, angles=angles, directions=dirs)


def circle_grid(m: int) -> DirectionGrid:
    """Directions scored for ``m`` equally spaced points on the unit circle.

    Opposite points give mirrored projections with equal scores, so an even
    ``m`` needs only the ``m / 2`` directions of the upper half circle.  For
    odd ``m`` the points fall on ``m`` distinct lines, spaced ``pi / m``.
    """
    m = int(m)
    if m < 3:
        raise InputError("need at least 3 points on the circle")
    return direction_grid(m // 2 if m % 2 == 0 else m)


def standardize(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    sd = x.std()
    if not np.isfinite(sd) or sd == 0.0:
        raise InputError("cannot standardize a constant column")
    return (x - x.mean()) / sd


def _best_direction(zi, zj, grid):
    best, arg = -1.0, 0
    for k, (c, s) in enumerate(grid.directions):
        sc = score_feature(c * zi + s * zj).score
        if sc > best:
            best, arg = sc, k
    return best, tuple(float(v) for v in grid.directions[arg])


def pair_score(xi, xj, grid: DirectionGrid, i: int = 0, j: int = 1) -> PairScore:
    """Maximum score over projections of the standardized pair.

    Ties between directions go to the first one in grid order.
    """
    xi = np.asarray(xi, dtype=np.float64)
    xj = np.asarray(xj, dtype=np.float64)
    if xi.shape != xj.shape or xi.ndim != 1:
        raise InputError("pair columns must be 1-d and of equal length")
    if xi.shape[0] < 2:
        raise InputError("need at least 2 observations")
    score, u = _best_direction(standardize(xi), standardize(xj), grid)
    return PairScore(i=i, j=j, score=score, u_star=u)


def pair_scores(X, m: int = 20, threads: Optional[int] = None) -> list:
    """Scores of all column pairs ``i < j`` in lexicographic order.

    ``m`` counts equally spaced points on the unit circle (see
    :func:`circle_grid`).
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise InputError("expected a 2-d matrix")
    grid = circle_grid(m)
    p = X.shape[1]
    Z = np.empty_like(X, order="F")
    for c in range(p):
        Z[:, c] = standardize(X[:, c])
    pairs = list(combinations(range(p), 2))

    def one(ij):
        i, j = ij
        score, u = _best_direction(Z[:, i], Z[:, j], grid)
        return PairScore(i=i, j=j, score=score, u_star=u)

    threads = default_threads() if threads is None else int(threads)
    if threads <= 1 or len(pairs) < 2:
        return [one(ij) for ij in pairs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, pairs, chunksize=16))


def pair_contribution(ps: PairScore) -> tuple:
    """Indices a passing pair adds to the selected set."""
    u1, u2 = abs(ps.u_star[0]), abs(ps.u_star[1])
    if u1 >= AXIS_CUTOFF:
        return (ps.i,)
    if u2 >= AXIS_CUTOFF:
        return (ps.j,)
    return (ps.i, ps.j)


def combine_screens(marginal: Sequence, pairs: Sequence,
                    alpha0: float) -> frozenset:
    """Union of the marginal screen and the indices of passing pairs."""
    s = scores_array(marginal)
    out = set(np.flatnonzero(s >= alpha0).tolist())
    for ps in pairs:
        if ps.score >= alpha0:
            out.update(pair_contribution(ps))
    return frozenset(out)


def pairwise_screen(X, alpha0: float, m: int = 20,
                    threads: Optional[int] = None,
                    marginal: Optional[Sequence] = None,
                    pairs: Optional[Sequence] = None) -> frozenset:
    """Features selected marginally or through a passing pair.

    Parameters
    ----------
    X : array_like or DatasetMatrix
        ``n x p`` data.
    alpha0 : float
        Threshold in (0, 0.5], applied to marginal and pair scores alike.
    m : int
        Number of equally spaced points on the unit circle.
    marginal, pairs : sequence, optional
        Precomputed marginal scores and pair scores, reused when given.
    """
    a = float(alpha0)
    if not 0.0 < a <= 0.5:
        raise InputError(f"alpha0 must lie in (0, 0.5], got {alpha0}")
    data = getattr(X, "data", X)
    data = np.asarray(data, dtype=np.float64)
    if marginal is None:
        marginal = score_columns(data, threads=threads)
    if pairs is None:
        pairs = pair_scores(data, m, threads) if data.shape[1] >= 2 else []
    return combine_screens(marginal, pairs, a)


def same_direction(u, v, tol=1e-12) -> bool:
    """Directions equal up to sign."""
    return (math.isclose(u[0], v[0], abs_tol=tol)
            and math.isclose(u[1], v[1], abs_tol=tol)) or \
           (math.isclose(u[0], -v[0], abs_tol=tol)
            and math.isclose(u[1], -v[1], abs_tol=tol))
