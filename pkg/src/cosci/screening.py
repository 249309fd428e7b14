"""Threshold rules that turn clustering scores into selected feature sets."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import CalibrationError, InputError
from .merge_engine import default_threads, score_feature, scores_array
from .simgen import CALIBRATION_FAMILIES, sample_distribution

DEFAULT_GRID = (0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.25)
MODES = ("fixed", "simulated", "data_driven")


@dataclass(frozen=True)
class ThresholdSpec:
    """How the score threshold is chosen.

    Parameters
    ----------
    mode : {"fixed", "simulated", "data_driven"}
    alpha0 : float, optional
        Threshold for ``fixed`` mode, in (0, 0.5].
    noise_family : str
        Noise law simulated in ``simulated`` mode; a key of
        ``simgen.CALIBRATION_FAMILIES``.
    grid : tuple of float
        Candidate thresholds, strictly increasing in (0, 0.5].
    reps : int
        Replicates per calibration run.
    detect_tolerance : float
        Largest detection fraction still counted as "detects nothing".
    """

    mode: str = "fixed"
    alpha0: Optional[float] = None
    noise_family: str = "gaussian"
    grid: tuple = DEFAULT_GRID
    reps: int = 100
    detect_tolerance: float = 0.01

    def __post_init__(self):
        mode = self.mode.replace("-", "_")
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))
        if mode not in MODES:
            raise InputError(f"unknown threshold mode {self.mode!r}")
        if mode == "fixed":
            if self.alpha0 is None:
                raise InputError("fixed mode needs alpha0")
            _check_alpha0(self.alpha0)
        g = np.asarray(self.grid)
        if g.size == 0 or np.any(np.diff(g) <= 0) or g[0] <= 0 or g[-1] > 0.5:
            raise InputError("grid must be strictly increasing within (0, 0.5]")
        if self.noise_family not in CALIBRATION_FAMILIES:
            raise InputError(f"unknown noise family {self.noise_family!r}")
        if not 0.0 <= self.detect_tolerance < 1.0:
            raise InputError("detect_tolerance must lie in [0, 1)")
        if self.reps < 1:
            raise InputError("reps must be positive")


@dataclass
class ScreenResult:
    """Features whose score reaches ``alpha0_used`` (0-based indices)."""

    selected: frozenset
    alpha0_used: float
    scores: list = field(repr=False, default_factory=list)


def _check_alpha0(alpha0) -> float:
    a = float(alpha0)
    if not 0.0 < a <= 0.5:
        raise InputError(f"alpha0 must lie in (0, 0.5], got {alpha0}")
    return a


def screen_fixed(scores: Sequence, alpha0: float) -> ScreenResult:
    """Select every feature with ``S_j >= alpha0``."""
    a = _check_alpha0(alpha0)
    s = scores_array(scores)
    selected = frozenset(np.flatnonzero(s >= a).tolist())
    return ScreenResult(selected=selected, alpha0_used=a, scores=list(scores))


def simulate_scores(n: int, family: str, reps: int, seed: int,
                    threads: Optional[int] = None) -> np.ndarray:
    """Scores of ``reps`` independent noise samples of size ``n``.

    Replicate ``r`` uses the ``r``-th child of ``SeedSequence(seed)``, so
    the result does not depend on the thread count.
    """
    if family not in CALIBRATION_FAMILIES:
        raise InputError(f"unknown noise family {family!r}")
    if n < 2:
        raise InputError("n must be at least 2")
    spec = CALIBRATION_FAMILIES[family]
    children = np.random.SeedSequence(int(seed)).spawn(int(reps))

    def one(child):
        return score_feature(sample_distribution(spec, n, child)).score

    threads = default_threads() if threads is None else int(threads)
    if threads <= 1:
        return np.array([one(c) for c in children])
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return np.array(list(pool.map(one, children)))


def detection_table(n: int, spec: ThresholdSpec, rng_seed: int,
                    threads: Optional[int] = None) -> dict:
    """Fraction of simulated noise features with ``S >= alpha`` for every
    grid value ``alpha``."""
    s = simulate_scores(n, spec.noise_family, spec.reps, rng_seed, threads)
    return {a: float(np.mean(s >= a)) for a in spec.grid}


def calibrate_threshold(n: int, spec: ThresholdSpec, rng_seed: int,
                        threads: Optional[int] = None) -> float:
    """Smallest grid threshold whose noise detection fraction is within
    ``spec.detect_tolerance``.

    Raises
    ------
    CalibrationError
        When no grid value qualifies; the detection table is attached.
    """
    if spec.mode != "simulated":
        raise InputError("calibration needs a ThresholdSpec in simulated mode")
    if spec.reps < 50:
        raise InputError("calibration needs at least 50 replicates")
    table = detection_table(n, spec, rng_seed, threads)
    for a in spec.grid:
        if table[a] <= spec.detect_tolerance:
            return a
    raise CalibrationError(
        f"no threshold in the grid keeps the detection rate for "
        f"{spec.noise_family} noise at n={n} within {spec.detect_tolerance}",
        table)
