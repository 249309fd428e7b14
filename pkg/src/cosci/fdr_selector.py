"""Data-driven thresholds from an empirical null on the doubled scores.

The doubled scores ``psi = 2 S`` are treated as a two-group mixture.  The
null component is a Beta law fitted to the lower part of the sample by
truncated maximum likelihood, the mixture density comes from a Poisson
regression on histogram counts, and their ratio gives a local false
discovery rate for every feature.  A two-stage rule on those rates picks
the selected set, and the smallest selected score becomes the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import legendre
from scipy import optimize, special

from .errors import FitError, InputError
from .merge_engine import scores_array

_EDGE = 1e-12


@dataclass(frozen=True)
class PsiStats:
    """Doubled scores and their stable ascending order."""

    psi: np.ndarray
    order: np.ndarray

    @property
    def p(self) -> int:
        return self.psi.shape[0]


@dataclass(frozen=True)
class NullModel:
    """Beta null density with its mixing proportion.

    Attributes
    ----------
    pi0 : float
        Null proportion.
    beta_a, beta_b : float
        Shape parameters of the null Beta density.
    truncation_q : float
        Fraction of the sample (from the bottom) used for the fit.
    cutoff : float
        Largest psi value inside the fitted set.
    count : int
        Number of values in the fitted set.
    """

    pi0: float
    beta_a: float
    beta_b: float
    truncation_q: float
    cutoff: float
    count: int = 0

    def pdf(self, psi) -> np.ndarray:
        x = np.clip(np.asarray(psi, dtype=float), _EDGE, 1.0 - _EDGE)
        return np.exp(_beta_logpdf(x, self.beta_a, self.beta_b))


@dataclass(frozen=True)
class MixtureDensity:
    """Histogram-based density estimate on [0, 1]."""

    bin_edges: np.ndarray
    bin_centers: np.ndarray
    fitted_density: np.ndarray
    basis_degree: int
    counts: np.ndarray = field(default=None, repr=False)

    def __call__(self, psi) -> np.ndarray:
        # linear between bin centres, flat beyond the outer ones
        return np.interp(np.asarray(psi, dtype=float), self.bin_centers,
                         self.fitted_density)

    @property
    def riemann_sum(self) -> float:
        return float(np.sum(self.fitted_density * np.diff(self.bin_edges)))


@dataclass
class SelectionResult:
    """Outcome of the two-stage selection.

    ``selected`` holds 0-based feature indices; ``alpha0_hat`` is None when
    nothing is selected.  ``null`` and ``mixture`` are filled in by
    :func:`data_driven_alpha`.
    """

    T: np.ndarray
    k_s: int
    k_d: int
    selected: frozenset
    alpha0_hat: Optional[float]
    delta_p: float
    null: Optional[NullModel] = None
    mixture: Optional[MixtureDensity] = None


@dataclass(frozen=True)
class FdrConfig:
    """Tuning knobs of the data-driven pipeline.

    ``pi0_floor=None`` means 0.9 when ``truncation_q`` is 0.9 and no floor
    otherwise; ``degree=None`` picks the basis degree from the number of
    features (see :func:`default_degree`).
    """

    bins: int = 60
    degree: Optional[int] = None
    pi0_floor: Optional[float] = None
    min_null_count: int = 20
    max_iter: int = 200


def compute_psi(scores: Sequence) -> PsiStats:
    s = scores_array(scores)
    if s.shape[0] < 2:
        raise InputError("need at least 2 scores")
    psi = 2.0 * s
    return PsiStats(psi=psi, order=np.argsort(psi, kind="stable"))


# -- empirical null --------------------------------------------------------

def _beta_logpdf(x, a, b):
    return ((a - 1.0) * np.log(x) + (b - 1.0) * np.log1p(-x)
            - special.betaln(a, b))


def _moment_start(x):
    m, v = float(np.mean(x)), float(np.var(x))
    common = m * (1.0 - m) / v - 1.0 if v > 0 else 1.0
    if not np.isfinite(common) or common <= 0:
        common = 1.0
    return max(m * common, 1e-2), max((1.0 - m) * common, 1e-2)


def fit_empirical_null(psi: PsiStats, truncation_q: float = 0.9,
                       pi0_floor: Optional[float] = None,
                       min_count: int = 20, max_iter: int = 200) -> NullModel:
    """Truncated-sample maximum likelihood for a Beta null.

    The lowest ``floor(q p)`` values form the fitted set; values above its
    largest member (the cutoff) are assumed to carry no information about
    the null shape.  For fixed shapes the likelihood in ``pi0`` peaks at
    ``count / (p H)`` with ``H`` the null mass below the cutoff; when that
    exceeds one, the shapes are refitted with ``pi0 = 1``.

    Parameters
    ----------
    psi : PsiStats
    truncation_q : float
        In [0.5, 1).
    pi0_floor : float, optional
        Lower clamp on the returned ``pi0``.  None applies 0.9 exactly when
        ``truncation_q == 0.9``.
    min_count : int
        Smallest admissible size of the fitted set.
    max_iter : int
        Optimizer iteration budget.
    """
    q = float(truncation_q)
    if not 0.5 <= q < 1.0:
        raise InputError(f"truncation_q must lie in [0.5, 1), got {q}")
    if pi0_floor is None:
        pi0_floor = 0.9 if q == 0.9 else 0.0
    p = psi.p
    count = int(math.floor(q * p))
    if count < min_count:
        raise InputError(f"only {count} values below the cutoff; "
                         f"at least {min_count} needed")
    ordered = psi.psi[psi.order]
    A = ordered[:count]
    cutoff = float(A[-1])
    if A[0] == A[-1]:
        raise FitError("all values in the fitted set are equal", stage="null",
                       diagnostics={"value": cutoff})
    x = np.clip(A, _EDGE, 1.0 - _EDGE)
    slx, sl1x = float(np.sum(np.log(x))), float(np.sum(np.log1p(-x)))
    c = min(cutoff, 1.0)

    def logH(a, b):
        return math.log(max(special.betainc(a, b, c), 1e-300))

    def shape_part(a, b):
        return ((a - 1.0) * slx + (b - 1.0) * sl1x
                - count * special.betaln(a, b))

    def neg_truncated(theta):
        a, b = _shapes(theta)
        return -(shape_part(a, b) - count * logH(a, b))

    def neg_full(theta):
        # pi0 = 1: binomial term plus the untruncated density of the set
        a, b = _shapes(theta)
        H = special.betainc(a, b, c)
        tail = (p - count) * math.log(max(1.0 - H, 1e-300))
        return -(shape_part(a, b) + tail)

    theta0 = _theta(*_moment_start(x))
    res = _minimize(neg_truncated, theta0, max_iter)
    a, b = _shapes(res.x)
    pi0 = (count / p) / special.betainc(a, b, c)
    if pi0 > 1.0:
        res = _minimize(neg_full, res.x, max_iter)
        a, b = _shapes(res.x)
        pi0 = 1.0
    pi0 = max(float(pi0), float(pi0_floor))
    return NullModel(pi0=pi0, beta_a=float(a), beta_b=float(b),
                     truncation_q=q, cutoff=cutoff, count=count)


# The optimizer works on (logit mean, log concentration): concentrated
# samples make log a and log b nearly collinear, which stalls the simplex.

def _theta(a, b):
    return np.array([math.log(a / b), math.log(a + b)])


def _shapes(theta):
    k = math.exp(theta[1])
    m = special.expit(theta[0])
    return m * k, (1.0 - m) * k


def _minimize(fun, theta0, max_iter):
    res = optimize.minimize(fun, theta0, method="Nelder-Mead",
                            options={"maxiter": max_iter * 10,
                                     "xatol": 1e-7, "fatol": 1e-9})
    if not res.success or not np.all(np.isfinite(res.x)) \
            or np.any(np.abs(res.x) > 30):
        raise FitError("Beta null fit did not converge", stage="null",
                       diagnostics={"message": res.message,
                                    "x": res.x.tolist(), "nit": res.nit})
    return res


# -- mixture density -------------------------------------------------------

def _poisson_deviance(y, eta):
    mu = np.exp(np.minimum(eta, 700.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        dev = 2.0 * float(np.sum(special.xlogy(y, y / mu) - (y - mu)))
    return mu, dev if np.isfinite(dev) else np.inf


def _poisson_irls(V, y, max_iter=100, tol=1e-10):
    """Log-link Poisson regression by iteratively reweighted least squares."""
    mu = y + 0.1 * max(y.mean(), 1e-3)
    eta = np.log(mu)
    beta, dev_old = None, np.inf
    for it in range(max_iter):
        sw = np.sqrt(mu)
        z = eta + (y - mu) / mu
        beta_new = np.linalg.lstsq(V * sw[:, None], z * sw, rcond=None)[0]
        mu_new, dev = _poisson_deviance(y, V @ beta_new)
        # halve the step while the deviance goes up
        halvings = 0
        while beta is not None and not dev <= dev_old * (1 + 1e-12):
            halvings += 1
            if halvings > 30:
                raise FitError("step halving failed", stage="mixture",
                               diagnostics={"iteration": it,
                                            "deviance": dev_old})
            beta_new = 0.5 * (beta_new + beta)
            mu_new, dev = _poisson_deviance(y, V @ beta_new)
        beta, mu, eta = beta_new, mu_new, V @ beta_new
        if abs(dev_old - dev) <= tol * (abs(dev) + 0.1):
            return beta, mu, it + 1
        dev_old = dev
    raise FitError("Poisson regression did not converge", stage="mixture",
                   diagnostics={"iterations": max_iter, "deviance": dev_old})


def default_degree(p: int) -> int:
    """Polynomial degree used when none is given.

    Degree 5 keeps the fit stable for a few dozen to a few thousand
    features; from 10_000 values on, the histogram supports degree 8, which
    follows steep boundary behaviour much more closely.
    """
    return 5 if p < 10_000 else 8


def lindsey_density(psi: PsiStats, bins: int = 60,
                    degree: Optional[int] = None) -> MixtureDensity:
    """Smooth density of ``psi`` from a Poisson fit to bin counts.

    The bins cover ``[0, max psi]``.  The log-mean of each bin count is a
    Legendre polynomial of the bin centre (mapped to [-1, 1]); the fitted
    means divided by their total
    and the bin width give the density.  ``degree=None`` picks
    :func:`default_degree` from the number of values.
    """
    if bins < 20:
        raise InputError("need at least 20 bins")
    if degree is None:
        degree = default_degree(psi.p)
    if degree < 2:
        raise InputError("degree must be at least 2")
    values = np.clip(psi.psi, 0.0, 1.0)
    if values.size == 0:
        raise InputError("empty histogram")
    # bins span [0, max psi]: empty bins past the data have no finite fit
    top = float(values.max())
    edges = np.linspace(0.0, top if top > 0 else 1.0, bins + 1)
    counts, _ = np.histogram(values, bins=edges)
    centers = 0.5 * (edges[:-1] + edges[1:])
    V = legendre.legvander(2.0 * centers / edges[-1] - 1.0, degree)
    _, mu, _ = _poisson_irls(V, counts.astype(float))
    width = np.diff(edges)
    density = mu / np.sum(mu * width)
    return MixtureDensity(bin_edges=edges, bin_centers=centers,
                          fitted_density=density, basis_degree=degree,
                          counts=counts)


# -- local fdr and selection -----------------------------------------------

def local_fdr(null: NullModel, mix: MixtureDensity, psi: PsiStats) -> np.ndarray:
    """``pi0 f0(psi) / f(psi)`` clamped to [0, 1]; 1 where ``f`` vanishes."""
    f0 = null.pdf(psi.psi)
    f = mix(psi.psi)
    with np.errstate(divide="ignore", invalid="ignore"):
        T = null.pi0 * f0 / f
    T = np.where((f > 0) & np.isfinite(T), T, 1.0)
    return np.clip(T, 0.0, 1.0)


def delta_level(p: int) -> float:
    return min(float(p), 1.0 / math.log(p))


def two_stage_select(T, pi0_hat: float, scores: Sequence) -> SelectionResult:
    """Two-stage screening on local fdr values.

    Stage 1 keeps the ``k_s`` smallest rates, with ``k_s`` the first rank
    whose upper tail of ``1 - T`` sums to at most ``p (1 - pi0) delta``
    (all ``p`` features when even the last rank fails).  Stage 2 keeps the
    largest prefix of those whose running mean rate is at most ``delta``.
    Ties at either cutoff are kept.
    """
    T = np.asarray(T, dtype=np.float64)
    p = T.shape[0]
    if p < 3:
        raise InputError("two-stage selection needs p >= 3")
    s = scores_array(scores)
    if s.shape[0] != p:
        raise InputError("scores and T differ in length")
    delta = delta_level(p)
    ordered = np.sort(T, kind="stable")
    bound = p * (1.0 - pi0_hat) * delta

    tails = np.cumsum((1.0 - ordered)[::-1])[::-1]   # tails[j-1] = sum_{i>=j}
    passing = np.flatnonzero(tails <= bound)
    k_s = int(passing[0]) + 1 if passing.size else p

    means = np.cumsum(ordered[:k_s]) / np.arange(1, k_s + 1)
    ok = np.flatnonzero(means <= delta)
    if ok.size == 0:
        return SelectionResult(T=T, k_s=k_s, k_d=0, selected=frozenset(),
                               alpha0_hat=None, delta_p=delta)
    k_d = int(ok[-1]) + 1
    cut = ordered[k_d - 1]
    idx = np.flatnonzero(T <= cut)
    return SelectionResult(T=T, k_s=k_s, k_d=k_d,
                           selected=frozenset(idx.tolist()),
                           alpha0_hat=float(s[idx].min()), delta_p=delta)


def data_driven_alpha(scores: Sequence, truncation_q: float = 0.9,
                      config: Optional[FdrConfig] = None) -> SelectionResult:
    """Doubled scores, null fit, mixture fit, local fdr, then selection."""
    config = config or FdrConfig()
    psi = compute_psi(scores)
    null = fit_empirical_null(psi, truncation_q, config.pi0_floor,
                              config.min_null_count, config.max_iter)
    mix = lindsey_density(psi, config.bins, config.degree)
    T = local_fdr(null, mix, psi)
    result = two_stage_select(T, null.pi0, scores)
    result.null = null
    result.mixture = mix
    return result
