"""Synthetic data for screening experiments.

Every column draws from its own Philox substream spawned from the dataset
seed, so a matrix is bit-identical for a given ``(design, n, seed)`` no
matter how many threads generate it.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy import special, stats

from .errors import InputError

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator]

KINDS = ("gaussian", "student_t", "cauchy", "exponential", "laplace",
         "lognormal", "beta", "gev", "triangular", "mixture")


@dataclass(frozen=True)
class DistributionSpec:
    """A univariate law.

    Parameters by kind::

        gaussian     (mean, sd)
        student_t    (df,)
        cauchy       (loc, scale)
        exponential  (rate,)
        laplace      (loc, scale)
        lognormal    (meanlog, sdlog)
        beta         (a, b)
        gev          (shape, loc, scale)    shape > 0 is the heavy-tailed case
        triangular   (low, high, mode)
        mixture      no params; ``components`` holds (weight, spec) pairs
    """

    kind: str
    params: tuple = ()
    components: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown distribution kind {self.kind!r}")
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))
        object.__setattr__(self, "components", tuple(
            (float(w), s) for w, s in self.components))
        _validate(self)

    @classmethod
    def mixture(cls, components: Sequence) -> "DistributionSpec":
        return cls("mixture", components=tuple(components))

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.components])


def gaussian(mean=0.0, sd=1.0):
    return DistributionSpec("gaussian", (mean, sd))


def student_t(df):
    return DistributionSpec("student_t", (df,))


def cauchy(loc=0.0, scale=1.0):
    return DistributionSpec("cauchy", (loc, scale))


def exponential(rate=1.0):
    return DistributionSpec("exponential", (rate,))


def laplace(loc=0.0, scale=1.0):
    return DistributionSpec("laplace", (loc, scale))


def lognormal(meanlog, sdlog):
    return DistributionSpec("lognormal", (meanlog, sdlog))


def beta(a, b):
    return DistributionSpec("beta", (a, b))


def gev(shape, loc=0.0, scale=1.0):
    return DistributionSpec("gev", (shape, loc, scale))


def triangular(low, high, mode):
    return DistributionSpec("triangular", (low, high, mode))


_ARITY = {"gaussian": 2, "student_t": 1, "cauchy": 2, "exponential": 1,
          "laplace": 2, "lognormal": 2, "beta": 2, "gev": 3, "triangular": 3,
          "mixture": 0}


def _validate(spec: DistributionSpec) -> None:
    k, p = spec.kind, spec.params
    if len(p) != _ARITY[k]:
        raise InputError(f"{k} takes {_ARITY[k]} parameters, got {len(p)}")
    if not all(math.isfinite(v) for v in p):
        raise InputError(f"{k} parameters must be finite")
    bad = False
    if k in ("gaussian", "cauchy", "laplace", "lognormal"):
        bad = p[1] <= 0
    elif k in ("student_t", "exponential"):
        bad = p[0] <= 0
    elif k == "beta":
        bad = p[0] <= 0 or p[1] <= 0
    elif k == "gev":
        bad = p[2] <= 0
    elif k == "triangular":
        bad = not (p[0] <= p[2] <= p[1]) or p[0] >= p[1]
    elif k == "mixture":
        w = np.array([c[0] for c in spec.components])
        bad = (len(w) == 0 or np.any(w <= 0)
               or abs(w.sum() - 1.0) > 1e-12
               or any(not isinstance(c[1], DistributionSpec)
                      for c in spec.components))
    if bad:
        raise InputError(f"invalid {k} specification: {spec}")


def _generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(int(seed))
    return np.random.Generator(np.random.Philox(seed))


# -- univariate sampling ---------------------------------------------------

def _draw(spec: DistributionSpec, n: int, rng: np.random.Generator):
    k, p = spec.kind, spec.params
    if k == "gaussian":
        return p[0] + p[1] * rng.standard_normal(n)
    if k == "student_t":
        return rng.standard_t(p[0], n)
    if k == "cauchy":
        return p[0] + p[1] * np.tan(np.pi * (rng.random(n) - 0.5))
    if k == "exponential":
        return rng.standard_exponential(n) / p[0]
    if k == "laplace":
        e = rng.standard_exponential((2, n))
        return p[0] + p[1] * (e[0] - e[1])
    if k == "lognormal":
        return np.exp(p[0] + p[1] * rng.standard_normal(n))
    if k == "beta":
        return rng.beta(p[0], p[1], n)
    if k == "gev":
        return _gev_quantile(1.0 - rng.random(n), *p)
    if k == "triangular":
        return _triangular_quantile(rng.random(n), *p)
    raise AssertionError(k)


def _gev_quantile(u, shape, loc, scale):
    # u in (0, 1]; the Gumbel limit at shape 0
    t = -np.log(u)
    if shape == 0.0:
        return loc - scale * np.log(t)
    return loc + scale * np.expm1(-shape * np.log(t)) / shape


def _triangular_quantile(u, low, high, mode):
    c = (mode - low) / (high - low)
    left = low + np.sqrt(u * (high - low) * (mode - low))
    right = high - np.sqrt((1.0 - u) * (high - low) * (high - mode))
    return np.where(u < c, left, right)


def _sample(spec, n, rng):
    if spec.kind != "mixture":
        return _draw(spec, n, rng), np.zeros(n, dtype=np.int64)
    cum = np.cumsum(spec.weights)
    labels = np.minimum(np.searchsorted(cum, rng.random(n), side="right"),
                        len(cum) - 1).astype(np.int64)
    x = np.empty(n)
    for c, (_, comp) in enumerate(spec.components):
        rows = labels == c
        x[rows] = _sample(comp, int(rows.sum()), rng)[0]
    return x, labels


def sample_distribution(spec: DistributionSpec, n: int, seed: SeedLike,
                        return_labels: bool = False):
    """Draw ``n`` i.i.d. values from ``spec``.

    Mixtures draw a component indicator for every row first, then each
    component's values in component order.  With ``return_labels`` the
    indicators (0-based component ids, all zero for a plain law) are
    returned alongside the values.
    """
    n = int(n)
    if n < 1:
        raise InputError("n must be positive")
    x, labels = _sample(spec, n, _generator(seed))
    return (x, labels) if return_labels else x


# -- distribution functions, for copula marginals --------------------------

def _frozen(spec: DistributionSpec):
    k, p = spec.kind, spec.params
    if k == "gaussian":
        return stats.norm(p[0], p[1])
    if k == "student_t":
        return stats.t(p[0])
    if k == "cauchy":
        return stats.cauchy(p[0], p[1])
    if k == "exponential":
        return stats.expon(scale=1.0 / p[0])
    if k == "laplace":
        return stats.laplace(p[0], p[1])
    if k == "lognormal":
        return stats.lognorm(p[1], scale=math.exp(p[0]))
    if k == "beta":
        return stats.beta(p[0], p[1])
    if k == "gev":
        # scipy's shape sign is the opposite of the one used here
        return stats.genextreme(-p[0], p[1], p[2])
    if k == "triangular":
        return stats.triang((p[2] - p[0]) / (p[1] - p[0]), p[0], p[1] - p[0])
    raise AssertionError(k)


def cdf(spec: DistributionSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if spec.kind == "mixture":
        return sum(w * cdf(s, x) for w, s in spec.components)
    return _frozen(spec).cdf(x)


def quantile(spec: DistributionSpec, u) -> np.ndarray:
    """Inverse distribution function; mixtures are inverted by bisection."""
    u = np.asarray(u, dtype=float)
    if spec.kind != "mixture":
        return _frozen(spec).ppf(u)
    lo = np.min([quantile(s, u) for _, s in spec.components], axis=0)
    hi = np.max([quantile(s, u) for _, s in spec.components], axis=0)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        below = cdf(spec, mid) < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 1e-13 * np.maximum(1.0, np.abs(mid))):
            break
    return 0.5 * (lo + hi)


# -- copulas ---------------------------------------------------------------

@dataclass(frozen=True)
class CopulaSpec:
    """Elliptical copula.

    Parameters
    ----------
    kind : {"gaussian", "student_t"}
    correlation : array_like, shape (k, k)
        Symmetric positive semi-definite with unit diagonal.
    dof : int, optional
        Degrees of freedom, ``student_t`` only.
    """

    kind: str
    correlation: np.ndarray
    dof: Optional[int] = None

    def __post_init__(self):
        R = np.array(self.correlation, dtype=float)
        if self.kind not in ("gaussian", "student_t"):
            raise InputError(f"unknown copula {self.kind!r}")
        if self.kind == "student_t" and (self.dof is None or self.dof <= 0):
            raise InputError("t copula needs positive dof")
        if R.ndim != 2 or R.shape[0] != R.shape[1]:
            raise InputError("correlation must be square")
        if not np.allclose(R, R.T, atol=1e-12, rtol=0):
            raise InputError("correlation must be symmetric")
        if not np.allclose(np.diag(R), 1.0, atol=1e-12, rtol=0):
            raise InputError("correlation must have a unit diagonal")
        R.setflags(write=False)
        object.__setattr__(self, "correlation", R)
        self.factor()

    @property
    def k(self) -> int:
        return self.correlation.shape[0]

    def factor(self) -> np.ndarray:
        """A matrix ``L`` with ``L @ L.T == correlation``."""
        w, V = np.linalg.eigh(self.correlation)
        if w[0] < -1e-10 * max(1.0, w[-1]):
            raise InputError("correlation is not positive semi-definite")
        return V * np.sqrt(np.clip(w, 0.0, None))


def equicorrelation(k: int, rho: float) -> np.ndarray:
    R = np.full((k, k), float(rho))
    np.fill_diagonal(R, 1.0)
    return R


def copula_uniforms(spec: CopulaSpec, n: int, seed: SeedLike) -> np.ndarray:
    """``n x k`` draws with uniform margins and the copula's dependence."""
    rng = _generator(seed)
    z = rng.standard_normal((int(n), spec.k)) @ spec.factor().T
    if spec.kind == "gaussian":
        return special.ndtr(z)
    w = rng.chisquare(spec.dof, int(n))
    return stats.t.cdf(z * np.sqrt(spec.dof / w)[:, None], spec.dof)


def _open_unit(u):
    # keep quantile functions away from their infinite endpoints
    return np.clip(u, np.finfo(float).tiny, 1.0 - np.finfo(float).epsneg)


def sample_copula(spec: CopulaSpec, marginals: Sequence[DistributionSpec],
                  n: int, seed: SeedLike) -> np.ndarray:
    """Draw ``n`` rows whose margins follow ``marginals``."""
    if len(marginals) != spec.k:
        raise InputError(f"copula has dimension {spec.k}, "
                         f"got {len(marginals)} marginals")
    u = _open_unit(copula_uniforms(spec, n, seed))
    out = np.empty((int(n), spec.k), order="F")
    for c, m in enumerate(marginals):
        out[:, c] = quantile(m, u[:, c])
    return out


# -- datasets --------------------------------------------------------------

@dataclass
class DatasetMatrix:
    """An ``n x p`` observation matrix stored column-major.

    Attributes
    ----------
    data : ndarray, shape (n, p), Fortran order
    signal_set : frozenset of int
        0-based indices of the informative columns.
    labels : dict
        Component memberships per signal column (0-based column index to
        ``int[n]``).  Empty for data read from disk.
    seed : int or None
    names : list of str
    metadata : dict
        Free-form description of the generating design.
    """

    data: np.ndarray
    signal_set: frozenset = frozenset()
    labels: dict = field(default_factory=dict)
    seed: Optional[int] = None
    names: Optional[list] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.data = np.asfortranarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise InputError("dataset must be a 2-d matrix")
        self.signal_set = frozenset(int(j) for j in self.signal_set)
        if self.names is None:
            self.names = [f"f{j + 1}" for j in range(self.p)]

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]


def _bimodal_beta():
    return DistributionSpec.mixture([(0.5, beta(4, 6)), (0.5, beta(7, 3))])


def _lognormal_gaussian():
    # the second argument of N(4, 0.5) is read as a standard deviation
    return DistributionSpec.mixture([(0.5, lognormal(0.2, 0.35)),
                                     (0.5, gaussian(4, 0.5))])


def _bimodal_laplace():
    return DistributionSpec.mixture([(0.5, laplace(3, 1.5)),
                                     (0.5, laplace(5, 1.5))])


def _trimodal_gaussian():
    return DistributionSpec.mixture([(0.3, gaussian(-2.5, 1)),
                                     (0.3, gaussian(0, 1)),
                                     (0.4, gaussian(2.5, 1))])


def _close_gaussian():
    return DistributionSpec.mixture([(0.5, gaussian(-1.1, 1)),
                                     (0.5, gaussian(1.1, 1))])


def _trimodal_laplace():
    return DistributionSpec.mixture([(0.3, laplace(-3, 1)),
                                     (0.35, laplace(0, 1)),
                                     (0.35, laplace(3, 1))])


def _trimodal_beta():
    return DistributionSpec.mixture([(0.3, beta(8, 2)), (0.35, beta(5, 5)),
                                     (0.35, beta(2, 8))])


def sample_gaussian_mixture_2d(weights, means, covariances, n: int,
                               seed: SeedLike):
    """``n`` rows from a mixture of bivariate normals, plus component ids."""
    rng = _generator(seed)
    weights = np.asarray(weights, dtype=float)
    cum = np.cumsum(weights)
    labels = np.minimum(np.searchsorted(cum, rng.random(n), side="right"),
                        len(cum) - 1).astype(np.int64)
    out = np.empty((n, 2))
    for c, (mu, cov) in enumerate(zip(means, covariances)):
        rows = labels == c
        L = np.linalg.cholesky(np.asarray(cov, dtype=float))
        out[rows] = np.asarray(mu) + rng.standard_normal((rows.sum(), 2)) @ L.T
    return out, labels


def _crossed_pair(n, rng):
    # four equally weighted components on the corners of a square, with
    # alternating within-component correlation
    neg = [[1.0, -0.85], [-0.85, 1.0]]
    pos = [[1.0, 0.85], [0.85, 1.0]]
    xy, comp = sample_gaussian_mixture_2d(
        [0.25] * 4, [(0, 0), (0, -4), (4, 0), (4, -4)], [neg, pos, pos, neg],
        n, rng)
    return xy, [np.isin(comp, (2, 3)).astype(np.int64),
                np.isin(comp, (1, 3)).astype(np.int64)]


def _hidden_pair(n, rng):
    # jointly bimodal, each margin unimodal
    cov = [[1.0, 0.9], [0.9, 1.0]]
    xy, comp = sample_gaussian_mixture_2d(
        [0.5, 0.5], [(0.9, -0.9), (-0.9, 0.9)], [cov, cov], n, rng)
    return xy, [comp, comp.copy()]


def _univariate(spec):
    def gen(n, rng):
        x, lab = sample_distribution(spec, n, rng, return_labels=True)
        return x[:, None], [lab]
    return gen


# A design is a list of column blocks: (generator, width, is_signal, name).
# Signal blocks come first, then noise blocks.

def _noise_blocks(p_noise, shares):
    """Split ``p_noise`` columns by ``shares`` (rounded down); the remainder
    goes to the Gaussian block."""
    counts = {name: int(math.floor(frac * p_noise)) for name, frac, _ in shares}
    counts["gaussian"] += p_noise - sum(counts.values())
    return [(_univariate(spec), counts[name], False, name)
            for name, _, spec in shares if counts[name] > 0], counts


def _signals(design):
    first = [(_univariate(_bimodal_beta()), 1), (_univariate(_lognormal_gaussian()), 1),
             (_univariate(_bimodal_laplace()), 1), (_crossed_pair, 2)]
    if design == "I":
        return first
    first = first + [(_univariate(_trimodal_gaussian()), 1)]
    if design == "II":
        return first
    first = first + [(_univariate(_close_gaussian()), 1)]
    if design == "III":
        return first
    return first + [(_univariate(_trimodal_laplace()), 1),
                    (_univariate(_trimodal_beta()), 1)]


_NOISE_SHARES = {
    "I": [("gaussian", 1.0, gaussian())],
    "II": [("gaussian", 0.5, gaussian()), ("t5", 0.5, student_t(5))],
    "III": [("exponential", 0.4, exponential()), ("gaussian", 0.3, gaussian()),
            ("t5", 0.3, student_t(5))],
    "IV": [("cauchy", 0.28, cauchy()), ("gaussian", 0.24, gaussian()),
           ("t5", 0.24, student_t(5)), ("exponential", 0.24, exponential())],
}

_WIDTH = {"I": 50, "II": 100, "III": 5000, "IV": 25000}

CALIBRATION_FAMILIES = {
    "gaussian": gaussian(),
    "t1": student_t(1),
    "exponential": exponential(),
    "cauchy": cauchy(),
    "laplace": laplace(),
    "gev": gev(0.8),
    "beta13": beta(1, 3),
    "triangular": triangular(0.0, 1.0, 0.8),
}


def _layout(design: str):
    if design in _WIDTH:
        sig = [(g, w, True, "signal") for g, w in _signals(design)]
        p_signal = sum(w for _, w, _, _ in sig)
        noise, counts = _noise_blocks(_WIDTH[design] - p_signal,
                                      _NOISE_SHARES[design])
        return sig + noise, counts
    if design in ("V", "corr_V"):
        sig = [(_hidden_pair, 2, True, "signal"),
               (_univariate(_bimodal_beta()), 1, True, "signal"),
               (_univariate(_lognormal_gaussian()), 1, True, "signal")]
        return sig + [(_univariate(gaussian()), 21, False, "gaussian")], \
            {"gaussian": 21}
    if design.startswith("calib:"):
        family = design.split(":", 1)[1]
        if family not in CALIBRATION_FAMILIES:
            raise InputError(f"unknown calibration family {family!r}; "
                             f"choose from {sorted(CALIBRATION_FAMILIES)}")
        return [(_univariate(CALIBRATION_FAMILIES[family]), 1, False,
                 family)], {family: 1}
    raise InputError(f"unknown design {design!r}")


def _normalize_design(design_id) -> str:
    if isinstance(design_id, tuple):
        return "calib:" + str(design_id[1])
    d = str(design_id)
    return d if d.startswith("calib:") else d.strip()


def _couple_by_rank(values, latent):
    """Reorder rows of ``values`` so their first column has the ranks of
    ``latent``; returns the row permutation applied."""
    order_v = np.argsort(values[:, 0], kind="stable")
    order_l = np.argsort(latent, kind="stable")
    perm = np.empty(len(latent), dtype=np.int64)
    perm[order_l] = order_v
    return perm


def sample_experiment(design_id, n: int, seed: int,
                      threads: int = 1) -> DatasetMatrix:
    """Generate one replicate of a simulation design.

    Parameters
    ----------
    design_id : str
        ``"I"``, ``"II"``, ``"III"``, ``"IV"``, ``"V"``, ``"corr_V"`` or
        ``"calib:<family>"`` with a family from ``CALIBRATION_FAMILIES``
        (a single noise column).
    n : int
        Number of observations.
    seed : int
    threads : int
        Worker threads for column generation; the output does not depend
        on it.
    """
    design = _normalize_design(design_id)
    n = int(n)
    if n < 2:
        raise InputError("n must be at least 2")
    blocks, counts = _layout(design)
    p = sum(b[1] for b in blocks)
    root = np.random.SeedSequence(int(seed))
    streams = root.spawn(p)

    data = np.empty((n, p), order="F")
    labels = {}
    signal = []
    jobs = []
    col = 0
    for gen, width, is_signal, _ in blocks:
        if is_signal:
            jobs.append((gen, col, width))
            signal.extend(range(col, col + width))
        else:
            jobs.extend((gen, c, 1) for c in range(col, col + width))
        col += width

    def run(job):
        gen, start, width = job
        values, labs = gen(n, _generator(streams[start]))
        data[:, start:start + width] = values
        return start, labs

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]
    for start, labs in results:
        if start in signal:
            for k, lab in enumerate(labs):
                labels[start + k] = lab

    if design == "corr_V":
        _add_dependence(data, labels, np.random.SeedSequence(
            entropy=int(seed), spawn_key=(p,)))

    meta = {"design": design, "noise_columns": counts}
    return DatasetMatrix(data=data, signal_set=frozenset(signal),
                         labels=labels, seed=int(seed), metadata=meta)


def _add_dependence(data, labels, seed):
    """Tie the signal columns to blocks of Gaussian noise columns.

    The pair (X1, X2) shares a Gaussian copula (all off-diagonal
    correlations 0.9) with columns 5..14; X3 and X4 share a t copula with
    2 degrees of freedom (off-diagonal 0.8) with columns 15..25 (1-based).
    Noise columns take standard normal margins; signal rows are permuted
    so their ranks follow the latent copula coordinates, which keeps every
    signal margin and its component labels intact.
    """
    n = data.shape[0]
    gseed, tseed = seed.spawn(2)

    k1 = 1 + 10
    u = copula_uniforms(CopulaSpec("gaussian", equicorrelation(k1, 0.9)),
                        n, gseed)
    data[:, 4:14] = special.ndtri(_open_unit(u[:, 1:]))
    perm = _couple_by_rank(data[:, 0:2], u[:, 0])
    data[:, 0:2] = data[perm, 0:2]
    for c in (0, 1):
        labels[c] = labels[c][perm]

    k2 = 2 + 11
    u = copula_uniforms(CopulaSpec("student_t", equicorrelation(k2, 0.8),
                                   dof=2), n, tseed)
    data[:, 14:25] = special.ndtri(_open_unit(u[:, 2:]))
    for c in (2, 3):
        perm = _couple_by_rank(data[:, c:c + 1], u[:, c - 2])
        data[:, c] = data[perm, c]
        labels[c] = labels[c][perm]
