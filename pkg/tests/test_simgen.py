import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from cosci.errors import InputError
from cosci.interactions import circle_grid, pair_score
from cosci.merge_engine import score_feature
from cosci.simgen import (CALIBRATION_FAMILIES, CopulaSpec, DistributionSpec,
                          beta, cdf, copula_uniforms, equicorrelation,
                          exponential, gaussian, gev, laplace, quantile,
                          sample_copula, sample_distribution,
                          sample_experiment, student_t, triangular)


# -- distributions ---------------------------------------------------------

def test_gaussian_moments():
    x = sample_distribution(gaussian(), 100_000, seed=0)
    assert abs(x.mean()) <= 0.02
    assert abs(x.var() - 1) <= 0.03


def test_beta_mixture_support():
    spec = DistributionSpec.mixture([(0.5, beta(4, 6)), (0.5, beta(7, 3))])
    x = sample_distribution(spec, 10_000, seed=1)
    assert np.all((x >= 0) & (x <= 1))


def test_mixture_labels_follow_weights():
    spec = DistributionSpec.mixture([(0.3, gaussian(-5, 1)),
                                     (0.7, gaussian(5, 1))])
    x, lab = sample_distribution(spec, 20_000, seed=2, return_labels=True)
    share = np.mean(lab == 1)
    assert abs(share - 0.7) <= 3 * math.sqrt(0.21 / 20_000)
    assert np.all(x[lab == 1] > x[lab == 0].mean())


@pytest.mark.parametrize("name", sorted(CALIBRATION_FAMILIES))
def test_samplers_match_reference_law(name):
    spec = CALIBRATION_FAMILIES[name]
    x = sample_distribution(spec, 20_000, seed=3)
    # the closed-form cdf is the oracle for every inverse-cdf sampler
    assert stats.kstest(x, lambda v: cdf(spec, v)).pvalue > 1e-3


def test_gev_heavy_upper_tail():
    # shape 0.8 is a Frechet-type law: unbounded above, bounded below
    x = sample_distribution(gev(0.8), 20_000, seed=4)
    assert x.min() >= -1 / 0.8 - 1e-9
    ref = stats.genextreme(c=-0.8)
    assert stats.kstest(x, ref.cdf).pvalue > 1e-3


def test_quantile_inverts_cdf_for_mixture():
    spec = DistributionSpec.mixture([(0.3, laplace(-3, 1)),
                                     (0.7, exponential(2.0))])
    u = np.linspace(0.01, 0.99, 25)
    np.testing.assert_allclose(cdf(spec, quantile(spec, u)), u, atol=1e-9)


@pytest.mark.parametrize("bad", [
    lambda: gaussian(0, 0), lambda: beta(-1, 2), lambda: student_t(0),
    lambda: triangular(0, 1, 2), lambda: gev(0.8, 0, -1),
    lambda: DistributionSpec.mixture([(0.5, gaussian())]),
    lambda: DistributionSpec.mixture([(1.2, gaussian()), (-0.2, gaussian())]),
    lambda: DistributionSpec("uniform", (0.0, 1.0)),
])
def test_invalid_specs(bad):
    with pytest.raises(InputError):
        bad()


def test_sampler_reproducible():
    a = sample_distribution(laplace(1, 2), 500, seed=9)
    b = sample_distribution(laplace(1, 2), 500, seed=9)
    np.testing.assert_array_equal(a, b)


# -- copulas ---------------------------------------------------------------

def test_identity_copula_independent():
    n = 10_000
    X = sample_copula(CopulaSpec("gaussian", np.eye(3)),
                      [gaussian(), exponential(), beta(2, 2)], n, seed=0)
    C = np.corrcoef(X, rowvar=False)
    assert np.all(np.abs(C[np.triu_indices(3, 1)]) <= 3 / math.sqrt(n))


def test_gaussian_copula_correlation():
    X = sample_copula(CopulaSpec("gaussian", equicorrelation(4, 0.9)),
                      [gaussian()] * 4, 10_000, seed=1)
    C = np.corrcoef(X, rowvar=False)
    assert np.all(np.abs(C[np.triu_indices(4, 1)] - 0.9) <= 0.03)


def test_t_copula_kendall_tau():
    u = copula_uniforms(CopulaSpec("student_t", equicorrelation(2, 0.8), 2),
                        5000, seed=2)
    tau = stats.kendalltau(u[:, 0], u[:, 1]).statistic
    assert abs(tau - 2 / math.pi * math.asin(0.8)) <= 0.05


def test_t_copula_tail_dependence_exceeds_gaussian():
    n = 50_000
    ut = copula_uniforms(CopulaSpec("student_t", equicorrelation(2, 0.8), 2),
                         n, seed=3)
    ug = copula_uniforms(CopulaSpec("gaussian", equicorrelation(2, 0.8)),
                         n, seed=3)

    def joint_tail(u):
        return np.mean((u[:, 0] > 0.995) & (u[:, 1] > 0.995))
    assert joint_tail(ut) > joint_tail(ug)


def test_copula_rejects_non_psd():
    R = np.array([[1.0, 0.9, -0.9], [0.9, 1.0, 0.9], [-0.9, 0.9, 1.0]])
    with pytest.raises(InputError):
        CopulaSpec("gaussian", R)


def test_copula_marginal_count():
    with pytest.raises(InputError):
        sample_copula(CopulaSpec("gaussian", np.eye(2)), [gaussian()], 10, 0)


# -- designs ---------------------------------------------------------------

def test_design_one_shape():
    ds = sample_experiment("I", 200, seed=0)
    assert ds.data.shape == (200, 50)
    assert ds.signal_set == set(range(5))
    assert ds.data.flags.f_contiguous
    assert ds.names[:2] == ["f1", "f2"]


def test_design_four_shape():
    ds = sample_experiment("IV", 20, seed=0, threads=4)
    assert ds.p == 25_000
    assert ds.signal_set == set(range(9))
    assert ds.metadata["noise_columns"] == {
        "cauchy": 6997, "gaussian": 6000, "t5": 5997, "exponential": 5997}


@pytest.mark.parametrize("design,p,signals,noise", [
    ("II", 100, 6, {"gaussian": 47, "t5": 47}),
    ("III", 5000, 7, {"exponential": 1997, "gaussian": 1499, "t5": 1497}),
    ("V", 25, 4, {"gaussian": 21}),
])
def test_design_layouts(design, p, signals, noise):
    ds = sample_experiment(design, 10, seed=0)
    assert ds.p == p
    assert ds.signal_set == set(range(signals))
    assert ds.metadata["noise_columns"] == noise


def test_calibration_design():
    ds = sample_experiment(("calib", "gev"), 30, seed=1)
    assert ds.p == 1 and ds.signal_set == frozenset()
    np.testing.assert_array_equal(
        ds.data, sample_experiment("calib:gev", 30, seed=1).data)


def test_unknown_design():
    with pytest.raises(InputError):
        sample_experiment("VI", 10, 0)
    with pytest.raises(InputError):
        sample_experiment("calib:uniform", 10, 0)


@pytest.mark.parametrize("design", ["I", "II", "V", "corr_V"])
def test_design_reproducible_and_thread_free(design):
    a = sample_experiment(design, 300, seed=5, threads=1)
    b = sample_experiment(design, 300, seed=5, threads=6)
    np.testing.assert_array_equal(a.data, b.data)
    assert a.labels.keys() == b.labels.keys()
    for k in a.labels:
        np.testing.assert_array_equal(a.labels[k], b.labels[k])
    assert not np.array_equal(a.data, sample_experiment(design, 300, 6).data)


def test_crossed_pair_component_correlations():
    ds = sample_experiment("I", 40_000, seed=1)
    comp = 2 * ds.labels[3] + ds.labels[4]
    x4, x5 = ds.data[:, 3], ds.data[:, 4]
    for c, sign in ((0, -1), (1, 1), (2, 1), (3, -1)):
        r = np.corrcoef(x4[comp == c], x5[comp == c])[0, 1]
        assert r == pytest.approx(sign * 0.85, abs=0.02)


def test_label_proportions_design_one():
    n = 20_000
    ds = sample_experiment("I", n, seed=2)
    for col in range(5):
        share = np.mean(ds.labels[col] == 1)
        assert abs(share - 0.5) <= 3 * math.sqrt(0.25 / n)


def test_label_proportions_trimodal():
    n = 20_000
    ds = sample_experiment("II", n, seed=3)
    counts = np.bincount(ds.labels[5], minlength=3) / n
    for share, w in zip(counts, (0.3, 0.3, 0.4)):
        assert abs(share - w) <= 3 * math.sqrt(w * (1 - w) / n)


def test_independent_blocks_uncorrelated():
    n = 5000
    ds = sample_experiment("II", n, seed=4)
    C = np.corrcoef(ds.data, rowvar=False)
    off = C[np.triu_indices(ds.p, 1)]
    # a handful of 4-sigma excursions among ~5000 pairs is expected, but
    # the bulk must sit well inside the band
    assert np.mean(np.abs(off) <= 4 / math.sqrt(n)) >= 0.999


def test_hidden_pair_unimodal_margins_joint_structure():
    marg, joint = [], []
    for seed in range(20):
        ds = sample_experiment("V", 2000, seed)
        marg += [score_feature(ds.data[:, c]).score for c in (0, 1)]
        joint.append(pair_score(ds.data[:, 0], ds.data[:, 1],
                                circle_grid(20)).score)
    assert np.mean(marg) < 0.15
    assert min(joint) > 0.3


def test_correlated_design_dependence():
    n = 4000
    ds = sample_experiment("corr_V", n, seed=0)
    C = stats.spearmanr(ds.data).statistic
    # latent 0.9 Gaussian block, latent 0.8 t block, independent across
    assert np.mean(C[4:14, 4:14][np.triu_indices(10, 1)]) > 0.85
    assert np.mean(C[14:25, 14:25][np.triu_indices(11, 1)]) > 0.7
    assert abs(np.mean(C[4:14, 14:25])) < 0.05
    assert C[0, 5] > 0.5 and C[2, 15] > 0.4


def test_correlated_design_keeps_signal_margins():
    a = sample_experiment("V", 1000, seed=3)
    b = sample_experiment("corr_V", 1000, seed=3)
    for c in range(4):
        np.testing.assert_array_equal(np.sort(a.data[:, c]),
                                      np.sort(b.data[:, c]))
        np.testing.assert_array_equal(np.sort(a.labels[c]),
                                      np.sort(b.labels[c]))
    # row labels travel with their values
    order_a = np.argsort(a.data[:, 2], kind="stable")
    order_b = np.argsort(b.data[:, 2], kind="stable")
    np.testing.assert_array_equal(a.labels[2][order_a], b.labels[2][order_b])


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 60), st.integers(0, 2**31))
def test_any_size_and_seed(n, seed):
    ds = sample_experiment("V", n, seed)
    assert ds.data.shape == (n, 25)
    assert np.all(np.isfinite(ds.data))
