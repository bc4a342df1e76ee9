import math

import numpy as np
import pytest

from semgcascade.dnb import (
    DynamicNaiveBayes,
    GaussianFeatureModel,
    fit_gaussian,
    fit_gmm_feature,
    fit_priors,
    kmeans_pp_init,
    softmax_supports,
    tune_gmm_components,
    variance_floors,
)


def _model_from_densities(priors, density_table):
    """DynamicNaiveBayes with one feature per channel whose Gaussian density
    at x = 0 equals the requested probability value (density peak 1/sqrt(2 pi
    var) = p)."""
    table = np.asarray(density_table, dtype=float)  # (M, L)
    m, l = table.shape
    clf = DynamicNaiveBayes(n_channels=l)
    clf.block_dim_ = 1
    clf.classes_ = np.arange(1, m + 1)
    clf.priors_ = np.asarray(priors, dtype=float)
    clf.log_priors_ = np.log(clf.priors_)
    variances = 1.0 / (2.0 * math.pi * table ** 2)
    clf.model_ = GaussianFeatureModel(
        means=np.zeros((m, l)),
        vars=variances,
        var_floor=np.full(l, 1e-300),
    )
    return clf


class TestPriors:
    def test_balanced(self):
        assert np.allclose(fit_priors([1, 1, 2, 2]), [0.5, 0.5])

    def test_imbalanced(self):
        assert np.allclose(fit_priors([1, 1, 1, 2]), [0.75, 0.25])

    def test_single_class(self):
        assert np.allclose(fit_priors([1, 1, 1]), [1.0])

    def test_sum_to_one(self, rng):
        labels = rng.integers(1, 5, size=100)
        labels[:4] = [1, 2, 3, 4]
        assert np.isclose(fit_priors(labels).sum(), 1.0)


class TestFitGaussian:
    def test_simple_moments(self):
        X = np.array([[0.0], [2.0], [5.0], [5.0]])
        y = np.array([1, 1, 2, 2])
        model = fit_gaussian(X, y)
        assert np.isclose(model.means[0, 0], 1.0)
        assert np.isclose(model.vars[0, 0], 1.0)  # biased variance

    def test_constant_feature_floored(self):
        X = np.array([[1.0, 0.0], [1.0, 1.0], [1.0, 2.0], [1.0, 3.0]])
        y = np.array([1, 1, 2, 2])
        model = fit_gaussian(X, y)
        floor = variance_floors(X)
        assert model.vars[0, 0] == floor[0]
        assert np.all(np.isfinite(model.log_density(X)))

    def test_small_class_error(self):
        X = np.array([[0.0], [1.0], [2.0]])
        with pytest.raises(ValueError, match="class 2"):
            fit_gaussian(X, np.array([1, 1, 2]))

    def test_deterministic(self, rng):
        X = rng.standard_normal((30, 4))
        y = np.array([1, 2] * 15)
        a = fit_gaussian(X, y)
        b = fit_gaussian(X, y)
        assert np.array_equal(a.means, b.means)
        assert np.array_equal(a.vars, b.vars)


class TestKmeansInit:
    def test_two_points(self, rng):
        centers = kmeans_pp_init(np.array([0.0, 10.0]), 2, rng)
        assert sorted(centers.tolist()) == [0.0, 10.0]

    def test_k_one(self, rng):
        values = np.array([1.0, 2.0, 3.0])
        c = kmeans_pp_init(values, 1, rng)
        assert len(c) == 1 and c[0] in values

    def test_deterministic(self):
        values = np.arange(20.0)
        a = kmeans_pp_init(values, 3, np.random.default_rng(0))
        b = kmeans_pp_init(values, 3, np.random.default_rng(0))
        assert np.array_equal(a, b)

    def test_empty_error(self, rng):
        with pytest.raises(ValueError):
            kmeans_pp_init(np.array([]), 2, rng)

    def test_k_capped_at_distinct(self, rng):
        centers = kmeans_pp_init(np.array([5.0] * 10), 3, rng)
        assert len(centers) == 1


class TestGmmFeature:
    def test_separated_clusters(self, rng):
        values = np.concatenate([rng.normal(0, 0.1, 100),
                                 rng.normal(10, 0.1, 100)])
        w, means, variances = fit_gmm_feature(values, 2, rng)
        assert np.isclose(w.sum(), 1.0)
        assert min(abs(m) for m in means) < 0.2
        assert min(abs(m - 10) for m in means) < 0.2

    def test_k_one_equals_moments(self, rng):
        values = rng.standard_normal(50)
        w, means, variances = fit_gmm_feature(values, 1, rng)
        assert np.isclose(means[0], values.mean())
        assert np.isclose(variances[0], values.var())
        assert w[0] == 1.0


class TestTuneComponents:
    def test_single_grid(self, rng):
        X = rng.standard_normal((40, 2))
        y = np.array([1, 2] * 20)
        X[y == 2] += 4.0
        assert tune_gmm_components(X, y, 1, grid=(3,), rng=rng) == 3

    def test_unimodal_selects_one(self, rng):
        X = rng.standard_normal((120, 2))
        y = np.array([1, 2] * 60)
        X[y == 2] += 5.0
        assert tune_gmm_components(X, y, 1, grid=(1, 3), rng=rng) == 1


class TestLogSupport:
    def test_all_ones_reduces_to_plain(self, rng):
        X = rng.standard_normal((30, 6))
        y = np.array([1, 2, 3] * 10)
        clf = DynamicNaiveBayes(n_channels=3).fit(X, y)
        probe = rng.standard_normal((5, 6))
        default = clf.log_support(probe)
        explicit = clf.log_support(probe, np.ones((5, 3)))
        assert np.array_equal(default, explicit)

    def test_zero_r_gives_priors(self, rng):
        X = rng.standard_normal((20, 4))
        y = np.array([1] * 5 + [2] * 15)
        clf = DynamicNaiveBayes(n_channels=2).fit(X, y)
        ls = clf.log_support(rng.standard_normal((3, 4)), np.zeros((3, 2)))
        assert np.allclose(ls, np.log([0.25, 0.75]), atol=1e-12)

    def test_hand_oracle(self):
        clf = _model_from_densities(
            priors=[0.5, 0.5],
            density_table=[[0.8, 0.3], [0.2, 0.7]],
        )
        x = np.zeros((1, 2))
        support = np.exp(clf.log_support(x, np.array([[1.0, 0.5]])))[0]
        assert np.isclose(support[0], 0.21909, rtol=1e-4)
        assert np.isclose(support[1], 0.08367, rtol=1e-4)
        assert clf.predict(x, np.array([[1.0, 0.5]]))[0] == 1

    def test_channel_removal_equivalence(self, rng):
        X = rng.standard_normal((40, 6))
        y = np.array([1, 2] * 20)
        full = DynamicNaiveBayes(n_channels=3).fit(X, y)
        keep = [0, 1, 4, 5]  # drop channel 2 (columns 2, 3)
        reduced = DynamicNaiveBayes(n_channels=2).fit(X[:, keep], y)
        probe = rng.standard_normal((8, 6))
        r_full = np.tile([1.0, 0.0, 1.0], (8, 1))
        ls_full = full.log_support(probe, r_full)
        ls_red = reduced.log_support(probe[:, keep])
        assert np.max(np.abs(ls_full - ls_red)) < 1e-12

    def test_linearity_in_r(self, rng):
        X = rng.standard_normal((30, 4))
        y = np.array([1, 2] * 15)
        clf = DynamicNaiveBayes(n_channels=2).fit(X, y)
        probe = rng.standard_normal((1, 4))

        def ls(r0):
            return clf.log_support(probe, np.array([[r0, 0.7]]))[0]

        slope = ls(1.0) - ls(0.0)
        midpoint = ls(0.0) + 0.4 * slope
        assert np.max(np.abs(ls(0.4) - midpoint)) < 1e-9

    def test_dimension_mismatch(self, rng):
        X = rng.standard_normal((20, 4))
        y = np.array([1, 2] * 10)
        clf = DynamicNaiveBayes(n_channels=2).fit(X, y)
        with pytest.raises(ValueError, match="contamination"):
            clf.log_support(X, np.ones((20, 3)))


class TestSupports:
    def test_normalization(self, rng):
        X = rng.standard_normal((20, 4))
        y = np.array([1, 2] * 10)
        clf = DynamicNaiveBayes(n_channels=2).fit(X, y)
        s = clf.supports(rng.standard_normal((6, 4)))
        assert np.allclose(s.sum(axis=1), 1.0, atol=1e-12)
        assert np.all((s >= 0) & (s <= 1))

    def test_zero_r_supports_equal_priors(self, rng):
        X = rng.standard_normal((24, 4))
        y = np.array([1] * 6 + [2] * 18)
        clf = DynamicNaiveBayes(n_channels=2).fit(X, y)
        s = clf.supports(rng.standard_normal((2, 4)), np.zeros((2, 2)))
        assert np.allclose(s, [0.25, 0.75], atol=1e-12)

    def test_shift_invariance(self):
        ls = np.array([[1.0, 2.0, 3.0]])
        assert np.allclose(softmax_supports(ls), softmax_supports(ls + 100.0))

    def test_all_neg_inf_fallback(self):
        with pytest.warns(RuntimeWarning, match="-inf"):
            s = softmax_supports(np.array([[-np.inf, -np.inf]]))
        assert np.allclose(s, [0.5, 0.5])


class TestPredict:
    def test_tie_break_smallest(self):
        clf = _model_from_densities(
            priors=[0.5, 0.5],
            density_table=[[0.4, 0.4], [0.4, 0.4]],
        )
        assert clf.predict(np.zeros((1, 2)))[0] == 1

    def test_gmm_k1_matches_gaussian(self, rng):
        X = rng.standard_normal((60, 4))
        y = np.array([1, 2] * 30)
        X[y == 2] += 2.0
        gauss = DynamicNaiveBayes(n_channels=2, density="gaussian").fit(X, y)
        gmm = DynamicNaiveBayes(n_channels=2, density="gmm",
                                n_components=1).fit(X, y)
        probe = rng.standard_normal((10, 4))
        assert np.max(np.abs(gauss.supports(probe) - gmm.supports(probe))) < 1e-9

    def test_unknown_density(self, rng):
        X = rng.standard_normal((10, 2))
        y = np.array([1, 2] * 5)
        with pytest.raises(ValueError, match="density"):
            DynamicNaiveBayes(n_channels=1, density="kde").fit(X, y)

    def test_params_round_trip(self):
        clf = DynamicNaiveBayes(n_channels=4, density="gmm", n_components=3)
        params = clf.get_params()
        assert params["density"] == "gmm"
        clf.set_params(density="gaussian")
        assert clf.density == "gaussian"
        with pytest.raises(ValueError):
            clf.set_params(bogus=0)
