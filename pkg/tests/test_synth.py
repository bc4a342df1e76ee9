import numpy as np
import pytest

from semgcascade.dnb import DynamicNaiveBayes
from semgcascade.features import WaveletFeatureExtractor
from semgcascade.synth import SynthSpec, class_gains, generate_synthetic


class TestSpec:
    def test_defaults(self):
        spec = SynthSpec()
        assert spec.n_classes == 4
        assert spec.n_channels == 8
        assert spec.windows_per_class == 100

    def test_invalid(self):
        with pytest.raises(ValueError):
            SynthSpec(n_classes=1)
        with pytest.raises(ValueError):
            SynthSpec(n_channels=0)


class TestClassGains:
    def test_shape_and_ratio(self):
        spec = SynthSpec(n_classes=4, n_channels=8, gain_ratio=2.0)
        gains = class_gains(spec)
        assert gains.shape == (4, 8)
        # adjacent classes differ by at least the gain ratio on each channel
        for l in range(8):
            col = np.sort(gains[:, l])
            assert np.all(col[1:] / col[:-1] >= 2.0 - 1e-12)

    def test_informative_subset(self):
        spec = SynthSpec(n_classes=4, n_channels=8, informative_channels=2)
        gains = class_gains(spec)
        # non-informative channels carry no class information
        assert np.all(gains[:, 2:] == gains[0, 2:])
        assert not np.all(gains[:, 0] == gains[0, 0])


class TestGenerate:
    def test_window_accounting(self):
        spec = SynthSpec(n_classes=4, n_channels=8, windows_per_class=10,
                         sample_rate_hz=1000.0, window_ms=128.0)
        ds = generate_synthetic(spec, np.random.default_rng(0))
        assert len(ds) == 40
        assert ds.class_count == 4
        assert ds.channel_count == 8
        labels = ds.labels
        for j in range(1, 5):
            assert int(np.sum(labels == j)) == 10

    def test_separable_by_plain_nb(self):
        spec = SynthSpec(n_classes=3, n_channels=4, windows_per_class=30,
                         sample_rate_hz=1000.0, window_ms=128.0)
        ds = generate_synthetic(spec, np.random.default_rng(1))
        X = WaveletFeatureExtractor().fit_transform(ds.windows)
        y = ds.labels
        train = np.arange(len(ds)) % 2 == 0
        clf = DynamicNaiveBayes(n_channels=4).fit(X[train], y[train])
        acc = np.mean(clf.predict(X[~train]) == y[~train])
        assert acc >= 0.9

    def test_deterministic(self):
        spec = SynthSpec(n_classes=2, n_channels=2, windows_per_class=5,
                         sample_rate_hz=1000.0, window_ms=64.0)
        a = generate_synthetic(spec, np.random.default_rng(7))
        b = generate_synthetic(spec, np.random.default_rng(7))
        for wa, wb in zip(a.windows, b.windows):
            assert np.array_equal(wa.samples, wb.samples)
