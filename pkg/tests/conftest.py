import numpy as np
import pytest

from semgcascade.signal_model import Dataset, Recording, SignalWindow, segment_recording


def make_window(rng, n_channels=8, n_samples=2000, sample_rate_hz=2000.0,
                class_label=1):
    return SignalWindow(
        samples=rng.standard_normal((n_channels, n_samples)),
        sample_rate_hz=sample_rate_hz,
        class_label=class_label,
    )


def make_dataset(rng, n_classes=2, n_channels=4, windows_per_class=20,
                 n_samples=256, class_scale=2.0):
    """Small separable dataset: per-class amplitude scaling of white noise."""
    windows = []
    for j in range(1, n_classes + 1):
        for _ in range(windows_per_class):
            samples = class_scale ** (j - 1) * rng.standard_normal(
                (n_channels, n_samples)
            )
            windows.append(SignalWindow(samples=samples, sample_rate_hz=2000.0,
                                        class_label=j))
    return Dataset(windows=windows, class_count=n_classes,
                   channel_count=n_channels)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
