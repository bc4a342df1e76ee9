"""Wavelet feature extraction for multi-channel signal windows.

Each channel is decomposed with a 3-level db6 discrete wavelet transform
(periodic boundary handling), and every coefficient sequence (A3, D3, D2, D1)
is summarised by its mean absolute value and slope-sign-change count, giving
8 features per channel.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .validation import check_vector

# Daubechies-6 scaling filter (12 taps), sum = sqrt(2), unit energy.
# Computed from the standard extremal-phase spectral factorization.
DB6_SCALING = np.array([
    0.111540743350109464,
    0.494623890398453086,
    0.751133908021095351,
    0.315250351709197629,
    -0.226264693965439820,
    -0.129766867567261936,
    0.097501605587323049,
    0.027522865530305729,
    -0.031582039317486030,
    0.000553842201161496,
    0.004777257510945511,
    -0.001077301085308480,
])

# Quadrature-mirror highpass: g[m] = (-1)^m h[T-1-m]
DB6_WAVELET = (DB6_SCALING[::-1] * np.where(np.arange(12) % 2 == 0, 1.0, -1.0))

SUBBAND_NAMES = ("A3", "D3", "D2", "D1")
STAT_NAMES = ("mav", "ssc")
FEATURES_PER_CHANNEL = len(SUBBAND_NAMES) * len(STAT_NAMES)


@dataclass
class WaveletCoefficients:
    """Multilevel DWT output: level-3 approximation plus details (deep to shallow)."""

    approx: np.ndarray
    details: list = field(default_factory=list)  # [D3, D2, D1] for levels=3
    input_lengths: list = field(default_factory=list)  # pre-transform length per level

    def sequences(self):
        """Coefficient sequences in fixed feature order A3, D3, D2, D1."""
        return [self.approx] + list(self.details)


def _analysis_step(x, filt):
    n = len(x)
    half = n // 2
    idx = (2 * np.arange(half)[:, None] + np.arange(len(filt))[None, :]) % n
    return x[idx] @ filt


def _synthesis_step(approx, detail, n):
    out = np.zeros(n)
    taps = len(DB6_SCALING)
    idx = (2 * np.arange(len(approx))[:, None] + np.arange(taps)[None, :]) % n
    np.add.at(out, idx, approx[:, None] * DB6_SCALING + detail[:, None] * DB6_WAVELET)
    return out


def dwt_db6(signal, levels=3):
    """Multilevel db6 DWT with periodic extension.

    Odd-length inputs are extended by repeating the last sample before each
    periodic split, so coefficient counts follow ceil(n / 2**level) and the
    transform stays exactly invertible on the original samples.
    """
    x = check_vector(signal, "signal")
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if len(x) < 2 ** levels:
        raise ValueError(
            f"signal of length {len(x)} too short for {levels} decomposition levels"
        )
    details = []
    lengths = []
    for _ in range(levels):
        lengths.append(len(x))
        if len(x) % 2 == 1:
            x = np.append(x, x[-1])
        approx = _analysis_step(x, DB6_SCALING)
        details.append(_analysis_step(x, DB6_WAVELET))
        x = approx
    details.reverse()  # deepest level first: [D_levels, ..., D1]
    return WaveletCoefficients(approx=x, details=details, input_lengths=lengths)


def idwt_db6(coeffs):
    """Inverse of :func:`dwt_db6`; exact up to floating round-off."""
    x = coeffs.approx
    for detail, orig_len in zip(coeffs.details, reversed(coeffs.input_lengths)):
        padded = orig_len + (orig_len % 2)
        x = _synthesis_step(x, detail, padded)[:orig_len]
    return x


def mav(seq):
    """Mean absolute value."""
    seq = check_vector(seq, "seq")
    return float(np.mean(np.abs(seq)))


def ssc(seq, threshold=0.0):
    """Slope-sign-change count with a strict product threshold."""
    seq = np.asarray(seq, dtype=float)
    if len(seq) < 3:
        warnings.warn("ssc needs at least 3 samples; returning 0", RuntimeWarning)
        return 0.0
    prev = seq[1:-1] - seq[:-2]
    nxt = seq[1:-1] - seq[2:]
    return float(np.count_nonzero(prev * nxt > threshold))


def channel_features(channel, levels=3, ssc_threshold=0.0):
    """8 features for one channel: (MAV, SSC) over (A3, D3, D2, D1)."""
    coeffs = dwt_db6(channel, levels)
    feats = []
    for seq in coeffs.sequences():
        feats.append(mav(seq))
        feats.append(ssc(seq, ssc_threshold))
    return np.array(feats)


def extract_features(window, levels=3, ssc_threshold=0.0):
    """Full feature vector for an L x N window, channel blocks concatenated."""
    samples = np.asarray(window.samples, dtype=float)
    return np.concatenate(
        [channel_features(ch, levels, ssc_threshold) for ch in samples]
    )


def feature_names(n_channels):
    return [
        f"ch{l + 1}_{band}_{stat}"
        for l in range(n_channels)
        for band in SUBBAND_NAMES
        for stat in STAT_NAMES
    ]


class WaveletFeatureExtractor:
    """sklearn-style transformer turning windows into feature matrices.

    Stateless: ``fit`` only records the channel count so downstream layout
    checks are possible.
    """

    def __init__(self, levels=3, ssc_threshold=0.0):
        self.levels = levels
        self.ssc_threshold = ssc_threshold

    def get_params(self, deep=True):
        return {"levels": self.levels, "ssc_threshold": self.ssc_threshold}

    def set_params(self, **params):
        for k, v in params.items():
            if not hasattr(self, k):
                raise ValueError(f"unknown parameter {k}")
            setattr(self, k, v)
        return self

    def fit(self, windows, y=None):
        first = np.asarray(windows[0].samples)
        self.n_channels_ = first.shape[0]
        return self

    def transform(self, windows):
        rows = [extract_features(w, self.levels, self.ssc_threshold) for w in windows]
        return np.vstack(rows)

    def fit_transform(self, windows, y=None):
        return self.fit(windows).transform(windows)
