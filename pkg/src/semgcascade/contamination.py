"""SNR-controlled injection of the five supported noise types.

All additive noises are rescaled post-hoc so the realized noise power matches
the requested SNR exactly; clipping is calibrated by bisection; attenuation
follows the closed-form residual-power identity.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .signal_model import SignalWindow
from .validation import check_vector


class NoiseKind(Enum):
    POWER_LINE = "power_line"
    ATTENUATION = "attenuation"
    GAUSSIAN = "gaussian"
    CLIPPING = "clipping"
    BASELINE_WANDER = "baseline_wander"


NOISE_KINDS = tuple(NoiseKind)


@dataclass(frozen=True)
class NoiseSpec:
    kind: NoiseKind
    snr_db: float
    rng_seed: int


@dataclass(frozen=True)
class ChannelPolicy:
    """How many channels a contamination event touches (inclusive bounds).

    ``max_channels=None`` means floor(L/2).
    """

    min_channels: int = 1
    max_channels: int = None

    def draw(self, n_channels, rng):
        hi = self.max_channels if self.max_channels is not None else max(
            1, n_channels // 2
        )
        hi = min(hi, n_channels)
        lo = min(self.min_channels, hi)
        count = int(rng.integers(lo, hi + 1))
        return np.sort(rng.choice(n_channels, size=count, replace=False))


def signal_power(seq):
    seq = check_vector(seq, "seq")
    return float(np.mean(seq ** 2))


def measured_snr_db(clean, noisy):
    noise = np.asarray(noisy, dtype=float) - np.asarray(clean, dtype=float)
    p_noise = np.mean(noise ** 2)
    if p_noise == 0:
        return math.inf
    return 10.0 * math.log10(np.mean(np.asarray(clean, dtype=float) ** 2) / p_noise)


def _require_power(seq):
    p = signal_power(seq)
    if p <= 0:
        raise ValueError("zero-power input: SNR is undefined")
    return p


def _add_sine(seq, snr_db, rng, f_lo, f_hi, sample_rate_hz):
    p_sig = _require_power(seq)
    n = len(seq)
    f = rng.uniform(f_lo, f_hi)
    phi = rng.uniform(0.0, 2.0 * math.pi)
    t = np.arange(n) / sample_rate_hz
    unit = np.sin(2.0 * math.pi * f * t + phi)
    p_unit = np.mean(unit ** 2)
    target_noise_power = p_sig * 10.0 ** (-snr_db / 10.0)
    amp = math.sqrt(target_noise_power / p_unit)
    return np.asarray(seq, dtype=float) + amp * unit


def add_powerline(seq, snr_db, rng, sample_rate_hz):
    """Mains interference: sinusoid with frequency drawn from 48-52 Hz."""
    return _add_sine(seq, snr_db, rng, 48.0, 52.0, sample_rate_hz)


def add_baseline_wander(seq, snr_db, rng, sample_rate_hz):
    """Low-frequency drift: sinusoid with frequency drawn from 0.5-1.5 Hz."""
    return _add_sine(seq, snr_db, rng, 0.5, 1.5, sample_rate_hz)


def attenuate(seq, snr_db):
    """Contact-loss simulation: scale by a = 1 - 10^(-snr/20), clamped to [0, 1]."""
    _require_power(seq)
    if math.isinf(snr_db) and snr_db > 0:
        return np.asarray(seq, dtype=float).copy()
    a = 1.0 - 10.0 ** (-snr_db / 20.0)
    a = min(max(a, 0.0), 1.0)
    return a * np.asarray(seq, dtype=float)


def add_gaussian(seq, snr_db, rng):
    """White Gaussian noise rescaled so realized noise power is exact."""
    p_sig = _require_power(seq)
    noise = rng.standard_normal(len(seq))
    target = p_sig * 10.0 ** (-snr_db / 10.0)
    noise *= math.sqrt(target / np.mean(noise ** 2))
    return np.asarray(seq, dtype=float) + noise


def clip_nonlinear(seq, snr_db, tol_db=0.05, max_iter=200):
    """Soft saturation out = c * tanh(seq / c), with c calibrated by bisection
    so the distortion power hits the requested SNR."""
    seq = np.asarray(seq, dtype=float)
    _require_power(seq)
    if np.all(seq == seq[0]):
        raise ValueError("constant signal cannot be clipped to a target SNR")

    peak = float(np.max(np.abs(seq)))

    def achieved(c):
        return measured_snr_db(seq, c * np.tanh(seq / c))

    lo, hi = 1e-12 * peak, peak
    # tanh still distorts noticeably at c = max|seq|; grow the bracket until
    # the requested SNR is reachable.
    while achieved(hi) < snr_db and hi < 1e9 * peak:
        hi *= 2.0
    snr_lo, snr_hi = achieved(lo), achieved(hi)
    if snr_db < snr_lo - tol_db or snr_db > snr_hi + tol_db:
        raise ValueError(
            f"requested SNR {snr_db} dB outside achievable clipping range "
            f"[{snr_lo:.2f}, {snr_hi:.2f}] dB"
        )
    snr_db = min(max(snr_db, snr_lo), snr_hi)
    c = hi
    for _ in range(max_iter):
        c = 0.5 * (lo + hi)
        got = achieved(c)
        if abs(got - snr_db) < tol_db / 2:
            break
        if got > snr_db:
            hi = c
        else:
            lo = c
    return c * np.tanh(seq / c)


def apply_noise(seq, kind, snr_db, rng, sample_rate_hz):
    if kind is NoiseKind.POWER_LINE:
        return add_powerline(seq, snr_db, rng, sample_rate_hz)
    if kind is NoiseKind.ATTENUATION:
        return attenuate(seq, snr_db)
    if kind is NoiseKind.GAUSSIAN:
        return add_gaussian(seq, snr_db, rng)
    if kind is NoiseKind.CLIPPING:
        return clip_nonlinear(seq, snr_db)
    if kind is NoiseKind.BASELINE_WANDER:
        return add_baseline_wander(seq, snr_db, rng, sample_rate_hz)
    raise ValueError(f"unknown noise kind {kind}")


def contaminate_window(window, snr_db, rng, channel_policy=None):
    """Contaminate one window with a single random noise type.

    A noise kind is drawn uniformly from the five, the affected channel set
    per ``channel_policy``, and the same kind is applied to every affected
    channel. Returns the noisy window and the ground-truth channel set.
    """
    policy = channel_policy or ChannelPolicy()
    kind = NOISE_KINDS[int(rng.integers(0, len(NOISE_KINDS)))]
    affected = policy.draw(window.n_channels, rng)
    samples = window.samples.copy()
    for ch in affected:
        samples[ch] = apply_noise(
            samples[ch], kind, snr_db, rng, window.sample_rate_hz
        )
    noisy = SignalWindow(
        samples=samples,
        sample_rate_hz=window.sample_rate_hz,
        class_label=window.class_label,
    )
    return noisy, affected, kind
