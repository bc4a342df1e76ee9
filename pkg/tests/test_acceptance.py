"""End-to-end acceptance suite.

Each test covers one release criterion and prints a PASS line on success:
 1. all-ones weighting reduces exactly to an independent plain Gaussian NB
 2. crisp channel zeroing equals physical feature removal
 3. two-class, two-channel weighted-support hand oracle
 4. nu controls margin errors and support-vector counts (one-class SVM)
 5. every noise injector hits the requested SNR within tolerance
 6. db6 DWT round-trips arbitrary signals
 7. statistics oracles (Wilcoxon, Holm, kappa, micro-F1)
 8. benchmark trend: soft weighting beats crisp beats plain beats ECOC at
    low SNR, and converges to the plain model at high SNR
 9. single-window inference latency under 200 ms
10. CLI runs are byte-for-byte reproducible
"""

import json
import math
import time

import numpy as np
import pytest
from click.testing import CliRunner

from semgcascade.cascade import CascadeClassifier
from semgcascade.cli import main
from semgcascade.config import ExperimentConfig
from semgcascade.contamination import (
    NoiseKind,
    apply_noise,
    measured_snr_db,
)
from semgcascade.dnb import DynamicNaiveBayes, GaussianFeatureModel
from semgcascade.experiment import run_experiment
from semgcascade.features import (
    FEATURES_PER_CHANNEL,
    WaveletFeatureExtractor,
    dwt_db6,
    extract_features,
    idwt_db6,
)
from semgcascade.metrics import cohens_kappa, micro_f1
from semgcascade.occ import default_gamma, train_ocsvm
from semgcascade.stats import holm_correction, wilcoxon_signed_rank
from semgcascade.synth import SynthSpec, generate_synthetic

SNR_GRID = (0, 1, 2, 3, 4, 5, 6, 10, 12)


# --- independent plain Gaussian NB, coded from scratch as the oracle ---------

class PlainGaussianNB:
    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        self.classes = np.unique(y)
        floor = 1e-9 * (X.var(axis=0) + 1e-12)
        self.log_priors = []
        self.means = []
        self.vars = []
        for c in self.classes:
            rows = X[y == c]
            self.log_priors.append(math.log(len(rows) / len(X)))
            self.means.append(rows.mean(axis=0))
            self.vars.append(np.maximum(rows.var(axis=0), floor))
        return self

    def log_joint(self, X):
        out = np.empty((len(X), len(self.classes)))
        for k in range(len(self.classes)):
            logpdf = (-0.5 * np.log(2.0 * math.pi * self.vars[k])
                      - 0.5 * (X - self.means[k]) ** 2 / self.vars[k])
            logpdf = np.maximum(logpdf, math.log(1e-300))
            out[:, k] = self.log_priors[k] + logpdf.sum(axis=1)
        return out

    def predict(self, X):
        return self.classes[np.argmax(self.log_joint(np.asarray(X)), axis=1)]


def _random_problem(rng, n_classes, n_channels, block_dim, n_per_class):
    d = n_channels * block_dim
    X = np.vstack([
        rng.standard_normal((n_per_class, d)) * rng.uniform(0.5, 2.0)
        + rng.uniform(-3.0, 3.0, size=d)
        for _ in range(n_classes)
    ])
    y = np.repeat(np.arange(1, n_classes + 1), n_per_class)
    return X, y


def test_criterion_01_reduction_to_plain_nb():
    rng = np.random.default_rng(101)
    start = time.time()
    pairs = 0
    for _ in range(25):
        m = int(rng.integers(2, 5))
        L = int(rng.integers(1, 5))
        X, y = _random_problem(rng, m, L, 2, 20)
        clf = DynamicNaiveBayes(n_channels=L).fit(X, y)
        oracle = PlainGaussianNB().fit(X, y)
        probe = rng.standard_normal((40, X.shape[1])) * 2.0
        pred = clf.predict(probe, np.ones((40, L)))
        assert np.array_equal(pred, oracle.predict(probe))
        diff = np.abs(clf.log_support(probe) - oracle.log_joint(probe))
        assert np.max(diff) < 1e-9
        pairs += 40
    elapsed = time.time() - start
    assert pairs >= 1000
    assert elapsed < 10.0
    print(f"\ncriterion 1 (reduction to plain NB, {pairs} pairs, "
          f"{elapsed:.2f} s): PASS")


def test_criterion_02_channel_elimination():
    rng = np.random.default_rng(202)
    for _ in range(10):
        L = int(rng.integers(2, 6))
        X, y = _random_problem(rng, 3, L, 2, 15)
        drop = int(rng.integers(0, L))
        keep_cols = [i for i in range(X.shape[1])
                     if i // 2 != drop]
        full = DynamicNaiveBayes(n_channels=L).fit(X, y)
        reduced = DynamicNaiveBayes(n_channels=L - 1).fit(X[:, keep_cols], y)
        probe = rng.standard_normal((20, X.shape[1]))
        r = np.ones((20, L))
        r[:, drop] = 0.0
        diff = np.abs(full.log_support(probe, r)
                      - reduced.log_support(probe[:, keep_cols]))
        assert np.max(diff) < 1e-12
    print("\ncriterion 2 (channel elimination): PASS")


def test_criterion_03_weighted_support_hand_oracle():
    # two classes, two single-feature channels, densities 0.8/0.2 and 0.3/0.7
    densities = np.array([[0.8, 0.3], [0.2, 0.7]])
    clf = DynamicNaiveBayes(n_channels=2)
    clf.block_dim_ = 1
    clf.classes_ = np.array([1, 2])
    clf.priors_ = np.array([0.5, 0.5])
    clf.log_priors_ = np.log(clf.priors_)
    clf.model_ = GaussianFeatureModel(
        means=np.zeros((2, 2)),
        vars=1.0 / (2.0 * math.pi * densities ** 2),
        var_floor=np.full(2, 1e-300),
    )
    x = np.zeros((1, 2))
    r = np.array([[1.0, 0.5]])
    support = np.exp(clf.log_support(x, r))[0]
    assert abs(support[0] - 0.21909) / 0.21909 < 1e-4
    assert abs(support[1] - 0.08367) / 0.08367 < 1e-4
    assert clf.predict(x, r)[0] == 1
    print("\ncriterion 3 (weighted support hand oracle): PASS")


def test_criterion_04_nu_property():
    start = time.time()
    for nu in (0.1, 0.3, 0.5):
        for seed in range(10):
            rng = np.random.default_rng(400 + seed)
            X = rng.standard_normal((500, 2))
            model = train_ocsvm(X, nu=nu, gamma=default_gamma(X))
            scores = model.decision_function(X)
            margin_errors = float(np.mean(scores < 0.0))
            sv_fraction = len(model.alphas) / 500.0
            assert margin_errors <= nu + 0.05, (nu, seed, margin_errors)
            assert sv_fraction >= nu - 0.05, (nu, seed, sv_fraction)
    elapsed = time.time() - start
    assert elapsed < 60.0
    print(f"\ncriterion 4 (nu-property, {elapsed:.1f} s): PASS")


def test_criterion_05_snr_fidelity():
    rng = np.random.default_rng(505)
    fs = 2000.0
    for kind in NoiseKind:
        for snr in SNR_GRID:
            errors = []
            for _ in range(100):
                x = rng.standard_normal(1000)
                out = apply_noise(x, kind, float(snr), rng, fs)
                errors.append(abs(measured_snr_db(x, out) - snr))
            worst = max(errors)
            if kind is NoiseKind.ATTENUATION:
                assert worst < 1e-9, (kind, snr, worst)
            elif kind is NoiseKind.CLIPPING:
                assert worst <= 0.05, (kind, snr, worst)
            else:
                assert worst <= 0.1, (kind, snr, worst)
    print("\ncriterion 5 (SNR fidelity, 4500 windows): PASS")


def test_criterion_06_dwt_round_trip():
    rng = np.random.default_rng(606)
    lengths = (64, 500, 2000)
    worst = 0.0
    for i in range(1000):
        n = lengths[i % 3]
        x = rng.standard_normal(n)
        rebuilt = idwt_db6(dwt_db6(x, levels=3))
        worst = max(worst, float(np.max(np.abs(rebuilt - x))))
    assert worst < 1e-8
    print(f"\ncriterion 6 (DWT round-trip, max err {worst:.2e}): PASS")


def test_criterion_07_statistics_oracles():
    a = np.array([2.0, 4.0, 6.0, 8.0, 10.0])
    b = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    assert np.isclose(wilcoxon_signed_rank(a, b), 0.0625)
    assert np.allclose(holm_correction([0.01, 0.04]), [0.02, 0.04])
    assert np.isclose(cohens_kappa([[8, 2], [6, 4]]), 0.2)
    rng = np.random.default_rng(707)
    for _ in range(1000):
        m = int(rng.integers(2, 6))
        cm = rng.integers(0, 50, size=(m, m))
        if cm.sum() == 0:
            cm[0, 0] = 1
        assert np.isclose(micro_f1(cm), np.trace(cm) / cm.sum(), atol=1e-12)
    print("\ncriterion 7 (statistics oracles): PASS")


def test_criterion_08_benchmark_trend():
    start = time.time()
    spec = SynthSpec(n_classes=4, n_channels=8, windows_per_class=100,
                     gain_ratio=1.5, informative_channels=2)
    ds = generate_synthetic(spec, np.random.default_rng(0))
    config = ExperimentConfig(
        synth={}, snr_grid=(0, 1, 2, 12), folds=10, repeats=3, seed=42,
        methods=("B", "EC", "NBH", "NBS"),
    )
    records = run_experiment(ds, config)
    mean_bac = {}
    for rec in records:
        mean_bac.setdefault((rec.method, rec.snr_db), []).append(rec.bac)
    mean_bac = {k: float(np.mean(v)) for k, v in mean_bac.items()}
    for snr in (0.0, 1.0, 2.0):
        b = mean_bac[("B", snr)]
        ec = mean_bac[("EC", snr)]
        nbh = mean_bac[("NBH", snr)]
        nbs = mean_bac[("NBS", snr)]
        assert nbs > nbh >= b > ec, (snr, mean_bac)
        assert nbs - b >= 0.05, (snr, nbs - b)
    gap12 = abs(mean_bac[("NBS", 12.0)] - mean_bac[("B", 12.0)])
    assert gap12 <= 0.05, gap12
    elapsed = time.time() - start
    assert elapsed < 1800.0
    print(f"\ncriterion 8 (benchmark trend, {elapsed:.0f} s): PASS")


def test_criterion_09_inference_latency():
    rng = np.random.default_rng(909)
    spec = SynthSpec(n_classes=2, n_channels=8, windows_per_class=20,
                     sample_rate_hz=4000.0, window_ms=500.0)
    ds = generate_synthetic(spec, rng)
    X = WaveletFeatureExtractor().fit_transform(ds.windows)
    model = CascadeClassifier(n_channels=8, block_dim=FEATURES_PER_CHANNEL,
                              mode="soft").fit(X, ds.labels)
    window = ds.windows[0]
    assert window.n_samples == 2000
    timings = []
    for _ in range(5):
        t0 = time.perf_counter()
        feats = extract_features(window)[None, :]
        r = model.contamination(feats)
        model.classifier_.log_support(feats, r)
        timings.append(time.perf_counter() - t0)
    best = min(timings)
    assert best < 0.2, f"single-window inference took {best * 1000:.1f} ms"
    print(f"\ncriterion 9 (latency {best * 1000:.1f} ms): PASS")


def test_criterion_10_cli_determinism(tmp_path):
    config = {
        "synth": {"n_classes": 2, "n_channels": 2, "windows_per_class": 12,
                  "sample_rate_hz": 1000.0, "window_ms": 128.0},
        "window_ms": 128.0,
        "snr_grid": [0, 6],
        "folds": 2,
        "repeats": 1,
        "seed": 17,
        "methods": ["B", "NBS"],
    }
    runner = CliRunner()
    outputs = []
    for d in ("run1", "run2"):
        path = tmp_path / f"config_{d}.json"
        path.write_text(json.dumps(dict(config, out_dir=str(tmp_path / d))))
        result = runner.invoke(main, ["run", "--config", str(path)])
        assert result.exit_code == 0, result.output
        outputs.append((tmp_path / d / "results.csv").read_bytes())
    assert outputs[0] == outputs[1]
    print("\ncriterion 10 (CLI determinism): PASS")
