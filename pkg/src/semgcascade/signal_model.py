"""Recordings, windows, datasets and their segmentation / fold splitting."""

import json
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .rng import philox_rng


@dataclass(frozen=True)
class Recording:
    """Multi-channel raw signal with a movement-class label."""

    samples: np.ndarray  # (L, n) float array
    sample_rate_hz: float
    class_label: int
    subject_id: str = ""

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 2 or samples.shape[0] < 1:
            raise ValueError("samples must be an (L, n) array with L >= 1")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        object.__setattr__(self, "samples", samples)

    @property
    def n_channels(self):
        return self.samples.shape[0]

    @property
    def n_samples(self):
        return self.samples.shape[1]


@dataclass(frozen=True)
class SignalWindow:
    """Fixed-length L x N block, the unit of classification."""

    samples: np.ndarray
    sample_rate_hz: float
    class_label: Optional[int] = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 2:
            raise ValueError("window samples must be an (L, N) array")
        object.__setattr__(self, "samples", samples)

    @property
    def n_channels(self):
        return self.samples.shape[0]

    @property
    def n_samples(self):
        return self.samples.shape[1]


@dataclass
class Dataset:
    windows: list
    class_count: int
    channel_count: int

    def __post_init__(self):
        if not self.windows:
            raise ValueError("dataset has no windows")
        labels = set()
        for w in self.windows:
            if w.n_channels != self.channel_count:
                raise ValueError("inconsistent channel count across windows")
            if w.class_label is None or not (1 <= w.class_label <= self.class_count):
                raise ValueError(
                    f"window label {w.class_label} outside 1..{self.class_count}"
                )
            labels.add(w.class_label)
        missing = set(range(1, self.class_count + 1)) - labels
        if missing:
            raise ValueError(f"classes with no windows: {sorted(missing)}")

    @property
    def labels(self):
        return np.array([w.class_label for w in self.windows])

    def __len__(self):
        return len(self.windows)


def window_sample_count(window_ms, sample_rate_hz):
    return int(round(window_ms * sample_rate_hz / 1000.0))


def segment_recording(rec, window_ms):
    """Split into consecutive disjoint windows; the trailing remainder is dropped."""
    if window_ms <= 0:
        raise ValueError("window_ms must be positive")
    n = window_sample_count(window_ms, rec.sample_rate_hz)
    if rec.n_samples < n:
        raise ValueError(
            f"recording has {rec.n_samples} samples, shorter than one "
            f"{window_ms} ms window ({n} samples at {rec.sample_rate_hz} Hz)"
        )
    count = rec.n_samples // n
    return [
        SignalWindow(
            samples=rec.samples[:, k * n:(k + 1) * n],
            sample_rate_hz=rec.sample_rate_hz,
            class_label=rec.class_label,
        )
        for k in range(count)
    ]


def select_channels(rec, indices):
    if len(set(indices)) != len(indices):
        raise ValueError(f"duplicate channel indices: {list(indices)}")
    for i in indices:
        if not (0 <= i < rec.n_channels):
            raise ValueError(f"channel index {i} out of range 0..{rec.n_channels - 1}")
    return Recording(
        samples=rec.samples[list(indices), :],
        sample_rate_hz=rec.sample_rate_hz,
        class_label=rec.class_label,
        subject_id=rec.subject_id,
    )


def _split_rng(seed, repeat):
    # Counter-based generator keyed by (seed, repeat): platform-stable folds.
    return philox_rng(seed, repeat)


def stratified_split(ds, folds, repeats, seed):
    """Stratified k-fold splits, one list entry per (repeat, fold).

    Returns ``[(train_idx, test_idx), ...]`` ordered by repeat then fold.
    """
    if folds < 2:
        raise ValueError("folds must be >= 2")
    labels = ds.labels
    for c in range(1, ds.class_count + 1):
        n_c = int(np.sum(labels == c))
        if n_c < folds:
            raise ValueError(
                f"class {c} has only {n_c} windows, fewer than folds={folds}"
            )
    all_idx = np.arange(len(ds))
    splits = []
    for rep in range(repeats):
        rng = _split_rng(seed, rep)
        fold_of = np.empty(len(ds), dtype=int)
        for c in range(1, ds.class_count + 1):
            idx_c = all_idx[labels == c]
            idx_c = rng.permutation(idx_c)
            fold_of[idx_c] = np.arange(len(idx_c)) % folds
        for f in range(folds):
            test = all_idx[fold_of == f]
            train = all_idx[fold_of != f]
            splits.append((train, test))
    return splits


def save_dataset(ds, out_dir):
    """Write per-recording CSVs plus a JSON manifest; each window becomes its
    own recording file so the layout round-trips through load_dataset."""
    os.makedirs(out_dir, exist_ok=True)
    manifest = {}
    for i, w in enumerate(ds.windows):
        name = f"rec_{i:05d}.csv"
        header = ",".join(f"ch{l + 1}" for l in range(w.n_channels))
        np.savetxt(
            os.path.join(out_dir, name),
            w.samples.T,
            delimiter=",",
            header=header,
            comments="",
        )
        manifest[name] = {
            "class_label": int(w.class_label),
            "subject_id": "synthetic",
            "sample_rate_hz": float(w.sample_rate_hz),
        }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)


def load_recordings(data_dir):
    """Read the CSV-per-recording layout described by manifest.json."""
    manifest_path = os.path.join(data_dir, "manifest.json")
    if not os.path.exists(manifest_path):
        raise FileNotFoundError(f"no manifest.json in {data_dir}")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    recs = []
    for name in sorted(manifest):
        meta = manifest[name]
        path = os.path.join(data_dir, name)
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        recs.append(
            Recording(
                samples=table.T,
                sample_rate_hz=float(meta["sample_rate_hz"]),
                class_label=int(meta["class_label"]),
                subject_id=str(meta.get("subject_id", "")),
            )
        )
    return recs


def load_dataset(data_dir, window_ms=500.0, channels=None):
    """Load recordings, optionally select channels, segment into a Dataset."""
    recs = load_recordings(data_dir)
    windows = []
    for rec in recs:
        if channels is not None:
            rec = select_channels(rec, channels)
        windows.extend(segment_recording(rec, window_ms))
    class_count = max(w.class_label for w in windows)
    return Dataset(
        windows=windows,
        class_count=class_count,
        channel_count=windows[0].n_channels,
    )
