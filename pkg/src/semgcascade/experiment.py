"""Cross-validated benchmark: noise-extended test sets, metric records, and
rank/significance reporting."""

import math
import os
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from .baselines import EcocNaiveBayes
from .contamination import ChannelPolicy, contaminate_window
from .dnb import DynamicNaiveBayes, tune_gmm_components
from .features import FEATURES_PER_CHANNEL, WaveletFeatureExtractor
from .metrics import balanced_accuracy, cohens_kappa, confusion_matrix, micro_f1
from .occ import OneClassChannelEnsemble
from .rng import philox_rng
from .signal_model import stratified_split
from .stats import average_ranks, significance_lists

CRITERIA = ("bac", "kappa", "f1")


@dataclass(frozen=True)
class MetricRecord:
    method: str
    snr_db: float
    fold: int
    repeat: int
    bac: float
    kappa: float
    micro_f1: float

    def value(self, criterion):
        return {"bac": self.bac, "kappa": self.kappa, "f1": self.micro_f1}[criterion]


def _job_rng(seed, repeat, fold, salt):
    return philox_rng(seed, repeat, fold, salt)


def _metrics_record(method, snr, fold, repeat, y_true, y_pred, n_classes):
    cm = confusion_matrix(y_true, y_pred, n_classes)
    return MetricRecord(
        method=method, snr_db=snr, fold=fold, repeat=repeat,
        bac=balanced_accuracy(cm), kappa=cohens_kappa(cm),
        micro_f1=micro_f1(cm),
    )


def _run_split(ds, features, config, repeat, fold, train_idx, test_idx):
    labels = ds.labels
    L = ds.channel_count
    y_train = labels[train_idx]
    X_train = features[train_idx]
    split_state = int(config.seed) * 1000 + repeat * 100 + fold

    n_components = None
    if config.density == "gmm":
        n_components = tune_gmm_components(
            X_train, y_train, L, config.component_grid,
            _job_rng(config.seed, repeat, fold, 7),
        )

    models = {}
    clf = None
    if {"B", "NBH", "NBS"} & set(config.methods):
        clf = DynamicNaiveBayes(
            n_channels=L, density=config.density, n_components=n_components,
            random_state=split_state,
        ).fit(X_train, y_train)
    if "EC" in config.methods:
        models["EC"] = EcocNaiveBayes(
            code_size_grid=config.code_size_grid, density=config.density,
            n_components=n_components, random_state=split_state,
        ).fit(X_train, y_train)
    ensemble = None
    if {"NBH", "NBS"} & set(config.methods):
        ensemble = OneClassChannelEnsemble(
            n_channels=L, block_dim=FEATURES_PER_CHANNEL, mode="crisp",
            nu_grid=config.nu_grid, random_state=split_state,
        ).fit(X_train)

    extractor = WaveletFeatureExtractor()
    policy = ChannelPolicy(**config.channel_policy)
    clean_windows = [ds.windows[i] for i in test_idx]
    clean_feats = features[test_idx]
    y_clean = labels[test_idx]

    records = []
    for snr_idx, snr in enumerate(config.snr_grid):
        if math.isinf(snr) and snr > 0:
            X_test, y_test = clean_feats, y_clean
        else:
            rng = _job_rng(config.seed, repeat, fold, 1000 + snr_idx)
            noisy = [contaminate_window(w, snr, rng, policy)[0]
                     for w in clean_windows]
            noisy_feats = extractor.fit(noisy).transform(noisy)
            X_test = np.vstack([clean_feats, noisy_feats])
            y_test = np.concatenate([y_clean, y_clean])

        scores = ensemble.decision_function(X_test) if ensemble is not None else None
        for method in config.methods:
            if method == "B":
                pred = clf.predict(X_test)
            elif method == "EC":
                pred = models["EC"].predict(X_test)
            elif method == "NBH":
                pred = clf.predict(X_test, (scores >= 0.0).astype(float))
            elif method == "NBS":
                r_soft = np.column_stack([
                    cal(scores[:, l])
                    for l, cal in enumerate(ensemble.calibrators_)
                ])
                pred = clf.predict(X_test, r_soft)
            records.append(_metrics_record(
                method, float(snr), fold, repeat, y_test, pred, ds.class_count
            ))
    return records


def run_experiment(ds, config, n_jobs=None):
    """Fit every configured method per CV split and score it on the clean
    test fold extended with contaminated copies, at every SNR in the grid.

    Returns MetricRecords ordered by (repeat, fold, snr, method)."""
    if config.seed is None:
        raise ValueError("config.seed is required")
    if n_jobs is None:
        n_jobs = int(os.environ.get("SEMGCASCADE_WORKERS", "1"))
    extractor = WaveletFeatureExtractor()
    features = extractor.fit(ds.windows).transform(ds.windows)
    splits = stratified_split(ds, config.folds, config.repeats, config.seed)
    jobs = []
    for k, (train_idx, test_idx) in enumerate(splits):
        repeat, fold = divmod(k, config.folds)
        jobs.append((repeat, fold, train_idx, test_idx))
    try:
        if n_jobs == 1:
            results = [
                _run_split(ds, features, config, rep, fold, tr, te)
                for rep, fold, tr, te in jobs
            ]
        else:
            results = Parallel(n_jobs=n_jobs)(
                delayed(_run_split)(ds, features, config, rep, fold, tr, te)
                for rep, fold, tr, te in jobs
            )
    except Exception as exc:
        raise RuntimeError(f"experiment failed: {exc}") from exc
    records = []
    for chunk in results:
        records.extend(chunk)
    return records


def records_to_rows(records):
    """Long-format rows (method, snr_db, criterion, fold, repeat, value)."""
    rows = []
    for rec in records:
        for criterion in CRITERIA:
            rows.append((rec.method, rec.snr_db, criterion, rec.fold,
                         rec.repeat, rec.value(criterion)))
    rows.sort(key=lambda r: (r[2], r[1], r[0], r[4], r[3]))
    return rows


def write_results_csv(records, path):
    with open(path, "w") as fh:
        fh.write("method,snr_db,criterion,fold,repeat,value\n")
        for method, snr, criterion, fold, repeat, value in records_to_rows(records):
            fh.write(f"{method},{snr:g},{criterion},{fold},{repeat},{value!r}\n")


def read_results_csv(path):
    """Rows back as tuples; malformed lines are reported with their number."""
    rows = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "method,snr_db,criterion,fold,repeat,value":
            raise ValueError(f"unexpected results header: {header}")
        for lineno, line in enumerate(fh, start=2):
            parts = line.strip().split(",")
            if len(parts) != 6:
                raise ValueError(f"malformed results row at line {lineno}")
            try:
                rows.append((parts[0], float(parts[1]), parts[2],
                             int(parts[3]), int(parts[4]), float(parts[5])))
            except ValueError as exc:
                raise ValueError(
                    f"malformed results row at line {lineno}: {exc}"
                ) from exc
    return rows


@dataclass
class RankTable:
    criterion: str
    snr_db: float
    methods: tuple
    avg_ranks: np.ndarray
    better_than: list  # per method: indices of significantly better methods


def build_rank_tables(rows, alpha=0.05):
    """Group long-format rows by (criterion, snr) and rank the methods.

    Cases are (repeat, fold) pairs; every method must be present in every
    case."""
    groups = {}
    for method, snr, criterion, fold, repeat, value in rows:
        groups.setdefault((criterion, snr), {}).setdefault(
            (repeat, fold), {}
        )[method] = value
    tables = []
    for (criterion, snr) in sorted(groups):
        cases = groups[(criterion, snr)]
        methods = tuple(sorted({m for case in cases.values() for m in case}))
        matrix = []
        for key in sorted(cases):
            case = cases[key]
            missing = set(methods) - set(case)
            if missing:
                raise ValueError(
                    f"methods {sorted(missing)} missing for case {key} "
                    f"({criterion}, SNR {snr})"
                )
            matrix.append([case[m] for m in methods])
        matrix = np.array(matrix)
        better = (significance_lists(matrix, alpha)
                  if len(methods) > 1 else [[]])
        tables.append(RankTable(
            criterion=criterion, snr_db=snr, methods=methods,
            avg_ranks=average_ranks(matrix), better_than=better,
        ))
    return tables


def write_rank_csv(tables, path):
    with open(path, "w") as fh:
        fh.write("criterion,snr_db,method,avg_rank,significantly_better\n")
        for t in tables:
            for i, m in enumerate(t.methods):
                better = ";".join(t.methods[j] for j in t.better_than[i])
                fh.write(f"{t.criterion},{t.snr_db:g},{m},"
                         f"{t.avg_ranks[i]!r},{better}\n")


def write_significance_csv(tables, path):
    """0/1 matrix per (criterion, snr): row method significantly better than
    column method."""
    with open(path, "w") as fh:
        fh.write("criterion,snr_db,better_method,worse_method\n")
        for t in tables:
            for i, m in enumerate(t.methods):
                for j in t.better_than[i]:
                    fh.write(f"{t.criterion},{t.snr_db:g},{t.methods[j]},{m}\n")
