"""Command-line front door: run experiments, contaminate datasets, rebuild
reports, and generate synthetic data."""

import hashlib
import json
import math
import os
import shutil
import sys
import tempfile

import click
import numpy as np

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from . import __version__
from .config import ExperimentConfig, load_config
from .contamination import ChannelPolicy, contaminate_window, measured_snr_db
from .experiment import (build_rank_tables, read_results_csv, run_experiment,
                         records_to_rows, write_rank_csv, write_results_csv,
                         write_significance_csv)
from .rng import philox_rng
from .signal_model import load_dataset, load_recordings, save_dataset, Dataset, segment_recording, select_channels
from .synth import SynthSpec, generate_synthetic

CRITERION_LABELS = {"bac": "Balanced accuracy", "kappa": "Cohen's kappa",
                    "f1": "Micro-averaged F1"}


def _manifest_hash(config_dict):
    canonical = json.dumps(config_dict, sort_keys=True)
    return hashlib.sha256((canonical + __version__).encode()).hexdigest()[:16]


def _load_experiment_dataset(config):
    if config.dataset_dir:
        if not os.path.isdir(config.dataset_dir):
            exc = click.ClickException(
                f"dataset directory not found: {config.dataset_dir}"
            )
            exc.exit_code = 2
            raise exc
        return load_dataset(config.dataset_dir, config.window_ms,
                            config.channels)
    spec = SynthSpec(**(config.synth or {}))
    rng = philox_rng(config.seed, 9)
    return generate_synthetic(spec, rng)


def plot_rank_curves(tables, out_dir):
    """One SVG per criterion: average rank vs SNR, one curve per method."""
    written = []
    criteria = sorted({t.criterion for t in tables})
    for criterion in criteria:
        subset = sorted((t for t in tables if t.criterion == criterion),
                        key=lambda t: t.snr_db)
        methods = subset[0].methods
        snrs = [t.snr_db for t in subset]
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for i, m in enumerate(methods):
            ax.plot(snrs, [t.avg_ranks[i] for t in subset], marker="o",
                    label=m)
        ax.set_xlabel("SNR [dB]")
        ax.set_ylabel("average rank (higher is better)")
        ax.set_title(CRITERION_LABELS.get(criterion, criterion))
        ax.legend()
        fig.tight_layout()
        path = os.path.join(out_dir, f"ranks_{criterion}.svg")
        fig.savefig(path, format="svg")
        plt.close(fig)
        written.append(path)
    return written


def _write_report(rows, out_dir):
    tables = build_rank_tables(rows)
    write_rank_csv(tables, os.path.join(out_dir, "ranks.csv"))
    write_significance_csv(tables, os.path.join(out_dir, "significance.csv"))
    plot_rank_curves(tables, out_dir)


@click.group()
@click.version_option(__version__)
def main():
    """Benchmark harness for contamination-aware sEMG intent recognition."""


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=None, help="Overrides the config seed.")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Overrides the config output directory.")
def run(config_path, seed, out_dir):
    """Run the full cross-validated experiment described by a JSON config."""
    config = load_config(config_path)
    if seed is not None:
        config.seed = seed
    if out_dir is not None:
        config.out_dir = out_dir
    if config.seed is None:
        raise click.ClickException("a seed is required (config or --seed)")

    ds = _load_experiment_dataset(config)
    records = run_experiment(ds, config)

    # Stage outputs, then move into place so failures leave no partial results.
    staging = tempfile.mkdtemp(prefix=".staging_",
                               dir=os.path.dirname(os.path.abspath(config.out_dir))
                               or ".")
    try:
        write_results_csv(records, os.path.join(staging, "results.csv"))
        rows = records_to_rows(records)
        _write_report(rows, staging)
        manifest = {
            "config": config.to_dict(),
            "seed": config.seed,
            "version": __version__,
            "hash": _manifest_hash(config.to_dict()),
        }
        with open(os.path.join(staging, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
        if os.path.isdir(config.out_dir):
            shutil.rmtree(config.out_dir)
        os.replace(staging, config.out_dir)
    except Exception:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    click.echo(f"wrote {len(records)} metric records to {config.out_dir}")


@main.command()
@click.option("--in", "in_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--snr", type=float, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--min-channels", type=int, default=1)
@click.option("--max-channels", type=int, default=None)
@click.option("--window-ms", type=float, default=500.0)
def contaminate(in_dir, out_dir, snr, seed, min_channels, max_channels,
                window_ms):
    """Contaminate a dataset at a chosen SNR; writes noisy CSVs plus a JSON
    truth file listing the affected channels per window."""
    ds = load_dataset(in_dir, window_ms)
    policy = ChannelPolicy(min_channels=min_channels, max_channels=max_channels)
    rng = philox_rng(seed, 4)
    noisy_windows = []
    truth = {}
    snr_errors = []
    for i, w in enumerate(ds.windows):
        noisy, affected, kind = contaminate_window(w, snr, rng, policy)
        noisy_windows.append(noisy)
        for ch in affected:
            snr_errors.append(
                measured_snr_db(w.samples[ch], noisy.samples[ch]) - snr
            )
        truth[f"rec_{i:05d}.csv"] = {
            "affected_channels": [int(c) for c in affected],
            "noise_kind": kind.value,
            "snr_db": snr,
        }
    noisy_ds = Dataset(windows=noisy_windows, class_count=ds.class_count,
                       channel_count=ds.channel_count)
    save_dataset(noisy_ds, out_dir)
    with open(os.path.join(out_dir, "truth.json"), "w") as fh:
        json.dump(truth, fh, indent=2, sort_keys=True)
    worst = max(abs(e) for e in snr_errors) if snr_errors else 0.0
    click.echo(f"contaminated {len(ds.windows)} windows; "
               f"max |empirical - requested| SNR = {worst:.4f} dB")


@main.command()
@click.option("--in", "in_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
def report(in_dir):
    """Rebuild rank tables and plots from an existing results.csv."""
    results_path = os.path.join(in_dir, "results.csv")
    if not os.path.exists(results_path):
        raise click.ClickException(f"no results.csv in {in_dir}")
    rows = read_results_csv(results_path)
    _write_report(rows, in_dir)
    click.echo(f"report written to {in_dir}")


@main.command()
@click.option("--spec", "spec_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON file of SynthSpec overrides.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", type=int, default=0)
def synth(spec_path, out_dir, seed):
    """Generate a synthetic dataset in the CSV-plus-manifest layout."""
    overrides = {}
    if spec_path:
        with open(spec_path) as fh:
            overrides = json.load(fh)
    spec = SynthSpec(**overrides)
    rng = philox_rng(seed, 9)
    ds = generate_synthetic(spec, rng)
    save_dataset(ds, out_dir)
    click.echo(f"wrote {len(ds)} windows "
               f"({spec.n_classes} classes x {spec.n_channels} channels) "
               f"to {out_dir}")


if __name__ == "__main__":
    sys.exit(main())
