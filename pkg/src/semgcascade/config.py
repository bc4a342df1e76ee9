"""Experiment configuration: JSON file with validated defaults."""

import json
from dataclasses import dataclass, field, fields

from .baselines import CODE_SIZE_GRID
from .dnb import GMM_COMPONENT_GRID
from .occ import DEFAULT_NU_GRID

DEFAULT_SNR_GRID = (0, 1, 2, 3, 4, 5, 6, 10, 12)
ALL_METHODS = ("B", "EC", "NBH", "NBS")


@dataclass
class ExperimentConfig:
    dataset_dir: str = None
    synth: dict = None            # SynthSpec keyword overrides
    channels: list = None         # channel indices to keep, None = all
    window_ms: float = 500.0
    snr_grid: tuple = DEFAULT_SNR_GRID
    folds: int = 10
    repeats: int = 3
    seed: int = None
    methods: tuple = ALL_METHODS
    base_estimator: str = "NBG"   # NBG or NBGMT
    nu_grid: tuple = DEFAULT_NU_GRID
    code_size_grid: tuple = CODE_SIZE_GRID
    component_grid: tuple = GMM_COMPONENT_GRID
    channel_policy: dict = field(default_factory=dict)  # min_channels/max_channels
    out_dir: str = "results"

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        for name in ("snr_grid", "nu_grid", "code_size_grid", "component_grid",
                     "methods"):
            value = tuple(getattr(self, name))
            if not value:
                raise ValueError(f"{name} must be non-empty")
            setattr(self, name, value)
        unknown = set(self.methods) - set(ALL_METHODS)
        if unknown:
            raise ValueError(f"unknown methods: {sorted(unknown)}")
        if self.base_estimator not in ("NBG", "NBGMT"):
            raise ValueError("base_estimator must be NBG or NBGMT")
        bad_policy = set(self.channel_policy) - {"min_channels", "max_channels"}
        if bad_policy:
            raise ValueError(f"unknown channel_policy keys: {sorted(bad_policy)}")

    @property
    def density(self):
        return "gaussian" if self.base_estimator == "NBG" else "gmm"

    def to_dict(self):
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out


def load_config(path):
    with open(path) as fh:
        text = fh.read().strip()
    raw = json.loads(text) if text else {}
    if not isinstance(raw, dict):
        raise ValueError("config root must be a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(**raw)
