"""Contamination-aware sEMG intent recognition.

A per-channel one-class SVM ensemble detects contaminated channels; a
dynamic naive Bayes classifier then weights or eliminates those channels at
prediction time without retraining. The package also ships the noise
injection, wavelet feature extraction, baselines, and statistical evaluation
needed to benchmark the approach.
"""

__version__ = "0.1.0"

from .cascade import CascadeClassifier, load_cascade, save_cascade
from .dnb import DynamicNaiveBayes
from .features import WaveletFeatureExtractor
from .occ import OneClassChannelEnsemble
from .baselines import EcocNaiveBayes
from .signal_model import Dataset, Recording, SignalWindow

__all__ = [
    "CascadeClassifier",
    "DynamicNaiveBayes",
    "WaveletFeatureExtractor",
    "OneClassChannelEnsemble",
    "EcocNaiveBayes",
    "Dataset",
    "Recording",
    "SignalWindow",
    "load_cascade",
    "save_cascade",
    "__version__",
]
