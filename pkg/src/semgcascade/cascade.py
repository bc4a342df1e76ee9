"""The two-stage classifier: one-class channel ensemble feeding the dynamic
naive Bayes, plus (de)serialization of the trained artifact."""

import json

import numpy as np

from .dnb import DynamicNaiveBayes, GaussianFeatureModel, GmmFeatureModel
from .occ import Calibrator, OcsvmModel, OneClassChannelEnsemble, DEFAULT_NU_GRID
from .validation import check_matrix, check_labels, check_fitted

FORMAT_VERSION = 1


class CascadeClassifier:
    """Contamination-aware classifier: detect noisy channels, then classify
    with channel weights r (crisp elimination or soft down-weighting)."""

    def __init__(self, n_channels, block_dim=8, mode="soft", density="gaussian",
                 n_components=None, nu_grid=DEFAULT_NU_GRID, random_state=0):
        self.n_channels = n_channels
        self.block_dim = block_dim
        self.mode = mode
        self.density = density
        self.n_components = n_components
        self.nu_grid = nu_grid
        self.random_state = random_state

    def get_params(self, deep=True):
        return {
            "n_channels": self.n_channels,
            "block_dim": self.block_dim,
            "mode": self.mode,
            "density": self.density,
            "n_components": self.n_components,
            "nu_grid": self.nu_grid,
            "random_state": self.random_state,
        }

    def set_params(self, **params):
        for k, v in params.items():
            if not hasattr(self, k):
                raise ValueError(f"unknown parameter {k}")
            setattr(self, k, v)
        return self

    def fit(self, X, y):
        X = check_matrix(X, "X")
        y = check_labels(y, X.shape[0])
        self.ensemble_ = OneClassChannelEnsemble(
            n_channels=self.n_channels, block_dim=self.block_dim,
            mode=self.mode, nu_grid=self.nu_grid,
            random_state=self.random_state,
        ).fit(X)
        self.classifier_ = DynamicNaiveBayes(
            n_channels=self.n_channels, density=self.density,
            n_components=self.n_components, random_state=self.random_state,
        ).fit(X, y)
        return self

    def contamination(self, X):
        check_fitted(self, "ensemble_")
        return self.ensemble_.predict(X)

    def predict(self, X):
        return self.classifier_.predict(X, self.contamination(X))

    def supports(self, X):
        return self.classifier_.supports(X, self.contamination(X))


def _ocsvm_to_dict(m):
    return {
        "support_vectors": m.support_vectors.tolist(),
        "alphas": m.alphas.tolist(),
        "rho": m.rho,
        "gamma": m.gamma,
        "nu": m.nu,
    }


def _ocsvm_from_dict(d):
    return OcsvmModel(
        support_vectors=np.array(d["support_vectors"], dtype=float),
        alphas=np.array(d["alphas"], dtype=float),
        rho=float(d["rho"]),
        gamma=float(d["gamma"]),
        nu=float(d["nu"]),
    )


def _density_to_dict(model):
    if isinstance(model, GaussianFeatureModel):
        return {
            "kind": "gaussian",
            "means": model.means.tolist(),
            "vars": model.vars.tolist(),
            "var_floor": model.var_floor.tolist(),
        }
    if isinstance(model, GmmFeatureModel):
        return {
            "kind": "gmm",
            "weights": [[w.tolist() for w in row] for row in model.weights],
            "means": [[m.tolist() for m in row] for row in model.means],
            "vars": [[v.tolist() for v in row] for row in model.vars],
            "var_floor": model.var_floor.tolist(),
        }
    raise TypeError(f"unknown density model {type(model)}")


def _density_from_dict(d):
    if d["kind"] == "gaussian":
        return GaussianFeatureModel(
            means=np.array(d["means"], dtype=float),
            vars=np.array(d["vars"], dtype=float),
            var_floor=np.array(d["var_floor"], dtype=float),
        )
    return GmmFeatureModel(
        weights=[[np.array(w) for w in row] for row in d["weights"]],
        means=[[np.array(m) for m in row] for row in d["means"]],
        vars=[[np.array(v) for v in row] for row in d["vars"]],
        var_floor=np.array(d["var_floor"], dtype=float),
    )


def save_cascade(model, path):
    check_fitted(model, "classifier_")
    payload = {
        "format_version": FORMAT_VERSION,
        "params": {k: (list(v) if isinstance(v, tuple) else v)
                   for k, v in model.get_params().items()},
        "detectors": [_ocsvm_to_dict(d) for d in model.ensemble_.detectors_],
        "calibrators": [{"a": c.a, "b": c.b} for c in model.ensemble_.calibrators_],
        "nus": list(map(float, model.ensemble_.nus_)),
        "priors": model.classifier_.priors_.tolist(),
        "density": _density_to_dict(model.classifier_.model_),
        "n_components": model.classifier_.n_components_,
        "classes": model.classifier_.classes_.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_cascade(path):
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format {payload.get('format_version')}")
    params = dict(payload["params"])
    params["nu_grid"] = tuple(params["nu_grid"])
    model = CascadeClassifier(**params)

    ens = OneClassChannelEnsemble(
        n_channels=model.n_channels, block_dim=model.block_dim,
        mode=model.mode, nu_grid=model.nu_grid,
        random_state=model.random_state,
    )
    ens.detectors_ = [_ocsvm_from_dict(d) for d in payload["detectors"]]
    ens.calibrators_ = [Calibrator(a=c["a"], b=c["b"])
                        for c in payload["calibrators"]]
    ens.nus_ = payload["nus"]
    model.ensemble_ = ens

    clf = DynamicNaiveBayes(
        n_channels=model.n_channels, density=model.density,
        n_components=model.n_components, random_state=model.random_state,
    )
    clf.classes_ = np.array(payload["classes"], dtype=int)
    clf.priors_ = np.array(payload["priors"], dtype=float)
    clf.log_priors_ = np.log(np.maximum(clf.priors_, 1e-300))
    clf.model_ = _density_from_dict(payload["density"])
    clf.n_components_ = payload["n_components"]
    d_total = (clf.model_.means.shape[1]
               if isinstance(clf.model_, GaussianFeatureModel)
               else len(clf.model_.means[0]))
    clf.block_dim_ = d_total // model.n_channels
    model.classifier_ = clf
    return model
