"""Versioned JSON serialization for shareable student models.

Two hard refusals, both raising :class:`PrivacyError`:

* models tagged teacher-private never serialize -- the whole point of
  training a student is that the teacher stays with the data owner;
* nearest-neighbor students never serialize -- their parameters *are* the
  training rows plus the teacher's per-row answers, so exporting one would
  ship a labeled dataset, not a model.

Files are plain JSON with ``format_version`` 1. Floats survive a round trip
exactly (shortest-repr encoding both ways), so an imported model predicts
bit-identically to the one exported. ``import_model`` validates structure
before constructing anything and raises :class:`ModelFormatError` on any
malformed, truncated, or future-versioned file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classifiers import (
    FAMILIES,
    ORIGIN_STUDENT,
    ORIGIN_TEACHER,
    ClassifierSpec,
    TrainedModel,
)
from .classifiers.bayes import NbModel
from .classifiers.forest import ForestModel, TreeNodes
from .classifiers.svm import SvmModel
from .data import ScalerParams
from .errors import DataError, ModelFormatError, PipelineError, PrivacyError

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ModelFile:
    """Parsed, validated content of a model file."""

    format_version: int
    kind: str
    hyperparameters: dict
    seed: int
    origin: str
    class_names: tuple[str, ...]
    n_features: int
    scaler: dict | None
    parameters: dict
    created_at: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "kind": self.kind,
            "hyperparameters": self.hyperparameters,
            "seed": self.seed,
            "origin": self.origin,
            "class_names": list(self.class_names),
            "n_features": self.n_features,
            "scaler": self.scaler,
            "parameters": self.parameters,
            "created_at": self.created_at,
        }


def _family_parameters(model: TrainedModel) -> dict:
    p = model.params
    if isinstance(p, SvmModel):
        return {"weights": p.weights.tolist(), "bias": p.bias}
    if isinstance(p, ForestModel):
        return {
            "n_classes": p.n_classes,
            "trees": [
                {
                    "feature": t.feature.tolist(),
                    "threshold": t.threshold.tolist(),
                    "left": t.left.tolist(),
                    "right": t.right.tolist(),
                    "counts": t.counts.tolist(),
                }
                for t in p.trees
            ],
        }
    if isinstance(p, NbModel):
        return {
            "priors": p.priors.tolist(),
            "means": p.means.tolist(),
            "variances": p.variances.tolist(),
            "epsilon": p.epsilon,
        }
    raise PrivacyError(
        "a nearest-neighbor student stores its training rows verbatim; "
        "exporting it would share data, not a model"
    )


def model_to_file(model: TrainedModel, created_at: str | None = None) -> ModelFile:
    """Build the serializable record, enforcing both export refusals."""
    if model.origin == ORIGIN_TEACHER:
        raise PrivacyError(
            "refusing to export a teacher-private model; "
            "train and export a student instead"
        )
    scaler = None
    if model.scaler is not None:
        scaler = {
            "means": model.scaler.means.tolist(),
            "std_devs": model.scaler.std_devs.tolist(),
        }
    return ModelFile(
        format_version=MODEL_FORMAT_VERSION,
        kind=model.spec.kind,
        hyperparameters=dict(model.spec.hyperparameters),
        seed=model.spec.seed,
        origin=model.origin,
        class_names=model.class_names,
        n_features=model.n_features,
        scaler=scaler,
        parameters=_family_parameters(model),
        created_at=created_at,
    )


def file_json(mf: ModelFile) -> str:
    return json.dumps(mf.to_json_dict(), indent=2, sort_keys=True) + "\n"


def export_model(
    model: TrainedModel, path: str | Path, created_at: str | None = None
) -> ModelFile:
    """Write a student model to ``path``; returns the record written.

    ``created_at`` is optional precisely so that default exports are
    byte-for-byte reproducible.
    """
    mf = model_to_file(model, created_at=created_at)
    Path(path).write_text(file_json(mf), encoding="utf-8")
    return mf


def _need(obj: dict, key: str, kinds, where: str):
    if key not in obj:
        raise ModelFormatError(f"model file is missing {where}{key!r}")
    val = obj[key]
    if kinds is not None and not isinstance(val, kinds):
        raise ModelFormatError(f"model file field {where}{key!r} has the wrong type")
    return val


def _float_vector(raw, length, name) -> np.ndarray:
    arr = np.asarray(raw, dtype=np.float64)
    if arr.shape != (length,) or not np.isfinite(arr).all():
        raise ModelFormatError(f"{name} must be {length} finite numbers")
    return arr


def _float_matrix(raw, shape, name) -> np.ndarray:
    arr = np.asarray(raw, dtype=np.float64)
    if arr.shape != shape or not np.isfinite(arr).all():
        raise ModelFormatError(f"{name} must be a finite {shape[0]}x{shape[1]} matrix")
    return arr


def _int_vector(raw, length, name) -> np.ndarray:
    arr = np.asarray(raw)
    if arr.shape != (length,) or arr.dtype.kind not in "iu":
        raise ModelFormatError(f"{name} must be {length} integers")
    return arr.astype(np.int64)


def _parse_tree(raw: dict, index: int, n_features: int, n_classes: int) -> TreeNodes:
    where = f"parameters.trees[{index}]."
    feature_raw = _need(raw, "feature", list, where)
    n_nodes = len(feature_raw)
    if n_nodes < 1:
        raise ModelFormatError(f"tree {index} has no nodes")
    feature = _int_vector(feature_raw, n_nodes, where + "feature")
    threshold = _float_vector(_need(raw, "threshold", list, where), n_nodes,
                              where + "threshold")
    left = _int_vector(_need(raw, "left", list, where), n_nodes, where + "left")
    right = _int_vector(_need(raw, "right", list, where), n_nodes, where + "right")
    counts = _float_matrix(_need(raw, "counts", list, where),
                           (n_nodes, n_classes), where + "counts")
    if (counts < 0).any():
        raise ModelFormatError(f"tree {index} has negative leaf counts")
    if feature.min() < -1 or feature.max() >= n_features:
        raise ModelFormatError(f"tree {index} references an invalid feature")
    is_leaf = feature == -1
    if not is_leaf.any():
        raise ModelFormatError(f"tree {index} has no leaves")
    if (left[is_leaf] != -1).any() or (right[is_leaf] != -1).any():
        raise ModelFormatError(f"tree {index} has leaves with children")
    inner = np.nonzero(~is_leaf)[0]
    for child in (left, right):
        c = child[inner]
        # preorder storage: children always point forward, never backward
        if ((c <= inner) | (c >= n_nodes)).any():
            raise ModelFormatError(f"tree {index} has an invalid child pointer")
    if counts[is_leaf].sum(axis=1).min() <= 0:
        raise ModelFormatError(f"tree {index} has an empty leaf")
    return TreeNodes(feature=feature, threshold=threshold, left=left,
                     right=right, counts=counts)


def _parse_parameters(kind, raw, n_features, n_classes):
    if kind == "svm":
        weights = _float_vector(_need(raw, "weights", list, "parameters."),
                                n_features, "parameters.weights")
        bias = float(_need(raw, "bias", (int, float), "parameters."))
        if not np.isfinite(bias):
            raise ModelFormatError("parameters.bias must be finite")
        if n_classes != 2:
            raise ModelFormatError("svm model files must be binary")
        return SvmModel(weights=weights, bias=bias)
    if kind == "rf":
        declared = _need(raw, "n_classes", int, "parameters.")
        if declared != n_classes:
            raise ModelFormatError(
                f"parameters.n_classes is {declared} but the file names "
                f"{n_classes} classes"
            )
        trees_raw = _need(raw, "trees", list, "parameters.")
        if not trees_raw:
            raise ModelFormatError("parameters.trees is empty")
        trees = tuple(
            _parse_tree(t, i, n_features, n_classes)
            for i, t in enumerate(trees_raw)
        )
        return ForestModel(trees=trees, n_features=n_features, n_classes=n_classes)
    if kind == "nb":
        priors = _float_vector(_need(raw, "priors", list, "parameters."),
                               n_classes, "parameters.priors")
        if (priors < 0).any() or abs(priors.sum() - 1.0) > 1e-9:
            raise ModelFormatError("parameters.priors must be nonnegative and sum to 1")
        means = _float_matrix(_need(raw, "means", list, "parameters."),
                              (n_classes, n_features), "parameters.means")
        variances = _float_matrix(_need(raw, "variances", list, "parameters."),
                                  (n_classes, n_features), "parameters.variances")
        if (variances <= 0).any():
            raise ModelFormatError("parameters.variances must be strictly positive")
        epsilon = float(_need(raw, "epsilon", (int, float), "parameters."))
        if not (epsilon > 0):
            raise ModelFormatError("parameters.epsilon must be strictly positive")
        return NbModel(priors=priors, means=means, variances=variances,
                       epsilon=epsilon)
    raise ModelFormatError(f"unsupported model kind {kind!r}")  # pragma: no cover


def parse_model_file(text: str) -> ModelFile:
    """Validate raw JSON text into a :class:`ModelFile`."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ModelFormatError("model file must hold a JSON object")

    version = _need(raw, "format_version", int, "")
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model format version {version}; "
            f"this build reads version {MODEL_FORMAT_VERSION}"
        )
    kind = _need(raw, "kind", str, "")
    if kind == "knn":
        raise PrivacyError(
            "refusing to load a nearest-neighbor model file: "
            "its parameters are raw training rows"
        )
    if kind not in FAMILIES:
        raise ModelFormatError(f"unknown model kind {kind!r}")
    origin = _need(raw, "origin", str, "")
    if origin == ORIGIN_TEACHER:
        raise PrivacyError(
            "refusing to load a model file tagged teacher-private; "
            "such files should never exist"
        )
    if origin != ORIGIN_STUDENT:
        raise ModelFormatError(f"unknown model origin {origin!r}")

    class_names_raw = _need(raw, "class_names", list, "")
    if len(class_names_raw) < 2 or not all(isinstance(c, str) for c in class_names_raw):
        raise ModelFormatError("class_names must list at least two names")
    n_features = _need(raw, "n_features", int, "")
    if n_features < 1:
        raise ModelFormatError("n_features must be at least 1")

    scaler_raw = raw.get("scaler")
    if scaler_raw is not None:
        if not isinstance(scaler_raw, dict):
            raise ModelFormatError("scaler must be an object or null")
        means = _float_vector(_need(scaler_raw, "means", list, "scaler."),
                              n_features, "scaler.means")
        stds = _float_vector(_need(scaler_raw, "std_devs", list, "scaler."),
                             n_features, "scaler.std_devs")
        if (stds <= 0).any():
            raise ModelFormatError("scaler.std_devs must be strictly positive")
        scaler_raw = {"means": means.tolist(), "std_devs": stds.tolist()}

    hyperparameters = _need(raw, "hyperparameters", dict, "")
    seed = _need(raw, "seed", int, "")
    parameters = _need(raw, "parameters", dict, "")
    # run the family validators now so a bad file fails here, not on use
    _parse_parameters(kind, parameters, n_features, len(class_names_raw))
    try:
        ClassifierSpec(kind, dict(hyperparameters), seed=seed)
    except PipelineError as exc:
        raise ModelFormatError(f"invalid hyperparameters in model file: {exc}") from exc

    created_at = raw.get("created_at")
    if created_at is not None and not isinstance(created_at, str):
        raise ModelFormatError("created_at must be a string or null")
    return ModelFile(
        format_version=version,
        kind=kind,
        hyperparameters=dict(hyperparameters),
        seed=seed,
        origin=origin,
        class_names=tuple(class_names_raw),
        n_features=n_features,
        scaler=scaler_raw,
        parameters=parameters,
        created_at=created_at,
    )


def file_to_model(mf: ModelFile) -> TrainedModel:
    params = _parse_parameters(mf.kind, mf.parameters, mf.n_features,
                               len(mf.class_names))
    scaler = None
    if mf.scaler is not None:
        try:
            scaler = ScalerParams(
                means=np.asarray(mf.scaler["means"], dtype=np.float64),
                std_devs=np.asarray(mf.scaler["std_devs"], dtype=np.float64),
            )
        except DataError as exc:
            raise ModelFormatError(f"invalid scaler in model file: {exc}") from exc
    try:
        spec = ClassifierSpec(mf.kind, dict(mf.hyperparameters), seed=mf.seed)
    except PipelineError as exc:
        raise ModelFormatError(f"invalid hyperparameters in model file: {exc}") from exc
    return TrainedModel(
        spec=spec,
        params=params,
        class_names=mf.class_names,
        scaler=scaler,
        origin=mf.origin,
    )


def import_model(path: str | Path) -> TrainedModel:
    """Read and validate a student model file."""
    p = Path(path)
    if not p.is_file():
        raise DataError(f"model file not found: {p}")
    mf = parse_model_file(p.read_text(encoding="utf-8"))
    return file_to_model(mf)
