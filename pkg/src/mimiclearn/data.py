"""Tabular dataset ingestion, scaling, and deterministic splitting.

CSV files are comma-separated UTF-8 with an optional header row. Missing
cells (default token ``?``) are imputed with the column median of the
non-missing values, so no NaN survives ingestion. Labels are mapped to class
indices through an alphabetically sorted class-name list; for binary tasks
the schema's positive class is forced to index 1.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError
from .rng import generator


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Dataset:
    """Immutable feature matrix with optional integer class labels.

    ``features`` is (n_samples, n_features) float64; ``labels`` is (n,) int64
    or None for an unlabeled pool. ``class_names[i]`` is the display name of
    class index ``i``.
    """

    features: np.ndarray
    feature_names: tuple[str, ...]
    labels: np.ndarray | None
    class_names: tuple[str, ...]
    source_id: str

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 2:
            raise DataError("features must be a 2-D matrix")
        if not np.isfinite(feats).all():
            raise DataError("features contain NaN or non-finite values")
        if len(self.feature_names) != feats.shape[1]:
            raise DataError(
                f"{len(self.feature_names)} feature names for "
                f"{feats.shape[1]} feature columns"
            )
        object.__setattr__(self, "features", _frozen(feats))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "class_names", tuple(self.class_names))
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (feats.shape[0],):
                raise DataError("label count does not match row count")
            if labels.size and (labels.min() < 0 or labels.max() >= len(self.class_names)):
                raise DataError("label index outside class_names range")
            object.__setattr__(self, "labels", _frozen(labels))

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def select(self, idx: np.ndarray, source_suffix: str = "") -> "Dataset":
        """Row subset, preserving label/schema metadata."""
        labels = None if self.labels is None else self.labels[idx]
        return Dataset(
            self.features[idx],
            self.feature_names,
            labels,
            self.class_names,
            self.source_id + source_suffix,
        )

    def without_labels(self) -> "Dataset":
        return Dataset(
            self.features, self.feature_names, None, self.class_names, self.source_id
        )

    def with_labels(self, labels: np.ndarray) -> "Dataset":
        return Dataset(
            self.features, self.feature_names, labels, self.class_names, self.source_id
        )


@dataclass(frozen=True)
class ScalerParams:
    """Per-feature standardization parameters (population statistics)."""

    means: np.ndarray
    std_devs: np.ndarray

    def __post_init__(self):
        means = np.asarray(self.means, dtype=np.float64)
        stds = np.asarray(self.std_devs, dtype=np.float64)
        if means.shape != stds.shape or means.ndim != 1:
            raise DataError("scaler means/std_devs must be matching vectors")
        if not (stds > 0).all():
            raise DataError("scaler std_devs must be strictly positive")
        object.__setattr__(self, "means", _frozen(means))
        object.__setattr__(self, "std_devs", _frozen(stds))


@dataclass(frozen=True)
class SplitSpec:
    """Fractions for the private/public/test three-way split."""

    private_fraction: float = 0.5
    public_fraction: float = 0.3
    test_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        fractions = (self.private_fraction, self.public_fraction, self.test_fraction)
        if any(not (0.0 < f < 1.0) for f in fractions):
            raise DataError("split fractions must each lie in (0, 1)")
        if abs(sum(fractions) - 1.0) > 1e-9:
            raise DataError(f"split fractions sum to {sum(fractions)!r}, expected 1")

    @property
    def fractions(self) -> tuple[float, float, float]:
        return (self.private_fraction, self.public_fraction, self.test_fraction)


@dataclass(frozen=True)
class FoldAssignment:
    """Stratified k-fold assignment: ``fold_of_sample[i]`` in [0, k)."""

    fold_of_sample: np.ndarray
    k: int

    def __post_init__(self):
        folds = np.asarray(self.fold_of_sample, dtype=np.int64)
        if self.k < 2:
            raise DataError("k must be at least 2")
        if folds.size and (folds.min() < 0 or folds.max() >= self.k):
            raise DataError("fold index outside [0, k)")
        object.__setattr__(self, "fold_of_sample", _frozen(folds))

    def test_indices(self, fold: int) -> np.ndarray:
        return np.nonzero(self.fold_of_sample == fold)[0]

    def train_indices(self, fold: int) -> np.ndarray:
        return np.nonzero(self.fold_of_sample != fold)[0]


@dataclass(frozen=True)
class CsvSchema:
    """How to read a CSV: which column holds labels and how cells are coded.

    ``label_column`` is a header name (or 0-based column index when the file
    has no header); None loads every column as features. For binary data,
    ``positive_class`` names the label value that must become class index 1.
    """

    label_column: str | int | None = None
    has_header: bool = True
    missing_token: str = "?"
    positive_class: str | None = None


@dataclass(frozen=True)
class IngestStats:
    n_rows: int
    n_imputed: int


@dataclass(frozen=True)
class SplitResult:
    """Output of :func:`stratified_split`.

    ``public_pool`` has its labels stripped; the ground-truth copy is kept in
    ``public_labels_hidden`` strictly for evaluation, never for training.
    ``row_ids`` maps each part to the original row indices it came from.
    """

    private: Dataset
    public_pool: Dataset
    test: Dataset
    public_labels_hidden: np.ndarray
    row_ids: dict = field(default_factory=dict)

    def parts(self) -> tuple[Dataset, Dataset, Dataset]:
        return (self.private, self.public_pool, self.test)


def ingest_csv(path: str | Path, schema: CsvSchema) -> tuple[Dataset, IngestStats]:
    """Load a CSV per ``schema``, returning the dataset and ingestion stats.

    Raises DataError for a missing/empty file, ragged rows (naming the line),
    non-numeric feature cells, or an unknown positive class.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise DataError(f"empty file: {path}")

    if schema.has_header:
        header = [c.strip() for c in rows[0]]
        body = rows[1:]
        first_line = 2
        if not body:
            raise DataError(f"{path}: header only, no data rows")
    else:
        header = [f"x{i}" for i in range(len(rows[0]))]
        body = rows
        first_line = 1

    n_cols = len(header)
    label_idx = _resolve_label_column(schema.label_column, header, n_cols, path)
    feature_names = tuple(
        name for i, name in enumerate(header) if i != label_idx
    )

    raw = np.empty((len(body), len(feature_names)), dtype=np.float64)
    missing = np.zeros_like(raw, dtype=bool)
    label_values: list[str] = []
    for r, row in enumerate(body):
        line = first_line + r
        if len(row) != n_cols:
            raise DataError(
                f"{path} line {line}: expected {n_cols} columns, found {len(row)}"
            )
        c = 0
        for i, cell in enumerate(row):
            cell = cell.strip()
            if i == label_idx:
                if cell == schema.missing_token or cell == "":
                    raise DataError(f"{path} line {line}: missing label value")
                label_values.append(cell)
                continue
            if cell == schema.missing_token or cell == "":
                raw[r, c] = np.nan
                missing[r, c] = True
            else:
                try:
                    raw[r, c] = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path} line {line}: non-numeric value {cell!r} "
                        f"in column {header[i]!r}"
                    ) from None
            c += 1

    n_imputed = int(missing.sum())
    if n_imputed:
        for c in range(raw.shape[1]):
            col_missing = missing[:, c]
            if not col_missing.any():
                continue
            known = raw[~col_missing, c]
            if known.size == 0:
                raise DataError(
                    f"{path}: column {feature_names[c]!r} has no known values to impute from"
                )
            raw[col_missing, c] = float(np.median(known))

    if label_idx is None:
        labels = None
        class_names: tuple[str, ...] = ()
    else:
        class_names = _order_class_names(
            sorted(set(label_values)), schema.positive_class, path
        )
        index_of = {name: i for i, name in enumerate(class_names)}
        labels = np.array([index_of[v] for v in label_values], dtype=np.int64)

    ds = Dataset(raw, feature_names, labels, class_names, str(path))
    return ds, IngestStats(n_rows=ds.n_rows, n_imputed=n_imputed)


def load_csv(path: str | Path, schema: CsvSchema) -> Dataset:
    return ingest_csv(path, schema)[0]


def _resolve_label_column(label_column, header, n_cols, path):
    if label_column is None:
        return None
    if isinstance(label_column, int):
        if not (0 <= label_column < n_cols):
            raise DataError(f"{path}: label column index {label_column} out of range")
        return label_column
    try:
        return header.index(label_column)
    except ValueError:
        raise DataError(
            f"{path}: no column named {label_column!r} (have {header})"
        ) from None


def _order_class_names(names, positive_class, path):
    """Alphabetical class order; binary tasks get the positive class at index 1."""
    if positive_class is not None:
        if positive_class not in names:
            raise DataError(
                f"{path}: positive class {positive_class!r} never appears "
                f"(labels seen: {names})"
            )
        if len(names) == 2 and names[1] != positive_class:
            names = [names[1], names[0]]
    return tuple(names)


def save_csv(ds: Dataset, path: str | Path) -> None:
    """Write a dataset back to CSV (header row, label column named 'label').

    Floats are written with repr's shortest round-trip form, so a reload
    reproduces the matrix exactly.
    """
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = list(ds.feature_names)
        if ds.labels is not None:
            header.append("label")
        writer.writerow(header)
        for r in range(ds.n_rows):
            row = [repr(float(v)) for v in ds.features[r]]
            if ds.labels is not None:
                row.append(ds.class_names[ds.labels[r]])
            writer.writerow(row)


def fit_scaler(ds: Dataset) -> ScalerParams:
    """Per-column mean and population std; zero-variance columns get std 1."""
    if ds.n_rows == 0:
        raise DataError("cannot fit a scaler on an empty dataset")
    means = ds.features.mean(axis=0)
    stds = ds.features.std(axis=0)
    stds = np.where(stds == 0.0, 1.0, stds)
    return ScalerParams(means, stds)


def apply_scaler(ds: Dataset, scaler: ScalerParams) -> Dataset:
    if scaler.means.shape[0] != ds.n_features:
        raise DataError(
            f"scaler has {scaler.means.shape[0]} columns, dataset has {ds.n_features}"
        )
    scaled = (ds.features - scaler.means) / scaler.std_devs
    return Dataset(scaled, ds.feature_names, ds.labels, ds.class_names, ds.source_id)


def _allocate_counts(count: int, fractions: tuple[float, ...]) -> list[int]:
    """Largest-remainder allocation of `count` items over the fractions."""
    raw = [count * f for f in fractions]
    base = [math.floor(x) for x in raw]
    leftover = count - sum(base)
    by_remainder = sorted(range(len(fractions)), key=lambda i: (-(raw[i] - base[i]), i))
    for i in by_remainder[:leftover]:
        base[i] += 1
    return base


def stratified_split(ds: Dataset, spec: SplitSpec) -> SplitResult:
    """Deterministic three-way stratified split into private/public/test.

    Per-class proportions in every part match the input within one sample.
    The public part is returned unlabeled; its true labels are retained only
    in ``public_labels_hidden`` for held-out evaluation.
    """
    if ds.labels is None:
        raise DataError("stratified_split requires a labeled dataset")
    rng = generator(spec.seed)
    part_ids: list[list[np.ndarray]] = [[], [], []]
    for c in range(len(ds.class_names)):
        members = np.nonzero(ds.labels == c)[0]
        if members.size == 0:
            continue
        if members.size < 3:
            raise DataError(
                f"class {ds.class_names[c]!r} has only {members.size} samples; "
                "need at least 3 to split three ways"
            )
        counts = _allocate_counts(members.size, spec.fractions)
        if min(counts) == 0:
            raise DataError(
                f"class {ds.class_names[c]!r}: fractions {spec.fractions} leave a "
                "part with zero samples"
            )
        shuffled = members[rng.permutation(members.size)]
        stop1, stop2 = counts[0], counts[0] + counts[1]
        part_ids[0].append(shuffled[:stop1])
        part_ids[1].append(shuffled[stop1:stop2])
        part_ids[2].append(shuffled[stop2:])

    ids = [np.sort(np.concatenate(p)) for p in part_ids]
    private = ds.select(ids[0], "#private")
    public_labeled = ds.select(ids[1], "#public")
    test = ds.select(ids[2], "#test")
    return SplitResult(
        private=private,
        public_pool=public_labeled.without_labels(),
        test=test,
        public_labels_hidden=np.array(public_labeled.labels),
        row_ids={"private": ids[0], "public": ids[1], "test": ids[2]},
    )


def kfold(ds: Dataset, k: int, seed: int) -> FoldAssignment:
    """Stratified k-fold assignment, deterministic for a fixed seed.

    Classes are dealt round-robin into folds with a cursor that carries over
    between classes, so per-class counts AND total fold sizes both differ by
    at most one across folds.
    """
    if ds.labels is None:
        raise DataError("kfold requires a labeled dataset")
    if k < 2:
        raise DataError(f"k must be at least 2, got {k}")
    rng = generator(seed)
    fold_of = np.empty(ds.n_rows, dtype=np.int64)
    cursor = 0
    for c in range(len(ds.class_names)):
        members = np.nonzero(ds.labels == c)[0]
        if members.size == 0:
            continue
        if members.size < k:
            raise DataError(
                f"class {ds.class_names[c]!r} has {members.size} samples, "
                f"fewer than k={k}"
            )
        shuffled = members[rng.permutation(members.size)]
        for j, i in enumerate(shuffled):
            fold_of[i] = (cursor + j) % k
        cursor = (cursor + members.size) % k
    return FoldAssignment(fold_of, k)


def write_split_manifest(result: SplitResult, spec: SplitSpec, path: str | Path) -> None:
    """JSON manifest listing the seed, fractions, and row ids per part."""
    manifest = {
        "seed": spec.seed,
        "fractions": list(spec.fractions),
        "row_ids": {name: [int(i) for i in ids] for name, ids in result.row_ids.items()},
        "counts": {name: len(ids) for name, ids in result.row_ids.items()},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
