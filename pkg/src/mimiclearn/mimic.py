"""The mimic-learning pipeline: teacher on private rows, student on public.

Stages, each callable on its own or together through :func:`run_pipeline`:

1. stratified three-way split (private / public pool / held-out test),
2. teacher selection -- every registered classifier runs stratified k-fold
   cross-validation on the private partition and the best one is refit on
   all of it,
3. annotation -- the teacher hard-labels the unlabeled public pool,
4. student selection -- the same race, run on the annotated pool,
5. fidelity -- teacher and student are compared on the held-out test rows.

Everything downstream of the master seed is deterministic, including under
``jobs > 1``; wall-clock timings live only on the in-memory result object so
serialized runs are reproducible byte for byte.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .classifiers import (
    ORIGIN_STUDENT,
    ORIGIN_TEACHER,
    ClassifierSpec,
    TrainedModel,
    fit,
    predict_batch,
    score_batch,
)
from .data import Dataset, SplitSpec, kfold, stratified_split
from .errors import DataError, PipelineError
from .metrics import MetricsReport, RocCurve, macro_metrics, positive_metrics, roc
from .rng import STAGE_FOLDS, STAGE_SPLIT, derive_seed

SELECTION_METRICS = ("accuracy", "macro_f1")


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a run needs besides the data itself.

    ``jobs`` only controls how many worker threads forest training may use;
    it never changes any numeric result and is deliberately left out of the
    serialized echo.
    """

    specs: tuple[ClassifierSpec, ...]
    seed: int = 0
    fractions: tuple[float, float, float] = (0.5, 0.3, 0.2)
    cv_k: int = 10
    selection_metric: str = "accuracy"
    jobs: int = 1

    def __post_init__(self):
        if not self.specs:
            raise PipelineError("config needs at least one classifier spec")
        object.__setattr__(self, "specs", tuple(self.specs))
        object.__setattr__(self, "fractions", tuple(float(f) for f in self.fractions))
        SplitSpec(*self.fractions)  # validates the fractions
        if self.cv_k < 2:
            raise PipelineError("cv_k must be at least 2")
        if self.selection_metric not in SELECTION_METRICS:
            raise PipelineError(
                f"selection_metric must be one of {SELECTION_METRICS}"
            )
        if self.jobs < 1:
            raise PipelineError("jobs must be at least 1")

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "fractions": list(self.fractions),
            "cv_k": self.cv_k,
            "selection_metric": self.selection_metric,
            "specs": [
                {
                    "kind": s.kind,
                    "hyperparameters": s.hyperparameters,
                    "seed": s.seed,
                }
                for s in self.specs
            ],
        }


@dataclass(frozen=True)
class CvReport:
    """Cross-validation outcome for one spec."""

    spec: ClassifierSpec
    fold_accuracies: tuple[float, ...]
    fold_macro_f1: tuple[float, ...]

    @property
    def mean_accuracy(self) -> float:
        return sum(self.fold_accuracies) / len(self.fold_accuracies)

    @property
    def mean_macro_f1(self) -> float:
        return sum(self.fold_macro_f1) / len(self.fold_macro_f1)

    def to_json_dict(self) -> dict:
        return {
            "kind": self.spec.kind,
            "hyperparameters": self.spec.hyperparameters,
            "seed": self.spec.seed,
            "fold_accuracies": list(self.fold_accuracies),
            "mean_accuracy": self.mean_accuracy,
            "fold_macro_f1": list(self.fold_macro_f1),
            "mean_macro_f1": self.mean_macro_f1,
        }


@dataclass(frozen=True)
class RaceResult:
    """All CV reports plus which entry won under the selection metric."""

    reports: tuple[CvReport, ...]
    winner_index: int
    selection_metric: str

    @property
    def winner(self) -> CvReport:
        return self.reports[self.winner_index]

    def to_json_dict(self) -> dict:
        return {
            "selection_metric": self.selection_metric,
            "winner_index": self.winner_index,
            "winner_kind": self.winner.spec.kind,
            "entries": [r.to_json_dict() for r in self.reports],
        }


@dataclass(frozen=True)
class AnnotatedDataset:
    """A public pool plus the labels a teacher assigned to it."""

    pool: Dataset
    labels: np.ndarray
    class_names: tuple[str, ...]
    teacher_kind: str

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.shape != (self.pool.n_rows,):
            raise PipelineError("annotation count does not match pool size")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def label_counts(self) -> tuple[int, ...]:
        return tuple(
            int(c) for c in np.bincount(self.labels, minlength=len(self.class_names))
        )

    def to_dataset(self) -> Dataset:
        return self.pool.with_labels(self.labels)


@dataclass(frozen=True)
class FidelityReport:
    """How faithfully the student mimics the teacher on held-out rows.

    ``agreement`` is the fraction of test rows where the two models emit the
    same label, regardless of the true one. ``deltas`` holds teacher-minus-
    student differences for the headline metrics, AUC included.
    """

    n_test: int
    teacher_metrics: MetricsReport
    student_metrics: MetricsReport
    teacher_macro: MetricsReport
    student_macro: MetricsReport
    teacher_roc: RocCurve
    student_roc: RocCurve
    agreement: float
    deltas: dict = field(default_factory=dict)

    @property
    def teacher_auc(self) -> float:
        return self.teacher_roc.auc

    @property
    def student_auc(self) -> float:
        return self.student_roc.auc

    def to_json_dict(self) -> dict:
        return {
            "n_test": self.n_test,
            "agreement": self.agreement,
            "teacher": {
                "positive": self.teacher_metrics.to_json_dict(),
                "macro": self.teacher_macro.to_json_dict(),
                "auc": self.teacher_auc,
            },
            "student": {
                "positive": self.student_metrics.to_json_dict(),
                "macro": self.student_macro.to_json_dict(),
                "auc": self.student_auc,
            },
            "deltas": dict(sorted(self.deltas.items())),
            "teacher_roc": self.teacher_roc.to_json_dict(),
            "student_roc": self.student_roc.to_json_dict(),
        }


@dataclass(frozen=True)
class PipelineRun:
    """Complete record of one end-to-end run.

    ``timings`` (seconds per stage) and the two models are in-memory only;
    ``to_json_dict`` reflects everything derived from the seed and nothing
    else, so two runs of the same config serialize identically.
    """

    config: PipelineConfig
    part_counts: dict
    row_ids: dict
    teacher_race: RaceResult
    student_race: RaceResult
    annotation_counts: tuple[int, ...]
    fidelity: FidelityReport
    teacher: TrainedModel
    student: TrainedModel
    timings: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "config": self.config.to_json_dict(),
            "split": {
                "counts": dict(sorted(self.part_counts.items())),
                "row_ids": {k: list(v) for k, v in sorted(self.row_ids.items())},
            },
            "teacher_race": self.teacher_race.to_json_dict(),
            "student_race": self.student_race.to_json_dict(),
            "annotation": {
                "teacher_kind": self.teacher.spec.kind,
                "label_counts": list(self.annotation_counts),
            },
            "fidelity": self.fidelity.to_json_dict(),
        }


def run_json(run: PipelineRun) -> str:
    return json.dumps(run.to_json_dict(), indent=2, sort_keys=True) + "\n"


def _cross_validate(spec, train_set, assignment, jobs):
    n_classes = len(train_set.class_names)
    accs, f1s = [], []
    for fold in range(assignment.k):
        fit_part = train_set.select(assignment.train_indices(fold))
        eval_part = train_set.select(assignment.test_indices(fold))
        model = fit(spec, fit_part, ORIGIN_TEACHER, jobs=jobs)
        pred = predict_batch(model, eval_part.features)
        accs.append(float(np.mean(pred == eval_part.labels)))
        f1s.append(macro_metrics(eval_part.labels, pred, n_classes).f1)
    return CvReport(spec=spec, fold_accuracies=tuple(accs), fold_macro_f1=tuple(f1s))


def _race(train_set: Dataset, config: PipelineConfig) -> RaceResult:
    """Cross-validate every spec on ``train_set`` and pick the best.

    Ties on the selection metric fall back to mean macro-F1, then to the
    earlier entry in ``config.specs``.
    """
    if train_set.labels is None:
        raise DataError("model selection requires labeled data")
    assignment = kfold(
        train_set, config.cv_k, derive_seed(config.seed, STAGE_FOLDS)
    )
    reports = [
        _cross_validate(spec, train_set, assignment, config.jobs)
        for spec in config.specs
    ]
    if config.selection_metric == "accuracy":
        values = [r.mean_accuracy for r in reports]
    else:
        values = [r.mean_macro_f1 for r in reports]
    winner = max(
        range(len(reports)),
        key=lambda i: (values[i], reports[i].mean_macro_f1, -i),
    )
    return RaceResult(
        reports=tuple(reports),
        winner_index=winner,
        selection_metric=config.selection_metric,
    )


def train_teacher(
    private: Dataset, config: PipelineConfig
) -> tuple[TrainedModel, RaceResult]:
    """Select by cross-validation on the private partition, refit on all of it."""
    race = _race(private, config)
    model = fit(race.winner.spec, private, ORIGIN_TEACHER, jobs=config.jobs)
    return model, race


def annotate(teacher: TrainedModel, pool: Dataset) -> AnnotatedDataset:
    """Hard-label an unlabeled pool with the teacher's predictions.

    Refuses pools that already carry labels: real labels must never be
    silently overwritten, and the annotated pool must contain nothing the
    teacher didn't put there.
    """
    if teacher.origin != ORIGIN_TEACHER:
        raise PipelineError(
            f"annotation requires a {ORIGIN_TEACHER} model, got {teacher.origin!r}"
        )
    if pool.labels is not None:
        raise PipelineError("annotation pool must be unlabeled")
    labels = predict_batch(teacher, pool.features)
    return AnnotatedDataset(
        pool=pool,
        labels=labels,
        class_names=teacher.class_names,
        teacher_kind=teacher.spec.kind,
    )


def train_student(
    annotated: AnnotatedDataset, config: PipelineConfig
) -> tuple[TrainedModel, RaceResult]:
    """Run the same selection race on the annotated pool.

    The fold assignment seed is derived exactly as in the teacher race, so a
    student trained on perfectly-annotated rows coincides with a teacher
    trained on those same rows.
    """
    if np.unique(annotated.labels).size < 2:
        raise PipelineError(
            "teacher annotated the whole pool with one class; "
            "no student can be trained from it"
        )
    train_set = annotated.to_dataset()
    race = _race(train_set, config)
    model = fit(race.winner.spec, train_set, ORIGIN_STUDENT, jobs=config.jobs)
    return model, race


def evaluate_fidelity(
    teacher: TrainedModel, student: TrainedModel, test: Dataset
) -> FidelityReport:
    """Score both models against ground truth and against each other."""
    if test.labels is None:
        raise DataError("fidelity evaluation requires a labeled test set")
    if teacher.n_classes != 2 or student.n_classes != 2:
        raise PipelineError("fidelity evaluation is defined for binary models")
    y = test.labels
    t_pred = predict_batch(teacher, test.features)
    s_pred = predict_batch(student, test.features)
    t_scores = score_batch(teacher, test.features)
    s_scores = score_batch(student, test.features)

    t_pos = positive_metrics(y, t_pred)
    s_pos = positive_metrics(y, s_pred)
    t_roc = roc(t_scores, y)
    s_roc = roc(s_scores, y)
    deltas = {
        "accuracy": t_pos.accuracy - s_pos.accuracy,
        "precision": t_pos.precision - s_pos.precision,
        "recall": t_pos.recall - s_pos.recall,
        "f1": t_pos.f1 - s_pos.f1,
        "auc": t_roc.auc - s_roc.auc,
    }
    return FidelityReport(
        n_test=test.n_rows,
        teacher_metrics=t_pos,
        student_metrics=s_pos,
        teacher_macro=macro_metrics(y, t_pred, 2),
        student_macro=macro_metrics(y, s_pred, 2),
        teacher_roc=t_roc,
        student_roc=s_roc,
        agreement=float(np.mean(t_pred == s_pred)),
        deltas=deltas,
    )


def run_pipeline(dataset: Dataset, config: PipelineConfig) -> PipelineRun:
    """Split, select a teacher, annotate, select a student, compare."""
    if dataset.labels is None:
        raise DataError("run_pipeline requires a labeled dataset")
    if len(dataset.class_names) != 2:
        raise PipelineError(
            "the pipeline is defined for binary labels; "
            "the metrics functions alone handle more classes"
        )
    timings = {}
    t0 = time.perf_counter()

    spec = SplitSpec(*config.fractions, seed=derive_seed(config.seed, STAGE_SPLIT))
    split = stratified_split(dataset, spec)
    timings["split"] = time.perf_counter() - t0

    t1 = time.perf_counter()
    teacher, teacher_race = train_teacher(split.private, config)
    timings["teacher"] = time.perf_counter() - t1

    t2 = time.perf_counter()
    annotated = annotate(teacher, split.public_pool)
    timings["annotate"] = time.perf_counter() - t2

    t3 = time.perf_counter()
    student, student_race = train_student(annotated, config)
    timings["student"] = time.perf_counter() - t3

    t4 = time.perf_counter()
    fidelity = evaluate_fidelity(teacher, student, split.test)
    timings["fidelity"] = time.perf_counter() - t4
    timings["total"] = time.perf_counter() - t0

    part_counts = {
        "private": split.private.n_rows,
        "public_pool": split.public_pool.n_rows,
        "test": split.test.n_rows,
    }
    return PipelineRun(
        config=config,
        part_counts=part_counts,
        row_ids={k: [int(i) for i in v] for k, v in split.row_ids.items()},
        teacher_race=teacher_race,
        student_race=student_race,
        annotation_counts=annotated.label_counts,
        fidelity=fidelity,
        teacher=teacher,
        student=student,
        timings=timings,
    )
