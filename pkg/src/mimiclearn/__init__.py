"""Privacy-preserving model sharing through mimic learning.

Train a *teacher* on private labeled data, use it to annotate a public
unlabeled pool, train a shareable *student* on those annotations, and
measure how faithfully the student mimics the teacher.
"""

from .classifiers import (
    DEFAULT_HYPERPARAMETERS,
    FAMILIES,
    ORIGIN_STUDENT,
    ORIGIN_TEACHER,
    ClassifierSpec,
    TrainedModel,
    default_specs,
    fit,
    predict,
    predict_batch,
    score,
    score_batch,
)
from .data import (
    CsvSchema,
    Dataset,
    FoldAssignment,
    IngestStats,
    ScalerParams,
    SplitResult,
    SplitSpec,
    apply_scaler,
    fit_scaler,
    ingest_csv,
    kfold,
    load_csv,
    save_csv,
    stratified_split,
    write_split_manifest,
)
from .errors import DataError, ModelFormatError, PipelineError, PrivacyError
from .metrics import (
    ClassMetrics,
    ConfusionMatrix,
    MetricsReport,
    RocCurve,
    accuracy,
    confusion,
    f1,
    macro_metrics,
    positive_metrics,
    precision,
    recall,
    roc,
)
from .mimic import (
    AnnotatedDataset,
    CvReport,
    FidelityReport,
    PipelineConfig,
    PipelineRun,
    RaceResult,
    annotate,
    evaluate_fidelity,
    run_json,
    run_pipeline,
    train_student,
    train_teacher,
)
from .model_io import (
    MODEL_FORMAT_VERSION,
    ModelFile,
    export_model,
    import_model,
    model_to_file,
    parse_model_file,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotatedDataset",
    "ClassifierSpec",
    "ClassMetrics",
    "ConfusionMatrix",
    "CsvSchema",
    "CvReport",
    "Dataset",
    "DataError",
    "DEFAULT_HYPERPARAMETERS",
    "FAMILIES",
    "FidelityReport",
    "FoldAssignment",
    "IngestStats",
    "MetricsReport",
    "ModelFile",
    "ModelFormatError",
    "MODEL_FORMAT_VERSION",
    "ORIGIN_STUDENT",
    "ORIGIN_TEACHER",
    "PipelineConfig",
    "PipelineError",
    "PipelineRun",
    "PrivacyError",
    "RaceResult",
    "RocCurve",
    "ScalerParams",
    "SplitResult",
    "SplitSpec",
    "TrainedModel",
    "accuracy",
    "annotate",
    "apply_scaler",
    "confusion",
    "default_specs",
    "evaluate_fidelity",
    "export_model",
    "f1",
    "fit",
    "fit_scaler",
    "import_model",
    "ingest_csv",
    "kfold",
    "load_csv",
    "macro_metrics",
    "model_to_file",
    "parse_model_file",
    "positive_metrics",
    "precision",
    "predict",
    "predict_batch",
    "recall",
    "roc",
    "run_json",
    "run_pipeline",
    "save_csv",
    "score",
    "score_batch",
    "stratified_split",
    "train_student",
    "train_teacher",
    "write_split_manifest",
]
