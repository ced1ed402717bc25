"""Command-line entry points: ``split``, ``run``, and ``evaluate``.

Exit codes: 0 success, 1 usage or configuration problem, 2 data problem
(missing/malformed input), 3 pipeline problem (training, privacy refusal,
bad model file). Commands compute everything before writing anything, so a
failure leaves no partial output directory behind.

Outputs are deterministic: rerunning a command with the same inputs and seed
reproduces every artifact byte for byte, whatever ``--jobs`` says.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from pathlib import Path

from .classifiers import ClassifierSpec, default_specs, predict_batch, score_batch
from .data import (
    CsvSchema,
    SplitSpec,
    ingest_csv,
    save_csv,
    stratified_split,
    write_split_manifest,
)
from .errors import DataError, PipelineError
from .metrics import macro_metrics, positive_metrics, roc
from .mimic import SELECTION_METRICS, PipelineConfig, run_json, run_pipeline
from .model_io import file_json, import_model, model_to_file
from .rng import STAGE_SPEC, STAGE_SPLIT, derive_seed

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PIPELINE = 3

OUT_DIR_ENV = "MIMICLEARN_OUT_DIR"


class UsageError(Exception):
    """Bad flags or configuration; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_data_flags(p, needs_labels=True):
    p.add_argument("--data", required=True, metavar="CSV", help="input CSV file")
    p.add_argument(
        "--no-header", action="store_true",
        help="the CSV has no header row (columns are then named x0, x1, ...)",
    )
    p.add_argument(
        "--label-column", default=None, metavar="NAME_OR_INDEX",
        help="label column as a header name or 0-based index "
             "(default: the last column)",
    )
    p.add_argument(
        "--positive-class", default=None, metavar="VALUE",
        help="label value to treat as class 1 (binary data only); also use "
             "this when re-reading files produced by `split` if it was set "
             "originally",
    )
    p.add_argument(
        "--missing-token", default="?", metavar="TOKEN",
        help="cell value that marks a missing feature (default: '?'); "
             "missing cells are filled with the column median",
    )


def _last_column_index(path) -> int:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if row:
                return len(row) - 1
    raise DataError(f"empty file: {path}")


def _schema_from_args(args) -> CsvSchema:
    label = args.label_column
    if label is None:
        label = _last_column_index(args.data)
    else:
        try:
            label = int(label)
        except ValueError:
            pass
        if isinstance(label, int) and args.no_header is False and label < 0:
            raise UsageError("--label-column index must be >= 0")
    return CsvSchema(
        label_column=label,
        has_header=not args.no_header,
        missing_token=args.missing_token,
        positive_class=args.positive_class,
    )


def _out_dir(args) -> Path:
    return Path(args.out_dir or os.environ.get(OUT_DIR_ENV) or ".")


def _parse_fractions(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError("--fractions needs three comma-separated numbers")
    try:
        return tuple(float(p) for p in parts)  # type: ignore[return-value]
    except ValueError:
        raise UsageError(f"--fractions could not be parsed: {text!r}") from None


def _load_config_file(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise UsageError("config file must hold a JSON object")
    allowed = {"specs", "cv_k", "selection_metric", "fractions"}
    unknown = set(raw) - allowed
    if unknown:
        raise UsageError(
            f"unknown config keys {sorted(unknown)}; allowed: {sorted(allowed)}"
        )
    return raw


def _specs_from_config(raw_specs, seed) -> tuple[ClassifierSpec, ...]:
    if not isinstance(raw_specs, list) or not raw_specs:
        raise UsageError("config 'specs' must be a non-empty list")
    specs = []
    for i, entry in enumerate(raw_specs):
        if not isinstance(entry, dict) or "kind" not in entry:
            raise UsageError(f"config specs[{i}] needs at least a 'kind'")
        unknown = set(entry) - {"kind", "hyperparameters", "seed"}
        if unknown:
            raise UsageError(f"config specs[{i}] has unknown keys {sorted(unknown)}")
        entry_seed = entry.get("seed", derive_seed(seed, STAGE_SPEC, i))
        try:
            specs.append(
                ClassifierSpec(
                    entry["kind"], dict(entry.get("hyperparameters", {})),
                    seed=entry_seed,
                )
            )
        except PipelineError as exc:
            raise UsageError(f"config specs[{i}]: {exc}") from exc
    return tuple(specs)


def _build_config(args) -> PipelineConfig:
    file_cfg = _load_config_file(args.config) if args.config else {}
    seed = args.seed
    if "specs" in file_cfg:
        specs = _specs_from_config(file_cfg["specs"], seed)
    else:
        specs = default_specs(seed)
    cv_k = args.cv_k if args.cv_k is not None else file_cfg.get("cv_k", 10)
    selection = (
        args.selection_metric
        if args.selection_metric is not None
        else file_cfg.get("selection_metric", "accuracy")
    )
    if args.fractions is not None:
        fractions = _parse_fractions(args.fractions)
    elif "fractions" in file_cfg:
        f = file_cfg["fractions"]
        if not isinstance(f, list) or len(f) != 3:
            raise UsageError("config 'fractions' must be a list of three numbers")
        fractions = tuple(float(x) for x in f)
    else:
        fractions = (0.5, 0.3, 0.2)
    try:
        return PipelineConfig(
            specs=specs,
            seed=seed,
            fractions=fractions,
            cv_k=cv_k,
            selection_metric=selection,
            jobs=args.jobs,
        )
    except (PipelineError, DataError) as exc:
        raise UsageError(str(exc)) from exc


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def _classifier_table(race) -> str:
    lines = [
        "family,cv_mean_accuracy,cv_min_accuracy,cv_max_accuracy,"
        "cv_mean_macro_f1,cv_min_macro_f1,cv_max_macro_f1,selected"
    ]
    for i, report in enumerate(race.reports):
        accs, f1s = report.fold_accuracies, report.fold_macro_f1
        lines.append(",".join([
            report.spec.kind,
            _fmt(report.mean_accuracy), _fmt(min(accs)), _fmt(max(accs)),
            _fmt(report.mean_macro_f1), _fmt(min(f1s)), _fmt(max(f1s)),
            "yes" if i == race.winner_index else "no",
        ]))
    return "\n".join(lines) + "\n"


def _fidelity_table(fid) -> str:
    lines = ["role,n,accuracy,precision,recall,f1,auc,agreement"]
    for role, rep, auc in (
        ("teacher", fid.teacher_metrics, fid.teacher_auc),
        ("student", fid.student_metrics, fid.student_auc),
    ):
        lines.append(",".join([
            role, str(fid.n_test),
            _fmt(rep.accuracy), _fmt(rep.precision), _fmt(rep.recall),
            _fmt(rep.f1), _fmt(auc), _fmt(fid.agreement),
        ]))
    return "\n".join(lines) + "\n"


def _write_all(out: Path, artifacts: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for name, text in artifacts.items():
        (out / name).write_text(text, encoding="utf-8")


def cmd_split(args) -> int:
    schema = _schema_from_args(args)
    ds, stats = ingest_csv(args.data, schema)
    spec = SplitSpec(
        *_parse_fractions(args.fractions),
        seed=derive_seed(args.seed, STAGE_SPLIT),
    )
    result = stratified_split(ds, spec)

    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    save_csv(result.private, out / "private.csv")
    save_csv(result.public_pool, out / "public.csv")
    save_csv(result.test, out / "test.csv")
    write_split_manifest(result, spec, out / "split_manifest.json")
    print(
        f"split {ds.n_rows} rows ({stats.n_imputed} cells imputed) into "
        f"private={result.private.n_rows} public={result.public_pool.n_rows} "
        f"test={result.test.n_rows} under {out}"
    )
    print("public.csv is written without labels")
    return EXIT_OK


def cmd_run(args) -> int:
    schema = _schema_from_args(args)
    ds, stats = ingest_csv(args.data, schema)
    config = _build_config(args)
    run = run_pipeline(ds, config)

    artifacts = {
        "run.json": run_json(run),
        "classifier_table.csv": _classifier_table(run.teacher_race),
        "fidelity_table.csv": _fidelity_table(run.fidelity),
        "roc_teacher.csv": run.fidelity.teacher_roc.to_csv_text(),
        "roc_student.csv": run.fidelity.student_roc.to_csv_text(),
    }
    student_file = None
    student_note = None
    if run.student.spec.kind == "knn":
        student_note = (
            "student is a nearest-neighbor model; no shareable file is "
            "written because its parameters would be raw training rows"
        )
    else:
        student_file = "student_model.json"
        artifacts[student_file] = file_json(model_to_file(run.student))

    manifest = {
        "command": "run",
        "data_path": str(args.data),
        "ingest": {"n_rows": stats.n_rows, "n_imputed": stats.n_imputed},
        "config": config.to_json_dict(),
        "artifacts": {
            name: hashlib.sha256(text.encode("utf-8")).hexdigest()
            for name, text in sorted(artifacts.items())
        },
        "student_model_file": student_file,
        "note": student_note,
    }
    artifacts["manifest.json"] = (
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    _write_all(_out_dir(args), artifacts)

    fid = run.fidelity
    print(
        f"teacher={run.teacher.spec.kind} "
        f"(cv {run.teacher_race.selection_metric}="
        f"{_fmt(max(r.mean_accuracy for r in run.teacher_race.reports))}) "
        f"student={run.student.spec.kind}"
    )
    print(
        f"test accuracy teacher={_fmt(fid.teacher_metrics.accuracy)} "
        f"student={_fmt(fid.student_metrics.accuracy)} "
        f"auc teacher={_fmt(fid.teacher_auc)} student={_fmt(fid.student_auc)} "
        f"agreement={_fmt(fid.agreement)}"
    )
    if student_note:
        print(student_note)
    print(f"artifacts written under {_out_dir(args)}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    model = import_model(args.model)
    schema = _schema_from_args(args)
    ds, _ = ingest_csv(args.data, schema)
    if ds.labels is None:
        raise DataError("evaluate requires a labeled CSV")
    if tuple(ds.class_names) != model.class_names:
        raise DataError(
            f"label values {list(ds.class_names)} do not match the model's "
            f"classes {list(model.class_names)}; check --positive-class and "
            "--label-column"
        )
    pred = predict_batch(model, ds.features)
    result = {
        "n": ds.n_rows,
        "model_kind": model.spec.kind,
        "positive": positive_metrics(ds.labels, pred).to_json_dict(),
        "macro": macro_metrics(ds.labels, pred, model.n_classes).to_json_dict(),
    }
    if model.n_classes == 2:
        result["auc"] = roc(score_batch(model, ds.features), ds.labels).auc
    print(json.dumps(result, indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="mimiclearn",
        description=(
            "Train a private teacher, annotate a public pool, train a "
            "shareable student, and measure how closely it mimics."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_split = sub.add_parser(
        "split", help="three-way stratified split of a labeled CSV",
        description="Writes private.csv, public.csv (labels stripped), "
                    "test.csv and split_manifest.json.",
    )
    _add_data_flags(p_split)
    p_split.add_argument("--seed", type=int, default=0)
    p_split.add_argument(
        "--fractions", default="0.5,0.3,0.2", metavar="PRIV,PUB,TEST",
        help="private/public/test fractions, summing to 1 (default 0.5,0.3,0.2)",
    )
    p_split.add_argument(
        "--out-dir", default=None,
        help=f"output directory (default: ${OUT_DIR_ENV} or '.')",
    )
    p_split.set_defaults(func=cmd_split)

    p_run = sub.add_parser(
        "run", help="full pipeline: split, teacher, annotate, student, compare",
        description="Writes run.json, classifier_table.csv, fidelity_table.csv, "
                    "roc_teacher.csv, roc_student.csv, student_model.json "
                    "(unless the student is nearest-neighbor) and manifest.json.",
    )
    _add_data_flags(p_run)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument(
        "--fractions", default=None, metavar="PRIV,PUB,TEST",
        help="private/public/test fractions (default 0.5,0.3,0.2)",
    )
    p_run.add_argument(
        "--cv-k", type=int, default=None, metavar="K",
        help="cross-validation folds for model selection (default 10)",
    )
    p_run.add_argument(
        "--selection-metric", choices=SELECTION_METRICS, default=None,
        help="metric the model race optimizes (default accuracy)",
    )
    p_run.add_argument(
        "--config", default=None, metavar="JSON",
        help="JSON file with specs/cv_k/selection_metric/fractions; "
             "explicit flags win over the file",
    )
    p_run.add_argument(
        "--jobs", type=int, default=1,
        help="worker threads for forest training; never changes results",
    )
    p_run.add_argument(
        "--out-dir", default=None,
        help=f"output directory (default: ${OUT_DIR_ENV} or '.')",
    )
    p_run.set_defaults(func=cmd_run)

    p_eval = sub.add_parser(
        "evaluate", help="score a shared student model file on a labeled CSV",
        description="Prints a metrics report as JSON on stdout.",
    )
    p_eval.add_argument("--model", required=True, metavar="JSON",
                        help="student model file")
    _add_data_flags(p_eval)
    p_eval.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"mimiclearn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse --help
        return 0 if exc.code in (0, None) else EXIT_USAGE

    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mimiclearn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"mimiclearn: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except PipelineError as exc:
        print(f"mimiclearn: pipeline error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
