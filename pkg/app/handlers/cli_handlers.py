import argparse
import logging
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from app.core.config import settings
from app.core.errors import (
    ConfigError,
    EmptyInputError,
    HeaderMismatchError,
    ImageIOError,
    SingleClassError,
)
from app.schemas.report_schemas import ComparisonReport, ComparisonRow, EvalReport
from app.schemas.store_schemas import FeatureStoreHeader
from app.schemas.svm_schemas import PreprocessingFlags, TrainerConfig
from app.services import evaluation, preprocess, svm
from app.services.descriptor import code_maps, extract_feature
from app.services.imaging import GrayImage, load_image, save_pgm
from app.services.pipeline import ExtractionConfig, extract_many, feature_from_path, prepare_image
from app.storage.feature_store import FeatureStore, LabeledSample, read_feature_store, write_feature_store
from app.storage.manifest import read_manifest
from app.storage.model_store import ModelBundle, load_model, save_model
from app.utils.action_logger import log_command
from app.utils.text_utils import comparison_table, confusion_table, format_auc, write_csv, write_roc_csv

logger = logging.getLogger(__name__)
messages = settings.messages


# --- Flag resolution ---

def resolve_seed(args) -> int:
    seed = getattr(args, "seed", None)
    return settings.seed if seed is None else seed


def resolve_jobs(args) -> int:
    jobs = getattr(args, "jobs", None)
    return max(1, settings.jobs if jobs is None else jobs)


def resolve_bins(args) -> int:
    bins = getattr(args, "bins", None)
    if getattr(args, "compat150", False):
        if bins not in (None, settings.compat_bins):
            raise ConfigError(f"--compat150 selects {settings.compat_bins} bins but --bins {bins} was given.")
        return settings.compat_bins
    return settings.default_bins if bins is None else bins


def preprocessing_flags(args) -> PreprocessingFlags:
    return PreprocessingFlags(
        resize=not args.no_resize,
        canonical_size=settings.canonical_size,
        equalize=not args.no_equalize,
        normalize=args.normalize,
    )


def trainer_config(args, kernel: Optional[str] = None) -> TrainerConfig:
    try:
        return TrainerConfig(
            kernel=kernel or args.kernel,
            solver=args.solver,
            c=args.c,
            gamma=args.gamma,
            coef0=args.coef0,
            tol=args.tol,
            max_passes=args.max_passes,
            epochs=args.epochs,
        )
    except ValidationError as e:
        raise ConfigError(f"Invalid training options: {e}") from e


def require_both_labels(store: FeatureStore, path) -> None:
    present = sorted(set(store.y.tolist()))
    if len(present) < 2:
        label = present[0] if present else "none"
        raise SingleClassError(messages.single_class.format(path=path, label=label))


def write_report(path, report) -> None:
    try:
        Path(path).write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    except OSError as e:
        raise ImageIOError(f"Cannot write report {path}: {e}") from e


def print_summary(report: EvalReport) -> None:
    print(confusion_table(report.confusion))
    print(messages.metrics_line.format(
        accuracy=report.accuracy, precision=report.precision, recall=report.recall,
        specificity=report.specificity, fpr=report.fpr, auc=format_auc(report),
    ))


# --- Commands ---

@log_command
def cmd_extract(args) -> int:
    manifest = read_manifest(args.manifest)
    if not manifest.entries:
        raise EmptyInputError(messages.empty_manifest.format(path=args.manifest))

    config = ExtractionConfig(
        bins=resolve_bins(args), descriptor=args.descriptor, preprocessing=preprocessing_flags(args),
    )
    results = extract_many([entry.resolved for entry in manifest.entries], config, jobs=resolve_jobs(args))

    rows: List[LabeledSample] = []
    for entry, result in zip(manifest.entries, results):
        if result.error:
            logger.warning(messages.image_skipped.format(path=entry.path, reason=result.error))
            continue
        rows.append(LabeledSample(features=result.feature, label=entry.label, path=entry.path))
    if not rows:
        raise EmptyInputError(messages.all_rows_failed.format(total=len(results), path=args.manifest))

    header = FeatureStoreHeader(
        dim=config.dim, bins=config.bins, descriptor=config.descriptor,
        descriptor_version=settings.descriptor_version, preprocessing=config.preprocessing,
    )
    write_feature_store(args.out, FeatureStore(header=header, rows=rows))
    print(messages.extract_done.format(rows=len(rows), total=len(results), path=args.out, dim=config.dim))
    return 0


@log_command
def cmd_train(args) -> int:
    store = read_feature_store(args.store)
    require_both_labels(store, args.store)
    X, y = store.X, store.y
    seed = resolve_seed(args)
    config = trainer_config(args)

    if args.validation == "split70":
        train_idx, test_idx = evaluation.split_70_30(y, seed)
        model = evaluation.train_with_config(X[train_idx], y[train_idx], config, seed)
        report = evaluation.evaluate(model, X[test_idx], y[test_idx])
        document, summary = report, report
    elif args.validation == "cv10":
        evaluation.check_fold_support(y, settings.cv_folds)
        cv_report = evaluation.cross_validate(X, y, settings.cv_folds, config, seed, jobs=resolve_jobs(args))
        model = evaluation.train_with_config(X, y, config, seed)
        document, summary = cv_report, cv_report.mean
    else:
        model = evaluation.train_with_config(X, y, config, seed)
        report = evaluation.evaluate(model, X, y)
        document, summary = report, report

    bundle = ModelBundle(
        model=model, bins=store.header.bins, descriptor=store.header.descriptor,
        preprocessing=store.header.preprocessing,
    )
    save_model(bundle, args.model_out)
    if args.report:
        write_report(args.report, document)
    if args.roc_csv:
        write_roc_csv(args.roc_csv, summary.roc)

    print_summary(summary)
    print(messages.train_done.format(path=args.model_out, solver=model.solver, kernel=model.kernel.kind))
    return 0


def check_compatible(store: FeatureStore, bundle: ModelBundle) -> None:
    header = store.header
    if (header.dim, header.bins, header.descriptor) != (bundle.feature_dim, bundle.bins, bundle.descriptor):
        raise HeaderMismatchError(messages.header_mismatch.format(
            store_dim=header.dim, store_bins=header.bins, store_descriptor=header.descriptor,
            model_dim=bundle.feature_dim, model_bins=bundle.bins, model_descriptor=bundle.descriptor,
        ))
    if header.preprocessing != bundle.preprocessing:
        logger.warning("Store and model were built with different preprocessing flags.")


@log_command
def cmd_eval(args) -> int:
    store = read_feature_store(args.store)
    bundle = load_model(args.model)
    check_compatible(store, bundle)

    report = evaluation.evaluate(bundle.model, store.X, store.y)
    if args.report:
        write_report(args.report, report)
    else:
        print(report.model_dump_json(indent=2))
    if args.roc_csv:
        write_roc_csv(args.roc_csv, report.roc)
    print_summary(report)
    return 0


@log_command
def cmd_predict(args) -> int:
    bundle = load_model(args.model)
    config = ExtractionConfig(bins=bundle.bins, descriptor=bundle.descriptor, preprocessing=bundle.preprocessing)
    feature = feature_from_path(args.image, config)
    value = svm.decision_value(bundle.model, feature)
    print(f"{svm.predict(bundle.model, feature):+d} {value!r}")
    return 0


@log_command
def cmd_inspect(args) -> int:
    img = prepare_image(load_image(args.image), preprocessing_flags(args))
    bins = resolve_bins(args)
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        maps = code_maps(img)
        save_pgm(GrayImage(maps.pattern1), out_dir / "pattern1.pgm")
        save_pgm(GrayImage(maps.pattern2), out_dir / "pattern2.pgm")
        save_pgm(GrayImage(maps.magnitude), out_dir / "magnitude.pgm")
        feature = extract_feature(img, bins)
        write_csv(out_dir / "feature.csv", ["index", "value"], [(i, repr(float(v))) for i, v in enumerate(feature)])
        write_csv(out_dir / "histogram.csv", ["level", "count"], preprocess.compute_histogram(img).as_rows())
    except OSError as e:
        raise ImageIOError(f"Cannot write inspection output to {out_dir}: {e}") from e
    print(messages.inspect_done.format(image=args.image, out_dir=out_dir))
    return 0


@log_command
def cmd_equalize(args) -> int:
    img = load_image(args.image)
    if args.normalize:
        img = preprocess.minmax_normalize(img)
    img = preprocess.equalize(img)
    histogram_path = args.histogram or str(Path(args.out).with_suffix(".csv"))
    save_pgm(img, args.out)
    try:
        write_csv(histogram_path, ["level", "count"], preprocess.compute_histogram(img).as_rows())
    except OSError as e:
        raise ImageIOError(f"Cannot write histogram {histogram_path}: {e}") from e
    print(messages.equalize_done.format(image=args.out, histogram=histogram_path))
    return 0


@log_command
def cmd_compare(args) -> int:
    store = read_feature_store(args.store)
    require_both_labels(store, args.store)
    X, y = store.X, store.y
    seed = resolve_seed(args)

    rows = []
    for scheme in args.schemes:
        if scheme == "cv10":
            evaluation.check_fold_support(y, settings.cv_folds)
        for kernel in args.kernels:
            config = trainer_config(args, kernel=kernel)
            if scheme == "split70":
                train_idx, test_idx = evaluation.split_70_30(y, seed)
                model = evaluation.train_with_config(X[train_idx], y[train_idx], config, seed)
                report = evaluation.evaluate(model, X[test_idx], y[test_idx])
            else:
                report = evaluation.cross_validate(
                    X, y, settings.cv_folds, config, seed, jobs=resolve_jobs(args),
                ).mean
            rows.append(ComparisonRow(
                scheme=scheme, kernel=kernel, accuracy=report.accuracy, precision=report.precision,
                recall=report.recall, specificity=report.specificity, fpr=report.fpr, auc=report.auc,
            ))
            logger.info(f"{scheme}/{kernel}: accuracy {report.accuracy:.4f}")

    comparison = ComparisonReport(seed=seed, rows=rows)
    if args.report:
        write_report(args.report, comparison)
    print(comparison_table(comparison))
    return 0


# --- Parser ---

def _global_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="Random seed (default: $LTRIDP_SEED or 42).")
    common.add_argument("--bins", type=int, choices=settings.allowed_bins, default=argparse.SUPPRESS,
                        help="Histogram bins per code map (default 256).")
    common.add_argument("--compat150", action="store_true", default=argparse.SUPPRESS,
                        help="Use 50 bins per map, giving 150-dimensional features.")
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS,
                        help="Worker threads for extraction and cross-validation.")
    common.add_argument("--log-level", default=argparse.SUPPRESS, help="Logging level (default INFO).")
    return common


def _preprocessing_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--no-resize", action="store_true", help="Skip the canonical resize.")
    parser.add_argument("--no-equalize", action="store_true", help="Skip histogram equalization.")
    parser.add_argument("--normalize", action="store_true", help="Apply min-max normalization first.")


def _training_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--kernel", choices=settings.kernels, default=settings.default_kernel)
    parser.add_argument("--solver", choices=["auto", "primal", "smo"], default="auto")
    parser.add_argument("--c", type=float, default=settings.c, help="Regularization constant C.")
    parser.add_argument("--gamma", type=float, default=settings.gamma,
                        help="Gaussian kernel width (default 1 / feature dim).")
    parser.add_argument("--coef0", type=float, default=settings.coef0)
    parser.add_argument("--tol", type=float, default=settings.tol)
    parser.add_argument("--max-passes", type=int, default=settings.max_passes)
    parser.add_argument("--epochs", type=int, default=None,
                        help="Primal solver updates (default 50 x training samples).")


def build_parser() -> argparse.ArgumentParser:
    common = _global_options()
    parser = argparse.ArgumentParser(
        prog="ltridp",
        description="Local Tri-Directional Pattern texture classification toolkit.",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", parents=[common], help="Extract features for a manifest.")
    p.add_argument("manifest", help="CSV of path,label (bag / nobag).")
    p.add_argument("--out", required=True, help="Feature store to write.")
    p.add_argument("--descriptor", choices=settings.descriptors, default="ltridp")
    _preprocessing_options(p)
    p.set_defaults(handler=cmd_extract)

    p = sub.add_parser("train", parents=[common], help="Train an SVM on a feature store.")
    p.add_argument("store")
    p.add_argument("--model-out", required=True)
    p.add_argument("--validation", choices=settings.validation_schemes, default="split70")
    p.add_argument("--report", help="Write the evaluation report as JSON.")
    p.add_argument("--roc-csv", help="Write ROC points as CSV.")
    _training_options(p)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("eval", parents=[common], help="Evaluate a model on a feature store.")
    p.add_argument("store")
    p.add_argument("model")
    p.add_argument("--report", help="Write the report as JSON instead of printing it.")
    p.add_argument("--roc-csv", help="Write ROC points as CSV.")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("predict", parents=[common], help="Classify one image.")
    p.add_argument("image")
    p.add_argument("model")
    p.set_defaults(handler=cmd_predict)

    p = sub.add_parser("inspect", parents=[common], help="Dump code maps and features of one image.")
    p.add_argument("image")
    p.add_argument("out_dir")
    _preprocessing_options(p)
    p.set_defaults(handler=cmd_inspect)

    p = sub.add_parser("equalize", parents=[common], help="Equalize one image and dump its histogram.")
    p.add_argument("image")
    p.add_argument("out", help="Output PGM.")
    p.add_argument("--histogram", help="Histogram CSV (default: output path with .csv).")
    p.add_argument("--normalize", action="store_true", help="Apply min-max normalization first.")
    p.set_defaults(handler=cmd_equalize)

    p = sub.add_parser("compare", parents=[common], help="Compare kernels under both validation schemes.")
    p.add_argument("store")
    p.add_argument("--kernels", nargs="+", choices=settings.kernels, default=list(settings.kernels))
    p.add_argument("--schemes", nargs="+", choices=["split70", "cv10"], default=["split70", "cv10"])
    p.add_argument("--report", help="Write the comparison as JSON.")
    _training_options(p)
    p.set_defaults(handler=cmd_compare)

    return parser
