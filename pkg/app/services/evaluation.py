import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Sequence, Tuple

import numpy as np
import sklearn.metrics as sm

from app.core.config import settings
from app.core.errors import SingleClassError, ValidationSchemeError
from app.schemas.report_schemas import ConfusionMatrix, CrossValidationReport, EvalReport, MetricSet
from app.schemas.svm_schemas import TrainerConfig
from app.services import svm

logger = logging.getLogger(__name__)

IndexSplit = Tuple[np.ndarray, np.ndarray]


# --- Metrics ---

def _ratio(numerator: int, denominator: int, name: str, warnings: List[str]) -> float:
    if denominator == 0:
        warnings.append(name)
        return 0.0
    return numerator / denominator


def metrics(cm: ConfusionMatrix) -> MetricSet:
    """Accuracy, precision, recall (= sensitivity), specificity and false positive rate.

    A zero denominator yields 0 and adds the metric's name to `warnings`.
    """
    warnings: List[str] = []
    accuracy = _ratio(cm.tp + cm.tn, cm.total, "accuracy", warnings)
    precision = _ratio(cm.tp, cm.tp + cm.fp, "precision", warnings)
    recall = _ratio(cm.tp, cm.tp + cm.fn, "recall", warnings)
    specificity = _ratio(cm.tn, cm.tn + cm.fp, "specificity", warnings)
    fpr = _ratio(cm.fp, cm.fp + cm.tn, "fpr", warnings)
    if warnings:
        logger.warning(f"Degenerate metric denominators: {', '.join(warnings)}.")
    return MetricSet(
        accuracy=accuracy, precision=precision, recall=recall, sensitivity=recall,
        specificity=specificity, fpr=fpr, warnings=warnings,
    )


def confusion_matrix(labels: Sequence[int], predictions: Sequence[int]) -> ConfusionMatrix:
    # rows are actual (+1, -1), columns predicted (+1, -1)
    (tp, fn), (fp, tn) = sm.confusion_matrix(labels, predictions, labels=[1, -1])
    return ConfusionMatrix(tp=int(tp), fn=int(fn), fp=int(fp), tn=int(tn))


def roc_curve(scores: Sequence[Tuple[float, int]]) -> Tuple[List[Tuple[float, float]], float]:
    """Threshold sweep over distinct scores, highest first; tied scores form one step.

    Returns the (fpr, tpr) points from (0, 0) to (1, 1) and the trapezoid area under them.
    """
    values = np.asarray([s for s, _ in scores], dtype=np.float64)
    labels = np.asarray([l for _, l in scores])
    if not (np.any(labels > 0) and np.any(labels < 0)):
        raise SingleClassError("ROC needs at least one positive and one negative score.")

    fpr, tpr, _ = sm.roc_curve(labels, values, pos_label=1, drop_intermediate=False)
    points = [(float(x), float(y)) for x, y in zip(fpr, tpr)]
    if points[0] != (0.0, 0.0):
        points.insert(0, (0.0, 0.0))
    xs, ys = zip(*points)
    return points, float(sm.auc(xs, ys))


def build_report(labels: Sequence[int], scores: Sequence[float]) -> EvalReport:
    """EvalReport for decision values against true labels, predicting +1 at score >= 0."""
    labels = np.asarray(labels, dtype=np.int64)
    scores = np.asarray(scores, dtype=np.float64)
    predictions = np.where(scores >= 0, 1, -1)
    cm = confusion_matrix(labels, predictions)
    metric_set = metrics(cm)
    warnings = list(metric_set.warnings)
    try:
        roc, auc = roc_curve(list(zip(scores.tolist(), labels.tolist())))
    except SingleClassError:
        roc, auc = [], None
        warnings.append("roc_undefined")
    return EvalReport(
        **metric_set.model_dump(exclude={"warnings"}),
        warnings=warnings,
        confusion=cm,
        n_samples=int(labels.size),
        roc=roc,
        auc=auc,
    )


def evaluate(model: svm.SvmModel, X: np.ndarray, labels: Sequence[int]) -> EvalReport:
    return build_report(labels, svm.decision_values(model, X))


# --- Splits ---

def _class_indices(labels: np.ndarray):
    for cls in np.unique(labels):
        yield int(cls), np.nonzero(labels == cls)[0]


def split_70_30(labels: Sequence[int], seed: int) -> IndexSplit:
    """Stratified split: floor(0.7 n) of each class to train, the rest to test."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    train, test = [], []
    for cls, idx in _class_indices(labels):
        if idx.size < 2:
            raise ValidationSchemeError(f"70-30 split needs at least 2 samples per class; class {cls} has {idx.size}.")
        shuffled = rng.permutation(idx)
        n_train = (settings.train_fraction_tenths * idx.size) // 10
        train.append(shuffled[:n_train])
        test.append(shuffled[n_train:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def kfold(labels: Sequence[int], k: int, seed: int) -> List[IndexSplit]:
    """Stratified folds: each class is shuffled, then dealt round-robin to the folds.

    The dealing position carries over from one class to the next, so total fold sizes
    stay within one of each other as well.
    """
    labels = np.asarray(labels)
    if k < 2:
        raise ValidationSchemeError(f"k must be at least 2, got {k}.")
    if k > labels.size:
        raise ValidationSchemeError(f"k={k} exceeds the number of samples ({labels.size}).")
    rng = np.random.default_rng(seed)
    assignment = np.empty(labels.size, dtype=np.int64)
    position = 0
    for _, idx in _class_indices(labels):
        shuffled = rng.permutation(idx)
        assignment[shuffled] = (position + np.arange(shuffled.size)) % k
        position = (position + shuffled.size) % k
    everything = np.arange(labels.size)
    return [(everything[assignment != fold], everything[assignment == fold]) for fold in range(k)]


def check_fold_support(labels: Sequence[int], k: int) -> None:
    """Cross-validation guard: every class must reach every test fold."""
    labels = np.asarray(labels)
    for cls, idx in _class_indices(labels):
        if idx.size < k:
            raise ValidationSchemeError(
                settings.messages.cv_class_guard.format(k=k, label=f"{cls:+d}", count=idx.size)
            )


# --- Training harness ---

def train_with_config(X: np.ndarray, labels: Sequence[int], config: TrainerConfig, seed: int) -> svm.SvmModel:
    solver = config.resolved_solver()
    if solver == "primal":
        if config.kernel != "linear":
            raise ValidationSchemeError(f"The primal solver only supports the linear kernel, not {config.kernel}.")
        return svm.train_linear(X, labels, c=config.c, epochs=config.epochs, seed=seed)
    kernel = config.kernel_spec(X.shape[1])
    return svm.train_smo(
        X, labels, kernel, c=config.c, tol=config.tol, max_passes=config.max_passes, seed=seed,
    )


def _mean_report(folds: List[EvalReport], pooled_labels: np.ndarray, pooled_scores: np.ndarray) -> EvalReport:
    fields = ("accuracy", "precision", "recall", "specificity", "sensitivity", "fpr")
    means = {name: float(np.mean([getattr(f, name) for f in folds])) for name in fields}
    pooled = build_report(pooled_labels, pooled_scores)
    confusion = ConfusionMatrix()
    for fold in folds:
        confusion = confusion + fold.confusion
    warnings = sorted({w for fold in folds for w in fold.warnings})
    return EvalReport(
        **means,
        warnings=warnings,
        confusion=confusion,
        n_samples=confusion.total,
        roc=pooled.roc,
        auc=pooled.auc,
    )


def cross_validate(X: np.ndarray, labels: Sequence[int], k: int, config: TrainerConfig,
                   seed: int, jobs: int = 1) -> CrossValidationReport:
    """Trains one model per fold (each with its own scaler) and evaluates it on the held-out fold.

    Per-fold reports keep fold order whatever the completion order of parallel workers.
    """
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    folds = kfold(labels, k, seed)

    def run_fold(split: IndexSplit) -> Tuple[EvalReport, np.ndarray]:
        train_idx, test_idx = split
        model = train_with_config(X[train_idx], labels[train_idx], config, seed)
        scores = svm.decision_values(model, X[test_idx])
        return build_report(labels[test_idx], scores), scores

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_fold, folds))
    else:
        results = [run_fold(split) for split in folds]

    reports = [report for report, _ in results]
    for number, report in enumerate(reports, start=1):
        logger.info(f"Fold {number}/{k}: accuracy {report.accuracy:.4f} on {report.n_samples} samples.")

    pooled_labels = np.concatenate([labels[test_idx] for _, test_idx in folds])
    pooled_scores = np.concatenate([scores for _, scores in results])
    return CrossValidationReport(k=k, seed=seed, folds=reports, mean=_mean_report(reports, pooled_labels, pooled_scores))
