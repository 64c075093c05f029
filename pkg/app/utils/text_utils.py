import csv
from pathlib import Path
from typing import Iterable, Sequence, Tuple

from app.schemas.report_schemas import ConfusionMatrix, EvalReport, ComparisonReport


def confusion_table(cm: ConfusionMatrix) -> str:
    """2x2 text table, actual classes as rows."""
    width = max(6, *(len(str(v)) for v in (cm.tp, cm.fp, cm.tn, cm.fn)))
    lines = [
        f"{'':>12} {'pred +1':>{width}} {'pred -1':>{width}}",
        f"{'actual +1':>12} {cm.tp:>{width}} {cm.fn:>{width}}",
        f"{'actual -1':>12} {cm.fp:>{width}} {cm.tn:>{width}}",
    ]
    return "\n".join(lines)


def format_auc(report: EvalReport) -> str:
    return "n/a" if report.auc is None else f"{report.auc:.4f}"


def comparison_table(report: ComparisonReport) -> str:
    header = f"{'scheme':<8} {'kernel':<10} {'accuracy':>8} {'precision':>9} {'recall':>7} {'spec.':>7} {'fpr':>7} {'auc':>7}"
    lines = [header]
    for row in report.rows:
        auc = "n/a" if row.auc is None else f"{row.auc:.4f}"
        lines.append(
            f"{row.scheme:<8} {row.kernel:<10} {row.accuracy:>8.4f} {row.precision:>9.4f} "
            f"{row.recall:>7.4f} {row.specificity:>7.4f} {row.fpr:>7.4f} {auc:>7}"
        )
    return "\n".join(lines)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_roc_csv(path, points: Sequence[Tuple[float, float]]) -> None:
    write_csv(path, ["fpr", "tpr"], [(repr(x), repr(y)) for x, y in points])
