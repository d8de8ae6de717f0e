"""
Plain-text and CSV renderers for the report tables.

Cell tokens are fixed: p-values with five decimals and a trailing `*` when
significant, causality verdicts as `T (x)` or `F (a|b|c)`.
"""
import math
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import pandas as pd

from ..schemas.granger import FAILURE_LEGEND, CausalityMatrix, Variant
from ..schemas.regression import INTERCEPT, CointegrationMatrix, FilteredModel, RegressionFit

CANONICAL_BUCKETS = [
    "From 0 to 0.001",
    "From 0.001 to 0.01",
    "From 0.01 to 0.1",
    "From 0.1 to 1",
    "From 1 to 10",
    "From 10 to 100",
    "From 100 to 1000",
    "From 1000 to 10000",
    "From 10000 to 100000",
    "From 100000 to infinity",
]

MISSING = "-"


def order_buckets(labels: Sequence[str]) -> List[str]:
    """Canonical wealth order first, then any other label in its given order"""
    known = [label for label in CANONICAL_BUCKETS if label in labels]
    return known + [label for label in labels if label not in CANONICAL_BUCKETS]


def format_p(p: float, level: float = 0.05) -> str:
    return f"{p:.5f}*" if p < level else f"{p:.5f}"


def format_number(value: float, digits: int = 5) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{digits}f}"


def render_text(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [len(h) for h in header]
    for row in rows:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]

    def line(cells: Sequence[str]) -> str:
        return "| " + " | ".join(cell.ljust(w) for cell, w in zip(cells, widths)) + " |"

    out = [line(header), "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
    out.extend(line(row) for row in rows)
    return "\n".join(out) + "\n"


def render_csv(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    return pd.DataFrame(list(rows), columns=list(header)).to_csv(index=False, lineterminator="\n")


# -------- Regression tables --------
def emit_pvalue_table(
    fits: Mapping[str, Optional[RegressionFit]],
    features: Sequence[str],
    level: float = 0.05,
) -> Tuple[str, str]:
    """
    Features as rows, buckets as columns. A feature absent from a bucket's
    fit (removed by filtering, or no model left) renders as `-`.
    """
    buckets = order_buckets(list(fits))
    header = ["Feature"] + buckets
    rows = []
    for feature in features:
        row = [feature]
        for bucket in buckets:
            fit = fits[bucket]
            if fit is None or feature not in fit.names:
                row.append(MISSING)
            else:
                row.append(format_p(fit.p_value(feature), level))
        rows.append(row)
    return render_text(header, rows), render_csv(header, rows)


def emit_vif_table(vifs: Mapping[str, Mapping[str, float]], features: Sequence[str]) -> Tuple[str, str]:
    buckets = order_buckets(list(vifs))
    header = ["Feature"] + buckets
    rows = [
        [feature] + [format_number(vifs[b][feature], 3) if feature in vifs[b] else MISSING for b in buckets]
        for feature in features
    ]
    return render_text(header, rows), render_csv(header, rows)


def model_equation(model: FilteredModel) -> str:
    if model.fit is None:
        return f"{model.bucket} = e (no surviving regressors)"
    terms = []
    for name, coefficient in zip(model.fit.names, model.fit.coefficients):
        value = format_number(coefficient)
        terms.append(value if name == INTERCEPT else f"{value} * {name}")
    return f"{model.bucket} = " + " + ".join(terms) + " + e"


def emit_model_summaries(models: Mapping[str, FilteredModel]) -> str:
    blocks = []
    for bucket in order_buckets(list(models)):
        model = models[bucket]
        lines = [model_equation(model), f"  iterations: {model.iterations}"]
        if model.fit is not None:
            for name, p in zip(model.fit.names, model.fit.p_values):
                lines.append(f"  p({name}) = {format_p(p, model.level)}")
        for step, removed in enumerate(model.elimination_log, start=1):
            dropped = ", ".join(f"{e.name} ({e.p_value:.5f})" for e in removed)
            lines.append(f"  removed in iteration {step}: {dropped}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def emit_cointegration_table(matrix: CointegrationMatrix) -> Tuple[str, str]:
    """One cell per (feature, bucket): ADF statistic, 5% critical value and decision"""
    buckets = order_buckets(list(matrix.buckets))
    header = ["Feature"] + buckets
    rows = []
    for feature in matrix.features:
        row = [feature]
        for bucket in buckets:
            cell = matrix.cell(feature, bucket)
            if cell.result is None:
                row.append("ERR")
                continue
            adf = cell.result.adf
            verdict = "yes" if cell.result.cointegrated_at_5pct else "no"
            statistic = format_number(adf.test_statistic, 3)
            row.append(f"{statistic} / {format_number(adf.critical_value_5pct, 3)} {verdict}")
        rows.append(row)
    return render_text(header, rows), render_csv(header, rows)


# -------- Causality tables --------
def column_title(variant: Variant, signal: str) -> str:
    return f"{variant.value} Test, {signal}"


def causality_legend() -> str:
    lines = [
        "T (x): causality accepted; x is the longest significant lag in months.",
    ]
    lines += [f"F ({reason.value}): {text}" for reason, text in FAILURE_LEGEND.items()]
    lines.append("The Simple test has no t-test filtering, so F (b) never occurs in its columns.")
    return "\n".join(lines) + "\n"


def emit_causality_table(matrix: CausalityMatrix) -> Tuple[str, str]:
    """Rows are buckets in canonical order, columns (variant x signal set)"""
    columns = matrix.columns
    header = ["Bucket"] + [column_title(variant, signal) for variant, signal in columns]
    rows = []
    # A matrix without cells renders as its header alone
    for bucket in order_buckets(list(matrix.buckets)) if matrix.cells else []:
        rows.append(
            [bucket] + [matrix.cell(bucket, signal, variant).token for variant, signal in columns]
        )
    text = f"{matrix.name}\n\n" + render_text(header, rows) + "\n" + causality_legend()
    return text, render_csv(header, rows)


def emit_causality_diagnostics(matrix: CausalityMatrix) -> str:
    header = [
        "bucket",
        "variant",
        "signal",
        "verdict",
        "f_statistic",
        "f_p_value",
        "ar_order",
        "x_order",
        "surviving_lags",
        "n_observations",
        "sample_start",
        "error",
    ]
    rows: List[List[str]] = []
    for bucket in order_buckets(list(matrix.buckets)):
        for variant, signal in matrix.columns:
            cell = matrix.cell(bucket, signal, variant)
            d = cell.verdict.diagnostics if cell.verdict is not None else None
            f = d.f_result if d is not None else None
            rows.append(
                [
                    bucket,
                    variant.value,
                    signal,
                    cell.token,
                    format_number(f.f_statistic, 6) if f else "",
                    format_number(f.p_value, 6) if f else "",
                    "" if d is None or d.ar_order is None else str(d.ar_order),
                    "" if d is None or d.x_order is None else str(d.x_order),
                    " ".join(str(lag) for lag in d.surviving_lags) if d else "",
                    "" if d is None or d.n_observations is None else str(d.n_observations),
                    "" if d is None or d.sample_start is None else str(d.sample_start),
                    cell.error or "",
                ]
            )
    return render_csv(header, rows)


def series_csv(months: Sequence, values: Sequence[float]) -> str:
    return pd.DataFrame(
        {"month": [m.isoformat() for m in months], "value": [repr(float(v)) for v in values]}
    ).to_csv(index=False, lineterminator="\n")


def frame_csv(columns: Dict[str, Sequence]) -> str:
    return pd.DataFrame(columns).to_csv(index=False, lineterminator="\n")
