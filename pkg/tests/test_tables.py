import re
from pathlib import Path

import pytest

from bip_impact.schemas.granger import (
    CausalityCell,
    CausalityMatrix,
    FailureReason,
    GrangerVerdict,
    Variant,
)
from bip_impact.schemas.regression import INTERCEPT, Elimination, FilteredModel, RegressionFit
from bip_impact.utils.tables import (
    causality_legend,
    emit_causality_diagnostics,
    emit_causality_table,
    emit_model_summaries,
    emit_pvalue_table,
    format_p,
    model_equation,
    order_buckets,
    render_text,
)

GOLDEN_DIR = Path(__file__).parent / "golden"


def _golden(name: str) -> str:
    return (GOLDEN_DIR / name).read_text(encoding="utf-8")


def _fit(names, coefficients, p_values):
    return RegressionFit.model_construct(
        names=tuple(names),
        coefficients=tuple(coefficients),
        p_values=tuple(p_values),
        has_intercept=INTERCEPT in names,
    )


def _accepted(variant, lag):
    return GrangerVerdict(variant=variant, accepted=True, longest_significant_lag=lag)


def _rejected(variant, reason):
    return GrangerVerdict(variant=variant, accepted=False, failure_reason=reason)


@pytest.mark.parametrize(
    "p,token",
    [(0.018641, "0.01864*"), (0.955519, "0.95552"), (0.05, "0.05000"), (0.0, "0.00000*"), (1.0, "1.00000")],
)
def test_format_p(p, token):
    """Test p-value formatting"""
    assert format_p(p) == token


def test_verdict_tokens():
    """Test verdict tokens"""
    assert _accepted(Variant.full, 3).token == "T (3)"
    assert _rejected(Variant.simple, FailureReason.c).token == "F (c)"
    with pytest.raises(ValueError):
        GrangerVerdict(variant=Variant.full, accepted=True)
    with pytest.raises(ValueError):
        GrangerVerdict(
            variant=Variant.full, accepted=False, failure_reason=FailureReason.a, longest_significant_lag=2
        )


def test_order_buckets_puts_canonical_labels_first():
    """Test canonical bucket ordering"""
    assert order_buckets(["Other", "From 10 to 100", "From 0 to 0.001"]) == [
        "From 0 to 0.001",
        "From 10 to 100",
        "Other",
    ]


def test_pvalue_table_matches_golden():
    """Test the p-value table against its golden files"""
    fits = {
        "From 10 to 100": _fit([INTERCEPT, "Gold", "Beta"], [0.1, 0.2, 0.3], [0.018641, 0.955519, 0.05]),
        "From 0 to 0.001": None,
    }
    text, csv = emit_pvalue_table(fits, [INTERCEPT, "Gold", "M2 (US)", "Beta"])
    assert text == _golden("pvalues.txt")
    assert csv == _golden("pvalues.csv")


def test_causality_table_matches_golden():
    """Test the causality table against its golden files"""
    matrix = CausalityMatrix(
        name="Granger causality, maximum lag 3 (primary)",
        max_lag=3,
        buckets=("From 10 to 100", "From 0 to 0.001"),
        signals=("Major",),
        cells=[
            CausalityCell(
                bucket="From 10 to 100",
                signal="Major",
                variant=Variant.simple,
                verdict=_rejected(Variant.simple, FailureReason.c),
            ),
            CausalityCell(
                bucket="From 10 to 100",
                signal="Major",
                variant=Variant.full,
                error="AlignmentError: no shared months",
            ),
            CausalityCell(
                bucket="From 0 to 0.001",
                signal="Major",
                variant=Variant.simple,
                verdict=_accepted(Variant.simple, 3),
            ),
            CausalityCell(
                bucket="From 0 to 0.001",
                signal="Major",
                variant=Variant.full,
                verdict=_rejected(Variant.full, FailureReason.a),
            ),
        ],
    )
    text, csv = emit_causality_table(matrix)
    assert text == _golden("causality.txt")
    assert csv == _golden("causality.csv")

    diagnostics = emit_causality_diagnostics(matrix).splitlines()
    assert len(diagnostics) == 5
    assert diagnostics[-1].startswith("From 10 to 100,Full,Major,ERR,")
    assert diagnostics[-1].endswith("AlignmentError: no shared months")


def test_fixture_causality_table_matches_golden_layout(fixture_run):
    """Test the stored primary causality table of the fixture run against its golden layout"""
    pipeline, report = fixture_run
    csv = pipeline.storage.path("tables/causality_lag10.csv").read_text(encoding="utf-8")
    text = pipeline.storage.path("tables/causality_lag10.txt").read_text(encoding="utf-8")
    assert (text, csv) == emit_causality_table(report.causality[0])
    # Verdicts depend on the simulated draws; the layout does not
    assert re.sub(r"T \(\d+\)|F \([abc]\)", "*", csv) == _golden("fixture_causality_lag10.csv")
    assert text.startswith("Granger causality, maximum lag 10 (primary)\n\n| Bucket ")
    assert text.endswith("\n" + causality_legend())


def test_empty_causality_matrix_renders_header_only():
    """Test an empty causality matrix"""
    matrix = CausalityMatrix(name="empty", max_lag=3, buckets=("From 0 to 0.001",), signals=())
    text, csv = emit_causality_table(matrix)
    assert csv == "Bucket\n"
    assert text.startswith("empty\n\n| Bucket |\n|--------|\n\n")


def test_legend_explains_every_failure_reason():
    """Test the causality legend"""
    legend = causality_legend()
    for reason in FailureReason:
        assert f"F ({reason.value}): " in legend
    assert "infinite Akaike information criterion" in legend


def test_render_text_pads_columns():
    """Test text table padding"""
    assert render_text(["a", "bb"], [["ccc", "d"]]) == "| a   | bb |\n|-----|----|\n| ccc | d  |\n"


def test_model_equation_and_summary():
    """Test model equations and summaries"""
    fit = _fit([INTERCEPT, "Federal Funds Rate"], [0.5, -1.25], [0.01, 0.002])
    model = FilteredModel.model_construct(
        bucket="From 0 to 0.001",
        surviving_features=("Federal Funds Rate",),
        has_intercept=True,
        fit=fit,
        iterations=2,
        elimination_log=[[Elimination(name="Gold", p_value=0.7)]],
        level=0.05,
    )
    assert model_equation(model) == "From 0 to 0.001 = 0.50000 + -1.25000 * Federal Funds Rate + e"
    summary = emit_model_summaries({model.bucket: model})
    assert "  iterations: 2\n" in summary
    assert "  p(Federal Funds Rate) = 0.00200*\n" in summary
    assert "  removed in iteration 1: Gold (0.70000)\n" in summary

    empty = FilteredModel(
        bucket="B", surviving_features=(), has_intercept=False, iterations=1, elimination_log=[], level=0.05
    )
    assert model_equation(empty) == "B = e (no surviving regressors)"
