from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .regression import FTestResult, RegressionFit


class FailureReason(str, Enum):
    a = "a"
    b = "b"
    c = "c"

    @property
    def description(self) -> str:
        return FAILURE_LEGEND[self]


FAILURE_LEGEND = {
    FailureReason.a: (
        "Could not select a model with autoregressive terms of the independent "
        "variable as all models have infinite Akaike information criterion."
    ),
    FailureReason.b: (
        "All autoregressive terms of the independent variable have been filtered "
        "out as insignificant according to the t-test."
    ),
    FailureReason.c: (
        "Autoregressive terms of the independent variable do not add explanatory "
        "power according to the F-test."
    ),
}


class Variant(str, Enum):
    simple = "Simple"
    full = "Full"


class GrangerConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    pacf_max_lag: int = Field(default=10, ge=1)
    pacf_critical: float = Field(default=0.10, gt=0.0, lt=1.0)
    x_max_lag: int = Field(default=10, ge=1)
    t_level: float = Field(default=0.05, gt=0.0, lt=1.0)
    f_level: float = Field(default=0.05, gt=0.0, lt=1.0)
    # Simple variant; falls back to x_max_lag when unset
    simple_max_lag: Optional[int] = Field(default=None, ge=1)
    simple_intercept: bool = True

    @property
    def simple_lag(self) -> int:
        return self.simple_max_lag or self.x_max_lag

    def with_max_lag(self, max_lag: int) -> "GrangerConfig":
        """Same levels, with PACF, X and Simple lags all set to `max_lag`"""
        return self.model_copy(
            update={"pacf_max_lag": max_lag, "x_max_lag": max_lag, "simple_max_lag": max_lag}
        )


class GrangerDiagnostics(BaseModel):
    model_config = ConfigDict(frozen=True)

    ar_order: Optional[int] = None
    x_order: Optional[int] = None
    surviving_lags: Tuple[int, ...] = ()
    nested_fit: Optional[RegressionFit] = None
    parent_fit: Optional[RegressionFit] = None
    f_result: Optional[FTestResult] = None
    # Row index of the first observation of the common sample
    sample_start: Optional[int] = None
    n_observations: Optional[int] = None


class GrangerVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    variant: Variant
    accepted: bool
    longest_significant_lag: Optional[int] = None
    failure_reason: Optional[FailureReason] = None
    diagnostics: GrangerDiagnostics = GrangerDiagnostics()

    @model_validator(mode="after")
    def _check_outcome(self) -> "GrangerVerdict":
        if self.accepted:
            if self.longest_significant_lag is None or self.longest_significant_lag < 1:
                raise ValueError("accepted verdict needs a longest significant lag >= 1")
            if self.failure_reason is not None:
                raise ValueError("accepted verdict cannot carry a failure reason")
        else:
            if self.failure_reason is None:
                raise ValueError("rejected verdict needs a failure reason")
            if self.longest_significant_lag is not None:
                raise ValueError("rejected verdict cannot carry a lag")
        return self

    @property
    def token(self) -> str:
        if self.accepted:
            return f"T ({self.longest_significant_lag})"
        return f"F ({self.failure_reason.value})"


class CausalityCell(BaseModel):
    model_config = ConfigDict(frozen=True)

    bucket: str
    signal: str
    variant: Variant
    verdict: Optional[GrangerVerdict] = None
    error: Optional[str] = None

    @property
    def token(self) -> str:
        return self.verdict.token if self.verdict is not None else "ERR"


class CausalityMatrix(BaseModel):
    """
    Verdicts over buckets x (variant, signal). Column order is every signal
    under the Simple variant followed by every signal under the Full variant.
    """

    name: str
    max_lag: int
    buckets: Tuple[str, ...]
    signals: Tuple[str, ...]
    variants: Tuple[Variant, ...] = (Variant.simple, Variant.full)
    cells: List[CausalityCell] = []

    @property
    def columns(self) -> List[Tuple[Variant, str]]:
        return [(variant, signal) for variant in self.variants for signal in self.signals]

    def cell(self, bucket: str, signal: str, variant: Variant) -> CausalityCell:
        for cell in self.cells:
            if cell.bucket == bucket and cell.signal == signal and cell.variant == variant:
                return cell
        raise KeyError((bucket, signal, variant))
