from datetime import date
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

INTERCEPT = "const"


class RegressionFit(BaseModel):
    """
    One OLS model: per-regressor estimates in `names` order (the intercept,
    when present, comes first under the name "const"), residuals and RSS.
    """

    model_config = ConfigDict(frozen=True)

    names: Tuple[str, ...]
    coefficients: Tuple[float, ...]
    standard_errors: Tuple[float, ...]
    t_statistics: Tuple[float, ...]
    p_values: Tuple[float, ...]
    residuals: Tuple[float, ...]
    rss: float = Field(ge=0.0)
    n_observations: int = Field(ge=1)
    has_intercept: bool

    @model_validator(mode="after")
    def _check_lengths(self) -> "RegressionFit":
        k = len(self.names)
        for field in ("coefficients", "standard_errors", "t_statistics", "p_values"):
            if len(getattr(self, field)) != k:
                raise ValueError(f"{field} has {len(getattr(self, field))} entries, expected {k}")
        if len(self.residuals) != self.n_observations:
            raise ValueError("residual count differs from n_observations")
        if any(not 0.0 <= p <= 1.0 for p in self.p_values):
            raise ValueError("p-values must lie in [0, 1]")
        if self.has_intercept and (not self.names or self.names[0] != INTERCEPT):
            raise ValueError("intercept must be the first regressor")
        return self

    @property
    def k(self) -> int:
        return len(self.names)

    @property
    def df_resid(self) -> int:
        return self.n_observations - self.k

    @property
    def feature_names(self) -> List[str]:
        return [name for name in self.names if name != INTERCEPT]

    def coefficient(self, name: str) -> float:
        return self.coefficients[self.names.index(name)]

    def p_value(self, name: str) -> float:
        return self.p_values[self.names.index(name)]

    def p_value_map(self) -> Dict[str, float]:
        return dict(zip(self.names, self.p_values))


class FTestResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    f_statistic: float = Field(ge=0.0)
    p_value: float = Field(ge=0.0, le=1.0)
    df_numerator: int = Field(ge=1)
    df_denominator: int = Field(ge=1)


class AdfResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    test_statistic: float
    critical_value_5pct: float
    lag_used: int = Field(ge=0)
    n_observations: int = Field(ge=0)
    reject_unit_root: bool

    @model_validator(mode="after")
    def _check_decision(self) -> "AdfResult":
        if self.reject_unit_root != (self.test_statistic < self.critical_value_5pct):
            raise ValueError("reject_unit_root must equal test_statistic < critical_value_5pct")
        return self


class CointegrationResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    pair: Tuple[str, str]
    step1_fit: RegressionFit
    adf: AdfResult
    cointegrated_at_5pct: bool
    note: Optional[str] = None

    @model_validator(mode="after")
    def _check_flag(self) -> "CointegrationResult":
        if self.cointegrated_at_5pct != self.adf.reject_unit_root:
            raise ValueError("cointegrated_at_5pct must follow the ADF decision")
        return self


class CointegrationCell(BaseModel):
    """A screened pair, or the error that stopped it"""

    result: Optional[CointegrationResult] = None
    error: Optional[str] = None


class CointegrationMatrix(BaseModel):
    features: Tuple[str, ...]
    buckets: Tuple[str, ...]
    cells: List[List[CointegrationCell]]

    @model_validator(mode="after")
    def _check_shape(self) -> "CointegrationMatrix":
        if len(self.cells) != len(self.features):
            raise ValueError("one row of cells per feature expected")
        for row in self.cells:
            if len(row) != len(self.buckets):
                raise ValueError("one cell per bucket expected")
        return self

    def cell(self, feature: str, bucket: str) -> CointegrationCell:
        return self.cells[self.features.index(feature)][self.buckets.index(bucket)]


class Elimination(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    p_value: float


class FilteredModel(BaseModel):
    """Outcome of the significance-filtering loop for one bucket"""

    model_config = ConfigDict(frozen=True)

    bucket: str
    surviving_features: Tuple[str, ...]
    has_intercept: bool
    fit: Optional[RegressionFit] = None
    iterations: int = Field(ge=1)
    elimination_log: List[List[Elimination]]
    level: float

    @model_validator(mode="after")
    def _check_survivors(self) -> "FilteredModel":
        if self.fit is None:
            if self.surviving_features or self.has_intercept:
                raise ValueError("a model with survivors needs a fit")
            return self
        for name in self.fit.names:
            if self.fit.p_value(name) >= self.level:
                raise ValueError(f"survivor '{name}' is not significant at {self.level}")
        return self

    @property
    def is_empty(self) -> bool:
        return self.fit is None

    @property
    def removed(self) -> List[str]:
        return [entry.name for step in self.elimination_log for entry in step]


class CleanedSeries(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    bucket: str
    months: Tuple[date, ...]
    values: Tuple[float, ...]

    @model_validator(mode="after")
    def _check_lengths(self) -> "CleanedSeries":
        if len(self.months) != len(self.values):
            raise ValueError(f"{self.bucket}: months and values differ in length")
        return self
