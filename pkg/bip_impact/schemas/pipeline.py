import hashlib
import json
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .events import EventSignal
from .granger import CausalityMatrix, GrangerConfig
from .regression import CleanedSeries, CointegrationMatrix, FilteredModel, RegressionFit
from .timeseries import Frequency


class TransformKind(str, Enum):
    diff = "diff"
    log_change = "log_change"


class TransformOrder(str, Enum):
    downsample_then_transform = "downsample_then_transform"
    transform_then_downsample = "transform_then_downsample"


class FilterMode(str, Enum):
    all = "all"
    one_at_a_time = "one_at_a_time"


# Series quoted as rates; every other series (buckets included) is log-changed
DIFFERENCED_LABELS = frozenset(
    {
        "Federal Funds Rate",
        "5 Year HQM Corporate Bond Par Yield",
        "10 Year HQM Corporate Bond Par Yield",
        "30 Year HQM Corporate Bond Par Yield",
        "5 Year HQM Corporate Bond Spot Rate",
        "10 Year HQM Corporate Bond Spot Rate",
        "30 Year HQM Corporate Bond Spot Rate",
        "5 Year Gilts (Nominal Par Yield)",
        "10 Year Gilts (Nominal Par Yield)",
        "20 Year Gilts (Nominal Par Yield)",
        "5 Year Gilts (Nominal Zero Coupon Yield)",
        "10 Year Gilts (Nominal Zero Coupon Yield)",
        "20 Year Gilts (Nominal Zero Coupon Yield)",
        "Unemployment Rate",
        "Gold Price Against USD",
    }
)

MAIN_SET_NAMES = [
    "All BIPs",
    "All Economy-Related BIPs",
    "Major Economy-Related BIPs",
    "All Economy-Related BIPs (Except the major ones)",
]

TAXONOMY_SET_NAMES = ["Fiscal-Like BIPs", "Monetary-Like BIPs", "Purely Tokenomic BIPs"]


class SeriesSpec(BaseModel):
    label: str
    path: str
    frequency: Frequency
    transform: Optional[TransformKind] = None
    order: TransformOrder = TransformOrder.downsample_then_transform

    @property
    def resolved_transform(self) -> TransformKind:
        if self.transform is not None:
            return self.transform
        if self.label in DIFFERENCED_LABELS:
            return TransformKind.diff
        return TransformKind.log_change


class RegressionOptions(BaseModel):
    level: float = Field(default=0.05, gt=0.0, lt=1.0)
    mode: FilterMode = FilterMode.all


class CointegrationOptions(BaseModel):
    enabled: bool = True
    # Screen monthly levels instead of the transformed series
    on_levels: bool = False
    max_lag: Optional[int] = Field(default=None, ge=0)


class GrangerOptions(BaseModel):
    pacf_critical: float = Field(default=0.10, gt=0.0, lt=1.0)
    t_level: float = Field(default=0.05, gt=0.0, lt=1.0)
    f_level: float = Field(default=0.05, gt=0.0, lt=1.0)
    simple_intercept: bool = True
    # The first lag is the primary run; the rest are sensitivity reruns
    max_lags: List[int] = [10, 6, 12]

    @field_validator("max_lags")
    @classmethod
    def _check_lags(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("max_lags must not be empty")
        if any(lag < 1 for lag in value):
            raise ValueError("max_lags entries must be >= 1")
        if len(set(value)) != len(value):
            raise ValueError("max_lags entries must be distinct")
        return value

    @property
    def primary_lag(self) -> int:
        return self.max_lags[0]

    def config_for(self, max_lag: int) -> GrangerConfig:
        return GrangerConfig(
            pacf_max_lag=max_lag,
            pacf_critical=self.pacf_critical,
            x_max_lag=max_lag,
            t_level=self.t_level,
            f_level=self.f_level,
            simple_max_lag=max_lag,
            simple_intercept=self.simple_intercept,
        )


class SignalOptions(BaseModel):
    sets: List[str] = list(MAIN_SET_NAMES)
    taxonomy: bool = True

    @field_validator("sets")
    @classmethod
    def _check_sets(cls, value: List[str]) -> List[str]:
        known = set(MAIN_SET_NAMES) | set(TAXONOMY_SET_NAMES)
        unknown = [name for name in value if name not in known]
        if unknown:
            raise ValueError(f"unknown BIP sets: {unknown}")
        return value


class PipelineConfig(BaseModel):
    """Validated contents of a pipeline YAML file"""

    output_dir: Optional[str] = None
    registry: Optional[str] = None
    buckets: List[SeriesSpec] = Field(min_length=1)
    features: List[SeriesSpec] = Field(min_length=1)
    regression: RegressionOptions = RegressionOptions()
    cointegration: CointegrationOptions = CointegrationOptions()
    granger: GrangerOptions = GrangerOptions()
    signals: SignalOptions = SignalOptions()
    workers: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check_labels(self) -> "PipelineConfig":
        labels = [spec.label for spec in self.buckets + self.features]
        duplicates = sorted({label for label in labels if labels.count(label) > 1})
        if duplicates:
            raise ValueError(f"series labels must be unique, repeated: {duplicates}")
        return self

    @property
    def series(self) -> List[SeriesSpec]:
        return self.buckets + self.features

    def config_hash(self) -> str:
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class RunMetadata(BaseModel):
    version: str
    libraries: Dict[str, str]
    config_hash: str
    stages: List[str] = []
    regression: RegressionOptions = RegressionOptions()
    started_at: str
    finished_at: Optional[str] = None
    status: str = "running"


class AuditReport(BaseModel):
    """Outcome of re-deriving stored tables from stored intermediates"""

    checked: int = 0
    mismatches: List[str] = []

    @property
    def ok(self) -> bool:
        return not self.mismatches


class PipelineReport(BaseModel):
    config_hash: str
    cointegration: Optional[CointegrationMatrix] = None
    global_fits: Dict[str, RegressionFit] = {}
    vif: Dict[str, Dict[str, float]] = {}
    filtered: Dict[str, FilteredModel] = {}
    cleaned: Dict[str, CleanedSeries] = {}
    signals: Dict[str, EventSignal] = {}
    causality: List[CausalityMatrix] = []
    artifacts: List[str] = []
    metadata: Optional[RunMetadata] = None
