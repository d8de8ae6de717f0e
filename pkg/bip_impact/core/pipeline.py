"""
End-to-end orchestration: ingest and transform, cointegration screen,
per-bucket cleaning, event signals and causality matrices. Every stage writes
its artifacts before the next one starts.
"""
import logging
from contextlib import contextmanager
from datetime import date, datetime, timezone
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import joblib
import numpy as np
import pandas as pd
import pydantic
import scipy

from .. import __version__
from ..engine.cleaning import extract_cleaned, fit_global_model, iterative_filter, panel_vif
from ..engine.cointegration import screen_all_pairs
from ..engine.events import build_signal, load_registry, sets_by_name
from ..engine.granger import run_causality_matrix
from ..engine.timeseries import build_panel, downsample_monthly, month_key, prepare_series
from ..schemas.granger import CausalityMatrix
from ..schemas.pipeline import (
    TAXONOMY_SET_NAMES,
    AuditReport,
    PipelineConfig,
    PipelineReport,
    RegressionOptions,
    RunMetadata,
)
from ..schemas.regression import CleanedSeries, FilteredModel, RegressionFit
from ..schemas.timeseries import Panel, TimeSeries
from ..utils.ingest import ingest
from ..utils.tables import (
    emit_causality_diagnostics,
    emit_causality_table,
    emit_cointegration_table,
    emit_model_summaries,
    emit_pvalue_table,
    emit_vif_table,
    frame_csv,
    order_buckets,
    render_text,
    series_csv,
)
from ..workers.pool import map_tasks
from .config import settings
from .errors import BipImpactError, ConfigurationError, PipelineStageError
from .storage import ReportStorage, safe_name

logger = logging.getLogger(__name__)

STAGES = ("transform", "cointegrate", "clean", "signals", "causality")

PREREQUISITES = {
    "transform": (),
    "cointegrate": ("transform",),
    "clean": ("transform",),
    "signals": ("clean",),
    "causality": ("signals",),
}


def resolve_stages(requested: Sequence[str], skip_cointegration: bool = False) -> List[str]:
    """Requested stages plus their prerequisites, in pipeline order"""
    unknown = [name for name in requested if name not in PREREQUISITES]
    if unknown:
        raise ConfigurationError(f"unknown stages {unknown}")
    needed = set()
    pending = list(requested)
    while pending:
        name = pending.pop()
        if name not in needed:
            needed.add(name)
            pending.extend(PREREQUISITES[name])
    if skip_cointegration:
        needed.discard("cointegrate")
    return [name for name in STAGES if name in needed]


@contextmanager
def stage(name: str) -> Iterator[None]:
    logger.info("Stage %s started", name)
    try:
        yield
    except (PipelineStageError, ConfigurationError):
        raise
    except BipImpactError as e:
        raise PipelineStageError(name, str(e)) from e
    except (ValueError, KeyError, OSError) as e:
        raise PipelineStageError(name, f"{type(e).__name__}: {e}") from e
    logger.info("Stage %s finished", name)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _libraries() -> Dict[str, str]:
    return {
        "joblib": joblib.__version__,
        "numpy": np.__version__,
        "pandas": pd.__version__,
        "pydantic": pydantic.VERSION,
        "scipy": scipy.__version__,
    }


def _floats(values: Sequence[float]) -> List[str]:
    return [repr(float(v)) for v in values]


class Pipeline:
    """
    One run of the batch pipeline over a validated config. Stage methods fill
    `report` and write their artifacts through `storage`.
    """

    def __init__(
        self,
        config: PipelineConfig,
        storage: Optional[ReportStorage] = None,
        n_jobs: Optional[int] = None,
    ):
        stems = [safe_name(spec.label) for spec in config.series]
        if len(set(stems)) != len(stems):
            raise ConfigurationError(f"series labels collide as file names: {stems}")
        self.config = config
        self.storage = storage or ReportStorage(config.output_dir or settings.OUTPUT_PATH)
        self.n_jobs = n_jobs or config.workers
        self.report = PipelineReport(config_hash=config.config_hash())
        self.raw: Dict[str, TimeSeries] = {}
        self.transformed: Dict[str, TimeSeries] = {}
        self.panels: Dict[str, Panel] = {}
        self.completed: List[str] = []

    @property
    def feature_labels(self) -> List[str]:
        return [spec.label for spec in self.config.features]

    @property
    def bucket_labels(self) -> List[str]:
        return order_buckets([spec.label for spec in self.config.buckets])

    def run(self, stages: Sequence[str] = STAGES, skip_cointegration: bool = False) -> PipelineReport:
        """
        Run the requested stages (prerequisites included) in order. Metadata
        is written whether or not a stage fails.
        """
        skip = skip_cointegration or not self.config.cointegration.enabled
        plan = resolve_stages(stages, skip_cointegration=skip)
        metadata = RunMetadata(
            version=__version__,
            libraries=_libraries(),
            config_hash=self.report.config_hash,
            regression=self.config.regression,
            started_at=_now(),
        )
        runners = {
            "transform": self.transform,
            "cointegrate": self.cointegrate,
            "clean": self.clean,
            "signals": self.signals,
            "causality": self.causality,
        }
        try:
            for name in plan:
                if name in self.completed:
                    continue
                with stage(name):
                    runners[name]()
                self.completed.append(name)
            metadata.status = "completed"
        except Exception:
            metadata.status = "failed"
            raise
        finally:
            metadata.stages = list(self.completed)
            metadata.finished_at = _now()
            self.storage.save_json("metadata.json", metadata.model_dump(mode="json"))
            self.report.metadata = metadata
            self.report.artifacts = sorted(self.storage.artifacts)
        return self.report

    # -------- Stages --------
    def transform(self) -> None:
        self.raw = ingest(self.config)
        for spec in self.config.series:
            ts = prepare_series(self.raw[spec.label], spec.resolved_transform, spec.order)
            self.transformed[spec.label] = ts
            self.storage.save_text(
                f"transformed/{safe_name(spec.label)}.csv", series_csv(ts.dates, ts.values)
            )
        logger.info("Transformed %d series to monthly increments", len(self.transformed))

    def cointegrate(self) -> None:
        options = self.config.cointegration
        if options.on_levels:
            source = {label: downsample_monthly(ts) for label, ts in self.raw.items()}
        else:
            source = self.transformed
        matrix = screen_all_pairs(
            [source[label] for label in self.feature_labels],
            [source[label] for label in self.bucket_labels],
            options.max_lag,
            self.n_jobs,
        )
        self.report.cointegration = matrix
        self.storage.save_table("cointegration", *emit_cointegration_table(matrix))

    def _clean_bucket(
        self, bucket: str
    ) -> Tuple[Panel, RegressionFit, Dict[str, float], FilteredModel, CleanedSeries]:
        panel = build_panel(
            self.transformed[bucket], [self.transformed[label] for label in self.feature_labels]
        )
        options = self.config.regression
        model = iterative_filter(panel, options.level, options.mode)
        return panel, fit_global_model(panel), panel_vif(panel), model, extract_cleaned(model, panel)

    def clean(self) -> None:
        buckets = self.bucket_labels
        outcomes = map_tasks(self._clean_bucket, buckets, self.n_jobs)
        failures = []
        for bucket, outcome in zip(buckets, outcomes):
            if not outcome.ok:
                failures.append(f"{bucket}: {outcome.error}")
                continue
            panel, fit, vifs, model, cleaned = outcome.result
            self.panels[bucket] = panel
            self.report.global_fits[bucket] = fit
            self.report.vif[bucket] = vifs
            self.report.filtered[bucket] = model
            self.report.cleaned[bucket] = cleaned
            self.storage.save_text(f"panels/{safe_name(bucket)}.csv", panel_csv(panel))
            self.storage.save_text(
                f"cleaned/{safe_name(bucket)}.csv", series_csv(cleaned.months, cleaned.values)
            )
        self._save_regression_tables()
        if failures:
            raise PipelineStageError("clean", "; ".join(failures))

    def _save_regression_tables(self) -> None:
        level = self.config.regression.level
        features = self.feature_labels
        if not self.report.global_fits:
            return
        self.storage.save_table(
            "global_pvalues", *emit_pvalue_table(self.report.global_fits, features, level)
        )
        filtered_fits = {bucket: model.fit for bucket, model in self.report.filtered.items()}
        self.storage.save_table("filtered_pvalues", *emit_pvalue_table(filtered_fits, features, level))
        self.storage.save_table("vif", *emit_vif_table(self.report.vif, features))
        self.storage.save_text("tables/models.txt", emit_model_summaries(self.report.filtered))
        self.storage.save_text("plots/cleaned_buckets.csv", cleaned_frame_csv(self.report.cleaned))

    def signals(self) -> None:
        registry = load_registry(self.config.registry or settings.default_registry)
        grid = sorted(set().union(*(series.months for series in self.report.cleaned.values())))
        names = list(self.config.signals.sets)
        if self.config.signals.taxonomy:
            names += [name for name in TAXONOMY_SET_NAMES if name not in names]

        records = registry.by_number()
        events: Dict[str, List[str]] = {"month": [], "set": [], "bips": []}
        for bip_set in sets_by_name(registry, names):
            signal = build_signal(bip_set, grid, registry)
            self.report.signals[bip_set.name] = signal
            self.storage.save_text(
                f"signals/{safe_name(bip_set.name)}.csv",
                frame_csv({"month": [m.isoformat() for m in signal.months], "value": list(signal.values)}),
            )
            by_month: Dict[date, List[int]] = {}
            for number in sorted(bip_set.members):
                by_month.setdefault(month_key(records[number].date), []).append(number)
            for month in signal.event_months:
                events["month"].append(month.isoformat())
                events["set"].append(bip_set.name)
                events["bips"].append(" ".join(str(n) for n in by_month[month]))
        self.storage.save_text("plots/bip_events.csv", frame_csv(events))
        logger.info("Built %d event signals on a %d-month grid", len(names), len(grid))

    def causality(self) -> None:
        options = self.config.granger
        buckets = [self.report.cleaned[label] for label in order_buckets(list(self.report.cleaned))]
        main = [self.report.signals[name] for name in self.config.signals.sets]
        for lag in options.max_lags:
            kind = "primary" if lag == options.primary_lag else "sensitivity"
            matrix = run_causality_matrix(
                main,
                buckets,
                options.config_for(lag),
                name=f"Granger causality, maximum lag {lag} ({kind})",
                n_jobs=self.n_jobs,
            )
            self._save_causality(f"causality_lag{lag}", matrix)
        if self.config.signals.taxonomy:
            lag = options.primary_lag
            taxonomy = [self.report.signals[name] for name in TAXONOMY_SET_NAMES]
            matrix = run_causality_matrix(
                taxonomy,
                buckets,
                options.config_for(lag),
                name=f"Granger causality by BIP taxonomy, maximum lag {lag}",
                n_jobs=self.n_jobs,
            )
            self._save_causality(f"causality_taxonomy_lag{lag}", matrix)

    def _save_causality(self, name: str, matrix: CausalityMatrix) -> None:
        self.report.causality.append(matrix)
        self.storage.save_table(name, *emit_causality_table(matrix))
        self.storage.save_text(f"diagnostics/{name}.csv", emit_causality_diagnostics(matrix))


# -------- Stored intermediates --------
def panel_csv(panel: Panel) -> str:
    columns: Dict[str, Sequence] = {"month": [m.isoformat() for m in panel.months]}
    for name, values in panel.columns.items():
        columns[name] = _floats(values)
    return frame_csv(columns)


def panel_from_frame(frame: pd.DataFrame) -> Panel:
    """Inverse of `panel_csv`: the column after `month` is the dependent"""
    names = [c for c in frame.columns if c != "month"]
    return Panel(
        months=tuple(date.fromisoformat(m) for m in frame["month"]),
        columns={name: tuple(float(v) for v in frame[name]) for name in names},
        dependent=names[0],
    )


def cleaned_frame_csv(cleaned: Dict[str, CleanedSeries]) -> str:
    buckets = order_buckets(list(cleaned))
    months = sorted(set().union(*(series.months for series in cleaned.values())))
    columns: Dict[str, Sequence] = {"month": [m.isoformat() for m in months]}
    for bucket in buckets:
        by_month = dict(zip(cleaned[bucket].months, cleaned[bucket].values))
        columns[bucket] = [repr(by_month[m]) if m in by_month else "" for m in months]
    return frame_csv(columns)


def run(config: PipelineConfig, **kwargs) -> PipelineReport:
    return Pipeline(config, **kwargs).run()


# -------- Audit --------
def audit(output_dir: str) -> AuditReport:
    """
    Re-render every stored table from its CSV, and re-run the global and
    filtered regressions on stored panels, comparing against what was written.
    """
    storage = ReportStorage(output_dir)
    result = AuditReport()
    metadata = storage.load_json("metadata.json") or {}
    options = RegressionOptions.model_validate(metadata.get("regression", {}))

    for relative in storage.list_files("tables"):
        stem = relative[: -len(".csv")]
        text = storage.read_text(f"{stem}.txt")
        result.checked += 1
        if text is None:
            result.mismatches.append(f"{stem}.txt is missing")
            continue
        frame = storage.load_frame(relative)
        rendered = render_text(list(frame.columns), frame.values.tolist())
        if rendered not in text:
            result.mismatches.append(f"{stem}.txt does not match {relative}")

    panel_files = storage.list_files("panels")
    if not panel_files:
        result.mismatches.append("no stored panels under panels/")
        return result

    global_fits: Dict[str, RegressionFit] = {}
    filtered: Dict[str, Optional[RegressionFit]] = {}
    features: List[str] = []
    for relative in panel_files:
        panel = panel_from_frame(storage.load_frame(relative))
        features = features or panel.feature_names
        model = iterative_filter(panel, options.level, options.mode)
        global_fits[panel.dependent] = fit_global_model(panel)
        filtered[panel.dependent] = model.fit
        cleaned = extract_cleaned(model, panel)
        cleaned_path = f"cleaned/{safe_name(panel.dependent)}.csv"
        result.checked += 1
        if storage.read_text(cleaned_path) != series_csv(cleaned.months, cleaned.values):
            result.mismatches.append(f"{cleaned_path} differs from the refitted residuals")

    for name, fits in (("global_pvalues", global_fits), ("filtered_pvalues", filtered)):
        result.checked += 1
        _, expected = emit_pvalue_table(fits, features, options.level)
        if storage.read_text(f"tables/{name}.csv") != expected:
            result.mismatches.append(f"tables/{name}.csv differs from refitted p-values")

    logger.info("Audit of %s: %d checks, %d mismatches", output_dir, result.checked, len(result.mismatches))
    return result
