"""
Bounded worker pool for the embarrassingly parallel stages: per-bucket
cleaning, cointegration pairs and causality cells.
"""
import logging
from typing import Any, Callable, List, Optional, Sequence

from joblib import Parallel, delayed

from ..core.config import settings
from ..schemas.tasks import TaskOutcome, TaskStatusEnum

logger = logging.getLogger(__name__)


def _run_one(fn: Callable[[Any], Any], index: int, item: Any) -> TaskOutcome:
    try:
        return TaskOutcome(index=index, status=TaskStatusEnum.completed, result=fn(item))
    except Exception as e:
        logger.error(f"Task {index} failed: {e}")
        return TaskOutcome(index=index, status=TaskStatusEnum.failed, error=f"{type(e).__name__}: {e}")


def map_tasks(
    fn: Callable[[Any], Any], items: Sequence[Any], n_jobs: Optional[int] = None
) -> List[TaskOutcome]:
    """
    Apply `fn` to every item on at most `n_jobs` threads (settings.WORKERS by
    default). Outcomes come back in input order; a raising item yields a failed
    outcome instead of aborting the batch.
    """
    if not items:
        return []
    workers = max(1, min(n_jobs or settings.WORKERS, len(items)))
    if workers == 1:
        return [_run_one(fn, i, item) for i, item in enumerate(items)]
    return list(
        Parallel(n_jobs=workers, prefer="threads")(
            delayed(_run_one)(fn, i, item) for i, item in enumerate(items)
        )
    )
