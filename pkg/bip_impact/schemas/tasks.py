from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel


class TaskStatusEnum(str, Enum):
    completed = "completed"
    failed = "failed"


class TaskOutcome(BaseModel):
    index: int
    status: TaskStatusEnum
    result: Optional[Any] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.status == TaskStatusEnum.completed
