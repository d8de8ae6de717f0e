"""
Exception hierarchy shared by the engine, the ingestion layer and the pipeline.
"""
from typing import Optional, Sequence


class BipImpactError(Exception):
    """Base class for every error raised by bip_impact"""


class LengthError(BipImpactError, ValueError):
    """Series too short for the requested operation"""


class DomainError(BipImpactError, ValueError):
    """Argument outside the domain of the operation"""


class DegenerateSeriesError(DomainError):
    """Series with zero variance where variation is required"""


class SingularityError(BipImpactError):
    """Design matrix without full column rank"""

    def __init__(self, message: str, columns: Sequence[str] = ()):
        super().__init__(message)
        self.columns = list(columns)


class InsufficientDataError(BipImpactError):
    """Not more observations than regressors"""


class AlignmentError(BipImpactError):
    """Inputs do not share the required observation rows"""


class EmptyPanelError(BipImpactError):
    """Inner join left no common month"""


class DegenerateFitError(BipImpactError):
    """Model with zero residual sum of squares where a positive one is required"""


class ConfigurationError(BipImpactError):
    """Invalid or inconsistent configuration"""


class IngestError(BipImpactError):
    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        location = path or ""
        if line is not None:
            location = f"{location}:{line}"
        super().__init__(f"{location}: {message}" if location else message)
        self.path = path
        self.line = line


class RegistryParseError(BipImpactError):
    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class DuplicateRecordError(RegistryParseError):
    def __init__(self, number: int, line: Optional[int] = None):
        super().__init__(f"duplicate BIP number {number}", line)
        self.number = number


class RegistryIntegrityError(BipImpactError):
    """A built-in BIP set references a number the registry lacks"""


class PipelineStageError(BipImpactError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
