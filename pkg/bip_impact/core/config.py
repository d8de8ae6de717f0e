import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from ..schemas.pipeline import PipelineConfig
from .errors import ConfigurationError

logger = logging.getLogger(__name__)

PROJECT_ROOT = Path(__file__).resolve().parent.parent.parent


class Settings(BaseSettings):
    PROJECT_NAME: str = "BIP Impact"
    LOG_LEVEL: str = "INFO"
    WORKERS: int = 4
    RESOURCES_PATH: str = str(PROJECT_ROOT / "resources")
    OUTPUT_PATH: str = "./reports"

    model_config = SettingsConfigDict(
        env_prefix="BIP_IMPACT_", case_sensitive=True, env_file=".env", extra="ignore"
    )

    @property
    def resources_dir(self) -> Path:
        return Path(self.RESOURCES_PATH)

    @property
    def default_registry(self) -> Path:
        return self.resources_dir / "bips.csv"


settings = Settings()


def _resolve(path: str, base: Path) -> str:
    candidate = Path(path)
    if not candidate.is_absolute():
        candidate = base / candidate
    return str(candidate)


def parse_config(data: Dict[str, Any], base_dir: Optional[Path] = None) -> PipelineConfig:
    """
    Validate a raw config mapping. Relative series and registry paths resolve
    against `base_dir` and every referenced file must exist.
    """
    try:
        config = PipelineConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(f"invalid pipeline config: {e}") from e

    base = base_dir or Path.cwd()
    update: Dict[str, Any] = {
        "buckets": [s.model_copy(update={"path": _resolve(s.path, base)}) for s in config.buckets],
        "features": [s.model_copy(update={"path": _resolve(s.path, base)}) for s in config.features],
    }
    if config.registry:
        update["registry"] = _resolve(config.registry, base)
    if config.output_dir:
        update["output_dir"] = _resolve(config.output_dir, base)
    config = config.model_copy(update=update)

    missing = [spec.path for spec in config.series if not Path(spec.path).is_file()]
    if config.registry and not Path(config.registry).is_file():
        missing.append(config.registry)
    if missing:
        raise ConfigurationError(f"referenced files do not exist: {missing}")
    return config


def load_config(path: Union[str, Path]) -> PipelineConfig:
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigurationError(f"config file not found: {config_path}")
    try:
        with config_path.open("r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigurationError(f"{config_path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"{config_path}: expected a mapping at top level")

    config = parse_config(data, config_path.resolve().parent)
    logger.info(
        "Loaded configuration from %s (%d buckets, %d features)",
        config_path,
        len(config.buckets),
        len(config.features),
    )
    return config
