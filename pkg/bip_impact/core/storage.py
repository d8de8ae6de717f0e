import json
import logging
import re
from pathlib import Path
from typing import Any, List, Optional, Union

import pandas as pd

from .config import settings

logger = logging.getLogger(__name__)

SUBDIRS = ("tables", "transformed", "panels", "cleaned", "signals", "plots", "diagnostics")


def safe_name(label: str) -> str:
    """File stem for a series or set label: `From 0 to 0.001` -> `From_0_to_0.001`"""
    return re.sub(r"[^A-Za-z0-9.\-]+", "_", label).strip("_")


class ReportStorage:
    """
    Handles storage and retrieval of the report artifacts of one run
    """

    def __init__(self, output_path: Optional[Union[str, Path]] = None):
        self.root = Path(output_path or settings.OUTPUT_PATH)
        self.artifacts: List[str] = []

        # Create output directories if they don't exist
        for subdir in SUBDIRS:
            (self.root / subdir).mkdir(parents=True, exist_ok=True)

    def path(self, relative: str) -> Path:
        return self.root / relative

    def save_text(self, relative: str, content: str) -> Path:
        """Write `content` verbatim (no newline translation) and record the artifact"""
        path = self.path(relative)
        try:
            with open(path, "w", encoding="utf-8", newline="") as f:
                f.write(content)
        except OSError as e:
            logger.error(f"Error saving {relative}: {e}")
            raise
        if relative not in self.artifacts:
            self.artifacts.append(relative)
        logger.debug("Wrote %s", path)
        return path

    def save_table(self, name: str, text: str, csv: str) -> None:
        self.save_text(f"tables/{name}.txt", text)
        self.save_text(f"tables/{name}.csv", csv)

    def save_json(self, relative: str, data: Any) -> Path:
        return self.save_text(relative, json.dumps(data, indent=2, sort_keys=True) + "\n")

    def exists(self, relative: str) -> bool:
        return self.path(relative).is_file()

    def read_text(self, relative: str) -> Optional[str]:
        path = self.path(relative)
        if not path.is_file():
            return None
        with open(path, "r", encoding="utf-8", newline="") as f:
            return f.read()

    def load_json(self, relative: str) -> Optional[Any]:
        content = self.read_text(relative)
        return None if content is None else json.loads(content)

    def load_frame(self, relative: str) -> pd.DataFrame:
        """A stored CSV with every cell kept as its exact text"""
        return pd.read_csv(self.path(relative), dtype=str, keep_default_na=False)

    def list_files(self, subdir: str, pattern: str = "*.csv") -> List[str]:
        directory = self.root / subdir
        if not directory.is_dir():
            return []
        return sorted(f"{subdir}/{p.name}" for p in directory.glob(pattern))
