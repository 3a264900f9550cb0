import csv
import json
import math
import os
from typing import Any, Dict, Iterable, List, Optional, Sequence

from pydantic import BaseModel

from app.core.errors import ConfigError


def _plain(value: Any) -> Any:
    """JSON-ready copy of ``value``; numpy scalars and arrays become Python numbers and lists."""
    if isinstance(value, BaseModel):
        return _plain(value.model_dump())
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "tolist"):
        return _plain(value.tolist())
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def format_cell(value: Any) -> str:
    if isinstance(value, float):
        return repr(float(value))
    if hasattr(value, "item"):
        return format_cell(value.item())
    return str(value)


class ReportStorage:
    """JSON reports and CSV tables under one output directory.

    Keys are sorted and floats are written with ``repr``, so two runs of the
    same configuration produce byte-identical files.
    """

    def __init__(self, output_dir: str = "output"):
        self.output_dir = output_dir

    def _ensure_output_dir(self, path: str):
        """Create the parent directory of ``path`` if it doesn't exist"""
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)

    def path(self, name: str) -> str:
        return name if os.path.isabs(name) else os.path.join(self.output_dir, name)

    def save_json(self, name: str, report: Any) -> str:
        """Write a report (pydantic model or plain data) as sorted JSON"""
        path = self.path(name)
        self._ensure_output_dir(path)
        with open(path, "w") as f:
            json.dump(_plain(report), f, indent=2, sort_keys=True)
            f.write("\n")
        return path

    def load_json(self, name: str) -> Dict:
        path = self.path(name)
        if not os.path.exists(path):
            raise ConfigError(f"report not found: {path}", category="config.not_found")
        try:
            with open(path, "r") as f:
                return json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON ({e.msg} at line {e.lineno})")

    def save_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
        path = self.path(name)
        self._ensure_output_dir(path)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(list(header))
            for row in rows:
                writer.writerow([format_cell(v) for v in row])
        return path

    def load_csv(self, name: str) -> List[Dict[str, str]]:
        path = self.path(name)
        if not os.path.exists(path):
            raise ConfigError(f"table not found: {path}", category="config.not_found")
        with open(path, newline="") as f:
            return list(csv.DictReader(f))

    def list_reports(self, suffix: Optional[str] = ".json") -> List[str]:
        """Report files in the output directory, sorted by name"""
        if not os.path.isdir(self.output_dir):
            return []
        return sorted(n for n in os.listdir(self.output_dir) if suffix is None or n.endswith(suffix))
