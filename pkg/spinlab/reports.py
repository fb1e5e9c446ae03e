"""Run reports: JSON/CSV emission, model-config documents and persistence."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, is_dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from spinlab import __version__
from spinlab.exceptions import UsageError
from spinlab.systems import MODELS, Pinning

FORMATS = ("json", "csv")

# keys a model-config document may set, with their parsers
CONFIG_KEYS = {
    "model": str,
    "lambda": float,
    "k": int,
    "graph": str,
    "seed": int,
    "steps": int,
    "burnin": int,
    "chains": int,
    "cap": int,
}


@dataclass
class RunReport:
    command: str
    inputs: dict[str, Any]
    seed: int | None
    results: dict[str, Any]
    version: str = __version__
    wall_time: float = 0.0
    table: list[dict[str, Any]] = field(default_factory=list)

    def payload(self) -> dict[str, Any]:
        return plain(
            {
                "command": self.command,
                "inputs": self.inputs,
                "seed": self.seed,
                "results": self.results,
                "version": self.version,
                "wall_time": self.wall_time,
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.payload(), sort_keys=True, indent=2, allow_nan=False) + "\n"

    def to_csv(self) -> str:
        if not self.table:
            raise UsageError(f"the {self.command} report has no tabular payload; use --format json")
        rows = plain(self.table)
        columns: list[str] = []
        for row in rows:
            columns.extend(key for key in row if key not in columns)
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buffer.getvalue()

    def render(self, fmt: str) -> str:
        if fmt not in FORMATS:
            raise UsageError(f"unknown format {fmt!r}")
        return self.to_json() if fmt == "json" else self.to_csv()

    def save(self):
        from spinlab.models import SavedReport

        payload = self.payload()
        return SavedReport.objects.create(
            command=self.command,
            inputs=payload["inputs"],
            seed=self.seed,
            results=payload["results"],
            version=self.version,
            wall_time=self.wall_time,
        )


def _plain_float(x: float) -> float | str:
    if math.isfinite(x):
        return x
    if math.isnan(x):
        return "nan"
    return "inf" if x > 0 else "-inf"


def plain(value: Any) -> Any:
    """Convert *value* to JSON-ready builtins; non-finite floats become strings."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return [plain(v) for v in sorted(value)]
    if isinstance(value, Pinning):
        return [list(pair) for pair in value.pairs]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, np.generic):
        return plain(value.item())
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, Fraction):
        return float(value)
    if isinstance(value, float):
        return _plain_float(value)
    if isinstance(value, Path):
        return str(value)
    if hasattr(value, "to_dict"):
        return plain(value.to_dict())
    if is_dataclass(value):
        return plain(asdict(value))
    raise TypeError(f"cannot serialize {type(value).__name__}")


def write_output(text: str, output: Path | None, stream: Any) -> None:
    """Write *text* either to *stream* or to *output* file."""
    if output is None:
        stream.write(text, ending="")
    else:
        output.write_text(text, encoding="utf-8")


def parse_model_config(text: str) -> dict[str, Any]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    config: dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep or not key or not value:
            raise UsageError(f"config line {number}: expected key = value")
        if key not in CONFIG_KEYS:
            raise UsageError(f"config line {number}: unknown key {key!r}")
        try:
            config[key] = CONFIG_KEYS[key](value)
        except ValueError:
            raise UsageError(f"config line {number}: bad value {value!r} for {key}") from None
    if "model" in config and config["model"] not in MODELS:
        raise UsageError(f"unknown model {config['model']!r}; choose from {', '.join(MODELS)}")
    return config


def read_model_config(path: Path | str) -> dict[str, Any]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    return parse_model_config(text)

