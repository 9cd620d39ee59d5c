"""
Run configuration and report documents for the command-line front end.

A ReportDocument is the single artifact every subcommand produces: a JSON
body (version, inputs, results, warnings) plus optional CSV tables written
next to it. Serialization is deterministic: keys are sorted, numpy values
become plain Python numbers and non-finite floats become null.
"""

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, TextIO, Tuple

import numpy as np
import pandas as pd

from app import __version__
from app.core.config import Config, get_config
from app.core.equilibrium import NumericSettings
from app.core.exceptions import DataError, LevelError, ParameterError
from app.core.logger import logger

SUBCOMMAND_SPEC_COUNTS = {"chain": 1, "curves": 1, "order": 2, "classify": 1}
FORMATS = ("json", "csv")
REPORT_FILE = "report.json"
CSV_FLOAT_FORMAT = "%.15g"


def sanitize(value: Any) -> Any:
    """
    Convert a nested structure into JSON-safe builtins.

    numpy scalars and arrays become numbers and lists, enums their values,
    tuples lists, and NaN or infinite floats None.
    """
    if isinstance(value, dict):
        return {str(k): sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [sanitize(v) for v in value]
    if isinstance(value, np.ndarray):
        return [sanitize(v) for v in value.tolist()]
    if isinstance(value, Enum):
        return sanitize(value.value)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if hasattr(value, "to_dict") and not isinstance(value, pd.DataFrame):
        return sanitize(value.to_dict())
    return value


@dataclass
class RunConfig:
    """
    Parsed invocation of one subcommand.

    Attributes:
        subcommand: One of chain, curves, order, classify
        specs: Distribution specs or data paths, in order
        levels: Highest chain level S
        quad_tol: Override of the quadrature tolerance
        grid: Override of the quantile grid size
        window: Override of the quantile window
        out: Output directory; stdout when None
        fmt: Output format, json or csv
        kinds: Curve kinds for the curves subcommand (None means all)
        log_level: Logging level name
    """

    subcommand: str
    specs: List[str]
    levels: int = 3
    quad_tol: Optional[float] = None
    grid: Optional[int] = None
    window: Optional[Tuple[float, float]] = None
    out: Optional[str] = None
    fmt: str = "json"
    kinds: Optional[List[str]] = None
    log_level: str = "INFO"

    def validate(self) -> None:
        """
        Check spec count, depth and format.

        Raises:
            ParameterError: On an unknown subcommand, wrong spec count or format
            LevelError: If levels < 1
        """
        expected = SUBCOMMAND_SPEC_COUNTS.get(self.subcommand)
        if expected is None:
            raise ParameterError(f"Unknown subcommand {self.subcommand!r}")
        if len(self.specs) != expected:
            raise ParameterError(
                f"'{self.subcommand}' needs exactly {expected} --dist "
                f"argument(s), got {len(self.specs)}"
            )
        if not (isinstance(self.levels, int) and self.levels >= 1):
            raise LevelError(f"--levels must be an integer >= 1, got {self.levels}")
        if self.fmt not in FORMATS:
            raise ParameterError(f"Unknown format {self.fmt!r}; expected json or csv")

    def settings(self, cfg: Optional[Config] = None) -> NumericSettings:
        """Numeric settings from the environment with flag overrides applied."""
        return NumericSettings.from_config(
            cfg or get_config(),
            quad_abs_tol=self.quad_tol,
            grid_points=self.grid,
            window=tuple(self.window) if self.window is not None else None,
        )

    def to_dict(self) -> Dict[str, Any]:
        """Input echo; the output location is left out so reports stay comparable."""
        return {
            "subcommand": self.subcommand,
            "specs": list(self.specs),
            "levels": self.levels,
            "format": self.fmt,
            "kinds": list(self.kinds) if self.kinds is not None else None,
        }


@dataclass
class ReportDocument:
    """
    Machine-readable result of one run.

    Attributes:
        inputs: Echo of specs and settings
        results: Subcommand results
        warnings: Inconclusive forms, disagreements and interpretation notes
        tables: CSV tables keyed by file name; the first one is the primary table
        version: Toolkit version
    """

    inputs: Dict[str, Any]
    results: Dict[str, Any]
    warnings: List[str] = field(default_factory=list)
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict, repr=False)
    version: str = __version__

    def to_dict(self) -> Dict[str, Any]:
        return sanitize(
            {
                "version": self.version,
                "inputs": self.inputs,
                "results": self.results,
                "warnings": list(self.warnings),
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ReportDocument":
        """
        Parse a report emitted by to_json.

        Raises:
            DataError: If the text is not a report document
        """
        try:
            body = json.loads(text)
        except json.JSONDecodeError as e:
            raise DataError(f"Report is not valid JSON: {e}")
        missing = {"version", "inputs", "results", "warnings"} - set(body)
        if missing:
            raise DataError(f"Report lacks keys: {sorted(missing)}")
        return cls(
            inputs=body["inputs"],
            results=body["results"],
            warnings=list(body["warnings"]),
            version=body["version"],
        )

    @property
    def primary_table(self) -> Optional[pd.DataFrame]:
        return next(iter(self.tables.values()), None)

    def write(self, out_dir: str, fmt: str = "json") -> List[Path]:
        """
        Write the report into out_dir.

        JSON output writes report.json and every table; CSV output writes the
        tables only.

        Returns:
            Paths of the written files
        """
        target = Path(out_dir)
        target.mkdir(parents=True, exist_ok=True)
        written: List[Path] = []
        if fmt == "json":
            path = target / REPORT_FILE
            path.write_text(self.to_json(), encoding="utf-8")
            written.append(path)
        for name, frame in self.tables.items():
            path = target / name
            frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
            written.append(path)
        logger.info(f"Wrote {len(written)} file(s) to {target}")
        return written

    def emit(self, stream: TextIO, fmt: str = "json") -> None:
        """Print the report (json) or its primary table (csv) to a stream."""
        if fmt == "json":
            stream.write(self.to_json())
            return
        table = self.primary_table
        if table is None:
            table = pd.DataFrame()
        table.to_csv(stream, index=False, float_format=CSV_FLOAT_FORMAT)
