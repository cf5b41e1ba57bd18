import json
import logging
import os
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Any, Literal

import numpy as np
import pandas as pd

from app.core.errors import PreconditionError

logger = logging.getLogger(__name__)

JSONL_NAME = "report.jsonl"
CSV_NAME = "summary.csv"

CSV_COLUMNS = [
    "stage",
    "d",
    "k",
    "eta",
    "n1",
    "theorem1_rhs",
    "theorem2_rhs",
    "failure_bound",
    "entropy_hat",
    "mi_exact",
    "trials",
    "seed",
    "regime",
    "config_hash",
]

ReportFormat = Literal["json", "csv", "both"]


def _normalize(obj: Any) -> Any:
    """JSON-ready copy of a record: floats rounded to 12 significant digits, numpy and Fraction values unwrapped."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float, Fraction)):
        return float(f"{float(obj):.12g}")
    if isinstance(obj, dict):
        return {str(k): _normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalize(v) for v in obj]
    return str(obj)


class ReportWriter:
    def __init__(self, output_dir: str | Path = "reports"):
        self.output_dir = Path(output_dir)

    def _write_atomic(self, name: str, write) -> Path:
        final = self.output_dir / name
        with tempfile.NamedTemporaryFile("w", delete=False, dir=self.output_dir, suffix=".tmp", encoding="utf-8", newline="") as tmp:
            tmp_path = Path(tmp.name)
        try:
            write(tmp_path)
            os.replace(tmp_path, final)
        finally:
            tmp_path.unlink(missing_ok=True)
        return final

    def write(self, records: list[dict[str, Any]], fmt: ReportFormat = "both") -> list[Path]:
        """
        Write one JSON line per record and a CSV of the summary records.

        Files appear complete or not at all; on failure any file already
        written by this call is removed.
        """
        if not records:
            raise PreconditionError("report has no records")
        self.output_dir.mkdir(parents=True, exist_ok=True)
        rows = [_normalize(r) for r in records]
        written: list[Path] = []
        try:
            if fmt in ("json", "both"):
                written.append(self._write_atomic(JSONL_NAME, lambda path: self._write_jsonl(path, rows)))
            if fmt in ("csv", "both"):
                written.append(self._write_atomic(CSV_NAME, lambda path: self._write_csv(path, rows)))
        except Exception:
            for path in written:
                path.unlink(missing_ok=True)
            raise
        logger.info("report: %d records -> %s", len(rows), ", ".join(str(p) for p in written))
        return written

    @staticmethod
    def _write_jsonl(path: Path, rows: list[dict[str, Any]]) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for row in rows:
                f.write(json.dumps(row, sort_keys=True) + "\n")

    @staticmethod
    def _write_csv(path: Path, rows: list[dict[str, Any]]) -> None:
        summaries = [r for r in rows if r.get("record") == "summary"]
        df = pd.DataFrame(summaries, columns=CSV_COLUMNS)
        df.to_csv(path, index=False, float_format="%.12g", lineterminator="\n")


def emit_report(records: list[dict[str, Any]], output_dir: str | Path, fmt: ReportFormat = "both") -> list[Path]:
    return ReportWriter(output_dir).write(records, fmt)
