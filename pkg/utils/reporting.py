"""
CSV and JSON report writers. Output is deterministic: rows are sorted and
JSON keys are sorted. CSV floats carry 17 significant digits; JSON floats use
the shortest repr that reads back to the same double.
"""

import json
import logging
import os
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def _plain(value: Any) -> Any:
    """JSON-compatible copy of report data (complex -> [re, im], tuples -> lists)."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, complex):
        return [value.real, value.imag]
    if hasattr(value, "item") and callable(value.item):
        return _plain(value.item())
    if isinstance(value, float) and value in (float("inf"), float("-inf")):
        return str(value)
    return value


def rows_frame(rows: Sequence[Dict[str, Any]], sort_by: Optional[List[str]] = None) -> pd.DataFrame:
    frame = pd.DataFrame(list(rows))
    if sort_by and not frame.empty:
        frame = frame.sort_values(sort_by, kind="mergesort").reset_index(drop=True)
    return frame


def write_csv(path: str, rows: Sequence[Dict[str, Any]], sort_by: Optional[List[str]] = None) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    rows_frame(rows, sort_by).to_csv(path, index=False, lineterminator="\n",
                                     float_format=FLOAT_FORMAT)
    logger.info("wrote %d rows to %s", len(rows), path)
    return path


def summary_document(command: str, config_echo: Dict[str, Any],
                     results: Sequence[Dict[str, Any]], passed: bool) -> str:
    document = {
        "command": command,
        "config_echo": _plain(config_echo),
        "results": _plain(list(results)),
        "pass": passed,
    }
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def write_json(path: str, command: str, config_echo: Dict[str, Any],
               results: Sequence[Dict[str, Any]], passed: bool) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="\n") as f:
        f.write(summary_document(command, config_echo, results, passed))
    logger.info("wrote summary to %s", path)
    return path


def write_report(out_dir: str, command: str, rows: Sequence[Dict[str, Any]],
                 config_echo: Dict[str, Any], passed: bool, fmt: str = "both",
                 sort_by: Optional[List[str]] = None,
                 results: Optional[Sequence[Dict[str, Any]]] = None) -> List[str]:
    """
    Write <command>.csv and/or <command>.json into out_dir.

    Args:
        rows: flat rows for the CSV
        results: richer records for the JSON summary; defaults to the rows
        fmt: "csv", "json" or "both"

    Returns:
        paths written
    """
    stem = os.path.join(out_dir, command.replace("-", "_"))
    written = []
    if fmt in ("csv", "both"):
        written.append(write_csv(stem + ".csv", rows, sort_by))
    if fmt in ("json", "both"):
        records = list(results) if results is not None else list(rows_frame(rows, sort_by).to_dict("records"))
        written.append(write_json(stem + ".json", command, config_echo, records, passed))
    return written
