"""
Machine readable reports

JSON reports have sorted keys, two-space indent and repr-exact floats so
that a fixed config always gives the same bytes. Solutions are written as
`t,u` CSV with 17 significant digits.
"""
import json
import logging
import os
from enum import Enum
from typing import Any, Dict

import attr
import numpy as np
import pandas as pd

from fracbvp.constants import REPORT_SCHEMA_VERSION, VERSION
from fracbvp.errors import ConfigError, DomainError
from fracbvp.fraccalc import GridFunction
from utils.logutils import setup_logger
from utils.miscutils import format_float

LOGGER = setup_logger(__name__, log_level=logging.INFO)

SOLUTION_COLUMNS = ("t", "u")


def to_jsonable(obj: Any) -> Any:
    """Recursively turn attrs classes, enums and numpy values into JSON types."""
    if attr.has(type(obj)):
        return {
            field.name: to_jsonable(getattr(obj, field.name))
            for field in attr.fields(type(obj))
        }
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(key): to_jsonable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(item) for item in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(item) for item in obj.tolist()]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def make_report(command: str, config: Dict[str, Any], body: Dict[str, Any]) -> Dict[str, Any]:
    """Wrap `body` with the schema version, package version and resolved config."""
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "version": VERSION,
        "command": command,
        "config": config,
    }
    report.update(body)
    return to_jsonable(report)


def dumps_report(report: Dict[str, Any]) -> str:
    """Deterministic JSON text of `report`."""
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def write_report(report: Dict[str, Any], path: str) -> str:
    """Write `report` to `path` and return the path."""
    directory = os.path.dirname(path)
    if directory and not os.path.exists(directory):
        os.makedirs(directory)
    with open(path, "w", encoding="utf-8") as report_file:
        report_file.write(dumps_report(report))
    LOGGER.info("wrote report %s", path)
    return path


def write_solution(u: GridFunction, path: str) -> str:
    """Write `u` as a `t,u` CSV with 17 significant digit values."""
    directory = os.path.dirname(path)
    if directory and not os.path.exists(directory):
        os.makedirs(directory)
    frame = pd.DataFrame({SOLUTION_COLUMNS[0]: u.nodes, SOLUTION_COLUMNS[1]: u.values})
    frame.to_csv(path, index=False, float_format=format_float)
    LOGGER.info("wrote solution with %d nodes to %s", u.size, path)
    return path


def read_solution(path: str) -> GridFunction:
    """Read a `t,u` CSV written by :func:`write_solution`."""
    try:
        frame = pd.read_csv(path, dtype=float, float_precision="round_trip")
    except (OSError, ValueError) as exc:
        raise ConfigError("cannot read solution '{}': {}".format(path, exc))
    if list(frame.columns) != list(SOLUTION_COLUMNS):
        raise ConfigError("solution '{}' must have the header 't,u', got {}".format(
            path, ",".join(frame.columns)))
    try:
        return GridFunction(
            nodes=frame["t"].to_numpy(dtype=float), values=frame["u"].to_numpy(dtype=float))
    except DomainError as exc:
        raise ConfigError("solution '{}': {}".format(path, exc))
