"""Matrix, vector and result files"""

import io
import sys
import json
import math
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from ..common.common_errors import MatrixFileError
from ..perturb.perturb_storage import write_atomic

SCHEMA_PREFIX : str = "oblivious-perturbation"
SCHEMA_VERSION : int = 1
DENSE_SUFFIXES : tuple[str, ...] = (".csv",)

def _read_lines(path : str | Path) -> list[str]:
    try:
        with open(path, encoding="utf-8") as stream:
            return stream.read().splitlines()
    except OSError as error:
        raise MatrixFileError(path, str(error)) from error

def _read_header(path : str | Path, lines : list[str]) -> int:
    if not lines:
        raise MatrixFileError(path, "file is empty", 1)
    try:
        n = int(lines[0].strip())
    except ValueError as error:
        raise MatrixFileError(path, f"first line must be the dimension, got {lines[0]!r}", 1) from error
    if n < 1:
        raise MatrixFileError(path, f"dimension must be positive, got {n}", 1)
    return n

def _frame(path : str | Path, lines : list[str], **options) -> pd.DataFrame:
    body = "\n".join(lines[1:])
    try:
        return pd.read_csv(io.StringIO(body), header=None, dtype=str, skip_blank_lines=False, **options)
    except pd.errors.EmptyDataError as error:
        raise MatrixFileError(path, "no data after the dimension line", 2) from error
    except pd.errors.ParserError as error:
        raise MatrixFileError(path, f"malformed row: {error}") from error

def _parse_float(text) -> float:
    try:
        return float(text)
    except (TypeError, ValueError):
        return math.nan

def _numeric(path : str | Path, frame : pd.DataFrame) -> np.ndarray:
    values = frame.map(_parse_float).astype(np.float64)
    bad = values.isna() | ~np.isfinite(values.fillna(0.0))
    if bad.any(axis=None):
        row = int(np.flatnonzero(bad.any(axis=1).to_numpy())[0])
        raise MatrixFileError(path, f"non-numeric or non-finite value in {frame.iloc[row].tolist()}", row + 2)
    return values.to_numpy(dtype=np.float64)

def read_dense_matrix(path : str | Path) -> np.ndarray:
    """Reads a dense CSV matrix: the dimension n, then n rows of n comma-separated values"""
    lines = _read_lines(path)
    n = _read_header(path, lines)
    frame = _frame(path, lines)
    if frame.shape[0] != n:
        raise MatrixFileError(path, f"expected {n} rows, found {frame.shape[0]}", min(frame.shape[0], n) + 2)
    if frame.shape[1] != n:
        short = np.flatnonzero(frame.notna().sum(axis=1).to_numpy() != n)
        row = int(short[0]) if short.size else 0
        raise MatrixFileError(path, f"expected {n} columns, found {frame.shape[1]}", row + 2)
    return _numeric(path, frame)

def read_coordinate_matrix(path : str | Path) -> np.ndarray:
    """Reads a coordinate matrix: the dimension n, then lines 'row col value' with 1-based indices

    Repeated positions are summed, missing ones are zero.
    """
    lines = _read_lines(path)
    n = _read_header(path, lines)
    frame = _frame(path, lines, sep=r"\s+", engine="python")
    if frame.shape[1] != 3:
        raise MatrixFileError(path, f"coordinate lines need 3 fields, found {frame.shape[1]}")
    values = _numeric(path, frame)
    indices = values[:, :2]
    bad = (indices != np.round(indices)) | (indices < 1) | (indices > n)
    if bad.any():
        row = int(np.flatnonzero(bad.any(axis=1))[0])
        raise MatrixFileError(path, f"index outside [1, {n}] or not an integer", row + 2)
    matrix = np.zeros((n, n))
    np.add.at(matrix, (indices[:, 0].astype(np.int64) - 1, indices[:, 1].astype(np.int64) - 1), values[:, 2])
    return matrix

def read_matrix(path : str | Path, dense : bool | None = None) -> np.ndarray:
    """Reads a matrix file, dense CSV for .csv files and coordinate text otherwise"""
    dense = Path(path).suffix.lower() in DENSE_SUFFIXES if dense is None else dense
    matrix = read_dense_matrix(path) if dense else read_coordinate_matrix(path)
    logging.info("Read %dx%d matrix from %s", *matrix.shape, path)
    return matrix

def read_vector(path : str | Path) -> np.ndarray:
    """Reads a vector file: the length n, then one value per line"""
    lines = _read_lines(path)
    n = _read_header(path, lines)
    frame = _frame(path, lines)
    if frame.shape != (n, 1):
        raise MatrixFileError(path, f"expected {n} lines with one value each, found shape {frame.shape}")
    return _numeric(path, frame)[:, 0]

def write_dense_matrix(matrix : np.ndarray, path : str | Path) -> None:
    """Writes a matrix in the dense CSV format"""
    body = pd.DataFrame(matrix).to_csv(header=False, index=False, float_format="%.17g")
    write_atomic(path, f"{matrix.shape[0]}\n{body}")

def write_vector(vector : np.ndarray, path : str | Path) -> None:
    """Writes a vector in the one-value-per-line format"""
    body = "\n".join(repr(float(value)) for value in vector)
    write_atomic(path, f"{len(vector)}\n{body}\n")

def json_ready(value):
    """Returns value with numpy scalars and arrays converted and non-finite floats spelled out"""
    if isinstance(value, dict):
        return {str(key): json_ready(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_ready(item) for item in value]
    if isinstance(value, np.ndarray):
        return json_ready(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value

def schema_document(command : str, payload : dict) -> dict:
    """Returns payload tagged with the versioned schema of command"""
    return {"schema": f"{SCHEMA_PREFIX}/{command}", "schema_version": SCHEMA_VERSION, **payload}

def dump_json(document : dict) -> str:
    """Returns indented, strict JSON"""
    return json.dumps(json_ready(document), indent=2, allow_nan=False) + "\n"

def emit_text(text : str, path : str | Path | None) -> None:
    """Writes text to path, or to stdout when path is None"""
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        write_atomic(path, text)
        logging.info("Wrote %s", path)

def table_text(table : pd.DataFrame, output_format : str, command : str, summary : dict | None = None) -> str:
    """Returns a result table as CSV, or as JSON records with its summary"""
    if output_format == "csv":
        return table.to_csv(index=False)
    records = json.loads(table.to_json(orient="records"))
    return dump_json(schema_document(command, {"rows": records, "summary": summary or {}}))
