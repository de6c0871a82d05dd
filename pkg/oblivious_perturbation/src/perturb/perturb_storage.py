"""Perturbation file format"""

import os
import json
import logging
import tempfile
from pathlib import Path

import numpy as np

from ..common.common_errors import MatrixFileError, ObliviousError
from ..kwise.kwise_family import KWiseSignFamily
from ..kwise.kwise_field import get_context
from ..pattern.pattern_matrix import PatternMatrix
from .perturb_settings import PerturbationSettings
from .perturb_dense import DensePerturbation
from .perturb_sparse import SparsePerturbation
from .perturb_oblivious import ObliviousPerturbation

FORMAT_NAME : str = "oblivious-perturbation"
FORMAT_VERSION : int = 1

def signs_to_bits(signs : np.ndarray) -> str:
    """Encodes +1 as '0' and -1 as '1'"""
    return "".join("1" if sign < 0 else "0" for sign in np.ravel(signs))

def bits_to_signs(bits : str) -> np.ndarray:
    """Decodes a sign bit string"""
    return 1 - 2 * (np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")).astype(np.int8)

def to_document(perturbation : ObliviousPerturbation) -> dict:
    """Returns the JSON document of a perturbation"""
    pattern = perturbation.r1.pattern
    sparse = perturbation.r2
    report = perturbation.bit_report
    report.pop("total")
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "n": perturbation.n,
        "eps": perturbation.eps,
        "delta": perturbation.delta,
        "settings": perturbation.settings.to_dict(),
        "bit_report": report,
        "pattern": {
            "entry_family": {
                "k": pattern.entry_family.k,
                "m": pattern.entry_family.m,
                "coeffs": list(pattern.entry_family.coeffs),
            },
            "local_degree": pattern.local_degree,
            "row_coeffs": pattern.row_coeffs.tolist(),
            "col_coeffs": pattern.col_coeffs.tolist(),
        },
        "dense": {
            "rho": perturbation.r1.rho,
            "d1": signs_to_bits(perturbation.r1.d1),
            "d2": signs_to_bits(perturbation.r1.d2),
        },
        "sparse": {
            "K": sparse.k,
            "L": sparse.l,
            "subsets": sparse.subsets.tolist(),
            "signs": signs_to_bits(sparse.signs),
            "heavy_mask": "".join("1" if heavy else "0" for heavy in sparse.heavy_mask),
        },
    }

def from_document(document : dict) -> ObliviousPerturbation:
    """Rebuilds a perturbation from its JSON document"""
    if document.get("format") != FORMAT_NAME:
        raise ValueError(f"not an {FORMAT_NAME} document")
    if document.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported version {document.get('version')}, expected {FORMAT_VERSION}")
    n = int(document["n"])
    entry = document["pattern"]["entry_family"]
    entry_family = KWiseSignFamily(int(entry["k"]), get_context(int(entry["m"])), tuple(int(c) for c in entry["coeffs"]))
    pattern = PatternMatrix(
        n, entry_family,
        np.array(document["pattern"]["row_coeffs"], dtype=np.uint64),
        np.array(document["pattern"]["col_coeffs"], dtype=np.uint64),
        int(document["pattern"]["local_degree"]))
    dense = DensePerturbation(
        pattern,
        bits_to_signs(document["dense"]["d1"]),
        bits_to_signs(document["dense"]["d2"]),
        float(document["dense"]["rho"]))
    section = document["sparse"]
    k = int(section["K"])
    sparse = SparsePerturbation(
        n, k, int(section["L"]),
        np.array(section["subsets"], dtype=np.int64),
        bits_to_signs(section["signs"]).reshape(n, k))
    stored_mask = np.frombuffer(section["heavy_mask"].encode("ascii"), dtype=np.uint8) == ord("1")
    if not np.array_equal(stored_mask, sparse.heavy_mask):
        raise ValueError("stored heavy-row mask disagrees with the stored subsets")
    return ObliviousPerturbation(
        dense, sparse,
        float(document["eps"]), float(document["delta"]),
        PerturbationSettings.from_dict(document["settings"]),
        {key: int(value) for key, value in document["bit_report"].items()})

def write_atomic(path : str | Path, text : str) -> None:
    """Writes text through a temporary file in the target directory, no partial file is left on failure"""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    if not directory.is_dir():
        raise MatrixFileError(path, f"directory {directory} does not exist")
    handle, temporary = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(handle, "w", encoding="utf-8") as stream:
            stream.write(text)
        os.replace(temporary, path)
    except OSError as error:
        if os.path.exists(temporary):
            os.remove(temporary)
        raise MatrixFileError(path, str(error)) from error

def save_perturbation(perturbation : ObliviousPerturbation, path : str | Path) -> int:
    """Writes the perturbation as compact JSON and returns the byte count"""
    text = json.dumps(to_document(perturbation), separators=(",", ":"))
    write_atomic(path, text)
    logging.info("Saved perturbation n=%d to %s (%d bytes)", perturbation.n, path, len(text))
    return len(text.encode("utf-8"))

def load_perturbation(path : str | Path) -> ObliviousPerturbation:
    """Reads a perturbation written by save_perturbation"""
    try:
        with open(path, encoding="utf-8") as stream:
            document = json.load(stream)
        return from_document(document)
    except OSError as error:
        raise MatrixFileError(path, str(error)) from error
    except json.JSONDecodeError as error:
        raise MatrixFileError(path, error.msg, error.lineno) from error
    except (KeyError, TypeError, ValueError, ObliviousError) as error:
        raise MatrixFileError(path, f"malformed perturbation: {error}") from error
