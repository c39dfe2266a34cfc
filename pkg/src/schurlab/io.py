"""JSON formats for matrices, subspaces, GK profiles and Schur forms.

Matrix JSON: ``{"rows": r, "cols": c, "data": [[re, im], ...]}``, row-major.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .gaps import Subspace
from .jordan import GkProfile
from .schur import SchurForm


class ParseError(InvalidInputError):
    """Malformed input file; the message carries the location."""


def _entry(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise InvalidInputError("expected a 2-D array")
    return {"rows": m.shape[0], "cols": m.shape[1],
            "data": [_entry(z) for z in m.reshape(-1)]}


def matrix_from_json(obj, where: str = "matrix") -> np.ndarray:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object with rows, cols and data")
    missing = [k for k in ("rows", "cols", "data") if k not in obj]
    if missing:
        raise ParseError(f"{where}: missing key(s) {', '.join(missing)}")
    rows, cols, data = obj["rows"], obj["cols"], obj["data"]
    if not (isinstance(rows, int) and isinstance(cols, int)) or rows < 0 or cols < 0:
        raise ParseError(f"{where}: rows and cols must be non-negative integers")
    if not isinstance(data, list):
        raise ParseError(f"{where}: data must be a list of [re, im] pairs")
    if len(data) != rows * cols:
        raise ParseError(
            f"{where}: data has {len(data)} entries, expected rows*cols = {rows * cols}")
    out = np.empty(rows * cols, dtype=complex)
    for i, pair in enumerate(data):
        if (not isinstance(pair, list) or len(pair) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)):
            raise ParseError(f"{where}: entry {i} (row {i // max(cols, 1)}) is not [re, im]")
        if not all(math.isfinite(x) for x in pair):
            raise ParseError(f"{where}: entry {i} (row {i // max(cols, 1)}) is not finite")
        out[i] = complex(pair[0], pair[1])
    return out.reshape(rows, cols)


def _load_json(path) -> object:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        # Python's parser accepts NaN/Infinity literals; refuse them here.
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _reject_constant(name):
    raise ValueError(f"non-finite literal {name} is not allowed")


def parse_matrix_file(path) -> np.ndarray:
    """Read a matrix JSON file, validating shape and finiteness."""
    return matrix_from_json(_load_json(path), where=str(path))


def load_json(path) -> object:
    """Parse any JSON file with the same error reporting as matrix files."""
    return _load_json(path)


def write_matrix_file(path, m) -> None:
    Path(path).write_text(json.dumps(matrix_to_json(m)) + "\n")


def subspace_to_json(s: Subspace) -> dict:
    return {"ambient": s.ambient_dim, "basis": matrix_to_json(s.basis)}


def subspace_from_json(obj, where: str = "subspace") -> Subspace:
    if not isinstance(obj, dict) or "ambient" not in obj or "basis" not in obj:
        raise ParseError(f"{where}: expected an object with ambient and basis")
    b = matrix_from_json(obj["basis"], where=f"{where}.basis")
    if b.shape[0] != obj["ambient"]:
        raise ParseError(f"{where}: basis has {b.shape[0]} rows, ambient is {obj['ambient']}")
    return Subspace(b)


def gk_to_json(p: GkProfile) -> dict:
    return {
        "eigenvalues": [_entry(z) for z in p.eigenvalues],
        "blocks": [list(b) for b in p.block_sizes],
        "m": list(p.aggregate_m),
        "k": list(p.dual_k),
    }


def schur_to_json(s: SchurForm) -> dict:
    return {
        "u": matrix_to_json(s.u),
        "t": matrix_to_json(s.t),
        "chain": [matrix_to_json(b) for b in s.chain.blocks],
        "residual": s.residual,
    }


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, trailing newline)."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
