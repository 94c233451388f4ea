"""System file serialization used by the command-line front end.

Primary format: a JSON object with fields n, m, mode and the matrices E, A,
B, C, D as row-major nested arrays (written with full round-trip precision),
plus an optional ``ph`` block carrying J, R, Q, F, P, S, N, Z.  A secondary
reader accepts a small manifest pointing at one MatrixMarket file per matrix:
``{"format": "matrixmarket", "mode": ..., "files": {"A": "a.mtx", ...}}``.
"""

from __future__ import annotations

import json
import os

import numpy as np
import scipy.io

from .model import LtiSystem, PhForm

__all__ = ["load_system", "save_system", "system_to_dict", "ph_from_dict", "ph_to_dict"]

_SYSTEM_KEYS = ("E", "A", "B", "C", "D")
_PH_KEYS = ("J", "R", "Q", "F", "P", "S", "N")


def _matrix_from_json(obj, name: str) -> np.ndarray:
    arr = np.array(obj, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"matrix {name} must be a nested (row-major) array")
    return arr


def system_to_dict(sys: LtiSystem, ph: PhForm | None = None) -> dict:
    mode = ph.mode if ph is not None else ("standard" if sys.standard else "descriptor")
    out = {"n": sys.n, "m": sys.m, "mode": mode}
    for key, mat in zip(_SYSTEM_KEYS, sys.matrices()):
        out[key] = mat.tolist()
    if ph is not None:
        out["ph"] = ph_to_dict(ph)
    return out


def ph_to_dict(ph: PhForm) -> dict:
    out = {key: getattr(ph, key).tolist() for key in _PH_KEYS}
    if ph.Z is not None:
        out["Z"] = ph.Z.tolist()
    out["mode"] = ph.mode
    return out


def ph_from_dict(obj: dict) -> PhForm:
    missing = [k for k in _PH_KEYS if k not in obj]
    if missing:
        raise ValueError(f"ph block is missing matrices: {', '.join(missing)}")
    mats = {k: _matrix_from_json(obj[k], k) for k in _PH_KEYS}
    mode = obj.get("mode", "descriptor" if "Z" in obj else "standard")
    z = _matrix_from_json(obj["Z"], "Z") if "Z" in obj else None
    return PhForm(Z=z, mode=mode, **mats)


def _load_matrixmarket(doc: dict, base_dir: str) -> dict[str, np.ndarray]:
    files = doc["files"]
    mats = {}
    for key in _SYSTEM_KEYS:
        if key not in files:
            raise ValueError(f"matrixmarket manifest is missing an entry for {key}")
        path = os.path.join(base_dir, files[key])
        mat = scipy.io.mmread(path)
        mats[key] = np.asarray(mat.todense() if hasattr(mat, "todense") else mat,
                               dtype=float)
    return mats


def load_system(path: str) -> tuple[LtiSystem, PhForm | None]:
    """Read a system file; returns the system and its optional PH block."""
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError("system file must contain a JSON object")
    if doc.get("format") == "matrixmarket":
        mats = _load_matrixmarket(doc, os.path.dirname(os.path.abspath(path)))
    else:
        missing = [k for k in _SYSTEM_KEYS if k not in doc]
        if missing:
            raise ValueError(f"system file is missing matrices: {', '.join(missing)}")
        mats = {k: _matrix_from_json(doc[k], k) for k in _SYSTEM_KEYS}
    mode = doc.get("mode", "descriptor")
    if mode not in ("standard", "descriptor"):
        raise ValueError(f"mode must be 'standard' or 'descriptor', got {mode!r}")
    sys = LtiSystem(mats["E"], mats["A"], mats["B"], mats["C"], mats["D"],
                    standard=(mode == "standard"))
    for key, size in (("n", sys.n), ("m", sys.m)):
        if key in doc and int(doc[key]) != size:
            raise ValueError(f"declared {key}={doc[key]} does not match matrices ({size})")
    ph = ph_from_dict(doc["ph"]) if "ph" in doc else None
    return sys, ph


def save_system(path: str, sys: LtiSystem, ph: PhForm | None = None) -> None:
    """Write a system (and optional PH block) as JSON with full precision."""
    with open(path, "w") as fh:
        json.dump(system_to_dict(sys, ph), fh, indent=1)
        fh.write("\n")
