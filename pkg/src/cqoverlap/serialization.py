"""JSON and CSV file formats.

Complex scalars are ``[re, im]`` pairs and matrices nested row-major lists
of them. Python's float repr is the shortest string that round-trips, so
instances survive save/load bit for bit.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .channel import CQChannel
from .errors import TableError, ValidationError
from .linalg import validate_density
from .protocol import AcceptanceTable

SCHEMA_VERSION = 1
CSV_FIELDS = ("instance_seed", "n", "d", "k", "lhs", "rhs", "margin")


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def vector_to_json(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def matrix_from_json(data) -> np.ndarray:
    try:
        arr = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"matrix is not a nested array of [re, im] pairs: {exc}") from None
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValidationError(f"matrix must have shape (rows, cols, 2), got {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def channel_to_json(ch: CQChannel) -> dict:
    return {"n": ch.n, "d": ch.d, "sigmas": [matrix_to_json(s.mat) for s in ch.sigmas]}


def channel_from_json(data: dict) -> CQChannel:
    if not isinstance(data, dict) or not {"n", "d", "sigmas"} <= set(data):
        raise ValidationError("channel must be an object with keys n, d, sigmas")
    n, d, sigmas = data["n"], data["d"], data["sigmas"]
    if not isinstance(sigmas, list) or len(sigmas) != n:
        raise ValidationError(f"channel declares n={n} but lists {len(sigmas) if isinstance(sigmas, list) else '?'} sigmas")
    mats = []
    for idx, raw in enumerate(sigmas):
        m = matrix_from_json(raw)
        if m.shape != (d, d):
            raise ValidationError(f"sigma[{idx}] has shape {m.shape}, expected ({d}, {d})")
        try:
            mats.append(validate_density(m))
        except ValidationError as exc:
            raise ValidationError(f"sigma[{idx}]: {type(exc).__name__}: {exc}") from exc
    return CQChannel(mats)


def instance_to_json(ch: CQChannel, provenance: dict | None = None) -> dict:
    doc = {"schema_version": SCHEMA_VERSION, "channel": channel_to_json(ch)}
    if provenance is not None:
        doc["provenance"] = provenance
    return doc


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def save_instance(path, ch: CQChannel, provenance: dict | None = None):
    Path(path).write_text(dumps(instance_to_json(ch, provenance)))


def load_instance(path) -> tuple[CQChannel, dict | None]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("schema_version") != SCHEMA_VERSION:
        raise ValidationError(f"{path}: expected schema_version {SCHEMA_VERSION}")
    return channel_from_json(doc.get("channel")), doc.get("provenance")


def table_from_json(doc) -> AcceptanceTable:
    """Parse ``{"bits": m, "probs": {...}}`` or a bare ``{bitstring: p}`` map."""
    if not isinstance(doc, dict):
        raise TableError("acceptance table must be a JSON object")
    if "probs" in doc:
        probs = doc["probs"]
        bits = doc.get("bits")
        if not isinstance(probs, dict):
            raise TableError("probs must be an object")
        if bits is None:
            bits = _infer_bits(probs)
    else:
        probs = doc
        bits = _infer_bits(probs)
    return AcceptanceTable(bits, dict(probs))


def _infer_bits(probs: dict) -> int:
    lengths = {len(k) for k in probs}
    if len(lengths) != 1:
        raise TableError("cannot infer bit length: keys are empty or of mixed length")
    return lengths.pop()


def load_table(path) -> AcceptanceTable:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise TableError(f"{path}: not valid JSON: {exc}") from None
    return table_from_json(doc)


def write_scan_csv(path, records):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_FIELDS)
        for r in records:
            w.writerow([r.instance_seed, r.n, r.d, r.k, repr(r.lhs), repr(r.rhs), repr(r.margin)])
