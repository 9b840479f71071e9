"""Point-set files.

Text format, version 1::

    FQSET 1 <p> <k> <modulus> <d> <n>
    <x_1> ... <x_d>        (n lines, canonical integers, sorted by index)

``<modulus>`` is the comma-separated coefficient list of the field modulus,
lowest degree first and including the leading 1 (``1,0,1`` is x^2 + 1).

The JSON-lines mirror has a header object followed by one coordinate array
per line.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import BadHeader, BadModulus, CoordinateOutOfRange, FqdistError, SizeMismatch
from .ffield import FieldSpec, canonical_modulus, is_prime, make_field
from .vecspace import PointSet

MAGIC = "FQSET"
VERSION = 1


def field_from_header(p: int, k: int, modulus) -> FieldSpec:
    if not is_prime(p) or k < 1:
        raise BadHeader(f"invalid field parameters p={p} k={k}")
    modulus = tuple(int(c) for c in modulus)
    try:
        if modulus == canonical_modulus(p, k):
            return make_field(p, k)
        return FieldSpec(p, k, modulus)
    except BadModulus:
        raise
    except FqdistError as exc:
        raise BadModulus(str(exc)) from exc


def dumps(E: PointSet) -> str:
    f = E.field
    mod = ",".join(str(c) for c in f.modulus)
    lines = [f"{MAGIC} {VERSION} {f.p} {f.k} {mod} {E.d} {E.size}"]
    lines += [" ".join(str(int(c)) for c in row) for row in E.coords]
    return "\n".join(lines) + "\n"


def _points_to_set(field: FieldSpec, d: int, n: int, rows: list[list[int]]) -> PointSet:
    if len(rows) != n:
        raise SizeMismatch(f"header promises {n} points, found {len(rows)}")
    if any(len(r) != d for r in rows):
        raise SizeMismatch(f"every point needs {d} coordinates")
    arr = np.array(rows, dtype=np.int64).reshape(n, d)
    if arr.size and (arr.min() < 0 or arr.max() >= field.q):
        raise CoordinateOutOfRange(f"coordinate outside [0, {field.q})")
    E = PointSet.from_coords(field, arr) if n else PointSet(field, d, [])
    if E.size != n:
        raise SizeMismatch(f"{n - E.size} duplicate points")
    return E


def loads(text: str) -> PointSet:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise BadHeader("empty file")
    head = lines[0].split()
    if len(head) != 7 or head[0] != MAGIC:
        raise BadHeader(f"not an FQSET header: {lines[0]!r}")
    try:
        version, p, k = int(head[1]), int(head[2]), int(head[3])
        modulus = [int(c) for c in head[4].split(",")]
        d, n = int(head[5]), int(head[6])
    except ValueError as exc:
        raise BadHeader(f"malformed header: {lines[0]!r}") from exc
    if version != VERSION:
        raise BadHeader(f"unsupported version {version}")
    if d < 1 or n < 0:
        raise BadHeader("dimension and size must be positive")
    field = field_from_header(p, k, modulus)
    try:
        rows = [[int(c) for c in ln.split()] for ln in lines[1:]]
    except ValueError as exc:
        raise CoordinateOutOfRange("non-integer coordinate") from exc
    return _points_to_set(field, d, n, rows)


def dumps_jsonl(E: PointSet) -> str:
    f = E.field
    head = {"format": "fqset", "version": VERSION, "p": f.p, "k": f.k,
            "modulus": list(f.modulus), "d": E.d, "n": E.size}
    lines = [json.dumps(head)] + [json.dumps([int(c) for c in row]) for row in E.coords]
    return "\n".join(lines) + "\n"


def loads_jsonl(text: str) -> PointSet:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    try:
        head = json.loads(lines[0])
        p, k, modulus, d, n = head["p"], head["k"], head["modulus"], head["d"], head["n"]
    except (IndexError, ValueError, KeyError, TypeError) as exc:
        raise BadHeader("malformed JSON-lines header") from exc
    if head.get("format") != "fqset" or head.get("version") != VERSION:
        raise BadHeader("unsupported JSON-lines header")
    field = field_from_header(int(p), int(k), modulus)
    try:
        rows = [json.loads(ln) for ln in lines[1:]]
    except ValueError as exc:
        raise CoordinateOutOfRange("malformed point line") from exc
    return _points_to_set(field, int(d), int(n), rows)


def save_pointset(E: PointSet, path) -> None:
    path = Path(path)
    text = dumps_jsonl(E) if path.suffix == ".jsonl" else dumps(E)
    path.write_text(text)


def load_pointset(path) -> PointSet:
    path = Path(path)
    text = path.read_text()
    return loads_jsonl(text) if path.suffix == ".jsonl" else loads(text)
