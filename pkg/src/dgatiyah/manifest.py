"""JSON manifests describing a dg-manifold, optional connection, bundle or Lie algebra."""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Optional, Union

import jsonschema

from .algebra import GradedContext, ParseError
from .cohomology import LieAlgebraData, ce_manifold
from .connections import Connection, DegreeError, DgVectorBundle
from .vector_fields import DgManifold, VectorField

_EXPR_MAP = {"type": "object", "additionalProperties": {"type": "string"}}
_COORDS = {
    "type": "array",
    "items": {
        "type": "object",
        "required": ["name", "degree"],
        "additionalProperties": False,
        "properties": {"name": {"type": "string"}, "degree": {"type": "integer"}},
    },
}
_RATIONAL = {"anyOf": [{"type": "integer"}, {"type": "string", "pattern": r"^\s*-?\d+(\s*/\s*\d+)?\s*$"}]}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "coordinates": _COORDS,
        "Q": _EXPR_MAP,
        "connection": _EXPR_MAP,
        "bundle": {
            "type": "object",
            "required": ["frame"],
            "additionalProperties": False,
            "properties": {"frame": _COORDS, "q_matrix": _EXPR_MAP, "connection": _EXPR_MAP},
        },
        "lie_algebra": {
            "type": "object",
            "required": ["dim", "structure_constants"],
            "additionalProperties": False,
            "properties": {
                "dim": {"type": "integer", "minimum": 0},
                "structure_constants": {
                    "type": "array",
                    "items": {
                        "type": "array",
                        "prefixItems": [{"type": "integer", "minimum": 1}] * 3 + [_RATIONAL],
                        "minItems": 4,
                        "maxItems": 4,
                    },
                },
            },
        },
    },
    "oneOf": [
        {"required": ["coordinates", "Q"], "not": {"required": ["lie_algebra"]}},
        {"required": ["lie_algebra"], "not": {"anyOf": [{"required": ["coordinates"]},
                                                         {"required": ["Q"]}]}},
    ],
}


class ManifestError(ValueError):
    """Invalid manifest input; ``pointer`` locates the offending JSON value."""

    def __init__(self, message: str, pointer: str = ""):
        self.pointer = pointer
        super().__init__(f"{pointer or '/'}: {message}")


@dataclass
class Manifest:
    name: str
    manifold: DgManifold
    connection: Connection
    lie_algebra: Optional[LieAlgebraData] = None
    bundle: Optional[DgVectorBundle] = None
    bundle_connection: Optional[Connection] = None
    raw: Optional[dict] = None


def _pointer(path) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


def _resolve(key: str, names, pointer: str) -> int:
    key = key.strip()
    if key in names:
        return names.index(key)
    if key.isdigit() and 1 <= int(key) <= len(names):
        return int(key) - 1
    raise ManifestError(f"unknown name or index {key!r}", pointer)


def _parse(ctx: GradedContext, text: str, pointer: str):
    try:
        return ctx.parse(text)
    except ParseError as e:
        raise ManifestError(f"parse error at position {e.pos}: {e}", pointer) from None


def _triples(table: dict, first, rest, ctx, pointer: str) -> dict:
    """Map "k,i,j" -> expr to {(i, j, k): poly}, with k indexing ``first`` and i, j from ``rest``."""
    out = {}
    for key, text in table.items():
        ptr = f"{pointer}/{_pointer([key])[1:]}"
        parts = key.split(",")
        if len(parts) != 3:
            raise ManifestError("key must have the form 'k,i,j'", ptr)
        k = _resolve(parts[0], first, ptr)
        i = _resolve(parts[1], rest[0], ptr)
        j = _resolve(parts[2], rest[1], ptr)
        out[(i, j, k)] = _parse(ctx, text, ptr)
    return out


def load_dict(data: dict, name: str = "") -> Manifest:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ManifestError(err.message, _pointer(err.absolute_path))
    name = data.get("name", name)
    lie = None
    if "lie_algebra" in data:
        la = data["lie_algebra"]
        try:
            lie = LieAlgebraData.from_constants(
                la["dim"], [(i, j, k, Fraction(str(v))) for i, j, k, v in la["structure_constants"]], name)
        except ValueError as e:
            raise ManifestError(str(e), "/lie_algebra/structure_constants") from None
        M = ce_manifold(lie, check=False)
    else:
        try:
            ctx = GradedContext([(c["name"], c["degree"]) for c in data["coordinates"]])
        except ValueError as e:
            raise ManifestError(str(e), "/coordinates") from None
        coeffs = [ctx.zero()] * len(ctx)
        for key, text in data["Q"].items():
            ptr = "/Q" + _pointer([key])
            coeffs[_resolve(key, list(ctx.names), ptr)] = _parse(ctx, text, ptr)
        M = DgManifold(ctx, VectorField(ctx, coeffs))
    ctx = M.ctx
    names = list(ctx.names)
    gamma = {(i, b, a): p for (i, b, a), p in
             _triples(data.get("connection", {}), names, (names, names), ctx, "/connection").items()}
    try:
        nabla = Connection(ctx, gamma)
    except DegreeError as e:
        raise ManifestError(str(e), "/connection") from None
    bundle = bundle_conn = None
    if "bundle" in data:
        b = data["bundle"]
        frame = [(f["name"], f["degree"]) for f in b["frame"]]
        fnames = [n for n, _ in frame]
        q = {}
        for key, text in b.get("q_matrix", {}).items():
            ptr = "/bundle/q_matrix" + _pointer([key])
            parts = key.split(",")
            if len(parts) != 2:
                raise ManifestError("key must have the form 'a,b'", ptr)
            q[(_resolve(parts[0], fnames, ptr), _resolve(parts[1], fnames, ptr))] = _parse(ctx, text, ptr)
        try:
            bundle = DgVectorBundle(M, frame, q)
        except DegreeError as e:
            raise ManifestError(str(e), "/bundle/q_matrix") from None
        bg = _triples(b.get("connection", {}), fnames, (names, fnames), ctx, "/bundle/connection")
        try:
            bundle_conn = Connection(ctx, bg, frame_degrees=bundle.frame)
        except DegreeError as e:
            raise ManifestError(str(e), "/bundle/connection") from None
    return Manifest(name, M, nabla, lie, bundle, bundle_conn, data)


def load(source: Union[str, Path, dict]) -> Manifest:
    """Load a manifest from a path, a shipped manifest name, or an already-parsed dict."""
    if isinstance(source, dict):
        return load_dict(source)
    path = Path(source)
    if not path.exists() and not path.suffix:
        shipped = resources.files("dgatiyah") / "manifests" / f"{source}.json"
        if shipped.is_file():
            return load_dict(json.loads(shipped.read_text()), str(source))
    try:
        text = path.read_text()
    except OSError as e:
        raise ManifestError(f"cannot read manifest: {e.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ManifestError(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from None
    return load_dict(data, path.stem)


def shipped_manifests() -> list:
    root = resources.files("dgatiyah") / "manifests"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))
