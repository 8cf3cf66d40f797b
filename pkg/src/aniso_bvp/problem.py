"""JSON problem files: schema, loading and report envelopes."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema

from .energy import ProblemSpec
from .nonlinearity import HYPOTHESES, Nonlinearity, NodeFunction, Term
from .sequence_space import ExponentProfile

BUNDLED_PREFIX = "bundled:"

_number_list = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_coeff = {"oneOf": [{"type": "number"}, _number_list]}

_term = {
    "type": "object",
    "required": ["coef"],
    "additionalProperties": False,
    "properties": {
        "coef": {"type": "number"},
        "shift": {"type": "number"},
        "power": {
            "oneOf": [
                {"type": "integer", "minimum": 0},
                {
                    "type": "object",
                    "required": ["gamma"],
                    "additionalProperties": False,
                    "properties": {"gamma": {"type": "number", "exclusiveMinimum": 0}},
                },
            ]
        },
    },
}

SCHEMA = {
    "type": "object",
    "required": ["T", "p", "f"],
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "T": {"type": "integer", "minimum": 1},
        "p": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 1}, "minItems": 2},
        "lambda": {"type": "number", "exclusiveMinimum": 0},
        "f": {"type": "array", "items": {"type": "array", "items": _term}},
        "q": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
        "r": {"type": "number", "exclusiveMinimum": 0},
        "s": {"type": "number", "exclusiveMinimum": 0},
        "r_prime": {"type": "number", "exclusiveMinimum": 0},
        "s_prime": {"type": "number", "exclusiveMinimum": 0},
        **{
            h: {
                "type": "object",
                "required": list(names),
                "additionalProperties": False,
                "properties": {n: _coeff for n in names},
            }
            for h, (names, _, _) in HYPOTHESES.items()
        },
    },
}


class ProblemError(ValueError):
    """A problem file that fails validation; the message names the field."""


@dataclass(frozen=True)
class Problem:
    spec: ProblemSpec
    doc: dict
    digest: str
    source: str

    def get(self, key, default=None):
        return self.doc.get(key, default)


def _field_path(err: jsonschema.ValidationError) -> str:
    return "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)


def _term_from(obj: dict) -> Term:
    power = obj.get("power", 1)
    if isinstance(power, dict):
        return Term(float(obj["coef"]), float(obj.get("shift", 0.0)), gamma=float(power["gamma"]))
    return Term(float(obj["coef"]), float(obj.get("shift", 0.0)), power=int(power))


def validate(doc: dict) -> None:
    errors = sorted(jsonschema.Draft7Validator(SCHEMA).iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise ProblemError(f"{_field_path(e)}: {e.message}")
    T = doc["T"]
    if len(doc["p"]) not in (T + 1, T + 2):
        raise ProblemError(f"$.p: expected {T + 1} or {T + 2} entries for T={T}, got {len(doc['p'])}")
    if len(doc["f"]) != T:
        raise ProblemError(f"$.f: expected {T} term lists for T={T}, got {len(doc['f'])}")
    if "q" in doc and len(doc["q"]) != T:
        raise ProblemError(f"$.q: expected {T} entries, got {len(doc['q'])}")
    for h in HYPOTHESES:
        for key, val in doc.get(h, {}).items():
            if isinstance(val, list) and len(val) != T:
                raise ProblemError(f"$.{h}.{key}: expected {T} entries, got {len(val)}")


def spec_from_dict(doc: dict, lam: float | None = None, p_last: float | None = None) -> ProblemSpec:
    validate(doc)
    T = doc["T"]
    p = ExponentProfile(doc["p"])
    if p_last is not None:
        if not p_last > 1:
            raise ProblemError(f"--p-last must exceed 1, got {p_last}")
        p = p.with_value(T, p_last)
    nodes = tuple(NodeFunction(tuple(_term_from(t) for t in terms)) for terms in doc["f"])
    hyps = {h: doc[h] for h in HYPOTHESES if h in doc}
    try:
        nl = Nonlinearity(nodes, doc.get("q"), hyps)
        return ProblemSpec(T, p, nl, lam if lam is not None else doc.get("lambda", 1.0))
    except ValueError as exc:
        raise ProblemError(str(exc)) from exc


def read_source(path: str) -> tuple[bytes, str]:
    if path.startswith(BUNDLED_PREFIX):
        name = path[len(BUNDLED_PREFIX):]
        res = resources.files("aniso_bvp") / "data" / f"{name}.json"
        if not res.is_file():
            raise ProblemError(f"no bundled problem named {name!r}; available: {', '.join(bundled_names())}")
        return res.read_bytes(), path
    file = Path(path)
    if not file.is_file():
        raise ProblemError(f"problem file not found: {path}")
    return file.read_bytes(), str(file)


def bundled_names() -> list:
    root = resources.files("aniso_bvp") / "data"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_problem(path: str, lam: float | None = None, p_last: float | None = None) -> Problem:
    """Read, validate and build a problem; ``bundled:<name>`` picks a packaged file."""
    raw, source = read_source(path)
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProblemError(f"{source}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ProblemError("$: a problem file must hold a JSON object")
    spec = spec_from_dict(doc, lam, p_last)
    return Problem(spec, doc, hashlib.sha256(raw).hexdigest(), source)
