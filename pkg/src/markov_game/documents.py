"""Instance and report documents (JSON).

An instance document looks like::

    {
      "pi": [0.5, 0.5],
      "generators": [[[0, 1], [3, 0]], [[0, 3], [1, 0]]],
      "labels": ["L", "L_pi"],
      "divergence": "kl",
      "options": {"iters": 1000}
    }

``pi`` and ``generators`` are required; generator diagonals may be anything
(they are recomputed from the off-diagonals).  ``labels``, ``divergence``
and ``options`` are optional.  Parse failures raise :class:`ParseError`
carrying the path of the offending field, e.g. ``generators[1][0][1]``.

Reports are plain dictionaries with the keys ``command``, ``inputs_digest``,
``results``, ``trace``, ``warnings`` and ``metadata``.  Everything except
``metadata`` is a deterministic function of the inputs.  Floats are written
with ``repr``, the shortest decimal string that reads back to the same
double (at most 17 significant digits); non-finite values become the strings
``"inf"``, ``"-inf"`` and ``"nan"``.
"""

import datetime
import hashlib
import json
import math
import numbers
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from .divergence import parse_divergence
from .errors import GameError, ParseError
from .generators import (
    DEFAULT_TOL,
    validate_distribution,
    validate_family,
    validate_generator,
    zero_row_sums,
)

__version__ = "0.1.0"

_NONFINITE = {"inf": math.inf, "-inf": -math.inf, "nan": math.nan}


@dataclass
class Instance:
    pi: np.ndarray
    family: np.ndarray
    labels: List[str]
    divergence: Optional[str] = None
    options: Dict[str, Any] = field(default_factory=dict)

    @property
    def n(self):
        return self.family.shape[0]

    @property
    def dim(self):
        return self.pi.size

    def to_document(self):
        doc = {
            "pi": self.pi.tolist(),
            "generators": self.family.tolist(),
            "labels": list(self.labels),
        }
        if self.divergence is not None:
            doc["divergence"] = self.divergence
        if self.options:
            doc["options"] = dict(self.options)
        return doc


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (numbers.Real, str)):
        raise ParseError(path, f"expected a number, got {type(value).__name__}")
    if isinstance(value, str):
        if value not in _NONFINITE:
            raise ParseError(path, f"expected a number, got string {value!r}")
        return _NONFINITE[value]
    return float(value)


def _vector(value, path):
    if not isinstance(value, list):
        raise ParseError(path, "expected an array")
    return np.array([_number(v, f"{path}[{i}]") for i, v in enumerate(value)])


def _matrix(value, path, d):
    if not isinstance(value, list) or len(value) != d:
        raise ParseError(path, f"expected a {d}x{d} array")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != d:
            raise ParseError(f"{path}[{i}]", f"expected a row of length {d}")
        rows.append([_number(v, f"{path}[{i}][{j}]") for j, v in enumerate(row)])
    return np.array(rows)


def parse_instance(doc, tol=DEFAULT_TOL):
    """Build an :class:`Instance` from a decoded JSON document."""
    if not isinstance(doc, dict):
        raise ParseError("$", "instance must be a JSON object")
    for key in ("pi", "generators"):
        if key not in doc:
            raise ParseError(key, "missing required field")
    pi = _vector(doc["pi"], "pi")
    try:
        pi = validate_distribution(pi, tol=max(tol, 1e-12))
    except GameError as exc:
        raise ParseError("pi", str(exc)) from exc
    gens = doc["generators"]
    if not isinstance(gens, list) or not gens:
        raise ParseError("generators", "expected a non-empty array of matrices")
    mats = [_matrix(G, f"generators[{k}]", pi.size) for k, G in enumerate(gens)]
    for k, G in enumerate(mats):
        if not np.all(np.isfinite(G[~np.eye(pi.size, dtype=bool)])):
            raise ParseError(f"generators[{k}]", "off-diagonal rates must be finite")
        try:
            validate_generator(zero_row_sums(G), tol=tol)
        except GameError as exc:
            raise ParseError(f"generators[{k}]", str(exc)) from exc
    try:
        family = validate_family(mats, tol=tol, recompute_diagonal=True)
    except GameError as exc:
        raise ParseError("generators", str(exc)) from exc

    labels = doc.get("labels")
    if labels is None:
        labels = [f"L{k}" for k in range(len(mats))]
    elif (
        not isinstance(labels, list)
        or len(labels) != len(mats)
        or not all(isinstance(s, str) for s in labels)
    ):
        raise ParseError("labels", f"expected {len(mats)} strings")

    div = doc.get("divergence")
    if div is not None:
        if not isinstance(div, str):
            raise ParseError("divergence", "expected a divergence name")
        try:
            parse_divergence(div)
        except GameError as exc:
            raise ParseError("divergence", str(exc)) from exc

    options = doc.get("options", {})
    if not isinstance(options, dict):
        raise ParseError("options", "expected an object")
    return Instance(pi, family, list(labels), div, dict(options))


def load_instance(path, tol=DEFAULT_TOL):
    """Read and parse an instance file."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError("$", f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError("$", f"invalid JSON at line {exc.lineno} column {exc.colno}") from exc
    return parse_instance(doc, tol=tol)


def to_jsonable(obj):
    """Convert arrays, numpy scalars and non-finite floats for JSON output."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def from_jsonable(obj):
    """Inverse of :func:`to_jsonable` for numbers: ``"inf"`` etc. become floats."""
    if isinstance(obj, dict):
        return {k: from_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [from_jsonable(v) for v in obj]
    if isinstance(obj, str) and obj in _NONFINITE:
        return _NONFINITE[obj]
    return obj


def canonical_json(obj):
    return json.dumps(to_jsonable(obj), sort_keys=True, separators=(",", ":"), allow_nan=False)


def digest(obj):
    """SHA-256 of the canonical JSON encoding of ``obj``."""
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def make_report(command, inputs, results, trace=None, warnings=None, metadata=True):
    """Assemble a report document.

    ``inputs`` is anything JSON-able describing the invocation (instance
    document plus flags); only its digest is stored.
    """
    report = {
        "command": command,
        "inputs_digest": digest(inputs),
        "results": to_jsonable(results),
        "trace": to_jsonable(trace or []),
        "warnings": list(warnings or []),
    }
    if metadata:
        report["metadata"] = {
            "tool": "markov-game",
            "version": __version__,
            "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        }
    return report


def dumps_report(report):
    return json.dumps(to_jsonable(report), indent=2, allow_nan=False) + "\n"


def loads_report(text):
    return from_jsonable(json.loads(text))
