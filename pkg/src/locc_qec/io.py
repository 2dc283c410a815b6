"""Problem files and reports.

A problem file is JSON with complex entries written as ``[re, im]`` pairs::

    {
      "schema_version": "1.0",
      "kind": "state_set",
      "dims": [2, 2],
      "matrices": {"I": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]], ...},
      "states": ["I", "X"],
      "options": {"seed": 0, "tol_abs": 1e-10}
    }

``kind`` selects the remaining fields:

* ``state_set``: ``states`` names ``b x a`` operators ``B_i`` (or, with
  ``"state_form": "vector"``, length ``a*b`` state vectors); alternatively
  ``complement_of`` names one state vector whose orthogonal complement is
  the set.  Optional ``alice_basis`` names an ``a x r`` matrix.
* ``code_space``: ``code`` names an ``(a*b) x d`` matrix of code vectors and
  ``noise`` lists Kraus operator names; or ``states`` plus ``alice_basis``.
* ``channel_check``: ``states`` plus ``alice_basis``.
* ``stabilizer_params``: ``params`` with integers ``n`` and ``k``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bipartite import StateSet, from_operator, from_vector
from .errors import DimensionMismatch, LoccQecError, ParseError
from .locc import ProtocolWitness

__all__ = [
    "SCHEMA_VERSION",
    "KINDS",
    "Problem",
    "encode_matrix",
    "decode_matrix",
    "load_problem",
    "parse_problem",
    "problem_to_dict",
    "witness_to_dict",
    "witness_from_dict",
    "dump_report",
    "render_text",
]

SCHEMA_VERSION = "1.0"
KINDS = ("state_set", "code_space", "stabilizer_params", "channel_check")


@dataclass(eq=False)
class Problem:
    kind: str
    dims: tuple | None
    matrices: dict
    raw: dict
    options: dict = field(default_factory=dict)

    def matrix(self, name, where: str) -> np.ndarray:
        if not isinstance(name, str) or name not in self.matrices:
            raise ParseError(f"{where}: unknown matrix {name!r}")
        return self.matrices[name]

    def names(self, key: str) -> list:
        val = self.raw.get(key)
        if not isinstance(val, list) or not val:
            raise ParseError(f"field {key!r} must be a non-empty list of matrix names")
        return val

    def states(self) -> StateSet:
        a, b = self._dims()
        if "complement_of" in self.raw:
            from .fixtures import complement_states

            return complement_states(self.complement_target())
        form = self.raw.get("state_form", "operator")
        states = []
        for idx, name in enumerate(self.names("states")):
            m = self.matrix(name, f"states[{idx}]")
            try:
                if form == "vector":
                    states.append(from_vector(m.ravel(), a, b))
                elif form == "operator":
                    states.append(from_operator(m, a, b))
                else:
                    raise ParseError(f"state_form must be 'operator' or 'vector', got {form!r}")
            except (DimensionMismatch, LoccQecError) as exc:
                if isinstance(exc, ParseError):
                    raise
                raise type(exc)(f"states[{idx}] ({name!r}): {exc}") from exc
        return StateSet(states)

    def complement_target(self):
        a, b = self._dims()
        name = self.raw["complement_of"]
        m = self.matrix(name, "complement_of")
        return from_vector(m.ravel(), a, b)

    def alice_basis(self) -> np.ndarray | None:
        if "alice_basis" not in self.raw:
            return None
        m = self.matrix(self.raw["alice_basis"], "alice_basis")
        a, _ = self._dims()
        if m.shape[0] != a:
            raise DimensionMismatch(f"alice_basis ({self.raw['alice_basis']!r}) has {m.shape[0]} rows, expected {a}")
        return m

    def _dims(self) -> tuple:
        if self.dims is None:
            raise ParseError("field 'dims' is required for this kind")
        return self.dims


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(data, name: str = "?") -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise ParseError(f"matrix {name!r}: expected a non-empty list of rows")
    rows = []
    width = None
    for r, row in enumerate(data):
        if not isinstance(row, list):
            raise ParseError(f"matrix {name!r}: row {r} is not a list")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f"matrix {name!r}: row {r} has length {len(row)}, expected {width}")
        vals = []
        for c, entry in enumerate(row):
            if isinstance(entry, (int, float)) and not isinstance(entry, bool):
                vals.append(complex(entry))
            elif (isinstance(entry, list) and len(entry) == 2
                  and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)):
                vals.append(complex(entry[0], entry[1]))
            else:
                raise ParseError(f"matrix {name!r}: entry ({r}, {c}) must be [re, im]")
        rows.append(vals)
    m = np.asarray(rows, dtype=np.complex128)
    if not np.all(np.isfinite(m)):
        raise ParseError(f"matrix {name!r}: non-finite entry")
    return m


def parse_problem(data: dict) -> Problem:
    if not isinstance(data, dict):
        raise ParseError("problem file must hold a JSON object")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION!r})")
    kind = data.get("kind")
    if kind not in KINDS:
        raise ParseError(f"field 'kind' must be one of {', '.join(KINDS)}; got {kind!r}")
    dims = data.get("dims")
    if dims is not None:
        if (not isinstance(dims, list) or len(dims) != 2
                or not all(isinstance(x, int) and x > 0 for x in dims)):
            raise ParseError("field 'dims' must be two positive integers")
        dims = tuple(dims)
    mats_raw = data.get("matrices", {})
    if not isinstance(mats_raw, dict):
        raise ParseError("field 'matrices' must be an object")
    matrices = {name: decode_matrix(m, name) for name, m in mats_raw.items()}
    options = data.get("options", {}) or {}
    if not isinstance(options, dict):
        raise ParseError("field 'options' must be an object")
    return Problem(kind, dims, matrices, data, options)


def load_problem(path) -> Problem:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return parse_problem(data)


def problem_to_dict(kind: str, dims=None, matrices=None, options=None, **fields) -> dict:
    """Build a problem-file dictionary from numpy matrices."""
    out = {"schema_version": SCHEMA_VERSION, "kind": kind}
    if dims is not None:
        out["dims"] = [int(dims[0]), int(dims[1])]
    out["matrices"] = {k: encode_matrix(v) for k, v in (matrices or {}).items()}
    out.update(fields)
    if options:
        out["options"] = options
    return out


def witness_to_dict(w: ProtocolWitness) -> dict:
    out = {
        "alice_basis": encode_matrix(w.alice_basis),
        "bob_bases": [encode_matrix(b) for b in w.bob_bases],
        "overlap": float(w.overlap),
    }
    if w.coefficients is not None:
        out["coefficients"] = encode_matrix(w.coefficients)
    return out


def witness_from_dict(d: dict) -> ProtocolWitness:
    if not isinstance(d, dict) or "alice_basis" not in d or "bob_bases" not in d:
        raise ParseError("witness must contain 'alice_basis' and 'bob_bases'")
    alice = decode_matrix(d["alice_basis"], "witness.alice_basis")
    bob = [decode_matrix(b, f"witness.bob_bases[{i}]") for i, b in enumerate(d["bob_bases"])]
    coeffs = decode_matrix(d["coefficients"], "witness.coefficients") if "coefficients" in d else None
    return ProtocolWitness(alice, bob, coeffs, float(d.get("overlap", float("nan"))))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return encode_matrix(x)
        return x.tolist()
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def dump_report(report: dict, fmt: str = "json") -> str:
    """Serialise a report deterministically (sorted keys, no timestamps)."""
    if fmt == "text":
        return render_text(report)
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


def render_text(report: dict) -> str:
    lines = []
    for key in ("command", "status", "exit_code"):
        if key in report:
            lines.append(f"{key}: {report[key]}")
    for key in sorted(report):
        if key in ("command", "status", "exit_code", "witness", "provenance", "diagnostics"):
            continue
        val = _jsonable(report[key])
        lines.append(f"{key}: {json.dumps(val, sort_keys=True)}")
    if "witness" in report and report["witness"] is not None:
        lines.append(f"witness: present (max defect {report['witness'].get('overlap', float('nan')):.3e})")
    for d in report.get("diagnostics", []):
        lines.append(f"  - {d}")
    prov = report.get("provenance", {})
    if prov:
        lines.append("provenance: " + ", ".join(f"{k}={prov[k]}" for k in sorted(prov)))
    return "\n".join(lines) + "\n"
