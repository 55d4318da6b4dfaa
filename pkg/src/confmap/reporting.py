"""Structured result records and deterministic serialization.

Verdicts from the boundary-condition batteries travel as
:class:`ConditionResult` values and are bundled into a
:class:`ConformalityReport`.  Serialization is deliberately hand-rolled:
reports must be byte-identical across runs with the same inputs, so JSON
floats are printed with a fixed 17-significant-digit format and field
order is the insertion order of the dicts built here, never a sort.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ._numerics import is_mp

__all__ = [
    "VERDICT_HOLDS",
    "VERDICT_FAILS",
    "VERDICT_UNDECIDED",
    "ConditionResult",
    "ConformalityReport",
    "csv_table",
    "dumps_canonical",
]

VERDICT_HOLDS = "holds"
VERDICT_FAILS = "fails"
VERDICT_UNDECIDED = "undecided"

_VERDICTS = (VERDICT_HOLDS, VERDICT_FAILS, VERDICT_UNDECIDED)

_CLASSIFICATIONS = ("strong", "weak-only", "none", "inconclusive")


def _plain_scalar(v):
    """Normalize numpy/mpmath scalars to builtin int/float/complex."""
    if is_mp(v):
        c = complex(v)
        return c.real if c.imag == 0.0 else c
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, float):
        return float(v)
    if isinstance(v, complex):
        return complex(v)
    return v


def _csv_cell(v) -> str:
    v = _plain_scalar(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, complex):
        return repr(v)
    if isinstance(v, str):
        if "," in v or "\n" in v:
            raise ValueError("CSV cells must not contain commas or newlines")
        return v
    raise TypeError(f"cannot render {type(v).__name__} as a CSV cell")


def csv_table(columns: Mapping[str, Sequence]) -> str:
    """Render named columns as CSV with a header row.

    Columns must all have the same length.  Floats use shortest
    round-trip formatting with '.' as the decimal separator; output ends
    with a newline.
    """
    names = list(columns)
    if not names:
        return ""
    lengths = {len(columns[name]) for name in names}
    if len(lengths) != 1:
        raise ValueError("CSV columns must have equal lengths")
    rows = lengths.pop()
    lines = [",".join(names)]
    for i in range(rows):
        lines.append(",".join(_csv_cell(columns[name][i]) for name in names))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ConditionResult:
    """One boundary-condition verdict with its numeric evidence.

    ``verdict`` is "holds" or "fails" only when the documented decision
    rule for the condition fired; anything short of that is "undecided".
    ``evidence`` maps column names to equal-length numeric traces.
    """

    condition: str
    verdict: str
    evidence: Mapping[str, Sequence] = field(default_factory=dict)
    note: str = ""

    def __post_init__(self) -> None:
        if self.verdict not in _VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")

    def evidence_csv(self) -> str:
        return csv_table(self.evidence)


@dataclass(frozen=True)
class ConformalityReport:
    """Consolidated boundary-behaviour classification for one map.

    ``angular_derivative`` is a complex estimate, the string "infinite"
    when the derivative quotients diverge, or None when no estimate was
    reached.  ``classification`` is one of strong / weak-only / none /
    inconclusive; contradictory battery verdicts force "inconclusive"
    and the contradiction is spelled out in ``diagnostic``.
    """

    map_text: str
    domain: str
    sigma: complex
    boundary_value: complex | None
    angular_derivative: complex | str | None
    classification: str
    conditions: tuple[ConditionResult, ...]
    diagnostic: str = ""

    def __post_init__(self) -> None:
        if self.classification not in _CLASSIFICATIONS:
            raise ValueError(f"unknown classification {self.classification!r}")

    def to_json_dict(self) -> dict:
        """Schema: map, sigma, boundary_value, angular_derivative,
        classification, conditions:[{id, verdict, evidence_csv}]."""
        conditions = []
        for c in self.conditions:
            entry = {
                "id": c.condition,
                "verdict": c.verdict,
                "evidence_csv": c.evidence_csv(),
            }
            if c.note:
                entry["note"] = c.note
            conditions.append(entry)
        out = {
            "map": {"expression": self.map_text, "domain": self.domain},
            "sigma": self.sigma,
            "boundary_value": self.boundary_value,
            "angular_derivative": self.angular_derivative,
            "classification": self.classification,
        }
        if self.diagnostic:
            out["diagnostic"] = self.diagnostic
        out["conditions"] = conditions
        return out


def _float_token(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _emit_json(obj, parts: list[str], level: int, indent: int) -> None:
    obj = _plain_scalar(obj)
    pad = " " * (indent * (level + 1))
    close = " " * (indent * level)
    if obj is None:
        parts.append("null")
    elif isinstance(obj, bool):
        parts.append("true" if obj else "false")
    elif isinstance(obj, int):
        parts.append(str(obj))
    elif isinstance(obj, float):
        parts.append(_float_token(obj))
    elif isinstance(obj, complex):
        _emit_json({"re": obj.real, "im": obj.imag}, parts, level, indent)
    elif isinstance(obj, str):
        parts.append(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, Mapping):
        items = list(obj.items())
        if not items:
            parts.append("{}")
            return
        parts.append("{\n")
        for i, (key, value) in enumerate(items):
            parts.append(pad + json.dumps(str(key), ensure_ascii=True) + ": ")
            _emit_json(value, parts, level + 1, indent)
            parts.append(",\n" if i < len(items) - 1 else "\n")
        parts.append(close + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            parts.append("[]")
            return
        parts.append("[\n")
        for i, value in enumerate(obj):
            parts.append(pad)
            _emit_json(value, parts, level + 1, indent)
            parts.append(",\n" if i < len(obj) - 1 else "\n")
        parts.append(close + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} canonically")


def dumps_canonical(obj, *, indent: int = 2) -> str:
    """Serialize to JSON deterministically.

    Dict insertion order is preserved (never sorted), floats are printed
    with 17 significant digits, complex values become {"re", "im"}
    objects, and non-finite floats degrade to quoted strings so the text
    stays parseable.  Equal inputs yield byte-identical output.
    """
    parts: list[str] = []
    _emit_json(obj, parts, 0, indent)
    return "".join(parts)
