"""Verification reports and the CSV emitted for external plotting."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Dict, Iterable, List, Literal, Optional, Sequence

from pydantic import BaseModel, ConfigDict, computed_field

SCHEMA = "rhls/1"

Provenance = Literal["closed-form", "identity", "inequality", "oracle", "regression", "cross-check"]

_TINY = 1e-300


class VerificationReport(BaseModel):
    """One named check: what went in, what came out, what it was held against.

    ``passed`` is derived, never stored: the selected error is compared with
    the tolerance.
    """

    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")

    name: str
    inputs: Dict[str, Any] = {}
    computed: Dict[str, float] = {}
    reference: Dict[str, float] = {}
    provenance: Provenance = "closed-form"
    abs_error: float
    rel_error: float
    tolerance: float
    error_kind: Literal["absolute", "relative"] = "relative"
    degenerate: bool = False
    notes: str = ""

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        error = self.rel_error if self.error_kind == "relative" else self.abs_error
        return bool(error <= self.tolerance)


def compare(
    name: str,
    value: float,
    expected: float,
    tolerance: float,
    *,
    inputs: Optional[Dict[str, Any]] = None,
    provenance: Provenance = "closed-form",
    error_kind: Literal["absolute", "relative"] = "relative",
    extra: Optional[Dict[str, float]] = None,
    notes: str = "",
) -> VerificationReport:
    """Report for an equality ``value == expected``."""
    abs_error = abs(value - expected)
    computed = {"value": float(value)}
    computed.update(extra or {})
    return VerificationReport(
        name=name,
        inputs=inputs or {},
        computed=computed,
        reference={"expected": float(expected)},
        provenance=provenance,
        abs_error=abs_error,
        rel_error=abs_error / max(abs(expected), _TINY),
        tolerance=tolerance,
        error_kind=error_kind,
        notes=notes,
    )


def lower_bound(
    name: str,
    value: float,
    bound: float,
    tolerance: float,
    *,
    inputs: Optional[Dict[str, Any]] = None,
    degenerate: bool = False,
    error_kind: Literal["absolute", "relative"] = "relative",
    extra: Optional[Dict[str, float]] = None,
    notes: str = "",
) -> VerificationReport:
    """Report for an inequality ``value >= bound``.

    The error is the violation ``max(0, bound - value)``; its relative form is
    taken against the larger magnitude of the two sides.
    """
    violation = max(0.0, bound - value) if math.isfinite(bound) else 0.0
    scale = max(abs(value), abs(bound) if math.isfinite(bound) else 0.0, _TINY)
    computed = {"lhs": float(value), "margin": float(value - bound)}
    computed.update(extra or {})
    return VerificationReport(
        name=name,
        inputs=inputs or {},
        computed=computed,
        reference={"rhs": float(bound)},
        provenance="inequality",
        abs_error=violation,
        rel_error=violation / scale,
        tolerance=tolerance,
        error_kind=error_kind,
        degenerate=degenerate,
        notes=notes,
    )


def all_passed(reports: Iterable[VerificationReport]) -> bool:
    return all(r.passed for r in reports)


def reports_document(command: str, reports: Sequence[VerificationReport], **extra: Any) -> Dict[str, Any]:
    """JSON document with the schema tag, for the command line."""
    doc: Dict[str, Any] = {"schema": SCHEMA, "command": command}
    doc.update(extra)
    doc["reports"] = [r.model_dump(mode="json") for r in reports]
    doc["passed"] = all_passed(reports)
    return doc


def parse_reports(text: str) -> List[VerificationReport]:
    """Validate the ``reports`` array of a JSON document back into models."""
    data = json.loads(text)
    items = data["reports"] if isinstance(data, dict) else data
    return [VerificationReport.model_validate(_drop_computed(item)) for item in items]


def _drop_computed(item: Dict[str, Any]) -> Dict[str, Any]:
    return {k: v for k, v in item.items() if k != "passed"}


def emit_plot_data(rows: Iterable[Sequence[float]], columns: Sequence[str]) -> str:
    """CSV text with a header row, one row per trace or sweep point.

    Documented column sets:
        minimize trace: iteration, quotient
        concentration sweep: eps, f_eps_e1, potential_e1, norm_p, quotient
        constant sweep: alpha, n_star
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(list(columns))
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} fields, expected {len(columns)}")
        writer.writerow([repr(float(x)) for x in row])
    return buffer.getvalue()
