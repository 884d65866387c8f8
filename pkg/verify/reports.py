"""
Verification reports.

One :class:`VerificationReport` per identity check. Complex values are kept
as ``[re, im]`` pairs so the JSON form needs no custom encoder.
"""

from __future__ import annotations

__all__ = ["VerificationReport", "ReportList", "pair", "report_schema", "dump_reports"]

import json
import math
from typing import Any

from django.conf import settings
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter

Pair = tuple[float, float]


def pair(z) -> Pair:
    z = complex(z)
    return (z.real, z.imag)


class VerificationReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    identity: str
    lhs: Pair | None
    rhs: Pair | None
    abs_deviation: float | None
    rel_deviation: float | None
    abs_tol: float
    rel_tol: float
    passed: bool
    hard_failure: bool = False
    inconclusive: bool = False
    method: dict[str, Any] = Field(default_factory=dict)
    rows: list[dict[str, Any]] = Field(default_factory=list)
    message: str = ""

    @classmethod
    def compare(cls, identity: str, lhs, rhs, *, abs_tol: float = 0.0, rel_tol: float = 1e-6,
                method: dict | None = None, rows: list | None = None, message: str = "") -> "VerificationReport":
        """Pass when |lhs - rhs| <= abs_tol + rel_tol * |rhs|."""
        lhs, rhs = complex(lhs), complex(rhs)
        dev = abs(lhs - rhs)
        rel = dev / abs(rhs) if rhs != 0 else dev
        return cls(
            identity=identity,
            lhs=pair(lhs),
            rhs=pair(rhs),
            abs_deviation=dev,
            rel_deviation=rel,
            abs_tol=abs_tol,
            rel_tol=rel_tol,
            passed=bool(dev <= abs_tol + rel_tol * abs(rhs)),
            method=method or {},
            rows=rows or [],
            message=message,
        )

    @classmethod
    def failure(cls, identity: str, exc: Exception, method: dict | None = None) -> "VerificationReport":
        """A hard failure: the check could not be carried out."""
        return cls(
            identity=identity, lhs=None, rhs=None, abs_deviation=None, rel_deviation=None,
            abs_tol=0.0, rel_tol=0.0, passed=False, hard_failure=True,
            method=method or {}, message=f"{type(exc).__name__}: {exc}",
        )

    @property
    def lhs_value(self) -> complex:
        return complex(*self.lhs) if self.lhs else complex(math.nan)

    @property
    def rhs_value(self) -> complex:
        return complex(*self.rhs) if self.rhs else complex(math.nan)

    def summary_line(self) -> str:
        status = "PASS" if self.passed else ("ERROR" if self.hard_failure else "FAIL")
        if self.inconclusive:
            status += "?"
        if self.hard_failure:
            return f"{status:<6} {self.identity:<40} {self.message}"
        return f"{status:<6} {self.identity:<40} abs={self.abs_deviation:.3g} rel={self.rel_deviation:.3g}"


ReportList = TypeAdapter(list[VerificationReport])


def report_schema() -> dict:
    schema = ReportList.json_schema()
    schema["$id"] = settings.SUPERRMT_RESULTS_SCHEMA
    schema["title"] = "VerificationReport list"
    return schema


def dump_reports(reports) -> str:
    return json.dumps([r.model_dump(mode="json") for r in reports], indent=2)
