"""Pass/fail reports shared by every checker."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .core import DyadicScalar, SparseVector


def jsonable(value: Any) -> Any:
    """Convert exact values to JSON-friendly literals (vectors and scalars as text)."""
    if isinstance(value, (SparseVector, DyadicScalar)):
        return str(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if hasattr(value, "to_config"):
        return value.to_config()
    return value


@dataclass
class Verdict:
    name: str
    ok: bool
    detail: str = ""
    witnesses: list = field(default_factory=list)

    @property
    def witness(self):
        return self.witnesses[0] if self.witnesses else None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "ok": self.ok,
            "detail": self.detail,
            "witnesses": jsonable(self.witnesses),
        }


@dataclass
class Report:
    title: str
    verdicts: list[Verdict] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(v.ok for v in self.verdicts)

    def add(self, verdict: Verdict) -> Verdict:
        self.verdicts.append(verdict)
        return verdict

    def verdict(self, name: str) -> Verdict:
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)

    def failures(self) -> list[Verdict]:
        return [v for v in self.verdicts if not v.ok]

    @property
    def witness(self):
        for v in self.verdicts:
            if v.witnesses and not v.ok:
                return v.witness
        return None

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "ok": self.ok,
            "verdicts": [v.to_dict() for v in self.verdicts],
            "info": jsonable(self.info),
        }

    def summary_lines(self) -> list[str]:
        lines = [f"{self.title}: {'PASS' if self.ok else 'FAIL'}"]
        for v in self.verdicts:
            mark = "ok  " if v.ok else "FAIL"
            extra = f" ({v.detail})" if v.detail else ""
            lines.append(f"  [{mark}] {v.name}{extra}")
            if not v.ok and v.witnesses:
                lines.append(f"         witness: {jsonable(v.witness)}")
        return lines
