"""Scenario configs and the built-in scenarios."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .constructions import SubspaceSpec, build_T
from .criterion import CriterionWitness, DecayCertificate, PowerSequence, infer_decay
from .operators import BiorthogonalSystem, ConfigError, OperatorExpr, parse_operator

__all__ = ["Budgets", "Scenario", "BUILTIN_SCENARIOS", "load_scenario"]


@dataclass(frozen=True)
class Budgets:
    kernel_budget: int = 64
    scan_limit: int = 10_000
    k_probe: int = 20

    def to_config(self) -> dict:
        return {"kernel_budget": self.kernel_budget, "scan_limit": self.scan_limit,
                "k_probe": self.k_probe}

    @classmethod
    def from_config(cls, data) -> Budgets:
        if not isinstance(data, dict):
            raise ConfigError("budgets must be an object")
        unknown = set(data) - {"kernel_budget", "scan_limit", "k_probe"}
        if unknown:
            raise ConfigError(f"unknown budget keys {sorted(unknown)}")
        values = {**cls().to_config(), **data}
        for key, val in values.items():
            if not isinstance(val, int) or isinstance(val, bool) or val < 1:
                raise ConfigError(f"budget {key} must be a positive integer")
        return cls(**values)


@dataclass(frozen=True)
class Scenario:
    name: str
    subspace: SubspaceSpec
    operator: Optional[OperatorExpr] = None
    a_operator: Optional[OperatorExpr] = None
    sequence: Optional[PowerSequence] = None
    system: Optional[BiorthogonalSystem] = None
    decay: Optional[DecayCertificate] = None
    samples: int = 100
    budgets: Budgets = field(default_factory=Budgets)

    @property
    def t(self) -> OperatorExpr:
        if self.operator is not None:
            return self.operator
        if self.system is not None:
            return build_T(self.system)
        raise ConfigError(f"scenario {self.name!r} has no operator")

    def witness(self) -> CriterionWitness:
        """The criterion hypothesis bundle; the decay certificate is inferred from A if absent."""
        if self.a_operator is None or self.sequence is None:
            raise ConfigError(f"scenario {self.name!r} lacks an A operator or power sequence")
        decay = self.decay or infer_decay(self.a_operator, self.subspace.norm)
        if decay is None:
            # no decay to certify; keep a nominal certificate so condition (i) reports the mismatch
            decay = DecayCertificate(-1)
        return CriterionWitness(self.t, self.a_operator, self.subspace, self.sequence,
                                decay, self.budgets.kernel_budget)

    def to_config(self) -> dict:
        out = {"name": self.name, "subspace": self.subspace.to_config()}
        if self.operator is not None:
            out["operator"] = self.operator.to_config()
        if self.a_operator is not None:
            out["a_operator"] = self.a_operator.to_config()
        if self.sequence is not None:
            out["sequence"] = self.sequence.to_config()
        if self.system is not None:
            out["system"] = self.system.to_config()
        if self.decay is not None:
            out["decay"] = self.decay.to_config()
        out["enumeration"] = {"samples": self.samples}
        out["budgets"] = self.budgets.to_config()
        return out

    @classmethod
    def from_config(cls, data) -> Scenario:
        if not isinstance(data, dict):
            raise ConfigError("scenario must be a JSON object")
        known = {"name", "subspace", "operator", "a_operator", "sequence", "system",
                 "decay", "enumeration", "budgets"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown scenario keys {sorted(unknown)}")
        if "name" not in data or "subspace" not in data:
            raise ConfigError("scenario needs 'name' and 'subspace'")
        enumeration = data.get("enumeration", {})
        samples = enumeration.get("samples", 100) if isinstance(enumeration, dict) else None
        if not isinstance(samples, int) or isinstance(samples, bool) or samples < 1:
            raise ConfigError("enumeration.samples must be a positive integer")
        return cls(
            name=str(data["name"]),
            subspace=SubspaceSpec.from_config(data["subspace"]),
            operator=parse_operator(data["operator"]) if "operator" in data else None,
            a_operator=parse_operator(data["a_operator"]) if "a_operator" in data else None,
            sequence=PowerSequence.from_config(data["sequence"]) if "sequence" in data else None,
            system=BiorthogonalSystem.from_config(data["system"]) if "system" in data else None,
            decay=DecayCertificate.from_config(data["decay"]) if "decay" in data else None,
            samples=samples,
            budgets=Budgets.from_config(data.get("budgets", {})),
        )

    def with_overrides(self, **changes) -> Scenario:
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


_EXAMPLE_LINF = {
    "name": "example-linf",
    "operator": {"scale": ["2", "B"]},
    "a_operator": {"scale": ["1/2", "F"]},
    "subspace": {"parity": "odd", "norm": "sup"},
    "sequence": [2, 0],
    "decay": {"exact_geometric": -1},
    "enumeration": {"samples": 100},
    "budgets": {"kernel_budget": 64, "scan_limit": 10_000, "k_probe": 20},
}

_THM1_CONSTRUCTION = {
    "name": "thm1-construction",
    "system": {"sigma": [2, -1]},
    "operator": {"basis_perturbation": {"sigma": [2, -1]}},
    "subspace": {"parity": "odd", "norm": "sup"},
    "enumeration": {"samples": 200},
    "budgets": {"kernel_budget": 64, "scan_limit": 10_000, "k_probe": 20},
}

BUILTIN_SCENARIOS = {
    "example-linf": _EXAMPLE_LINF,
    "thm1-construction": _THM1_CONSTRUCTION,
}


def load_scenario(ref: str) -> Scenario:
    """A built-in scenario by name, or a JSON scenario file by path."""
    if ref in BUILTIN_SCENARIOS:
        return Scenario.from_config(BUILTIN_SCENARIOS[ref])
    path = Path(ref)
    if not path.is_file():
        raise ConfigError(f"unknown scenario {ref!r} (built-ins: {', '.join(BUILTIN_SCENARIOS)})")
    try:
        data = json.loads(path.read_text(), parse_float=_reject_float)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return Scenario.from_config(data)


def _reject_float(text: str):
    raise ConfigError(f"decimal literal {text} not allowed; write scalars as \"p/2^e\"")
