"""The existence construction made concrete on coordinate subspaces.

A coordinate biorthogonal system ``x_n = e_sigma(n)`` spans the closed
subspace ``M``. The perturbation of the identity

    T x = x + sum_{n>=1} 2^-n x*_{n+1}(x) x_n

leaves ``M`` invariant, and ``phi(alpha) = sum alpha_n x_n`` intertwines it
with the l1 operator ``S(alpha)_n = alpha_n + 2^-n alpha_{n+1}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .core import NormKind, SparseVector, basis
from .operators import (
    BasisPerturbation,
    BiorthogonalSystem,
    ConfigError,
    OperatorExpr,
    Sum,
    WeightedBackwardShift,
    WeightRule,
    I,
    apply,
)
from .reports import Report, Verdict

__all__ = [
    "BiorthogonalSystem",
    "SubspaceSpec",
    "NotAMemberError",
    "build_T",
    "build_S",
    "phi",
    "check_quasiconjugacy",
    "check_invariance",
]


class NotAMemberError(ValueError):
    """A sample handed to a subspace check does not lie in the subspace."""

    def __init__(self, sample: SparseVector, subspace: SubspaceSpec):
        super().__init__(f"sample {sample} is not a member of {subspace}")
        self.sample = sample
        self.subspace = subspace


@dataclass(frozen=True)
class SubspaceSpec:
    """Closed span of ``{e_i : allowed(i)}`` in the given norm.

    ``kind`` is one of ``all``, ``parity`` (param ``odd``/``even``),
    ``progression`` (params ``(a, b)``: indices ``a*k + b`` for k >= 1) or
    ``explicit`` (a predicate; not serializable).
    """

    kind: str
    params: tuple = ()
    norm: NormKind = NormKind.SUP
    rule: Optional[Callable[[int], bool]] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        kind, params = self.kind, self.params
        if kind == "all":
            ok = params == ()
        elif kind == "parity":
            ok = params in (("odd",), ("even",))
        elif kind == "progression":
            ok = (len(params) == 2 and all(isinstance(p, int) for p in params)
                  and params[0] >= 1 and params[0] + params[1] >= 1)
        elif kind == "explicit":
            ok = callable(self.rule)
        else:
            ok = False
        if not ok:
            raise ValueError(f"bad subspace spec {kind!r} {params!r}")

    @classmethod
    def all(cls, norm: NormKind = NormKind.SUP) -> SubspaceSpec:
        return cls("all", (), norm)

    @classmethod
    def parity(cls, which: str, norm: NormKind = NormKind.SUP) -> SubspaceSpec:
        return cls("parity", (which,), norm)

    @classmethod
    def progression(cls, a: int, b: int, norm: NormKind = NormKind.SUP) -> SubspaceSpec:
        return cls("progression", (a, b), norm)

    @classmethod
    def explicit(cls, rule: Callable[[int], bool], label: str = "rule",
                 norm: NormKind = NormKind.SUP) -> SubspaceSpec:
        return cls("explicit", (label,), norm, rule)

    @classmethod
    def of_system(cls, sys: BiorthogonalSystem, norm: NormKind = NormKind.SUP) -> SubspaceSpec:
        """The closed span of the system's vectors."""
        return cls.progression(sys.a, sys.b, norm)

    def allows(self, i: int) -> bool:
        if i < 1:
            return False
        kind = self.kind
        if kind == "all":
            return True
        if kind == "parity":
            return (i % 2 == 1) == (self.params[0] == "odd")
        if kind == "progression":
            a, b = self.params
            q, r = divmod(i - b, a)
            return r == 0 and q >= 1
        return bool(self.rule(i))

    def contains(self, x: SparseVector) -> bool:
        return all(self.allows(i) for i, _ in x.raw_items())

    def first_outside(self, x: SparseVector) -> Optional[int]:
        """Smallest support index of x the predicate rejects."""
        for i in x.support():
            if not self.allows(i):
                return i
        return None

    def nth_index(self, n: int, scan_limit: int = 1_000_000) -> int:
        """The n-th allowed index (1-based)."""
        if n < 1:
            raise ValueError("n must be positive")
        kind = self.kind
        if kind == "all":
            return n
        if kind == "parity":
            return 2 * n - 1 if self.params[0] == "odd" else 2 * n
        if kind == "progression":
            a, b = self.params
            return a * n + b
        seen = 0
        for i in range(1, scan_limit + 1):
            if self.rule(i):
                seen += 1
                if seen == n:
                    return i
        raise ValueError(f"fewer than {n} allowed indices below {scan_limit}")

    def rank(self, i: int) -> int:
        """Position of an allowed index i among the allowed indices (inverse of nth_index)."""
        if not self.allows(i):
            raise ValueError(f"index {i} is not allowed in {self}")
        kind = self.kind
        if kind == "all":
            return i
        if kind == "parity":
            return (i + 1) // 2
        if kind == "progression":
            a, b = self.params
            return (i - b) // a
        return sum(1 for j in range(1, i + 1) if self.rule(j))

    def to_config(self) -> dict:
        if self.kind == "all":
            out = {"all": True}
        elif self.kind == "parity":
            out = {"parity": self.params[0]}
        elif self.kind == "progression":
            out = {"progression": list(self.params)}
        else:
            raise ConfigError("explicit-rule subspaces cannot be serialized")
        out["norm"] = self.norm.value
        return out

    @classmethod
    def from_config(cls, data) -> SubspaceSpec:
        if not isinstance(data, dict):
            raise ConfigError(f"subspace must be an object, got {data!r}")
        data = dict(data)
        try:
            norm = NormKind.parse(data.pop("norm", "sup"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if len(data) != 1:
            raise ConfigError(f"subspace needs exactly one of all/parity/progression: {data!r}")
        (tag, body), = data.items()
        try:
            if tag == "all":
                return cls.all(norm)
            if tag == "parity":
                return cls.parity(body, norm)
            if tag == "progression":
                if not isinstance(body, list) or len(body) != 2:
                    raise ConfigError("progression must be [a, b]")
                return cls.progression(body[0], body[1], norm)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        raise ConfigError(f"unknown subspace tag {tag!r}")

    def __str__(self) -> str:
        if self.kind == "all":
            pattern = "all"
        elif self.kind == "parity":
            pattern = self.params[0]
        elif self.kind == "progression":
            a, b = self.params
            pattern = f"{a}k{b:+d}" if b else f"{a}k"
        else:
            pattern = self.params[0]
        return f"M[{pattern}, {self.norm.value}]"


def build_T(sys: BiorthogonalSystem) -> OperatorExpr:
    return BasisPerturbation(sys)


def build_S() -> OperatorExpr:
    """``S(alpha) = (alpha_1 + alpha_2/2, alpha_2 + alpha_3/4, ...)`` on l1."""
    return Sum((I, WeightedBackwardShift(WeightRule.geometric(1, -1))))


def phi(coeffs: SparseVector, sys: BiorthogonalSystem) -> SparseVector:
    """Place coefficient alpha_n at coordinate sigma(n)."""
    return SparseVector._wrap({sys.sigma(n): v for n, v in coeffs.raw_items()})


def check_quasiconjugacy(t: OperatorExpr, s: OperatorExpr, sys: BiorthogonalSystem,
                         n_max: int) -> Report:
    """Exact check of ``t(phi(e_k)) == phi(s(e_k))`` for k = 1..n_max."""
    failures = []
    for k in range(1, n_max + 1):
        e_k = basis(k)
        left = apply(t, phi(e_k, sys))
        right = phi(apply(s, e_k), sys)
        if left != right:
            failures.append({"k": k, "t_phi": left, "phi_s": right})
    report = Report("quasiconjugacy", info={"t": t, "s": s, "system": sys, "n_max": n_max})
    report.add(Verdict(
        "intertwining",
        not failures,
        f"{len(failures)} of {n_max} basis vectors fail" if failures
        else f"T.phi = phi.S on e_1..e_{n_max}",
        failures,
    ))
    return report


def check_invariance(t: OperatorExpr, m: SubspaceSpec, samples: Iterable[SparseVector]) -> Report:
    """Check that ``t`` maps every sample of ``m`` back into ``m``.

    Raises NotAMemberError if a sample is not itself a member.
    """
    samples = list(samples)
    for x in samples:
        if not m.contains(x):
            raise NotAMemberError(x, m)
    failures = []
    for x in samples:
        image = apply(t, x)
        bad = m.first_outside(image)
        if bad is not None:
            failures.append({"sample": x, "image": image, "index": bad})
    report = Report("invariance", info={"t": t, "subspace": str(m), "samples": len(samples)})
    report.add(Verdict(
        "invariance",
        not failures,
        f"{len(failures)} of {len(samples)} images leave the subspace" if failures
        else f"{len(samples)} images stay in the subspace",
        failures,
    ))
    return report
