"""Operator expressions evaluated exactly on sparse vectors.

Operators are immutable expression trees rather than opaque callables, so
that norm bounds can be computed structurally and expressions round-trip
through scenario configs.

Config tags: ``"I"``, ``"B"``, ``"F"``, ``{"scale": [c, op]}``,
``{"wbs": rule}``, ``{"wfs": rule}``, ``{"sum": [op, ...]}``,
``{"compose": [outer, ..., inner]}``, ``{"power": [op, m]}`` and
``{"basis_perturbation": {"sigma": [a, b]}}``. A weight rule is
``{"constant": c}`` or ``{"geometric": [c, base_exp]}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Optional

from .core import (
    ONE,
    ZERO,
    DyadicScalar,
    NormKind,
    SparseVector,
    dyadic,
    vec_axpy,
)
from .reports import Report, Verdict

__all__ = [
    "ConfigError",
    "UnboundedOperatorError",
    "WeightRule",
    "BiorthogonalSystem",
    "OperatorExpr",
    "Identity",
    "BackwardShift",
    "ForwardShift",
    "Scale",
    "WeightedBackwardShift",
    "WeightedForwardShift",
    "Sum",
    "Compose",
    "Power",
    "BasisPerturbation",
    "I",
    "B",
    "F",
    "apply",
    "apply_power",
    "kernel_index",
    "operator_norm_bound",
    "is_left_inverse_on",
    "parse_operator",
    "parse_scalar",
]


class ConfigError(ValueError):
    """Raised for malformed serialized operators, subspaces or scenarios."""


class UnboundedOperatorError(ValueError):
    """Raised when no closed-form norm bound exists for an expression."""


def parse_scalar(value: Any) -> DyadicScalar:
    """Read a config scalar: an int or a ``p/2^e`` / ``p/q`` string. Floats are rejected."""
    if isinstance(value, float):
        raise ConfigError(f"decimal value {value!r} not allowed; write it as p/2^e")
    try:
        return dyadic(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _int_field(value: Any, what: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"{what} must be an integer, got {value!r}")
    return value


@dataclass(frozen=True)
class WeightRule:
    """Weight sequence ``w(n)`` for n >= 1: constant ``c`` or geometric ``c * 2**(base_exp*n)``."""

    kind: str
    c: DyadicScalar
    base_exp: int = 0

    def __post_init__(self):
        if self.kind not in ("constant", "geometric"):
            raise ValueError(f"unknown weight rule {self.kind!r}")
        object.__setattr__(self, "c", dyadic(self.c))
        if self.kind == "constant" and self.base_exp:
            raise ValueError("constant rule has no base exponent")

    @classmethod
    def constant(cls, c) -> WeightRule:
        return cls("constant", dyadic(c))

    @classmethod
    def geometric(cls, c, base_exp: int) -> WeightRule:
        return cls("geometric", dyadic(c), base_exp)

    def __call__(self, n: int) -> DyadicScalar:
        if self.kind == "constant":
            return self.c
        return self.c.shift2(self.base_exp * n)

    def sup(self) -> DyadicScalar:
        if self.kind == "constant" or self.base_exp == 0:
            return abs(self.c)
        if self.base_exp < 0:
            return abs(self.c).shift2(self.base_exp)
        raise UnboundedOperatorError(f"weights {self} grow without bound")

    def to_config(self):
        if self.kind == "constant":
            return {"constant": str(self.c)}
        return {"geometric": [str(self.c), self.base_exp]}

    @classmethod
    def from_config(cls, data) -> WeightRule:
        if not isinstance(data, dict) or len(data) != 1:
            raise ConfigError(f"bad weight rule {data!r}")
        (tag, body), = data.items()
        if tag == "constant":
            return cls.constant(parse_scalar(body))
        if tag == "geometric":
            if not isinstance(body, list) or len(body) != 2:
                raise ConfigError(f"geometric rule needs [c, base_exp], got {body!r}")
            return cls.geometric(parse_scalar(body[0]), _int_field(body[1], "base_exp"))
        raise ConfigError(f"unknown weight rule tag {tag!r}")

    def __str__(self) -> str:
        if self.kind == "constant":
            return str(self.c)
        return f"{self.c}*2^({self.base_exp}*n)"


@dataclass(frozen=True)
class BiorthogonalSystem:
    """Coordinate biorthogonal system ``x_n = e_sigma(n)`` with ``sigma(n) = a*n + b``.

    The functionals are the coordinate functionals at ``sigma(n)``, extended
    by zero off ``range(sigma)``; all have norm 1, so ``C = 1``.
    """

    a: int = 1
    b: int = 0

    def __post_init__(self):
        if self.a < 1:
            raise ValueError("sigma must be strictly increasing (a >= 1)")
        if self.a + self.b < 1:
            raise ValueError("sigma(1) must be a positive index")

    @property
    def C(self) -> DyadicScalar:
        return ONE

    def sigma(self, n: int) -> int:
        if n < 1:
            raise ValueError("system is indexed from 1")
        return self.a * n + self.b

    def index_of(self, j: int) -> Optional[int]:
        """The n with sigma(n) = j, or None when e_j is outside the system."""
        q, r = divmod(j - self.b, self.a)
        if r or q < 1:
            return None
        return q

    def vector(self, n: int) -> SparseVector:
        return SparseVector._wrap({self.sigma(n): ONE})

    def functional(self, n: int, x: SparseVector) -> DyadicScalar:
        return x[self.sigma(n)]

    def to_config(self):
        return {"sigma": [self.a, self.b]}

    @classmethod
    def from_config(cls, data) -> BiorthogonalSystem:
        if not isinstance(data, dict) or "sigma" not in data:
            raise ConfigError(f"bad biorthogonal system {data!r}")
        sigma = data["sigma"]
        if not isinstance(sigma, list) or len(sigma) != 2:
            raise ConfigError("sigma must be [a, b] meaning sigma(n) = a*n + b")
        try:
            return cls(_int_field(sigma[0], "a"), _int_field(sigma[1], "b"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def __str__(self) -> str:
        if self.b == 0:
            return f"sigma(n)={self.a}n"
        return f"sigma(n)={self.a}n{self.b:+d}"


class OperatorExpr:
    """Base class for operator expression nodes."""

    def _apply(self, x: SparseVector) -> SparseVector:
        raise NotImplementedError

    def to_config(self):
        raise NotImplementedError

    def __call__(self, x: SparseVector) -> SparseVector:
        return self._apply(x)

    # composition sugar: (s @ t)(x) == s(t(x)), c * t scales
    def __matmul__(self, other: OperatorExpr) -> OperatorExpr:
        return Compose(self, other)

    def __rmul__(self, c) -> OperatorExpr:
        return Scale(dyadic(c), self)

    def __add__(self, other: OperatorExpr) -> OperatorExpr:
        return Sum((self, other))

    def __pow__(self, m: int) -> OperatorExpr:
        return Power(self, m)


@dataclass(frozen=True)
class Identity(OperatorExpr):
    def _apply(self, x):
        return x

    def to_config(self):
        return "I"

    def __str__(self):
        return "I"


@dataclass(frozen=True)
class BackwardShift(OperatorExpr):
    """e_1 -> 0, e_{n+1} -> e_n."""

    def _apply(self, x):
        return SparseVector._wrap({i - 1: v for i, v in x.raw_items() if i > 1})

    def to_config(self):
        return "B"

    def __str__(self):
        return "B"


@dataclass(frozen=True)
class ForwardShift(OperatorExpr):
    """e_n -> e_{n+1}."""

    def _apply(self, x):
        return SparseVector._wrap({i + 1: v for i, v in x.raw_items()})

    def to_config(self):
        return "F"

    def __str__(self):
        return "F"


@dataclass(frozen=True)
class Scale(OperatorExpr):
    c: DyadicScalar
    inner: OperatorExpr

    def __post_init__(self):
        object.__setattr__(self, "c", dyadic(self.c))

    def _apply(self, x):
        return self.inner._apply(x).scale(self.c)

    def to_config(self):
        return {"scale": [str(self.c), self.inner.to_config()]}

    def __str__(self):
        return f"({self.c})*{_wrap_str(self.inner)}"


@dataclass(frozen=True)
class WeightedBackwardShift(OperatorExpr):
    """e_{n+1} -> w(n) e_n, i.e. (Tx)_n = w(n) x_{n+1}."""

    w: WeightRule

    def _apply(self, x):
        out = {}
        for i, v in x.raw_items():
            if i > 1:
                y = self.w(i - 1) * v
                if y:
                    out[i - 1] = y
        return SparseVector._wrap(out)

    def to_config(self):
        return {"wbs": self.w.to_config()}

    def __str__(self):
        return f"WB[{self.w}]"


@dataclass(frozen=True)
class WeightedForwardShift(OperatorExpr):
    """e_n -> w(n) e_{n+1}."""

    w: WeightRule

    def _apply(self, x):
        out = {}
        for i, v in x.raw_items():
            y = self.w(i) * v
            if y:
                out[i + 1] = y
        return SparseVector._wrap(out)

    def to_config(self):
        return {"wfs": self.w.to_config()}

    def __str__(self):
        return f"WF[{self.w}]"


@dataclass(frozen=True)
class Sum(OperatorExpr):
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("empty operator sum")

    def _apply(self, x):
        total = self.terms[0]._apply(x)
        for term in self.terms[1:]:
            total = vec_axpy(ONE, term._apply(x), total)
        return total

    def to_config(self):
        return {"sum": [t.to_config() for t in self.terms]}

    def __str__(self):
        return "(" + " + ".join(str(t) for t in self.terms) + ")"


@dataclass(frozen=True)
class Compose(OperatorExpr):
    """``outer`` after ``inner``."""

    outer: OperatorExpr
    inner: OperatorExpr

    def _apply(self, x):
        return self.outer._apply(self.inner._apply(x))

    def to_config(self):
        return {"compose": [self.outer.to_config(), self.inner.to_config()]}

    def __str__(self):
        return f"{_wrap_str(self.outer)}.{_wrap_str(self.inner)}"


@dataclass(frozen=True)
class Power(OperatorExpr):
    inner: OperatorExpr
    m: int

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 0:
            raise ValueError("power must be a non-negative integer")

    def _apply(self, x):
        return apply_power(self.inner, self.m, x)

    def to_config(self):
        return {"power": [self.inner.to_config(), self.m]}

    def __str__(self):
        return f"{_wrap_str(self.inner)}^{self.m}"


@dataclass(frozen=True)
class BasisPerturbation(OperatorExpr):
    """``Tx = x + sum_n 2^-n x*_{n+1}(x) x_n`` for a coordinate biorthogonal system."""

    sys: BiorthogonalSystem

    def _apply(self, x):
        out = dict(x.raw_items())
        sys = self.sys
        for j, v in x.raw_items():
            n1 = sys.index_of(j)
            if n1 is None or n1 < 2:
                continue
            n = n1 - 1
            target = sys.sigma(n)
            y = out.get(target, ZERO) + v.shift2(-n)
            if y:
                out[target] = y
            else:
                del out[target]
        return SparseVector._wrap(out)

    def to_config(self):
        return {"basis_perturbation": self.sys.to_config()}

    def __str__(self):
        return f"T[{self.sys}]"


def _wrap_str(op: OperatorExpr) -> str:
    s = str(op)
    return s if isinstance(op, (Identity, BackwardShift, ForwardShift, Sum)) else f"[{s}]"


I = Identity()
B = BackwardShift()
F = ForwardShift()


def apply(op: OperatorExpr, x: SparseVector) -> SparseVector:
    return op._apply(x)


def apply_power(op: OperatorExpr, m: int, x: SparseVector) -> SparseVector:
    """``op^m x`` by repeated application; stops early once the iterate is zero."""
    if m < 0:
        raise ValueError("power must be non-negative")
    for _ in range(m):
        if not x:
            break
        x = op._apply(x)
    return x


def kernel_index(op: OperatorExpr, x: SparseVector, budget: int) -> Optional[int]:
    """Least p <= budget with op^p x = 0, or None if none exists within budget."""
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if not x:
        return 0
    depth = _shift_depth(op)
    if depth:
        # each application lowers the top support index by exactly `depth`
        p = -(-x.max_index() // depth)
        return p if p <= budget else None
    for p in range(1, budget + 1):
        x = op._apply(x)
        if not x:
            return p
    return None


def _shift_depth(op: OperatorExpr) -> Optional[int]:
    """d when ``op`` maps e_n to a nonzero multiple of e_{n-d} (zero for n <= d), else None."""
    if isinstance(op, BackwardShift):
        return 1
    if isinstance(op, WeightedBackwardShift):
        return 1 if op.w.c else None
    if isinstance(op, Scale):
        return _shift_depth(op.inner) if op.c else None
    if isinstance(op, Power):
        d = _shift_depth(op.inner)
        return d * op.m if d and op.m else None
    if isinstance(op, Compose):
        d1, d2 = _shift_depth(op.outer), _shift_depth(op.inner)
        return d1 + d2 if d1 and d2 else None
    return None


def operator_norm_bound(op: OperatorExpr, kind: NormKind) -> DyadicScalar:
    """A structural upper bound on the operator norm in the l1 or sup norm."""
    if isinstance(op, (Identity, BackwardShift, ForwardShift)):
        return ONE
    if isinstance(op, Scale):
        return abs(op.c) * operator_norm_bound(op.inner, kind)
    if isinstance(op, (WeightedBackwardShift, WeightedForwardShift)):
        return op.w.sup()
    if isinstance(op, Sum):
        total = ZERO
        for t in op.terms:
            total = total + operator_norm_bound(t, kind)
        return total
    if isinstance(op, Compose):
        return operator_norm_bound(op.outer, kind) * operator_norm_bound(op.inner, kind)
    if isinstance(op, Power):
        bound = operator_norm_bound(op.inner, kind)
        result = ONE
        for _ in range(op.m):
            result = result * bound
        return result
    if isinstance(op, BasisPerturbation):
        # identity term plus sum_n 2^-n * C
        return ONE + op.sys.C
    raise UnboundedOperatorError(f"no closed-form bound for {op!r}")


def is_left_inverse_on(t: OperatorExpr, a: OperatorExpr, samples: Iterable[SparseVector]) -> Report:
    """Check ``t(a(x)) == x`` exactly on every sample."""
    failures = []
    count = 0
    for x in samples:
        count += 1
        image = t._apply(a._apply(x))
        if image != x:
            failures.append({"sample": x, "image": image})
    report = Report("left inverse", info={"t": t, "a": a, "samples": count})
    report.add(Verdict(
        "left_inverse",
        not failures,
        f"{len(failures)} of {count} samples fail" if failures else f"{count} samples",
        failures,
    ))
    return report


_ATOMS = {"I": I, "Identity": I, "B": B, "F": F}


def parse_operator(data: Any) -> OperatorExpr:
    """Build an operator from its nested tagged config form."""
    if isinstance(data, str):
        if data in _ATOMS:
            return _ATOMS[data]
        raise ConfigError(f"unknown operator atom {data!r}")
    if not isinstance(data, dict) or len(data) != 1:
        raise ConfigError(f"operator must be an atom or a single-key object, got {data!r}")
    (tag, body), = data.items()
    try:
        if tag == "scale":
            _expect_list(body, 2, tag)
            return Scale(parse_scalar(body[0]), parse_operator(body[1]))
        if tag == "wbs":
            return WeightedBackwardShift(WeightRule.from_config(body))
        if tag == "wfs":
            return WeightedForwardShift(WeightRule.from_config(body))
        if tag == "sum":
            if not isinstance(body, list) or not body:
                raise ConfigError("sum needs a non-empty list")
            return Sum(tuple(parse_operator(t) for t in body))
        if tag == "compose":
            if not isinstance(body, list) or len(body) < 2:
                raise ConfigError("compose needs at least two operators")
            ops = [parse_operator(t) for t in body]
            result = ops[-1]
            for outer in reversed(ops[:-1]):
                result = Compose(outer, result)
            return result
        if tag == "power":
            _expect_list(body, 2, tag)
            return Power(parse_operator(body[0]), _int_field(body[1], "power"))
        if tag == "basis_perturbation":
            return BasisPerturbation(BiorthogonalSystem.from_config(body))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {tag!r} operator: {exc}") from None
    raise ConfigError(f"unknown operator tag {tag!r}")


def _expect_list(body, n: int, tag: str) -> None:
    if not isinstance(body, list) or len(body) != n:
        raise ConfigError(f"{tag!r} expects a list of {n} items, got {body!r}")


