"""Exact dyadic scalars and finitely supported sequence vectors.

Every number the constructions in this package produce has the form
``p * 2**-e``, so arithmetic is carried out on integer pairs with no rounding.
Vectors are 1-indexed and never store zero coordinates.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

__all__ = [
    "DyadicScalar",
    "SparseVector",
    "NormKind",
    "CertifiedVector",
    "ZERO",
    "ONE",
    "dyadic",
    "scalar_op",
    "vec_axpy",
    "norm",
    "lt_pow2",
    "pow2",
    "basis",
]

ScalarLike = Union["DyadicScalar", int]


def _canonical(numerator: int, exponent: int) -> tuple[int, int]:
    if numerator == 0:
        return 0, 0
    if exponent > 0 and not numerator & 1:
        shift = min((numerator & -numerator).bit_length() - 1, exponent)
        return numerator >> shift, exponent - shift
    return numerator, exponent


class DyadicScalar:
    """The exact rational ``numerator * 2**-exponent``.

    Instances are immutable and always canonical: the numerator is odd unless
    the exponent is already 0, and zero is stored as ``(0, 0)``.
    """

    __slots__ = ("_num", "_exp")

    def __init__(self, numerator: int = 0, exponent: int = 0):
        if not isinstance(numerator, int) or not isinstance(exponent, int):
            raise TypeError("numerator and exponent must be integers")
        if exponent < 0:
            numerator <<= -exponent
            exponent = 0
        self._num, self._exp = _canonical(numerator, exponent)

    @classmethod
    def _raw(cls, numerator: int, exponent: int) -> DyadicScalar:
        obj = object.__new__(cls)
        if exponent and not numerator & 1:
            obj._num, obj._exp = _canonical(numerator, exponent)
        else:
            obj._num, obj._exp = numerator, exponent
        return obj

    @property
    def numerator(self) -> int:
        return self._num

    @property
    def exponent(self) -> int:
        return self._exp

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: ScalarLike) -> DyadicScalar:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, ea, b, eb = self._num, self._exp, other._num, other._exp
        if ea >= eb:
            return DyadicScalar._raw(a + (b << (ea - eb)), ea)
        return DyadicScalar._raw((a << (eb - ea)) + b, eb)

    __radd__ = __add__

    def __sub__(self, other: ScalarLike) -> DyadicScalar:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: ScalarLike) -> DyadicScalar:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other: ScalarLike) -> DyadicScalar:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return DyadicScalar._raw(self._num * other._num, self._exp + other._exp)

    __rmul__ = __mul__

    def __neg__(self) -> DyadicScalar:
        return DyadicScalar._raw(-self._num, self._exp)

    def __abs__(self) -> DyadicScalar:
        return self if self._num >= 0 else -self

    def __pos__(self) -> DyadicScalar:
        return self

    def shift2(self, j: int) -> DyadicScalar:
        """Return ``self * 2**j``."""
        if j >= 0:
            if j >= self._exp:
                return DyadicScalar._raw(self._num << (j - self._exp), 0)
            return DyadicScalar._raw(self._num, self._exp - j)
        return DyadicScalar._raw(self._num, self._exp - j)

    # -- comparison ---------------------------------------------------------

    def _cmp(self, other: DyadicScalar) -> int:
        a, ea, b, eb = self._num, self._exp, other._num, other._exp
        if ea >= eb:
            b <<= ea - eb
        else:
            a <<= eb - ea
        return (a > b) - (a < b)

    def __eq__(self, other) -> bool:
        if isinstance(other, DyadicScalar):
            return self._num == other._num and self._exp == other._exp
        if isinstance(other, int) and not isinstance(other, bool):
            return self._exp == 0 and self._num == other
        if isinstance(other, Fraction):
            return self.to_fraction() == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._exp == 0:
            return hash(self._num)
        return hash(self.to_fraction())

    def __lt__(self, other: ScalarLike) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._cmp(other) < 0

    def __le__(self, other: ScalarLike) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._cmp(other) <= 0

    def __gt__(self, other: ScalarLike) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._cmp(other) > 0

    def __ge__(self, other: ScalarLike) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._cmp(other) >= 0

    def __bool__(self) -> bool:
        return self._num != 0

    def sign(self) -> int:
        return (self._num > 0) - (self._num < 0)

    # -- conversion ---------------------------------------------------------

    def to_fraction(self) -> Fraction:
        return Fraction(self._num, 1 << self._exp)

    def to_pair(self) -> tuple[int, int]:
        return self._num, self._exp

    @classmethod
    def from_pair(cls, pair: Iterable[int]) -> DyadicScalar:
        numerator, exponent = pair
        if exponent < 0:
            raise ValueError("exponent must be non-negative")
        return cls(numerator, exponent)

    @classmethod
    def from_fraction(cls, q: Fraction) -> DyadicScalar:
        den = q.denominator
        if den & (den - 1):
            raise ValueError(f"{q} is not a dyadic rational")
        return cls(q.numerator, den.bit_length() - 1)

    @classmethod
    def parse(cls, text: str) -> DyadicScalar:
        """Parse ``p``, ``p/q`` with ``q`` a power of two, or ``p/2^e``."""
        m = _SCALAR_RE.fullmatch(text.strip())
        if m is None:
            raise ValueError(f"not a dyadic literal: {text!r}")
        num = int(m.group("num"))
        if m.group("exp") is not None:
            return cls(num, int(m.group("exp")))
        if m.group("den") is not None:
            den = int(m.group("den"))
            if den <= 0 or den & (den - 1):
                raise ValueError(f"denominator of {text!r} is not a power of two")
            return cls(num, den.bit_length() - 1)
        return cls(num, 0)

    def __str__(self) -> str:
        if self._exp == 0:
            return str(self._num)
        if self._exp <= 16:
            return f"{self._num}/{1 << self._exp}"
        return f"{self._num}/2^{self._exp}"

    def __repr__(self) -> str:
        return f"DyadicScalar({self})"


_SCALAR_RE = re.compile(
    r"(?P<num>[+-]?\d+)(?:/(?:2\^(?P<exp>\d+)|(?P<den>\d+)))?"
)


def _coerce(value) -> DyadicScalar:
    if isinstance(value, DyadicScalar):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return DyadicScalar._raw(value, 0)
    return NotImplemented


def dyadic(value: Union[DyadicScalar, int, str, Fraction]) -> DyadicScalar:
    """Coerce an int, literal string, or dyadic Fraction to a DyadicScalar.

    Floats are refused on purpose.
    """
    if isinstance(value, DyadicScalar):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(value, int):
        return DyadicScalar(value)
    if isinstance(value, str):
        return DyadicScalar.parse(value)
    if isinstance(value, Fraction):
        return DyadicScalar.from_fraction(value)
    raise TypeError(f"cannot interpret {type(value).__name__} as a dyadic scalar")


ZERO = DyadicScalar(0)
ONE = DyadicScalar(1)


def pow2(j: int) -> DyadicScalar:
    """``2**j`` for any integer j."""
    return ONE.shift2(j)


def scalar_op(op: str, a: DyadicScalar, b: ScalarLike) -> DyadicScalar:
    if op == "add":
        return a + dyadic(b)
    if op == "sub":
        return a - dyadic(b)
    if op == "mul":
        return a * dyadic(b)
    if op == "shift2":
        if not isinstance(b, int):
            raise TypeError("shift2 takes an integer power offset")
        return a.shift2(b)
    raise ValueError(f"unknown scalar op {op!r}")


def lt_pow2(a: DyadicScalar, k: int) -> bool:
    """Exact test ``a < 2**-k``."""
    a = dyadic(a)
    if k >= 0:
        return (a.numerator << k) < (1 << a.exponent)
    return a.numerator < (1 << (a.exponent - k))


class NormKind(enum.Enum):
    L1 = "l1"
    SUP = "sup"

    @classmethod
    def parse(cls, text: str) -> NormKind:
        try:
            return cls(text.lower())
        except ValueError:
            raise ValueError(f"unknown norm {text!r}; expected 'l1' or 'sup'") from None


class SparseVector:
    """Finitely supported, 1-indexed sequence of dyadic scalars."""

    __slots__ = ("_entries", "_hash")

    def __init__(self, entries: Mapping[int, ScalarLike] | Iterable[tuple[int, ScalarLike]] = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        data: dict[int, DyadicScalar] = {}
        for index, value in items:
            if not isinstance(index, int) or isinstance(index, bool) or index < 1:
                raise ValueError(f"indices are positive integers, got {index!r}")
            value = dyadic(value)
            if value:
                data[index] = data.get(index, ZERO) + value
                if not data[index]:
                    del data[index]
        object.__setattr__(self, "_entries", data)
        object.__setattr__(self, "_hash", None)

    @classmethod
    def _wrap(cls, data: dict[int, DyadicScalar]) -> SparseVector:
        # caller guarantees positive indices and no zero values
        obj = object.__new__(cls)
        object.__setattr__(obj, "_entries", data)
        object.__setattr__(obj, "_hash", None)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("SparseVector is immutable")

    # -- access -------------------------------------------------------------

    def __getitem__(self, index: int) -> DyadicScalar:
        return self._entries.get(index, ZERO)

    def items(self) -> list[tuple[int, DyadicScalar]]:
        return sorted(self._entries.items())

    def raw_items(self):
        """Unsorted (index, value) view; cheaper when order is irrelevant."""
        return self._entries.items()

    def support(self) -> list[int]:
        return sorted(self._entries)

    def max_index(self) -> int:
        """Largest support index, or 0 for the zero vector."""
        return max(self._entries, default=0)

    def nnz(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[tuple[int, DyadicScalar]]:
        return iter(self.items())

    def __bool__(self) -> bool:
        return bool(self._entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self) -> int:
        if self._hash is None:
            object.__setattr__(self, "_hash", hash(frozenset(self._entries.items())))
        return self._hash

    # -- linear structure ---------------------------------------------------

    def __add__(self, other: SparseVector) -> SparseVector:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return vec_axpy(ONE, other, self)

    def __sub__(self, other: SparseVector) -> SparseVector:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return vec_axpy(-ONE, other, self)

    def __neg__(self) -> SparseVector:
        return SparseVector._wrap({i: -v for i, v in self._entries.items()})

    def scale(self, c: ScalarLike) -> SparseVector:
        c = dyadic(c)
        if not c:
            return SparseVector._wrap({})
        cn, ce = c._num, c._exp
        if cn == 1 and ce == 0:
            return self
        # hot path for iterated operators: multiply numerators directly, canonicalize inline
        raw = DyadicScalar._raw
        return SparseVector._wrap({i: raw(cn * v._num, ce + v._exp) for i, v in self._entries.items()})

    def __rmul__(self, c: ScalarLike) -> SparseVector:
        if isinstance(c, (DyadicScalar, int)) and not isinstance(c, bool):
            return self.scale(c)
        return NotImplemented

    def norm(self, kind: NormKind) -> DyadicScalar:
        return norm(self, kind)

    # -- serialization ------------------------------------------------------

    def to_triples(self) -> list[list[int]]:
        return [[i, v.numerator, v.exponent] for i, v in self.items()]

    @classmethod
    def from_triples(cls, triples: Iterable[Iterable[int]]) -> SparseVector:
        data: dict[int, DyadicScalar] = {}
        for triple in triples:
            index, numerator, exponent = triple
            if index in data:
                raise ValueError(f"duplicate index {index} in triples")
            for part in (index, numerator, exponent):
                if not isinstance(part, int) or isinstance(part, bool):
                    raise ValueError(f"triple entries must be integers: {triple!r}")
            if index < 1 or exponent < 0:
                raise ValueError(f"malformed triple {triple!r}")
            value = DyadicScalar(numerator, exponent)
            if value.to_pair() != (numerator, exponent):
                raise ValueError(f"triple {triple!r} is not in canonical form")
            if not value:
                raise ValueError(f"triple {triple!r} stores a zero coordinate")
            data[index] = value
        return cls._wrap(data)

    @classmethod
    def parse(cls, text: str) -> SparseVector:
        """Parse the literal form ``{1:3/4, 7:-1/8}``."""
        body = text.strip()
        if not (body.startswith("{") and body.endswith("}")):
            raise ValueError(f"vector literal must be braced: {text!r}")
        body = body[1:-1].strip()
        entries: dict[int, DyadicScalar] = {}
        if body:
            for chunk in body.split(","):
                key, sep, val = chunk.partition(":")
                if not sep:
                    raise ValueError(f"bad vector entry {chunk!r}")
                index = int(key.strip())
                if index < 1 or index in entries:
                    raise ValueError(f"bad or repeated index {index}")
                entries[index] = DyadicScalar.parse(val)
        return cls(entries)

    def __str__(self) -> str:
        return "{" + ", ".join(f"{i}:{v}" for i, v in self.items()) + "}"

    def __repr__(self) -> str:
        return f"SparseVector({self})"


def basis(n: int, c: ScalarLike = 1) -> SparseVector:
    """``c * e_n``."""
    return SparseVector({n: c})


def vec_axpy(c: ScalarLike, x: SparseVector, y: SparseVector) -> SparseVector:
    """``c*x + y``, exactly, zero entries dropped."""
    c = dyadic(c)
    out = dict(y._entries)
    if not c:
        return SparseVector._wrap(out)
    for i, v in x._entries.items():
        w = c * v
        prev = out.get(i)
        if prev is not None:
            w = prev + w
            if not w:
                del out[i]
                continue
        out[i] = w
    return SparseVector._wrap(out)


def norm(x: SparseVector, kind: NormKind) -> DyadicScalar:
    values = [abs(v) for v in x._entries.values()]
    if not values:
        return ZERO
    if kind is NormKind.L1:
        total = ZERO
        for v in values:
            total = total + v
        return total
    if kind is NormKind.SUP:
        return max(values)
    raise ValueError(f"unsupported norm {kind!r}")


@dataclass(frozen=True)
class CertifiedVector:
    """A computed vector plus an analytic bound on its distance to the true one."""

    computed: SparseVector
    tail_bound: DyadicScalar
    norm: NormKind

    def __post_init__(self):
        if self.tail_bound < 0:
            raise ValueError("tail bound must be non-negative")

    @property
    def exact(self) -> bool:
        return not self.tail_bound

    def to_dict(self) -> dict:
        return {
            "computed": self.computed.to_triples(),
            "tail_bound": str(self.tail_bound),
            "norm": self.norm.value,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> CertifiedVector:
        return cls(
            SparseVector.from_triples(data["computed"]),
            DyadicScalar.parse(data["tail_bound"]),
            NormKind.parse(data["norm"]),
        )
