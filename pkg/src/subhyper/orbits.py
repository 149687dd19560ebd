"""Dense enumeration of coordinate subspaces, orbit segments and density evidence.

The enumeration runs in levels L = 1, 2, ...: level L streams every vector
supported on the first L allowed indices whose coordinates are ``p / 2^L``
with ``|p| <= 4^L``, numerator tuples in lexicographic order, skipping
vectors already emitted at a lower level. Level L therefore ends at index
``(2*4^L + 1)^L``, and every finitely supported dyadic vector in the
subspace is emitted exactly once.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, Union

from .constructions import SubspaceSpec
from .core import CertifiedVector, DyadicScalar, NormKind, SparseVector, dyadic, norm
from .operators import OperatorExpr, apply, apply_power
from .reports import jsonable

__all__ = [
    "DenseEnumerator",
    "enumerate_dense",
    "dense_prefix",
    "minimal_level",
    "cumulative_count",
    "OrbitPoint",
    "Hit",
    "OrbitReport",
    "orbit",
    "density_report",
]


def cumulative_count(level: int) -> int:
    """Number of vectors emitted by the end of ``level``."""
    if level < 1:
        return 0
    return (2 * 4 ** level + 1) ** level


def _magnitude_level(c: DyadicScalar) -> int:
    """Least l >= 0 with |c| <= 2^l."""
    c = abs(c)
    l = 0
    while c > DyadicScalar(1 << l):
        l += 1
    return l


def minimal_level(v: SparseVector, m: SubspaceSpec) -> int:
    """The level at which the enumeration of ``m`` emits ``v``."""
    level = 1
    for i, c in v.raw_items():
        level = max(level, m.rank(i), c.exponent, _magnitude_level(c))
    return level


class DenseEnumerator:
    """Deterministic cursor over the canonical dense sequence of a subspace.

    Levels are streamed lazily; one consumer per cursor.
    """

    def __init__(self, m: SubspaceSpec):
        self.m = m
        self._it = self._generate()
        self.position = 0

    def _generate(self) -> Iterator[SparseVector]:
        for level in itertools.count(1):
            indices = [self.m.nth_index(n) for n in range(1, level + 1)]
            bound = 4 ** level
            for nums in itertools.product(range(-bound, bound + 1), repeat=level):
                v = SparseVector._wrap({
                    i: DyadicScalar(p, level) for i, p in zip(indices, nums) if p
                })
                if level > 1 and minimal_level(v, self.m) < level:
                    continue
                yield v

    def __iter__(self) -> DenseEnumerator:
        return self

    def __next__(self) -> SparseVector:
        v = next(self._it)
        self.position += 1
        return v

    def take(self, n: int) -> list[SparseVector]:
        return list(itertools.islice(self, n))


def enumerate_dense(m: SubspaceSpec, n: int) -> SparseVector:
    """The n-th (1-based) vector of the canonical enumeration of ``m``."""
    if n < 1:
        raise ValueError("n must be positive")
    return next(itertools.islice(DenseEnumerator(m), n - 1, None))


def dense_prefix(m: SubspaceSpec, n: int) -> list[SparseVector]:
    return DenseEnumerator(m).take(n)


@dataclass(frozen=True)
class OrbitPoint:
    n: int
    norm: DyadicScalar
    vector: Optional[SparseVector] = None
    nearest: Optional[DyadicScalar] = None


@dataclass(frozen=True)
class Hit:
    target_index: int
    orbit_index: Optional[int]
    distance: Optional[DyadicScalar]
    eps: DyadicScalar


@dataclass
class OrbitReport:
    operator: OperatorExpr
    start: SparseVector
    points: list = field(default_factory=list)
    hits: list = field(default_factory=list)
    tail_bound: DyadicScalar = DyadicScalar(0)
    norm: NormKind = NormKind.SUP

    def vectors(self) -> list[SparseVector]:
        return [p.vector for p in self.points]

    @property
    def all_hit(self) -> bool:
        return all(h.orbit_index is not None for h in self.hits)

    def to_dict(self) -> dict:
        return {
            "operator": self.operator.to_config(),
            "start": self.start.to_triples(),
            "norm": self.norm.value,
            "tail_bound": str(self.tail_bound),
            "points": [
                {"n": p.n, "norm": str(p.norm),
                 **({"vector": p.vector.to_triples()} if p.vector is not None else {}),
                 **({"nearest": str(p.nearest)} if p.nearest is not None else {})}
                for p in self.points
            ],
            "hits": [
                {"target_index": h.target_index, "orbit_index": h.orbit_index,
                 "distance": jsonable(h.distance), "eps": str(h.eps)}
                for h in self.hits
            ],
            "evidence": "finite orbit evidence, not a proof of density",
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "norm", "distance_to_nearest_target"])
        for p in self.points:
            writer.writerow([p.n, str(p.norm), "" if p.nearest is None else str(p.nearest)])
        return buf.getvalue()


def orbit(t: OperatorExpr, x: SparseVector, steps: int, kind: NormKind = NormKind.SUP) -> OrbitReport:
    """Exact points ``T^n x`` for n = 0..steps."""
    if steps < 1:
        raise ValueError("steps must be positive")
    report = OrbitReport(t, x, norm=kind)
    v = x
    for n in range(steps + 1):
        if n:
            v = apply(t, v)
        report.points.append(OrbitPoint(n, norm(v, kind), v))
    return report


def density_report(t: OperatorExpr, x: CertifiedVector, targets: Sequence[SparseVector],
                   eps: Union[DyadicScalar, Sequence[DyadicScalar]], max_steps: int,
                   kind: NormKind = NormKind.SUP,
                   indices: Optional[Sequence[int]] = None) -> OrbitReport:
    """For each target, the least orbit index with ``||T^n x - target|| < eps``.

    ``eps`` may be one scalar or one per target. When ``indices`` is given
    only those orbit indices are examined (e.g. the selected subsequence).
    Distances use ``x.computed``; ``x.tail_bound`` is carried on the report
    so borderline hits can be discounted. The scan stops early once every
    target is hit.
    """
    targets = list(targets)
    if isinstance(eps, (list, tuple)):
        eps_list = [dyadic(e) for e in eps]
        if len(eps_list) != len(targets):
            raise ValueError("need one eps per target")
    else:
        eps_list = [dyadic(eps)] * len(targets)
    if any(e <= 0 for e in eps_list):
        raise ValueError("eps must be positive")

    if indices is None:
        schedule = range(max_steps + 1)
    else:
        schedule = sorted({n for n in indices if 0 <= n <= max_steps})

    report = OrbitReport(t, x.computed, tail_bound=x.tail_bound, norm=kind)
    found: list[Optional[tuple[int, DyadicScalar]]] = [None] * len(targets)
    v, at = x.computed, 0
    for n in schedule:
        v = apply_power(t, n - at, v)
        at = n
        nearest = None
        for idx, target in enumerate(targets):
            d = norm(v - target, kind)
            if nearest is None or d < nearest:
                nearest = d
            if found[idx] is None and d < eps_list[idx]:
                found[idx] = (n, d)
        report.points.append(OrbitPoint(n, norm(v, kind), None, nearest))
        if all(f is not None for f in found):
            break
    for idx, f in enumerate(found):
        report.hits.append(Hit(idx + 1, f[0] if f else None, f[1] if f else None, eps_list[idx]))
    return report
