import itertools

import pytest
from hypothesis import given, settings, strategies as st

from subhyper.constructions import SubspaceSpec, build_S
from subhyper.core import CertifiedVector, DyadicScalar, NormKind, SparseVector, basis, dyadic, pow2
from subhyper.operators import I, Scale, B, apply_power, kernel_index
from subhyper.orbits import (
    DenseEnumerator,
    cumulative_count,
    dense_prefix,
    density_report,
    enumerate_dense,
    minimal_level,
    orbit,
)

from strategies import odd_vectors

ODD = SubspaceSpec.parity("odd")
ALL_L1 = SubspaceSpec.all(NormKind.L1)
T2B = Scale(2, B)
half = dyadic("1/2")


def test_enumerate_examples():
    assert enumerate_dense(ODD, 1) == basis(1, -2)
    assert enumerate_dense(ODD, 5) == SparseVector()
    assert enumerate_dense(ALL_L1, 1) == basis(1, -2)
    # first level-2 vector: numerator tuple (-16, -16) over 4
    assert enumerate_dense(ODD, 10) == SparseVector({1: -4, 3: -4})


def level_oracle(spec, level):
    """Every vector with support in the first `level` allowed indices, coords p/2^level, |p| <= 4^level."""
    idx = [spec.nth_index(n) for n in range(1, level + 1)]
    bound = 4 ** level
    out = set()
    for nums in itertools.product(range(-bound, bound + 1), repeat=level):
        out.add(SparseVector({i: DyadicScalar(p, level) for i, p in zip(idx, nums)}))
    return out


@pytest.mark.parametrize("spec", [ODD, SubspaceSpec.parity("even"), SubspaceSpec.progression(3, 1)], ids=str)
def test_levels_one_and_two_complete(spec):
    emitted = dense_prefix(spec, cumulative_count(2))
    assert len(set(emitted)) == len(emitted)
    assert set(emitted[:cumulative_count(1)]) == level_oracle(spec, 1)
    assert set(emitted) == level_oracle(spec, 2)


def test_cumulative_counts():
    assert [cumulative_count(l) for l in (0, 1, 2, 3)] == [0, 9, 1089, 129 ** 3]


@settings(max_examples=60)
@given(st.integers(1, 1089))
def test_emitted_vectors_are_sound(n):
    v = enumerate_dense(ODD, n)
    assert ODD.contains(v)
    budget = max(v.max_index(), 1)
    assert kernel_index(T2B, v, budget) is not None
    level = minimal_level(v, ODD)
    assert cumulative_count(level - 1) < n <= cumulative_count(level)


def test_cursor_is_stateful():
    cur = DenseEnumerator(ODD)
    first = cur.take(3)
    assert cur.position == 3
    assert first + cur.take(2) == dense_prefix(ODD, 5)


def test_orbit_examples():
    assert orbit(T2B, basis(2), 3).vectors() == [basis(2), basis(1, 2), SparseVector(), SparseVector()]
    assert orbit(I, basis(1), 2).vectors() == [basis(1)] * 3
    assert orbit(build_S(), basis(2), 1).vectors() == [basis(2), SparseVector({1: half, 2: 1})]


@given(x=odd_vectors, m=st.integers(0, 5), n=st.integers(0, 5))
def test_orbit_semigroup(x, m, n):
    s = build_S()
    pts = orbit(s, x, max(m + n, 1)).vectors()
    assert pts[m + n] == orbit(s, pts[n], max(m, 1)).vectors()[m]
    assert pts[m] == apply_power(s, m, x)


def test_density_trivial_examples():
    rep = density_report(T2B, CertifiedVector(basis(1), DyadicScalar(0), NormKind.SUP), [basis(1)], half, 5)
    assert rep.hits[0].orbit_index == 0
    rep = density_report(I, CertifiedVector(SparseVector(), DyadicScalar(0), NormKind.SUP), [basis(1)], half, 5)
    assert rep.hits[0].orbit_index is None and not rep.all_hit


def test_density_report_csv_and_dict():
    rep = density_report(T2B, CertifiedVector(basis(3), pow2(-4), NormKind.SUP),
                         [basis(1, 4), SparseVector()], [half, half], 6)
    assert [h.orbit_index for h in rep.hits] == [2, 3]
    lines = rep.to_csv().splitlines()
    assert lines[0] == "n,norm,distance_to_nearest_target"
    assert lines[1] == "0,1,1"
    d = rep.to_dict()
    assert d["tail_bound"] == "1/16"
    with pytest.raises(ValueError):
        density_report(T2B, CertifiedVector(basis(3), pow2(-4), NormKind.SUP), [basis(1)], DyadicScalar(0), 3)
