import json
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from subhyper.constructions import SubspaceSpec
from subhyper.core import CertifiedVector, NormKind, SparseVector, basis, dyadic, pow2
from subhyper.criterion import (
    CriterionWitness,
    DecayCertificate,
    DecayCertificateError,
    HypercyclicCertificate,
    PowerSequence,
    PreconditionError,
    SubseqSelection,
    build_certificate,
    build_vector,
    certificate_to_document,
    check_conditions,
    check_le_criterion,
    decay_threshold,
    infer_decay,
    select_subsequence,
    verify_certificate,
    verify_document,
)
from subhyper.operators import B, F, I, ConfigError, Power, Scale, apply_power
from subhyper.orbits import dense_prefix

from oracles import a_power, as_fractions, oracle_select, t_power
from strategies import odd_vectors

half = dyadic("1/2")
ODD = SubspaceSpec.parity("odd")
T2B = Scale(2, B)
A = Scale(half, F)
W = CriterionWitness(T2B, A, ODD, PowerSequence(2, 0), DecayCertificate(-1), 64)
e1, e3 = basis(1), basis(3)
ZERO_VEC = SparseVector()


def test_power_sequence():
    seq = PowerSequence(2, 0)
    assert [seq.member(k) for k in (1, 2, 3)] == [2, 4, 6]
    assert seq.difference_closed and not PowerSequence(2, 1).difference_closed
    assert seq.ceil(0) == 2 and seq.ceil(3) == 4 and seq.ceil(4) == 4
    assert PowerSequence(3, 1).ceil(8) == 10
    assert seq.index_of(8) == 4 and seq.index_of(7) is None
    with pytest.raises(ValueError):
        PowerSequence(0, 1)
    with pytest.raises(ValueError):
        PowerSequence(2, -2)


def test_difference_closure_brute_force():
    for a, b in [(2, 0), (3, 0), (2, 1), (1, 2)]:
        seq = PowerSequence(a, b)
        members = [seq.member(k) for k in range(1, 30)]
        closed = all(seq.is_member(mj - mi) for i, mi in enumerate(members) for mj in members[i + 1:])
        assert closed == seq.difference_closed


def test_infer_decay():
    assert infer_decay(A) == DecayCertificate(-1)
    assert infer_decay(Scale(dyadic("1/4"), F)) == DecayCertificate(-2)
    assert infer_decay(Power(A, 3)) == DecayCertificate(-3)
    assert infer_decay(F) is None
    assert infer_decay(Scale(dyadic("3/4"), F)) is None
    assert infer_decay(T2B) is None


@pytest.mark.parametrize("x, k, expected", [
    (e1, 1, 2),
    (e1, 0, 2),
    (basis(1, 2), 1, 4),
    (ZERO_VEC, 5, 2),
])
def test_decay_threshold_examples(x, k, expected):
    assert decay_threshold(W, x, k) == expected


def test_decay_threshold_rejects_wrong_certificate():
    wrong = replace(W, decay=DecayCertificate(-2))
    with pytest.raises(DecayCertificateError):
        decay_threshold(wrong, e1, 3)


def test_select_examples():
    sel = select_subsequence(W, [e1, e3, e1 + e3], 2)
    assert sel.ms == [2, 4]
    assert sel.picks[0].thresholds.kernel_p == 1 and sel.picks[0].thresholds.doubling is None
    assert sel.picks[1].thresholds.kernel_p == 3 and sel.picks[1].thresholds.doubling == 4
    assert select_subsequence(W, [ZERO_VEC] * 3, 2).ms == [2, 4]
    assert select_subsequence(W, [basis(1, 2), e3, e1], 2).ms == [4, 8]


def test_select_preconditions():
    with pytest.raises(PreconditionError) as exc:
        select_subsequence(W, [e1, basis(2), e1], 2)
    assert exc.value.sample == basis(2)
    with pytest.raises(PreconditionError):
        select_subsequence(replace(W, kernel_budget=2), [e1, e3, e1], 2)
    with pytest.raises(ValueError):
        select_subsequence(W, [e1, e3], 2)


def test_build_vector_examples():
    sel = select_subsequence(W, [e1, e3, e1 + e3], 2)
    cert = build_vector(W, [e1, e3], sel)
    assert cert.x_partial.computed == SparseVector({3: dyadic("1/4"), 7: dyadic("1/16")})
    assert cert.x_partial.tail_bound == dyadic("1/4")

    zero = build_vector(W, [ZERO_VEC] * 3, select_subsequence(W, [ZERO_VEC] * 3, 2))
    assert zero.x_partial.computed == ZERO_VEC and zero.x_partial.tail_bound == pow2(-2)

    sel = select_subsequence(W, [basis(1, 2), e3, e1], 2)
    cert = build_vector(W, [basis(1, 2), e3], sel)
    assert cert.x_partial.computed == SparseVector({5: dyadic("2/16"), 11: dyadic("1/256")})


def test_verify_examples():
    sel = select_subsequence(W, [e1, e3, e1 + e3], 2)
    cert = build_vector(W, [e1, e3, e1 + e3], sel)
    assert apply_power(T2B, 2, cert.x_partial.computed) == SparseVector({1: 1, 5: dyadic("1/4")})
    assert cert.checks[0].exact_error == dyadic("1/4")
    assert verify_certificate(cert).ok

    zero = build_certificate(W, [ZERO_VEC] * 5, 4)
    assert all(not c.exact_error for c in zero.checks)
    assert verify_certificate(zero).ok


def test_verify_detects_collapsed_selection():
    cert = build_certificate(W, [e1, e3, e1 + e3], 2)
    p1, p2 = cert.selection.picks
    tampered = replace(cert, selection=SubseqSelection((p1, replace(p2, m=p1.m, j=p1.j))))
    report = verify_certificate(tampered)
    assert not report.ok
    vanish = report.verdict("vanishing first sum")
    assert not vanish.ok
    assert vanish.witness == {"k": 2, "i": 1, "power": 0, "residue": e1}


@pytest.mark.parametrize("field_name", ["x_partial", "checks", "prefix", "K"])
def test_verify_detects_tampering(field_name):
    prefix = dense_prefix(ODD, 6)
    cert = build_certificate(W, prefix, 5)
    if field_name == "x_partial":
        bad = replace(cert, x_partial=CertifiedVector(cert.x_partial.computed + basis(99, pow2(-200)),
                                                      cert.x_partial.tail_bound, NormKind.SUP))
    elif field_name == "checks":
        bad = replace(cert, checks=cert.checks[:-1] + (replace(cert.checks[-1], membership_ok=False),))
    elif field_name == "prefix":
        bad = replace(cert, dense_prefix=(basis(1),) + cert.dense_prefix[1:])
    else:
        bad = replace(cert, K=4)
    assert not verify_certificate(bad).ok


def test_conditions_example_pass():
    report = check_conditions(W, dense_prefix(ODD, 20), 20)
    assert report.ok
    assert [v.name for v in report.verdicts] == [
        "(i) decay", "(ii) membership", "(iii) difference closure", "(iv) left inverse"]


def test_conditions_odd_sequence_fails_iii():
    report = check_conditions(replace(W, seq=PowerSequence(2, 1)), dense_prefix(ODD, 20), 20)
    assert not report.verdict("(iii) difference closure").ok


def test_conditions_forward_shift_fails_iv():
    samples = [e1] + dense_prefix(ODD, 20)
    report = check_conditions(replace(W, a=F), samples, 5)
    iv = report.verdict("(iv) left inverse")
    assert not iv.ok
    assert iv.witness == {"sample": e1, "image": basis(1, 2)}


def test_conditions_precondition():
    with pytest.raises(PreconditionError):
        check_conditions(W, [basis(2)], 3)


def test_le_examples():
    samples = [e1, e3, basis(5)] + dense_prefix(ODD, 20)
    report = check_le_criterion(T2B, A, ODD, samples, 10)
    assert not report.ok
    assert report.verdict("(1) decay").ok and report.verdict("(2) TA = I").ok
    inv = report.verdict("M invariant under T")
    assert not inv.ok and inv.witness["sample"] == e3 and inv.witness["image"] == basis(2, 2)
    assert report.info["status"].startswith("le-inapplicable; a witness")

    l1_samples = dense_prefix(SubspaceSpec.all(NormKind.L1), 30)
    report = check_le_criterion(T2B, A, SubspaceSpec.all(NormKind.L1), l1_samples, 10)
    assert report.verdict("(1) decay").ok and report.verdict("(2) TA = I").ok
    assert report.ok and report.info["status"] == "le-applicable"

    report = check_le_criterion(I, I, ODD, [e1], 5)
    assert not report.ok
    assert not report.verdict("samples in ker*(T)").ok
    assert report.info["status"] == "le-inapplicable"


prefixes = st.integers(2, 4).flatmap(lambda K: st.tuples(st.just(K), st.lists(odd_vectors, min_size=K + 1, max_size=K + 1)))


@settings(max_examples=40, deadline=None)
@given(prefixes)
def test_selection_matches_oracle(case):
    K, prefix = case
    assert select_subsequence(W, prefix, K).ms == oracle_select(prefix, K)


@settings(max_examples=40, deadline=None)
@given(prefixes)
def test_selection_soundness_and_minimality(case):
    K, prefix = case
    sel = select_subsequence(W, prefix, K)
    xs = [as_fractions(v) for v in prefix]
    prev = None
    for pick in sel.picks:
        k, m = pick.k, pick.m
        th = pick.thresholds
        assert W.seq.is_member(m)
        sup_here = max((abs(c) for c in a_power(xs[k - 1], m).values()), default=0)
        assert sup_here < 2.0 ** -k or sup_here == 0
        assert not t_power(xs[k - 1], m)
        if prev is not None:
            assert m >= 2 * prev
        for mm in range(m + 2, m + 40, 2):
            assert max((abs(c) for c in a_power(xs[k], mm).values()), default=0) < 2.0 ** -(k + 1) or not xs[k]
        # no smaller member meets all four recorded thresholds
        for smaller in range(2, m, 2):
            assert not (smaller >= th.decay_self and smaller >= th.kernel_p
                        and smaller >= (th.doubling or 0) and smaller + 2 >= th.decay_next)
        prev = m


@settings(max_examples=25, deadline=None)
@given(prefixes)
def test_decomposition_identity(case):
    K, prefix = case
    cert = build_certificate(W, prefix, K)
    ms = cert.selection.ms
    xs = [as_fractions(v) for v in prefix]
    x = {}
    for m, xk in zip(ms, xs):
        for i, c in a_power(xk, m).items():
            x[i] = x.get(i, 0) + c
    x = {i: c for i, c in x.items() if c}
    for k in range(1, K + 1):
        lhs = t_power(x, ms[k - 1])
        rhs = dict(xs[k - 1])
        for i in range(k + 1, K + 1):
            for idx, c in a_power(xs[i - 1], ms[i - 1] - ms[k - 1]).items():
                rhs[idx] = rhs.get(idx, 0) + c
        rhs = {i: c for i, c in rhs.items() if c}
        assert lhs == rhs
        assert as_fractions(apply_power(T2B, ms[k - 1], cert.x_partial.computed)) == lhs
    report = verify_certificate(cert)
    assert report.verdict("decomposition").ok and report.verdict("orbit membership").ok


@settings(max_examples=60, deadline=None)
@given(prefixes)
def test_certificate_soundness(case):
    K, prefix = case
    cert = build_certificate(W, prefix, K)
    ms = cert.selection.ms
    report = verify_certificate(cert)
    for rec in cert.checks:
        if rec.k > K - 2:
            continue
        holds = (rec.exact_error + pow2(-K)).to_fraction() < 2.0 ** -rec.k
        assert rec.bound_ok == holds
        if not holds:
            # only possible when doubling is tight: some difference m_ji - m_jk lands on
            # m_j(i-1) itself, below the lookahead region
            k = rec.k
            assert any(ms[i - 1] - ms[k - 1] <= ms[i - 2] for i in range(k + 1, K + 1))
            assert not report.verdict("density bound").ok
    others = [v for v in report.verdicts if v.name != "density bound"]
    assert all(v.ok for v in others)


def test_tight_doubling_boundary_case():
    # the selection lookahead covers powers strictly above m_j1 = 2, but the error at k = 1
    # carries A^(m_j2 - m_j1) x_2 = A^2 (2 e_1) = e_3 / 2
    prefix = [ZERO_VEC, basis(1, 2), ZERO_VEC, ZERO_VEC]
    cert = build_certificate(W, prefix, 3)
    assert cert.selection.ms == [2, 4, 8]
    assert cert.checks[0].exact_error == half
    report = verify_certificate(cert)
    assert not report.verdict("density bound").ok
    assert report.verdict("decomposition").ok and report.verdict("selection").ok


def test_certificate_document_round_trip():
    cert = build_certificate(W, dense_prefix(ODD, 7), 6)
    doc = json.loads(json.dumps(certificate_to_document(cert)))
    assert HypercyclicCertificate.from_config(doc["payload"]) == cert
    assert verify_document(doc).ok
    doc["payload"]["selection"][0]["thresholds"]["kernel_p"] += 1
    report = verify_document(doc)
    assert not report.verdict("payload digest").ok
    assert not report.verdict("selection").ok
    with pytest.raises(ConfigError):
        verify_document({"format": "other"})


def test_l1_scenario_certificate():
    m = SubspaceSpec.all(NormKind.L1)
    w = CriterionWitness(T2B, A, m, PowerSequence(2, 0), DecayCertificate(-1), 64)
    cert = build_certificate(w, dense_prefix(m, 9), 8)
    report = verify_certificate(cert)
    assert report.ok, report.summary_lines()


def test_witness_config_round_trip():
    assert CriterionWitness.from_config(json.loads(json.dumps(W.to_config()))) == W
    with pytest.raises(ConfigError):
        CriterionWitness.from_config({"t": "B"})
