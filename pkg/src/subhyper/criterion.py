"""Generalized-kernel criterion for subspace-hypercyclicity, made finite.

Given ``T``, a right inverse ``A`` on ``ker*(T) ∩ M``, a difference-closed
power sequence ``(m_k)`` and a dense sequence ``(x_k)`` in ``ker*(T) ∩ M``,
the vector

    x = sum_k A^{m_{j_k}} x_k

satisfies ``||T^{m_{j_k}} x - x_k|| < 2^-k`` for a suitably sparse
subsequence ``m_{j_k}``. This module picks that subsequence greedily,
builds the truncation of ``x`` after K terms together with its analytic tail
bound, and re-derives every inequality from the resulting certificate.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

from .constructions import SubspaceSpec, check_invariance
from .core import (
    CertifiedVector,
    DyadicScalar,
    NormKind,
    SparseVector,
    basis,
    lt_pow2,
    norm,
    pow2,
    vec_axpy,
)
from .operators import (
    Compose,
    ConfigError,
    ForwardShift,
    OperatorExpr,
    Power,
    Scale,
    WeightedForwardShift,
    apply,
    apply_power,
    is_left_inverse_on,
    kernel_index,
    parse_operator,
)
from .reports import Report, Verdict

__all__ = [
    "PowerSequence",
    "DecayCertificate",
    "CriterionWitness",
    "Thresholds",
    "Pick",
    "SubseqSelection",
    "CheckRecord",
    "HypercyclicCertificate",
    "PreconditionError",
    "SelectionError",
    "DecayCertificateError",
    "infer_decay",
    "check_conditions",
    "decay_threshold",
    "select_subsequence",
    "build_vector",
    "build_certificate",
    "verify_certificate",
    "certificate_to_document",
    "verify_document",
    "check_le_criterion",
    "DEFAULT_SCAN_LIMIT",
]

DEFAULT_SCAN_LIMIT = 10_000
CERTIFICATE_FORMAT = "subhyper-certificate/1"


class PreconditionError(ValueError):
    """A sample does not lie in ``ker*(T) ∩ M`` (within the kernel budget)."""

    def __init__(self, sample: SparseVector, reason: str):
        super().__init__(f"sample {sample}: {reason}")
        self.sample = sample
        self.reason = reason


class SelectionError(RuntimeError):
    """A threshold search exceeded its scan limit."""


class DecayCertificateError(RuntimeError):
    """An observed power norm disagrees with the decay certificate."""

    def __init__(self, x: SparseVector, m: int, actual: DyadicScalar, predicted: DyadicScalar):
        super().__init__(f"||A^{m} {x}|| = {actual}, certificate predicts {predicted}")
        self.x, self.m, self.actual, self.predicted = x, m, actual, predicted


@dataclass(frozen=True)
class PowerSequence:
    """The affine sequence ``m_k = a*k + b`` for k >= 1."""

    a: int
    b: int = 0

    def __post_init__(self):
        if not isinstance(self.a, int) or not isinstance(self.b, int):
            raise ValueError("sequence parameters must be integers")
        if self.a < 1:
            raise ValueError("sequence must be strictly increasing (a >= 1)")
        if self.a + self.b < 1:
            raise ValueError("m_1 must be a positive integer")

    def member(self, k: int) -> int:
        if k < 1:
            raise ValueError("sequence is indexed from 1")
        return self.a * k + self.b

    def index_of(self, m: int) -> Optional[int]:
        q, r = divmod(m - self.b, self.a)
        if r or q < 1:
            return None
        return q

    def is_member(self, m: int) -> bool:
        return self.index_of(m) is not None

    def ceil(self, v: int) -> int:
        """Least member >= v."""
        if v <= self.member(1):
            return self.member(1)
        k = -(-(v - self.b) // self.a)
        return self.member(k)

    def succ(self, m: int) -> int:
        return m + self.a

    @property
    def difference_closed(self) -> bool:
        # m_j - m_i = a(j - i) + 0 lies in the sequence exactly when b == 0
        return self.b == 0

    def to_config(self) -> list:
        return [self.a, self.b]

    @classmethod
    def from_config(cls, data) -> PowerSequence:
        if (not isinstance(data, list) or len(data) != 2
                or not all(isinstance(v, int) and not isinstance(v, bool) for v in data)):
            raise ConfigError(f"sequence must be [a, b] meaning m_k = a*k + b, got {data!r}")
        try:
            return cls(data[0], data[1])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def __str__(self) -> str:
        if self.b == 0:
            return f"({self.a}k)"
        return f"({self.a}k{self.b:+d})"


@dataclass(frozen=True)
class DecayCertificate:
    """Asserts ``||A^m x|| = 2^(r_exp*m) ||x||`` for every finitely supported x."""

    r_exp: int
    kind: str = "exact_geometric"

    def __post_init__(self):
        if self.kind != "exact_geometric":
            raise ValueError(f"unknown decay certificate kind {self.kind!r}")
        if not isinstance(self.r_exp, int) or self.r_exp >= 0:
            raise ValueError("a decay certificate needs a negative exponent")

    def predict(self, x_norm: DyadicScalar, m: int) -> DyadicScalar:
        return x_norm.shift2(self.r_exp * m)

    def to_config(self) -> dict:
        return {self.kind: self.r_exp}

    @classmethod
    def from_config(cls, data) -> DecayCertificate:
        if not isinstance(data, dict) or list(data) != ["exact_geometric"]:
            raise ConfigError(f"decay must be {{'exact_geometric': r}}, got {data!r}")
        r = data["exact_geometric"]
        if not isinstance(r, int) or isinstance(r, bool):
            raise ConfigError("decay exponent must be an integer")
        try:
            return cls(r)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


def _log2_exact(c: DyadicScalar) -> Optional[int]:
    num = abs(c.numerator)
    if num == 0 or num & (num - 1):
        return None
    return num.bit_length() - 1 - c.exponent


def _isometric_scale_exponent(op: OperatorExpr) -> Optional[int]:
    """r such that op = c*(isometry) with |c| = 2^r, when recognizable."""
    if isinstance(op, ForwardShift):
        return 0
    if isinstance(op, WeightedForwardShift) and op.w.kind == "constant":
        return _log2_exact(op.w.c)
    if isinstance(op, Scale):
        inner, r = _isometric_scale_exponent(op.inner), _log2_exact(op.c)
        return None if inner is None or r is None else inner + r
    if isinstance(op, Compose):
        outer, inner = _isometric_scale_exponent(op.outer), _isometric_scale_exponent(op.inner)
        return None if outer is None or inner is None else outer + inner
    if isinstance(op, Power):
        inner = _isometric_scale_exponent(op.inner)
        return None if inner is None else inner * op.m
    return None


def infer_decay(a: OperatorExpr, kind: NormKind = NormKind.SUP) -> Optional[DecayCertificate]:
    """Recognize ``A = c*F`` (|c| a power of two below 1) and return its decay certificate.

    The forward shift is an isometry in both l1 and sup norms, so the same
    exponent applies to either.
    """
    r = _isometric_scale_exponent(a)
    if r is None or r >= 0:
        return None
    return DecayCertificate(r)


@dataclass(frozen=True)
class CriterionWitness:
    t: OperatorExpr
    a: OperatorExpr
    m: SubspaceSpec
    seq: PowerSequence
    decay: DecayCertificate
    kernel_budget: int = 64

    def __post_init__(self):
        if self.kernel_budget < 1:
            raise ValueError("kernel budget must be positive")

    @property
    def norm(self) -> NormKind:
        return self.m.norm

    def to_config(self) -> dict:
        return {
            "t": self.t.to_config(),
            "a": self.a.to_config(),
            "subspace": self.m.to_config(),
            "sequence": self.seq.to_config(),
            "decay": self.decay.to_config(),
            "kernel_budget": self.kernel_budget,
        }

    @classmethod
    def from_config(cls, data) -> CriterionWitness:
        try:
            budget = data["kernel_budget"]
            if not isinstance(budget, int) or isinstance(budget, bool) or budget < 1:
                raise ConfigError("kernel_budget must be a positive integer")
            return cls(
                parse_operator(data["t"]),
                parse_operator(data["a"]),
                SubspaceSpec.from_config(data["subspace"]),
                PowerSequence.from_config(data["sequence"]),
                DecayCertificate.from_config(data["decay"]),
                budget,
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"incomplete criterion witness: {exc}") from None


@dataclass(frozen=True)
class Thresholds:
    decay_self: int
    decay_next: int
    kernel_p: int
    doubling: Optional[int]

    def to_config(self) -> dict:
        return {
            "decay_self": self.decay_self,
            "decay_next": self.decay_next,
            "kernel_p": self.kernel_p,
            "doubling": self.doubling,
        }

    @classmethod
    def from_config(cls, data) -> Thresholds:
        return cls(data["decay_self"], data["decay_next"], data["kernel_p"], data["doubling"])


@dataclass(frozen=True)
class Pick:
    k: int
    j: int
    m: int
    thresholds: Thresholds

    def to_config(self) -> dict:
        return {"k": self.k, "j_k": self.j, "m_jk": self.m,
                "thresholds": self.thresholds.to_config()}

    @classmethod
    def from_config(cls, data) -> Pick:
        return cls(data["k"], data["j_k"], data["m_jk"], Thresholds.from_config(data["thresholds"]))


@dataclass(frozen=True)
class SubseqSelection:
    picks: tuple

    @property
    def ms(self) -> list[int]:
        return [p.m for p in self.picks]

    def __len__(self) -> int:
        return len(self.picks)

    def to_config(self) -> list:
        return [p.to_config() for p in self.picks]

    @classmethod
    def from_config(cls, data) -> SubseqSelection:
        return cls(tuple(Pick.from_config(p) for p in data))


@dataclass(frozen=True)
class CheckRecord:
    k: int
    exact_error: DyadicScalar
    tail_bound: DyadicScalar
    membership_ok: bool
    vanishing_ok: bool
    asserted: bool
    bound_ok: bool

    def to_config(self) -> dict:
        return {
            "k": self.k,
            "exact_error": str(self.exact_error),
            "tail_bound": str(self.tail_bound),
            "membership_ok": self.membership_ok,
            "vanishing_ok": self.vanishing_ok,
            "asserted": self.asserted,
            "bound_ok": self.bound_ok,
        }

    @classmethod
    def from_config(cls, data) -> CheckRecord:
        return cls(
            data["k"],
            DyadicScalar.parse(data["exact_error"]),
            DyadicScalar.parse(data["tail_bound"]),
            data["membership_ok"],
            data["vanishing_ok"],
            data["asserted"],
            data["bound_ok"],
        )


@dataclass(frozen=True)
class HypercyclicCertificate:
    witness: CriterionWitness
    K: int
    dense_prefix: tuple
    selection: SubseqSelection
    x_partial: CertifiedVector
    checks: tuple = field(default=())

    def to_config(self) -> dict:
        return {
            "witness": self.witness.to_config(),
            "K": self.K,
            "dense_prefix": [x.to_triples() for x in self.dense_prefix],
            "selection": self.selection.to_config(),
            "x_partial": self.x_partial.to_dict(),
            "checks": [c.to_config() for c in self.checks],
        }

    @classmethod
    def from_config(cls, data) -> HypercyclicCertificate:
        try:
            return cls(
                CriterionWitness.from_config(data["witness"]),
                data["K"],
                tuple(SparseVector.from_triples(t) for t in data["dense_prefix"]),
                SubseqSelection.from_config(data["selection"]),
                CertifiedVector.from_dict(data["x_partial"]),
                tuple(CheckRecord.from_config(c) for c in data["checks"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed certificate: {exc}") from None


# -- conditions -------------------------------------------------------------


def _require_in_domain(w: CriterionWitness, x: SparseVector) -> int:
    """Kernel index of x, raising PreconditionError unless x is in ker*(T) ∩ M."""
    outside = w.m.first_outside(x)
    if outside is not None:
        raise PreconditionError(x, f"index {outside} is outside {w.m}")
    p = kernel_index(w.t, x, w.kernel_budget)
    if p is None:
        raise PreconditionError(x, f"not annihilated by T^p for p <= {w.kernel_budget}")
    return p


def check_conditions(w: CriterionWitness, samples: Sequence[SparseVector], k_probe: int) -> Report:
    """Verdicts for the four hypotheses on a finite sample of ``ker*(T) ∩ M``.

    (i) decay is checked by validating the decay certificate exactly for the
    powers m_1..m_{k_probe}; (ii) A^{m_k} x must stay in M and in ker*(T);
    (iii) difference closure is decided on the affine rule; (iv) T(Ax) = x.
    """
    if k_probe < 1:
        raise ValueError("k_probe must be positive")
    samples = list(samples)
    for x in samples:
        _require_in_domain(w, x)

    kind = w.norm
    seq = w.seq
    decay_fail, member_fail = [], []
    for x in samples:
        x_norm = norm(x, kind)
        m = seq.member(1)
        v = apply_power(w.a, m, x)
        for k in range(1, k_probe + 1):
            if k > 1:
                v = apply_power(w.a, seq.a, v)
                m += seq.a
            actual = norm(v, kind)
            predicted = w.decay.predict(x_norm, m)
            if actual != predicted:
                decay_fail.append({"sample": x, "m": m, "actual": actual, "predicted": predicted})
            outside = w.m.first_outside(v)
            if outside is not None:
                member_fail.append({"sample": x, "m": m, "image": v, "reason": f"index {outside} outside M"})
            elif kernel_index(w.t, v, w.kernel_budget + m) is None:
                member_fail.append({"sample": x, "m": m, "image": v, "reason": "not in ker*(T) within budget"})

    report = Report("criterion conditions", info={
        "t": w.t, "a": w.a, "subspace": str(w.m), "sequence": str(seq),
        "samples": len(samples), "k_probe": k_probe,
    })
    powers = f"m_1..m_{k_probe}"
    report.add(Verdict(
        "(i) decay",
        not decay_fail,
        f"certificate 2^({w.decay.r_exp}*m) confirmed on {len(samples)} samples for {powers}"
        if not decay_fail else f"{len(decay_fail)} norm mismatches",
        decay_fail,
    ))
    report.add(Verdict(
        "(ii) membership",
        not member_fail,
        f"A^m x in ker*(T) ∩ M for {powers}" if not member_fail
        else f"{len(member_fail)} images leave ker*(T) ∩ M",
        member_fail,
    ))
    if seq.difference_closed:
        report.add(Verdict("(iii) difference closure", True, f"m_j - m_i = m_(j-i) for {seq}"))
    else:
        m1, m2 = seq.member(1), seq.member(2)
        report.add(Verdict(
            "(iii) difference closure", False, f"offset b = {seq.b} != 0",
            [{"m_i": m1, "m_j": m2, "difference": m2 - m1}],
        ))
    left = is_left_inverse_on(w.t, w.a, samples).verdict("left_inverse")
    report.add(Verdict("(iv) left inverse", left.ok, left.detail, left.witnesses))
    return report


# -- selection --------------------------------------------------------------


def decay_threshold(w: CriterionWitness, x: SparseVector, k: int,
                    scan_limit: int = DEFAULT_SCAN_LIMIT) -> int:
    """Least member m* with ``||A^m x|| < 2^-k`` for every member m >= m*.

    Norms are recomputed exactly for each member scanned and compared with
    the decay certificate; the certified strict decrease makes the first hit
    valid for all later members.
    """
    seq = w.seq
    m = seq.member(1)
    if not x:
        return m
    kind = w.norm
    x_norm = norm(x, kind)
    v = apply_power(w.a, m, x)
    for _ in range(scan_limit):
        actual = norm(v, kind)
        predicted = w.decay.predict(x_norm, m)
        if actual != predicted:
            raise DecayCertificateError(x, m, actual, predicted)
        if lt_pow2(actual, k):
            return m
        v = apply_power(w.a, seq.a, v)
        m += seq.a
    raise SelectionError(f"||A^m {x}|| not below 2^-{k} within {scan_limit} members")


def select_subsequence(w: CriterionWitness, dense_prefix: Sequence[SparseVector], K: int,
                       scan_limit: int = DEFAULT_SCAN_LIMIT) -> SubseqSelection:
    """Greedy least admissible choice of ``m_{j_1} < ... < m_{j_K}``.

    m_{j_k} is the least member that is at least the decay threshold of x_k,
    the kernel index of x_k and twice m_{j_(k-1)}, and whose successor member
    already pushes x_{k+1} below 2^-(k+1).
    """
    if K < 1:
        raise ValueError("K must be positive")
    if len(dense_prefix) < K + 1:
        raise ValueError(f"need {K + 1} prefix vectors, got {len(dense_prefix)}")
    prefix = list(dense_prefix[:K + 1])
    kernel = [_require_in_domain(w, x) for x in prefix]
    seq = w.seq
    picks = []
    prev = None
    for k in range(1, K + 1):
        ds = decay_threshold(w, prefix[k - 1], k, scan_limit)
        dn = decay_threshold(w, prefix[k], k + 1, scan_limit)
        doubling = None if prev is None else 2 * prev
        m = seq.ceil(max(ds, kernel[k - 1], doubling or 0))
        steps = 0
        while seq.succ(m) < dn:
            m = seq.succ(m)
            steps += 1
            if steps > scan_limit:
                raise SelectionError(f"lookahead for k={k} exceeded {scan_limit} members")
        picks.append(Pick(k, seq.index_of(m), m, Thresholds(ds, dn, kernel[k - 1], doubling)))
        prev = m
    return SubseqSelection(tuple(picks))


# -- construction and verification ------------------------------------------


def _partial_sum(w: CriterionWitness, prefix: Sequence[SparseVector], ms: Sequence[int]) -> SparseVector:
    total = SparseVector()
    for m, x in zip(ms, prefix):
        total = vec_axpy(1, apply_power(w.a, m, x), total)
    return total


def build_vector(w: CriterionWitness, dense_prefix: Sequence[SparseVector],
                 sel: SubseqSelection) -> HypercyclicCertificate:
    """Truncate ``x = sum_k A^{m_{j_k}} x_k`` after K terms and record the per-k checks."""
    K = len(sel)
    if len(dense_prefix) < K:
        raise ValueError(f"need at least {K} prefix vectors")
    prefix = tuple(dense_prefix[:K + 1])
    computed = _partial_sum(w, prefix, sel.ms)
    cert = HypercyclicCertificate(w, K, prefix, sel, CertifiedVector(computed, pow2(-K), w.norm))
    return replace(cert, checks=tuple(_orbit_checks(cert)[0]))


def build_certificate(w: CriterionWitness, dense_prefix: Sequence[SparseVector], K: int,
                      scan_limit: int = DEFAULT_SCAN_LIMIT) -> HypercyclicCertificate:
    return build_vector(w, dense_prefix, select_subsequence(w, dense_prefix, K, scan_limit))


def _orbit_checks(cert: HypercyclicCertificate):
    """Recompute every per-k record straight from T-powers.

    Returns the records plus witnesses for vanishing and membership failures.
    """
    w, K = cert.witness, cert.K
    kind = w.norm
    ms = cert.selection.ms
    prefix = cert.dense_prefix
    x = cert.x_partial.computed
    tail = pow2(-K)
    records, vanish_fail, member_fail = [], [], []
    for k in range(1, K + 1):
        mk = ms[k - 1]
        vanishing_ok = True
        for i in range(1, k):
            d = mk - ms[i - 1]
            residue = prefix[i - 1] if d < 0 else apply_power(w.t, d, prefix[i - 1])
            if d < 0 or residue:
                vanishing_ok = False
                vanish_fail.append({"k": k, "i": i, "power": d, "residue": residue})
        point = apply_power(w.t, mk, x)
        error = norm(point - prefix[k - 1], kind)
        outside = w.m.first_outside(point)
        if outside is not None:
            member_fail.append({"k": k, "orbit_point": point, "index": outside})
        records.append(CheckRecord(
            k=k,
            exact_error=error,
            tail_bound=tail,
            membership_ok=outside is None,
            vanishing_ok=vanishing_ok,
            asserted=k <= K - 2,
            bound_ok=lt_pow2(error + tail, k),
        ))
    return records, vanish_fail, member_fail


def verify_certificate(cert: HypercyclicCertificate) -> Report:
    """Re-derive every verdict of a certificate from its own contents.

    The T-powers are recomputed directly; the right-inverse relation is
    never assumed.
    """
    w, K = cert.witness, cert.K
    sel = cert.selection
    prefix = cert.dense_prefix
    ms = sel.ms
    report = Report("certificate", info={"K": K, "m_jk": ms})

    problems = []
    if K < 1:
        problems.append("K must be positive")
    if len(sel) != K:
        problems.append(f"selection has {len(sel)} picks, K = {K}")
    if len(prefix) < K:
        problems.append(f"dense prefix has {len(prefix)} vectors, K = {K}")
    if cert.x_partial.tail_bound != pow2(-K):
        problems.append(f"tail bound {cert.x_partial.tail_bound} != 2^-{K}")
    if cert.x_partial.norm is not w.norm:
        problems.append("x_partial norm differs from the subspace norm")
    report.add(Verdict("structure", not problems, "; ".join(problems) or f"K = {K}", problems))
    if problems:
        return report

    dom_fail = []
    for idx, x in enumerate(prefix, start=1):
        try:
            _require_in_domain(w, x)
        except PreconditionError as exc:
            dom_fail.append({"index": idx, "sample": x, "reason": exc.reason})
    report.add(Verdict("prefix in ker*(T) ∩ M", not dom_fail, f"{len(prefix)} vectors", dom_fail))
    if dom_fail:
        return report

    sel_fail = []
    for pick, k in zip(sel.picks, range(1, K + 1)):
        if pick.k != k or w.seq.index_of(pick.m) != pick.j:
            sel_fail.append({"k": k, "reason": "pick is not the recorded member of the sequence"})
    for k in range(1, K):
        if ms[k] < 2 * ms[k - 1]:
            sel_fail.append({"k": k + 1, "reason": f"m_j{k + 1} = {ms[k]} < 2*{ms[k - 1]}"})
    if len(prefix) >= K + 1 and not sel_fail:
        try:
            fresh = select_subsequence(w, prefix, K)
        except (SelectionError, DecayCertificateError) as exc:
            sel_fail.append({"reason": str(exc)})
        else:
            for old, new in zip(sel.picks, fresh.picks):
                if old != new:
                    sel_fail.append({"k": old.k, "recorded": old.to_config(), "derived": new.to_config()})
    report.add(Verdict(
        "selection", not sel_fail,
        "least admissible picks reproduced" if len(prefix) >= K + 1 else "structural checks only",
        sel_fail,
    ))

    expected = _partial_sum(w, prefix, ms)
    same = expected == cert.x_partial.computed
    report.add(Verdict(
        "x_partial", same, "sum of A^{m_jk} x_k reproduced" if same else "stored truncation differs",
        [] if same else [{"stored": cert.x_partial.computed, "derived": expected}],
    ))

    records, vanish_fail, member_fail = _orbit_checks(cert)
    report.add(Verdict("vanishing first sum", not vanish_fail,
                       "T^(m_jk - m_ji) x_i = 0 for all i < k", vanish_fail))

    decomp_fail = []
    x = cert.x_partial.computed
    for k in range(1, K + 1):
        rhs = prefix[k - 1]
        for i in range(k + 1, K + 1):
            rhs = vec_axpy(1, apply_power(w.a, ms[i - 1] - ms[k - 1], prefix[i - 1]), rhs)
        lhs = apply_power(w.t, ms[k - 1], x)
        if lhs != rhs:
            decomp_fail.append({"k": k, "lhs": lhs, "rhs": rhs})
    report.add(Verdict("decomposition", not decomp_fail,
                       "T^{m_jk} x = x_k + sum_{i>k} A^{m_ji - m_jk} x_i", decomp_fail))

    bound_fail = []
    for r in records:
        if r.asserted and not r.bound_ok:
            # a difference m_ji - m_jk equal to m_j(i-1) sits below the lookahead region
            tight = [i for i in range(r.k + 1, K + 1) if ms[i - 1] - ms[r.k - 1] <= ms[i - 2]]
            bound_fail.append({"k": r.k, "exact_error": r.exact_error, "tail_bound": r.tail_bound,
                               "tight_doubling_at": tight})
    scope = f"k <= {K - 2}" if K > 2 else "no k (K <= 2, all informational)"
    report.add(Verdict(
        "density bound", not bound_fail, f"exact_error + 2^-{K} < 2^-k for {scope}", bound_fail,
    ))
    report.add(Verdict("orbit membership", not member_fail,
                       "T^{m_jk} x supported in M", member_fail))

    recorded_fail = []
    if len(cert.checks) != len(records):
        recorded_fail.append({"reason": f"{len(cert.checks)} stored records, {len(records)} derived"})
    else:
        for old, new in zip(cert.checks, records):
            if old != new:
                recorded_fail.append({"k": new.k, "recorded": old.to_config(), "derived": new.to_config()})
    report.add(Verdict("recorded checks", not recorded_fail, "stored per-k records match", recorded_fail))

    report.info["checks"] = [r.to_config() for r in records]
    report.info["informational"] = [r.to_config() for r in records if not r.asserted]
    return report


def _digest(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def certificate_to_document(cert: HypercyclicCertificate) -> dict:
    payload = cert.to_config()
    return {"format": CERTIFICATE_FORMAT, "payload": payload, "sha256": _digest(payload)}


def verify_document(doc) -> Report:
    """Verify a certificate document (as loaded from JSON) using nothing else.

    Raises ConfigError only when ``doc`` is not a certificate document at all.
    """
    if not isinstance(doc, dict) or doc.get("format") != CERTIFICATE_FORMAT:
        raise ConfigError("not a certificate document")
    payload = doc.get("payload")
    try:
        cert = HypercyclicCertificate.from_config(payload)
    except ConfigError as exc:
        # a recognisable certificate whose payload no longer parses counts as a failed check
        report = Report("certificate")
        report.add(Verdict("payload well-formed", False, str(exc)))
    else:
        report = verify_certificate(cert)
    digest_ok = doc.get("sha256") == _digest(payload)
    report.verdicts.insert(0, Verdict(
        "payload digest", digest_ok, "sha256 of canonical payload",
        [] if digest_ok else [{"stored": doc.get("sha256"), "derived": _digest(payload)}],
    ))
    return report


# -- Le's criterion -------------------------------------------------------------


def check_le_criterion(t: OperatorExpr, a: OperatorExpr, m: SubspaceSpec,
                       samples: Iterable[SparseVector], k_probe: int,
                       decay: Optional[DecayCertificate] = None,
                       kernel_budget: int = 256) -> Report:
    """Check the hypotheses of the kernel criterion in its subspace form.

    Besides A^m x -> 0 and TA = I on the samples, the subspace form needs
    ker*(T) inside M (probed on the samples and on basis vectors up to the
    largest sample index) and T-invariance of M.
    """
    samples = list(samples)
    kind = m.norm
    report = Report("Le criterion", info={"t": t, "a": a, "subspace": str(m), "samples": len(samples)})

    ker_fail = [{"sample": x} for x in samples if kernel_index(t, x, kernel_budget) is None]
    report.add(Verdict("samples in ker*(T)", not ker_fail, f"budget {kernel_budget}", ker_fail))

    if decay is None:
        decay = infer_decay(a, kind)
    if decay is None:
        report.add(Verdict("(1) decay", False, f"no geometric decay certificate for {a}"))
    else:
        decay_fail = []
        for x in samples:
            x_norm = norm(x, kind)
            v = x
            for p in range(1, k_probe + 1):
                v = apply(a, v)
                actual = norm(v, kind)
                if actual != decay.predict(x_norm, p):
                    decay_fail.append({"sample": x, "m": p, "actual": actual})
                    break
        report.add(Verdict("(1) decay", not decay_fail,
                           f"||A^m x|| = 2^({decay.r_exp}*m)||x|| for m <= {k_probe}", decay_fail))

    left = is_left_inverse_on(t, a, samples).verdict("left_inverse")
    report.add(Verdict("(2) TA = I", left.ok, left.detail, left.witnesses))

    contain_fail = [{"sample": x, "index": m.first_outside(x)} for x in samples if not m.contains(x)]
    top = max((x.max_index() for x in samples), default=0)
    for i in range(1, top + 1):
        if not m.allows(i) and kernel_index(t, basis(i), kernel_budget) is not None:
            contain_fail.append({"basis": i, "reason": f"e_{i} in ker*(T) but outside M"})
    report.add(Verdict("ker*(T) inside M", not contain_fail,
                       f"samples and e_1..e_{top}", contain_fail))

    members = [x for x in samples if m.contains(x)]
    inv = check_invariance(t, m, members).verdict("invariance")
    report.add(Verdict("M invariant under T", inv.ok, inv.detail, inv.witnesses))

    core_ok = all(v.ok for v in report.verdicts[:3])
    if report.ok:
        status = "le-applicable"
    elif core_ok:
        status = "le-inapplicable; a witness for the generalized kernel criterion may exist"
    else:
        status = "le-inapplicable"
    report.info["status"] = status
    return report
