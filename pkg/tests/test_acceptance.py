"""Acceptance criteria, one test each, run at their stated tolerances and time limits.

A pass/fail line per criterion is printed in the terminal summary (see conftest).
"""

import json
import random
import time
from fractions import Fraction

import pytest

from subhyper.cli import main
from subhyper.constructions import SubspaceSpec, build_S, build_T, check_invariance, check_quasiconjugacy
from subhyper.core import DyadicScalar, NormKind, SparseVector, basis, norm, pow2
from subhyper.criterion import HypercyclicCertificate, select_subsequence
from subhyper.operators import B, BiorthogonalSystem, Scale, apply, apply_power, kernel_index
from subhyper.orbits import DenseEnumerator, cumulative_count, dense_prefix, density_report
from subhyper.scenarios import load_scenario

from oracles import as_fractions, oracle_select, t_power

ODD = SubspaceSpec.parity("odd")
T2B = Scale(2, B)


class Clock:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def random_vector(rng, max_index=60, max_size=8, indices=None, max_exp=12):
    out = {}
    for _ in range(rng.randint(0, max_size)):
        i = rng.choice(indices) if indices else rng.randint(1, max_index)
        out[i] = DyadicScalar(rng.randint(-1000, 1000), rng.randint(0, max_exp))
    return SparseVector(out)


@pytest.fixture(scope="module")
def cert12(tmp_path_factory):
    path = tmp_path_factory.mktemp("accept") / "cert12.json"
    with Clock() as clock:
        code = main(["criterion-build", "--K", "12", "--out", str(path)])
    return path, code, clock.elapsed


@pytest.mark.acceptance(1, "quasiconjugacy T.phi = phi.S for k <= 500")
def test_quasiconjugacy():
    sc = load_scenario("thm1-construction")
    with Clock() as clock:
        report = check_quasiconjugacy(build_T(sc.system), build_S(), sc.system, 500)
    assert report.ok, report.summary_lines()
    assert clock.elapsed < 1.0


def t_oracle(x, sigma):
    """x + sum_n 2^-n x_{sigma(n+1)} e_{sigma(n)} in Fractions."""
    out = dict(as_fractions(x))
    coords = as_fractions(x)
    n = 1
    while sigma(n + 1) <= max(coords, default=0):
        c = coords.get(sigma(n + 1))
        if c:
            out[sigma(n)] = out.get(sigma(n), 0) + c / 2 ** n
        n += 1
    return {i: c for i, c in out.items() if c}


@pytest.mark.acceptance(2, "||Tx|| <= 2||x|| on 1000 random vectors")
def test_boundedness():
    sys = BiorthogonalSystem(2, -1)
    t = build_T(sys)
    rng = random.Random(2)
    xs = [random_vector(rng) for _ in range(1000)]
    with Clock() as clock:
        for x in xs:
            tx = apply(t, x)
            for kind in (NormKind.SUP, NormKind.L1):
                assert norm(tx, kind) <= 2 * norm(x, kind)
    assert clock.elapsed < 1.0
    for x in xs[:200]:
        assert as_fractions(apply(t, x)) == t_oracle(x, sys.sigma)


@pytest.mark.acceptance(3, "invariance of odd M under T, and the 2B counterexample")
def test_invariance():
    t = build_T(BiorthogonalSystem(2, -1))
    with Clock() as clock:
        report = check_invariance(t, ODD, dense_prefix(ODD, 200))
        counter = check_invariance(T2B, ODD, [basis(3)])
    assert report.ok
    assert not counter.ok
    witness = counter.verdict("invariance").witness
    assert witness["image"] == basis(2, 2)
    assert clock.elapsed < 1.0


@pytest.mark.acceptance(4, "criterion-check passes; A=F fails (iv); m_k=2k+1 fails (iii)")
def test_criterion_check(tmp_path):
    cases = [([], 0, None), (["--a-operator", "F"], 1, "(iv) left inverse"),
             (["--sequence", "2,1"], 1, "(iii) difference closure")]
    for extra, expected_code, failing in cases:
        out = tmp_path / "report.json"
        with Clock() as clock:
            code = main(["criterion-check", "--scenario", "example-linf", "--samples", "100",
                         "--k-probe", "20", "--out", str(out), *extra])
        assert clock.elapsed < 5.0
        assert code == expected_code
        verdicts = {v["name"]: v["ok"] for v in json.loads(out.read_text())["verdicts"]}
        if failing is None:
            assert len(verdicts) == 4 and all(verdicts.values())
        else:
            assert verdicts[failing] is False


@pytest.mark.acceptance(5, "criterion-build --K 12 certificate bounds and verification")
def test_certificate_end_to_end(cert12):
    path, code, elapsed = cert12
    assert code == 0
    doc = json.loads(path.read_text())
    payload = doc["payload"]
    K = payload["K"]
    assert K == 12
    tail = pow2(-K)
    for rec in payload["checks"]:
        k = rec["k"]
        if k <= 10:
            assert DyadicScalar.parse(rec["exact_error"]) + tail < pow2(-k)
    x = SparseVector.from_triples(payload["x_partial"]["computed"])
    ms = [p["m_jk"] for p in payload["selection"]]
    xf = as_fractions(x)
    for m in ms:
        assert all(i % 2 == 1 for i in apply_power(T2B, m, x).support())
        assert all(i % 2 == 1 for i in t_power(xf, m))
    with Clock() as clock:
        verify_code = main(["criterion-verify", str(path)])
    assert verify_code == 0
    assert elapsed + clock.elapsed < 10.0


@pytest.mark.acceptance(6, "selection equals the brute-force oracle on 50 prefixes")
def test_selection_oracle():
    w = load_scenario("example-linf").witness()
    rng = random.Random(6)
    odd = list(range(1, 40, 2))
    cases = []
    for _ in range(50):
        K = rng.randint(2, 5)
        prefix = [random_vector(rng, max_size=4, indices=odd, max_exp=6) for _ in range(K + 1)]
        cases.append((K, prefix))
    mismatches = 0
    with Clock() as clock:
        for K, prefix in cases:
            if select_subsequence(w, prefix, K).ms != oracle_select(prefix, K):
                mismatches += 1
    assert mismatches == 0
    assert clock.elapsed < 10.0


@pytest.mark.acceptance(7, "kernel_index(2B) equals max support on 1000 vectors")
def test_kernel_oracle():
    rng = random.Random(7)
    xs = [random_vector(rng, max_index=200) for _ in range(1000)]
    with Clock() as clock:
        got = [kernel_index(T2B, x, 256) for x in xs]
    assert clock.elapsed < 1.0
    for x, p in zip(xs, got):
        assert p == max(x.support(), default=0)
        # brute force: iterate the closed form until the vector vanishes
        xf, q = as_fractions(x), 0
        while xf:
            xf, q = t_power(xf, 1), q + 1
        assert p == q


@pytest.mark.acceptance(8, "enumeration emits every level <= 2 odd vector exactly once")
def test_enumeration_completeness():
    with Clock() as clock:
        n2 = cumulative_count(2)
        emitted = DenseEnumerator(ODD).take(n2)
        position = {}
        for n, v in enumerate(emitted, 1):
            key = tuple(sorted(as_fractions(v).items()))
            assert key not in position
            position[key] = n
        level1 = {((1, Fraction(p, 2)),) if p else () for p in range(-4, 5)}
        level2 = set()
        for p in range(-16, 17):
            for q in range(-16, 17):
                level2.add(tuple((i, Fraction(c, 4)) for i, c in ((1, p), (3, q)) if c))
        assert level1 <= level2
        assert set(position) == level2
        assert all(position[v] <= cumulative_count(1) for v in level1)
        assert all(i % 2 == 1 for v in emitted for i in v.support())
    assert n2 == 1089
    assert clock.elapsed < 5.0


@pytest.mark.acceptance(9, "density hits at m_jk within 2^-k for the first 8 targets")
def test_density_evidence(cert12):
    path, code, _ = cert12
    assert code == 0
    cert = HypercyclicCertificate.from_config(json.loads(path.read_text())["payload"])
    ms = cert.selection.ms
    with Clock() as clock:
        rep = density_report(cert.witness.t, cert.x_partial, cert.dense_prefix[:8],
                             [pow2(-k) for k in range(1, 9)], ms[-1], cert.witness.norm, ms)
    assert clock.elapsed < 5.0
    for k, hit in enumerate(rep.hits, 1):
        assert hit.orbit_index == ms[k - 1]
        assert hit.distance < pow2(-k)
