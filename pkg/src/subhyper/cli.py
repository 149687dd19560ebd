"""Command-line front end.

Exit status is 0 when every check of the invoked pipeline passes, 1 when a
check fails (the JSON report is still written) and 2 on config or argument
errors. Reports go to ``--out``; without it they go to
``$SUBHYPER_OUT_DIR/<command>.json`` when that variable is set.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .constructions import NotAMemberError, build_S, build_T, check_invariance, check_quasiconjugacy
from .core import SparseVector, norm, pow2
from .criterion import (
    DecayCertificateError,
    HypercyclicCertificate,
    PowerSequence,
    PreconditionError,
    SelectionError,
    build_certificate,
    certificate_to_document,
    check_conditions,
    check_le_criterion,
    verify_certificate,
    verify_document,
)
from .operators import ConfigError, apply, operator_norm_bound, parse_operator
from .orbits import dense_prefix, density_report, orbit
from .reports import Report, Verdict
from .scenarios import load_scenario

OUT_DIR_ENV = "SUBHYPER_OUT_DIR"


class CheckFailed(Exception):
    pass


def _parse_operator_flag(text: str):
    text = text.strip()
    if text[:1] in "{[\"":
        try:
            data = json.loads(text, parse_float=_no_float)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad operator JSON: {exc}") from None
    else:
        data = text
    return parse_operator(data)


def _no_float(text):
    raise ConfigError(f"decimal literal {text} not allowed; use p/2^e")


def _parse_sequence_flag(text: str) -> PowerSequence:
    parts = text.split(",")
    try:
        a, b = (int(p) for p in parts)
    except ValueError:
        raise ConfigError(f"--sequence expects 'a,b' (m_k = a*k + b), got {text!r}") from None
    return PowerSequence.from_config([a, b])


def _parse_vector_flag(text: str) -> SparseVector:
    try:
        return SparseVector.parse(text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _out_path(args, command: str) -> Optional[Path]:
    if getattr(args, "out", None):
        return Path(args.out)
    env = os.environ.get(OUT_DIR_ENV)
    if env:
        return Path(env) / f"{command}.json"
    return None


def _write_json(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _emit(args, command: str, document, started: float, text: Optional[str] = None) -> None:
    path = _out_path(args, command)
    if path is not None:
        _write_json(path, document)
        # timestamps and versions live in a sidecar so the report stays byte-stable
        meta = {"tool": "subhyper", "version": __version__, "command": command,
                "wall_time_s": round(time.perf_counter() - started, 6)}
        _write_json(path.with_name(path.name + ".meta.json"), meta)
    if text is not None:
        print(text)


def _finish(report: Report) -> int:
    return 0 if report.ok else 1


# -- subcommands ------------------------------------------------------------


def cmd_construct(args, started) -> int:
    sc = load_scenario(args.scenario)
    if sc.system is None:
        raise ConfigError(f"scenario {sc.name!r} has no biorthogonal system")
    t = build_T(sc.system)
    m = sc.subspace
    kind = m.norm
    n = args.samples or sc.samples
    samples = dense_prefix(m, n)
    report = Report("construct", info={"scenario": sc.name, "operator": t, "system": sc.system,
                                       "subspace": str(m), "samples": n})
    bound = operator_norm_bound(t, kind)
    limit = 1 + sc.system.C
    report.add(Verdict("norm bound", bound <= limit, f"||T|| <= {bound} (1 + C = {limit})"))
    over = []
    for x in samples:
        lhs, rhs = norm(apply(t, x), kind), bound * norm(x, kind)
        if lhs > rhs:
            over.append({"sample": x, "norm_Tx": lhs, "bound": rhs})
    report.add(Verdict("boundedness", not over, f"||Tx|| <= {bound}||x|| on {n} samples", over))
    inv = check_invariance(t, m, samples).verdict("invariance")
    report.add(inv)
    report.info["basis_action"] = {
        f"T x_{k}": apply(t, sc.system.vector(k)) for k in range(1, 6)
    }
    _emit(args, "construct", report.to_dict(), started, "\n".join(report.summary_lines()))
    return _finish(report)


def cmd_conjugacy(args, started) -> int:
    sc = load_scenario(args.scenario)
    if sc.system is None:
        raise ConfigError(f"scenario {sc.name!r} has no biorthogonal system")
    report = check_quasiconjugacy(build_T(sc.system), build_S(), sc.system, args.n)
    _emit(args, "conjugacy", report.to_dict(), started, "\n".join(report.summary_lines()))
    return _finish(report)


def _criterion_scenario(args):
    sc = load_scenario(args.scenario)
    overrides = {}
    if getattr(args, "a_operator", None):
        overrides["a_operator"] = _parse_operator_flag(args.a_operator)
    if getattr(args, "sequence", None):
        overrides["sequence"] = _parse_sequence_flag(args.sequence)
    return sc.with_overrides(**overrides)


def cmd_criterion_check(args, started) -> int:
    sc = _criterion_scenario(args)
    n = args.samples or sc.samples
    k_probe = args.k_probe or sc.budgets.k_probe
    samples = dense_prefix(sc.subspace, n)
    if args.le:
        report = check_le_criterion(sc.t, sc.a_operator, sc.subspace, samples, k_probe,
                                    sc.decay, sc.budgets.kernel_budget)
    else:
        report = check_conditions(sc.witness(), samples, k_probe)
    report.info["scenario"] = sc.name
    lines = report.summary_lines()
    if args.le:
        lines.append(f"  status: {report.info['status']}")
    _emit(args, "criterion-check", report.to_dict(), started, "\n".join(lines))
    return _finish(report)


def cmd_criterion_build(args, started) -> int:
    sc = _criterion_scenario(args)
    w = sc.witness()
    prefix = dense_prefix(sc.subspace, args.K + 1)
    cert = build_certificate(w, prefix, args.K, sc.budgets.scan_limit)
    report = verify_certificate(cert)
    _emit(args, "criterion-build", certificate_to_document(cert), started,
          "\n".join(report.summary_lines() + [f"  m_jk = {cert.selection.ms}"]))
    return _finish(report)


def cmd_criterion_verify(args, started) -> int:
    try:
        doc = json.loads(Path(args.certificate).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read certificate: {exc}") from None
    report = verify_document(doc)
    _emit(args, "criterion-verify", report.to_dict(), started, "\n".join(report.summary_lines()))
    return _finish(report)


def cmd_orbit(args, started) -> int:
    if args.certificate:
        try:
            doc = json.loads(Path(args.certificate).read_text())
            cert = HypercyclicCertificate.from_config(doc["payload"])
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ConfigError(f"cannot read certificate: {exc}") from None
        w = cert.witness
        r = min(args.targets, cert.K)
        targets = list(cert.dense_prefix[:r])
        ms = cert.selection.ms
        max_steps = args.steps or ms[-1]
        rep = density_report(w.t, cert.x_partial, targets, [pow2(-k) for k in range(1, r + 1)],
                             max_steps, w.norm, None if args.full_scan else ms)
        lines = [f"density evidence over {'all n' if args.full_scan else 'n in m_jk'} "
                 f"<= {max_steps} (tail bound {cert.x_partial.tail_bound})"]
        for h in rep.hits:
            lines.append(f"  target x_{h.target_index}: "
                         + (f"hit at n={h.orbit_index}, distance {h.distance} < {h.eps}"
                            if h.orbit_index is not None else f"no hit within eps {h.eps}"))
        ok = rep.all_hit
    else:
        if not args.scenario or not args.start:
            raise ConfigError("orbit needs --certificate, or --scenario with --start")
        sc = load_scenario(args.scenario)
        rep = orbit(sc.t, _parse_vector_flag(args.start), args.steps or 10, sc.subspace.norm)
        lines = [f"n={p.n}: {p.vector}" for p in rep.points]
        ok = True
    if args.csv:
        Path(args.csv).write_text(rep.to_csv())
    _emit(args, "orbit", rep.to_dict(), started, "\n".join(lines))
    return 0 if ok else 1


def cmd_enumerate(args, started) -> int:
    sc = load_scenario(args.scenario)
    vectors = dense_prefix(sc.subspace, args.n)
    doc = {"subspace": sc.subspace.to_config(),
           "vectors": [{"n": i, "vector": v.to_triples()} for i, v in enumerate(vectors, 1)]}
    _emit(args, "enumerate", doc, started, "\n".join(f"{i}: {v}" for i, v in enumerate(vectors, 1)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subhyper", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--out", help="write the JSON report here")
        p.set_defaults(func=func)
        return p

    p = add("construct", cmd_construct, "build T from a biorthogonal system and check it")
    p.add_argument("--scenario", default="thm1-construction")
    p.add_argument("--samples", type=int)

    p = add("conjugacy", cmd_conjugacy, "check T.phi = phi.S on basis vectors")
    p.add_argument("--scenario", default="thm1-construction")
    p.add_argument("--n", type=int, default=500)

    p = add("criterion-check", cmd_criterion_check, "check the four criterion hypotheses")
    p.add_argument("--scenario", default="example-linf")
    p.add_argument("--a-operator", help="override A (atom like F or tagged JSON)")
    p.add_argument("--sequence", help="override m_k = a*k + b as 'a,b'")
    p.add_argument("--samples", type=int)
    p.add_argument("--k-probe", type=int)
    p.add_argument("--le", action="store_true", help="check the hypotheses of Le's criterion instead")

    p = add("criterion-build", cmd_criterion_build, "select powers, build and verify a certificate")
    p.add_argument("--scenario", default="example-linf")
    p.add_argument("--K", type=int, default=12)
    p.add_argument("--a-operator")
    p.add_argument("--sequence")

    p = add("criterion-verify", cmd_criterion_verify, "re-derive every verdict of a certificate file")
    p.add_argument("certificate")

    p = add("orbit", cmd_orbit, "orbit segment, or density evidence for a certificate")
    p.add_argument("--scenario")
    p.add_argument("--start", help="vector literal such as '{1:3/4, 7:-1/8}'")
    p.add_argument("--steps", type=int)
    p.add_argument("--certificate")
    p.add_argument("--targets", type=int, default=8)
    p.add_argument("--full-scan", action="store_true", help="scan every orbit index, not just m_jk")
    p.add_argument("--csv", help="also write a CSV table (n, norm, distance)")

    p = add("enumerate", cmd_enumerate, "list the canonical dense sequence of a subspace")
    p.add_argument("--scenario", default="example-linf")
    p.add_argument("--n", type=int, default=20)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        return args.func(args, started)
    except (PreconditionError, NotAMemberError, SelectionError, DecayCertificateError) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
