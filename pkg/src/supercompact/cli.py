"""Command-line entry point.

Exit status: 0 when every requested check passes, 1 when a check fails
(the witness is printed), 2 for unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import extend as ex
from . import invseq as iv
from . import presentations as pr
from . import spaces as sp
from . import subbase as sb
from . import textio
from .circle import Turn
from .groups import AxiomViolation, is_simple, normal_subgroups, resolve_finite
from .textio import ParseError

PASS, FAIL, BAD_INPUT = 0, 1, 2


def _out(lines) -> None:
    sys.stdout.write("".join(f"{line}\n" for line in lines))


# -- verbs ---------------------------------------------------------------------------


def cmd_group_check(args) -> int:
    try:
        G = textio.read_group(args.group)
    except AxiomViolation as exc:
        _out([f"group: {args.group}", "axioms: FAIL", f"  violated: {exc.kind}", f"  witness: {exc.witness}"])
        return FAIL
    normals = normal_subgroups(G)
    res = resolve_finite(G)
    lines = [
        f"group: {args.group}",
        f"order: {G.order}",
        "axioms: pass",
        f"abelian: {'yes' if G.is_abelian() else 'no'}",
        f"simple: {'yes' if is_simple(G) else 'no'}",
        f"subgroups: {len(G.subgroups())}",
        f"normal subgroups: {len(normals)}",
        "normal subgroup orders: " + " ".join(str(N.order) for N in normals),
        "resolution kernel orders: " + " ".join(str(k) for k in res.kernel_orders()),
        f"resolution valid: {'pass' if res.validate() else 'FAIL'}",
    ]
    status = PASS if res.validate() else FAIL
    if args.sub:
        for H in textio.read_subgroups(args.sub, G):
            ok = H.is_subgroup()
            lines.append(f"sub {','.join(map(str, H.elements))}: subgroup {'pass' if ok else 'FAIL'}"
                         + (f", normal {'yes' if H.normal else 'no'}" if ok else ""))
            if not ok:
                status = FAIL
    _out(lines)
    return status


def cmd_decompose(args) -> int:
    P = textio.read_presentation(args.pres)
    steps = pr.decompose_presentation(P)
    lines = [f"presentation: {P}", f"steps: {len(steps)}"]
    for i, s in enumerate(steps):
        lines.append(f"step {i}: {s}")
        lines.append(f"  witness: {s.witness}")
    if P.m:
        tq = pr.torus_quotient(P.m, [t for t, _ in P.subgroup_elements()])
        rep = pr.verify_torus_witnesses(tq, args.grid)
        lines.append(f"witness checks (denominator {rep.grid}):")
        lines += [f"  {name}: {'pass' if ok else 'FAIL'}" for name, ok in rep.checks]
    _out(lines)
    return PASS


def _sequence_lines(S: iv.InverseSeq) -> list[str]:
    lines = [f"stages: {len(S.stages)}"]
    for i, (space, label) in enumerate(zip(S.stages, S.labels)):
        lines.append(f"stage {i}: {label} [{space}]")
    for i, (m, tag) in enumerate(zip(S.maps, S.tags)):
        k = m.kernel_order()
        kern = "infinite" if k is None else str(k)
        lines.append(f"map {i + 1}->{i}: {m} tag {tag} kernel {kern}")
    return lines


def cmd_sequence(args) -> int:
    if args.pres:
        S = pr.build_sequence(textio.read_presentation(args.pres))
    else:
        S = textio.read_sequence(args.sequence)
    S.validate()
    _out(_sequence_lines(S) + ["valid: pass"])
    return PASS


def cmd_solenoid(args) -> int:
    if args.n < 2 or args.depth < 1:
        raise ParseError("need n >= 2 and depth >= 1")
    S = iv.solenoid_sequence(args.n, args.depth)
    top = iv.composite_projection(S, args.depth, 0).simplified()
    kernel = iv.circle_kernel(top)
    lines = _sequence_lines(S)
    lines.append(f"composite {args.depth}->0: {top}")
    lines.append(f"composite kernel order: {len(kernel)}")
    ok = len(kernel) == args.n ** args.depth and all(
        (k.value * args.n ** args.depth).denominator == 1 for k in kernel)
    lines.append(f"kernel check: {'pass' if ok else 'FAIL'}")
    _out(lines)
    return PASS if ok else FAIL


def _report(family, report: ex.ExtensionReport, args) -> int:
    sys.stdout.write(report.text())
    if args.output:
        Path(args.output).write_text(textio.format_family(family))
    return PASS if report.ok else FAIL


def _run_extension(run, args) -> int:
    try:
        family, report = run()
    except ex.VerificationFailed as exc:
        sys.stdout.write(exc.report.text())
        return FAIL
    return _report(family, report, args)


def cmd_extend(args) -> int:
    S = textio.read_sequence(args.sequence)
    A0 = textio.read_subbase(args.base) if args.base else ex.base_family(S.stages[0], args.resolution)
    if A0.space != S.stages[0]:
        A0 = sb.SubbaseFamily(S.stages[0], A0.members)
    return _run_extension(
        lambda: ex.extend_along(S, A0, args.resolution, args.budget, args.workers), args)


def cmd_mills(args) -> int:
    if args.pres:
        P = textio.read_presentation(args.pres)
    else:
        P = textio.read_group(args.group)
    return _run_extension(
        lambda: ex.mills_pipeline(P, None, args.resolution, args.budget, args.workers), args)


def cmd_verify_binary(args) -> int:
    F = textio.read_subbase(args.subbase)
    if args.close:
        F = sb.close_under_intersection(F)
    result = sb.is_binary(F, args.budget, args.workers)
    lines = [f"family: {args.subbase}", f"space: {F.space}", f"members: {len(F.members)}"]
    if result is True:
        _out(lines + ["binary: pass"])
        return PASS
    lines.append("binary: FAIL")
    lines.append("witness (pairwise linked, empty intersection):")
    lines += [f"  {sp.format_body(F.space, m)}" for m in result.members]
    _out(lines)
    return FAIL


def cmd_criterion(args) -> int:
    F = textio.read_subbase(args.subbase)
    if args.close:
        F = sb.close_under_intersection(F)
    lines = [f"family: {args.subbase}", f"members: {len(F.members)}", f"resolution: {args.resolution}"]
    if not sb.check_intersection_closed(F):
        _out(lines + ["intersection closed: FAIL", "criterion: skipped"])
        return FAIL
    result = sb.subbase_criterion(F.with_flag(True), args.resolution)
    lines.append("intersection closed: pass")
    if result is True:
        _out(lines + ["criterion: pass"])
        return PASS
    _out(lines + ["criterion: FAIL", f"  point: {result.x}", f"  neighbourhood: {sp.format_body(F.space, result.U)}"])
    return FAIL


def cmd_semidirect_probe(args) -> int:
    rng = random.Random(args.seed)
    lines = [f"seed: {args.seed}", f"samples: {args.samples}"]
    failures = 0
    for _ in range(args.samples):
        z = Turn(Fraction(rng.randrange(args.max_den), rng.randint(1, args.max_den)))
        a = Turn(Fraction(rng.randrange(args.max_den), rng.randint(1, args.max_den)))
        try:
            pr.semidirect_conjugation_check(z, a)
        except pr.ConjugationMismatch as exc:
            failures += 1
            lines.append(f"  mismatch: z={z} a={a}: {exc}")
    lines.append(f"conjugation identity: {'pass' if not failures else 'FAIL'}")
    q = args.grid
    G, N = pr.grid_normal_closure(q)
    lines.append(f"grid denominator: {q}")
    lines.append(f"grid group order: {G.order}")
    lines.append(f"normal closure of one flip: {N.order}")
    whole = N.order == G.order
    lines.append(f"reaches every element: {'yes' if whole else 'no'}")
    ok = not failures and (whole or q % 2 == 0)
    if q % 2 == 0 and not whole:
        lines.append("note: even denominators leave an index-2 subgroup holding the flips")
    _out(lines)
    return PASS if ok else FAIL


# -- argument parsing ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="supercompact", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp_, extension=False):
        sp_.add_argument("--resolution", type=int, default=24)
        sp_.add_argument("--budget", type=int, default=22)
        sp_.add_argument("--workers", type=int, default=1)
        sp_.add_argument("--seed", type=int, default=20240601)
        if extension:
            sp_.add_argument("--output", help="write the final family here")

    g = sub.add_parser("group-check", help="validate a Cayley table")
    g.add_argument("--group", required=True)
    g.add_argument("--sub", help="file of 'sub' lines to check")
    common(g)
    g.set_defaults(run=cmd_group_check)

    d = sub.add_parser("decompose", help="decompose a presentation")
    d.add_argument("--pres", required=True)
    d.add_argument("--grid", type=int, default=None, help="grid denominator for the witness checks")
    common(d)
    d.set_defaults(run=cmd_decompose)

    s = sub.add_parser("sequence", help="build or read an inverse sequence")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--pres")
    src.add_argument("--sequence")
    common(s)
    s.set_defaults(run=cmd_sequence)

    so = sub.add_parser("solenoid", help="the n-adic solenoid sequence")
    so.add_argument("--n", type=int, default=2)
    so.add_argument("--depth", type=int, default=3)
    common(so)
    so.set_defaults(run=cmd_solenoid)

    e = sub.add_parser("extend", help="extend a binary family along a sequence")
    e.add_argument("--sequence", required=True)
    e.add_argument("--base", help="family on stage 0 (default: the stock family)")
    common(e, extension=True)
    e.set_defaults(run=cmd_extend)

    b = sub.add_parser("verify-binary", help="check that a family is binary")
    b.add_argument("--subbase", required=True)
    b.add_argument("--close", action="store_true", help="close under intersections first")
    common(b)
    b.set_defaults(run=cmd_verify_binary)

    c = sub.add_parser("criterion", help="check the neighbourhood criterion at a resolution")
    c.add_argument("--subbase", required=True)
    c.add_argument("--close", action="store_true", help="close under intersections first")
    common(c)
    c.set_defaults(run=cmd_criterion)

    sd = sub.add_parser("semidirect-probe", help="conjugation and normal-closure probes")
    sd.add_argument("--samples", type=int, default=1000)
    sd.add_argument("--max-den", type=int, default=10_000)
    sd.add_argument("--grid", type=int, default=9)
    common(sd)
    sd.set_defaults(run=cmd_semidirect_probe)

    m = sub.add_parser("mills", help="decompose and extend up to a binary family")
    msrc = m.add_mutually_exclusive_group(required=True)
    msrc.add_argument("--pres")
    msrc.add_argument("--group")
    common(m, extension=True)
    m.set_defaults(run=cmd_mills)
    return p


INPUT_ERRORS = (
    ParseError,
    AxiomViolation,
    sp.SpaceMismatch,
    sb.NotACover,
    pr.NotCentral,
    pr.NotFinite,
    pr.UnsupportedPresentation,
    iv.NotSurjective,
    iv.InvalidSequence,
    ex.MissingFullSpaceMember,
    ex.CoverNotInjective,
)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        status = args.run(args)
    except sb.SearchBudgetExceeded as exc:
        print(f"error: {exc}; raise --budget", file=sys.stderr)
        return FAIL
    except (pr.WitnessFailure, sb.StarRefinementFailed) as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return FAIL
    except INPUT_ERRORS as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return BAD_INPUT
    sys.stdout.flush()
    return status


if __name__ == "__main__":
    sys.exit(main())
