"""Command-line interface.

Each subcommand reads JSON system documents, runs the requested
computation, and prints either plain text or the canonical JSON report.
Exit codes: 0 success, 1 a cross-check or property failed, 2 input or
usage error, 3 numeric instability surfaced by the library.

Computation is single-threaded end to end.  MASLOVKIT_THREADS, when
set, is validated and bounds any fan-out; with the sequential
implementation the effective parallelism is always 1.
"""

import argparse
import os
import sys
import time
from fractions import Fraction

import numpy as np

from . import engine
from .corpus import corpus, random_descriptor
from .documents import ReportDocument, SystemDocument
from .engine import clear_cache, index_pair, omega_index
from .errors import (
    AmbiguousCeiling,
    HypothesesNotMet,
    MaslovkitError,
    NoneFoundWithinBound,
    SchemaError,
)
from .iteration import (
    bott_sum,
    check_inequalities,
    index_sequence,
    index_via_splitting,
    mean_index,
    splitting_table,
)
from .jump import minimal_period_forced, search_common_jumps
from .core import UnitCirclePoint
from .oracle import oracle_index
from .paths import integrate, iterate as iterate_path


def parse_omega(text):
    """`p/q` (exact fraction of a full turn) or a decimal angle in radians."""
    text = text.strip()
    try:
        if "/" in text:
            return UnitCirclePoint.from_turns(Fraction(text))
        if text.lstrip("+-").isdigit():
            return UnitCirclePoint.from_turns(int(text))
        return UnitCirclePoint(float(text))
    except (ValueError, ZeroDivisionError):
        raise SchemaError(f"cannot parse omega {text!r}") from None


def _thread_cap():
    raw = os.environ.get("MASLOVKIT_THREADS")
    if raw is None:
        return None
    try:
        cap = int(raw)
    except ValueError:
        raise SchemaError(f"MASLOVKIT_THREADS must be an integer, got {raw!r}")
    if cap < 1:
        raise SchemaError("MASLOVKIT_THREADS must be >= 1")
    return cap


def _load_system(filename, mesh_bound=None):
    try:
        text = open(filename, "r", encoding="utf-8").read()
    except OSError as exc:
        raise SchemaError(f"cannot read {filename}: {exc}") from None
    doc = SystemDocument.loads(text)
    kwargs = {} if mesh_bound is None else {"mesh_bound": mesh_bound}
    path = integrate(doc.to_descriptor(), **kwargs)
    return doc, path


def _omega_payload(omega):
    return {
        "angle": float(omega.angle),
        "turns": None if omega.turns is None else str(omega.turns),
    }


def _mean_payload(mean):
    return {
        "value": float(mean.value),
        "exact": None if mean.exact is None else str(mean.exact),
        "iterate_estimate": float(mean.iterate_estimate),
        "circle_average": float(mean.circle_average),
    }


def _chain_payload(chain):
    return {
        "name": chain.name,
        "lhs": float(chain.lhs),
        "mid": float(chain.mid),
        "rhs": float(chain.rhs),
        "passed": bool(chain.passed),
        "slack": float(chain.slack),
    }


def _emit(args, report, lines):
    if getattr(args, "json", False):
        sys.stdout.write(report.dumps())
    else:
        for line in lines:
            print(line)
    return report


def _finish(t0):
    return None if t0 is None else round(time.perf_counter() - t0, 6)


def cmd_index(args):
    t0 = time.perf_counter() if args.timing else None
    doc, path = _load_system(args.file, args.mesh)
    omega = parse_omega(args.omega)
    pair = omega_index(path, omega, seed=args.seed)
    results = {
        "omega": _omega_payload(omega),
        "i": int(pair.i),
        "nu": int(pair.nu),
        "degenerate": pair.nu > 0,
    }
    report = ReportDocument(
        command="index",
        inputs=({"digest": doc.digest, "label": doc.label},),
        results=results,
        seed=args.seed,
        wall_clock=_finish(t0),
    )
    _emit(args, report, [
        f"i_omega = {pair.i}, nu_omega = {pair.nu} "
        f"(angle {omega.angle:.6g}{', degenerate' if pair.nu else ''})",
    ])
    return 0


def cmd_iterate(args):
    t0 = time.perf_counter() if args.timing else None
    doc, path = _load_system(args.file)
    pairs = index_sequence(path, args.max_m + 1, seed=args.seed)
    mean = mean_index(path, seed=args.seed)
    table = splitting_table(path.end(), path, seed=args.seed)
    rows = []
    lines = []
    failed = False
    for m in range(1, args.max_m + 1):
        pair = pairs[m - 1]
        try:
            formula = index_via_splitting(pairs[0].i, table, m)
        except AmbiguousCeiling:
            formula = None
        rep = check_inequalities(path, m, seed=args.seed, pairs=pairs, mean=mean)
        failed = failed or not rep.all_pass or (
            formula is not None and formula != pair.i
        )
        rows.append({
            "m": m,
            "i": int(pair.i),
            "nu": int(pair.nu),
            "formula_i": None if formula is None else int(formula),
            "formula_matches": None if formula is None else formula == pair.i,
            "chains": [_chain_payload(c) for c in rep.chains],
        })
        lines.append(
            f"m={m}: i={pair.i} nu={pair.nu} formula={formula} "
            f"chains={'pass' if rep.all_pass else 'FAIL'}"
        )
    results = {
        "mean": _mean_payload(mean),
        "rows": rows,
        "all_pass": not failed,
    }
    report = ReportDocument(
        command="iterate",
        inputs=({"digest": doc.digest, "label": doc.label},),
        results=results,
        seed=args.seed,
        wall_clock=_finish(t0),
    )
    _emit(args, report, lines + [f"mean index {float(mean):.6g}"])
    return 1 if failed else 0


def cmd_bott(args):
    t0 = time.perf_counter() if args.timing else None
    doc, path = _load_system(args.file)
    z = parse_omega(args.z)
    direct = omega_index(iterate_path(path, args.m), z, seed=args.seed)
    isum, nsum = bott_sum(path, args.m, z, seed=args.seed)
    agree = (direct.i, direct.nu) == (isum, nsum)
    results = {
        "m": args.m,
        "z": _omega_payload(z),
        "direct": {"i": int(direct.i), "nu": int(direct.nu)},
        "root_sum": {"i": int(isum), "nu": int(nsum)},
        "agree": bool(agree),
    }
    report = ReportDocument(
        command="bott",
        inputs=({"digest": doc.digest, "label": doc.label},),
        results=results,
        seed=args.seed,
        wall_clock=_finish(t0),
    )
    _emit(args, report, [
        f"direct ({direct.i}, {direct.nu}) vs root sum ({isum}, {nsum}): "
        f"{'agree' if agree else 'MISMATCH'}"
    ])
    return 0 if agree else 1


def cmd_splitting(args):
    t0 = time.perf_counter() if args.timing else None
    doc, path = _load_system(args.file)
    table = splitting_table(path.end(), path, seed=args.seed)
    rows = [
        {
            "angle": float(entry.angle),
            "turns": None if entry.omega.turns is None else str(entry.omega.turns),
            "s_plus": int(entry.s_plus),
            "s_minus": int(entry.s_minus),
        }
        for entry in table.table
    ]
    results = {"table": rows, "C": int(table.C)}
    report = ReportDocument(
        command="splitting",
        inputs=({"digest": doc.digest, "label": doc.label},),
        results=results,
        seed=args.seed,
        wall_clock=_finish(t0),
    )
    lines = [
        f"angle {row['angle']:.6g}: S+ = {row['s_plus']}, S- = {row['s_minus']}"
        for row in rows
    ] + [f"C = {table.C}"]
    _emit(args, report, lines)
    return 0


def cmd_jump(args):
    t0 = time.perf_counter() if args.timing else None
    docs = []
    paths = []
    for filename in args.files:
        doc, path = _load_system(filename)
        docs.append(doc)
        paths.append(path)
    note = None
    try:
        tuples = search_common_jumps(
            paths, args.max_N, count=args.count, seed=args.seed
        )
    except HypothesesNotMet as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NoneFoundWithinBound as exc:
        tuples = []
        note = str(exc)
    results = {
        "tuples": [
            {
                "N": t.N,
                "m": list(t.m),
                "kappa1": int(t.kappa1),
                "kappa2": int(t.kappa2),
                "interval": [int(t.interval[0]), int(t.interval[1])],
            }
            for t in tuples
        ],
        "note": note,
    }
    report = ReportDocument(
        command="jump",
        inputs=tuple({"digest": d.digest, "label": d.label} for d in docs),
        results=results,
        seed=args.seed,
        wall_clock=_finish(t0),
    )
    lines = [
        f"N={t.N} m={list(t.m)} interval=[{t.interval[0]}, {t.interval[1]}]"
        for t in tuples
    ] or [note or "no tuples"]
    _emit(args, report, lines)
    return 0


def _selftest_bott(entries, seed, quick=False):
    """Root-sum vs direct comparison; returns a list of mismatch records."""
    mismatches = []
    cases = [(2, UnitCirclePoint.one()), (3, UnitCirclePoint.one())]
    if not quick:
        cases.append((2, UnitCirclePoint.from_turns(Fraction(1, 4))))
    for entry in entries:
        for m, z in cases:
            direct = omega_index(
                iterate_path(entry.path, m), z, seed=seed, check_attainment=False
            )
            isum, nsum = bott_sum(
                entry.path, m, z, seed=seed, check_attainment=False
            )
            if (direct.i, direct.nu) != (isum, nsum):
                mismatches.append({
                    "label": entry.label,
                    "m": m,
                    "z": _omega_payload(z),
                    "direct": [int(direct.i), int(direct.nu)],
                    "root_sum": [int(isum), int(nsum)],
                })
    return mismatches


def cmd_selftest(args):
    t0 = time.perf_counter() if args.timing else None
    if args.corpus_size < 1:
        print("error: corpus size must be >= 1", file=sys.stderr)
        return 2
    entries = corpus(args.corpus_size, args.seed)
    checks = {}
    failures = []

    mismatches = _selftest_bott(entries, args.seed)
    checks["bott"] = {"passed": not mismatches, "mismatches": mismatches}
    if mismatches:
        failures.append("bott-mismatch")

    oracle_bad = []
    probe = UnitCirclePoint(0.9)
    for entry in entries:
        pair = omega_index(entry.path, probe, seed=args.seed)
        o = oracle_index(entry.path, probe, grid=100_000)
        if pair.i != o:
            oracle_bad.append(
                {"label": entry.label, "engine": int(pair.i), "oracle": int(o)}
            )
    checks["oracle"] = {
        "passed": not oracle_bad,
        "grid": 100_000,
        "omega": _omega_payload(probe),
        "mismatches": oracle_bad,
    }
    if oracle_bad:
        failures.append("oracle-mismatch")

    chain_bad = []
    audit_bad = []
    for entry in entries:
        pairs = index_sequence(entry.path, 5, seed=args.seed,
                               check_attainment=False)
        mean = mean_index(entry.path, seed=args.seed, check_attainment=False)
        rep = check_inequalities(
            entry.path, 2, seed=args.seed, pairs=pairs, mean=mean
        )
        if not rep.all_pass:
            chain_bad.append({
                "label": entry.label,
                "chains": [_chain_payload(c) for c in rep.chains],
            })
        n = entry.path.n
        for m in range(2, 5):
            if minimal_period_forced(pairs[m - 1].i, pairs[0].i, pairs[0].nu, n):
                audit_bad.append({"label": entry.label, "m": m})
    checks["inequalities"] = {"passed": not chain_bad, "violations": chain_bad}
    if chain_bad:
        failures.append("inequality-violation")
    checks["minimal-period"] = {"passed": not audit_bad, "violations": audit_bad}
    if audit_bad:
        failures.append("minimal-period-violation")

    # Serialization round trips are checked on freshly drawn descriptors so
    # the check stays meaningful even when every corpus member is analytic
    # (those are built from closed forms, not from a descriptor).
    rng = np.random.default_rng(args.seed)
    candidates = [
        ("random-descriptor-%d" % k, random_descriptor(rng)) for k in range(6)
    ]
    for entry in entries:
        descriptor = entry.path.provenance.get("descriptor")
        if descriptor is not None:
            candidates.append((entry.label, descriptor))
    roundtrip_bad = []
    for label, descriptor in candidates:
        doc = SystemDocument.from_descriptor(descriptor, label=label)
        rebuilt = SystemDocument.loads(doc.dumps())
        if (rebuilt.to_payload() != doc.to_payload()
                or rebuilt.digest != doc.digest):
            roundtrip_bad.append(label)
    checks["round-trip"] = {
        "passed": not roundtrip_bad,
        "documents": len(candidates),
        "mismatches": roundtrip_bad,
    }
    if roundtrip_bad:
        failures.append("round-trip")

    mutation = None
    if args.mutate:
        engine._MUTATE_FLIP_NONREAL = True
        try:
            clear_cache()
            mutated = _selftest_bott(entries[: min(4, len(entries))],
                                     args.seed, quick=False)
        finally:
            engine._MUTATE_FLIP_NONREAL = False
            clear_cache()
        mutation = {"detected": bool(mutated), "mismatches": mutated}
        failures.append(
            "bott-mismatch-under-mutation" if mutated else "mutation-not-detected"
        )

    results = {
        "corpus": {
            "size": args.corpus_size,
            "seed": args.seed,
            "labels": [entry.label for entry in entries],
        },
        "checks": checks,
        "mutation": mutation,
        "failures": failures,
    }
    report = ReportDocument(
        command="selftest",
        inputs=(),
        results=results,
        seed=args.seed,
        wall_clock=_finish(t0),
    )
    sys.stdout.write(report.dumps())
    return 1 if failures else 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="maslovkit",
        description="Index computations for paths of symplectic matrices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed_default=1234):
        p.add_argument("--json", action="store_true", help="emit the JSON report")
        p.add_argument("--seed", type=int, default=seed_default,
                       help="seed for perturbation draws")
        p.add_argument("--timing", action="store_true",
                       help="include wall-clock seconds in the report")

    p = sub.add_parser("index", help="index pair at one omega")
    p.add_argument("file")
    p.add_argument("--omega", default="0",
                   help="p/q of a full turn, or an angle in radians")
    p.add_argument("--mesh", type=float, default=None,
                   help="node-to-node mesh bound for integration")
    common(p)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("iterate", help="iterated indices, formula, inequalities")
    p.add_argument("file")
    p.add_argument("--max-m", type=int, required=True, dest="max_m")
    common(p)
    p.set_defaults(func=cmd_iterate)

    p = sub.add_parser("bott", help="root-of-unity sum vs direct iterate index")
    p.add_argument("file")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--z", default="0", help="base point, same syntax as --omega")
    common(p)
    p.set_defaults(func=cmd_bott)

    p = sub.add_parser("splitting", help="splitting numbers of the endpoint")
    p.add_argument("file")
    common(p)
    p.set_defaults(func=cmd_splitting)

    p = sub.add_parser("jump", help="common index jump tuples")
    p.add_argument("files", nargs="+")
    p.add_argument("--max-N", type=int, required=True, dest="max_N")
    p.add_argument("--count", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_jump)

    p = sub.add_parser("selftest", help="run the property suite on a seeded corpus")
    p.add_argument("--corpus-size", type=int, default=16, dest="corpus_size")
    p.add_argument("--mutate", action="store_true",
                   help="flip the sign rule at non-real omega; the suite "
                        "must catch it (canary)")
    common(p, seed_default=7)
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        _thread_cap()
        return args.func(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MaslovkitError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
