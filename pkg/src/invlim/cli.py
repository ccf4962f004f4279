"""Command-line front end.

Exit codes: 0 success or affirmative verdict, 1 negative verdict, 2 input
error, 3 cap exceeded or undetermined.
"""
from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from . import io
from .chains import joint_refinement_sequence
from .classify import (
    DISTINGUISHED,
    EXCEPTIONAL,
    HOMEOMORPHIC,
    compare_spaces,
    classify_point,
    distance,
    exceptional_diagnosis,
    project,
    shift,
)
from .errors import InputError, InvlimError, UndeterminedError
from .graph import format_point
from .markov import markov_data
from .orbits import DEFAULT_ORBIT_CAP, endpoint_orbit_closure, omega_of_turning_points, turning_point_orbits
from .plmap import check_standing_assumptions

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_UNDETERMINED = 0, 1, 2, 3
CAP_ENV = "INVLIM_CAP"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _default_cap() -> int:
    raw = os.environ.get(CAP_ENV)
    if raw is None:
        return DEFAULT_ORBIT_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise InputError(f"{CAP_ENV} must be an integer, got {raw!r}") from None
    if cap < 1:
        raise InputError(f"{CAP_ENV} must be positive")
    return cap


def _positive(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def _nonnegative(text):
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError("must be a nonnegative integer")
    return n


def _fraction(text):
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a fraction: {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="invlim", description="Exact tools for inverse limits of PL graph maps.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", help="parse a document and check every map")
    s.add_argument("file")

    for name, text in (("partition", "Markov partition, index sets and matrix"),
                       ("assumptions", "check the standing assumptions")):
        s = sub.add_parser(name, help=text)
        s.add_argument("file")
        s.add_argument("--map", required=True)

    s = sub.add_parser("orbits", help="turning-point orbits, omega set and endpoint orbits")
    s.add_argument("file")
    s.add_argument("--map", required=True)
    s.add_argument("--cap", type=_positive)

    s = sub.add_parser("refine", help="refinement sequence of one map against itself")
    s.add_argument("file")
    s.add_argument("--map", required=True)
    s.add_argument("--depth", type=_positive, required=True)
    s.add_argument("--json", metavar="OUT")

    s = sub.add_parser("compare", help="compare the inverse limits of two maps")
    s.add_argument("file")
    s.add_argument("--maps", required=True, help="two map names, comma separated")
    s.add_argument("--depth", type=_positive, default=3)
    s.add_argument("--json", metavar="OUT")

    s = sub.add_parser("classify", help="local type of a point of the inverse limit")
    s.add_argument("file")
    s.add_argument("--map", required=True)
    s.add_argument("--itinerary", required=True)
    s.add_argument("--diagnose", type=_nonnegative, metavar="DEPTH",
                   help="also label an exceptional point, inspecting DEPTH levels")

    s = sub.add_parser("point", help="shift, project or measure itineraries")
    s.add_argument("file")
    s.add_argument("--map", required=True)
    s.add_argument("--itinerary", required=True)
    how = s.add_mutually_exclusive_group(required=True)
    how.add_argument("--shift", action="store_true")
    how.add_argument("--project", type=_nonnegative, metavar="N")
    how.add_argument("--distance", metavar="SPEC2")
    s.add_argument("--precision", type=_fraction, default=Fraction(1, 2 ** 20))
    return p


def _emit(doc, out):
    text = io.dumps(doc)
    if out:
        try:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise InputError(f"cannot write {out}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)


def cmd_validate(args, cap):
    doc = io.load_document(args.file)
    g = doc.graph
    print(f"graph: {len(g.vertices)} vertices, {len(g.edges)} edges, diameter {g.diam}")
    for name, f in doc.maps.items():
        print(f"map {name}: {sum(1 for _ in f.all_laps())} laps, {len(f.turning_points)} turning points")
    return EXIT_OK


def cmd_partition(args, cap):
    f = io.load_document(args.file).map(args.map)
    _emit(io.markov_to_json(markov_data(f)), None)
    return EXIT_OK


def cmd_assumptions(args, cap):
    f = io.load_document(args.file).map(args.map)
    rep = check_standing_assumptions(f)
    _emit({"format": io.FORMAT, "kind": "assumptions", "map": f.name, **io.report_to_json(rep)}, None)
    return EXIT_OK if rep.all_hold else EXIT_NEGATIVE


def cmd_orbits(args, cap):
    f = io.load_document(args.file).map(args.map)
    cap = args.cap or cap
    records = turning_point_orbits(f, cap)
    omega = omega_of_turning_points(f, cap)
    ends = endpoint_orbit_closure(f, cap)
    _emit(io.orbits_to_json(f, records, omega, ends), None)
    return EXIT_OK


def cmd_refine(args, cap):
    f = io.load_document(args.file).map(args.map)
    rounds = joint_refinement_sequence(f, f, args.depth)
    doc = {"format": io.FORMAT, "kind": "refinement", "map": f.name, "rounds": io.rounds_to_json(rounds)}
    _emit(doc, args.json)
    if args.json:
        for r in rounds:
            print(f"round {r.index}: {len(r.chain_f)} links, mesh bound {r.mesh_bounds[0]}")
    return EXIT_OK


def cmd_compare(args, cap):
    doc = io.load_document(args.file)
    names = [n.strip() for n in args.maps.split(",")]
    if len(names) != 2:
        raise InputError("--maps takes exactly two names, e.g. --maps tent,skew")
    f, g = doc.map(names[0]), doc.map(names[1])
    verdict = compare_spaces(f, g, args.depth, cap)
    _emit(io.verdict_to_json(verdict), args.json)
    if args.json:
        print(verdict.outcome)
    if verdict.outcome == HOMEOMORPHIC:
        return EXIT_OK
    if verdict.outcome == DISTINGUISHED:
        return EXIT_NEGATIVE
    return EXIT_UNDETERMINED


def cmd_classify(args, cap):
    f = io.load_document(args.file).map(args.map)
    x = io.parse_itinerary(f, args.itinerary)
    cls = classify_point(f, x, cap)
    doc = {
        "format": io.FORMAT,
        "kind": "classification",
        "itinerary": str(x),
        "verdict": cls.verdict,
        "condition_i": cls.condition_i,
        "condition_ii": cls.condition_ii,
        "degree_hypothesis": cls.degree_hypothesis,
    }
    if args.diagnose is not None and cls.verdict == EXCEPTIONAL:
        doc["diagnosis"] = exceptional_diagnosis(f, x, args.diagnose, cap)
    _emit(doc, None)
    return EXIT_NEGATIVE if cls.verdict == EXCEPTIONAL else EXIT_OK


def cmd_point(args, cap):
    f = io.load_document(args.file).map(args.map)
    x = io.parse_itinerary(f, args.itinerary)
    doc = {"format": io.FORMAT, "kind": "point", "itinerary": str(x)}
    if args.shift:
        doc["shift"] = str(shift(f, x))
    elif args.project is not None:
        doc["projection"] = {"n": args.project, "point": format_point(project(x, args.project))}
    else:
        y = io.parse_itinerary(f, args.distance)
        iv = distance(f, x, y, args.precision)
        doc["distance"] = {"lo": str(iv.lo), "hi": str(iv.hi), "precision": str(args.precision)}
    _emit(doc, None)
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "partition": cmd_partition,
    "assumptions": cmd_assumptions,
    "orbits": cmd_orbits,
    "refine": cmd_refine,
    "compare": cmd_compare,
    "classify": cmd_classify,
    "point": cmd_point,
}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, _default_cap())
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    except InputError as exc:
        print(f"invlim: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except UndeterminedError as exc:
        print(f"invlim: undetermined: {exc}", file=sys.stderr)
        return EXIT_UNDETERMINED
    except InvlimError as exc:
        # the operation refused to answer; not a negative verdict
        print(f"invlim: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_UNDETERMINED


def main() -> None:
    sys.exit(run())
