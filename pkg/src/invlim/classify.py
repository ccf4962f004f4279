"""Points of the inverse limit as eventually periodic backward itineraries.

Also holds the local classification of such points (product neighbourhood or
exceptional), a bounded-depth diagnosis of exceptional points, and the
verdict comparing the inverse limits of two maps on the same graph.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

from .chains import NORMALISED_DIAMETER, joint_refinement_sequence, normalised_scale
from .errors import (
    AssumptionMissing,
    DifferentGraphs,
    HypothesisFailed,
    InternalContradiction,
    InvalidItinerary,
    NotExceptional,
    NotMarkovOnCells,
    UndeterminedError,
)
from .graph import GraphPoint, format_point
from .markov import DEFAULT_PARTITION_CAP, markov_data, pattern_equivalent, transition_matrix_power
from .orbits import DEFAULT_ORBIT_CAP, endpoint_orbit_closure, omega_of_turning_points
from .plmap import PLGraphMap, check_standing_assumptions

__all__ = [
    "BackwardItinerary", "Interval", "Classification", "ComparisonVerdict",
    "itinerary", "shift", "project", "distance", "distance_enclosure",
    "classify_point", "exceptional_diagnosis", "fold_inspection",
    "pattern_equivalent", "compare_spaces",
]

PRODUCT = "PRODUCT"
EXCEPTIONAL = "EXCEPTIONAL"

ENDPOINT_CONDITION = "ENDPOINT_CONDITION"
SIN_CURVE_LIKE = "SIN_CURVE_LIKE"
INDECOMPOSABLE_LIKE = "INDECOMPOSABLE_LIKE"
UNDETERMINED = "UNDETERMINED"

HOMEOMORPHIC = "HOMEOMORPHIC"
DISTINGUISHED = "DISTINGUISHED"
INCONCLUSIVE = "INCONCLUSIVE"

# the closed form needs one full joint period; beyond this we only enclose
_MAX_EXACT_PERIOD = 1 << 16


@dataclass(frozen=True)
class BackwardItinerary:
    """``(x_0, x_1, ...)`` with ``f(x_{i+1}) = x_i``.

    ``x_i`` is ``preperiodic[i]`` for ``i < p`` and ``cycle[(i - p) % q]``
    afterwards. Build instances with :func:`itinerary`, which checks the
    bonding relation.
    """

    preperiodic: tuple
    cycle: tuple

    def __getitem__(self, n: int) -> GraphPoint:
        if n < 0:
            raise IndexError("coordinates are counted from 0")
        p = len(self.preperiodic)
        return self.preperiodic[n] if n < p else self.cycle[(n - p) % len(self.cycle)]

    @property
    def preperiod(self) -> int:
        return len(self.preperiodic)

    @property
    def period(self) -> int:
        return len(self.cycle)

    def coordinates(self) -> frozenset:
        return frozenset(self.preperiodic) | frozenset(self.cycle)

    def __str__(self):
        pre = ",".join(format_point(p) for p in self.preperiodic)
        cyc = ",".join(format_point(p) for p in self.cycle)
        return f"pre=[{pre}];cycle=[{cyc}]"


def itinerary(f: PLGraphMap, preperiodic, cycle) -> BackwardItinerary:
    g = f.graph
    pre = tuple(g.point(p.edge, p.t) for p in preperiodic)
    cyc = tuple(g.point(p.edge, p.t) for p in cycle)
    if not cyc:
        raise InvalidItinerary("cycle must be nonempty")
    seq = pre + cyc + cyc[:1]
    for i in range(len(seq) - 1):
        if f(seq[i + 1]) != seq[i]:
            raise InvalidItinerary(
                f"f({format_point(seq[i + 1])}) = {format_point(f(seq[i + 1]))}, "
                f"expected coordinate {i} = {format_point(seq[i])}")
    return BackwardItinerary(pre, cyc)


def shift(f: PLGraphMap, x: BackwardItinerary) -> BackwardItinerary:
    """The induced homeomorphism: prepend ``f(x_0)``."""
    return BackwardItinerary((f(x[0]),) + x.preperiodic, x.cycle)


def project(x: BackwardItinerary, n: int) -> GraphPoint:
    return x[n]


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __contains__(self, value) -> bool:
        return self.lo <= value <= self.hi

    def __str__(self):
        return f"[{self.lo}, {self.hi}]"


def _term(f, x, y, i, scale):
    return f.graph.metric(x[i], y[i]) * scale / 2 ** i


def distance_enclosure(f: PLGraphMap, x: BackwardItinerary, y: BackwardItinerary,
                       precision) -> Interval:
    """Truncated sum plus the worst-case tail: width at most ``precision``."""
    precision = Fraction(precision)
    if precision <= 0:
        raise ValueError("precision must be positive")
    scale = normalised_scale(f.graph)
    n = 0
    while NORMALISED_DIAMETER / 2 ** n > precision:
        n += 1
    partial = sum((_term(f, x, y, i, scale) for i in range(n + 1)), Fraction(0))
    return Interval(partial, partial + NORMALISED_DIAMETER / 2 ** n)


def distance(f: PLGraphMap, x: BackwardItinerary, y: BackwardItinerary, precision) -> Interval:
    """Distance in the inverse limit, enclosed in an interval of width <= ``precision``.

    Coordinates are compared with the graph metric scaled to diameter 1/2 and
    weighted by ``2**-i``. Since both sequences are eventually periodic the
    series has a closed form; when the joint period is manageable the exact
    value is returned as a degenerate interval.
    """
    box = distance_enclosure(f, x, y, precision)
    start = max(x.preperiod, y.preperiod)
    period = lcm(x.period, y.period)
    if period > _MAX_EXACT_PERIOD:
        return box
    scale = normalised_scale(f.graph)
    head = sum((_term(f, x, y, i, scale) for i in range(start)), Fraction(0))
    block = sum((_term(f, x, y, i, scale) for i in range(start, start + period)), Fraction(0))
    exact = head + block / (1 - Fraction(1, 2 ** period))
    if exact not in box:
        raise InternalContradiction(f"closed form {exact} escapes enclosure {box}")
    return Interval(exact, exact)


@dataclass(frozen=True)
class Classification:
    verdict: str
    condition_i: bool  # some coordinate avoids the forward orbits of the endpoints
    condition_ii: bool  # some coordinate avoids omega of the turning points
    degree_hypothesis: bool

    @property
    def product(self) -> bool:
        return self.verdict == PRODUCT


def classify_point(f: PLGraphMap, x: BackwardItinerary, cap: int = DEFAULT_ORBIT_CAP) -> Classification:
    """Whether small neighbourhoods of ``x`` are products of an open arc and
    a zero-dimensional set.

    Raises HypothesisFailed when the cycle of ``x`` meets a branch vertex,
    where the criterion does not apply.
    """
    g = f.graph
    branch = {g.vertex_point(v) for v in g.high_degree}
    hits = [p for p in x.cycle if p in branch]
    if hits:
        raise HypothesisFailed(
            f"itinerary returns to branch vertex {format_point(hits[0])} infinitely often")
    omega = omega_of_turning_points(f, cap)
    ends = endpoint_orbit_closure(f, cap)
    coords = x.coordinates()
    cond_i = any(p not in ends for p in coords)
    cond_ii = any(p not in omega.points for p in coords)
    verdict = PRODUCT if cond_i and cond_ii else EXCEPTIONAL
    return Classification(verdict, cond_i, cond_ii, True)


def fold_inspection(f: PLGraphMap, x: BackwardItinerary, depth: int,
                    cap: int = DEFAULT_PARTITION_CAP) -> str:
    """Look for two-pass or single-fold cell chains along the cycle of ``x``.

    For each cycle point ``y`` the cells containing ``y`` are followed
    through ``M**(l*q)`` for ``l = 1..depth`` (``q`` the cycle length). A
    cell pair covered at least twice at every level suggests an
    indecomposable piece; a turning point whose cells are only ever covered
    once suggests a sin(1/x)-like fold.
    """
    if depth < 1:
        return UNDETERMINED
    data = markov_data(f, cap)
    g = f.graph
    pos = {link: k for k, link in enumerate(data.links)}
    q = x.period
    powers = [transition_matrix_power(data, level * q) for level in range(1, depth + 1)]
    folds = {tp.location for tp in f.turning_points}
    single_fold = False
    for y in x.cycle:
        cells = [pos[link] for link in data.partition.links_containing(g, y)]
        peaks = [max(m[u][w] for u in cells for w in cells) for m in powers]
        if all(p >= 2 for p in peaks):
            return INDECOMPOSABLE_LIKE
        if y in folds and all(p <= 1 for p in peaks):
            single_fold = True
    return SIN_CURVE_LIKE if single_fold else UNDETERMINED


def exceptional_diagnosis(f: PLGraphMap, x: BackwardItinerary, depth: int,
                          cap: int = DEFAULT_ORBIT_CAP) -> str:
    """Heuristic label for an exceptional point; not a certified fact.

    A two-pass cell chain recurring at every inspected level wins; failing
    that, a failed endpoint condition is reported before any single-fold
    finding.
    """
    cls = classify_point(f, x, cap)
    if cls.product:
        raise NotExceptional("point has a product neighbourhood")
    if depth < 1:
        return UNDETERMINED
    try:
        code = fold_inspection(f, x, depth)
    except (UndeterminedError, NotMarkovOnCells):
        code = UNDETERMINED
    if code == INDECOMPOSABLE_LIKE:
        return code
    if not cls.condition_i:
        return ENDPOINT_CONDITION
    return code


@dataclass(frozen=True)
class ComparisonVerdict:
    outcome: str
    maps: tuple  # names of the two maps
    witness: tuple = ()  # one pattern per refinement round, when HOMEOMORPHIC
    omega: dict = field(default_factory=dict)  # map name -> cardinality, None if capped
    reports: tuple = ()  # AssumptionReport per map
    notes: tuple = ()
    rounds: tuple = ()


def compare_spaces(f: PLGraphMap, g: PLGraphMap, depth: int = 3,
                   cap: int = DEFAULT_ORBIT_CAP) -> ComparisonVerdict:
    """Decide, when the available criteria allow, whether the two inverse
    limits are homeomorphic."""
    if depth < 1:
        raise ValueError("depth must be positive")
    if f.graph != g.graph:
        raise DifferentGraphs("maps live on different graphs")
    reports = (check_standing_assumptions(f), check_standing_assumptions(g))
    om_f = omega_of_turning_points(f, cap, strict=False)
    om_g = omega_of_turning_points(g, cap, strict=False)
    omega = {
        "f": None if om_f.partial else om_f.cardinality,
        "g": None if om_g.partial else om_g.cardinality,
    }
    exact = omega["f"] is not None and omega["g"] is not None
    names = (f.name, g.name)
    notes = []
    equivalent, detail = pattern_equivalent(f, g)
    if equivalent:
        try:
            rounds = joint_refinement_sequence(f, g, depth)
        except AssumptionMissing as exc:
            notes.append(f"pattern equivalent but refinement unavailable: {exc}")
        else:
            if exact and omega["f"] != omega["g"]:
                raise InternalContradiction(
                    f"homeomorphism witness found but omega sizes {omega['f']} != {omega['g']}")
            witness = tuple(r.pattern for r in rounds)
            return ComparisonVerdict(HOMEOMORPHIC, names, witness, omega, reports,
                                     tuple(notes), tuple(rounds))
    else:
        notes.append(f"not pattern equivalent: {detail['reason']}")
    if not exact:
        notes.append("omega of the turning points hit the orbit cap")
    elif omega["f"] == omega["g"]:
        notes.append("omega sizes agree; no invariant separates the spaces")
    else:
        ok = True
        for name, rep in zip(names, reports):
            if not rep.all_hold:
                ok = False
                notes.append(f"standing assumptions not verified for {name}")
        if not f.graph.is_arc:
            ok = False
            notes.append("the omega-count invariant is only applied to maps of an arc")
        if ok:
            notes.append("dense-orbit hypothesis not checked")
            return ComparisonVerdict(DISTINGUISHED, names, (), omega, reports, tuple(notes))
    return ComparisonVerdict(INCONCLUSIVE, names, (), omega, reports, tuple(notes))
