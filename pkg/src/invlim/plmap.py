"""Piecewise-linear self-maps of a finite graph.

Each edge is cut into laps by rational breakpoints.  A lap is carried onto an
explicit simple edge-path, linearly in arclength, so the map is monotone on
every lap.  Folds are read off from the directions in which adjacent laps
leave their common image point.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .errors import ConstantLap, FoldOnBranchVertex, MapError, NotEventuallyPeriodic, NotMarkovOnCells
from .graph import (
    ONE,
    ZERO,
    Arc,
    EdgePath,
    FiniteGraph,
    GraphPoint,
    Segment,
    edge_label,
    frac,
    parse_point,
)


def path_from_points(g: FiniteGraph, points) -> EdgePath:
    """Edge-path through waypoints; consecutive waypoints must share an edge."""
    pts = [parse_point(g, p) if isinstance(p, str) else p for p in points]
    if not pts:
        raise MapError("empty image path")
    if len(pts) == 1:
        p = pts[0]
        return EdgePath((Segment(p.edge, p.t, p.t),))
    segments = []
    for p, q in zip(pts, pts[1:]):
        if p == q:
            raise MapError(f"repeated waypoint {p}")
        common = _edges_through(g, p) & _edges_through(g, q)
        if not common:
            raise MapError(f"waypoints {p} and {q} do not share an edge")
        (edge,) = common  # two distinct points share at most one edge
        seg = Segment(edge, g.param_on(p, edge), g.param_on(q, edge))
        if segments and segments[-1].edge == edge:
            prev = segments[-1]
            if prev.orientation != seg.orientation:
                raise MapError(f"image path doubles back along {edge_label(edge)}")
            segments[-1] = Segment(edge, prev.start, seg.end)
        else:
            segments.append(seg)
    path = EdgePath(tuple(segments))
    _check_simple(g, path)
    return path


def _edges_through(g: FiniteGraph, p: GraphPoint) -> set:
    v = g.vertex_of(p)
    return {p.edge} if v is None else set(g.incident[v])


def _segment_vertices(seg: Segment):
    out = set()
    if seg.lo == ZERO:
        out.add(seg.edge[0])
    if seg.hi == ONE:
        out.add(seg.edge[1])
    return out


def _check_simple(g: FiniteGraph, path: EdgePath):
    segs = path.segments
    for k, seg in enumerate(segs):
        if k + 1 < len(segs):
            end = g.point(seg.edge, seg.end)
            nxt = g.point(segs[k + 1].edge, segs[k + 1].start)
            if end != nxt or g.vertex_of(end) is None:
                raise MapError("image path segments must join at vertices")
    for (i, s1), (j, s2) in combinations(enumerate(segs), 2):
        if s1.edge == s2.edge:
            if max(s1.lo, s2.lo) <= min(s1.hi, s2.hi):
                raise MapError(f"image path revisits edge {edge_label(s1.edge)}")
            continue
        shared = _segment_vertices(s1) & _segment_vertices(s2)
        if j == i + 1:
            shared -= {g.vertex_of(g.point(s1.edge, s1.end))}
        if shared:
            raise MapError(f"image path revisits vertex {sorted(shared)}")


class Lap:
    """One linear piece: ``[t0, t1]`` on ``edge`` carried onto ``path``."""

    __slots__ = ("graph", "edge", "index", "t0", "t1", "path", "_cum", "_seglen", "total")

    def __init__(self, g: FiniteGraph, edge, index: int, t0: Fraction, t1: Fraction, path: EdgePath):
        self.graph = g
        self.edge = edge
        self.index = index
        self.t0 = t0
        self.t1 = t1
        self.path = path
        self._seglen = [g.segment_length(s) for s in path.segments]
        cum, acc = [], ZERO
        for length in self._seglen:
            cum.append(acc)
            acc += length
        self._cum = cum
        self.total = acc

    def __repr__(self):
        return f"Lap({edge_label(self.edge)}#{self.index}, [{self.t0}, {self.t1}])"

    @property
    def constant(self) -> bool:
        return self.total == 0

    @property
    def stretch(self) -> Fraction:
        return self.total / ((self.t1 - self.t0) * self.graph.lengths[self.edge])

    @property
    def start(self) -> GraphPoint:
        s = self.path.segments[0]
        return self.graph.point(s.edge, s.start)

    @property
    def end(self) -> GraphPoint:
        s = self.path.segments[-1]
        return self.graph.point(s.edge, s.end)

    def germ_out(self):
        """Direction ``(edge, sign)`` in which the image leaves ``start``."""
        s = self.path.segments[0]
        return (s.edge, s.orientation)

    def germ_back(self):
        """Direction in which the image, run backwards, leaves ``end``."""
        s = self.path.segments[-1]
        return (s.edge, -s.orientation)

    def _param_to_arclength(self, t: Fraction) -> Fraction:
        return (t - self.t0) / (self.t1 - self.t0) * self.total

    def _arclength_to_param(self, s: Fraction) -> Fraction:
        return self.t0 + (self.t1 - self.t0) * s / self.total

    def _point_at_arclength(self, s: Fraction):
        segs = self.path.segments
        if self.total == 0:
            return segs[0].edge, segs[0].start
        k = bisect_right(self._cum, s) - 1
        k = max(0, min(k, len(segs) - 1))
        while k + 1 < len(segs) and s > self._cum[k] + self._seglen[k]:
            k += 1
        seg = segs[k]
        offset = (s - self._cum[k]) / self.graph.lengths[seg.edge]
        return seg.edge, seg.start + offset * seg.orientation

    def at(self, t: Fraction) -> GraphPoint:
        edge, u = self._point_at_arclength(self._param_to_arclength(t) if self.total else ZERO)
        return self.graph.point(edge, u)

    def preimage_params(self, q: GraphPoint):
        """Params in this lap mapping onto ``q`` (lap must not be constant)."""
        out = set()
        for seg, cum in zip(self.path.segments, self._cum):
            u = self.graph.param_on(q, seg.edge)
            if u is None or not seg.lo <= u <= seg.hi:
                continue
            s = cum + abs(u - seg.start) * self.graph.lengths[seg.edge]
            out.add(self._arclength_to_param(s))
        return out

    def preimage_interval(self, edge, a: Fraction, b: Fraction, window=None):
        """Sub-interval of the lap mapped into the arc ``[a, b]`` of ``edge``.

        ``window`` restricts the search to params ``(u0, u1)`` of the lap.
        Returns ``(lo, hi)`` or ``None``; the intersection must be connected,
        which holds whenever the arc lies inside a single cell covered by the lap.
        """
        u0, u1 = window if window is not None else (self.t0, self.t1)
        hits = []
        for seg, cum in zip(self.path.segments, self._cum):
            if seg.edge != edge:
                continue
            lo, hi = max(seg.lo, a), min(seg.hi, b)
            if lo > hi:
                continue
            length = self.graph.lengths[edge]
            s_lo = cum + abs(lo - seg.start) * length
            s_hi = cum + abs(hi - seg.start) * length
            p_lo, p_hi = sorted((self._arclength_to_param(s_lo), self._arclength_to_param(s_hi)))
            p_lo, p_hi = max(p_lo, u0), min(p_hi, u1)
            if p_lo <= p_hi:
                hits.append((p_lo, p_hi))
        if not hits:
            return None
        hits.sort()
        lo, hi = hits[0]
        for nlo, nhi in hits[1:]:
            if nlo > hi:
                raise MapError("preimage of an arc splits inside one lap")
            hi = max(hi, nhi)
        return lo, hi

    def sub_segments(self, u0: Fraction, u1: Fraction):
        """Directed segments traced while the param runs from ``u0`` to ``u1``."""
        s0, s1 = self._param_to_arclength(u0), self._param_to_arclength(u1)
        forward = s0 <= s1
        lo, hi = (s0, s1) if forward else (s1, s0)
        out = []
        for seg, cum, length in zip(self.path.segments, self._cum, self._seglen):
            a, b = max(lo, cum), min(hi, cum + length)
            if a >= b:
                continue
            scale = self.graph.lengths[seg.edge]
            pa = seg.start + (a - cum) / scale * seg.orientation
            pb = seg.start + (b - cum) / scale * seg.orientation
            out.append(Segment(seg.edge, pa, pb))
        if not forward:
            out = [Segment(s.edge, s.end, s.start) for s in reversed(out)]
        return out

    def image_arcs(self, u0: Fraction, u1: Fraction):
        if self.total == 0 or u0 == u1:
            p = self.at(u0)
            return [Arc(p.edge, p.t, p.t)]
        return [Arc(s.edge, s.lo, s.hi) for s in self.sub_segments(u0, u1)]


@dataclass(frozen=True)
class TurningPoint:
    location: GraphPoint
    laps: tuple  # ((edge, lap index), (edge, lap index)) on either side
    germ: tuple  # common direction (edge, sign) leaving the image point


class PLGraphMap:
    """Continuous piecewise-linear map ``G -> G``.

    ``edge_maps`` maps each edge to ``(breakpoints, paths)`` where
    ``breakpoints`` runs ``0 = t_0 < ... < t_m = 1`` and ``paths[k]`` is the
    :class:`EdgePath` image of ``[t_k, t_{k+1}]``.
    """

    def __init__(self, g: FiniteGraph, edge_maps, name: str = "f"):
        self.graph = g
        self.name = name
        missing = set(g.edges) - set(edge_maps)
        if missing:
            raise MapError(f"map {name!r} leaves edges {sorted(map(edge_label, missing))} undefined")
        extra = set(edge_maps) - set(g.edges)
        if extra:
            raise MapError(f"map {name!r} mentions unknown edges {sorted(map(edge_label, extra))}")
        self.breaks = {}
        self.laps = {}
        for e in g.edges:
            breaks, paths = edge_maps[e]
            breaks = tuple(frac(b) for b in breaks)
            if len(breaks) < 2 or breaks[0] != 0 or breaks[-1] != 1:
                raise MapError(f"breakpoints on {edge_label(e)} must run from 0 to 1")
            if any(a >= b for a, b in zip(breaks, breaks[1:])):
                raise MapError(f"breakpoints on {edge_label(e)} must increase strictly")
            if len(paths) != len(breaks) - 1:
                raise MapError(f"{edge_label(e)}: {len(breaks) - 1} laps but {len(paths)} images")
            self.breaks[e] = breaks
            self.laps[e] = tuple(
                Lap(g, e, k, breaks[k], breaks[k + 1], path) for k, path in enumerate(paths)
            )
        self._check_continuity()
        self._turning = self._find_turning_points()

    def __repr__(self):
        return f"PLGraphMap({self.name!r}, {self.graph!r})"

    def all_laps(self):
        for e in self.graph.edges:
            yield from self.laps[e]

    @property
    def has_constant_laps(self) -> bool:
        return any(lap.constant for lap in self.all_laps())

    @property
    def min_stretch(self) -> Fraction:
        return min(lap.stretch for lap in self.all_laps())

    def _check_continuity(self):
        g = self.graph
        for e, laps in self.laps.items():
            for left, right in zip(laps, laps[1:]):
                if left.end != right.start:
                    raise MapError(
                        f"map {self.name!r} is discontinuous at {edge_label(e)}@{left.t1}: "
                        f"{left.end} vs {right.start}"
                    )
        for v in g.vertices:
            images = {lap.start if v == lap.edge[0] else lap.end for lap in self._laps_at(v)}
            if len(images) != 1:
                raise MapError(f"map {self.name!r} is discontinuous at vertex v{v}")

    def _laps_at(self, v):
        for e in self.graph.incident[v]:
            yield self.laps[e][0] if v == e[0] else self.laps[e][-1]

    def _find_turning_points(self):
        g = self.graph
        found = []
        for e, laps in self.laps.items():
            for left, right in zip(laps, laps[1:]):
                if left.constant or right.constant:
                    continue
                if left.germ_back() == right.germ_out():
                    found.append(TurningPoint(
                        g.point(e, left.t1), ((e, left.index), (e, right.index)), right.germ_out()))
        for v in g.vertices:
            germs = []
            for lap in self._laps_at(v):
                if lap.constant:
                    continue
                germ = lap.germ_out() if v == lap.edge[0] else lap.germ_back()
                germs.append(((lap.edge, lap.index), germ))
            folded = [(a, b) for a, b in combinations(germs, 2) if a[1] == b[1]]
            if not folded:
                continue
            if len(g.incident[v]) >= 3:
                raise FoldOnBranchVertex(
                    f"map {self.name!r} folds at branch vertex v{v}; folds must avoid vertices of degree >= 3")
            (a, b), = folded
            found.append(TurningPoint(g.vertex_point(v), (a[0], b[0]), a[1]))
        found.sort(key=lambda tp: tp.location)
        return tuple(found)

    def lap_at(self, p: GraphPoint) -> Lap:
        breaks = self.breaks[p.edge]
        k = bisect_right(breaks, p.t) - 1
        return self.laps[p.edge][min(k, len(breaks) - 2)]

    def __call__(self, p: GraphPoint) -> GraphPoint:
        return self.lap_at(p).at(p.t)

    def eval(self, p: GraphPoint) -> GraphPoint:
        return self(p)

    def preimages(self, q: GraphPoint) -> frozenset:
        if self.has_constant_laps:
            raise ConstantLap(f"map {self.name!r} has a constant lap; preimages need not be isolated")
        g = self.graph
        out = set()
        for lap in self.all_laps():
            for t in lap.preimage_params(q):
                out.add(g.point(lap.edge, t))
        return frozenset(out)

    @property
    def turning_points(self) -> tuple:
        return self._turning

    def breakpoint_set(self) -> frozenset:
        g = self.graph
        return frozenset(g.point(e, t) for e, bs in self.breaks.items() for t in bs)

    def image_of_arcs(self, arcs):
        """Image of a union of arcs, as merged arcs."""
        out = []
        for arc in arcs:
            for lap in self.laps[arc.edge]:
                lo, hi = max(arc.a, lap.t0), min(arc.b, lap.t1)
                if lo > hi:
                    continue
                out.extend(lap.image_arcs(lo, hi))
        return merge_arcs(out)


def merge_arcs(arcs):
    """Union of arcs, merged per edge into disjoint maximal arcs."""
    by_edge = {}
    for arc in arcs:
        by_edge.setdefault(arc.edge, []).append(arc)
    merged = []
    for edge in sorted(by_edge):
        items = sorted(by_edge[edge], key=lambda a: (a.a, a.b))
        lo, hi = items[0].a, items[0].b
        for arc in items[1:]:
            if arc.a <= hi:
                hi = max(hi, arc.b)
            else:
                merged.append(Arc(edge, lo, hi))
                lo, hi = arc.a, arc.b
        merged.append(Arc(edge, lo, hi))
    return merged


def build_map(g: FiniteGraph, spec, name: str = "f") -> PLGraphMap:
    """Build a map from a parsed description.

    ``spec`` maps edge labels (``"i-j"``) to tables holding ``breakpoints``
    and either ``images`` (one waypoint list per lap) or ``values`` (the
    image of each breakpoint; each lap then runs straight along one edge).
    """
    from .graph import parse_edge

    edge_maps = {}
    for label, table in spec.items():
        e = parse_edge(label) if isinstance(label, str) else tuple(label)
        if e[0] > e[1]:
            raise MapError(f"edge labels must be written i-j with i < j, got {label!r}")
        if "breakpoints" not in table:
            raise MapError(f"{label}: missing 'breakpoints'")
        breaks = [frac(b) for b in table["breakpoints"]]
        if "images" in table:
            waypoint_lists = table["images"]
        elif "values" in table:
            # a bare number is a position on this same edge
            values = [v if isinstance(v, str) and ("@" in v or v.startswith("v")) else g.point(e, v)
                      for v in table["values"]]
            if len(values) != len(breaks):
                raise MapError(f"{label}: need one value per breakpoint")
            waypoint_lists = [[a, b] if a != b else [a] for a, b in zip(values, values[1:])]
        else:
            raise MapError(f"{label}: give 'images' or 'values'")
        edge_maps[e] = (breaks, [path_from_points(g, w) for w in waypoint_lists])
    return PLGraphMap(g, edge_maps, name=name)


def identity_map(g: FiniteGraph, name: str = "id") -> PLGraphMap:
    edge_maps = {e: ((ZERO, ONE), [EdgePath((Segment(e, ZERO, ONE),))]) for e in g.edges}
    return PLGraphMap(g, edge_maps, name=name)


def eval_map(f: PLGraphMap, p: GraphPoint) -> GraphPoint:
    return f(p)


def preimages(f: PLGraphMap, q: GraphPoint) -> frozenset:
    return f.preimages(q)


def turning_points(f: PLGraphMap) -> tuple:
    return f.turning_points


# -- standing assumptions --------------------------------------------------


@dataclass(frozen=True)
class Multivalued:
    """Tri-state verdict on eventual multi-valuedness of backward images."""

    state: str  # "verified" | "failed" | "undetermined"
    n: int | None = None
    note: str = ""

    def __str__(self):
        return f"{self.state}({self.n})" if self.n is not None else self.state


@dataclass(frozen=True)
class AssumptionReport:
    isolated_preimages: bool
    nonexpanding_preimages: bool
    eventually_multivalued_preimages: Multivalued
    min_stretch: Fraction
    notes: tuple = field(default=())

    @property
    def all_hold(self) -> bool:
        return (self.isolated_preimages and self.nonexpanding_preimages
                and self.eventually_multivalued_preimages.state == "verified")


def check_standing_assumptions(f: PLGraphMap, cap: int = 64, partition_cap: int = 10_000) -> AssumptionReport:
    """Checkable sufficient conditions for the standing assumptions on ``f``.

    Preimage multi-valuedness is decided on transition-matrix powers with
    entries saturated at 2; a repeated saturated state without success is a
    definite failure for interior points of some cell.
    """
    from .markov import compute_markov_partition, index_sets

    isolated = not f.has_constant_laps
    stretch = f.min_stretch
    notes = []
    if not isolated:
        mv = Multivalued("undetermined", cap, "map has constant laps")
    else:
        try:
            data = index_sets(f, compute_markov_partition(f, partition_cap))
        except (NotEventuallyPeriodic, NotMarkovOnCells) as exc:
            mv = Multivalued("undetermined", cap, f"no Markov structure: {exc}")
        else:
            mv = _saturated_column_check(data.matrix, cap)
    if stretch < 1:
        notes.append(f"minimum lap stretch {stretch} < 1")
    return AssumptionReport(isolated, stretch >= 1, mv, stretch, tuple(notes))


def _saturated_column_check(matrix, cap: int) -> Multivalued:
    size = len(matrix)
    sat = [[min(x, 2) for x in row] for row in matrix]
    power = sat
    seen = {}
    ever = [False] * size
    for n in range(1, cap + 1):
        sums = [sum(power[i][j] for i in range(size)) for j in range(size)]
        for j, s in enumerate(sums):
            if s >= 2:
                ever[j] = True
        if all(s >= 2 for s in sums):
            return Multivalued("verified", n)
        key = tuple(map(tuple, power))
        if key in seen:
            if not all(ever):
                bad = [j for j, hit in enumerate(ever) if not hit]
                return Multivalued("failed", None, f"cells {bad} never gain a second preimage")
            return Multivalued("undetermined", cap, "columns reach 2 preimages only at different powers")
        seen[key] = n
        power = [[min(2, sum(power[i][k] * sat[k][j] for k in range(size))) for j in range(size)]
                 for i in range(size)]
    return Multivalued("undetermined", cap)
