"""Finite graphs as exact metric spaces.

A graph has integer vertex labels and edges ``(i, j)`` with ``i < j``.  Every
edge carries a positive rational length; a point on an edge is addressed by
its normalised arclength ``t`` in ``[0, 1]`` measured from ``v_i``.  All
arithmetic is done with :class:`fractions.Fraction`.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .errors import (
    BadNumber,
    Disconnected,
    DuplicateEdge,
    FloatRefused,
    GraphError,
    NonpositiveLength,
    SelfLoop,
)

Edge = tuple  # (i, j) with i < j

ZERO = Fraction(0)
ONE = Fraction(1)


def edge_label(edge: Edge) -> str:
    return f"{edge[0]}-{edge[1]}"


def parse_edge(text: str) -> Edge:
    try:
        i, j = (int(part) for part in text.strip().split("-"))
    except ValueError:
        raise GraphError(f"bad edge label {text!r}") from None
    return (i, j)


def frac(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings; floats are refused."""
    if isinstance(value, float):
        raise FloatRefused("floating point values are not accepted; use 'p/q' strings")
    if isinstance(value, str):
        value = value.strip()
    try:
        return Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError):
        raise BadNumber(f"not an exact rational: {value!r}") from None


@dataclass(frozen=True, order=True)
class GraphPoint:
    """A point of the graph, always in canonical form (see FiniteGraph.point)."""

    edge: Edge
    t: Fraction

    def __str__(self):
        return f"{edge_label(self.edge)}@{self.t}"


@dataclass(frozen=True, order=True)
class Arc:
    """The sub-arc ``[a, b]`` of an edge, ``a`` nearer to ``v_i``."""

    edge: Edge
    a: Fraction
    b: Fraction

    def __post_init__(self):
        if not (ZERO <= self.a <= self.b <= ONE):
            raise ValueError(f"invalid arc {self.a}..{self.b} on {edge_label(self.edge)}")

    @property
    def degenerate(self) -> bool:
        return self.a == self.b

    def contains(self, t: Fraction) -> bool:
        return self.a <= t <= self.b


@dataclass(frozen=True)
class Segment:
    """Directed straight run along one edge, from param ``start`` to ``end``."""

    edge: Edge
    start: Fraction
    end: Fraction

    @property
    def lo(self):
        return min(self.start, self.end)

    @property
    def hi(self):
        return max(self.start, self.end)

    @property
    def orientation(self) -> int:
        return (self.end > self.start) - (self.end < self.start)


@dataclass(frozen=True)
class EdgePath:
    """A simple edge-path: consecutive segments meet at a shared vertex.

    A path with one degenerate segment represents a single point (used for
    constant laps, which the rest of the package rejects where it matters).
    """

    segments: tuple

    @property
    def degenerate(self) -> bool:
        return len(self.segments) == 1 and self.segments[0].start == self.segments[0].end


class FiniteGraph:
    """Immutable finite graph with a rational path metric.

    Use :func:`build_graph` to construct one from a parsed description.
    """

    __slots__ = (
        "vertices",
        "edges",
        "lengths",
        "incident",
        "_dist",
        "diam",
        "high_degree",
        "endpoints",
        "_tree",
    )

    def __init__(self, vertices: Sequence[int], edges: Iterable[Edge],
                 lengths: Mapping[Edge, Fraction] | None = None):
        vertices = [int(v) for v in vertices]
        if len(vertices) != len(set(vertices)):
            raise GraphError("duplicate vertex")
        vertices = tuple(sorted(vertices))
        seen = {}
        for raw in edges:
            i, j = int(raw[0]), int(raw[1])
            if i == j:
                raise SelfLoop(f"self-loop at vertex {i}")
            e = (min(i, j), max(i, j))
            if e in seen:
                raise DuplicateEdge(f"edge {edge_label(e)} listed twice")
            for v in e:
                if v not in vertices:
                    raise GraphError(f"edge {edge_label(e)} uses unknown vertex {v}")
            seen[e] = True
        if not seen:
            raise GraphError("graph has no edges")
        lengths = dict(lengths or {})
        lens = {}
        for e in seen:
            length = frac(lengths.get(e, 1))
            if length <= 0:
                raise NonpositiveLength(f"edge {edge_label(e)} has length {length}")
            lens[e] = length
        extra = set(lengths) - set(seen)
        if extra:
            raise GraphError(f"lengths given for unknown edges {sorted(extra)}")

        set_ = object.__setattr__
        set_(self, "vertices", vertices)
        set_(self, "edges", tuple(sorted(seen)))
        set_(self, "lengths", lens)
        incident = {v: [] for v in vertices}
        for e in self.edges:
            incident[e[0]].append(e)
            incident[e[1]].append(e)
        set_(self, "incident", {v: tuple(sorted(es)) for v, es in incident.items()})
        self._check_connected()
        set_(self, "_dist", self._all_pairs())
        set_(self, "high_degree", frozenset(v for v in vertices if len(self.incident[v]) >= 3))
        set_(self, "endpoints", frozenset(v for v in vertices if len(self.incident[v]) == 1))
        set_(self, "_tree", len(self.edges) == len(vertices) - 1)
        set_(self, "diam", self.arcs_diameter([Arc(e, ZERO, ONE) for e in self.edges]))

    def __setattr__(self, name, value):
        raise AttributeError("FiniteGraph is immutable")

    def __eq__(self, other):
        if not isinstance(other, FiniteGraph):
            return NotImplemented
        return (self.vertices, self.edges, self.lengths) == (other.vertices, other.edges, other.lengths)

    def __hash__(self):
        return hash((self.vertices, self.edges, tuple(sorted(self.lengths.items()))))

    def __repr__(self):
        es = ", ".join(edge_label(e) for e in self.edges)
        return f"FiniteGraph(vertices={list(self.vertices)}, edges=[{es}])"

    def _check_connected(self):
        start = self.vertices[0]
        seen = {start}
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for e in self.incident[v]:
                w = e[1] if e[0] == v else e[0]
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        if len(seen) != len(self.vertices):
            missing = sorted(set(self.vertices) - seen)
            raise Disconnected(f"vertices {missing} are not reachable from {start}")

    def _all_pairs(self):
        inf = None
        dist = {u: {w: inf for w in self.vertices} for u in self.vertices}
        for v in self.vertices:
            dist[v][v] = ZERO
        for e in self.edges:
            dist[e[0]][e[1]] = dist[e[1]][e[0]] = self.lengths[e]
        for k in self.vertices:
            dk = dist[k]
            for i in self.vertices:
                dik = dist[i][k]
                if dik is None:
                    continue
                di = dist[i]
                for j in self.vertices:
                    dkj = dk[j]
                    if dkj is None:
                        continue
                    if di[j] is None or dik + dkj < di[j]:
                        di[j] = dik + dkj
        return dist

    # -- structure ---------------------------------------------------------

    @property
    def is_tree(self) -> bool:
        return self._tree

    @property
    def is_arc(self) -> bool:
        """True when the graph is homeomorphic to an interval."""
        return self._tree and not self.high_degree

    def vertex_distance(self, u: int, w: int) -> Fraction:
        return self._dist[u][w]

    def other_end(self, edge: Edge, v: int) -> int:
        return edge[1] if edge[0] == v else edge[0]

    # -- points ------------------------------------------------------------

    def vertex_point(self, v: int) -> GraphPoint:
        if v not in self.incident:
            raise GraphError(f"unknown vertex {v}")
        e = self.incident[v][0]
        return GraphPoint(e, ZERO if e[0] == v else ONE)

    def point(self, edge: Edge, t) -> GraphPoint:
        """Canonical point at normalised position ``t`` on ``edge``."""
        edge = tuple(edge)
        if edge not in self.lengths:
            raise GraphError(f"unknown edge {edge_label(edge)}")
        t = frac(t)
        if not ZERO <= t <= ONE:
            raise GraphError(f"position {t} outside [0, 1]")
        if t == ZERO:
            return self.vertex_point(edge[0])
        if t == ONE:
            return self.vertex_point(edge[1])
        return GraphPoint(edge, t)

    def vertex_of(self, p: GraphPoint):
        """Vertex label if ``p`` is a vertex, else ``None``."""
        if p.t == ZERO:
            return p.edge[0]
        if p.t == ONE:
            return p.edge[1]
        return None

    def param_on(self, p: GraphPoint, edge: Edge):
        """Position of ``p`` on ``edge``, or ``None`` if ``p`` is not on it."""
        if p.edge == edge:
            return p.t
        v = self.vertex_of(p)
        if v is None:
            return None
        if v == edge[0]:
            return ZERO
        if v == edge[1]:
            return ONE
        return None

    def degree(self, p: GraphPoint) -> int:
        v = self.vertex_of(p)
        return 0 if v is None else len(self.incident[v])

    def arc_length(self, arc: Arc) -> Fraction:
        return (arc.b - arc.a) * self.lengths[arc.edge]

    def segment_length(self, seg: Segment) -> Fraction:
        return (seg.hi - seg.lo) * self.lengths[seg.edge]

    # -- metric ------------------------------------------------------------

    def _via_pieces(self, e1: Edge, e2: Edge):
        """Affine pieces ``(cs, ct, c0)`` of the through-vertex distances."""
        l1, l2 = self.lengths[e1], self.lengths[e2]
        from_s = ((e1[0], l1, ZERO), (e1[1], -l1, l1))
        to_t = ((e2[0], l2, ZERO), (e2[1], -l2, l2))
        return [
            (cs, ct, c0 + d0 + self._dist[u][w])
            for u, cs, c0 in from_s
            for w, ct, d0 in to_t
        ]

    def metric(self, p: GraphPoint, q: GraphPoint) -> Fraction:
        """Shortest-path distance between two canonical points."""
        best = min(cs * p.t + ct * q.t + c0 for cs, ct, c0 in self._via_pieces(p.edge, q.edge))
        if p.edge == q.edge:
            best = min(best, abs(p.t - q.t) * self.lengths[p.edge])
        return best

    def arcs_diameter(self, arcs: Sequence[Arc]) -> Fraction:
        """Diameter, in the metric of the whole graph, of a union of arcs."""
        arcs = list(arcs)
        if not arcs:
            return ZERO
        if self._tree:
            # distances along a tree are maximised at arc ends
            ends = []
            for arc in arcs:
                ends.append(self.point(arc.edge, arc.a))
                ends.append(self.point(arc.edge, arc.b))
            ends = list(set(ends))
            best = ZERO
            for p, q in combinations(ends, 2):
                d = self.metric(p, q)
                if d > best:
                    best = d
            return best
        best = ZERO
        for k, first in enumerate(arcs):
            for second in arcs[k:]:
                d = self._arc_pair_max(first, second)
                if d > best:
                    best = d
        return best

    def _arc_pair_max(self, x: Arc, y: Arc) -> Fraction:
        box = (x.a, x.b, y.a, y.b)
        pieces = self._via_pieces(x.edge, y.edge)
        if x.edge != y.edge:
            return _max_of_min_affine(pieces, box, [])
        length = self.lengths[x.edge]
        up = pieces + [(-length, length, ZERO)]  # region t >= s
        down = pieces + [(length, -length, ZERO)]  # region s >= t
        return max(
            _max_of_min_affine(up, box, [(-ONE, ONE, ZERO)]),
            _max_of_min_affine(down, box, [(ONE, -ONE, ZERO)]),
        )


def _max_of_min_affine(pieces, box, halfplanes):
    """Exact max over a box (and half-planes ``cs*s + ct*t + c0 >= 0``) of a
    minimum of affine functions, by enumerating arrangement vertices."""
    s0, s1, t0, t1 = box
    lines = [(ONE, ZERO, -s0), (ONE, ZERO, -s1), (ZERO, ONE, -t0), (ZERO, ONE, -t1)]
    lines.extend(halfplanes)
    for (a1, b1, c1), (a2, b2, c2) in combinations(pieces, 2):
        if (a1, b1) != (a2, b2):
            lines.append((a1 - a2, b1 - b2, c1 - c2))
    best = None
    for (a1, b1, c1), (a2, b2, c2) in combinations(lines, 2):
        det = a1 * b2 - a2 * b1
        if det == 0:
            continue
        s = (-c1 * b2 + c2 * b1) / det
        t = (-a1 * c2 + a2 * c1) / det
        if not (s0 <= s <= s1 and t0 <= t <= t1):
            continue
        if any(hs * s + ht * t + h0 < 0 for hs, ht, h0 in halfplanes):
            continue
        value = min(cs * s + ct * t + c0 for cs, ct, c0 in pieces)
        if best is None or value > best:
            best = value
    return best if best is not None else ZERO


def build_graph(spec) -> FiniteGraph:
    """Build and validate a graph from a parsed description.

    ``spec`` is a mapping with ``vertices`` (labels or a count) and ``edges``,
    each edge a pair ``[i, j]`` or triple ``[i, j, "length"]``.
    """
    vertices = spec.get("vertices")
    if isinstance(vertices, int):
        vertices = range(1, vertices + 1)
    if vertices is None:
        raise GraphError("graph section needs 'vertices'")
    vertices = [int(v) for v in vertices]
    if len(vertices) != len(set(vertices)):
        raise GraphError("duplicate vertex label")
    edges, lengths, seen = [], {}, set()
    for raw in spec.get("edges", ()):
        if isinstance(raw, str):
            raw = parse_edge(raw)
        if len(raw) not in (2, 3):
            raise GraphError(f"bad edge entry {raw!r}")
        i, j = int(raw[0]), int(raw[1])
        e = (min(i, j), max(i, j))
        if e in seen:
            raise DuplicateEdge(f"edge {edge_label(e)} listed twice")
        seen.add(e)
        edges.append((i, j))
        if len(raw) == 3:
            lengths[e] = frac(raw[2])
    return FiniteGraph(vertices, edges, lengths)


def degree(g: FiniteGraph, p: GraphPoint) -> int:
    return g.degree(p)


def graph_metric(g: FiniteGraph, p: GraphPoint, q: GraphPoint) -> Fraction:
    return g.metric(p, q)


def parse_point(g: FiniteGraph, text: str) -> GraphPoint:
    """Parse ``edge:i-j@a/b``, ``i-j@a/b``, ``v:k`` or ``vk`` into a point."""
    text = text.strip()
    if text.startswith("edge:"):
        text = text[5:]
    if text.startswith("v:"):
        text = "v" + text[2:]
    if text.startswith("v"):
        try:
            return g.vertex_point(int(text[1:]))
        except ValueError:
            raise GraphError(f"bad vertex {text!r}") from None
    if "@" not in text:
        raise GraphError(f"bad point {text!r}; expected i-j@a/b or vk")
    edge_text, t_text = text.split("@", 1)
    i, j = parse_edge(edge_text)
    try:
        t = frac(t_text)
    except (ValueError, ZeroDivisionError):
        raise GraphError(f"bad position in {text!r}") from None
    if i > j:
        i, j, t = j, i, ONE - t
    return g.point((i, j), t)


def format_point(p: GraphPoint) -> str:
    return f"edge:{edge_label(p.edge)}@{p.t}"
