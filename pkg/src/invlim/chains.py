"""Closed graph-chains, refinement patterns and the Markov graph-chain function.

Links are identified by ``(edge, k)`` with ``k`` counted from 1 along the
edge starting at its lower vertex.  A link is a tuple of :class:`Arc`; every
chain built here has single-arc links, but validation accepts unions.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    AssumptionMissing,
    ChainError,
    DifferentGraphs,
    NotPatternEquivalent,
    NotRefinementOfMarkovChain,
    PatternDivergence,
    PatternMismatch,
)
from .graph import ONE, ZERO, Arc, FiniteGraph, GraphPoint, edge_label
from .markov import DEFAULT_PARTITION_CAP, MarkovData, markov_data, pattern_equivalent
from .plmap import PLGraphMap, merge_arcs


class GraphChain:
    """Ordered links per edge; immutable once built."""

    __slots__ = ("graph", "_links")

    def __init__(self, graph: FiniteGraph, links):
        object.__setattr__(self, "graph", graph)
        object.__setattr__(self, "_links", {e: tuple(tuple(link) for link in links.get(e, ())) for e in graph.edges})

    def __setattr__(self, name, value):
        raise AttributeError("GraphChain is immutable")

    def __eq__(self, other):
        return isinstance(other, GraphChain) and self.graph == other.graph and self._links == other._links

    def __hash__(self):
        return hash(tuple(self._links.items()))

    def __repr__(self):
        return f"GraphChain({len(self)} links)"

    def __len__(self):
        return sum(len(v) for v in self._links.values())

    @property
    def edge_index_set(self):
        return self.graph.edges

    def size(self, edge) -> int:
        return len(self._links[edge])

    def ids(self):
        return [(e, k) for e in self.graph.edges for k in range(1, len(self._links[e]) + 1)]

    def link(self, lid):
        e, k = lid
        return self._links[e][k - 1]

    def edge_links(self, edge):
        return self._links[edge]

    def arc(self, lid) -> Arc:
        link = self.link(lid)
        if len(link) != 1:
            raise ChainError(f"link {lid} is not a single arc")
        return link[0]

    def link_length(self, lid) -> Fraction:
        return sum((self.graph.arc_length(a) for a in self.link(lid)), ZERO)

    def link_diameter(self, lid) -> Fraction:
        return self.graph.arcs_diameter(self.link(lid))

    def mesh(self) -> Fraction:
        return max((self.link_diameter(lid) for lid in self.ids()), default=ZERO)


class Pattern:
    """Assignment of each child link to the parent link containing it."""

    __slots__ = ("_map",)

    def __init__(self, mapping):
        object.__setattr__(self, "_map", dict(mapping))

    def __setattr__(self, name, value):
        raise AttributeError("Pattern is immutable")

    def __getitem__(self, child):
        return self._map[child]

    def get(self, child, default=None):
        return self._map.get(child, default)

    def __contains__(self, child):
        return child in self._map

    def __len__(self):
        return len(self._map)

    def __eq__(self, other):
        return isinstance(other, Pattern) and self._map == other._map

    def __hash__(self):
        return hash(tuple(sorted(self._map.items())))

    def __repr__(self):
        return f"Pattern({len(self._map)} links)"

    def items(self):
        return sorted(self._map.items())

    def compose(self, inner: "Pattern") -> "Pattern":
        """``self`` after ``inner``: child of ``inner`` -> parent of ``self``."""
        return Pattern({child: self._map[mid] for child, mid in inner._map.items()})

    @classmethod
    def identity(cls, ids):
        return cls({lid: lid for lid in ids})


def markov_chain(data: MarkovData, g: FiniteGraph) -> GraphChain:
    """The Markov graph-chain whose links are the cells of the partition."""
    links = {e: [] for e in g.edges}
    for lid in data.links:
        links[lid[0]].append((data.partition.arc(lid),))
    return GraphChain(g, links)


def refine_uniform(chain: GraphChain, counts=None, delta=None):
    """Split every link into ``Q`` equal-length closed sublinks.

    ``counts`` is an int or a mapping link -> int; with ``delta`` instead,
    ``Q = floor(length / delta) + 1`` so every sublink is shorter than
    ``delta``.  Returns the child chain and its pattern in ``chain``.
    """
    if (counts is None) == (delta is None):
        raise ValueError("give exactly one of counts or delta")
    if delta is not None:
        delta = Fraction(delta)
        if delta <= 0:
            raise ValueError("delta must be positive")
    g = chain.graph
    links, parent = {}, {}
    for e in g.edges:
        out = []
        for k in range(1, chain.size(e) + 1):
            lid = (e, k)
            arc = chain.arc(lid)
            if delta is not None:
                q = int(g.arc_length(arc) // delta) + 1
            elif isinstance(counts, int):
                q = counts
            else:
                q = counts[lid]
            if q < 1:
                raise ValueError(f"count for {lid} must be positive")
            step = (arc.b - arc.a) / q
            for n in range(q):
                out.append((Arc(e, arc.a + n * step, arc.a + (n + 1) * step),))
                parent[(e, len(out))] = lid
        links[e] = out
    return GraphChain(g, links), Pattern(parent)


# -- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str
    links: tuple
    detail: str = ""


@dataclass(frozen=True)
class ChainReport:
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def _intervals(link):
    by_edge = {}
    for arc in merge_arcs(link):
        by_edge.setdefault(arc.edge, []).append((arc.a, arc.b))
    return by_edge


def _contains(g, iv, p: GraphPoint) -> bool:
    for e, spans in iv.items():
        t = g.param_on(p, e)
        if t is not None and any(a <= t <= b for a, b in spans):
            return True
    return False


def _interior(g, iv, p: GraphPoint) -> bool:
    v = g.vertex_of(p)
    if v is None:
        return any(a < p.t < b for a, b in iv.get(p.edge, ()))
    for e in g.incident[v]:
        spans = iv.get(e, ())
        if v == e[0]:
            if not any(a == 0 < b for a, b in spans):
                return False
        elif not any(a < b == 1 for a, b in spans):
            return False
    return True


def _meet(g, iv1, iv2):
    """Intersection of two links: (positive-length overlaps, shared points)."""
    overlaps, points = [], set()
    for e in set(iv1) & set(iv2):
        for a1, b1 in iv1[e]:
            for a2, b2 in iv2[e]:
                lo, hi = max(a1, a2), min(b1, b2)
                if lo < hi:
                    overlaps.append(Arc(e, lo, hi))
                elif lo == hi:
                    points.add(g.point(e, lo))
    for v in g.vertices:
        p = g.vertex_point(v)
        if _contains(g, iv1, p) and _contains(g, iv2, p):
            points.add(p)
    return overlaps, points


def _end_link_at(chain, lid, v) -> bool:
    e, k = lid
    return (v == e[0] and k == 1) or (v == e[1] and k == chain.size(e))


def validate_closed_graph_chain(chain: GraphChain) -> ChainReport:
    """Check the closed graph-chain conditions; report every violation found."""
    g = chain.graph
    out = []
    ids = chain.ids()
    iv = {}
    for lid in ids:
        link = chain.link(lid)
        if not link or all(a.degenerate for a in link):
            out.append(Violation("degenerate", (lid,), "link has no length"))
        iv[lid] = _intervals(link)

    for e in g.edges:
        if chain.size(e) == 0:
            out.append(Violation("coverage", (), f"edge {edge_label(e)} has no links"))
            continue
        spans = sorted(s for lid in ids for s in iv[lid].get(e, ()))
        reach = ZERO
        for a, b in spans:
            if a > reach:
                break
            reach = max(reach, b)
        if reach < ONE:
            out.append(Violation("coverage", (), f"edge {edge_label(e)} uncovered beyond {reach}"))

    for v in g.vertices:
        p = g.vertex_point(v)
        for lid in ids:
            if _contains(g, iv[lid], p) and not _end_link_at(chain, lid, v):
                out.append(Violation("vertex-placement", (lid,), f"v{v} lies in a non-end link"))

    # candidate pairs: links sharing an edge span or a vertex
    candidates = set()
    for e in g.edges:
        items = sorted((a, b, lid) for lid in ids for a, b in iv[lid].get(e, ()))
        for n, (a, b, lid) in enumerate(items):
            for a2, b2, lid2 in items[n + 1:]:
                if a2 > b:
                    break
                if lid2 != lid:
                    candidates.add(tuple(sorted((lid, lid2))))
    for v in g.vertices:
        p = g.vertex_point(v)
        holders = [lid for lid in ids if _contains(g, iv[lid], p)]
        for n, lid in enumerate(holders):
            for lid2 in holders[n + 1:]:
                candidates.add(tuple(sorted((lid, lid2))))

    for lid1, lid2 in sorted(candidates):
        overlaps, points = _meet(g, iv[lid1], iv[lid2])
        if not overlaps and not points:
            continue
        if not _may_meet(chain, lid1, lid2):
            out.append(Violation("non-adjacent-intersection", (lid1, lid2),
                                 "links that are not neighbours intersect"))
            continue
        if overlaps:
            out.append(Violation("interior-overlap", (lid1, lid2),
                                 f"overlap of positive length on {edge_label(overlaps[0].edge)}"))
            continue
        for p in sorted(points):
            if _interior(g, iv[lid1], p) or _interior(g, iv[lid2], p):
                out.append(Violation("interior-overlap", (lid1, lid2), f"meet at non-boundary point {p}"))

    for e in g.edges:
        for k in range(1, chain.size(e)):
            a, b = (e, k), (e, k + 1)
            overlaps, points = _meet(g, iv[a], iv[b])
            if not overlaps and not points:
                out.append(Violation("missing-adjacency", (a, b), "consecutive links do not meet"))
    return ChainReport(tuple(out))


def _may_meet(chain, lid1, lid2) -> bool:
    (e1, k1), (e2, k2) = lid1, lid2
    if e1 == e2:
        return abs(k1 - k2) == 1
    for v in set(e1) & set(e2):
        if _end_link_at(chain, lid1, v) and _end_link_at(chain, lid2, v):
            return True
    return False


def links_inside(chain: GraphChain, parent: GraphChain):
    """Map each link to the unique parent link containing it (``None`` if none)."""
    out = {}
    for lid in chain.ids():
        home = None
        for pid in parent.ids():
            if all(any(p.edge == a.edge and p.a <= a.a and a.b <= p.b for p in parent.link(pid))
                   for a in chain.link(lid)):
                home = pid
                break
        out[lid] = home
    return out


# -- the Markov graph-chain function -----------------------------------------


@dataclass(frozen=True)
class FhatResult:
    chain: GraphChain
    provenance: tuple  # (output link, source link of C, (p, r) link of T^f)
    pattern_into_parent: Pattern
    trims: tuple  # (stage, (source, (p, r)), removed open interval (lo, hi))

    @property
    def pattern_into_source(self) -> Pattern:
        return Pattern({out: src for out, src, _ in self.provenance})


def _subtract(piece, other):
    """Closed ``piece`` minus the open interior of ``other`` (same edge)."""
    lo, hi = piece
    a, b = other
    if a >= b or b <= lo or a >= hi:
        return piece
    if a <= lo and b >= hi:
        raise ChainError(f"trimming removes the whole piece [{lo}, {hi}]")
    if a <= lo:
        return (b, hi)
    if b >= hi:
        return (lo, a)
    raise ChainError(f"trimming splits the piece [{lo}, {hi}] at ({a}, {b})")


def fhat(f: PLGraphMap, data: MarkovData, chain: GraphChain, h: Pattern) -> FhatResult:
    """Pull ``chain`` back through ``f`` cell by cell and trim shared points.

    ``chain`` must refine the Markov chain of ``data`` following ``h``.
    Pieces are built in four passes (first links, last links, interior
    links), edges in lexicographic order and target cells ascending.
    """
    g = f.graph
    part = data.partition
    cells = set(data.links)
    arcs = {}
    for lid in chain.ids():
        link = chain.link(lid)
        if len(link) != 1:
            raise NotRefinementOfMarkovChain(f"link {lid} is not a single arc")
        arc = link[0]
        parent = h.get(lid)
        if parent is None or parent not in cells:
            raise PatternMismatch(f"pattern gives no Markov link for {lid}")
        lo, hi = part.cell(parent)
        if not (arc.edge == parent[0] and lo <= arc.a and arc.b <= hi):
            home = [c for c in data.links if c[0] == arc.edge and part.cell(c)[0] <= arc.a
                    and arc.b <= part.cell(c)[1]]
            if home:
                raise PatternMismatch(f"link {lid} lies in {home[0]}, not in {parent}")
            raise NotRefinementOfMarkovChain(f"link {lid} lies in no Markov link")
        arcs[lid] = arc

    laps = {cell: f.laps[cell[0]][data.laps[cell][1]] for cell in data.links}
    pieces = {}
    order = []
    trims = []

    def raw(lid, cell):
        arc = arcs[lid]
        got = laps[cell].preimage_interval(arc.edge, arc.a, arc.b, window=part.cell(cell))
        if got is None or got[0] >= got[1]:
            raise ChainError(f"link {lid} has no pull-back in {cell} although it is covered")
        return got

    def trim(stage, key, others):
        for other in others:
            if other in pieces and other != key:
                before = pieces[key]
                after = _subtract(before, pieces[other])
                if after != before:
                    trims.append((stage, key, pieces[other]))
                    pieces[key] = after

    edges = list(g.edges)
    # first links
    for n, e in enumerate(edges):
        lid = (e, 1)
        for cell in data.inverse_index_sets[h[lid]]:
            key = (lid, cell)
            pieces[key] = raw(lid, cell)
            order.append(key)
            trim("first", key, [((q, 1), cell) for q in edges[:n]])
    # last links
    for n, e in enumerate(edges):
        last = chain.size(e)
        lid = (e, last)
        for cell in data.inverse_index_sets[h[lid]]:
            key = (lid, cell)
            if last > 1:
                pieces[key] = raw(lid, cell)
                order.append(key)
            far = [((q, 1), cell) for q in edges if q[0] == e[1]]
            earlier = [((q, chain.size(q)), cell) for q in edges[:n]]
            trim("last", key, far + earlier)
    # interior links
    for e in edges:
        last = chain.size(e)
        for m in range(2, last):
            lid = (e, m)
            for cell in data.inverse_index_sets[h[lid]]:
                key = (lid, cell)
                pieces[key] = raw(lid, cell)
                order.append(key)
                trim("interior", key, [((e, m - 1), cell), ((e, 1), cell), ((e, last), cell)])

    # overlaps the formulas leave behind are trimmed off the later piece
    rank = {key: n for n, key in enumerate(order)}
    by_cell = {}
    for key in order:
        by_cell.setdefault(key[1], []).append(key)
    for cell, keys in by_cell.items():
        for key in sorted(keys, key=rank.get):
            trim("extra", key, [k for k in keys if rank[k] < rank[key]])

    links, provenance, into_parent = {e: [] for e in g.edges}, [], {}
    for e in edges:
        keys = sorted((k for k in order if k[1][0] == e), key=lambda k: (pieces[k], k))
        for key in keys:
            lo, hi = pieces[key]
            if lo >= hi:
                raise ChainError(f"piece {key} collapsed to a point")
            links[e].append((Arc(e, lo, hi),))
            out_id = (e, len(links[e]))
            provenance.append((out_id, key[0], key[1]))
            into_parent[out_id] = key[1]
    return FhatResult(GraphChain(g, links), tuple(provenance), Pattern(into_parent), tuple(trims))


# -- inverse-limit mesh bounds and the joint refinement sequence ---------------


def normalised_scale(g: FiniteGraph) -> Fraction:
    """Factor turning graph distances into a metric bounded by 1/2."""
    return 1 / (2 * g.diam)


NORMALISED_DIAMETER = Fraction(1, 2)


def invlim_mesh_bound(f: PLGraphMap, chain: GraphChain, n: int) -> Fraction:
    """Upper bound on the mesh of the inverse-limit chain pulled back from
    ``chain`` at coordinate ``n`` (coordinates counted from 0)."""
    if n < 0:
        raise ValueError("coordinate must be nonnegative")
    if f.has_constant_laps or f.min_stretch < 1:
        raise AssumptionMissing("mesh bound needs a map with lap stretch factors >= 1")
    g = f.graph
    scale = normalised_scale(g)
    tail = NORMALISED_DIAMETER / 2 ** n
    best = ZERO
    for lid in chain.ids():
        images = [list(chain.link(lid))]
        for _ in range(n):
            images.append(f.image_of_arcs(images[-1]))
        total = tail
        for i in range(n + 1):
            total += g.arcs_diameter(images[n - i]) * scale / 2 ** i
        if total > best:
            best = total
    return best


@dataclass(frozen=True)
class RefinementRound:
    index: int
    delta: Fraction
    chain_f: GraphChain
    chain_g: GraphChain
    pattern: Pattern  # links of this round -> links of the previous round
    mesh_bounds: tuple  # (bound for f, bound for g)


def _joint_counts(base_f: GraphChain, base_g: GraphChain, delta: Fraction):
    return {
        lid: max(int(base_f.link_length(lid) // delta), int(base_g.link_length(lid) // delta)) + 1
        for lid in base_f.ids()
    }


def _choose_delta(f, g, base_f, base_g, coord, target, bisections=4, max_halvings=64):
    def attempt(delta):
        counts = _joint_counts(base_f, base_g, delta)
        cf, rf = refine_uniform(base_f, counts)
        cg, rg = refine_uniform(base_g, counts)
        bf = invlim_mesh_bound(f, cf, coord)
        bg = bf if f is g else invlim_mesh_bound(g, cg, coord)
        return (bf < target and bg < target), (delta, cf, rf, cg, rg, (bf, bg))

    fail = None
    delta = Fraction(1, 2)
    for _ in range(max_halvings):
        ok, result = attempt(delta)
        if ok:
            break
        fail = delta
        delta /= 2
    else:
        raise ChainError(f"no refinement reaches inverse-limit mesh {target}")
    if fail is not None:
        lo, hi = delta, fail
        for _ in range(bisections):
            mid = (lo + hi) / 2
            ok, candidate = attempt(mid)
            if ok:
                lo, result = mid, candidate
            else:
                hi = mid
    return result


def joint_refinement_sequence(f: PLGraphMap, g: PLGraphMap, depth: int,
                              cap: int = DEFAULT_PARTITION_CAP):
    """Refine the Markov chains of ``f`` and ``g`` side by side for ``depth``
    rounds with shared link counts, checking the patterns stay identical.

    Round ``k`` pulls back through the map once more and refines so that the
    inverse-limit chain at coordinate ``k`` has mesh below ``2**-k``.
    """
    if depth < 1:
        raise ValueError("depth must be positive")
    if f.graph != g.graph:
        raise DifferentGraphs("maps live on different graphs")
    equivalent, _ = pattern_equivalent(f, g, cap)
    if not equivalent:
        raise NotPatternEquivalent(f"{f.name} and {g.name} are not pattern equivalent")
    graph = f.graph
    df, dg = markov_data(f, cap), markov_data(g, cap)
    rounds = []
    prev_f = prev_g = None
    into_t_f = into_t_g = None
    for k in range(1, depth + 1):
        if k == 1:
            base_f, base_g = markov_chain(df, graph), markov_chain(dg, graph)
            source = Pattern.identity(base_f.ids())
            base_t_f = base_t_g = source
        else:
            hat_f = fhat(f, df, prev_f, into_t_f)
            hat_g = fhat(g, dg, prev_g, into_t_g)
            if [p[1:] for p in hat_f.provenance] != [p[1:] for p in hat_g.provenance]:
                raise PatternDivergence(k, "pulled-back chains differ combinatorially")
            base_f, base_g = hat_f.chain, hat_g.chain
            source = hat_f.pattern_into_source
            base_t_f, base_t_g = hat_f.pattern_into_parent, hat_g.pattern_into_parent
        if base_f.ids() != base_g.ids():
            raise PatternDivergence(k, "link counts differ")
        delta, cf, rf, cg, rg, bounds = _choose_delta(f, g, base_f, base_g, k, Fraction(1, 2 ** k))
        if rf != rg:
            raise PatternDivergence(k, "refinement patterns differ")
        pattern = source.compose(rf)
        rounds.append(RefinementRound(k, delta, cf, cg, pattern, bounds))
        prev_f, prev_g = cf, cg
        into_t_f, into_t_g = base_t_f.compose(rf), base_t_g.compose(rg)
    return rounds
