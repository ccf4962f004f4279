"""Markov partitions, index sets and transition matrices of PL graph maps."""
from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction

from .errors import NotEventuallyPeriodic, NotMarkovOnCells
from .graph import Arc, GraphPoint, edge_label
from .plmap import PLGraphMap

DEFAULT_PARTITION_CAP = 10_000

Link = tuple  # (edge, k), k counted from 1 along the edge starting at v_i


@dataclass(frozen=True)
class MarkovPartition:
    """Per-edge cut points ``0 = c_0 < ... < c_n = 1`` (normalised positions)."""

    cuts: dict

    def links(self):
        return [(e, k) for e in sorted(self.cuts) for k in range(1, len(self.cuts[e]))]

    def cell(self, link: Link):
        e, k = link
        cs = self.cuts[e]
        return cs[k - 1], cs[k]

    def arc(self, link: Link) -> Arc:
        lo, hi = self.cell(link)
        return Arc(link[0], lo, hi)

    def size(self, edge) -> int:
        return len(self.cuts[edge]) - 1

    def points(self, g):
        return frozenset(g.point(e, t) for e, cs in self.cuts.items() for t in cs)

    def index_of(self, edge, t: Fraction):
        """Index ``k`` with ``c_k == t`` on ``edge``, or ``None``."""
        cs = self.cuts[edge]
        k = bisect_left(cs, t)
        return k if k < len(cs) and cs[k] == t else None

    def links_containing(self, g, p: GraphPoint):
        """All links (closed cells) that contain the point ``p``."""
        out = []
        for e in sorted(self.cuts):
            t = g.param_on(p, e)
            if t is None:
                continue
            cs = self.cuts[e]
            for k in range(1, len(cs)):
                if cs[k - 1] <= t <= cs[k]:
                    out.append((e, k))
        return out

    def __eq__(self, other):
        return isinstance(other, MarkovPartition) and self.cuts == other.cuts

    def __hash__(self):
        return hash(tuple(sorted((e, tuple(c)) for e, c in self.cuts.items())))


@dataclass(frozen=True)
class MarkovData:
    partition: MarkovPartition
    links: tuple
    covers: dict  # link -> links of its image, in the order the image runs
    index_sets: dict  # A: link -> sorted tuple of links
    inverse_index_sets: dict  # S: link -> sorted tuple of links
    matrix: tuple  # M[src][dst] = 1 iff dst in A[src]
    laps: dict  # link -> (edge, lap index) carrying it

    def position(self, link: Link) -> int:
        return self.links.index(link)

    def chain_arcs(self):
        """Links of the Markov graph-chain as arcs, keyed by link id."""
        return {link: self.partition.arc(link) for link in self.links}


def compute_markov_partition(f: PLGraphMap, cap: int = DEFAULT_PARTITION_CAP) -> MarkovPartition:
    """Smallest forward-invariant cut set containing vertices, folds and breakpoints."""
    g = f.graph
    seed = set(g.vertex_point(v) for v in g.vertices)
    seed.update(tp.location for tp in f.turning_points)
    seed.update(f.breakpoint_set())
    points = set(seed)
    frontier = seed
    rounds = 0
    while frontier:
        rounds += 1
        if rounds > cap:
            raise NotEventuallyPeriodic(cap)
        frontier = {f(p) for p in frontier} - points
        points |= frontier
    cuts = {e: {Fraction(0), Fraction(1)} for e in g.edges}
    for p in points:
        if g.vertex_of(p) is None:
            cuts[p.edge].add(p.t)
    return MarkovPartition({e: tuple(sorted(cs)) for e, cs in cuts.items()})


def index_sets(f: PLGraphMap, part: MarkovPartition) -> MarkovData:
    g = f.graph
    pts = part.points(g)
    for p in pts:
        if f(p) not in pts:
            raise NotMarkovOnCells(f"partition is not invariant: {p} maps to {f(p)}")
    links = part.links()
    covers, laps = {}, {}
    for link in links:
        e, _ = link
        lo, hi = part.cell(link)
        lap = next((L for L in f.laps[e] if L.t0 <= lo and hi <= L.t1), None)
        if lap is None:
            raise NotMarkovOnCells(f"cell {edge_label(e)}#{link[1]} straddles a map breakpoint")
        if lap.constant:
            raise NotMarkovOnCells(f"map is constant on cell {edge_label(e)}#{link[1]}")
        laps[link] = (e, lap.index)
        covered = []
        for seg in lap.sub_segments(lo, hi):
            i0 = part.index_of(seg.edge, seg.lo)
            i1 = part.index_of(seg.edge, seg.hi)
            if i0 is None or i1 is None:
                raise NotMarkovOnCells(
                    f"image of {edge_label(e)}#{link[1]} ends inside a cell of {edge_label(seg.edge)}")
            ks = range(i0 + 1, i1 + 1)
            if seg.orientation < 0:
                ks = reversed(ks)
            covered.extend((seg.edge, k) for k in ks)
        covers[link] = tuple(covered)
    A = {link: tuple(sorted(set(cov))) for link, cov in covers.items()}
    S = {link: [] for link in links}
    for src, targets in A.items():
        for dst in targets:
            S[dst].append(src)
    S = {link: tuple(sorted(v)) for link, v in S.items()}
    pos = {link: n for n, link in enumerate(links)}
    matrix = [[0] * len(links) for _ in links]
    for src, targets in A.items():
        for dst in targets:
            matrix[pos[src]][pos[dst]] = 1
    return MarkovData(part, tuple(links), covers, A, S, tuple(tuple(r) for r in matrix), laps)


def markov_data(f: PLGraphMap, cap: int = DEFAULT_PARTITION_CAP) -> MarkovData:
    return index_sets(f, compute_markov_partition(f, cap))


def _matmul(a, b):
    cols = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in cols) for row in a)


def transition_matrix_power(data: MarkovData, n: int):
    """``M**n`` over the integers, by repeated squaring."""
    if n < 1:
        raise ValueError("power must be positive")
    base = data.matrix
    result = None
    while n:
        if n & 1:
            result = base if result is None else _matmul(result, base)
        n >>= 1
        if n:
            base = _matmul(base, base)
    return result


def partition_image_indices(f: PLGraphMap, part: MarkovPartition):
    """For each partition point ``(edge, k)``, every ``(edge', r)`` naming its image."""
    g = f.graph
    out = {}
    for e, cs in sorted(part.cuts.items()):
        for k, t in enumerate(cs):
            img = f(g.point(e, t))
            names = []
            for e2 in g.edges:
                u = g.param_on(img, e2)
                r = None if u is None else part.index_of(e2, u)
                if r is not None:
                    names.append((e2, r))
            out[(e, k)] = tuple(sorted(names))
    return out


def pattern_equivalent(f: PLGraphMap, g: PLGraphMap, cap: int = DEFAULT_PARTITION_CAP):
    """Whether partition points of ``f`` and ``g`` map index-to-index alike.

    Returns ``(verdict, witness)``; the witness lists the order-preserving
    correspondence between the two partitions, or the first disagreement.
    """
    if f.graph != g.graph:
        return False, {"reason": "maps live on different graphs"}
    pf, pg = compute_markov_partition(f, cap), compute_markov_partition(g, cap)
    sizes_f = {e: pf.size(e) for e in pf.cuts}
    sizes_g = {e: pg.size(e) for e in pg.cuts}
    if sizes_f != sizes_g:
        diff = [edge_label(e) for e in sorted(sizes_f) if sizes_f[e] != sizes_g[e]]
        return False, {"reason": f"partition sizes differ on edges {diff}"}
    imf, img = partition_image_indices(f, pf), partition_image_indices(g, pg)
    for key in sorted(imf):
        if imf[key] != img[key]:
            def names(items):
                return "{" + ", ".join(f"{edge_label(e)}#{r}" for e, r in items) + "}"

            return False, {
                "reason": f"point {edge_label(key[0])}#{key[1]} maps to {names(imf[key])} under "
                          f"{f.name} but {names(img[key])} under {g.name}",
            }
    # arcs between two points are not unique once the graph has a cycle
    df, dg = index_sets(f, pf), index_sets(g, pg)
    if df.covers != dg.covers:
        bad = next(link for link in df.links if df.covers[link] != dg.covers[link])
        return False, {"reason": f"cell {edge_label(bad[0])}#{bad[1]} is carried along different arcs"}
    table = [
        (e, k, pf.cuts[e][k], pg.cuts[e][k], imf[(e, k)])
        for e in sorted(pf.cuts) for k in range(len(pf.cuts[e]))
    ]
    return True, {"correspondence": table}
