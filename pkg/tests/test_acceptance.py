"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (visible with ``-s`` or in
``-v`` output when it fails) and asserts the same condition.
"""
import random
import time
from fractions import Fraction as F
from itertools import product

from invlim.chains import (
    fhat,
    joint_refinement_sequence,
    markov_chain,
    refine_uniform,
    validate_closed_graph_chain,
)
from invlim.classify import (
    DISTINGUISHED,
    EXCEPTIONAL,
    HOMEOMORPHIC,
    PRODUCT,
    classify_point,
    compare_spaces,
    distance,
    itinerary,
    shift,
)
from invlim.markov import compute_markov_partition, markov_data, transition_matrix_power
from invlim.orbits import omega_of_turning_points, orbit_record

from conftest import EXAMPLE_MAPS, g3, interval_graph, skew, tent, with_cuts_as_breakpoints

E = (1, 2)
GI = interval_graph()


def report(n, ok, detail, capsys):
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
    assert ok, detail


def naive_power(m, n):
    size = len(m)
    out = [[int(i == j) for j in range(size)] for i in range(size)]
    for _ in range(n):
        out = [[sum(out[i][k] * m[k][j] for k in range(size)) for j in range(size)] for i in range(size)]
    return tuple(tuple(r) for r in out)


def containing_links(arc, parent):
    return [pid for pid in parent.ids()
            if any(p.edge == arc.edge and p.a <= arc.a and arc.b <= p.b for p in parent.link(pid))]


def random_point(rng, g):
    q = rng.randint(1, 97)
    return g.point(rng.choice(g.edges), F(rng.randint(0, q), q))


def test_criterion_1_fhat_on_random_refinements(capsys):
    rng = random.Random(1)
    start = time.perf_counter()
    checked, failures = 0, []
    for name, make in sorted(EXAMPLE_MAPS.items()):
        f = make()
        data = markov_data(f)
        T = markov_chain(data, f.graph)
        for trial in range(100):
            C, h = refine_uniform(T, {lid: rng.randint(1, 5) for lid in T.ids()})
            res = fhat(f, data, C, h)
            rep = validate_closed_graph_chain(res.chain)
            homes = [containing_links(res.chain.arc(lid), T) for lid in res.chain.ids()]
            if rep.violations or any(len(hs) != 1 for hs in homes):
                failures.append((name, trial))
            checked += 1
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 60
    report(1, ok, f"{checked} refinements over {len(EXAMPLE_MAPS)} maps, "
                  f"failures {failures[:3]}, {elapsed:.1f}s", capsys)


def test_criterion_2_tent_skew_refinement(capsys):
    start = time.perf_counter()
    f, g = tent(), skew()
    rounds = joint_refinement_sequence(f, g, 3)
    elapsed = time.perf_counter() - start
    # recover h_k independently on each side: round 1 by containment in the
    # Markov chain, later rounds by where the map sends each link
    def homes(m, chain, parent, through_map):
        out = {}
        for lid in chain.ids():
            arcs = m.image_of_arcs([chain.arc(lid)]) if through_map else [chain.arc(lid)]
            found = set.intersection(*(set(containing_links(a, parent)) for a in arcs))
            out[lid] = found.pop() if len(found) == 1 else None
        return out

    prev_f, prev_g = markov_chain(markov_data(f), f.graph), markov_chain(markov_data(g), g.graph)
    same = True
    for r in rounds:
        h_f = homes(f, r.chain_f, prev_f, r.index > 1)
        h_g = homes(g, r.chain_g, prev_g, r.index > 1)
        same = same and None not in h_f.values() and h_f == h_g == dict(r.pattern.items())
        prev_f, prev_g = r.chain_f, r.chain_g
    bounds = [max(r.mesh_bounds) for r in rounds]
    ok = len(rounds) == 3 and same and all(b <= F(1, 2 ** k) for k, b in enumerate(bounds, 1)) and elapsed < 60
    report(2, ok, f"bounds {[str(b) for b in bounds]} against 1/2, 1/4, 1/8, {elapsed:.1f}s", capsys)


def test_criterion_3_distinguishing(capsys):
    start = time.perf_counter()
    sizes = (omega_of_turning_points(tent()).cardinality, omega_of_turning_points(g3()).cardinality)
    a = compare_spaces(tent(), g3()).outcome
    b = compare_spaces(tent(), skew()).outcome
    elapsed = time.perf_counter() - start
    ok = sizes == (1, 3) and a == DISTINGUISHED and b == HOMEOMORPHIC and elapsed < 5
    report(3, ok, f"omega sizes {sizes}, tent/g3 {a}, tent/skew {b}, {elapsed:.1f}s", capsys)


def test_criterion_4_classification(capsys):
    start = time.perf_counter()
    f = tent()
    zero = itinerary(f, [], [GI.point(E, F(0))])
    two_thirds = itinerary(f, [], [GI.point(E, F(2, 3))])
    c0, c1 = classify_point(f, zero), classify_point(f, two_thirds)
    ok = (c0.verdict, c0.condition_i, c0.condition_ii) == (EXCEPTIONAL, False, False)
    ok = ok and (c1.verdict, c1.condition_i, c1.condition_ii) == (PRODUCT, True, True)
    for x, c in ((zero, c0), (two_thirds, c1)):
        for _ in range(5):
            x = shift(f, x)
            ok = ok and classify_point(f, x) == c
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 5
    report(4, ok, f"const-0 {c0.verdict}, const-2/3 {c1.verdict}, stable over 5 shifts, {elapsed:.1f}s", capsys)


def test_criterion_5_preimage_oracle(capsys):
    rng = random.Random(5)
    start = time.perf_counter()
    bad, interior = [], 0
    for name, make in sorted(EXAMPLE_MAPS.items()):
        f = make()
        g = f.graph
        data = markov_data(f)
        cuts = data.partition.points(g)
        for _ in range(1000):
            q = random_point(rng, g)
            pre = f.preimages(q)
            if any(f(p) != q for p in pre):
                bad.append((name, str(q), "round trip"))
            if q in cuts:
                continue
            interior += 1
            (cell,) = data.partition.links_containing(g, q)
            j = data.position(cell)
            column = sum(row[j] for row in data.matrix)
            if len(pre) != column:
                bad.append((name, str(q), len(pre), column))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 30
    report(5, ok, f"{1000 * len(EXAMPLE_MAPS)} points, {interior} cell-interior, "
                  f"mismatches {bad[:3]}, {elapsed:.1f}s", capsys)


def test_criterion_6_markov_structure(capsys):
    start = time.perf_counter()
    problems = []
    for name, make in sorted(EXAMPLE_MAPS.items()):
        f = make()
        d = markov_data(f)
        for src, dst in product(d.links, repeat=2):
            if (src in d.inverse_index_sets[dst]) != (dst in d.index_sets[src]):
                problems.append((name, "duality", src, dst))
        if compute_markov_partition(with_cuts_as_breakpoints(f)) != d.partition:
            problems.append((name, "idempotence"))
        for n in range(1, 6):
            if transition_matrix_power(d, n) != naive_power(d.matrix, n):
                problems.append((name, "power", n))
    elapsed = time.perf_counter() - start
    ok = not problems and elapsed < 5
    report(6, ok, f"duality, idempotence, M^n for n<=5 on {len(EXAMPLE_MAPS)} maps, "
                  f"problems {problems[:3]}, {elapsed:.1f}s", capsys)


def test_criterion_7_metric(capsys):
    rng = random.Random(7)
    f = tent()
    prec = F(1, 2 ** 20)
    start = time.perf_counter()

    def random_itinerary():
        q = 2 * rng.randint(0, 30) + 1
        p = orbit_record(f, GI.point(E, F(rng.randint(0, q - 1), q))).cycle[0]
        cyc = [p]
        while (nxt := f(cyc[-1])) != p:
            cyc.append(nxt)
        x = itinerary(f, [], [p] + cyc[:0:-1])
        for _ in range(rng.randint(0, 3)):
            x = shift(f, x)
        return x

    zero = itinerary(f, [], [GI.point(E, F(0))])
    self_ok = 0 in distance(f, zero, zero, prec)
    d = distance(f, zero, itinerary(f, [], [GI.point(E, F(2, 3))]), prec)
    exact_ok = d.lo == d.hi == F(2, 3)
    violations = 0
    for _ in range(100):
        x, y, z = random_itinerary(), random_itinerary(), random_itinerary()
        xz, xy, yz = distance(f, x, z, prec), distance(f, x, y, prec), distance(f, y, z, prec)
        if not (xz.width <= prec and xz.lo <= xy.hi + yz.hi):
            violations += 1
    elapsed = time.perf_counter() - start
    ok = self_ok and exact_ok and violations == 0 and elapsed < 30
    report(7, ok, f"d(x,x) contains 0: {self_ok}, d(0,2/3) = {d}, "
                  f"triangle violations {violations}/100, {elapsed:.1f}s", capsys)
