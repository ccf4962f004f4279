from collections import Counter
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from invlim.errors import CapExceeded
from invlim.orbits import endpoint_orbit_closure, omega_of_turning_points, orbit_record, turning_point_orbits
from invlim.plmap import identity_map

from conftest import EXAMPLE_MAPS, g3, interval_graph, interval_map, tent, triod_fold, triod_graph

E = (1, 2)
GI = interval_graph()


def P(t):
    return GI.point(E, F(t))


def iterate(f, p, n):
    out = [p]
    for _ in range(n):
        out.append(f(out[-1]))
    return out


class TestOrbitRecord:
    def test_examples(self):
        rec = orbit_record(tent(), P("1/2"))
        assert (rec.preperiod, rec.period) == (2, 1)
        assert rec.orbit == (P("1/2"), P(1), P(0))
        rec = orbit_record(g3(), P("2/5"))
        assert (rec.preperiod, rec.period) == (0, 3)
        assert rec.orbit == (P("2/5"), P(1), P(0))
        rec = orbit_record(tent(), P(0))
        assert (rec.preperiod, rec.period) == (0, 1)

    def test_cap(self):
        f = interval_map("irr", ["0", "1/3", "1"], ["0", "1", "1/7"])
        with pytest.raises(CapExceeded):
            orbit_record(f, P("1/7"), cap=100)

    @settings(max_examples=150, deadline=None)
    @given(st.integers(min_value=1, max_value=200), st.integers(min_value=0, max_value=200))
    def test_minimal_and_periodic(self, q, n):
        # integer slopes keep denominators bounded, so every rational orbit repeats
        f = tent()
        p = P(F(n % (q + 1), q))
        rec = orbit_record(f, p)
        pts = iterate(f, p, rec.preperiod + rec.period)
        assert pts[rec.preperiod] == pts[rec.preperiod + rec.period]
        assert len(set(pts[:-1])) == rec.preperiod + rec.period
        assert list(rec.orbit) == pts[:-1]

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=1, max_value=60), st.integers(min_value=0, max_value=60))
    def test_cycle_is_what_recurs(self, q, n):
        # brute-force oracle: points seen more than once in a long run
        f = interval_map("zigzag", ["0", "1/3", "2/3", "1"], ["0", "1", "0", "1"])
        p = P(F(n % (q + 1), q))
        rec = orbit_record(f, p)
        run = iterate(f, p, 3 * (rec.preperiod + rec.period) + 3)
        counts = Counter(run)
        assert {x for x, c in counts.items() if c > 1} == set(rec.cycle)


class TestOmega:
    def test_examples(self):
        om = omega_of_turning_points(tent())
        assert om.points == {P(0)} and om.cardinality == 1
        om = omega_of_turning_points(g3())
        assert om.points == {P(0), P("2/5"), P(1)} and om.cardinality == 3
        om = omega_of_turning_points(identity_map(GI))
        assert om.points == frozenset() and om.cardinality == 0

    @pytest.mark.parametrize("make", list(EXAMPLE_MAPS.values()) + [triod_fold])
    def test_forward_invariant(self, make):
        f = make()
        om = omega_of_turning_points(f)
        assert {f(p) for p in om.points} <= om.points

    def test_partial_when_capped(self):
        f = interval_map("irr", ["0", "1/3", "1"], ["0", "1", "1/7"])
        with pytest.raises(CapExceeded):
            omega_of_turning_points(f, cap=100)
        om = omega_of_turning_points(f, cap=100, strict=False)
        assert om.partial and om.undetermined == (P("1/3"),)

    def test_sources(self):
        om = omega_of_turning_points(g3())
        assert om.sources == {P("2/5"): (P("2/5"), P(1), P(0))}


class TestEndpointOrbits:
    def test_examples(self):
        assert endpoint_orbit_closure(tent()) == {P(0), P(1)}
        assert endpoint_orbit_closure(g3()) == {P(0), P("2/5"), P(1)}
        tri = triod_graph()
        leaves = {tri.vertex_point(v) for v in (1, 2, 3)}
        assert endpoint_orbit_closure(identity_map(tri)) == leaves

    @pytest.mark.parametrize("make", list(EXAMPLE_MAPS.values()) + [triod_fold])
    def test_forward_invariant_and_contains_endpoints(self, make):
        f = make()
        g = f.graph
        ends = endpoint_orbit_closure(f)
        assert {g.vertex_point(v) for v in g.endpoints} <= ends
        assert {f(p) for p in ends} <= ends

    def test_turning_point_orbit_table(self):
        recs = turning_point_orbits(triod_fold())
        assert [r.start for r in recs] == [tp.location for tp in triod_fold().turning_points]
