"""Exact forward orbits: cycle detection, omega-limit sets, endpoint orbits."""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CapExceeded
from .graph import GraphPoint
from .plmap import PLGraphMap

DEFAULT_ORBIT_CAP = 100_000


@dataclass(frozen=True)
class OrbitRecord:
    """``orbit[:preperiod]`` is the transient, ``orbit[preperiod:]`` the cycle."""

    start: GraphPoint
    preperiod: int
    period: int
    orbit: tuple

    @property
    def cycle(self) -> tuple:
        return self.orbit[self.preperiod:]

    @property
    def points(self) -> frozenset:
        return frozenset(self.orbit)


def orbit_record(f: PLGraphMap, p: GraphPoint, cap: int = DEFAULT_ORBIT_CAP) -> OrbitRecord:
    seen = {}
    orbit = []
    x = p
    for n in range(cap + 1):
        if x in seen:
            first = seen[x]
            return OrbitRecord(p, first, n - first, tuple(orbit))
        seen[x] = n
        orbit.append(x)
        x = f(x)
    raise CapExceeded(cap)


@dataclass(frozen=True)
class OmegaSet:
    points: frozenset
    sources: dict = field(default_factory=dict)  # turning point -> its cycle
    undetermined: tuple = ()  # turning points whose orbit hit the cap

    @property
    def partial(self) -> bool:
        return bool(self.undetermined)

    @property
    def cardinality(self) -> int:
        return len(self.points)


def omega_of_turning_points(f: PLGraphMap, cap: int = DEFAULT_ORBIT_CAP, strict: bool = True) -> OmegaSet:
    """Union of the cycles of all turning-point orbits.

    With ``strict=False`` a capped orbit is recorded in ``undetermined``
    instead of raising, and the result is partial.
    """
    points, sources, missing = set(), {}, []
    for tp in f.turning_points:
        try:
            rec = orbit_record(f, tp.location, cap)
        except CapExceeded:
            if strict:
                raise
            missing.append(tp.location)
            continue
        sources[tp.location] = rec.cycle
        points.update(rec.cycle)
    return OmegaSet(frozenset(points), sources, tuple(missing))


def endpoint_orbit_closure(f: PLGraphMap, cap: int = DEFAULT_ORBIT_CAP) -> frozenset:
    """All forward images ``f^p(E_G)``, ``p >= 0``, of the degree-one vertices."""
    g = f.graph
    out = set()
    for v in sorted(g.endpoints):
        out.update(orbit_record(f, g.vertex_point(v), cap).orbit)
    return frozenset(out)


def turning_point_orbits(f: PLGraphMap, cap: int = DEFAULT_ORBIT_CAP):
    return [orbit_record(f, tp.location, cap) for tp in f.turning_points]
