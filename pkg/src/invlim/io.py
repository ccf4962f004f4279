"""Reading input documents and writing versioned JSON.

Input is TOML::

    format = 1
    [graph]
    vertices = [1, 2]
    edges = [[1, 2]]            # or [1, 2, "3/2"] for a length

    [maps.tent."1-2"]
    breakpoints = ["0", "1/2", "1"]
    values = ["0", "1", "0"]     # or images = [[waypoints], ...] per lap

Every JSON document carries ``"format": 1``; fractions are written as
reduced strings and keys are sorted, so identical inputs give identical bytes.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .chains import GraphChain, Pattern
from .errors import InputError, InvalidItinerary
from .graph import Arc, FiniteGraph, build_graph, edge_label, format_point, parse_edge, parse_point
from .plmap import AssumptionReport, PLGraphMap, build_map

FORMAT = 1


@dataclass(frozen=True)
class Document:
    graph: FiniteGraph
    maps: dict  # name -> PLGraphMap, in file order

    def map(self, name: str) -> PLGraphMap:
        try:
            return self.maps[name]
        except KeyError:
            known = ", ".join(self.maps) or "none"
            raise InputError(f"no map named {name!r} (known: {known})") from None


def parse_document(text: str) -> Document:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise InputError(f"not valid TOML: {exc}") from None
    fmt = raw.get("format", FORMAT)
    if fmt != FORMAT:
        raise InputError(f"unsupported format {fmt!r}; expected {FORMAT}")
    if "graph" not in raw:
        raise InputError("missing [graph] section")
    graph = build_graph(raw["graph"])
    maps_raw = raw.get("maps", {})
    if not isinstance(maps_raw, dict):
        raise InputError("[maps] must be a table of named maps")
    if not maps_raw:
        raise InputError("document defines no maps")
    maps = {name: build_map(graph, table, name) for name, table in maps_raw.items()}
    return Document(graph, maps)


def load_document(path) -> Document:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return parse_document(text)


_ITINERARY = re.compile(r"^\s*(?:pre\s*=\s*\[(?P<pre>[^\]]*)\]\s*;\s*)?cycle\s*=\s*\[(?P<cycle>[^\]]*)\]\s*$")


def parse_itinerary(f: PLGraphMap, text: str):
    """``pre=[p0,p1,...];cycle=[c0,...]``; the ``pre`` part may be omitted."""
    from .classify import itinerary

    m = _ITINERARY.match(text)
    if not m:
        raise InvalidItinerary(f"bad itinerary {text!r}; expected pre=[...];cycle=[...]")

    def points(chunk):
        chunk = (chunk or "").strip()
        return [parse_point(f.graph, p) for p in chunk.split(",")] if chunk else []

    return itinerary(f, points(m.group("pre")), points(m.group("cycle")))


# -- JSON ---------------------------------------------------------------------


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _lid(lid):
    return [edge_label(lid[0]), lid[1]]


def _parse_lid(item):
    return parse_edge(item[0]), int(item[1])


def chain_to_json(chain: GraphChain) -> dict:
    return {
        "format": FORMAT,
        "kind": "chain",
        "links": {
            edge_label(e): [[[edge_label(a.edge), str(a.a), str(a.b)] for a in link]
                            for link in chain.edge_links(e)]
            for e in chain.graph.edges
        },
    }


def chain_from_json(g: FiniteGraph, doc: dict) -> GraphChain:
    _expect(doc, "chain")
    links = {}
    for label, items in doc["links"].items():
        links[parse_edge(label)] = [
            tuple(Arc(parse_edge(e), Fraction(a), Fraction(b)) for e, a, b in link) for link in items
        ]
    return GraphChain(g, links)


def pattern_to_json(pattern: Pattern) -> dict:
    return {
        "format": FORMAT,
        "kind": "pattern",
        "pairs": [[_lid(child), _lid(parent)] for child, parent in pattern.items()],
    }


def pattern_from_json(doc: dict) -> Pattern:
    _expect(doc, "pattern")
    return Pattern({_parse_lid(c): _parse_lid(p) for c, p in doc["pairs"]})


def _expect(doc, kind):
    if doc.get("format") != FORMAT or doc.get("kind") != kind:
        raise InputError(f"expected a format-{FORMAT} {kind} document")


def markov_to_json(data) -> dict:
    return {
        "format": FORMAT,
        "kind": "markov",
        "partition": {edge_label(e): [str(c) for c in cs] for e, cs in data.partition.cuts.items()},
        "links": [_lid(lid) for lid in data.links],
        "index_sets": [[_lid(src), [_lid(t) for t in data.index_sets[src]]] for src in data.links],
        "inverse_index_sets": [[_lid(dst), [_lid(s) for s in data.inverse_index_sets[dst]]]
                               for dst in data.links],
        "matrix": [list(row) for row in data.matrix],
    }


def report_to_json(rep: AssumptionReport) -> dict:
    mv = rep.eventually_multivalued_preimages
    return {
        "isolated_preimages": rep.isolated_preimages,
        "nonexpanding_preimages": rep.nonexpanding_preimages,
        "eventually_multivalued_preimages": {"state": mv.state, "n": mv.n, "note": mv.note},
        "min_stretch": str(rep.min_stretch),
        "all_hold": rep.all_hold,
        "notes": list(rep.notes),
    }


def orbits_to_json(f: PLGraphMap, records, omega, endpoints) -> dict:
    return {
        "format": FORMAT,
        "kind": "orbits",
        "map": f.name,
        "turning_points": [
            {
                "start": format_point(r.start),
                "preperiod": r.preperiod,
                "period": r.period,
                "orbit": [format_point(p) for p in r.orbit],
            }
            for r in records
        ],
        "omega": sorted(format_point(p) for p in omega.points),
        "omega_size": None if omega.partial else omega.cardinality,
        "endpoint_orbits": sorted(format_point(p) for p in endpoints),
    }


def rounds_to_json(rounds) -> list:
    return [
        {
            "round": r.index,
            "delta": str(r.delta),
            "links": len(r.chain_f),
            "mesh_bounds": [str(b) for b in r.mesh_bounds],
            "pattern": pattern_to_json(r.pattern),
        }
        for r in rounds
    ]


def verdict_to_json(v) -> dict:
    return {
        "format": FORMAT,
        "kind": "comparison",
        "outcome": v.outcome,
        "maps": list(v.maps),
        "witness": [pattern_to_json(p) for p in v.witness],
        "omega": dict(v.omega),
        "hypotheses": {
            "reports": {side: report_to_json(rep) for side, rep in zip("fg", v.reports)},
            "notes": list(v.notes),
        },
        "rounds": [{"round": r.index, "delta": str(r.delta), "mesh_bounds": [str(b) for b in r.mesh_bounds]}
                   for r in v.rounds],
    }
