from fractions import Fraction as F
from pathlib import Path

import pytest
from hypothesis import strategies as st

from invlim.graph import build_graph
from invlim.markov import markov_data
from invlim.plmap import build_map, identity_map

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def interval_graph():
    return build_graph({"vertices": [1, 2], "edges": [[1, 2]]})


def triod_graph():
    return build_graph({"vertices": [1, 2, 3, 4], "edges": [[1, 4], [2, 4], [3, 4]]})


def triangle_graph():
    return build_graph({"vertices": [1, 2, 3], "edges": [[1, 2], [2, 3], [1, 3]]})


def interval_map(name, breaks, values):
    g = interval_graph()
    return build_map(g, {"1-2": {"breakpoints": breaks, "values": values}}, name)


def tent():
    return interval_map("tent", ["0", "1/2", "1"], ["0", "1", "0"])


def skew():
    return interval_map("skew", ["0", "1/3", "1"], ["0", "1", "0"])


def g3():
    return interval_map("g3", ["0", "2/5", "1"], ["2/5", "1", "0"])


def half_fold():
    return interval_map("half", ["0", "1/2", "1"], ["0", "1/2", "0"])


def triod_identity():
    return identity_map(triod_graph(), "id")


EXAMPLE_MAPS = {"tent": tent, "skew": skew, "g3": g3, "triod_identity": triod_identity}


@pytest.fixture(params=sorted(EXAMPLE_MAPS))
def example_map(request):
    return EXAMPLE_MAPS[request.param]()


def pt(g, edge, t):
    return g.point(edge, F(t))


# rationals in [0, 1] with small denominators, endpoints included
unit_rationals = st.builds(
    lambda d, n: F(n % (d + 1), d),
    st.integers(min_value=1, max_value=60),
    st.integers(min_value=0, max_value=10_000),
)


def points_on(g):
    return st.builds(lambda e, t: g.point(e, t), st.sampled_from(g.edges), unit_rationals)


def triod_fold():
    """Folds leg 1 and leg 2; one lap of leg 2 runs across the branch vertex."""
    g = triod_graph()
    spec = {
        "1-4": {"breakpoints": ["0", "1/2", "1"], "images": [["v4", "v1"], ["v1", "v4"]]},
        "2-4": {"breakpoints": ["0", "1/2", "1"], "images": [["v1", "v4", "v3"], ["v3", "v4"]]},
        "3-4": {"breakpoints": ["0", "1"], "images": [["v2", "v4"]]},
    }
    return build_map(g, spec, "triod_fold")


def with_cuts_as_breakpoints(f):
    """The same map rewritten with every Markov cut as a breakpoint."""
    g = f.graph
    data = markov_data(f)
    spec = {}
    for e, cuts in data.partition.cuts.items():
        images = []
        for k in range(1, len(cuts)):
            edge, lap_index = data.laps[(e, k)]
            segs = f.laps[edge][lap_index].sub_segments(cuts[k - 1], cuts[k])
            ends = [g.point(s.edge, s.start) for s in segs] + [g.point(segs[-1].edge, segs[-1].end)]
            images.append([str(p) for p in ends])
        spec[f"{e[0]}-{e[1]}"] = {"breakpoints": [str(c) for c in cuts], "images": images}
    return build_map(g, spec, f.name)
