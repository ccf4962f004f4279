"""Exact computations on inverse limits of piecewise-linear graph maps."""

from .chains import (
    GraphChain,
    Pattern,
    fhat,
    invlim_mesh_bound,
    joint_refinement_sequence,
    markov_chain,
    refine_uniform,
    validate_closed_graph_chain,
)
from .classify import (
    BackwardItinerary,
    Classification,
    ComparisonVerdict,
    Interval,
    classify_point,
    compare_spaces,
    distance,
    exceptional_diagnosis,
    itinerary,
    project,
    shift,
)
from .errors import InvlimError
from .graph import FiniteGraph, GraphPoint, build_graph, format_point, parse_point
from .markov import (
    compute_markov_partition,
    markov_data,
    pattern_equivalent,
    transition_matrix_power,
)
from .orbits import endpoint_orbit_closure, omega_of_turning_points, orbit_record
from .plmap import PLGraphMap, build_map, check_standing_assumptions, identity_map

__version__ = "0.1.0"

__all__ = [
    "BackwardItinerary", "Classification", "ComparisonVerdict", "FiniteGraph", "GraphChain",
    "GraphPoint", "Interval", "InvlimError", "PLGraphMap", "Pattern",
    "build_graph", "build_map", "check_standing_assumptions", "classify_point", "compare_spaces",
    "compute_markov_partition", "distance", "endpoint_orbit_closure", "exceptional_diagnosis",
    "fhat", "format_point", "identity_map", "invlim_mesh_bound", "itinerary",
    "joint_refinement_sequence", "markov_chain", "markov_data", "omega_of_turning_points",
    "orbit_record", "parse_point", "pattern_equivalent", "project", "refine_uniform", "shift",
    "transition_matrix_power", "validate_closed_graph_chain",
]
