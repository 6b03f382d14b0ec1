"""Exact enumeration of the affine regions of piecewise-affine networks.

The public surface mirrors the pipeline: build or load a `Network` and a
bounded `HPolytope` domain, call `find_cpas` to enumerate the maximal
affine regions, then label, render or cross-check them.
"""

from .enumeration import (
    EnumerationResult,
    ParentRecord,
    Region,
    filter_active_hyperplanes,
    find_cpas,
    result_to_json,
    search_sub_regions,
)
from .geometry import (
    EPS_CROSS,
    EPS_DIM,
    EPS_FEAS,
    DegenerateRegionError,
    EmptyRegionError,
    Halfspace,
    HPolytope,
    Hyperplane,
    Tolerances,
    add_halfspace,
    chebyshev_center,
    enumerate_vertices_2d,
    hyperplane_intersects,
    is_feasible,
    load_polytope,
    polygon_area,
    remove_redundant,
    solve_lp,
)
from .lp import LPNumericalError, LPSolution, LPStatus
from .network import (
    EffectiveAffine,
    LayerSpec,
    Network,
    NumericOverflowError,
    StructuralError,
    effective_affine,
    effective_output,
    fold_batchnorm,
    forward,
    layer_hyperplanes,
    load_network,
    lower_conv,
    network_from_json,
    network_to_json,
    save_network,
    sign_pattern,
    sign_patterns,
    slice_network,
)
from .oracle import (
    PatternSet,
    count_cells_bruteforce,
    enumerate_patterns_bruteforce,
    grid_sample_patterns,
)
from .report import (
    LabeledRegion,
    RenderSpec,
    label_regions,
    per_layer_counts_csv,
    region_statistics,
    render_svg_2d,
)

__version__ = "0.1.0"
