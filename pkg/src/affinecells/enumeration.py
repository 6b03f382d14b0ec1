"""Region enumeration: BFS over arrangement cells, layer by layer.

The outer loop walks a queue of (depth, region) pairs starting from the
calibration polytope.  For each parent region it compiles the next
activation layer's hyperplanes at the parent representative, keeps the
ones that actually cross the parent (two support LPs each), and runs a
breadth-first search over the cells of that arrangement inside the
parent: starting from the cell containing the representative, each kept
hyperplane is flipped one at a time and the flipped sidedness vector is
accepted as a neighbor iff its polytope has Chebyshev radius above the
full-dimension threshold.  Accepted cells become child regions one
activation layer deeper, carrying the extended sign key; neurons whose
hyperplane misses the parent contribute their fixed sign bit without a
constraint.

Coincident hyperplanes (neurons with proportional effective rows) are
merged into one geometric hyperplane before the BFS; their sign bits are
recovered from the stored orientations.  Flipping such a group as a unit
is what keeps the facet-crossing argument valid when rows are tied.
"""

from __future__ import annotations

import time
import zlib
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import lp
from .geometry import (
    EmptyRegionError,
    Halfspace,
    HPolytope,
    Hyperplane,
    Tolerances,
    bounding_box,
    chebyshev_center,
    remove_redundant,
    support_range,
)
from .lp import LPNumericalError
from .network import Network, layer_hyperplanes

__all__ = [
    "Region",
    "ParentRecord",
    "EnumerationStats",
    "EnumerationResult",
    "filter_active_hyperplanes",
    "search_sub_regions",
    "find_cpas",
    "result_to_json",
]

# Matching normals/offsets closer than this are one geometric hyperplane.
_GROUP_ATOL = 1e-9


@dataclass(frozen=True)
class Region:
    """A layer-`depth` affine region: parent constraints plus sidedness
    rows, a strictly interior Chebyshev representative, and the sign key
    over all activation neurons up to `depth` (layer-major, +1/-1).

    `bbox`, when set, is the region's axis-aligned bounding box (lo, hi);
    it lets the next layer's hyperplane filter and redundancy removal
    discard far-away rows without an LP."""

    depth: int
    polytope: HPolytope
    representative: np.ndarray
    radius: float
    sign_key: tuple[int, ...]
    bbox: tuple[np.ndarray, np.ndarray] | None = None


@dataclass(frozen=True)
class ParentRecord:
    """Bookkeeping per expanded parent: arrangement size and child count
    (the cell-count bound is checked against these in the test suite)."""

    depth: int
    n_active: int
    n_children: int


@dataclass
class EnumerationStats:
    lp_calls: int = 0
    skipped_candidates: int = 0
    wall_ms: int = 0


@dataclass(frozen=True)
class EnumerationResult:
    regions: tuple[Region, ...]
    per_layer_counts: tuple[int, ...]
    parent_records: tuple[ParentRecord, ...]
    stats: EnumerationStats = field(default_factory=EnumerationStats)


# -- hyperplane filtering ------------------------------------------------------


def filter_active_hyperplanes(
    polytope: HPolytope,
    planes: list[tuple[int, Hyperplane]],
    eps_cross: float,
    bbox: tuple[np.ndarray, np.ndarray] | None = None,
) -> tuple[list[tuple[int, Hyperplane]], list[tuple[int, int]]]:
    """Split neuron hyperplanes into region-crossing and fixed-sign sets.

    A hyperplane is active iff its signed value straddles zero over the
    polytope with margin eps_cross on both sides; otherwise the neuron
    keeps one sign over the whole region and only contributes that bit.
    When the region's bounding box is supplied, hyperplanes whose value
    holds one strict sign over the whole box are classified as fixed
    without spending the two support LPs.
    """
    active: list[tuple[int, Hyperplane]] = []
    fixed: list[tuple[int, int]] = []
    for idx, h in planes:
        if bbox is not None:
            blo, bhi = bbox
            box_min = h.offset + float(np.minimum(h.normal * blo, h.normal * bhi).sum())
            box_max = h.offset + float(np.maximum(h.normal * blo, h.normal * bhi).sum())
            if box_min > eps_cross:
                fixed.append((idx, 1))
                continue
            if box_max < -eps_cross:
                fixed.append((idx, -1))
                continue
        lo, hi = support_range(polytope, h.normal, h.offset)
        if lo < -eps_cross and hi > eps_cross:
            active.append((idx, h))
        elif hi <= eps_cross:
            fixed.append((idx, -1))
        else:
            fixed.append((idx, 1))
    return active, fixed


@dataclass
class _Group:
    """One geometric hyperplane with the neurons riding on it."""

    normal: np.ndarray
    offset: float
    members: list[tuple[int, int]]  # (neuron index, orientation vs canonical)

    def value(self, x: np.ndarray) -> float:
        return float(self.normal @ x + self.offset)


def _group_hyperplanes(active: list[tuple[int, Hyperplane]]) -> list[_Group]:
    groups: list[_Group] = []
    for idx, h in active:
        j = int(np.argmax(np.abs(h.normal)))
        orient = 1 if h.normal[j] > 0 else -1
        n, o = orient * h.normal, orient * h.offset
        for g in groups:
            if abs(g.offset - o) <= _GROUP_ATOL and np.max(np.abs(g.normal - n)) <= _GROUP_ATOL:
                g.members.append((idx, orient))
                break
        else:
            groups.append(_Group(n, o, [(idx, orient)]))
    return groups


# -- BFS over arrangement cells --------------------------------------------------


def _cell_polytope(parent_poly: HPolytope, groups: list[_Group], vec: tuple[int, ...]) -> HPolytope:
    rows = [Halfspace(s * g.normal, s * g.offset) for g, s in zip(groups, vec)]
    return HPolytope(parent_poly.halfspaces + tuple(rows), parent_poly.dim)


def _layer_bits(
    width: int, groups: list[_Group], vec: tuple[int, ...], fixed: list[tuple[int, int]]
) -> tuple[int, ...]:
    bits = np.zeros(width, dtype=int)
    for idx, sign in fixed:
        bits[idx] = sign
    for g, s in zip(groups, vec):
        for idx, orient in g.members:
            bits[idx] = orient * s
    return tuple(int(v) for v in bits)


def search_sub_regions(
    parent: Region,
    active: list[tuple[int, Hyperplane]],
    net: Network,
    next_layer: int,
    fixed: list[tuple[int, int]] = (),
    tol: Tolerances = Tolerances(),
    bbox: tuple[np.ndarray, np.ndarray] | None = None,
) -> tuple[list[Region], int]:
    """All full-dimensional cells of the active arrangement inside the
    parent, as depth-`next_layer` regions.  Returns (children, skipped)
    where skipped counts candidates abandoned after a numerical retry.
    """
    width = net.activation_widths[next_layer - 1]
    if not active:
        bits = _layer_bits(width, [], (), fixed)
        child = Region(
            next_layer,
            parent.polytope,
            parent.representative,
            parent.radius,
            parent.sign_key + bits,
            bbox=parent.bbox,
        )
        return [child], 0

    groups = _group_hyperplanes(active)
    m = len(groups)
    skipped = 0
    G = np.array([g.normal for g in groups])
    Goff = np.array([g.offset for g in groups])

    def build(vec: tuple[int, ...]) -> tuple[Region, np.ndarray, np.ndarray] | None:
        nonlocal skipped
        poly = _cell_polytope(parent.polytope, groups, vec)
        # one retry on a canonicalized (redundancy-reduced) constraint set,
        # then the candidate is reported as skipped: soundness over
        # completeness under numerical failure
        for attempt in (0, 1):
            try:
                center, radius = chebyshev_center(poly)
                if radius <= tol.eps_dim:
                    return None
                # the cell's own bounding box sharpens the redundancy
                # prefilter and prunes flip candidates below
                cell_lo, cell_hi = bounding_box(poly)
                reduced = remove_redundant(poly, bbox=(cell_lo, cell_hi), eps_feas=tol.eps_feas)
                bits = _layer_bits(width, groups, vec, fixed)
                region = Region(
                    next_layer,
                    reduced,
                    center,
                    radius,
                    parent.sign_key + bits,
                    bbox=(cell_lo, cell_hi),
                )
                return region, cell_lo, cell_hi
            except EmptyRegionError:
                return None
            except LPNumericalError:
                if attempt == 1:
                    break
                try:
                    poly = remove_redundant(poly, bbox=bbox, eps_feas=tol.eps_feas)
                except EmptyRegionError:
                    return None
                except LPNumericalError:
                    break
        skipped += 1
        return None

    # Seat the BFS in the cell containing the representative; if the
    # representative sits on (or numerically too close to) one of the
    # hyperplanes, probe deterministic points inside the parent's
    # inscribed ball until the signs are clean and the cell is fat.
    tried: set[tuple[int, ...]] = set()
    rng = np.random.default_rng(zlib.crc32(repr((parent.sign_key, next_layer)).encode()))
    seed_built = None
    for attempt in range(64):
        if attempt == 0:
            x = parent.representative
        else:
            u = rng.normal(size=parent.polytope.dim)
            u /= np.linalg.norm(u)
            x = parent.representative + 0.9 * parent.radius * rng.uniform(0.1, 1.0) * u
        vals = np.array([g.value(x) for g in groups])
        if attempt > 0 and np.min(np.abs(vals)) <= 1e-12:
            continue
        vec = tuple(1 if v > 0 else -1 for v in vals)
        if vec in tried:
            continue
        tried.add(vec)
        seed_built = build(vec)
        if seed_built is not None:
            seed_vec = vec
            break
    if seed_built is None:
        raise LPNumericalError("could not seat a full-dimensional seed cell")

    accepted = [seed_built[0]]
    queue: deque[tuple[tuple[int, ...], np.ndarray, np.ndarray]] = deque(
        [(seed_vec, seed_built[1], seed_built[2])]
    )
    while queue:
        vec, cell_lo, cell_hi = queue.popleft()
        # A facet neighbor exists across hyperplane j only if g_j vanishes
        # somewhere on the cell; flips whose value keeps one strict sign
        # over the cell's bounding box cannot border it (BFS completeness
        # only needs facet neighbors, so skipping them is sound).  The
        # margin stays well above the support-LP accuracy.
        g_min = Goff + np.minimum(G * cell_lo, G * cell_hi).sum(axis=1)
        g_max = Goff + np.maximum(G * cell_lo, G * cell_hi).sum(axis=1)
        for j in range(m):
            if g_min[j] > 1e-9 or g_max[j] < -1e-9:
                continue
            flipped = vec[:j] + (-vec[j],) + vec[j + 1 :]
            if flipped in tried:
                continue
            tried.add(flipped)
            built = build(flipped)
            if built is not None:
                accepted.append(built[0])
                queue.append((flipped, built[1], built[2]))
    return accepted, skipped


# -- outer layer-by-layer loop -----------------------------------------------------


def _expand_parent(
    net: Network,
    parent: Region,
    tol: Tolerances,
    bbox: tuple[np.ndarray, np.ndarray],
) -> tuple[list[Region], ParentRecord, int, int]:
    """Expand one region by the next activation layer.

    Returns (children, record, lp_calls_used, skipped_candidates).
    """
    calls_before = lp.lp_call_count()
    next_layer = parent.depth + 1
    planes, fixed_zero = layer_hyperplanes(net, parent.representative, next_layer)
    active, fixed_lp = filter_active_hyperplanes(
        parent.polytope, planes, tol.eps_cross, bbox=parent.bbox
    )
    children, skipped = search_sub_regions(
        parent, active, net, next_layer, fixed=fixed_zero + fixed_lp, tol=tol, bbox=bbox
    )
    record = ParentRecord(parent.depth, len(active), len(children))
    return children, record, lp.lp_call_count() - calls_before, skipped


def _expand_task(args):
    return _expand_parent(*args)


def find_cpas(
    net: Network,
    a0: HPolytope,
    seed: np.ndarray | None = None,
    workers: int = 1,
    tol: Tolerances = Tolerances(),
) -> EnumerationResult:
    """Enumerate all maximal full-dimensional affine regions of `net` on
    the bounded polytope `a0`.

    Runs the layer-by-layer BFS from (depth 0, seed, a0); the seed
    defaults to the Chebyshev center and must be strictly interior.
    With workers > 1, parents of each depth level are expanded in a
    process pool; results are set-identical for any worker count.
    """
    t0 = time.perf_counter()
    calls_before = lp.lp_call_count()
    if a0.dim != net.input_dim:
        raise ValueError(f"domain dim {a0.dim} != network input_dim {net.input_dim}")
    try:
        bbox = bounding_box(a0)  # also proves boundedness, raises if not
    except ValueError as exc:
        raise ValueError("calibration domain must be bounded") from exc

    root_poly = remove_redundant(a0, bbox=bbox, eps_feas=tol.eps_feas)
    if seed is None:
        rep, radius = chebyshev_center(root_poly)
        if radius <= tol.eps_dim:
            raise EmptyRegionError("calibration domain is degenerate")
    else:
        rep = np.asarray(seed, dtype=float)
        margins = root_poly.margins(rep)
        radius = float(np.min(margins)) if margins.size else np.inf
        if radius <= tol.eps_dim:
            raise ValueError("seed point is not strictly interior to the domain")
    root = Region(0, root_poly, rep, radius, (), bbox=bbox)

    frontier: list[Region] = [root]
    per_layer: list[int] = []
    records: list[ParentRecord] = []
    skipped_total = 0
    worker_lp_calls = 0

    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for depth in range(1, net.n_activation_layers + 1):
            tasks = [(net, parent, tol, bbox) for parent in frontier]
            if pool is not None and len(tasks) > 1:
                chunk = max(1, len(tasks) // (4 * workers))
                outs = list(pool.map(_expand_task, tasks, chunksize=chunk))
                worker_lp_calls += sum(o[2] for o in outs)
            else:
                outs = [_expand_parent(*t) for t in tasks]
            children: list[Region] = []
            for out_children, record, _, skipped in outs:
                children.extend(out_children)
                records.append(record)
                skipped_total += skipped
            children.sort(key=lambda r: r.sign_key)
            frontier = children
            per_layer.append(len(frontier))
    finally:
        if pool is not None:
            pool.shutdown()

    if not per_layer:  # no activation layers: the domain is one region
        per_layer = [1]
        frontier = [root]

    stats = EnumerationStats(
        lp_calls=(lp.lp_call_count() - calls_before) + worker_lp_calls,
        skipped_candidates=skipped_total,
        wall_ms=int(1000 * (time.perf_counter() - t0)),
    )
    return EnumerationResult(tuple(frontier), tuple(per_layer), tuple(records), stats)


# -- report serialization -----------------------------------------------------------


def sign_key_to_string(key: tuple[int, ...]) -> str:
    return "".join("+" if b > 0 else "-" for b in key)


def sign_key_from_string(s: str) -> tuple[int, ...]:
    return tuple(1 if ch == "+" else -1 for ch in s)


def result_to_json(
    result: EnumerationResult, network_path: str = "", domain_path: str = ""
) -> dict:
    return {
        "network": network_path,
        "domain": domain_path,
        "per_layer_counts": list(result.per_layer_counts),
        "regions": [
            {
                "sign_key": sign_key_to_string(r.sign_key),
                "representative": r.representative.tolist(),
                "radius": r.radius,
                "A": [hs.normal.tolist() for hs in r.polytope.halfspaces],
                "b": [hs.offset for hs in r.polytope.halfspaces],
            }
            for r in result.regions
        ],
        "stats": {
            "lp_calls": result.stats.lp_calls,
            "skipped_candidates": result.stats.skipped_candidates,
            "wall_ms": result.stats.wall_ms,
        },
    }
