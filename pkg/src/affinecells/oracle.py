"""Brute-force ground truth for small instances.

`enumerate_patterns_bruteforce` walks activation layers depth-first: at
each layer every admissible sign assignment is tried, the slope matrix is
fixed from the candidate signs themselves (never from a reference point),
the implied sidedness constraints are appended, and the prefix survives
iff its polytope still has Chebyshev radius above the full-dimension
threshold.  Constraints only accumulate, so pruning an infeasible prefix
is exact.  The only code shared with the BFS enumerator is the LP kernel,
which is the point: this is the independent check of completeness.

`grid_sample_patterns` is the deliberately weak sampling baseline (a
lower bound on the pattern set), and `count_cells_bruteforce` counts
arrangement cells by exhausting sidedness vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .geometry import (
    EmptyRegionError,
    Halfspace,
    HPolytope,
    Hyperplane,
    Tolerances,
    bounding_box,
    chebyshev_center,
)
from .network import Network, sign_patterns

__all__ = [
    "PatternSet",
    "enumerate_patterns_bruteforce",
    "grid_sample_patterns",
    "count_cells_bruteforce",
]

_ZERO_ROW = 1e-12


@dataclass(frozen=True)
class PatternSet:
    patterns: frozenset[tuple[int, ...]]
    method: str

    def __len__(self) -> int:
        return len(self.patterns)


def _stage_map(net: Network, signs: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Pre-activation map of activation stage len(signs)+1 (or the output
    map once all stages are assigned), with slopes taken from `signs`."""
    W = np.eye(net.input_dim)
    b = np.zeros(net.input_dim)
    stack: list[tuple[np.ndarray, np.ndarray]] = []
    k = 0
    for spec in net.layers:
        if spec.kind == "residual_begin":
            stack.append((W, b))
        elif spec.kind == "residual_end":
            Ws, bs = stack.pop()
            W, b = W + Ws, b + bs
        elif spec.kind in ("dense", "flattened_conv"):
            W, b = spec.weight @ W, spec.weight @ b + spec.bias
        elif spec.kind == "batchnorm":
            W, b = spec.scale[:, None] * W, spec.scale * b + spec.shift
        else:  # activation
            if k == len(signs):
                return W, b
            gamma = np.where(signs[k] > 0, spec.slope_pos, spec.slope_neg)
            W, b = gamma[:, None] * W, gamma * b
            k += 1
    return W, b


def enumerate_patterns_bruteforce(
    net: Network,
    a0: HPolytope,
    max_neurons: int = 20,
    tol: Tolerances = Tolerances(),
) -> PatternSet:
    """Every full sign vector whose region in a0 is full-dimensional.

    Refuses networks with more than `max_neurons` activation neurons
    (worst case is one feasibility LP per vector, 2^N of them).
    """
    n = net.total_activation_neurons
    if n > max_neurons:
        raise ValueError(f"{n} activation neurons exceed the brute-force cap {max_neurons}")

    found: set[tuple[int, ...]] = set()

    def recurse(prefix: list[np.ndarray], poly: HPolytope) -> None:
        stage = len(prefix)
        if stage == net.n_activation_layers:
            found.add(tuple(int(v) for s in prefix for v in s))
            return
        W, b = _stage_map(net, prefix)
        width = W.shape[0]
        free: list[int] = []
        forced = np.zeros(width, dtype=int)
        for i in range(width):
            if np.linalg.norm(W[i]) <= _ZERO_ROW:
                forced[i] = 1 if b[i] > 0.0 else -1
            else:
                free.append(i)
        for combo in product((-1, 1), repeat=len(free)):
            s = forced.copy()
            s[free] = combo
            rows = [Halfspace(s[i] * W[i], s[i] * b[i]) for i in free]
            child = HPolytope(poly.halfspaces + tuple(rows), poly.dim)
            try:
                _, radius = chebyshev_center(child)
            except EmptyRegionError:
                continue
            if radius <= tol.eps_dim:
                continue
            recurse(prefix + [s], child)

    recurse([], a0)
    return PatternSet(frozenset(found), "exhaustive_lp")


def grid_sample_patterns(net: Network, a0: HPolytope, resolution: int) -> PatternSet:
    """Sign patterns observed on a regular grid over a0's bounding box.

    A lower bound on the true pattern set: regions thinner than the grid
    pitch are missed, which is exactly why sampling is not enumeration.
    """
    if a0.dim > 3:
        raise ValueError("full grids are limited to d0 <= 3")
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    lo, hi = bounding_box(a0)
    axes = [np.linspace(lo[j], hi[j], resolution) for j in range(a0.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    inside = np.all(a0.A @ pts.T + a0.b[:, None] >= 0.0, axis=0)
    pts = pts[inside]
    if pts.shape[0] == 0:
        return PatternSet(frozenset(), "grid")
    mat = sign_patterns(net, pts)
    return PatternSet(frozenset(tuple(int(v) for v in row) for row in mat), "grid")


def count_cells_bruteforce(
    hyperplanes: list[Hyperplane],
    box: HPolytope,
    max_hyperplanes: int = 20,
    tol: Tolerances = Tolerances(),
) -> int:
    """Number of full-dimensional arrangement cells inside the box,
    counted by exhausting all sidedness vectors."""
    m = len(hyperplanes)
    if m > max_hyperplanes:
        raise ValueError(f"{m} hyperplanes exceed the brute-force cap {max_hyperplanes}")
    count = 0
    for combo in product((-1, 1), repeat=m):
        rows = [h.side(s) for h, s in zip(hyperplanes, combo)]
        poly = HPolytope(box.halfspaces + tuple(rows), box.dim)
        try:
            _, radius = chebyshev_center(poly)
        except EmptyRegionError:
            continue
        if radius > tol.eps_dim:
            count += 1
    return count
