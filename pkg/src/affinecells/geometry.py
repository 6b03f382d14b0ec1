"""H-representation polytopes and the LP predicates behind region search.

A polytope is stored as a list of halfspaces {x | a.x + b >= 0}; every
feasibility, intersection, representative and redundancy decision reduces
to one or two small LPs on that representation.  Constraint rows are
rescaled to unit normal on construction, which keeps the Chebyshev and
redundancy programs well scaled and makes the tolerances below meaningful.

Tolerances (absolute, on unit-normal rows):
  EPS_FEAS   constraint satisfaction for returned LP points,
  EPS_DIM    Chebyshev-radius threshold certifying full dimension,
  EPS_CROSS  sign-straddle margin for hyperplane/region intersection.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .lp import LPNumericalError, LPSolution, LPStatus, solve_inequality_lp

__all__ = [
    "EPS_FEAS",
    "EPS_DIM",
    "EPS_CROSS",
    "Tolerances",
    "Halfspace",
    "Hyperplane",
    "HPolytope",
    "EmptyRegionError",
    "DegenerateRegionError",
    "solve_lp",
    "is_feasible",
    "chebyshev_center",
    "support_range",
    "hyperplane_intersects",
    "add_halfspace",
    "remove_redundant",
    "enumerate_vertices_2d",
    "polygon_area",
    "bounding_box",
    "load_polytope",
    "polytope_from_json",
    "polytope_to_json",
]

EPS_FEAS = 1e-9
EPS_DIM = 1e-8
EPS_CROSS = 1e-8

# Norm below which a constraint normal counts as zero (degenerate row).
_ZERO_NORMAL = 1e-12


class EmptyRegionError(ValueError):
    """The polytope has no feasible point."""


class DegenerateRegionError(ValueError):
    """The polytope is nonempty but not full-dimensional."""


@dataclass(frozen=True)
class Tolerances:
    """Bundle of the three geometric tolerances, threaded through the
    enumerator so a run can override them coherently."""

    eps_feas: float = EPS_FEAS
    eps_dim: float = EPS_DIM
    eps_cross: float = EPS_CROSS


@dataclass(frozen=True)
class Halfspace:
    """Closed halfspace {x | normal . x + offset >= 0}.

    A zero normal is tolerated as a degenerate row: a tautology when
    offset >= 0, a contradiction otherwise.  Degenerate rows never enter
    the LP constraint matrix.
    """

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        normal = np.asarray(self.normal, dtype=float)
        normal.flags.writeable = False
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", float(self.offset))
        if not (np.all(np.isfinite(normal)) and np.isfinite(self.offset)):
            raise ValueError("halfspace coefficients must be finite")

    @property
    def degenerate(self) -> bool:
        return float(np.linalg.norm(self.normal)) <= _ZERO_NORMAL

    def unit(self) -> "Halfspace":
        """Copy rescaled to unit normal (identity for degenerate rows)."""
        nrm = float(np.linalg.norm(self.normal))
        if nrm <= _ZERO_NORMAL:
            return self
        return Halfspace(self.normal / nrm, self.offset / nrm)

    def flipped(self) -> "Halfspace":
        return Halfspace(-self.normal, -self.offset)


@dataclass(frozen=True)
class Hyperplane:
    """Oriented hyperplane {x | normal . x + offset = 0}, unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        normal = np.asarray(self.normal, dtype=float)
        nrm = float(np.linalg.norm(normal))
        if nrm <= _ZERO_NORMAL:
            raise ValueError("hyperplane normal must be nonzero")
        normal = normal / nrm
        normal.flags.writeable = False
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", float(self.offset) / nrm)

    def value(self, x: np.ndarray) -> float:
        return float(self.normal @ x + self.offset)

    def side(self, sign: int) -> Halfspace:
        """Halfspace of the points with sign * (normal.x + offset) >= 0."""
        if sign >= 0:
            return Halfspace(self.normal, self.offset)
        return Halfspace(-self.normal, -self.offset)


class HPolytope:
    """Intersection of finitely many closed halfspaces in R^dim.

    Immutable; `add` returns a new polytope.  Non-degenerate rows are
    stored with unit normals, in insertion order.
    """

    __slots__ = ("dim", "halfspaces", "_A", "_b", "_contradiction")

    def __init__(self, halfspaces: Iterable[Halfspace], dim: int):
        dim = int(dim)
        if dim <= 0:
            raise ValueError("dim must be positive")
        rows = []
        contradiction = False
        for hs in halfspaces:
            if hs.normal.shape != (dim,):
                raise ValueError(
                    f"halfspace normal has length {hs.normal.shape}, expected ({dim},)"
                )
            if hs.degenerate and hs.offset < 0.0:
                contradiction = True
            rows.append(hs.unit())
        self.dim = dim
        self.halfspaces: tuple[Halfspace, ...] = tuple(rows)
        self._contradiction = contradiction
        live = [hs for hs in rows if not hs.degenerate]
        A = np.array([hs.normal for hs in live], dtype=float).reshape(len(live), dim)
        b = np.array([hs.offset for hs in live], dtype=float)
        A.flags.writeable = False
        b.flags.writeable = False
        self._A = A
        self._b = b

    # -- constructors ------------------------------------------------------

    @staticmethod
    def from_arrays(A: np.ndarray, b: np.ndarray, dim: int | None = None) -> "HPolytope":
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        if dim is None:
            dim = A.shape[1]
        if A.shape[0] != b.shape[0]:
            raise ValueError("A and b row counts disagree")
        return HPolytope([Halfspace(A[i], b[i]) for i in range(A.shape[0])], dim)

    @staticmethod
    def box(dim: int, half_width: float = 1.0, center: Sequence[float] | None = None) -> "HPolytope":
        """Axis-aligned box [c - h, c + h]^dim, the usual calibration domain."""
        if half_width <= 0:
            raise ValueError("half_width must be positive")
        c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
        rows = []
        for j in range(dim):
            e = np.zeros(dim)
            e[j] = 1.0
            rows.append(Halfspace(e, half_width - c[j]))
            rows.append(Halfspace(-e, half_width + c[j]))
        return HPolytope(rows, dim)

    # -- views -------------------------------------------------------------

    @property
    def A(self) -> np.ndarray:
        """Unit-normal rows of the non-degenerate constraints."""
        return self._A

    @property
    def b(self) -> np.ndarray:
        return self._b

    @property
    def n_rows(self) -> int:
        return len(self.halfspaces)

    @property
    def has_contradiction(self) -> bool:
        """True when a degenerate row makes the polytope trivially empty."""
        return self._contradiction

    def add(self, hs: Halfspace) -> "HPolytope":
        return HPolytope(self.halfspaces + (hs,), self.dim)

    def margins(self, x: np.ndarray) -> np.ndarray:
        """Slack a.x + b of every non-degenerate row at x (rows are unit)."""
        return self._A @ np.asarray(x, dtype=float) + self._b

    def contains(self, x: np.ndarray, eps: float = EPS_FEAS) -> bool:
        if self._contradiction:
            return False
        if self._A.shape[0] == 0:
            return True
        return bool(np.min(self.margins(x)) >= -eps)

    def __repr__(self) -> str:
        return f"HPolytope(dim={self.dim}, rows={self.n_rows})"


# -- LP-backed operations ----------------------------------------------------


def solve_lp(objective: np.ndarray, polytope: HPolytope, sense: str = "min") -> LPSolution:
    """Optimize a linear objective over the polytope.

    Thin wrapper over the simplex kernel that screens contradiction rows
    and validates dimensions.
    """
    objective = np.asarray(objective, dtype=float)
    if objective.shape != (polytope.dim,):
        raise ValueError("objective length does not match polytope dimension")
    if polytope.has_contradiction:
        return LPSolution(LPStatus.INFEASIBLE)
    return solve_inequality_lp(objective, polytope.A, polytope.b, sense)


def is_feasible(polytope: HPolytope) -> bool:
    """LP phase-1 emptiness test (boundary points count as feasible)."""
    sol = solve_lp(np.zeros(polytope.dim), polytope, "min")
    return sol.status is LPStatus.OPTIMAL


def chebyshev_center(polytope: HPolytope) -> tuple[np.ndarray, float]:
    """Center and radius of a largest inscribed ball.

    One LP in dim+1 variables (x, r): maximize r subject to
    a_i . x + b_i >= r for every unit row, r >= 0.  A radius above
    EPS_DIM certifies the polytope is full-dimensional; radius ~ 0 is a
    legitimate value for measure-zero regions.

    Raises EmptyRegionError when the polytope is empty and ValueError
    when it is unbounded (the radius LP diverges).
    """
    d = polytope.dim
    if polytope.has_contradiction:
        raise EmptyRegionError("polytope contains a contradictory constraint")
    A, b = polytope.A, polytope.b
    k = A.shape[0]
    ext = np.zeros((k + 1, d + 1))
    ext[:k, :d] = A
    ext[:k, d] = -1.0
    ext[k, d] = 1.0
    off = np.concatenate([b, [0.0]])
    obj = np.zeros(d + 1)
    obj[d] = 1.0
    sol = solve_inequality_lp(obj, ext, off, "max")
    if sol.status is LPStatus.INFEASIBLE:
        raise EmptyRegionError("polytope is empty")
    if sol.status is LPStatus.UNBOUNDED:
        raise ValueError("polytope is unbounded; cannot take a Chebyshev center")
    center = sol.point[:d].copy()
    center.flags.writeable = False
    return center, float(sol.objective)


def support_range(polytope: HPolytope, normal: np.ndarray, offset: float) -> tuple[float, float]:
    """(min, max) of normal . x + offset over the polytope (two LPs)."""
    normal = np.asarray(normal, dtype=float)
    lo = solve_lp(normal, polytope, "min")
    if lo.status is LPStatus.INFEASIBLE:
        raise EmptyRegionError("polytope is empty")
    if lo.status is LPStatus.UNBOUNDED:
        raise ValueError("polytope is unbounded along the query normal")
    hi = solve_lp(normal, polytope, "max")
    if hi.status is LPStatus.UNBOUNDED:
        raise ValueError("polytope is unbounded along the query normal")
    return lo.objective + offset, hi.objective + offset


def hyperplane_intersects(
    polytope: HPolytope, h: Hyperplane, eps_cross: float = EPS_CROSS
) -> bool:
    """True iff the hyperplane separates interior points of the polytope.

    The signed value must reach beyond +/- eps_cross on both sides; a
    hyperplane touching only the boundary leaves the region on one sign
    and is reported as non-intersecting.
    """
    lo, hi = support_range(polytope, h.normal, h.offset)
    return lo < -eps_cross and hi > eps_cross


def add_halfspace(polytope: HPolytope, hs: Halfspace) -> HPolytope:
    """Polytope with the constraint appended (input unmodified)."""
    if hs.normal.shape != (polytope.dim,):
        raise ValueError("halfspace dimension mismatch")
    return polytope.add(hs)


def remove_redundant(
    polytope: HPolytope,
    bbox: tuple[np.ndarray, np.ndarray] | None = None,
    eps_feas: float = EPS_FEAS,
) -> HPolytope:
    """Drop constraints whose removal leaves the point set unchanged.

    Degenerate tautology rows are discarded outright.  When `bbox` (an
    enclosing axis box, e.g. of the calibration domain) is supplied, rows
    strictly slack over the whole box are dropped without an LP: a row
    whose slack never reaches zero on the polytope supports no facet.
    Each surviving row is tested with one LP, minimizing its slack
    subject to the other rows plus a unit relaxation of itself (which
    bounds the program); slack >= -eps_feas means redundant.
    """
    rows = [hs for hs in polytope.halfspaces if not hs.degenerate]
    if polytope.has_contradiction:
        raise EmptyRegionError("polytope contains a contradictory constraint")

    if bbox is not None:
        lo, hi = bbox
        kept = []
        for hs in rows:
            min_over_box = hs.offset + float(
                np.sum(np.minimum(hs.normal * lo, hs.normal * hi))
            )
            if min_over_box <= eps_feas:
                kept.append(hs)
        rows = kept

    keep = list(range(len(rows)))
    for i in range(len(rows)):
        if i not in keep:
            continue
        others = [rows[j] for j in keep if j != i]
        relaxed = Halfspace(rows[i].normal, rows[i].offset + 1.0)
        test = HPolytope(others + [relaxed], polytope.dim)
        sol = solve_lp(rows[i].normal, test, "min")
        if sol.status is not LPStatus.OPTIMAL:
            continue
        if sol.objective + rows[i].offset >= -eps_feas:
            keep.remove(i)
    return HPolytope([rows[i] for i in keep], polytope.dim)


def enumerate_vertices_2d(
    polytope: HPolytope, eps_dim: float = EPS_DIM, eps_feas: float = EPS_FEAS
) -> np.ndarray:
    """Vertices of a bounded full-dimensional 2D polytope, CCW order.

    Every pair of constraint lines is intersected and candidates failing
    any constraint are discarded; duplicates from near-concurrent lines
    are merged.  Raises DegenerateRegionError when the Chebyshev radius
    is at or below eps_dim.
    """
    if polytope.dim != 2:
        raise ValueError("vertex enumeration is implemented for dim=2 only")
    center, radius = chebyshev_center(polytope)
    if radius <= eps_dim:
        raise DegenerateRegionError(f"region is degenerate (radius {radius:.3e})")
    A, b = polytope.A, polytope.b
    k = A.shape[0]
    cands = []
    for i in range(k):
        for j in range(i + 1, k):
            M = np.array([A[i], A[j]])
            det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
            if abs(det) <= 1e-12:
                continue
            v = np.linalg.solve(M, -np.array([b[i], b[j]]))
            if np.min(A @ v + b) >= -max(eps_feas, 1e2 * np.finfo(float).eps / abs(det)):
                cands.append(v)
    verts: list[np.ndarray] = []
    for v in cands:
        if all(np.linalg.norm(v - w) > 1e-7 for w in verts):
            verts.append(v)
    if len(verts) < 3:
        raise DegenerateRegionError("fewer than 3 distinct vertices found")
    pts = np.array(verts)
    anchor = pts.mean(axis=0)
    order = np.argsort(np.arctan2(pts[:, 1] - anchor[1], pts[:, 0] - anchor[0]))
    return pts[order]


def polygon_area(vertices: np.ndarray) -> float:
    """Shoelace area of a simple polygon (positive for CCW order)."""
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def bounding_box(polytope: HPolytope) -> tuple[np.ndarray, np.ndarray]:
    """Tight axis-aligned bounds (lo, hi) via 2*dim support LPs.

    Raises ValueError when the polytope is unbounded in some coordinate
    and EmptyRegionError when it is empty.
    """
    lo = np.empty(polytope.dim)
    hi = np.empty(polytope.dim)
    for j in range(polytope.dim):
        e = np.zeros(polytope.dim)
        e[j] = 1.0
        a, bb = support_range(polytope, e, 0.0)
        lo[j], hi[j] = a, bb
    return lo, hi


# -- interchange format ------------------------------------------------------


def polytope_to_json(polytope: HPolytope) -> dict:
    return {
        "dim": polytope.dim,
        "A": [hs.normal.tolist() for hs in polytope.halfspaces],
        "b": [hs.offset for hs in polytope.halfspaces],
    }


def polytope_from_json(obj: dict) -> HPolytope:
    """Parse {"dim", "A", "b"} with Ax + b >= 0; rejects malformed rows."""
    try:
        dim = int(obj["dim"])
        A = obj["A"]
        b = obj["b"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"polytope document missing field: {exc}") from exc
    if len(A) != len(b):
        raise ValueError("A and b lengths disagree")
    rows = []
    for i, (row, off) in enumerate(zip(A, b)):
        if len(row) != dim:
            raise ValueError(f"row {i} has length {len(row)}, expected {dim}")
        arr = np.asarray(row, dtype=float)
        if not (np.all(np.isfinite(arr)) and np.isfinite(off)):
            raise ValueError(f"row {i} contains non-finite values")
        rows.append(Halfspace(arr, float(off)))
    return HPolytope(rows, dim)


def load_polytope(path) -> HPolytope:
    with open(path, "r", encoding="utf-8") as fh:
        return polytope_from_json(json.load(fh))


def save_polytope(polytope: HPolytope, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(polytope_to_json(polytope), fh)
