"""Dense two-phase simplex for small linear programs over free variables.

Solves
    min/max  c . x   subject to   A x + b >= 0,   x in R^n free,

which is the only LP shape the geometry layer needs (feasibility probes,
Chebyshev centers, support values, redundancy checks).  Problem sizes are
small (n <= ~10 variables, up to a few hundred rows), so a dense tableau
with Dantzig pricing and a Bland fallback is both fast enough and fully
deterministic.  No external solver is used; when numba is importable the
tableau loop runs compiled (the pure-numpy twin stays as the fallback and
performs the identical pivot sequence).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "LPStatus",
    "LPSolution",
    "LPNumericalError",
    "solve_inequality_lp",
    "lp_call_count",
    "reset_lp_call_count",
]

# Reduced-cost / pivot tolerances.  Rows are rescaled to unit inf-norm before
# the tableau is built, so absolute tolerances are meaningful.
_TOL_COST = 1e-9
_TOL_PIVOT = 1e-9
_TOL_FEAS = 1e-9

# outcome codes shared by both backends
_OPTIMAL, _INFEASIBLE, _UNBOUNDED, _NUMFAIL = 0, 1, 2, 3


class LPNumericalError(RuntimeError):
    """Raised when the simplex exceeds its iteration cap (cycling or severe
    ill-conditioning).  Callers may re-normalize constraints and retry."""


class LPStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPSolution:
    status: LPStatus
    point: np.ndarray | None = None
    objective: float | None = None


_lp_calls = 0


def lp_call_count() -> int:
    """Number of simplex invocations in this process since the last reset."""
    return _lp_calls


def reset_lp_call_count() -> None:
    global _lp_calls
    _lp_calls = 0


def solve_inequality_lp(
    c: np.ndarray,
    A: np.ndarray,
    b: np.ndarray,
    sense: str = "min",
) -> LPSolution:
    """Optimize c.x over {x | A x + b >= 0}.

    Returns an optimal vertex solution, or INFEASIBLE / UNBOUNDED status.
    Zero rows of A are screened here: a tautology (0 >= -b_i with b_i >= 0)
    is dropped, a contradiction makes the program infeasible outright.
    """
    global _lp_calls
    _lp_calls += 1

    c = np.ascontiguousarray(c, dtype=float)
    A = np.ascontiguousarray(np.atleast_2d(np.asarray(A, dtype=float)))
    b = np.ascontiguousarray(b, dtype=float)
    n = c.shape[0]
    if A.size == 0:
        A = A.reshape(0, n)
    if A.shape[1] != n:
        raise ValueError(f"objective length {n} != constraint width {A.shape[1]}")
    if sense not in ("min", "max"):
        raise ValueError(f"sense must be 'min' or 'max', got {sense!r}")

    # Screen zero rows before scaling.
    row_inf = np.max(np.abs(A), axis=1) if A.shape[0] else np.zeros(0)
    zero_rows = row_inf <= 1e-300
    if np.any(zero_rows):
        if np.any(b[zero_rows] < -_TOL_FEAS):
            return LPSolution(LPStatus.INFEASIBLE)
        keep = ~zero_rows
        A, b, row_inf = A[keep], b[keep], row_inf[keep]

    cc = c if sense == "min" else -c
    if A.shape[0]:
        A = A / row_inf[:, None]
        b = b / row_inf

    code, x = _solve_core(cc, A, b)
    if code == _NUMFAIL:
        raise LPNumericalError("simplex exceeded its iteration cap")
    if code == _INFEASIBLE:
        return LPSolution(LPStatus.INFEASIBLE)
    if code == _UNBOUNDED:
        return LPSolution(LPStatus.UNBOUNDED)
    return LPSolution(LPStatus.OPTIMAL, point=x, objective=float(c @ x))


# -- pure-numpy backend ---------------------------------------------------------


def _solve_core_py(c: np.ndarray, A: np.ndarray, b: np.ndarray) -> tuple[int, np.ndarray]:
    """min c.x s.t. A x >= -b, x free; rows already scaled to unit inf-norm.

    Standard form with x = u - v and surplus s:  G u - G v - s = h, all
    variables >= 0.  Rows with negative RHS are negated so every RHS is
    nonnegative; on those rows the surplus column flips to +1 and seeds
    the basis without an artificial variable.
    """
    empty = np.zeros(0)
    m, n = A.shape
    h = -b

    flip = np.where(h < 0.0, -1.0, 1.0)
    G = A * flip[:, None]
    rhs = h * flip

    art_rows = np.flatnonzero(flip > 0.0)
    k = art_rows.size
    n_real = 2 * n + m
    ncols = n_real + k

    T = np.zeros((m + 1, ncols + 1))
    T[:m, :n] = G
    T[:m, n : 2 * n] = -G
    T[:m, 2 * n : 2 * n + m] = np.diag(-flip)
    for j, i in enumerate(art_rows):
        T[i, n_real + j] = 1.0
    T[:m, -1] = rhs

    basis = np.empty(m, dtype=np.int64)
    slack_rows = np.flatnonzero(flip < 0.0)
    basis[slack_rows] = 2 * n + slack_rows
    basis[art_rows] = n_real + np.arange(k)

    if k > 0:
        T[m, n_real:ncols] = 1.0
        T[m] -= T[art_rows].sum(axis=0)
        out = _iterate_py(T, basis, ncols, phase=1)
        if out < 0:
            return _NUMFAIL, empty
        if -T[m, -1] > _TOL_FEAS:
            return _INFEASIBLE, empty
        # drive basic artificials (all at ~0) onto real columns
        for i in np.flatnonzero(basis >= n_real):
            row = T[i, :n_real]
            j = int(np.argmax(np.abs(row)))
            if abs(row[j]) > _TOL_PIVOT:
                _pivot(T, i, j)
                basis[i] = j
        # rows whose artificial could not leave are redundant constraints
        stuck = basis >= n_real
        if np.any(stuck):
            T = np.delete(T, np.flatnonzero(stuck), axis=0)
            basis = basis[~stuck]

    m2 = basis.shape[0]
    T2 = np.delete(T, np.s_[n_real:ncols], axis=1)
    T2[m2, :] = 0.0
    T2[m2, :n] = c
    T2[m2, n : 2 * n] = -c
    for i in range(m2):
        cj = T2[m2, basis[i]]
        if cj != 0.0:
            T2[m2] -= cj * T2[i]
    out = _iterate_py(T2, basis, n_real, phase=2)
    if out < 0:
        return _NUMFAIL, empty
    if out == 0:
        return _UNBOUNDED, empty

    z = np.zeros(n_real)
    z[basis] = T2[:m2, -1]
    return _OPTIMAL, z[:n] - z[n : 2 * n]


def _iterate_py(T: np.ndarray, basis: np.ndarray, ncols: int, phase: int) -> int:
    """Simplex pivots in place: 1 optimal, 0 unbounded (phase 2), -1 cap hit.

    Dantzig pricing, switching to Bland's rule after a burn-in to rule out
    cycling on degenerate vertices.
    """
    m = basis.shape[0]
    bland_after = 3 * (m + ncols) + 100
    max_iter = 20 * (m + ncols) + 1000

    for it in range(max_iter + 1):
        costs = T[m, :ncols]
        if it < bland_after:
            j = int(np.argmin(costs))
            if costs[j] >= -_TOL_COST:
                return 1
        else:
            neg = np.flatnonzero(costs < -_TOL_COST)
            if neg.size == 0:
                return 1
            j = int(neg[0])

        col = T[:m, j]
        pos = col > _TOL_PIVOT
        if not np.any(pos):
            # phase-1 objective is bounded below by 0; a "descent" column
            # with no positive entry there signals numerical trouble
            return -1 if phase == 1 else 0

        ratios = np.full(m, np.inf)
        ratios[pos] = T[:m, -1][pos] / col[pos]
        rmin = ratios.min()
        ties = np.flatnonzero(ratios <= rmin + 1e-12 * (1.0 + abs(rmin)))
        if it < bland_after:
            i = int(ties[np.argmax(col[ties])])  # largest pivot for stability
        else:
            i = int(ties[np.argmin(basis[ties])])  # Bland: smallest basis index

        _pivot(T, i, j)
        basis[i] = j

    return -1


def _pivot(T: np.ndarray, i: int, j: int) -> None:
    T[i] /= T[i, j]
    col = T[:, j].copy()
    col[i] = 0.0
    T -= np.outer(col, T[i])
    T[:, j] = 0.0
    T[i, j] = 1.0


# -- compiled backend -------------------------------------------------------------


def _solve_core_jit_source(c, A, b):  # pragma: no cover - compiled
    """Loop-level twin of _solve_core_py: same pivot sequence, same floats."""
    empty = np.zeros(0)
    m, n = A.shape
    n_real = 2 * n + m

    k = 0
    for r in range(m):
        if -b[r] >= 0.0:
            k += 1
    ncols = n_real + k

    T = np.zeros((m + 1, ncols + 1))
    basis = np.empty(m, dtype=np.int64)
    ai = 0
    for r in range(m):
        h = -b[r]
        if h < 0.0:
            for q in range(n):
                T[r, q] = -A[r, q]
                T[r, n + q] = A[r, q]
            T[r, 2 * n + r] = 1.0
            T[r, ncols] = -h
            basis[r] = 2 * n + r
        else:
            for q in range(n):
                T[r, q] = A[r, q]
                T[r, n + q] = -A[r, q]
            T[r, 2 * n + r] = -1.0
            T[r, n_real + ai] = 1.0
            T[r, ncols] = h
            basis[r] = n_real + ai
            ai += 1

    if k > 0:
        for q in range(n_real, ncols):
            T[m, q] = 1.0
        for r in range(m):
            if basis[r] >= n_real:
                for q in range(ncols + 1):
                    T[m, q] -= T[r, q]
        out = _iterate_loops(T, basis, ncols, 1)
        if out < 0:
            return _NUMFAIL, empty
        if -T[m, ncols] > _TOL_FEAS:
            return _INFEASIBLE, empty
        for r in range(m):
            if basis[r] >= n_real:
                jbest = 0
                vbest = abs(T[r, 0])
                for q in range(1, n_real):
                    v = abs(T[r, q])
                    if v > vbest:
                        vbest = v
                        jbest = q
                if vbest > _TOL_PIVOT:
                    _pivot_loops(T, r, jbest)
                    basis[r] = jbest

    m2 = 0
    for r in range(m):
        if basis[r] < n_real:
            m2 += 1
    T2 = np.zeros((m2 + 1, n_real + 1))
    basis2 = np.empty(m2, dtype=np.int64)
    rr = 0
    for r in range(m):
        if basis[r] < n_real:
            for q in range(n_real):
                T2[rr, q] = T[r, q]
            T2[rr, n_real] = T[r, ncols]
            basis2[rr] = basis[r]
            rr += 1

    for q in range(n):
        T2[m2, q] = c[q]
        T2[m2, n + q] = -c[q]
    for r in range(m2):
        cj = T2[m2, basis2[r]]
        if cj != 0.0:
            for q in range(n_real + 1):
                T2[m2, q] -= cj * T2[r, q]
    out = _iterate_loops(T2, basis2, n_real, 2)
    if out < 0:
        return _NUMFAIL, empty
    if out == 0:
        return _UNBOUNDED, empty

    x = np.zeros(n)
    for r in range(m2):
        jb = basis2[r]
        if jb < n:
            x[jb] += T2[r, n_real]
        elif jb < 2 * n:
            x[jb - n] -= T2[r, n_real]
    return _OPTIMAL, x


def _iterate_loops_source(T, basis, ncols, phase):  # pragma: no cover - compiled
    m = basis.shape[0]
    last = T.shape[1] - 1
    bland_after = 3 * (m + ncols) + 100
    max_iter = 20 * (m + ncols) + 1000

    for it in range(max_iter + 1):
        if it < bland_after:
            j = 0
            cmin = T[m, 0]
            for q in range(1, ncols):
                if T[m, q] < cmin:
                    cmin = T[m, q]
                    j = q
            if cmin >= -_TOL_COST:
                return 1
        else:
            j = -1
            for q in range(ncols):
                if T[m, q] < -_TOL_COST:
                    j = q
                    break
            if j < 0:
                return 1

        rmin = np.inf
        any_pos = False
        for r in range(m):
            if T[r, j] > _TOL_PIVOT:
                any_pos = True
                ratio = T[r, last] / T[r, j]
                if ratio < rmin:
                    rmin = ratio
        if not any_pos:
            return -1 if phase == 1 else 0

        thresh = rmin + 1e-12 * (1.0 + abs(rmin))
        i = -1
        if it < bland_after:
            best = -np.inf
            for r in range(m):
                if T[r, j] > _TOL_PIVOT and T[r, last] / T[r, j] <= thresh:
                    if T[r, j] > best:
                        best = T[r, j]
                        i = r
        else:
            best_idx = 2**62  # any basis index is smaller
            for r in range(m):
                if T[r, j] > _TOL_PIVOT and T[r, last] / T[r, j] <= thresh:
                    if basis[r] < best_idx:
                        best_idx = basis[r]
                        i = r

        _pivot_loops(T, i, j)
        basis[i] = j

    return -1


def _pivot_loops_source(T, i, j):  # pragma: no cover - compiled
    nrows, ncols1 = T.shape
    piv = T[i, j]
    for q in range(ncols1):
        T[i, q] /= piv
    for r in range(nrows):
        if r != i:
            f = T[r, j]
            if f != 0.0:
                for q in range(ncols1):
                    T[r, q] -= f * T[i, q]
    for r in range(nrows):
        T[r, j] = 0.0
    T[i, j] = 1.0


try:  # compiled tableau core, ~5-10x faster at these sizes
    from numba import njit

    _pivot_loops = njit(cache=True)(_pivot_loops_source)
    _iterate_loops = njit(cache=True)(_iterate_loops_source)
    _solve_core_jit = njit(cache=True)(_solve_core_jit_source)
    _solve_core = _solve_core_jit
except ImportError:  # pragma: no cover
    _solve_core = _solve_core_py
