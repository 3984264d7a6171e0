"""Dense two-phase simplex for small and medium LPs.

Standard form is ``min c'x  s.t.  A x = b, x >= 0``. Pivoting uses Dantzig's
most-negative reduced cost and falls back to Bland's rule when degenerate
pivots stall the objective, which rules out cycling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class LPError(RuntimeError):
    pass


@dataclass
class LPResult:
    status: str
    x: np.ndarray | None = None
    objective: float | None = None
    iterations: int = 0


class _Tableau:
    def __init__(self, T: np.ndarray, basis: list[int], tol: float):
        self.T = T
        self.basis = basis
        self.tol = tol
        self.iterations = 0

    def pivot(self, row: int, col: int) -> None:
        T = self.T
        T[row] /= T[row, col]
        factors = T[:, col].copy()
        factors[row] = 0.0
        T -= np.outer(factors, T[row])
        T[:, col] = 0.0
        T[row, col] = 1.0
        self.basis[row] = col

    def run(self, n_cols: int, max_iter: int, stall: int | None = None) -> str:
        """Iterate to optimality over the first ``n_cols`` columns.

        After ``stall`` consecutive degenerate pivots the entering rule
        switches to Bland's until the objective moves again.
        """
        T, tol = self.T, self.tol
        if stall is None:
            stall = max(100, 2 * (T.shape[0] - 1))
        degenerate = 0
        while True:
            if self.iterations >= max_iter:
                raise LPError(f"simplex iteration limit {max_iter} reached (possible cycling)")
            costs = T[-1, :n_cols]
            candidates = np.flatnonzero(costs < -tol)
            if candidates.size == 0:
                return OPTIMAL
            if degenerate >= stall:
                col = int(candidates[0])
            else:
                col = int(candidates[np.argmin(costs[candidates])])
            column = T[:-1, col]
            rows = np.flatnonzero(column > tol)
            if rows.size == 0:
                return UNBOUNDED
            ratios = np.maximum(T[rows, -1], 0.0) / column[rows]
            best = ratios.min()
            tied = rows[ratios <= best + tol * max(1.0, abs(best))]
            row = int(min(tied, key=lambda r: self.basis[r]))
            self.pivot(row, col)
            self.iterations += 1
            degenerate = degenerate + 1 if best <= tol else 0


def simplex(c, A_eq, b_eq, tol: float = 1e-10, max_iter: int | None = None) -> LPResult:
    """Solve ``min c'x s.t. A_eq x = b_eq, x >= 0`` by the two-phase method."""
    c = np.asarray(c, dtype=float).ravel()
    A = np.array(A_eq, dtype=float, ndmin=2)
    b = np.asarray(b_eq, dtype=float).ravel()
    m, n = A.shape
    if c.shape != (n,) or b.shape != (m,):
        raise ValueError("inconsistent LP dimensions")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
        raise ValueError("LP coefficients must be finite")
    if max_iter is None:
        max_iter = 50 * (m + n) + 1000

    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1

    # phase 1: start from unit columns where the matrix already has them
    # (slacks), artificials for the remaining rows
    basis = [-1] * m
    for j in range(n):
        col = A[:, j]
        nz = np.flatnonzero(col)
        if nz.size == 1 and col[nz[0]] == 1.0 and basis[nz[0]] < 0:
            basis[nz[0]] = j
    art_rows = [i for i in range(m) if basis[i] < 0]
    n_art = len(art_rows)
    T = np.zeros((m + 1, n + n_art + 1))
    T[:m, :n] = A
    T[:m, -1] = b
    for a, i in enumerate(art_rows):
        T[i, n + a] = 1.0
        basis[i] = n + a
    if n_art:
        T[-1, :n] = -A[art_rows].sum(axis=0)
        T[-1, -1] = -b[art_rows].sum()
    tab = _Tableau(T, basis, tol)
    tab.run(n + n_art, max_iter)
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    if -tab.T[-1, -1] > 1e-8 * scale:
        return LPResult(INFEASIBLE, iterations=tab.iterations)

    # drive remaining artificials out of the basis; drop redundant rows
    keep = []
    for row in range(m):
        if tab.basis[row] >= n:
            entries = np.flatnonzero(np.abs(tab.T[row, :n]) > tol)
            if entries.size == 0:
                continue
            tab.pivot(row, int(entries[0]))
        keep.append(row)

    T2 = np.zeros((len(keep) + 1, n + 1))
    T2[:-1, :n] = tab.T[keep, :n]
    T2[:-1, -1] = tab.T[keep, -1]
    basis = [tab.basis[r] for r in keep]
    cb = c[basis]
    T2[-1, :n] = c - cb @ T2[:-1, :n]
    T2[-1, -1] = -cb @ T2[:-1, -1]
    phase2 = _Tableau(T2, basis, tol)
    phase2.iterations = tab.iterations
    status = phase2.run(n, max_iter)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, iterations=phase2.iterations)
    x = np.zeros(n)
    x[basis] = T2[:-1, -1]
    x[x < 0] = 0.0
    return LPResult(OPTIMAL, x, float(c @ x), phase2.iterations)


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, free=(), maximize=False,
            tol: float = 1e-10) -> LPResult:
    """General-form front end: ``A_ub x <= b_ub``, ``A_eq x = b_eq``.

    Variables are non-negative except the indices in ``free``, which are
    split into positive and negative parts internally.
    """
    c = np.asarray(c, dtype=float).ravel()
    n = len(c)
    A_ub = np.zeros((0, n)) if A_ub is None else np.array(A_ub, dtype=float, ndmin=2)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    A_eq = np.zeros((0, n)) if A_eq is None else np.array(A_eq, dtype=float, ndmin=2)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    free = sorted(set(free))

    # columns: x (n) | negative parts of free vars | slacks
    n_free, n_ub = len(free), len(b_ub)
    width = n + n_free + n_ub
    A = np.zeros((n_ub + len(b_eq), width))
    A[:n_ub, :n] = A_ub
    A[n_ub:, :n] = A_eq
    if n_free:
        A[:, n : n + n_free] = -A[:, free]
    A[:n_ub, n + n_free :] = np.eye(n_ub)
    b = np.concatenate([b_ub, b_eq])
    cost = np.zeros(width)
    cost[:n] = -c if maximize else c
    if n_free:
        cost[n : n + n_free] = -cost[free]

    res = simplex(cost, A, b, tol=tol)
    if res.status != OPTIMAL:
        return res
    x = res.x[:n].copy()
    if n_free:
        x[free] -= res.x[n : n + n_free]
    objective = float(c @ x)
    return LPResult(OPTIMAL, x, objective, res.iterations)
