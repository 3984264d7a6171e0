"""Convex QP over the probability simplex by a primal active-set method."""

from __future__ import annotations

import numpy as np


class QPError(RuntimeError):
    pass


def kkt_residual(Q, c, w) -> float:
    """Worst violation of the KKT conditions of ``min w'Qw + c'w`` on the simplex.

    With g = 2Qw + c the conditions are: g_i equal (to the budget multiplier)
    on the support, no smaller off the support, w >= 0 and sum(w) = 1.
    """
    Q = np.asarray(Q, dtype=float)
    w = np.asarray(w, dtype=float)
    g = 2.0 * Q @ w + np.asarray(c, dtype=float)
    support = w > 0
    nu = g[support].mean() if support.any() else g.min()
    parts = [abs(w.sum() - 1.0), max(0.0, -w.min())]
    if support.any():
        parts.append(np.abs(g[support] - nu).max())
    if (~support).any():
        parts.append(max(0.0, (nu - g[~support]).max()))
    return float(max(parts))


def qp_solve(Q, c=None, max_iter: int | None = None) -> np.ndarray:
    """Minimise ``w'Qw + c'w`` subject to ``sum(w) = 1, w >= 0``.

    ``Q`` must be symmetric positive definite. Each iteration solves the
    equality-constrained problem on the current free set and either steps to
    its solution, stopping at the first blocking bound, or releases the bound
    with the most negative multiplier.
    """
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    if Q.shape != (n, n) or n == 0:
        raise ValueError("Q must be a non-empty square matrix")
    c = np.zeros(n) if c is None else np.asarray(c, dtype=float).ravel()
    if max_iter is None:
        max_iter = 10 * n + 100
    H = Q + Q.T  # gradient of w'Qw is (Q + Q')w

    w = np.full(n, 1.0 / n)
    free = np.ones(n, dtype=bool)
    scale = max(1.0, float(np.abs(H).max()), float(np.abs(c).max()))
    tol = 1e-13 * scale
    for _ in range(max_iter):
        idx = np.flatnonzero(free)
        k = len(idx)
        K = np.zeros((k + 1, k + 1))
        K[:k, :k] = H[np.ix_(idx, idx)]
        K[:k, k] = -1.0
        K[k, :k] = 1.0
        rhs = np.concatenate([-c[idx], [1.0]])
        try:
            sol = np.linalg.solve(K, rhs)
        except np.linalg.LinAlgError as exc:
            raise QPError(f"singular KKT system: {exc}") from exc
        target, nu = sol[:k], sol[k]
        step = target - w[idx]

        alpha, blocking = 1.0, None
        for pos in np.flatnonzero(step < 0):
            ratio = -w[idx[pos]] / step[pos]
            if ratio < alpha:
                alpha, blocking = ratio, idx[pos]
        w[idx] += alpha * step
        if blocking is not None:
            w[blocking] = 0.0
            free[blocking] = False
            continue

        g = H @ w + c
        bound = np.flatnonzero(~free)
        if bound.size == 0:
            break
        multipliers = g[bound] - nu
        worst = int(np.argmin(multipliers))
        if multipliers[worst] >= -tol:
            break
        free[bound[worst]] = True
    else:
        raise QPError(
            f"active-set iteration budget {max_iter} exceeded; "
            f"best KKT residual {kkt_residual(Q, c, np.clip(w, 0, None)):.3e}"
        )
    w = np.clip(w, 0.0, None)
    return w / w.sum()
