"""Portfolio models on the budget / no-short-sale simplex."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..topo_risk import RiskVector
from .lp import OPTIMAL, UNBOUNDED, linprog
from .qp import QPError, kkt_residual, qp_solve

logger = logging.getLogger(__name__)

KKT_TOL = 1e-8
RIDGE = 1e-8


class OptimizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Weights:
    assets: tuple[str, ...]
    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float).ravel()
        if len(w) != len(self.assets):
            raise ValueError("one weight per asset required")
        if abs(w.sum() - 1.0) > 1e-9 or np.any(w < 0):
            raise ValueError("weights must be non-negative and sum to one")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @classmethod
    def emit(cls, assets, w, clip_tol: float = 1e-9) -> Weights:
        """Clip solver round-off below zero and renormalise."""
        w = np.asarray(w, dtype=float).ravel()
        if np.any(w < -clip_tol):
            raise OptimizationError(f"solver returned a weight of {w.min():.3e}")
        w = np.where(w < 0, 0.0, w)
        return cls(tuple(assets), w / w.sum())

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.assets, map(float, self.w)))

    @property
    def n_nonzero(self) -> int:
        return int(np.count_nonzero(self.w))


@dataclass(frozen=True)
class MomentEstimates:
    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float).ravel()
        sigma = np.array(self.sigma, dtype=float, ndmin=2)
        if sigma.shape != (len(mu), len(mu)):
            raise ValueError("sigma must be n x n for n means")
        if np.abs(sigma - sigma.T).max(initial=0.0) > 1e-12:
            raise ValueError("sigma must be symmetric")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", (sigma + sigma.T) / 2)

    @classmethod
    def from_returns(cls, returns) -> MomentEstimates:
        """Sample mean and covariance, ridge-regularised when singular-prone."""
        R = np.asarray(returns, dtype=float)
        T, n = R.shape
        mu = R.mean(axis=0)
        sigma = np.cov(R, rowvar=False, ddof=1).reshape(n, n)
        if n >= T or not _is_well_conditioned(sigma):
            sigma = ridge(sigma)
        return cls(mu, sigma)


def _is_well_conditioned(sigma: np.ndarray, max_cond: float = 1e12) -> bool:
    eig = np.linalg.eigvalsh(sigma)
    return eig[0] > 0 and eig[-1] / eig[0] < max_cond


def ridge(sigma: np.ndarray, strength: float = RIDGE) -> np.ndarray:
    n = sigma.shape[0]
    bump = strength * np.trace(sigma) / n
    if bump <= 0:
        bump = strength
    return sigma + bump * np.eye(n)


def _positive_definite(sigma: np.ndarray) -> np.ndarray:
    try:
        np.linalg.cholesky(sigma)
        return sigma
    except np.linalg.LinAlgError:
        logger.info("covariance not positive definite; adding ridge")
        return ridge(sigma)


@dataclass(frozen=True)
class ScenarioSet:
    returns: np.ndarray  # (T scenarios, n assets), each with probability 1/T

    def __post_init__(self):
        R = np.array(self.returns, dtype=float, ndmin=2)
        if R.shape[0] < 2:
            raise ValueError("need at least 2 scenarios")
        if not np.all(np.isfinite(R)):
            raise ValueError("scenario returns must be finite")
        object.__setattr__(self, "returns", R)

    @property
    def mean(self) -> np.ndarray:
        return self.returns.mean(axis=0)


def _names(n: int, assets) -> tuple[str, ...]:
    return tuple(assets) if assets is not None else tuple(str(i) for i in range(n))


def _checked_qp(Q, c, assets) -> Weights:
    try:
        w = qp_solve(Q, c)
    except QPError as exc:
        raise OptimizationError(str(exc)) from exc
    resid = kkt_residual(Q, c, w)
    if resid > KKT_TOL:
        raise OptimizationError(f"QP did not converge: KKT residual {resid:.3e}")
    return Weights.emit(assets, w)


def naive_weights(n: int, assets=None) -> Weights:
    if n < 1:
        raise ValueError("need at least one asset")
    return Weights(_names(n, assets), np.full(n, 1.0 / n))


def solve_tda_po(risk: RiskVector, verify: bool = True) -> Weights:
    """Minimum topological-risk portfolio, ``min sum(lambda_i w_i^2)``.

    Diagonal risk gives the closed form w_i proportional to 1/lambda_i; with
    ``verify`` the result is checked against the active-set QP.
    """
    if len(risk) == 0:
        raise ValueError("empty risk vector")
    lam = risk.floored()
    inv = 1.0 / lam
    w = inv / inv.sum()
    if verify:
        # rescale so the QP sees O(1) entries; the argmin is unchanged
        Q = np.diag(lam / lam.max())
        w_qp = qp_solve(Q)
        if np.abs(w_qp - w).max() > 1e-8:
            raise OptimizationError("closed-form and QP solutions of TDA-PO disagree")
    return Weights.emit(risk.assets, w)


def solve_tda_ipo(risk: RiskVector, k: int) -> Weights:
    """Minimum topological risk holding exactly ``k`` assets.

    For a fixed support S the optimum is 1/sum_{i in S}(1/lambda_i), which is
    smallest when S holds the k least risky assets (input order breaks ties).
    """
    n = len(risk)
    if not 1 <= k <= n:
        raise ValueError(f"cardinality k={k} outside [1, {n}]")
    lam = risk.floored()
    support = np.argsort(lam, kind="stable")[:k]
    w = np.zeros(n)
    inv = 1.0 / lam[support]
    w[support] = inv / inv.sum()
    return Weights.emit(risk.assets, w)


def solve_gmv(mom: MomentEstimates, assets=None) -> Weights:
    sigma = _positive_definite(mom.sigma)
    return _checked_qp(sigma, np.zeros(len(mom.mu)), _names(len(mom.mu), assets))


def solve_mv(mom: MomentEstimates, assets=None) -> Weights:
    """Mean-variance with unit risk aversion: ``min w'Sigma w - mu'w``."""
    sigma = _positive_definite(mom.sigma)
    return _checked_qp(sigma, -mom.mu, _names(len(mom.mu), assets))


def solve_mcvar(scen: ScenarioSet, mu=None, alpha: float = 0.95, assets=None) -> Weights:
    """Mean-CVaR: ``max mu'w - CVaR_alpha(w)`` in Rockafellar-Uryasev LP form.

    Variables are ``[w (n), zeta (free), z (T)]``.
    """
    R = scen.returns
    T, n = R.shape
    mu = scen.mean if mu is None else np.asarray(mu, dtype=float)
    _check_alpha(alpha)
    coef = 1.0 / ((1.0 - alpha) * T)
    c = np.concatenate([mu, [-1.0], np.full(T, -coef)])
    # -r_t'w - zeta - z_t <= 0
    A_ub = np.hstack([-R, -np.ones((T, 1)), -np.eye(T)])
    A_eq = np.concatenate([np.ones(n), [0.0], np.zeros(T)])[None, :]
    res = linprog(c, A_ub, np.zeros(T), A_eq, [1.0], free=[n], maximize=True)
    if res.status != OPTIMAL:
        raise OptimizationError(f"mean-CVaR LP {res.status} (internal solver fault)")
    return Weights.emit(_names(n, assets), res.x[:n])


def solve_sharpe_random(mom: MomentEstimates, samples: int = 5000, seed: int = 0,
                        assets=None) -> Weights:
    """Best Sharpe ratio among ``samples`` flat-Dirichlet portfolios."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    n = len(mom.mu)
    rng = np.random.default_rng(seed)
    W = rng.dirichlet(np.ones(n), size=samples)
    sigma = _positive_definite(mom.sigma)
    mean = W @ mom.mu
    vol = np.sqrt(np.einsum("ij,jk,ik->i", W, sigma, W))
    sharpe = np.where(mean > 0, mean / vol, -np.inf)
    best = int(np.argmax(sharpe))
    if not sharpe[best] > 0:
        raise OptimizationError("no positive-Sharpe sample")
    return Weights.emit(_names(n, assets), W[best])


def solve_starr(scen: ScenarioSet, mu=None, alpha: float = 0.95, assets=None) -> Weights:
    """Maximise mean / CVaR_alpha by the Charnes-Cooper transform.

    With v = s*w the ratio problem becomes ``max mu'v`` subject to
    CVaR(v) <= 1 (RU form), sum(v) = s, v >= 0, s >= 0.
    Variables are ``[v (n), s, zeta (free), z (T)]``.
    """
    R = scen.returns
    T, n = R.shape
    mu = scen.mean if mu is None else np.asarray(mu, dtype=float)
    _check_alpha(alpha)
    if mu.max() <= 0:
        raise OptimizationError("STARR needs an asset with positive mean return")
    coef = 1.0 / ((1.0 - alpha) * T)
    c = np.concatenate([mu, [0.0, 0.0], np.zeros(T)])
    A_ub = np.zeros((T + 1, n + 2 + T))
    A_ub[:T, :n] = -R
    A_ub[:T, n + 1] = -1.0
    A_ub[:T, n + 2 :] = -np.eye(T)
    A_ub[T, n + 1] = 1.0
    A_ub[T, n + 2 :] = coef
    b_ub = np.concatenate([np.zeros(T), [1.0]])
    A_eq = np.zeros((1, n + 2 + T))
    A_eq[0, :n] = 1.0
    A_eq[0, n] = -1.0
    res = linprog(c, A_ub, b_ub, A_eq, [0.0], free=[n + 1], maximize=True)
    if res.status == UNBOUNDED:
        raise OptimizationError("STARR ratio unbounded: a portfolio has positive mean and "
                                "non-positive CVaR")
    if res.status != OPTIMAL:
        raise OptimizationError(f"STARR LP {res.status}")
    s = res.x[n]
    if not s > 0:
        raise OptimizationError("no feasible portfolio with positive CVaR denominator")
    w = res.x[:n] / s
    if ru_cvar(R @ w, alpha) <= 0:
        raise OptimizationError("CVaR of the STARR portfolio is not positive")
    return Weights.emit(_names(n, assets), w)


def solve_omega(scen: ScenarioSet, threshold: float = 0.0, assets=None) -> Weights:
    """Maximise E(R-L)+ / E(L-R)+ over the simplex.

    Uses Omega = 1 + (E R - L) / E(L - R)+ and the Charnes-Cooper transform;
    variables are ``[v (n), s, d (T)]`` with d_t >= L*s - r_t'v.
    """
    R = scen.returns
    T, n = R.shape
    L = float(threshold)
    best_mean = float(scen.mean.max())
    if not L < best_mean:
        raise OptimizationError(
            f"Omega threshold L={L:.6g} must be below the best attainable mean {best_mean:.6g}"
        )
    c = np.concatenate([scen.mean, [-L], np.zeros(T)])
    A_ub = np.zeros((T + 1, n + 1 + T))
    A_ub[:T, :n] = -R
    A_ub[:T, n] = L
    A_ub[:T, n + 1 :] = -np.eye(T)
    A_ub[T, n + 1 :] = 1.0 / T
    b_ub = np.concatenate([np.zeros(T), [1.0]])
    A_eq = np.zeros((1, n + 1 + T))
    A_eq[0, :n] = 1.0
    A_eq[0, n] = -1.0
    res = linprog(c, A_ub, b_ub, A_eq, [0.0], maximize=True)
    if res.status == UNBOUNDED:
        raise OptimizationError(
            f"Omega ratio unbounded: downside deviation below L={L:.6g} vanishes"
        )
    if res.status != OPTIMAL:
        raise OptimizationError(f"Omega LP {res.status}")
    s = res.x[n]
    if not s > 0:
        raise OptimizationError("Omega LP returned a zero scale")
    return Weights.emit(_names(n, assets), res.x[:n] / s)


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")


def ru_cvar(portfolio_returns, alpha: float) -> float:
    """Rockafellar-Uryasev CVaR of the losses ``-y`` under uniform scenarios.

    The minimum over zeta of ``zeta + E(-y - zeta)+ / (1 - alpha)`` is attained
    at one of the losses, so evaluating every loss is exact.
    """
    losses = -np.asarray(portfolio_returns, dtype=float)
    zeta = losses[:, None]
    vals = zeta[:, 0] + np.maximum(losses[None, :] - zeta, 0.0).mean(axis=1) / (1 - alpha)
    return float(vals.min())


def omega_ratio(portfolio_returns, threshold: float) -> float:
    y = np.asarray(portfolio_returns, dtype=float)
    up = np.maximum(y - threshold, 0.0).mean()
    down = np.maximum(threshold - y, 0.0).mean()
    return float(up / down) if down > 0 else float("inf")
