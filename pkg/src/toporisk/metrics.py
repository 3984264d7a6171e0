"""Out-of-sample performance measures and the significance tests behind the tables.

Undefined quantities (a zero denominator, a series too short for the
topological risk) come back as ``None`` and are written out as ``n/a``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from .topo_risk import TopoRiskConfig, asset_topological_risk

NA = "n/a"
_FLOOR_EPS = 1e-9  # absorbs round-off in floor(T * alpha)


@dataclass
class MetricReport:
    emr: float
    min_return: float
    stdev: float
    dd: float
    var_alpha: float | None
    cvar_alpha: float | None
    sharpe: float | None
    sortino: float | None
    svr: float | None
    scr: float | None
    rachev: float | None
    ptr: float | None
    alpha: float = 0.95
    rf: float = 0.0

    def as_dict(self) -> dict:
        return asdict(self)


def _series(returns) -> np.ndarray:
    r = np.asarray(returns, dtype=float).ravel()
    if r.size == 0:
        raise ValueError("empty return series")
    return r


def emr(returns, rf: float = 0.0) -> float:
    """Mean excess return over the risk-free rate."""
    r = _series(returns)
    return float(np.mean(r - rf))


def stdev(returns) -> float:
    """Population standard deviation (divisor T)."""
    r = _series(returns)
    return float(np.sqrt(np.mean((r - r.mean()) ** 2)))


def downside_dev(returns) -> float:
    r = _series(returns)
    return float(np.sqrt(np.mean(np.minimum(r, 0.0) ** 2)))


def semi_dev(returns) -> float:
    """Semi-deviation below the mean."""
    r = _series(returns)
    return float(np.sqrt(np.mean(np.minimum(r - r.mean(), 0.0) ** 2)))


def tail_index(n: int, alpha: float) -> int:
    """k = floor(n * alpha) + 1, the 1-based position of VaR among sorted losses."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    return math.floor(n * alpha + _FLOOR_EPS) + 1


def var_cvar(returns, alpha: float = 0.95) -> tuple[float, float]:
    """Empirical VaR and CVaR of the losses ``-returns``.

    With the losses sorted ascending, VaR is the k-th and CVaR is the tail
    sum from k onwards divided by T(1 - alpha).
    """
    losses = np.sort(-_series(returns))
    T = len(losses)
    k = tail_index(T, alpha)
    if k > T:
        raise ValueError(f"alpha too high for sample: k={k} exceeds T={T}")
    var = float(losses[k - 1])
    cvar = float(losses[k - 1 :].sum() / (T * (1.0 - alpha)))
    return var, cvar


def _ratio(num: float, den: float | None, scale: float) -> float | None:
    if den is None or not den > 1e-12 * scale:
        return None
    return float(num / den)


def ratios(returns, alpha: float = 0.95, rf: float = 0.0) -> dict[str, float | None]:
    """Sharpe, Sortino, Sharpe-VaR, Sharpe-CVaR and Rachev ratios."""
    r = _series(returns)
    excess = float(r.mean() - rf)
    scale = max(float(np.abs(r).max()), 1e-300)
    var, cvar = var_cvar(r, alpha)
    _, upper_tail = var_cvar(-r, alpha)
    return {
        "sharpe": _ratio(excess, stdev(r), scale),
        "sortino": _ratio(excess, semi_dev(r), scale),
        "svr": _ratio(excess, var, scale),
        "scr": _ratio(excess, cvar, scale),
        "rachev": _ratio(upper_tail, cvar, scale),
    }


def realized_ptr(returns, topo_cfg: TopoRiskConfig = TopoRiskConfig()) -> float | None:
    """Topological risk of a portfolio's realised return series."""
    try:
        return asset_topological_risk(_series(returns), topo_cfg)
    except ValueError:
        return None


def metric_report(returns, alpha: float = 0.95, rf: float = 0.0,
                  topo_cfg: TopoRiskConfig | None = TopoRiskConfig()) -> MetricReport:
    r = _series(returns)
    try:
        var, cvar = var_cvar(r, alpha)
    except ValueError:
        var = cvar = None
    rat = ratios(r, alpha, rf) if var is not None else dict.fromkeys(
        ("sharpe", "sortino", "svr", "scr", "rachev"))
    return MetricReport(
        emr=emr(r, rf),
        min_return=float(r.min()),
        stdev=stdev(r),
        dd=downside_dev(r),
        var_alpha=var,
        cvar_alpha=cvar,
        ptr=realized_ptr(r, topo_cfg) if topo_cfg is not None else None,
        alpha=alpha,
        rf=rf,
        **rat,
    )


def z_test_sharpe(r1, r2) -> tuple[float, float]:
    """Jobson-Korkie statistic (Memmel's correction) for SR1 > SR2.

    Returns ``(z, p)`` with the one-sided p-value ``P(Z >= z)``.
    """
    a, b = _series(r1), _series(r2)
    n = len(a)
    if len(b) != n or n < 2:
        raise ValueError("Sharpe test needs two series of equal length >= 2")
    m1, m2 = a.mean(), b.mean()
    s1, s2 = a.std(ddof=1), b.std(ddof=1)
    if s1 == 0 or s2 == 0:
        raise ValueError("Sharpe test undefined for a zero-variance series")
    s12 = np.cov(a, b, ddof=1)[0, 1]
    num = s2 * m1 - s1 * m2
    if num == 0:
        return 0.0, 0.5
    theta = (
        2 * s1**2 * s2**2
        - 2 * s1 * s2 * s12
        + 0.5 * m1**2 * s2**2
        + 0.5 * m2**2 * s1**2
        - (m1 * m2 / (s1 * s2)) * s12**2
    ) / n
    if not theta > 0:
        raise ValueError("Sharpe test variance term is not positive")
    z = float(num / math.sqrt(theta))
    return z, float(stats.norm.sf(z))


def f_test_variance(r1, r2) -> tuple[float, float]:
    """F = var(r2) / var(r1) with sample variances; p = P(F(n-1, n-1) >= F)."""
    a, b = _series(r1), _series(r2)
    n = len(a)
    if len(b) != n or n < 2:
        raise ValueError("F test needs two series of equal length >= 2")
    v1, v2 = a.var(ddof=1), b.var(ddof=1)
    if v1 == 0 or v2 == 0:
        raise ValueError("F test undefined for a zero-variance series")
    F = float(v2 / v1)
    return F, float(stats.f.sf(F, n - 1, n - 1))


def z_test_cvar(values, target_cvar: float, alpha: float = 0.95) -> tuple[float, float]:
    """Large-sample test of the upper-tail mean of ``values`` against ``target_cvar``.

    ``values`` are sorted ascending; the tail starts after position
    floor(n * alpha), whose value serves as the VaR estimate. Pass losses to
    test loss CVaR. A negative z means the sample tail exceeds the target;
    p = P(Z <= z) is small when the sample is significantly worse.
    """
    y = np.sort(_series(values))
    n = len(y)
    if n * (1 - alpha) < 1:
        raise ValueError("need n(1 - alpha) >= 1")
    j = tail_index(n, alpha) - 1
    if j < 1:
        raise ValueError("alpha too small for the sample: no VaR order statistic")
    var = y[j - 1]
    tail = y[j:]
    denom_n = n * (1 - alpha)
    cvar = tail.sum() / denom_n
    spread = ((tail - cvar) ** 2).sum() / denom_n + alpha * (cvar - var) ** 2
    if not spread > 0:
        raise ValueError("degenerate tail: zero variance in the CVaR test")
    z = float(math.sqrt(denom_n) * (target_cvar - cvar) / math.sqrt(spread))
    return z, float(stats.norm.cdf(z))


def z_test_var(values, threshold: float, p_level: float = 0.05) -> tuple[float, float]:
    """Exceedance-count test: z = (#{y < c} - n p) / sqrt(n p (1 - p)).

    p = P(Z >= z) is small when too many observations fall below ``threshold``.
    """
    if not 0 < p_level < 1:
        raise ValueError("p_level must lie in (0, 1)")
    y = _series(values)
    n = len(y)
    count = int(np.sum(y < threshold))
    z = float((count - n * p_level) / math.sqrt(n * p_level * (1 - p_level)))
    return z, float(stats.norm.sf(z))
