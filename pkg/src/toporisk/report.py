"""Strategy x metric tables with significance tests and best/second-best ranks."""

from __future__ import annotations

import numpy as np

from .metrics import (
    f_test_variance,
    metric_report,
    var_cvar,
    z_test_cvar,
    z_test_sharpe,
    z_test_var,
)
from .topo_risk import TopoRiskConfig

# +1: larger is better, -1: smaller is better
METRIC_DIRECTIONS = {
    "emr": 1, "min_return": 1, "stdev": -1, "dd": -1, "var_alpha": -1, "cvar_alpha": -1,
    "sharpe": 1, "sortino": 1, "svr": 1, "scr": 1, "rachev": 1, "ptr": -1, "turnover": -1,
}
METRICS = tuple(METRIC_DIRECTIONS) + ("assets",)


def strategy_metrics(returns, turnover: float, assets: float, alpha: float = 0.95,
                     rf: float = 0.0, topo_cfg: TopoRiskConfig | None = TopoRiskConfig()) -> dict:
    row = metric_report(returns, alpha, rf, topo_cfg).as_dict()
    row.pop("alpha")
    row.pop("rf")
    row["turnover"] = float(turnover)
    row["assets"] = float(assets)
    return row


def _safe(test, *args):
    try:
        return test(*args)
    except ValueError:
        return None, None


def significance(returns: dict[str, np.ndarray], reference: str | None, baseline: str | None,
                 alpha: float = 0.95, sharpe_confidence: float = 0.90,
                 risk_confidence: float = 0.95) -> dict[str, dict]:
    """Per-strategy test results.

    The Sharpe test asks whether ``reference`` beats each other strategy; the
    variance, VaR and CVaR tests ask whether each strategy is riskier than
    ``baseline``. ``*_sig`` is True when the one-sided p-value falls below
    one minus the respective confidence.
    """
    out: dict[str, dict] = {}
    base = returns.get(baseline) if baseline else None
    if base is not None:
        base_var, base_cvar = var_cvar(base, alpha)
    for name, r in returns.items():
        row: dict = {}
        if reference in returns and name != reference:
            z, p = _safe(z_test_sharpe, returns[reference], r)
            row.update(sharpe_z=z, sharpe_p=p,
                       sharpe_sig=None if p is None else bool(p < 1 - sharpe_confidence))
        if base is not None and name != baseline:
            F, pf = _safe(f_test_variance, base, r)
            zv, pv = _safe(z_test_var, r, -base_var, 1 - alpha)
            zc, pc = _safe(z_test_cvar, -np.asarray(r), base_cvar, alpha)
            level = 1 - risk_confidence
            row.update(
                var_f=F, var_f_p=pf, var_f_sig=None if pf is None else bool(pf < level),
                var_alpha_z=zv, var_alpha_p=pv, var_alpha_sig=None if pv is None else bool(pv < level),
                cvar_alpha_z=zc, cvar_alpha_p=pc, cvar_alpha_sig=None if pc is None else bool(pc < level),
            )
        out[name] = row
    return out


def rank_values(values: dict[str, float | None], direction: int) -> dict[str, int | None]:
    """Competition ranks (ties share the better rank); missing values get None."""
    present = {k: v for k, v in values.items() if v is not None}
    ranks: dict[str, int | None] = dict.fromkeys(values)
    for name, v in present.items():
        ranks[name] = 1 + sum(1 for u in present.values() if direction * u > direction * v)
    return ranks


def compare_table(metrics: dict[str, dict], tests: dict[str, dict] | None = None) -> list[dict]:
    """One row per metric with each strategy's value and rank.

    Rank 1 marks the best value (bold in a typeset table), rank 2 the second
    best (italics). A trailing ``sharpe_sig`` row carries the significance stars.
    """
    if len(metrics) < 2:
        raise ValueError("comparison needs at least two strategies")
    names = list(metrics)
    rows = []
    for metric in METRICS:
        values = {n: metrics[n].get(metric) for n in names}
        row: dict = {"metric": metric}
        ranks = rank_values(values, METRIC_DIRECTIONS[metric]) if metric in METRIC_DIRECTIONS else {}
        for n in names:
            row[n] = values[n]
            row[f"{n}_rank"] = ranks.get(n)
        rows.append(row)
    if tests:
        star = {"metric": "sharpe_sig"}
        for n in names:
            sig = tests.get(n, {}).get("sharpe_sig")
            star[n] = "*" if sig else ""
            star[f"{n}_rank"] = None
        rows.append(star)
    return rows
