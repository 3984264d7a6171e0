"""Rolling-window backtests with turnover, transaction costs and wealth."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .market_data import ReturnsPanel, WindowSpec, rolling_windows
from .optimizers import (
    MODEL_NAMES,
    MomentEstimates,
    ScenarioSet,
    Weights,
    naive_weights,
    solve_gmv,
    solve_mcvar,
    solve_mv,
    solve_omega,
    solve_sharpe_random,
    solve_starr,
    solve_tda_ipo,
    solve_tda_po,
)
from .topo_risk import RiskVector, TopoRiskConfig, risk_vector

logger = logging.getLogger(__name__)

DEFAULT_TC_RATE = 0.003
STRATEGY_MODELS = MODEL_NAMES + ("index",)


class BacktestError(RuntimeError):
    pass


@dataclass(frozen=True)
class Strategy:
    """A model name plus its parameters; ``name`` labels outputs."""

    model: str
    params: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        if self.model not in STRATEGY_MODELS:
            raise ValueError(f"unknown model {self.model!r}; choose from {', '.join(STRATEGY_MODELS)}")
        if not self.name:
            label = self.model
            if self.model == "tda-ipo" and "k" in self.params:
                label = f"tda-ipo-k{self.params['k']}"
            object.__setattr__(self, "name", label)


class WindowContext:
    """In-sample estimates shared by all strategies fitted on one window."""

    def __init__(self, in_sample: ReturnsPanel, topo_cfg: TopoRiskConfig,
                 index_returns: np.ndarray | None = None, window: int = 0):
        self.in_sample = in_sample
        self.topo_cfg = topo_cfg
        self.index_returns = index_returns
        self.window = window

    @cached_property
    def risk(self) -> RiskVector:
        return risk_vector(self.in_sample, self.topo_cfg)

    @cached_property
    def moments(self) -> MomentEstimates:
        return MomentEstimates.from_returns(self.in_sample.returns)

    @cached_property
    def scenarios(self) -> ScenarioSet:
        return ScenarioSet(self.in_sample.returns)


def fit_strategy(strategy: Strategy, ctx: WindowContext, seed: int = 0) -> Weights:
    model, params = strategy.model, strategy.params
    assets = ctx.in_sample.assets
    alpha = params.get("alpha", 0.95)
    if model == "naive":
        return naive_weights(len(assets), assets)
    if model == "tda-po":
        return solve_tda_po(ctx.risk)
    if model == "tda-ipo":
        return solve_tda_ipo(ctx.risk, int(params["k"]))
    if model == "gmv":
        return solve_gmv(ctx.moments, assets)
    if model == "mv":
        return solve_mv(ctx.moments, assets)
    if model == "mcvar":
        return solve_mcvar(ctx.scenarios, alpha=alpha, assets=assets)
    if model == "starr":
        return solve_starr(ctx.scenarios, alpha=alpha, assets=assets)
    if model == "sharpe":
        samples = int(params.get("samples", 5000))
        return solve_sharpe_random(ctx.moments, samples, seed=[seed, ctx.window], assets=assets)
    if model == "omega":
        threshold = params.get("threshold")
        if threshold is None:
            threshold = float(ctx.index_returns.mean()) if ctx.index_returns is not None else 0.0
        return solve_omega(ctx.scenarios, threshold, assets)
    raise ValueError(f"model {model!r} cannot be fitted on assets")


def turnover(prev: Weights, nxt: Weights) -> float:
    if prev.assets != nxt.assets:
        raise ValueError("turnover needs weights over the same asset universe")
    return float(np.abs(nxt.w - prev.w).sum())


def apply_transaction_costs(returns, rebalance_days, turnovers, rate: float) -> np.ndarray:
    """Subtract ``rate * turnover`` from the return of each rebalancing day."""
    if rate < 0:
        raise ValueError("transaction-cost rate must be non-negative")
    out = np.array(returns, dtype=float)
    days = np.asarray(rebalance_days, dtype=int)
    turns = np.asarray(turnovers, dtype=float)
    if days.shape != turns.shape:
        raise ValueError("one turnover per rebalancing day required")
    out[days] -= rate * turns
    return out


def wealth_curve(returns) -> np.ndarray:
    """Growth of 1 unit: W_0 = 1, W_t = W_{t-1} (1 + r_t)."""
    r = np.asarray(returns, dtype=float)
    if np.any(r <= -1):
        raise ValueError("a return of -100% or worse wipes out wealth")
    return np.concatenate([[1.0], np.cumprod(1.0 + r)])


@dataclass
class BacktestResult:
    strategy: str
    assets: tuple[str, ...]
    dates: tuple[str, ...]
    weights: list[Weights]
    returns: np.ndarray          # concatenated out-of-sample returns, before costs
    turnovers: np.ndarray        # one per rebalance (windows - 1)
    rebalance_days: np.ndarray   # positions in ``returns`` where costs are charged
    tc_rate: float = DEFAULT_TC_RATE

    def net_returns(self, rate: float | None = None) -> np.ndarray:
        rate = self.tc_rate if rate is None else rate
        return apply_transaction_costs(self.returns, self.rebalance_days, self.turnovers, rate)

    def wealth(self, rate: float | None = None) -> np.ndarray:
        return wealth_curve(self.net_returns(rate))

    @property
    def avg_assets(self) -> float:
        return float(np.mean([w.n_nonzero for w in self.weights]))

    @property
    def avg_turnover(self) -> float:
        return float(self.turnovers.mean()) if len(self.turnovers) else 0.0


def run_backtests(panel: ReturnsPanel, strategies, spec: WindowSpec = WindowSpec(),
                  topo_cfg: TopoRiskConfig = TopoRiskConfig(), tc_rate: float = DEFAULT_TC_RATE,
                  index_returns=None, seed: int = 0) -> dict[str, BacktestResult]:
    """Backtest several strategies over the same windows.

    Each window's in-sample estimates (topological risk, moments) are computed
    once and shared. ``index_returns`` (aligned with ``panel`` rows) backs the
    ``index`` strategy and the default Omega threshold.
    """
    strategies = list(strategies)
    names = [s.name for s in strategies]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate strategy names: {names}")
    index = None if index_returns is None else np.asarray(index_returns, dtype=float)
    if index is not None and len(index) != len(panel):
        raise ValueError("index returns must align with the panel rows")
    if any(s.model == "index" for s in strategies) and index is None:
        raise ValueError("the index strategy needs index returns")

    windows = rolling_windows(panel, spec)
    fitted: dict[str, list[Weights]] = {s.name: [] for s in strategies}
    oos: dict[str, list[np.ndarray]] = {s.name: [] for s in strategies}
    for m, (ins, outs) in enumerate(windows):
        start = m * spec.shift
        in_index = None if index is None else index[start : start + spec.in_len]
        ctx = WindowContext(ins, topo_cfg, in_index, window=m)
        for s in strategies:
            if s.model == "index":
                lo = start + spec.in_len
                w = Weights(("index",), np.ones(1))
                fitted[s.name].append(w)
                oos[s.name].append(index[lo : lo + spec.out_len].copy())
                continue
            try:
                w = fit_strategy(s, ctx, seed)
            except Exception as exc:
                raise BacktestError(f"strategy {s.name} failed on window {m}: {exc}") from exc
            fitted[s.name].append(w)
            oos[s.name].append(outs.returns @ w.w)
        logger.debug("window %d/%d done", m + 1, len(windows))

    dates = tuple(d for _, outs in windows for d in outs.dates)
    rebalance_days = np.arange(1, len(windows)) * spec.out_len
    results = {}
    for s in strategies:
        ws = fitted[s.name]
        turns = np.array([turnover(a, b) for a, b in zip(ws[:-1], ws[1:])])
        results[s.name] = BacktestResult(
            strategy=s.name,
            assets=ws[0].assets,
            dates=dates,
            weights=ws,
            returns=np.concatenate(oos[s.name]),
            turnovers=turns,
            rebalance_days=rebalance_days,
            tc_rate=tc_rate,
        )
    return results


def run_backtest(panel: ReturnsPanel, strategy: Strategy, spec: WindowSpec = WindowSpec(),
                 topo_cfg: TopoRiskConfig = TopoRiskConfig(), tc_rate: float = DEFAULT_TC_RATE,
                 index_returns=None, seed: int = 0) -> BacktestResult:
    return run_backtests(panel, [strategy], spec, topo_cfg, tc_rate, index_returns, seed)[strategy.name]
