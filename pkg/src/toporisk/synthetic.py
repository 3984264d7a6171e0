"""Synthetic price panels for tests and demo runs."""

from __future__ import annotations

import csv
import datetime as dt
from pathlib import Path

import numpy as np

from .market_data import PricePanel


def business_days(n: int, start: str = "2015-01-02") -> tuple[str, ...]:
    day = dt.date.fromisoformat(start)
    out = []
    while len(out) < n:
        if day.weekday() < 5:
            out.append(day.isoformat())
        day += dt.timedelta(days=1)
    return tuple(out)


def synthetic_prices(n_assets: int = 20, n_days: int = 600, seed: int = 0,
                     with_index: bool = True) -> PricePanel:
    """One-factor model with heteroscedastic idiosyncratic noise.

    Asset volatilities differ so the optimizers have something to choose
    between; with ``with_index`` an ``INDEX`` column follows the factor.
    """
    rng = np.random.default_rng(seed)
    factor = rng.normal(3e-4, 0.01, n_days - 1)
    betas = rng.uniform(0.5, 1.5, n_assets)
    vols = rng.uniform(0.005, 0.03, n_assets)
    drift = rng.normal(2e-4, 2e-4, n_assets)
    noise = rng.standard_t(5, (n_days - 1, n_assets)) * vols * np.sqrt(3 / 5)
    returns = drift + factor[:, None] * betas + noise
    assets = [f"A{i:02d}" for i in range(n_assets)]
    if with_index:
        returns = np.column_stack([returns, factor])
        assets.append("INDEX")
    returns = np.clip(returns, -0.5, 0.5)
    start = rng.uniform(20, 200, returns.shape[1])
    prices = np.vstack([start, start * np.cumprod(1 + returns, axis=0)])
    return PricePanel(business_days(n_days), tuple(assets), prices)


def write_prices_csv(panel: PricePanel, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", *panel.assets])
        for date, row in zip(panel.dates, panel.prices):
            w.writerow([date, *("" if np.isnan(x) else repr(float(x)) for x in row)])
    return path
