"""Price panels, simple returns and rolling in-/out-of-sample windows."""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Raised when a price file or panel violates its invariants."""


@dataclass(frozen=True)
class PricePanel:
    dates: tuple[str, ...]
    assets: tuple[str, ...]
    prices: np.ndarray  # (dates x assets), NaN marks a missing cell

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        if prices.shape != (len(self.dates), len(self.assets)):
            raise DataError(
                f"price matrix shape {prices.shape} does not match "
                f"{len(self.dates)} dates x {len(self.assets)} assets"
            )
        _check_increasing(self.dates)
        observed = prices[~np.isnan(prices)]
        if np.any(observed <= 0) or not np.all(np.isfinite(observed)):
            raise DataError("prices must be positive and finite")
        prices.setflags(write=False)
        object.__setattr__(self, "prices", prices)


@dataclass(frozen=True)
class ReturnsPanel:
    dates: tuple[str, ...]
    assets: tuple[str, ...]
    returns: np.ndarray  # (dates x assets) simple returns

    def __post_init__(self):
        returns = np.asarray(self.returns, dtype=float)
        if returns.shape != (len(self.dates), len(self.assets)):
            raise DataError(
                f"returns matrix shape {returns.shape} does not match "
                f"{len(self.dates)} dates x {len(self.assets)} assets"
            )
        if not np.all(np.isfinite(returns)) or np.any(returns <= -1.0):
            raise DataError("returns must be finite and greater than -1")
        returns.setflags(write=False)
        object.__setattr__(self, "returns", returns)

    def __len__(self) -> int:
        return len(self.dates)

    def rows(self, start: int, stop: int) -> ReturnsPanel:
        return ReturnsPanel(self.dates[start:stop], self.assets, self.returns[start:stop])

    def select(self, assets) -> ReturnsPanel:
        """Sub-panel restricted to ``assets`` in the given order."""
        index = {a: i for i, a in enumerate(self.assets)}
        missing = [a for a in assets if a not in index]
        if missing:
            raise DataError(f"unknown assets: {', '.join(missing)}")
        cols = [index[a] for a in assets]
        return ReturnsPanel(self.dates, tuple(assets), self.returns[:, cols])

    def column(self, asset: str) -> np.ndarray:
        return self.returns[:, self.assets.index(asset)]


@dataclass(frozen=True)
class WindowSpec:
    in_len: int = 252
    out_len: int = 21
    shift: int = 21

    def __post_init__(self):
        for name in ("in_len", "out_len", "shift"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")


def _check_increasing(dates) -> None:
    for i in range(1, len(dates)):
        if dates[i] == dates[i - 1]:
            raise DataError(f"duplicate date {dates[i]!r} at row {i + 1}")
        if dates[i] < dates[i - 1]:
            raise DataError(f"dates not increasing at row {i + 1} ({dates[i - 1]} -> {dates[i]})")


def load_prices(path) -> PricePanel:
    """Read a ``date,<ticker>,...`` CSV of closing prices.

    Empty cells are kept as missing (NaN); anything else that is not a
    positive number is rejected with the offending row and column named.
    Row numbers count the header as row 1.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if len(header) < 2:
            raise DataError(f"{path}: need a date column and at least one asset column")
        assets = tuple(h.strip() for h in header[1:])
        if len(set(assets)) != len(assets):
            raise DataError(f"{path}: duplicate asset identifiers in header")

        dates: list[str] = []
        rows: list[list[float]] = []
        for lineno, record in enumerate(reader, start=2):
            if not record or all(not c.strip() for c in record):
                continue
            if len(record) != len(header):
                raise DataError(
                    f"{path}: row {lineno} has {len(record)} fields, expected {len(header)}"
                )
            raw_date = record[0].strip()
            try:
                date = dt.date.fromisoformat(raw_date).isoformat()
            except ValueError:
                raise DataError(f"{path}: malformed date {raw_date!r} at row {lineno}") from None
            if dates and date == dates[-1]:
                raise DataError(f"{path}: duplicate date {date} at row {lineno}")
            if dates and date < dates[-1]:
                raise DataError(f"{path}: dates not increasing at row {lineno}")
            values = []
            for asset, cell in zip(assets, record[1:]):
                cell = cell.strip()
                if not cell:
                    values.append(np.nan)
                    continue
                try:
                    value = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}: non-numeric cell {cell!r} at row {lineno}, column {asset}"
                    ) from None
                if not np.isfinite(value) or value <= 0:
                    raise DataError(
                        f"{path}: non-positive price {cell!r} at row {lineno}, column {asset}"
                    )
                values.append(value)
            dates.append(date)
            rows.append(values)

    prices = np.array(rows, dtype=float).reshape(len(dates), len(assets))
    return PricePanel(tuple(dates), assets, prices)


def drop_incomplete_assets(panel: PricePanel) -> PricePanel:
    """Keep only the assets observed on every date."""
    complete = ~np.isnan(panel.prices).any(axis=0)
    if not complete.any():
        raise DataError("empty universe: every asset has missing observations")
    assets = tuple(a for a, keep in zip(panel.assets, complete) if keep)
    return PricePanel(panel.dates, assets, panel.prices[:, complete])


def compute_returns(panel: PricePanel) -> ReturnsPanel:
    if len(panel.dates) < 2:
        raise DataError("need at least 2 dates to compute returns")
    if np.isnan(panel.prices).any():
        raise DataError("panel has missing prices; drop incomplete assets first")
    p = panel.prices
    returns = (p[1:] - p[:-1]) / p[:-1]
    return ReturnsPanel(panel.dates[1:], panel.assets, returns)


def window_count(n_rows: int, spec: WindowSpec) -> int:
    span = spec.in_len + spec.out_len
    if n_rows < span:
        return 0
    return (n_rows - span) // spec.shift + 1


def rolling_windows(panel: ReturnsPanel, spec: WindowSpec) -> list[tuple[ReturnsPanel, ReturnsPanel]]:
    """Split ``panel`` into (in-sample, out-of-sample) pairs.

    Window ``m`` fits on rows ``[m*shift, m*shift + in_len)`` and is held over
    the following ``out_len`` rows. Trailing partial windows are dropped.
    """
    count = window_count(len(panel), spec)
    if count == 0:
        raise DataError(
            f"panel has {len(panel)} rows; need at least {spec.in_len + spec.out_len} "
            f"for one {spec.in_len}/{spec.out_len} window"
        )
    windows = []
    for m in range(count):
        start = m * spec.shift
        mid = start + spec.in_len
        windows.append((panel.rows(start, mid), panel.rows(mid, mid + spec.out_len)))
    return windows
