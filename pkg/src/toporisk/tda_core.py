"""Delay embedding, 0-dimensional Rips persistence and persistence landscapes.

Only H0 is needed here, and H0 of a Vietoris-Rips filtration is fully
described by a minimum spanning tree of the complete distance graph: every
point is born at scale 0 and each MST edge kills one component at its length.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform


@dataclass(frozen=True)
class EmbeddingConfig:
    tau: int = 1
    d: int = 3

    def __post_init__(self):
        if self.tau < 1 or self.d < 1:
            raise ValueError("tau and d must be positive integers")

    def min_length(self) -> int:
        return (self.d - 1) * self.tau + 1


@dataclass(frozen=True)
class PersistenceDiagram:
    pairs: np.ndarray  # (r, 2) rows of (birth, death)
    dim: int = 0

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(pairs)):
            raise ValueError("diagram pairs must be finite")
        if np.any(pairs[:, 0] < 0) or np.any(pairs[:, 1] < pairs[:, 0]):
            raise ValueError("diagram pairs need death >= birth >= 0")
        pairs.setflags(write=False)
        object.__setattr__(self, "pairs", pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def births(self) -> np.ndarray:
        return self.pairs[:, 0]

    @property
    def deaths(self) -> np.ndarray:
        return self.pairs[:, 1]


@dataclass(frozen=True)
class Landscape:
    """Landscape functions sampled on a uniform grid; row k holds eta_{k+1}."""

    grid_start: float
    grid_step: float
    values: np.ndarray  # (k_max, grid_len)

    def __post_init__(self):
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if self.grid_step <= 0:
            raise ValueError("grid_step must be positive")
        if values.shape[1] < 2:
            raise ValueError("grid_len must be at least 2")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def grid_len(self) -> int:
        return self.values.shape[1]

    @property
    def k_max(self) -> int:
        return self.values.shape[0]

    @property
    def grid(self) -> np.ndarray:
        return self.grid_start + self.grid_step * np.arange(self.grid_len)

    def same_grid(self, other: Landscape) -> bool:
        return (
            self.grid_start == other.grid_start
            and self.grid_step == other.grid_step
            and self.values.shape == other.values.shape
        )


def takens_embed(series, cfg: EmbeddingConfig) -> np.ndarray:
    """Delay-coordinate point cloud; row j is ``series[j], series[j+tau], ...``."""
    x = np.asarray(series, dtype=float).ravel()
    span = (cfg.d - 1) * cfg.tau
    if len(x) <= span:
        raise ValueError(
            f"series of length {len(x)} too short for d={cfg.d}, tau={cfg.tau}; "
            f"need at least {span + 1} values"
        )
    rows = len(x) - span
    return np.stack([x[i * cfg.tau : i * cfg.tau + rows] for i in range(cfg.d)], axis=1)


def pairwise_distances(cloud) -> np.ndarray:
    points = np.asarray(cloud, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if len(points) < 2:
        return np.zeros((len(points), len(points)))
    return squareform(pdist(points, metric="euclidean"))


def rips_persistence_h0(dist) -> PersistenceDiagram:
    """H0 diagram of the Rips filtration on a distance matrix.

    Returns ``m - 1`` pairs ``(0, w)`` sorted by death; the essential class is
    dropped. The deaths are the MST edge lengths, found with dense Prim
    (O(m^2), vectorised). The MST weight multiset is unique, so this agrees
    with a Kruskal/union-find sweep whatever the tie-breaking.
    """
    D = np.asarray(dist, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError("distance matrix must be square")
    m = D.shape[0]
    if m == 0:
        raise ValueError("empty point cloud")
    deaths = np.empty(m - 1)
    best = D[0].copy()
    best[0] = np.inf
    in_tree = np.zeros(m, dtype=bool)
    in_tree[0] = True
    for step in range(m - 1):
        j = int(np.argmin(best))
        deaths[step] = best[j]
        in_tree[j] = True
        np.minimum(best, D[j], out=best)
        best[in_tree] = np.inf
    deaths.sort()
    return PersistenceDiagram(np.column_stack([np.zeros(m - 1), deaths]))


def tent(pair, t: float) -> float:
    """Tent over (birth, death): rises from birth, peaks at the midpoint, falls to death."""
    a, b = pair
    return max(0.0, min(t - a, b - t))


def _tents(pairs: np.ndarray, grid: np.ndarray) -> np.ndarray:
    a = pairs[:, 0][:, None]
    b = pairs[:, 1][:, None]
    return np.maximum(0.0, np.minimum(grid[None, :] - a, b - grid[None, :]))


def default_grid(max_death: float, grid_len: int = 1024, headroom: float = 1.05) -> tuple[float, float]:
    """(grid_start, grid_step) spanning ``[0, headroom * max_death]``.

    A zero maximum (all-zero diagrams) falls back to the unit interval; the
    landscapes are identically zero then and the span does not matter. The
    same fallback covers deaths so small that the step would underflow.
    """
    if grid_len < 2:
        raise ValueError("grid_len must be at least 2")
    stop = headroom * float(max_death)
    if not stop / (grid_len - 1) > 0:
        stop = 1.0
    return 0.0, stop / (grid_len - 1)


def build_landscape(diag: PersistenceDiagram, grid_start: float, grid_step: float,
                    grid_len: int, k_max: int | None = 1) -> Landscape:
    """Sample eta_1..eta_{k_max} of ``diag`` on a uniform grid.

    ``k_max=None`` keeps every level (one per pair).
    """
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    if grid_len < 2:
        raise ValueError("grid_len must be at least 2")
    n_pairs = len(diag)
    if k_max is None:
        k_max = max(n_pairs, 1)
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    grid = grid_start + grid_step * np.arange(grid_len)
    values = np.zeros((k_max, grid_len))
    if n_pairs == 0:
        return Landscape(grid_start, grid_step, values)
    if diag.births.min() < grid[0] or diag.deaths.max() > grid[-1]:
        warnings.warn("landscape grid does not cover the diagram support", RuntimeWarning,
                      stacklevel=2)
    tents = _tents(diag.pairs, grid)
    if k_max == 1:
        values[0] = tents.max(axis=0)
    else:
        ranked = -np.sort(-tents, axis=0)
        depth = min(k_max, n_pairs)
        values[:depth] = ranked[:depth]
    return Landscape(grid_start, grid_step, values)


def landscape_norm(land: Landscape, p: float = 1.0) -> float:
    """L^p norm summed over all levels, integrals by the trapezoid rule."""
    if p < 1:
        raise ValueError("p must be >= 1")
    powered = np.abs(land.values) ** p if p != 1 else np.abs(land.values)
    total = float(np.trapezoid(powered, dx=land.grid_step, axis=1).sum())
    return total if p == 1 else total ** (1.0 / p)


def mean_landscape(lands) -> Landscape:
    lands = list(lands)
    if not lands:
        raise ValueError("cannot average an empty list of landscapes")
    first = lands[0]
    for other in lands[1:]:
        if not first.same_grid(other):
            raise ValueError("landscapes must share grid and depth to be averaged")
    values = np.mean(np.stack([land.values for land in lands]), axis=0)
    return Landscape(first.grid_start, first.grid_step, values)


def diagram_rows(diag: PersistenceDiagram) -> list[tuple[float, float]]:
    """``(birth, death)`` rows for a CSV debug dump."""
    return [(float(b), float(d)) for b, d in diag.pairs]


def landscape_rows(land: Landscape) -> list[tuple[int, float, float]]:
    """``(k, t, value)`` rows for a CSV debug dump; k is 1-based."""
    grid = land.grid
    return [
        (k + 1, float(t), float(v))
        for k in range(land.k_max)
        for t, v in zip(grid, land.values[k])
    ]
