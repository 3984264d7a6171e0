"""Per-asset topological risk from sub-window landscape norms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tda_core import (
    EmbeddingConfig,
    build_landscape,
    default_grid,
    landscape_norm,
    mean_landscape,
    pairwise_distances,
    rips_persistence_h0,
    takens_embed,
)

LAMBDA_FLOOR = 1e-12


class DegenerateRiskError(ValueError):
    pass


@dataclass(frozen=True)
class TopoRiskConfig:
    sub_len: int = 126
    hop: int = 21
    tau: int = 1
    d: int = 3
    p: float = 1.0
    k_max: int | None = 1  # None: every landscape level
    grid_len: int = 1024

    def __post_init__(self):
        if self.sub_len < 1 or self.hop < 1:
            raise ValueError("sub_len and hop must be positive")
        if self.hop >= self.sub_len:
            raise ValueError("hop must be smaller than sub_len")
        if self.sub_len <= (self.d - 1) * self.tau:
            raise ValueError("sub_len too short for the embedding")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.k_max is not None and self.k_max < 1:
            raise ValueError("k_max must be >= 1 or None")
        if self.grid_len < 2:
            raise ValueError("grid_len must be at least 2")

    @property
    def embedding(self) -> EmbeddingConfig:
        return EmbeddingConfig(tau=self.tau, d=self.d)


@dataclass(frozen=True)
class RiskVector:
    assets: tuple[str, ...]
    lam: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float).ravel()
        if len(lam) != len(self.assets):
            raise ValueError("one risk value per asset required")
        if np.any(lam < 0) or not np.all(np.isfinite(lam)):
            raise ValueError("topological risks must be finite and non-negative")
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)

    def __len__(self) -> int:
        return len(self.assets)

    def floored(self, eps: float = LAMBDA_FLOOR) -> np.ndarray:
        return np.maximum(self.lam, eps)

    def portfolio_risk(self, w) -> float:
        """Quadratic form w' diag(lambda) w."""
        w = np.asarray(w, dtype=float)
        return float(np.dot(self.lam, w * w))


def sub_windows(series, cfg: TopoRiskConfig) -> list[np.ndarray]:
    x = np.asarray(series, dtype=float).ravel()
    if len(x) < cfg.sub_len:
        raise ValueError(f"series of length {len(x)} shorter than sub_len={cfg.sub_len}")
    count = (len(x) - cfg.sub_len) // cfg.hop + 1
    return [x[j * cfg.hop : j * cfg.hop + cfg.sub_len] for j in range(count)]


def landscape_norm_series(series, cfg: TopoRiskConfig) -> tuple[np.ndarray, float]:
    """Norm of each sub-window landscape, and the norm of their mean landscape.

    All landscapes of one series share a grid over ``[0, 1.05 * max death]``.
    """
    x = np.asarray(series, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains non-finite values")
    windows = sub_windows(x, cfg)
    if len(windows) < 2:
        raise DegenerateRiskError(
            f"degenerate risk: series of length {len(x)} gives {len(windows)} sub-window(s); "
            "need at least 2"
        )
    emb = cfg.embedding
    diagrams = [rips_persistence_h0(pairwise_distances(takens_embed(w, emb))) for w in windows]
    max_death = max((float(dg.deaths.max()) for dg in diagrams if len(dg)), default=0.0)
    start, step = default_grid(max_death, cfg.grid_len)
    lands = [build_landscape(dg, start, step, cfg.grid_len, cfg.k_max) for dg in diagrams]
    norms = np.array([landscape_norm(land, cfg.p) for land in lands])
    reference = landscape_norm(mean_landscape(lands), cfg.p)
    return norms, reference


def asset_topological_risk(series, cfg: TopoRiskConfig = TopoRiskConfig()) -> float:
    """Sum of squared deviations of the sub-window norms from the mean-landscape norm."""
    norms, reference = landscape_norm_series(series, cfg)
    lam = float(np.sum((norms - reference) ** 2))
    if not np.isfinite(lam):
        raise ValueError("non-finite topological risk")
    return lam


def risk_vector(panel, cfg: TopoRiskConfig = TopoRiskConfig()) -> RiskVector:
    """Topological risk of every column of a returns panel, in column order."""
    lam = np.empty(len(panel.assets))
    for i, asset in enumerate(panel.assets):
        try:
            lam[i] = asset_topological_risk(panel.returns[:, i], cfg)
        except ValueError as exc:
            raise type(exc)(f"asset {asset}: {exc}") from exc
    return RiskVector(tuple(panel.assets), lam)
