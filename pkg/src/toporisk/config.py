"""Run configuration: defaults < YAML file < TOPORISK_* env vars < command-line flags."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from .backtest import DEFAULT_TC_RATE, STRATEGY_MODELS, Strategy
from .market_data import WindowSpec
from .topo_risk import TopoRiskConfig

ENV_PREFIX = "TOPORISK_"


def parse_k_max(value) -> int | None:
    if value is None or (isinstance(value, str) and value.strip().lower() == "all"):
        return None
    k = int(value)
    if k < 1:
        raise ValueError("k_max must be a positive integer or 'all'")
    return k


def _float_list(value) -> list[float]:
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    if isinstance(value, str):
        return [float(v) for v in value.split(",") if v.strip()]
    return [float(value)]


def _str_list(value) -> list[str]:
    if isinstance(value, (list, tuple)):
        return [str(v) for v in value]
    return [v.strip() for v in str(value).split(",") if v.strip()]


@dataclass
class RunConfig:
    data: str | None = None
    index: str | None = None
    in_len: int = 252
    out_len: int = 21
    shift: int = 21
    sub_len: int = 126
    hop: int = 21
    tau: int = 1
    dim: int = 3
    p: float = 1.0
    k_max: int | None = 1
    grid_len: int = 1024
    model: list[str] = field(default_factory=lambda: ["tda-po"])
    k: int | None = None
    alpha: float = 0.95
    omega_threshold: float | None = None
    samples: int = 5000
    tc_rate: list[float] = field(default_factory=lambda: [DEFAULT_TC_RATE])
    seed: int = 0
    out_dir: str = "out"
    window: int | None = None
    strategies: list[dict] = field(default_factory=list)
    reference: str | None = None
    baseline: str = "naive"
    sharpe_confidence: float = 0.90
    risk_confidence: float = 0.95
    dump_diagrams: bool = False
    overwrite: bool = False

    @property
    def window_spec(self) -> WindowSpec:
        return WindowSpec(self.in_len, self.out_len, self.shift)

    @property
    def topo(self) -> TopoRiskConfig:
        return TopoRiskConfig(sub_len=self.sub_len, hop=self.hop, tau=self.tau, d=self.dim,
                              p=self.p, k_max=self.k_max, grid_len=self.grid_len)

    def strategy_list(self) -> list[Strategy]:
        """Strategies from the ``strategies`` table, else one per ``model`` name."""
        specs = self.strategies or [{"model": m} for m in self.model]
        out = []
        for spec in specs:
            spec = dict(spec)
            model = spec.pop("model")
            name = spec.pop("name", "")
            if model not in STRATEGY_MODELS:
                raise ValueError(f"unknown model {model!r}")
            if model == "tda-ipo" and "k" not in spec:
                if self.k is None:
                    raise ValueError("tda-ipo needs a cardinality k")
                spec["k"] = self.k
            if model in ("mcvar", "starr"):
                spec.setdefault("alpha", self.alpha)
            if model == "omega" and self.omega_threshold is not None:
                spec.setdefault("threshold", self.omega_threshold)
            if model == "sharpe":
                spec.setdefault("samples", self.samples)
            out.append(Strategy(model, spec, name))
        return out


_CONVERTERS = {
    "in_len": int, "out_len": int, "shift": int, "sub_len": int, "hop": int, "tau": int,
    "dim": int, "p": float, "k_max": parse_k_max, "grid_len": int, "model": _str_list,
    "k": int, "alpha": float, "omega_threshold": float, "samples": int, "tc_rate": _float_list,
    "seed": int, "window": int, "sharpe_confidence": float, "risk_confidence": float,
}
_BOOLS = {"dump_diagrams", "overwrite"}


def _convert(key: str, value):
    if value is None:
        return None
    if key in _BOOLS:
        if isinstance(value, str):
            return value.strip().lower() in ("1", "true", "yes", "on")
        return bool(value)
    conv = _CONVERTERS.get(key)
    return conv(value) if conv else value


def load_config(path=None, overrides: dict | None = None, environ=None) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    merged: dict = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"config file not found: {path}")
        raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        if not isinstance(raw, dict):
            raise ValueError(f"{path}: config must be a mapping")
        for key, value in raw.items():
            key = key.replace("-", "_")
            if key not in known:
                raise ValueError(f"{path}: unknown config key {key!r}")
            merged[key] = value
    environ = os.environ if environ is None else environ
    for key in known:
        env_key = ENV_PREFIX + key.upper()
        if env_key in environ:
            merged[key] = environ[env_key]
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    converted = {k: _convert(k, v) for k, v in merged.items() if k != "strategies"}
    if "strategies" in merged:
        converted["strategies"] = list(merged["strategies"] or [])
    if "k_max" in merged:
        converted["k_max"] = parse_k_max(merged["k_max"])
    return RunConfig(**converted)
