"""Command-line interface: ingest, risk, optimize, backtest, compare, report."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .backtest import BacktestResult, WindowContext, fit_strategy, run_backtests
from .config import RunConfig, load_config
from .market_data import (
    ReturnsPanel,
    compute_returns,
    drop_incomplete_assets,
    load_prices,
)
from .optimizers import MODEL_NAMES
from .report import compare_table, significance, strategy_metrics
from .tda_core import (
    build_landscape,
    default_grid,
    diagram_rows,
    landscape_rows,
    pairwise_distances,
    rips_persistence_h0,
    takens_embed,
)
from .topo_risk import risk_vector, sub_windows

logger = logging.getLogger("toporisk")


class CLIError(Exception):
    pass


def _fmt(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


class Writer:
    """Creates output files, refusing to clobber existing ones unless allowed."""

    def __init__(self, out_dir, overwrite: bool = False):
        self.out_dir = Path(out_dir)
        self.overwrite = overwrite
        self.written: list[Path] = []

    def path(self, name: str) -> Path:
        target = self.out_dir / name
        if target.exists() and not self.overwrite:
            raise CLIError(f"{target} exists; pass --overwrite to replace it")
        target.parent.mkdir(parents=True, exist_ok=True)
        return target

    def csv(self, name: str, header, rows) -> Path:
        target = self.path(name)
        with target.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
        self.written.append(target)
        return target

    def json(self, name: str, payload) -> Path:
        target = self.path(name)
        target.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")
        self.written.append(target)
        return target


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


# ---------------------------------------------------------------- data

def _load_returns(cfg: RunConfig) -> tuple[ReturnsPanel, np.ndarray | None]:
    """Asset returns and, if configured, the index column split off."""
    if not cfg.data:
        raise CLIError("no data file given (--data)")
    panel = compute_returns(drop_incomplete_assets(load_prices(cfg.data)))
    if cfg.index is None:
        return panel, None
    if cfg.index not in panel.assets:
        raise CLIError(f"index column {cfg.index!r} not found among complete columns")
    index = panel.column(cfg.index)
    assets = [a for a in panel.assets if a != cfg.index]
    if not assets:
        raise CLIError("no assets left besides the index column")
    return panel.select(assets), index


def _in_sample(cfg: RunConfig, panel: ReturnsPanel) -> tuple[int, ReturnsPanel]:
    """The in-sample slice for ``risk``/``optimize``: a window index or the last in_len rows."""
    T = len(panel)
    if cfg.window is None:
        start = T - cfg.in_len
    else:
        start = cfg.window * cfg.shift
    if start < 0 or start + cfg.in_len > T:
        raise CLIError(f"in-sample slice [{start}, {start + cfg.in_len}) outside {T} rows")
    return start, panel.rows(start, start + cfg.in_len)


# ---------------------------------------------------------------- commands

def cmd_ingest(cfg: RunConfig, out: Writer) -> None:
    prices = load_prices(cfg.data) if cfg.data else None
    if prices is None:
        raise CLIError("no data file given (--data)")
    clean = drop_incomplete_assets(prices)
    returns = compute_returns(clean)
    dropped = [a for a in prices.assets if a not in clean.assets]
    out.csv("returns.csv", ["date", *returns.assets],
            ([d, *row] for d, row in zip(returns.dates, returns.returns)))
    out.json("ingest.json", {
        "source": str(cfg.data), "dates": len(prices.dates), "return_rows": len(returns),
        "assets_kept": list(clean.assets), "assets_dropped": dropped,
    })


def cmd_risk(cfg: RunConfig, out: Writer) -> None:
    panel, _ = _load_returns(cfg)
    start, ins = _in_sample(cfg, panel)
    topo = cfg.topo
    risk = risk_vector(ins, topo)
    out.csv("risk.csv", ["asset", "lambda"], zip(risk.assets, risk.lam))
    if cfg.dump_diagrams:
        _dump_diagrams(ins, topo, out)


def _dump_diagrams(panel: ReturnsPanel, topo, out: Writer) -> None:
    for i, asset in enumerate(panel.assets):
        diags = [rips_persistence_h0(pairwise_distances(takens_embed(w, topo.embedding)))
                 for w in sub_windows(panel.returns[:, i], topo)]
        max_death = max((float(d.deaths.max()) for d in diags if len(d)), default=0.0)
        start, step = default_grid(max_death, topo.grid_len)
        for j, diag in enumerate(diags):
            out.csv(f"debug/{asset}_sub{j}_diagram.csv", ["birth", "death"], diagram_rows(diag))
            land = build_landscape(diag, start, step, topo.grid_len, topo.k_max)
            out.csv(f"debug/{asset}_sub{j}_landscape.csv", ["k", "t", "value"], landscape_rows(land))


def cmd_optimize(cfg: RunConfig, out: Writer) -> None:
    panel, index = _load_returns(cfg)
    start, ins = _in_sample(cfg, panel)
    in_index = None if index is None else index[start : start + cfg.in_len]
    ctx = WindowContext(ins, cfg.topo, in_index, window=cfg.window or 0)
    for strategy in cfg.strategy_list():
        if strategy.model == "index":
            raise CLIError("the index is a benchmark, not an optimizer")
        w = fit_strategy(strategy, ctx, cfg.seed)
        out.csv(f"weights_{strategy.name}.csv", ["asset", "weight"], zip(w.assets, w.w))


def _write_backtest(name: str, res: BacktestResult, rates: list[float], out: Writer) -> None:
    out.csv(f"weights_{name}.csv", ["window", "asset", "weight"],
            ((m, a, x) for m, w in enumerate(res.weights) for a, x in zip(w.assets, w.w)))
    out.csv(f"oos_returns_{name}.csv", ["date", "return"], zip(res.dates, res.returns))
    wealth = [res.wealth(r) for r in rates]
    dates = ("start", *res.dates)
    out.csv(f"wealth_{name}.csv", ["day", "date", *(f"wealth_tc{r!r}" for r in rates)],
            ((t, d, *(wc[t] for wc in wealth)) for t, d in enumerate(dates)))


def cmd_backtest(cfg: RunConfig, out: Writer) -> None:
    panel, index = _load_returns(cfg)
    strategies = cfg.strategy_list()
    results = run_backtests(panel, strategies, cfg.window_spec, cfg.topo,
                            tc_rate=cfg.tc_rate[0], index_returns=index, seed=cfg.seed)
    summary = {"config": _config_summary(cfg), "windows": None, "strategies": {},
               "order": [s.name for s in strategies]}
    metrics = {}
    for s in strategies:
        res = results[s.name]
        _write_backtest(s.name, res, cfg.tc_rate, out)
        summary["windows"] = len(res.weights)
        metrics[s.name] = strategy_metrics(res.returns, res.avg_turnover, res.avg_assets,
                                           cfg.alpha, 0.0, cfg.topo)
        summary["strategies"][s.name] = {
            "model": s.model,
            "params": s.params,
            "files": {
                "weights": f"weights_{s.name}.csv",
                "oos_returns": f"oos_returns_{s.name}.csv",
                "wealth": f"wealth_{s.name}.csv",
            },
            "turnovers": res.turnovers,
            "final_wealth": {repr(r): float(res.wealth(r)[-1]) for r in cfg.tc_rate},
            "metrics": metrics[s.name],
        }
    out.csv("metrics.csv", ["strategy", *next(iter(metrics.values())).keys()],
            ([n, *row.values()] for n, row in metrics.items()))
    out.json("summary.json", summary)


def _config_summary(cfg: RunConfig) -> dict:
    keys = ("data", "index", "in_len", "out_len", "shift", "sub_len", "hop", "tau", "dim", "p",
            "k_max", "grid_len", "alpha", "tc_rate", "seed")
    d = {k: getattr(cfg, k) for k in keys}
    d["k_max"] = "all" if cfg.k_max is None else cfg.k_max
    return d


def _read_summary(cfg: RunConfig) -> tuple[dict, dict[str, np.ndarray]]:
    base = Path(cfg.out_dir)
    path = base / "summary.json"
    if not path.exists():
        raise CLIError(f"{path} not found; run the backtest first")
    summary = json.loads(path.read_text(encoding="utf-8"))
    # JSON keys are sorted on disk; restore the configured strategy order
    summary["strategies"] = {n: summary["strategies"][n] for n in summary["order"]}
    returns = {}
    for name, info in summary["strategies"].items():
        with (base / info["files"]["oos_returns"]).open(newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        returns[name] = np.array([float(r["return"]) for r in rows])
    return summary, returns


def _tests(cfg: RunConfig, summary: dict, returns: dict) -> dict:
    reference = cfg.reference or ("tda-po" if "tda-po" in returns else next(iter(returns)))
    baseline = cfg.baseline if cfg.baseline in returns else None
    return significance(returns, reference, baseline, summary["config"]["alpha"],
                        cfg.sharpe_confidence, cfg.risk_confidence), reference, baseline


def cmd_report(cfg: RunConfig, out: Writer) -> None:
    summary, returns = _read_summary(cfg)
    tests, reference, baseline = _tests(cfg, summary, returns)
    table = {}
    for name, info in summary["strategies"].items():
        table[name] = {**info["metrics"], **tests[name]}
    out.json("report.json", {"reference": reference, "baseline": baseline,
                             "sharpe_confidence": cfg.sharpe_confidence,
                             "risk_confidence": cfg.risk_confidence, "strategies": table})
    columns = sorted({c for row in table.values() for c in row},
                     key=lambda c: (c not in next(iter(summary["strategies"].values()))["metrics"], c))
    out.csv("report.csv", ["strategy", *columns],
            ([n, *(row.get(c) for c in columns)] for n, row in table.items()))


def cmd_compare(cfg: RunConfig, out: Writer) -> None:
    summary, returns = _read_summary(cfg)
    if len(returns) < 2:
        raise CLIError("compare needs at least two strategies")
    tests, _, _ = _tests(cfg, summary, returns)
    metrics = {n: info["metrics"] for n, info in summary["strategies"].items()}
    rows = compare_table(metrics, tests)
    header = list(rows[0].keys())
    out.csv("compare.csv", header, ([row.get(h) for h in header] for row in rows))


COMMANDS = {
    "ingest": cmd_ingest,
    "risk": cmd_risk,
    "optimize": cmd_optimize,
    "backtest": cmd_backtest,
    "compare": cmd_compare,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--config", default=None, help="YAML run configuration")
    common.add_argument("--data", default=S, help="price CSV (date column + tickers)")
    common.add_argument("--index", default=S, help="column holding the benchmark index")
    common.add_argument("--in-len", default=S, type=int)
    common.add_argument("--out-len", default=S, type=int)
    common.add_argument("--shift", default=S, type=int)
    common.add_argument("--sub-len", default=S, type=int)
    common.add_argument("--hop", default=S, type=int)
    common.add_argument("--tau", default=S, type=int)
    common.add_argument("--dim", default=S, type=int)
    common.add_argument("--p", default=S, type=float)
    common.add_argument("--k-max", default=S, help="landscape depth or 'all'")
    common.add_argument("--grid-len", default=S, type=int)
    common.add_argument("--model", default=S,
                        help=f"comma-separated models: {','.join(MODEL_NAMES)},index")
    common.add_argument("--k", default=S, type=int, help="cardinality for tda-ipo")
    common.add_argument("--alpha", default=S, type=float)
    common.add_argument("--omega-threshold", default=S, type=float)
    common.add_argument("--samples", default=S, type=int, help="Sharpe random-search samples")
    common.add_argument("--tc-rate", default=S, help="comma-separated transaction-cost rates")
    common.add_argument("--seed", default=S, type=int)
    common.add_argument("--out-dir", default=S)
    common.add_argument("--window", default=S, type=int, help="in-sample window for risk/optimize")
    common.add_argument("--reference", default=S, help="strategy tested against the others")
    common.add_argument("--baseline", default=S, help="strategy for the risk tests")
    common.add_argument("--dump-diagrams", default=S, action="store_true")
    common.add_argument("--overwrite", default=S, action="store_true")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="toporisk", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config")
    verbose = args.pop("verbose")
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(config_path, args)
        out = Writer(cfg.out_dir, cfg.overwrite)
        COMMANDS[command](cfg, out)
    except (CLIError, ValueError, RuntimeError, OSError) as exc:
        print(f"toporisk {command}: error: {exc}", file=sys.stderr)
        return 1
    for path in out.written:
        logger.info("wrote %s", path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
