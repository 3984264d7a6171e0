"""Rolling-window comparison of every strategy on a synthetic panel.

Prints the out-of-sample metric table and the final wealth at each cost rate.
Writes nothing unless ``--out`` is given (then the CLI artifacts go there).
"""

import argparse

from toporisk.backtest import Strategy, run_backtests
from toporisk.cli import main as cli_main
from toporisk.market_data import WindowSpec, compute_returns
from toporisk.report import strategy_metrics
from toporisk.synthetic import synthetic_prices, write_prices_csv
from toporisk.topo_risk import TopoRiskConfig

STRATEGIES = [
    Strategy("tda-po"), Strategy("tda-ipo", {"k": 5}), Strategy("tda-ipo", {"k": 10}),
    Strategy("gmv"), Strategy("mv"), Strategy("mcvar"), Strategy("sharpe"),
    Strategy("starr"), Strategy("omega"), Strategy("naive"), Strategy("index"),
]


def fmt(v):
    return "n/a" if v is None else f"{v:.4g}"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--assets", type=int, default=20)
    ap.add_argument("--days", type=int, default=800)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tc-rate", type=float, nargs="+", default=[0.0, 0.003])
    ap.add_argument("--out", help="also run the CLI pipeline into this directory")
    args = ap.parse_args()

    prices = synthetic_prices(args.assets, args.days, args.seed)
    panel = compute_returns(prices)
    index = panel.column("INDEX")
    panel = panel.select([a for a in panel.assets if a != "INDEX"])
    topo = TopoRiskConfig()
    results = run_backtests(panel, STRATEGIES, WindowSpec(), topo, index_returns=index, seed=args.seed)

    cols = ["emr", "stdev", "cvar_alpha", "sharpe", "sortino", "ptr", "turnover", "assets"]
    print(f"{'strategy':<12}" + "".join(f"{c:>12}" for c in cols)
          + "".join(f"{'W@' + str(r):>12}" for r in args.tc_rate))
    for name, res in results.items():
        row = strategy_metrics(res.returns, res.avg_turnover, res.avg_assets, topo_cfg=topo)
        print(f"{name:<12}" + "".join(f"{fmt(row[c]):>12}" for c in cols)
              + "".join(f"{res.wealth(r)[-1]:>12.4f}" for r in args.tc_rate))

    if args.out:
        data = write_prices_csv(prices, f"{args.out}/prices.csv")
        base = ["--data", str(data), "--index", "INDEX", "--out-dir", args.out,
                "--seed", str(args.seed)]
        models = "tda-po,gmv,mv,mcvar,sharpe,starr,omega,naive,index"
        rates = ",".join(map(str, args.tc_rate))
        for argv in (["backtest", *base, "--model", models, "--tc-rate", rates],
                     ["report", *base], ["compare", *base]):
            if cli_main(argv) != 0:
                raise SystemExit(1)
        print(f"CLI artifacts in {args.out}")


if __name__ == "__main__":
    main()
