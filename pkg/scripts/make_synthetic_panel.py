"""Write a synthetic price panel (one-factor model plus an INDEX column) to CSV."""

import argparse

from toporisk.synthetic import synthetic_prices, write_prices_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", help="destination CSV")
    ap.add_argument("--assets", type=int, default=20)
    ap.add_argument("--days", type=int, default=600)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--no-index", action="store_true")
    args = ap.parse_args()
    panel = synthetic_prices(args.assets, args.days, args.seed, with_index=not args.no_index)
    path = write_prices_csv(panel, args.out)
    print(f"wrote {path}: {len(panel.dates)} dates x {len(panel.assets)} columns")


if __name__ == "__main__":
    main()
