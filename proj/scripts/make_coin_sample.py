"""Write data/coin_sample.csv: seeded synthetic daily closes for 8 coins.

The series are simulated, not market data. Returns follow a small VAR(2)
with a common market factor so the dependency network has structure.
"""
import argparse
import datetime as dt

import numpy as np

SYMBOLS = ["BTC", "ETH", "XRP", "LTC", "BCH", "EOS", "BNP", "XLM"]


def simulate(rows: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    d = len(SYMBOLS)
    a1 = np.zeros((d, d))
    a2 = np.zeros((d, d))
    a1[1, 0] = 0.15
    a1[6, 6] = -0.12
    a2[1, 1] = 0.10
    a2[6, 1] = 0.08
    a1[3, 0] = 0.10
    load = rng.uniform(0.4, 0.9, d)
    load[0] = 1.0
    r = np.zeros((rows + 2, d))
    for t in range(2, rows + 2):
        market = rng.standard_normal()
        eps = rng.standard_normal(d)
        r[t] = a1 @ r[t - 1] + a2 @ r[t - 2] + 0.03 * (load * market + 0.8 * eps)
    r = np.clip(r[2:], -0.5, 0.5)
    start = rng.uniform(0.2, 5000.0, d)
    return start * np.exp(np.cumsum(r, axis=0))


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=1090)
    ap.add_argument("--seed", type=int, default=20171004)
    ap.add_argument("--out", default="data/coin_sample.csv")
    args = ap.parse_args()
    prices = simulate(args.rows, args.seed)
    day0 = dt.date(2017, 10, 4)
    with open(args.out, "w", newline="\n") as f:
        f.write("date," + ",".join(SYMBOLS) + "\n")
        for i, row in enumerate(prices):
            day = day0 + dt.timedelta(days=i)
            f.write(day.isoformat() + "," + ",".join(f"{v:.6f}" for v in row) + "\n")


if __name__ == "__main__":
    main()
