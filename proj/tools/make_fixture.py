#!/usr/bin/env python3
"""Generate data/synthetic_12.csv: eleven synthetic index series and unit cash.

The series are geometric random walks on weekdays from 2005-06-30 to
2015-06-30, normalised to 1 on the first day. Drifts and volatilities are
loose guesses at each asset class; the numbers are not market data. Output
is deterministic for a given seed.
"""

import argparse
import datetime as dt
import math
import random

# label, annual drift, annual volatility
ASSETS = [
    ("MSCI Emerging Market Stock", 0.06, 0.25),
    ("S&P 500", 0.07, 0.18),
    ("MSCI EAFE", 0.03, 0.20),
    ("Barclays High Yield", 0.065, 0.10),
    ("JPMorgan Emerging Markets Bond", 0.06, 0.09),
    ("iBoxx Liquid Investment Grade", 0.05, 0.07),
    ("Barclays Broad Bond", 0.045, 0.04),
    ("Barclays Inflation Linked Bond", 0.045, 0.06),
    ("DJ US Real Estate", 0.06, 0.28),
    ("DJ Global ex-US Select Real Estate", 0.04, 0.24),
    ("S&P GSCI Commodities", -0.05, 0.25),
]
CASH = "US Dollar"


def weekdays(start, end):
    day = start
    while day <= end:
        if day.weekday() < 5:
            yield day
        day += dt.timedelta(days=1)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=20050630)
    parser.add_argument("--output", default="data/synthetic_12.csv")
    args = parser.parse_args()

    rng = random.Random(args.seed)
    days = list(weekdays(dt.date(2005, 6, 30), dt.date(2015, 6, 30)))
    step = 1.0 / 260.0
    log_price = [0.0] * len(ASSETS)
    header = ["date"] + [label for label, _, _ in ASSETS] + [CASH + " #cash"]
    lines = [",".join(header)]
    for n, day in enumerate(days):
        if n > 0:
            for i, (_, mu, sigma) in enumerate(ASSETS):
                log_price[i] += (mu - 0.5 * sigma * sigma) * step + sigma * math.sqrt(step) * rng.gauss(0.0, 1.0)
        prices = ["%.10g" % math.exp(x) for x in log_price] + ["1"]
        lines.append(",".join([day.isoformat()] + prices))
    with open(args.output, "w", newline="\n") as out:
        out.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
