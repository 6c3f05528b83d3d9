#!/usr/bin/env python3
"""Regenerates the bundled synthetic market CSVs under data/markets/.

Six seeded regime-switching walks over shared weekday dates, written with
two-decimal closes. Directional regimes persist for a few weeks, which
concentrates the direction-tuple distributions on run patterns the way
daily index series do; a mild pull toward the starting level keeps the
absolute daily moves on a scale where a 0.4 rounding quantum is
meaningful across the whole file. The files are committed; rerun only
when changing the sample universe.
"""
import datetime
import math
import pathlib
import random

MARKETS = {
    "alpha": (110.0, 1),
    "bravo": (95.0, 2),
    "charlie": (210.0, 3),
    "delta": (55.0, 4),
    "echo": (150.0, 5),
    "foxtrot": (75.0, 6),
}
ROWS = 5000          # ~20 years of weekdays
SIGMA = 0.005        # per-day log volatility
REGIME_DRIFT = 0.0056
SWITCH_PROB = 0.05   # regime flips every ~20 trading days on average
REVERSION = 0.02


def weekdays(start, count):
    day = start
    out = []
    while len(out) < count:
        if day.weekday() < 5:
            out.append(day)
        day += datetime.timedelta(days=1)
    return out


def main():
    out_dir = pathlib.Path(__file__).resolve().parent.parent / "data" / "markets"
    out_dir.mkdir(parents=True, exist_ok=True)
    dates = weekdays(datetime.date(1990, 1, 1), ROWS)
    for symbol, (level, seed) in MARKETS.items():
        rng = random.Random(seed)
        close = level
        regime = 1 if rng.random() < 0.5 else -1
        rows = []
        for date in dates:
            rows.append(f"{date.isoformat()},{close:.2f}")
            if rng.random() < SWITCH_PROB:
                regime = -regime
            pull = -REVERSION * math.log(close / level)
            close *= math.exp(regime * REGIME_DRIFT + pull + SIGMA * rng.gauss(0.0, 1.0))
        path = out_dir / f"{symbol}.csv"
        path.write_text("date,close\n" + "\n".join(rows) + "\n")
        print(f"wrote {path} ({len(rows)} rows)")


if __name__ == "__main__":
    main()
