#!/usr/bin/env python3
"""Writes the synthetic fixture used by the CLI tests and the determinism check.

Layout: truth.csv, bundles/<model>/fold_<k>.csv, config.json. Output is a pure
function of --seed, so the checked-in copy can be regenerated byte for byte.
"""
import argparse
import json
import math
import random
from pathlib import Path

PERIOD = 24
LENGTH = PERIOD * 14
FOLDS = 5
HORIZON = 24
LEVELS = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
# standard normal quantiles for LEVELS
Z = [-1.2815515655, -0.8416212336, -0.5244005127, -0.2533471031, 0.0,
     0.2533471031, 0.5244005127, 0.8416212336, 1.2815515655]


def truth_series(rng):
    out = []
    for t in range(LENGTH):
        trend = 50.0 + 0.05 * t
        season = 8.0 * math.sin(2 * math.pi * t / PERIOD) + 3.0 * math.cos(4 * math.pi * t / PERIOD)
        out.append(trend + season + rng.gauss(0.0, 1.0))
    return out


def member_forecasts(rng, y, start):
    """Three members with different strengths over the window [start, start + HORIZON)."""
    hist = y[:start]
    level = sum(hist[-PERIOD:]) / PERIOD
    slope = (sum(hist[-PERIOD:]) - sum(hist[-2 * PERIOD:-PERIOD])) / PERIOD / PERIOD
    seasonal, trend, naive = [], [], []
    for h in range(HORIZON):
        t = start + h
        season = 8.0 * math.sin(2 * math.pi * t / PERIOD) + 3.0 * math.cos(4 * math.pi * t / PERIOD)
        # seasonal member: right shape, stale level
        seasonal.append(level + season + rng.gauss(0.0, 0.6))
        # trend member: follows the drift, damped seasonality
        trend.append(level + slope * (h + PERIOD / 2) + 0.6 * season + rng.gauss(0.0, 0.6))
        naive.append(hist[-1] + rng.gauss(0.0, 0.3))
    return {"seasonal_net": (seasonal, 1.2), "trend_net": (trend, 1.5), "naive": (naive, 6.0)}


def write_fold(path, point, sigma):
    path.parent.mkdir(parents=True, exist_ok=True)
    header = "step,point," + ",".join(f"q_{lv:g}" for lv in LEVELS)
    rows = [header]
    for h, p in enumerate(point):
        qs = ",".join(f"{p + z * sigma:.6f}" for z in Z)
        rows.append(f"{h},{p:.6f},{qs}")
    path.write_text("\n".join(rows) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "tests" / "fixtures")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)

    y = truth_series(rng)
    (out / "truth.csv").write_text(
        "timestamp,value\n" + "".join(f"{t},{v:.6f}\n" for t, v in enumerate(y)))

    last_end = LENGTH - HORIZON
    for k in range(FOLDS):
        start = last_end - (FOLDS - 1 - k) * HORIZON
        for model, (point, sigma) in member_forecasts(rng, y, start).items():
            write_fold(out / "bundles" / model / f"fold_{k}.csv", point, sigma)

    config = {
        "datasets": [{
            "name": "synthetic",
            "description": "hourly synthetic load with daily seasonality and slow drift",
            "domain": "energy",
            "series": "truth.csv",
            "bundles": "bundles",
            "period": PERIOD,
            "folds": FOLDS,
            "horizon": HORIZON,
        }],
        "models": [
            {"id": "seasonal_net", "tags": ["seasonal"], "description": "seasonal pattern specialist"},
            {"id": "trend_net", "tags": ["trend"], "description": "trend follower"},
            {"id": "naive", "tags": [], "description": "last-value baseline"},
        ],
        "metric_pool": ["mse", "mae", "smape"],
        "judge": {"kind": "rule"},
        "output_dir": "out",
        "seed": args.seed,
    }
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n")


if __name__ == "__main__":
    main()
