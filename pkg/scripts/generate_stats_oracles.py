#!/usr/bin/env python3
"""Regenerate the frozen statistics oracle fixtures.

Runs an independent reference implementation (scipy.stats) over fixed
datasets and freezes its outputs into tests/fixtures/stats_oracles.json.
The test suite never imports scipy; it compares the package's own
implementations against these recorded values.  Re-run only when the
fixture set itself changes:

    pip install .[oracle]
    python scripts/generate_stats_oracles.py
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

import scipy
from scipy import stats as sps

FIXTURE_PATH = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "stats_oracles.json"

# Implementation switch point mirrored by the generator: exact signed-rank
# distribution up to this n (without ties), normal approximation beyond.
WILCOXON_EXACT_MAX_N = 25


def paired_t_datasets() -> list[dict]:
    rng = random.Random(1001)
    datasets = [
        {
            "name": "hand-3pairs",
            "x": [1.0, 2.0, 3.0],
            "y": [2.0, 4.0, 5.0],
        }
    ]
    for idx, n in enumerate([5, 12, 29, 29, 60, 100]):
        x = [round(rng.gauss(5.0, 1.2), 6) for _ in range(n)]
        y = [round(v + rng.gauss(0.5, 0.9), 6) for v in x]
        datasets.append({"name": f"random-n{n}-{idx}", "x": x, "y": y})
    out = []
    for d in datasets:
        t, p = sps.ttest_rel(d["x"], d["y"])
        out.append({**d, "t": float(t), "p": float(p), "df": len(d["x"]) - 1})
    return out


def shapiro_datasets() -> list[dict]:
    rng = random.Random(2002)
    datasets = [
        # Classic worked sample: eleven adult weights, strongly right-skewed.
        {"name": "weights-11", "sample": [148, 154, 158, 160, 161, 162, 166, 170, 182, 195, 236]},
        {"name": "tiny-n3", "sample": [2.1, 3.4, 3.9]},
        {"name": "small-n7", "sample": [6.8, 5.1, 4.9, 5.6, 5.9, 6.2, 5.4]},
    ]
    for idx, n in enumerate([12, 20, 29, 29, 80, 500]):
        if idx % 2 == 0:
            sample = [round(rng.gauss(0, 1), 6) for _ in range(n)]
        else:  # skewed alternative so some fixtures reject normality
            sample = [round(rng.expovariate(1.0), 6) for _ in range(n)]
        datasets.append({"name": f"random-n{n}-{idx}", "sample": sample})
    out = []
    for d in datasets:
        res = sps.shapiro(d["sample"])
        out.append({**d, "W": float(res.statistic), "p": float(res.pvalue)})
    return out


def wilcoxon_datasets() -> list[dict]:
    rng = random.Random(3003)
    datasets = [
        {"name": "hand-123", "x": [11.0, 12.0, 13.0], "y": [10.0, 10.0, 10.0]},
    ]
    for idx, n in enumerate([6, 10, 14, 20, 25]):
        magnitudes = rng.sample(range(1, 400), n)  # distinct -> tie-free exact path
        diffs = [m if rng.random() < 0.7 else -m for m in magnitudes]
        datasets.append(
            {
                "name": f"exact-n{n}-{idx}",
                "x": [float(50 + d) for d in diffs],
                "y": [50.0] * n,
            }
        )
    for idx, n in enumerate([26, 35, 50, 80, 40]):
        x = [float(round(rng.gauss(5, 1.5))) for _ in range(n)]
        y = [float(round(v + rng.gauss(0.7, 1.3))) for v in x]
        pairs = [(a, b) for a, b in zip(x, y) if a != b]
        datasets.append(
            {
                "name": f"approx-n{len(pairs)}-{idx}",
                "x": [a for a, _ in pairs],
                "y": [b for _, b in pairs],
            }
        )
    out = []
    for d in datasets:
        diffs = [a - b for a, b in zip(d["x"], d["y"]) if a != b]
        tied = len(set(abs(v) for v in diffs)) != len(diffs)
        method = "exact" if len(diffs) <= WILCOXON_EXACT_MAX_N and not tied else "approx"
        res = sps.wilcoxon(d["x"], d["y"], method=method, correction=True)
        out.append(
            {**d, "method": method, "stat": float(res.statistic), "p": float(res.pvalue)}
        )
    return out


def main() -> int:
    payload = {
        "generator": "scripts/generate_stats_oracles.py",
        "reference": f"scipy {scipy.__version__}",
        "paired_t": paired_t_datasets(),
        "shapiro": shapiro_datasets(),
        "wilcoxon": wilcoxon_datasets(),
    }
    FIXTURE_PATH.parent.mkdir(parents=True, exist_ok=True)
    FIXTURE_PATH.write_text(json.dumps(payload, indent=2) + "\n")
    counts = {k: len(v) for k, v in payload.items() if isinstance(v, list)}
    print(f"wrote {FIXTURE_PATH} ({counts})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
