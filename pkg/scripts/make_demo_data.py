#!/usr/bin/env python3
"""Generate the synthetic demo dataset (layout, engagement, grades, surveys).

    python scripts/make_demo_data.py --out demo-data --courses 180 --seed 7
"""

import argparse
import sys

from palm import demo


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo-data", help="target directory")
    parser.add_argument("--courses", type=int, default=180)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    paths = demo.write_demo_dataset(args.out, n_courses=args.courses, seed=args.seed)
    for name, path in sorted(paths.items()):
        print(f"{name:12s} {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
