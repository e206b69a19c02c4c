"""Simulate a GLM data set and write it as CSV (columns y, x1..xp).

    python3 scripts/make_glm_data.py --family Bernoulli --seed 2024 --out data/bernoulli.csv
"""

import argparse
from pathlib import Path

import numpy as np

from dirmh.targets import Family, simulate_glm_data, write_glm_csv


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--family", choices=[f.value for f in Family], default="Normal")
    parser.add_argument("--n", type=int, default=100)
    parser.add_argument("--p", type=int, default=5)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--coef-bound", type=float, default=1.0)
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)

    data = simulate_glm_data(np.random.default_rng(args.seed), args.family, n=args.n, p=args.p,
                             coef_bound=args.coef_bound)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_glm_csv(data, out)
    print(f"wrote {data.n} rows x {data.p} predictors to {out}")


if __name__ == "__main__":
    main()
