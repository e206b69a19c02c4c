"""Run a comparison config and print per-kernel medians over seeds.

    python3 scripts/kernel_table.py configs/glm_normal_tuned.json --out out/tuned

Columns: acceptance, mESS, MSJD, and per-coordinate ESS.  Values are medians
across seeds; failed runs are counted separately.
"""

import argparse
import csv
from collections import defaultdict
from pathlib import Path

import numpy as np

from dirmh.config import load_config
from dirmh.exceptions import ExperimentFailed
from dirmh.experiment import run_experiment


def _median(values):
    vals = [float(v) for v in values if v != ""]
    return float(np.median(vals)) if vals else float("nan")


def table(summary_path):
    with open(summary_path) as fh:
        rows = list(csv.DictReader(fh))
    by = defaultdict(list)
    for r in rows:
        by[r["label"]].append(r)
    ess_cols = [c for c in rows[0] if c.startswith("ess_")]
    header = ["kernel", "runs", "failed", "acceptance", "mESS", "MSJD"] + [c.replace("_", "") for c in ess_cols]
    lines = [header]
    for label, rs in by.items():
        ok = [r for r in rs if r["status"] == "ok"]
        line = [label, str(len(rs)), str(len(rs) - len(ok))]
        for col in ["acceptance", "mess", "msjd"] + ess_cols:
            line.append(f"{_median(r[col] for r in ok):.4g}")
        lines.append(line)
    widths = [max(len(row[i]) for row in lines) for i in range(len(header))]
    return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in lines)


def main(argv=None):
    parser = argparse.ArgumentParser(description="per-kernel median diagnostics for a config")
    parser.add_argument("config")
    parser.add_argument("--out", default=None)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--plots", action="store_true")
    args = parser.parse_args(argv)

    cfg = load_config(args.config)
    out = Path(args.out or cfg.output_dir)
    try:
        run_experiment(cfg, out, workers=args.workers, plots=args.plots)
    except ExperimentFailed as err:
        print(f"warning: {err}")
    print(table(out / "summary.csv"))


if __name__ == "__main__":
    main()
