"""Run every (kernel, seed) pair of an experiment and write the artifact tree.

Layout under the output directory::

    summary.csv
    <label>/seed-<seed>/chain.csv, report.json, trace.svg, acf.svg
    <label>/seed-<seed>/adaptation.csv, sigma.svg      (adaptive kernels only)
"""

from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

from .adaptive import run_adaptive_chain
from .config import ExperimentConfig
from .diagnostics import diagnose
from .exceptions import ExperimentFailed, IoError
from .io import emit_chain_csv
from .kernels import run_chain
from .plots import acf_svg, sigma_svg, trace_svg

log = logging.getLogger(__name__)

THREADS_ENV = "DIRMH_THREADS"


def run_dir(out_dir, label: str, seed: int) -> Path:
    return Path(out_dir) / label / f"seed-{seed}"


def _run_one(config: ExperimentConfig, k: int, seed: int, out_dir: str, plots: bool) -> dict:
    spec = config.kernels[k]
    row = {"label": spec.label, "seed": seed}
    try:
        target = config.target.build()
        x0 = config.start()
        adaptive = spec.adaptive and config.adaptation.enabled
        if adaptive:
            chain, trace = run_adaptive_chain(seed, target, spec.config, config.adaptation.initial_state(), x0,
                                              config.n_steps, config.burn_in, config.thin)
        else:
            chain, trace = run_chain(seed, target, spec.config, x0, config.n_steps, config.burn_in,
                                     config.thin), None
        report = diagnose(chain.states, chain.acceptance_rate, config.batch_size)
        where = run_dir(out_dir, spec.label, seed)
        where.mkdir(parents=True, exist_ok=True)
        emit_chain_csv(chain, where / "chain.csv")
        (where / "report.json").write_text(report.to_json())
        if trace is not None:
            trace.write_csv(where / "adaptation.csv")
        if plots:
            trace_svg(chain.states, where / "trace.svg")
            acf_svg(chain.states, where / "acf.svg")
            if trace is not None:
                sigma_svg(trace, where / "sigma.svg")
    except Exception as err:  # one failed run must not abort the others
        log.error("run %s seed=%s failed: %s", spec.label, seed, err)
        row["error"] = f"{type(err).__name__}: {err}"
        return row
    row["report"] = report.to_dict()
    return row


def _workers(requested: Optional[int]) -> int:
    if requested is not None:
        return max(1, requested)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer %s=%r", THREADS_ENV, env)
    return 1


def _fmt(v) -> str:
    return "" if v is None else repr(v)


def write_summary(rows, dim: int, path) -> None:
    header = ["label", "seed", "status", "acceptance", "mess", "msjd"]
    header += [f"ess_{j + 1}" for j in range(dim)] + [f"iact_{j + 1}" for j in range(dim)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            rep = row.get("report")
            if rep is None:
                w.writerow([row["label"], row["seed"], "error"] + [""] * (len(header) - 3))
                continue
            w.writerow([row["label"], row["seed"], "ok", _fmt(rep["acceptance_rate"]), _fmt(rep["mess"]),
                        _fmt(rep["msjd"])] + [_fmt(v) for v in rep["ess"]] + [_fmt(v) for v in rep["iact"]])


def run_experiment(config: ExperimentConfig, out_dir=None, workers: Optional[int] = None,
                   plots: bool = True) -> list:
    """Run all pairs, write the tree, and return one summary row per pair.

    Raises :class:`ExperimentFailed` after writing everything if any run failed.
    """
    out = Path(config.output_dir if out_dir is None else out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as err:
        raise IoError(f"output directory {out} is not writable: {err}") from err

    jobs = [(k, seed) for k in range(len(config.kernels)) for seed in config.seeds]
    n_workers = min(_workers(workers), len(jobs))
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            futures = [pool.submit(_run_one, config, k, seed, str(out), plots) for k, seed in jobs]
            rows = [f.result() for f in futures]
    else:
        rows = [_run_one(config, k, seed, str(out), plots) for k, seed in jobs]

    write_summary(rows, config.target.dim, out / "summary.csv")
    failures = [(r["label"], r["seed"], r["error"]) for r in rows if "error" in r]
    if failures:
        raise ExperimentFailed(failures)
    return rows
