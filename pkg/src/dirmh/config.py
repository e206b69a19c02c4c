"""Experiment configuration: JSON document -> validated dataclasses.

Every level rejects unknown keys; errors carry the dotted path of the field.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .adaptive import AdaptState
from .exceptions import ConfigError
from .geometry import ProposalShape
from .kernels import Flavor, KernelConfig
from .targets import (
    Family,
    GlmData,
    GlmPosterior,
    TargetDensity,
    banana_target,
    gaussian_target,
    load_glm_csv,
    simulate_glm_data,
)

MAX_SEED = 2**64


@dataclass(frozen=True)
class TargetSpec:
    kind: str
    params: dict
    base_dir: Optional[str] = None

    def build(self) -> TargetDensity:
        p = self.params
        if self.kind == "gaussian":
            return gaussian_target(p["mean"], p["cov"])
        if self.kind == "banana":
            return banana_target(p["B"], p["d"])
        return GlmPosterior(self.glm_data())

    def glm_data(self) -> GlmData:
        p = self.params
        if "csv" in p:
            path = Path(p["csv"])
            if self.base_dir is not None and not path.is_absolute():
                path = Path(self.base_dir) / path
            return load_glm_csv(path, p["family"], phi=p["dispersion"], v_beta=p["v_beta"], v_u=p["v_u"])
        sim = p["simulate"]
        data = simulate_glm_data(np.random.default_rng(sim["seed"]), p["family"], n=sim["n"], p=sim["p"],
                                 v_beta=p["v_beta"], v_u=p["v_u"], coef_bound=sim["coef_bound"])
        if p["dispersion"] != 1.0:
            data = GlmData(data.X, data.y, data.family, p["dispersion"], data.v_beta, data.v_u)
        return data

    @property
    def dim(self) -> int:
        p = self.params
        if self.kind == "gaussian":
            return len(p["mean"])
        if self.kind == "banana":
            return p["d"]
        if "simulate" in p:
            return p["simulate"]["p"] + 1
        return self.glm_data().p + 1


@dataclass(frozen=True)
class KernelSpec:
    label: str
    config: KernelConfig
    adaptive: bool = False


@dataclass(frozen=True)
class AdaptationSpec:
    enabled: bool = True
    a: float = 0.45
    batch_size: int = 100
    M: float = 2.0
    log_sigma: Optional[float] = None

    def initial_state(self) -> AdaptState:
        ls = self.M if self.log_sigma is None else self.log_sigma
        return AdaptState(log_sigma=ls, M=self.M, target_rate=self.a, batch_size=self.batch_size)


@dataclass(frozen=True)
class ExperimentConfig:
    target: TargetSpec
    kernels: tuple
    seeds: tuple
    n_steps: int
    burn_in: int = 0
    thin: int = 1
    x0: Optional[tuple] = None
    adaptation: AdaptationSpec = field(default_factory=AdaptationSpec)
    batch_size: Optional[int] = None
    output_dir: str = "out"

    def start(self) -> np.ndarray:
        if self.x0 is not None:
            return np.array(self.x0, dtype=float)
        return np.zeros(self.target.dim)


# ---------------------------------------------------------------- validation

def _obj(value, path) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(path, "must be an object")
    return value


def _no_unknown(obj: dict, allowed, path) -> None:
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}" if path else key, "is not a recognised field")


def _require(obj: dict, key, path):
    if key not in obj:
        raise ConfigError(f"{path}.{key}" if path else key, "is required")
    return obj[key]


def _join(path, key):
    return f"{path}.{key}" if path else key


def _number(obj, key, path, default=None, *, positive=False, nonneg=False, required=False):
    p = _join(path, key)
    if key not in obj:
        if required:
            raise ConfigError(p, "is required")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(p, "must be a finite number")
    if positive and not v > 0:
        raise ConfigError(p, "must be > 0")
    if nonneg and not v >= 0:
        raise ConfigError(p, "must be >= 0")
    return float(v)


def _integer(obj, key, path, default=None, *, minimum=None, required=False):
    p = _join(path, key)
    if key not in obj:
        if required:
            raise ConfigError(p, "is required")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(p, "must be an integer")
    if minimum is not None and v < minimum:
        raise ConfigError(p, f"must be >= {minimum}")
    return v


def _vector(value, path) -> list:
    if not isinstance(value, list) or not value:
        raise ConfigError(path, "must be a non-empty list of numbers")
    for i, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ConfigError(f"{path}[{i}]", "must be a finite number")
    return [float(v) for v in value]


def _parse_target(raw, base_dir) -> TargetSpec:
    path = "target"
    raw = _obj(raw, path)
    kind = _require(raw, "kind", path)
    if kind == "gaussian":
        _no_unknown(raw, {"kind", "mean", "cov", "d"}, path)
        if "d" in raw:
            if "mean" in raw or "cov" in raw:
                raise ConfigError(path, "give either d or mean/cov")
            d = _integer(raw, "d", path, minimum=1)
            mean, cov = [0.0] * d, np.eye(d).tolist()
        else:
            mean = _vector(_require(raw, "mean", path), f"{path}.mean")
            cov_raw = _require(raw, "cov", path)
            if not isinstance(cov_raw, list) or len(cov_raw) != len(mean):
                raise ConfigError(f"{path}.cov", f"must be a {len(mean)}x{len(mean)} matrix")
            cov = [_vector(row, f"{path}.cov[{i}]") for i, row in enumerate(cov_raw)]
            if any(len(row) != len(mean) for row in cov):
                raise ConfigError(f"{path}.cov", f"must be a {len(mean)}x{len(mean)} matrix")
        spec = TargetSpec("gaussian", {"mean": mean, "cov": cov})
        try:
            spec.build()
        except ValueError as err:
            raise ConfigError(f"{path}.cov", str(err)) from err
        return spec
    if kind == "banana":
        _no_unknown(raw, {"kind", "B", "d"}, path)
        B = _number(raw, "B", path, positive=True, required=True)
        d = _integer(raw, "d", path, 2, minimum=2)
        return TargetSpec("banana", {"B": B, "d": d})
    if kind == "glm":
        _no_unknown(raw, {"kind", "family", "csv", "simulate", "dispersion", "v_beta", "v_u"}, path)
        fam = _require(raw, "family", path)
        try:
            family = Family.parse(fam).value
        except ValueError as err:
            raise ConfigError(f"{path}.family", "must be one of Normal, Bernoulli, Poisson") from err
        params: dict[str, Any] = {
            "family": family,
            "dispersion": _number(raw, "dispersion", path, 1.0, positive=True),
            "v_beta": _number(raw, "v_beta", path, 100.0, positive=True),
            "v_u": _number(raw, "v_u", path, 100.0, positive=True),
        }
        if ("csv" in raw) == ("simulate" in raw):
            raise ConfigError(path, "needs exactly one of csv or simulate")
        if "csv" in raw:
            if not isinstance(raw["csv"], str):
                raise ConfigError(f"{path}.csv", "must be a path string")
            csv_path = Path(raw["csv"])
            if base_dir is not None and not csv_path.is_absolute():
                csv_path = Path(base_dir) / csv_path
            if not csv_path.is_file():
                raise ConfigError(f"{path}.csv", f"file not found: {csv_path}")
            params["csv"] = raw["csv"]
        else:
            sp = f"{path}.simulate"
            sim = _obj(raw["simulate"], sp)
            _no_unknown(sim, {"n", "p", "seed", "coef_bound"}, sp)
            params["simulate"] = {
                "n": _integer(sim, "n", sp, 100, minimum=1),
                "p": _integer(sim, "p", sp, 5, minimum=1),
                "seed": _integer(sim, "seed", sp, 0, minimum=0),
                "coef_bound": _number(sim, "coef_bound", sp, 1.0, positive=True),
            }
        spec = TargetSpec("glm", params, None if base_dir is None else str(base_dir))
        if "csv" in params:
            try:
                spec.glm_data()
            except ValueError as err:
                raise ConfigError(f"{path}.csv", str(err)) from err
        return spec
    raise ConfigError(f"{path}.kind", "must be one of gaussian, banana, glm")


def _parse_kernel(raw, i) -> KernelSpec:
    path = f"kernels[{i}]"
    raw = _obj(raw, path)
    _no_unknown(raw, {"label", "flavor", "h", "s", "t", "gradient_step", "adaptive"}, path)
    label = _require(raw, "label", path)
    if not isinstance(label, str) or not label or "/" in label or label in (".", ".."):
        raise ConfigError(f"{path}.label", "must be a non-empty name without '/'")
    flavor_raw = _require(raw, "flavor", path)
    try:
        flavor = Flavor(str(flavor_raw).upper())
    except ValueError as err:
        raise ConfigError(f"{path}.flavor", "must be one of DMH, MALA, RWMH") from err
    h = _number(raw, "h", path, None, nonneg=True)
    s = _number(raw, "s", path, None, positive=True)
    t = _number(raw, "t", path, None, positive=True)
    step = _number(raw, "gradient_step", path, None, positive=True)
    adaptive = raw.get("adaptive", False)
    if not isinstance(adaptive, bool):
        raise ConfigError(f"{path}.adaptive", "must be true or false")
    if flavor is Flavor.DMH:
        h = 0.0 if h is None else h
        s = 1.0 if s is None else s
        if t is None:
            raise ConfigError(f"{path}.t", "is required")
        config = KernelConfig(flavor, ProposalShape(h=h, s=s, t=t), step)
    elif flavor is Flavor.MALA:
        if h is None:
            raise ConfigError(f"{path}.h", "is required")
        if h <= 0:
            raise ConfigError(f"{path}.h", "must be > 0")
        if s is not None and s != 1.0:
            raise ConfigError(f"{path}.s", "must be 1 for MALA")
        if t is not None and t != h * h:
            raise ConfigError(f"{path}.t", "must equal h**2 for MALA (or be omitted)")
        config = KernelConfig.mala(h, step)
    else:
        if h not in (None, 0.0):
            raise ConfigError(f"{path}.h", "must be 0 for RWMH")
        if s not in (None, 1.0):
            raise ConfigError(f"{path}.s", "must be 1 for RWMH")
        if t is None:
            raise ConfigError(f"{path}.t", "is required")
        config = KernelConfig.rwmh(t)
    return KernelSpec(label, config, adaptive)


def _parse_adaptation(raw) -> AdaptationSpec:
    path = "adaptation"
    raw = _obj(raw, path)
    _no_unknown(raw, {"enabled", "a", "batch_size", "M", "log_sigma"}, path)
    enabled = raw.get("enabled", True)
    if not isinstance(enabled, bool):
        raise ConfigError(f"{path}.enabled", "must be true or false")
    a = _number(raw, "a", path, 0.45)
    if not 0 < a < 1:
        raise ConfigError(f"{path}.a", "must be in (0, 1)")
    M = _number(raw, "M", path, 2.0, positive=True)
    ls = _number(raw, "log_sigma", path, None)
    if ls is not None and abs(ls) > M:
        raise ConfigError(f"{path}.log_sigma", "must lie in [-M, M]")
    return AdaptationSpec(enabled, a, _integer(raw, "batch_size", path, 100, minimum=1), M, ls)


TOP_KEYS = {"target", "kernels", "seeds", "n_steps", "burn_in", "thin", "x0", "adaptation",
            "batch_size", "output_dir"}


def parse_config(text: str, base_dir=None) -> ExperimentConfig:
    """Parse and validate a JSON experiment document.

    ``base_dir`` resolves relative CSV paths (normally the config file's directory).
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError("<document>", f"is not valid JSON: {err}") from err
    raw = _obj(raw, "<document>")
    _no_unknown(raw, TOP_KEYS, "")
    target = _parse_target(_require(raw, "target", ""), base_dir)

    kernels_raw = _require(raw, "kernels", "")
    if not isinstance(kernels_raw, list) or not kernels_raw:
        raise ConfigError("kernels", "must be a non-empty list")
    kernels = tuple(_parse_kernel(k, i) for i, k in enumerate(kernels_raw))
    labels = [k.label for k in kernels]
    if len(set(labels)) != len(labels):
        raise ConfigError("kernels", "labels must be unique")

    seeds_raw = _require(raw, "seeds", "")
    if not isinstance(seeds_raw, list) or not seeds_raw:
        raise ConfigError("seeds", "must be a non-empty list")
    for i, s in enumerate(seeds_raw):
        if isinstance(s, bool) or not isinstance(s, int) or not 0 <= s < MAX_SEED:
            raise ConfigError(f"seeds[{i}]", "must be an integer in [0, 2**64)")
    if len(set(seeds_raw)) != len(seeds_raw):
        raise ConfigError("seeds", "must be distinct")

    n_steps = _integer(raw, "n_steps", "", required=True, minimum=1)
    burn_in = _integer(raw, "burn_in", "", 0, minimum=0)
    thin = _integer(raw, "thin", "", 1, minimum=1)
    if burn_in >= n_steps:
        raise ConfigError("burn_in", "must be < n_steps")

    x0 = None
    if "x0" in raw:
        x0 = tuple(_vector(raw["x0"], "x0"))
        if len(x0) != target.dim:
            raise ConfigError("x0", f"must have length {target.dim}")

    adaptation = _parse_adaptation(raw["adaptation"]) if "adaptation" in raw else AdaptationSpec()
    if adaptation.enabled and any(k.adaptive for k in kernels) and n_steps < adaptation.batch_size:
        raise ConfigError("n_steps", "must cover at least one adaptation batch")

    out = raw.get("output_dir", "out")
    if not isinstance(out, str) or not out:
        raise ConfigError("output_dir", "must be a non-empty path string")

    return ExperimentConfig(
        target=target,
        kernels=kernels,
        seeds=tuple(seeds_raw),
        n_steps=n_steps,
        burn_in=burn_in,
        thin=thin,
        x0=x0,
        adaptation=adaptation,
        batch_size=_integer(raw, "batch_size", "", None, minimum=1),
        output_dir=out,
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(str(path), f"cannot be read: {err}") from err
    return parse_config(text, base_dir=path.parent)
