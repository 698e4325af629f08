"""Experiment orchestration: disorder-replicated runs with deterministic
parallelism and machine-readable outputs.

Every experiment is a pure function of (config, master seed): per-sample RNG
streams are keyed by (seed, experiment tag, running sample index), results
are collected in sample order, and output files carry no timestamps, so
re-running a config reproduces the output byte for byte at any worker count.
Floats are printed with 17 significant digits for lossless round-trips.
"""

import hashlib
import json
import math
import multiprocessing
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np
from scipy import stats as _st

from .analytic import clt_variance, interpolated_free_energy, sk_value, solve_r
from .exceptions import Degenerate, LocskValidationError
from .interpolation import default_grid, log_partition_at, sample_path
from .kernel import KernelSpec, default_kernel, load_kernel
from .lattice import LatticeBox
from .mcmc import run_replica_chain
from .model import (
    LOGZ_SITE_LIMIT,
    MOMENT_SITE_LIMIT,
    beta_derivative_residual,
    exact_log_partition,
    overlap_moments_exact,
    sample_disorder,
)
from .seeds import derive_seed

EXPERIMENT_KINDS = ("convergence", "clt", "overlap-decay", "derivative-check", "interp-check")
BETA_GUARD = 0.35


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    dim: int = 1
    kernel_file: Optional[str] = None
    beta: float = 0.2
    h: float = 0.3
    box_sizes: tuple = (2, 4, 8, 10)
    samples: int = 2000
    seed: int = 0
    workers: int = 1
    fmt: str = "csv"
    # heat-bath schedule, used when a box exceeds the exact-moment limit
    sweeps: int = 4000
    burn_in: int = 500
    thin: int = 2
    # interpolation check
    paths: int = 1000
    grid_points: int = 11
    allow_large_beta: bool = False
    quad_nodes: int = 61
    tol: float = 1e-12

    def __post_init__(self):
        object.__setattr__(self, "box_sizes", tuple(int(n) for n in self.box_sizes))

    def validate(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise LocskValidationError(f"unknown experiment kind {self.kind!r}")
        if self.beta > BETA_GUARD and not self.allow_large_beta:
            raise LocskValidationError(
                f"beta={self.beta} exceeds the high-temperature guard {BETA_GUARD}; "
                "pass allow_large_beta to override"
            )
        if self.beta < 0 or self.h < 0:
            raise LocskValidationError("beta and h must be >= 0")
        if self.samples < 1 or self.workers < 1:
            raise LocskValidationError("samples and workers must be >= 1")
        if self.fmt not in ("csv", "json"):
            raise LocskValidationError(f"format must be csv or json, got {self.fmt!r}")
        if not self.box_sizes:
            raise LocskValidationError("at least one box size is required")
        if self.kind in ("clt", "derivative-check", "interp-check") and len(self.box_sizes) != 1:
            raise LocskValidationError(f"{self.kind} runs at a single box size")
        spec = self.kernel()
        if spec.dim != self.dim:
            raise LocskValidationError(
                f"kernel dimension {spec.dim} does not match configured dim {self.dim}"
            )
        limit = {"convergence": LOGZ_SITE_LIMIT, "clt": LOGZ_SITE_LIMIT,
                 "derivative-check": MOMENT_SITE_LIMIT, "interp-check": LOGZ_SITE_LIMIT}
        if self.kind in limit:
            for n in self.box_sizes:
                box = LatticeBox(self.dim, n)
                if box.site_count > limit[self.kind]:
                    raise LocskValidationError(
                        f"box radius {n} has {box.site_count} sites, beyond the "
                        f"{self.kind} enumeration limit {limit[self.kind]}"
                    )
        if self.grid_points < 2:
            raise LocskValidationError("grid needs at least 2 points")
        return self

    def kernel(self) -> KernelSpec:
        return load_kernel(self.kernel_file) if self.kernel_file else default_kernel()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["box_sizes"] = list(self.box_sizes)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise LocskValidationError(f"unknown config keys: {sorted(extra)}")
        return cls(**d)

    def content_hash(self) -> str:
        """Hash of the scientific content; excludes workers/fmt so the same
        science hashes identically however it is executed."""
        d = self.to_dict()
        d.pop("workers")
        d.pop("fmt")
        d.pop("kernel_file")
        d["kernel_modes"] = [[list(k), g] for k, g in self.kernel().modes]
        blob = json.dumps(d, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    se_mean: float
    se_variance: float
    ks_distance: float
    degenerate: bool = False


def summarize(samples) -> SummaryStats:
    """Unbiased moment estimators plus a KS distance of the standardized
    sample against the standard normal."""
    x = np.asarray(samples, dtype=float)
    n = len(x)
    if n < 2:
        raise Degenerate(f"need at least 2 samples, got {n}")
    mean = float(x.mean())
    var = float(x.var(ddof=1))
    if var == 0.0:
        return SummaryStats(n=n, mean=mean, variance=0.0, skewness=0.0,
                            excess_kurtosis=0.0, se_mean=0.0, se_variance=0.0,
                            ks_distance=1.0, degenerate=True)
    skew = float(_st.skew(x, bias=False))
    kurt = float(_st.kurtosis(x, fisher=True, bias=False))
    ks = float(_st.kstest((x - mean) / math.sqrt(var), "norm").statistic)
    return SummaryStats(
        n=n, mean=mean, variance=var, skewness=skew, excess_kurtosis=kurt,
        se_mean=math.sqrt(var / n), se_variance=var * math.sqrt(2.0 / (n - 1)),
        ks_distance=ks,
    )


# ---------------------------------------------------------------------------
# parallel plumbing: top-level tasks, order-preserving map

def _pn_task(args):
    spec, dim, box_n, beta, h, seed = args
    disorder = sample_disorder(LatticeBox(dim, box_n), seed)
    return exact_log_partition(disorder, spec, beta, h)[1]

def _moment_exact_task(args):
    spec, dim, box_n, beta, h, r, seed = args
    disorder = sample_disorder(LatticeBox(dim, box_n), seed)
    return overlap_moments_exact(disorder, spec, beta, h, r).weighted_sum

def _moment_mcmc_task(args):
    spec, dim, box_n, beta, h, r, sweeps, burn_in, thin, dseed, cseed = args
    disorder = sample_disorder(LatticeBox(dim, box_n), dseed)
    est = run_replica_chain(disorder, spec, beta, h, r, sweeps, burn_in, thin, cseed)
    return est.weighted_sum

def _interp_task(args):
    spec, dim, box_n, beta, h, r, grid, p_targets, seed = args
    box = LatticeBox(dim, box_n)
    path = sample_path(box, np.asarray(grid), seed)
    n = box.site_count
    out = []
    for idx in range(len(grid)):
        logz = log_partition_at(path, idx, spec, beta, h, r)
        y = math.sqrt(n) * (logz / n - p_targets[idx])
        out.append((logz, y))
    return out


def _map_tasks(fn, tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (workers * 8))
    with multiprocessing.Pool(workers) as pool:
        return pool.map(fn, tasks, chunksize=chunk)


def _fit_slope(sizes, values):
    v = np.asarray(values, dtype=float)
    if np.any(v <= 0):
        return float("nan")
    return float(np.polyfit(np.log(np.asarray(sizes, float)), np.log(v), 1)[0])


# ---------------------------------------------------------------------------
# experiments

def run_convergence_experiment(config: ExperimentConfig) -> dict:
    """Mean exact free energy density per box size against the analytic limit."""
    config = replace(config, kind="convergence").validate()
    spec = config.kernel()
    p_limit = sk_value(math.sqrt(spec.gamma0) * config.beta, config.h,
                       nodes=config.quad_nodes, tol=config.tol)
    rows = []
    counter = 0
    for box_n in config.box_sizes:
        tasks = [
            (spec, config.dim, box_n, config.beta, config.h,
             derive_seed(config.seed, "convergence", counter + i))
            for i in range(config.samples)
        ]
        counter += config.samples
        pns = np.array(_map_tasks(_pn_task, tasks, config.workers))
        mean = float(pns.mean())
        se = float(pns.std(ddof=1) / math.sqrt(len(pns))) if len(pns) > 1 else 0.0
        rows.append({
            "box_n": box_n,
            "side": 2 * box_n + 1,
            "samples": config.samples,
            "mean_pn": mean,
            "se_pn": se,
            "p_analytic": p_limit,
            "abs_error": abs(mean - p_limit),
        })
    slope = _fit_slope([r["box_n"] for r in rows], [r["abs_error"] for r in rows])
    return _result(config, rows=rows, summary={"p_analytic": p_limit, "error_slope": slope})


def run_clt_experiment(config: ExperimentConfig) -> dict:
    """Distribution of the rescaled free-energy fluctuation at one box size."""
    config = replace(config, kind="clt").validate()
    spec = config.kernel()
    box_n = config.box_sizes[0]
    n = LatticeBox(config.dim, box_n).site_count
    p_limit = sk_value(math.sqrt(spec.gamma0) * config.beta, config.h,
                       nodes=config.quad_nodes, tol=config.tol)
    tau_hat, tau = clt_variance(config.beta, config.h, spec.gamma0,
                                nodes=config.quad_nodes, tol=config.tol)
    tasks = [
        (spec, config.dim, box_n, config.beta, config.h,
         derive_seed(config.seed, "clt", i))
        for i in range(config.samples)
    ]
    pns = np.array(_map_tasks(_pn_task, tasks, config.workers))
    y = math.sqrt(n) * (pns - p_limit)
    s = summarize(y)
    record = {
        "box_n": box_n, "side": 2 * box_n + 1, "samples": config.samples,
        "mean_y": s.mean, "variance_y": s.variance, "skewness": s.skewness,
        "excess_kurtosis": s.excess_kurtosis, "se_mean": s.se_mean,
        "se_variance": s.se_variance, "ks_distance": s.ks_distance,
        "degenerate": s.degenerate,
        "tau": tau, "tau_hat": tau_hat, "p_analytic": p_limit,
        "variance_over_tau": s.variance / tau if tau > 0 else float("nan"),
    }
    return _result(config, rows=[record], summary=record)


def run_overlap_decay_experiment(config: ExperimentConfig) -> dict:
    """Disorder-averaged weighted overlap second moment per box size.

    Boxes within the exact-moment limit are enumerated; larger ones use the
    two-replica heat-bath estimator with the configured schedule.
    """
    config = replace(config, kind="overlap-decay").validate()
    spec = config.kernel()
    r = solve_r(config.beta, config.h, spec.gamma0, config.tol,
                nodes=config.quad_nodes) if config.h > 0 else 0.0
    rows = []
    counter = 0
    for box_n in config.box_sizes:
        box = LatticeBox(config.dim, box_n)
        exact = box.site_count <= MOMENT_SITE_LIMIT
        if exact:
            tasks = [
                (spec, config.dim, box_n, config.beta, config.h, r,
                 derive_seed(config.seed, "overlap-decay", counter + i))
                for i in range(config.samples)
            ]
            vals = np.array(_map_tasks(_moment_exact_task, tasks, config.workers))
        else:
            tasks = [
                (spec, config.dim, box_n, config.beta, config.h, r,
                 config.sweeps, config.burn_in, config.thin,
                 derive_seed(config.seed, "overlap-decay", counter + i),
                 derive_seed(config.seed, "chain", counter + i))
                for i in range(config.samples)
            ]
            vals = np.array(_map_tasks(_moment_mcmc_task, tasks, config.workers))
        counter += config.samples
        rows.append({
            "box_n": box_n,
            "side": 2 * box_n + 1,
            "samples": config.samples,
            "method": "exact" if exact else "mcmc",
            "weighted_moment": float(vals.mean()),
            "se": float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0,
        })
    slope = _fit_slope([r_["box_n"] for r_ in rows], [r_["weighted_moment"] for r_ in rows])
    return _result(config, rows=rows, summary={"r": r, "decay_slope": slope})


def run_derivative_check(config: ExperimentConfig) -> dict:
    """Finite-difference check of the quenched beta-derivative identity."""
    config = replace(config, kind="derivative-check").validate()
    spec = config.kernel()
    box = LatticeBox(config.dim, config.box_sizes[0])
    r = solve_r(config.beta, config.h, spec.gamma0, config.tol,
                nodes=config.quad_nodes) if config.h > 0 else 0.0
    residual, se = beta_derivative_residual(
        box, spec, config.beta, config.h, r, config.samples, config.seed
    )
    record = {
        "box_n": config.box_sizes[0], "side": box.side, "samples": config.samples,
        "r": r, "residual": residual, "std_error": se,
        "sigmas": abs(residual) / se if se > 0 else float("nan"),
    }
    return _result(config, rows=[record], summary=record)


def run_interp_check(config: ExperimentConfig) -> dict:
    """Fluctuation process along the interpolation path, one row per (path, t)."""
    config = replace(config, kind="interp-check").validate()
    spec = config.kernel()
    box_n = config.box_sizes[0]
    grid = default_grid(config.grid_points)
    r = solve_r(config.beta, config.h, spec.gamma0, config.tol,
                nodes=config.quad_nodes) if config.h > 0 else 0.0
    p_targets = tuple(
        interpolated_free_energy(config.beta, config.h, spec.gamma0, t,
                                 nodes=config.quad_nodes, tol=config.tol)
        for t in grid
    )
    tasks = [
        (spec, config.dim, box_n, config.beta, config.h, r, tuple(grid), p_targets,
         derive_seed(config.seed, "interp-check", i))
        for i in range(config.paths)
    ]
    per_path = _map_tasks(_interp_task, tasks, config.workers)
    rows = []
    for pid, series in enumerate(per_path):
        for idx, (logz, y) in enumerate(series):
            rows.append({"path_id": pid, "t": float(grid[idx]), "logZ": logz, "Y_N": y})
    ys = np.array([[y for _, y in series] for series in per_path])
    summary = {
        "r": r,
        "t": [float(t) for t in grid],
        "p_target": list(p_targets),
        "mean_y": [float(v) for v in ys.mean(axis=0)],
        "se_y": [float(v) for v in ys.std(axis=0, ddof=1) / math.sqrt(len(per_path))],
    }
    return _result(config, rows=rows, summary=summary)


RUNNERS = {
    "convergence": run_convergence_experiment,
    "clt": run_clt_experiment,
    "overlap-decay": run_overlap_decay_experiment,
    "derivative-check": run_derivative_check,
    "interp-check": run_interp_check,
}


def run_experiment(config: ExperimentConfig) -> dict:
    return RUNNERS[config.kind](config)


def _result(config: ExperimentConfig, rows, summary) -> dict:
    return {
        "kind": config.kind,
        "config": config.to_dict(),
        "config_hash": config.content_hash(),
        "seed": config.seed,
        "rows": rows,
        "summary": summary,
    }


# ---------------------------------------------------------------------------
# output: deterministic text with 17-significant-digit floats

def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def dumps_json(obj, indent=0) -> str:
    pad = " " * indent
    inner = " " * (indent + 2)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{inner}{json.dumps(str(k))}: {dumps_json(v, indent + 2)}'
            for k, v in sorted(obj.items())
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            return "[]"
        items = [f"{inner}{dumps_json(v, indent + 2)}" for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, float):
        if math.isnan(obj):
            return '"nan"'
        if math.isinf(obj):
            return '"inf"' if obj > 0 else '"-inf"'
        return format(obj, ".17g")
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, np.floating):
        return dumps_json(float(obj), indent)
    return json.dumps(obj)


def render_result(result: dict, fmt: str) -> str:
    if fmt == "json":
        return dumps_json(result) + "\n"
    rows = result["rows"]
    if not rows:
        return ""
    fields = list(rows[0].keys()) + ["config_hash", "seed"]
    lines = [",".join(fields)]
    for row in rows:
        vals = [format_value(row[k]) for k in rows[0].keys()]
        vals += [result["config_hash"], str(result["seed"])]
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"


def write_result(result: dict, out: Optional[str], fmt: str) -> str:
    text = render_result(result, fmt)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    return text
