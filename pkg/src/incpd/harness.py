"""Config-driven experiments: moment comparison, sampling-partition total
variation, thermodynamic-limit sweeps, and raw simulation runs.

Every experiment is reproducible from its config: replica r of a run with
master seed s draws from the PCG64 stream seeded with mix_seed(s, r), and
result records serialize to JSON that is bit-identical across reruns
(wall-clock excluded).
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .bounds import BoundBreakdown, moment_error_bound, partition_tv_bound
from .dirichlet import (
    PartitionDistribution,
    dp_moment_partition_sum,
    esf_distribution,
    tv_distance,
)
from .dual import dp_moment_dual
from .inclusion import (
    EnumerationTooLargeError,
    InclusionModel,
    composition_count,
    default_burn_in,
    enumerate_stationary,
    exact_moment,
    exact_partition_distribution_W,
    empirical_moment,
    mcmc_sample_counts,
    predicted_acceptance,
    sample_stationary_exact_batch,
    simulate,
)
from .measures import ProductTestFunction
from .seeding import make_rng, mix_seed

RESULTS_CSV_HEADER = ("N,L,theta,k_or_n,method,estimate,se,"
                      "bound_total,bound_t1,bound_t2,bound_t3,pass,seed")

SWEEP_CSV_HEADER = ("N,L,theta,k,estimate,se,bound_t1,bound_t2,bound_t3,"
                    "bound_total,estimate_times_N,bound_times_N,pass,seed")

_SEED_LIST_CAP = 4096  # larger replica sets record the derivation instead


class ConfigError(ValueError):
    """Invalid or infeasible experiment configuration (CLI exit code 2)."""


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    model: InclusionModel
    test_function: Optional[ProductTestFunction] = None
    method: str = "exact"  # exact | rejection | mcmc
    replicas: int = 10_000
    burn_in_events: Optional[int] = None
    n: Optional[int] = None  # partition sample size
    workers: int = 1
    out: Optional[str] = None

    def __post_init__(self):
        if not (0 <= self.seed < 2 ** 64):
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.method not in ("exact", "rejection", "mcmc"):
            raise ConfigError(f"unknown method {self.method!r}")
        if self.replicas < 2:
            raise ConfigError("replicas must be >= 2")
        if self.burn_in_events is not None and self.burn_in_events < 1:
            raise ConfigError("burn_in_events must be >= 1")
        if self.n is not None and self.n < 1:
            raise ConfigError("sample size n must be >= 1")
        if self.method == "exact":
            count = composition_count(self.model.N, self.model.L)
            if count > 10_000_000:
                raise ConfigError(
                    f"method=exact infeasible: {count} configurations")

    def to_jsonable(self) -> dict:
        return {
            "seed": self.seed,
            "model": {"N": self.model.N, "L": self.model.L,
                      "theta": self.model.theta},
            "test_function": (self.test_function.to_jsonable()
                              if self.test_function else None),
            "method": self.method,
            "replicas": self.replicas,
            "burn_in_events": self.burn_in_events,
            "n": self.n,
            "workers": self.workers,
            "out": self.out,
        }

    @staticmethod
    def from_jsonable(obj: dict) -> "ExperimentConfig":
        try:
            model = InclusionModel(int(obj["model"]["N"]), int(obj["model"]["L"]),
                                   float(obj["model"]["theta"]))
            tf = obj.get("test_function")
            return ExperimentConfig(
                seed=int(obj["seed"]),
                model=model,
                test_function=(ProductTestFunction.from_jsonable(tf)
                               if tf else None),
                method=obj.get("method", "exact"),
                replicas=int(obj.get("replicas", 10_000)),
                burn_in_events=(int(obj["burn_in_events"])
                                if obj.get("burn_in_events") else None),
                n=(int(obj["n"]) if obj.get("n") else None),
                workers=int(obj.get("workers", 1)),
                out=obj.get("out"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad experiment config: {exc}") from exc

    @staticmethod
    def load(path: str | Path) -> "ExperimentConfig":
        with open(path) as fh:
            return ExperimentConfig.from_jsonable(json.load(fh))


def _seed_record(config: ExperimentConfig) -> dict:
    rec = {"scheme": "mix_seed(master_seed, r), SplitMix64 avalanche",
           "master_seed": config.seed, "replicas": config.replicas}
    if config.method == "mcmc" and config.replicas <= _SEED_LIST_CAP:
        rec["seeds"] = [mix_seed(config.seed, r) for r in range(config.replicas)]
    elif config.method == "rejection":
        rec["stream_seed"] = mix_seed(config.seed, 0)
        rec["note"] = "single batched rejection stream"
    return rec


@dataclass(frozen=True)
class ResultRecord:
    config: dict
    kind: str  # moment-compare | partition-tv
    estimate: float
    standard_error: float
    bound: dict
    passed: bool
    informative_only: bool
    details: dict
    replica_seeds: dict
    wall_clock_s: float

    def to_jsonable(self) -> dict:
        return {
            "config": self.config,
            "kind": self.kind,
            "estimate": self.estimate,
            "standard_error": self.standard_error,
            "bound": self.bound,
            "passed": self.passed,
            "informative_only": self.informative_only,
            "details": self.details,
            "replica_seeds": self.replica_seeds,
            "wall_clock_s": self.wall_clock_s,
        }

    @staticmethod
    def from_jsonable(obj: dict) -> "ResultRecord":
        return ResultRecord(**{k: obj[k] for k in (
            "config", "kind", "estimate", "standard_error", "bound", "passed",
            "informative_only", "details", "replica_seeds", "wall_clock_s")})

    def reproducible_json(self) -> str:
        """Canonical JSON with volatile fields (wall clock) removed."""
        obj = self.to_jsonable()
        del obj["wall_clock_s"]
        return json.dumps(obj, sort_keys=True)

    def csv_row(self, k_or_n: int) -> str:
        c = self.config
        b = self.bound
        return ",".join(str(v) for v in (
            c["model"]["N"], c["model"]["L"], c["model"]["theta"], k_or_n,
            c["method"], self.estimate, self.standard_error, b["total"],
            b["term_riemann"], b["term_mutation"], b["term_third"],
            self.passed, c["seed"]))


def append_results_csv(path: str | Path, record: ResultRecord,
                       k_or_n: int) -> None:
    path = Path(path)
    new = not path.exists()
    with open(path, "a") as fh:
        if new:
            fh.write(RESULTS_CSV_HEADER + "\n")
        fh.write(record.csv_row(k_or_n) + "\n")


def write_result(record: ResultRecord, out_dir: str | Path,
                 k_or_n: int) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "result.json"
    with open(path, "w") as fh:
        json.dump(record.to_jsonable(), fh, sort_keys=True, indent=1)
        fh.write("\n")
    append_results_csv(out / "results.csv", record, k_or_n)
    return path


# ---------------------------------------------------------------------------
# experiments

def _dp_moment_both_oracles(theta: float, phi: ProductTestFunction) -> float:
    """E h(Z) via the dual recursion and the partition sum; they must agree."""
    ez_dual = dp_moment_dual(theta, phi)
    ez_part = dp_moment_partition_sum(theta, phi)
    if abs(ez_dual - ez_part) > 1e-10 * max(1.0, abs(ez_dual), abs(ez_part)):
        raise AssertionError(
            f"DP moment oracles disagree: dual={ez_dual!r} "
            f"partition-sum={ez_part!r}")
    return ez_dual


def run_moment_compare(config: ExperimentConfig,
                       out_dir: Optional[str | Path] = None) -> ResultRecord:
    """|E h(W) - E h(Z)| against the moment error bound."""
    if config.test_function is None:
        raise ConfigError("moment-compare needs a test_function")
    t0 = time.perf_counter()
    model = config.model
    phi = config.test_function
    ez = _dp_moment_both_oracles(model.theta, phi)
    sup = phi.sup_norm_bound
    bound = moment_error_bound(model.N, model.L, model.theta, phi.k, sup)
    if config.method == "exact":
        ew = exact_moment(model, phi)
        se = 0.0
    else:
        ew, se = empirical_moment(
            model, phi, config.replicas, config.seed, method=config.method,
            burn_in_events=config.burn_in_events, workers=config.workers)
    estimate = abs(ew - ez)
    passed = estimate <= bound.total + 3.0 * se
    record = ResultRecord(
        config=config.to_jsonable(), kind="moment-compare",
        estimate=estimate, standard_error=se, bound=bound.to_jsonable(),
        passed=passed, informative_only=(phi.k == 1),
        details={"e_h_w": ew, "e_h_z": ez, "sup_norm": sup},
        replica_seeds=(_seed_record(config) if config.method != "exact" else {}),
        wall_clock_s=time.perf_counter() - t0)
    if out_dir is not None:
        write_result(record, out_dir, phi.k)
    return record


def _empirical_partition_distribution(config: ExperimentConfig,
                                      n: int) -> tuple[PartitionDistribution, float]:
    """Monte-Carlo sampling-partition law of W and an approximate TV standard
    error (0.5 * sqrt(sum_cell p(1-p)/draws))."""
    model = config.model
    draws = config.replicas
    if config.method == "rejection":
        rng = make_rng(mix_seed(config.seed, 0))
        counts = sample_stationary_exact_batch(model, draws, rng)
    else:
        counts = mcmc_sample_counts(model, draws, config.seed,
                                    config.burn_in_events, config.workers)
    rng = make_rng(mix_seed(config.seed, 1))
    sites = rng.random((draws, n))
    cum = np.cumsum(counts / model.N, axis=1)
    idx = (sites[:, :, None] >= cum[:, None, :]).sum(axis=2)
    freq: dict[tuple[int, ...], int] = {}
    for row in idx:
        sizes = np.bincount(row)
        shape = tuple(sorted((int(s) for s in sizes if s > 0), reverse=True))
        freq[shape] = freq.get(shape, 0) + 1
    probs = {shape: c / draws for shape, c in freq.items()}
    se = 0.5 * math.sqrt(sum(p * (1.0 - p) for p in probs.values()) / draws)
    return PartitionDistribution(n, probs), se


def run_partition_tv(config: ExperimentConfig,
                     out_dir: Optional[str | Path] = None) -> ResultRecord:
    """d_TV(S_n(W), S_n(Z)) against the partition total-variation bound."""
    if config.n is None:
        raise ConfigError("partition-tv needs a sample size n")
    t0 = time.perf_counter()
    model = config.model
    n = config.n
    esf = esf_distribution(model.theta, n)
    bound = partition_tv_bound(model.N, model.L, model.theta, n)
    per_cell_se: dict = {}
    if config.method == "exact":
        pw = exact_partition_distribution_W(model, n)
        se = 0.0
    else:
        pw, se = _empirical_partition_distribution(config, n)
        per_cell_se = {
            "+".join(map(str, s)): math.sqrt(p * (1 - p) / config.replicas)
            for s, p in pw.probs.items()}
    tv = tv_distance(pw, esf)
    passed = tv <= bound.total + 3.0 * se
    record = ResultRecord(
        config=config.to_jsonable(), kind="partition-tv",
        estimate=tv, standard_error=se, bound=bound.to_jsonable(),
        passed=passed, informative_only=(n == 1),
        details={"partition_W": pw.to_jsonable(),
                 "partition_Z": esf.to_jsonable(),
                 "per_cell_se": per_cell_se},
        replica_seeds=(_seed_record(config) if config.method != "exact" else {}),
        wall_clock_s=time.perf_counter() - t0)
    if out_dir is not None:
        write_result(record, out_dir, n)
    return record


def run_sweep(config: ExperimentConfig, ns: Sequence[int],
              out_dir: Optional[str | Path] = None) -> list[dict]:
    """Thermodynamic-limit sweep: L = round(N/theta) for each N in `ns`.

    One row per N with the estimate, bound terms, and both scaled by N.
    Per-N replication uses the derived stream mix_seed(master_seed, N).
    """
    if config.test_function is None:
        raise ConfigError("sweep needs a test_function")
    if config.method == "exact":
        raise ConfigError("sweep is a Monte-Carlo experiment; "
                          "use method rejection or mcmc")
    theta = config.model.theta
    phi = config.test_function
    rows = []
    for N in sorted(ns):
        L = max(2, round(N / theta))
        model = InclusionModel(N, L, theta)
        sub = ExperimentConfig(
            seed=mix_seed(config.seed, N), model=model,
            test_function=phi, method=config.method,
            replicas=config.replicas, burn_in_events=config.burn_in_events,
            workers=config.workers)
        rec = run_moment_compare(sub)
        b = rec.bound
        rows.append({
            "N": N, "L": L, "theta": theta, "k": phi.k,
            "estimate": rec.estimate, "se": rec.standard_error,
            "bound_t1": b["term_riemann"], "bound_t2": b["term_mutation"],
            "bound_t3": b["term_third"], "bound_total": b["total"],
            "estimate_times_N": rec.estimate * N,
            "bound_times_N": b["total"] * N,
            "pass": rec.passed, "seed": sub.seed,
        })
        if out_dir is not None:
            Path(out_dir).mkdir(parents=True, exist_ok=True)
            append_results_csv(Path(out_dir) / "results.csv", rec, phi.k)
    if out_dir is not None:
        path = Path(out_dir) / "sweep.csv"
        with open(path, "w") as fh:
            fh.write(SWEEP_CSV_HEADER + "\n")
            for row in rows:
                fh.write(",".join(str(row[c]) for c in
                                  SWEEP_CSV_HEADER.split(",")) + "\n")
    return rows


def run_simulation(config: ExperimentConfig, events: int,
                   trace_path: Optional[str | Path] = None,
                   out_dir: Optional[str | Path] = None) -> tuple[int, ...]:
    """Run one chain from the balanced start; optional CSV event trace
    (`event_index,time,source_site,target_site`) and a JSON snapshot of the
    final configuration."""
    if events < 1:
        raise ConfigError("events must be >= 1")
    model = config.model
    rng = make_rng(config.seed)
    sink = None
    trace_file = None
    if trace_path is not None:
        trace_file = open(trace_path, "w", newline="")
        writer = csv.writer(trace_file)
        writer.writerow(["event_index", "time", "source_site", "target_site"])

        def sink(ev, t, i, j):
            writer.writerow([ev, repr(t), i, j])

    try:
        final = simulate(model, model.balanced_start(), rng=rng,
                         events=events, sink=sink)
    finally:
        if trace_file is not None:
            trace_file.close()
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "final_configuration.json", "w") as fh:
            json.dump(list(final), fh)
            fh.write("\n")
    return final
