"""Machine-checked verification suites behind the `verify` CLI command.

Each suite checks one exactness contract: detailed balance of the stationary
weights, agreement with the generator-matrix null vector, stationarity of
moments under the generator, agreement of the two Dirichlet-process moment
oracles, vanishing of the Stein-equation residual, and conformance of the
derivative sup-norm bounds.  A failing case is serialized with its concrete
inputs so it can be replayed bit-identically.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .bounds import stein_factors
from .dirichlet import dp_moment_partition_sum
from .dual import SteinSolution, dp_moment_dual
from .inclusion import (
    InclusionModel,
    enumerate_stationary,
    jump_rate,
    stationary_log_weight,
)
from .measures import AtomicMeasure, PolyFactor, ProductTestFunction, eval_moment
from .seeding import make_rng, mix_seed

BALANCE_MODELS = ((2, 2, 1.0), (3, 2, 2.0), (3, 3, 1.5), (4, 3, 0.7))
ORACLE_THETAS = (0.5, 1.0, 2.0)

DEFAULT_SEED = 20_260_401


@dataclass
class SuiteReport:
    name: str
    passed: bool
    cases: int
    max_err: float
    info: list[str] = field(default_factory=list)
    failure: Optional[dict] = None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{self.name:<18} {status}  cases={self.cases:<7} "
                f"max_err={self.max_err:.3e}")


def _fail(name: str, case: dict, observed: dict, tolerance: float) -> dict:
    return {"suite": name, "case": case, "observed": observed,
            "tolerance": tolerance}


# ---------------------------------------------------------------------------
# random-input generators (deterministic per derived seed)

def _random_factor(rng, max_degree=3, low=-1.0, high=1.0) -> PolyFactor:
    deg = int(rng.integers(0, max_degree + 1))
    return PolyFactor(tuple(rng.uniform(low, high, size=deg + 1)))


def _random_phi(rng, k, max_degree=3, low=-1.0, high=1.0) -> ProductTestFunction:
    return ProductTestFunction.from_factors(
        *(_random_factor(rng, max_degree, low, high) for _ in range(k)))


def _random_probability(rng, max_atoms=5) -> AtomicMeasure:
    atoms = int(rng.integers(1, max_atoms + 1))
    locs = rng.random(atoms)
    while len(set(locs.tolist())) < atoms:
        locs = rng.random(atoms)
    ws = rng.dirichlet(np.ones(atoms))
    ws = ws / ws.sum()
    ws[-1] = 1.0 - float(ws[:-1].sum())
    return AtomicMeasure.probability(tuple(locs.tolist()), tuple(ws.tolist()))


# ---------------------------------------------------------------------------
# suites

def suite_detailed_balance(seed: int = DEFAULT_SEED,
                           fault: Optional[str] = None) -> SuiteReport:
    """pi(n) rate(n -> n') = pi(n') rate(n' -> n) on every single-move edge,
    checked in log space to 1e-10 relative, over the model grid."""
    tol = 1e-10
    max_err = 0.0
    cases = 0
    failure = None
    for N, L, theta in BALANCE_MODELS:
        model = InclusionModel(N, L, theta)
        enum = enumerate_stationary(model)
        first = tuple(int(c) for c in enum.configs[0])

        def logw(cfg):
            w = stationary_log_weight(model, cfg)
            if fault == "stationary-weight" and cfg == first:
                w += 1e-3  # injected corruption (test mode)
            return w

        for cfg, _ in enum.items():
            for i in range(1, L + 1):
                if cfg[i - 1] == 0:
                    continue
                for j in range(1, L + 1):
                    if i == j:
                        continue
                    nxt = list(cfg)
                    nxt[i - 1] -= 1
                    nxt[j - 1] += 1
                    nxt = tuple(nxt)
                    err = abs(logw(cfg) + math.log(jump_rate(model, cfg, i, j))
                              - logw(nxt) - math.log(jump_rate(model, nxt, j, i)))
                    cases += 1
                    if err > max_err:
                        max_err = err
                        if err > tol and failure is None:
                            failure = _fail(
                                "detailed-balance",
                                {"model": [N, L, theta], "config": list(cfg),
                                 "i": i, "j": j},
                                {"log_imbalance": err}, tol)
    return SuiteReport("detailed-balance", max_err <= tol, cases, max_err,
                       failure=failure)


def _replay_detailed_balance(case: dict) -> dict:
    N, L, theta = case["model"]
    model = InclusionModel(int(N), int(L), float(theta))
    cfg = tuple(case["config"])
    i, j = case["i"], case["j"]
    nxt = list(cfg)
    nxt[i - 1] -= 1
    nxt[j - 1] += 1
    err = abs(stationary_log_weight(model, cfg)
              + math.log(jump_rate(model, cfg, i, j))
              - stationary_log_weight(model, tuple(nxt))
              - math.log(jump_rate(model, tuple(nxt), j, i)))
    return {"log_imbalance": err}


def generator_matrix(model: InclusionModel, enum=None) -> np.ndarray:
    """Dense generator over enumerated configurations (row = from-state)."""
    if enum is None:
        enum = enumerate_stationary(model)
    M = len(enum)
    Q = np.zeros((M, M))
    index = enum.index
    for a, (cfg, _) in enumerate(enum.items()):
        for i in range(1, model.L + 1):
            if cfg[i - 1] == 0:
                continue
            for j in range(1, model.L + 1):
                if i == j:
                    continue
                nxt = list(cfg)
                nxt[i - 1] -= 1
                nxt[j - 1] += 1
                Q[a, index[tuple(nxt)]] += jump_rate(model, cfg, i, j)
    Q[np.diag_indices(M)] -= Q.sum(axis=1)
    return Q


def null_vector_probabilities(model: InclusionModel) -> np.ndarray:
    """Stationary vector by linear solve on the enumerated generator."""
    enum = enumerate_stationary(model)
    Q = generator_matrix(model, enum)
    M = Q.shape[0]
    A = np.vstack([Q.T, np.ones((1, M))])
    b = np.zeros(M + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    return pi


def suite_null_vector(seed: int = DEFAULT_SEED,
                      fault: Optional[str] = None) -> SuiteReport:
    """Product-form stationary weights match the generator null vector to
    1e-10 per entry on the model grid."""
    tol = 1e-10
    max_err = 0.0
    cases = 0
    failure = None
    for N, L, theta in BALANCE_MODELS:
        model = InclusionModel(N, L, theta)
        enum = enumerate_stationary(model)
        probs = enum.probs.copy()
        if fault == "stationary-weight":
            probs[0] += 1e-3
            probs /= probs.sum()
        pi = null_vector_probabilities(model)
        err = float(np.max(np.abs(pi - probs)))
        cases += len(enum)
        if err > max_err:
            max_err = err
            if err > tol and failure is None:
                failure = _fail("null-vector", {"model": [N, L, theta]},
                                {"max_entry_error": err}, tol)
    return SuiteReport("null-vector", max_err <= tol, cases, max_err,
                       failure=failure)


def _replay_null_vector(case: dict) -> dict:
    N, L, theta = case["model"]
    model = InclusionModel(int(N), int(L), float(theta))
    enum = enumerate_stationary(model)
    pi = null_vector_probabilities(model)
    return {"max_entry_error": float(np.max(np.abs(pi - enum.probs)))}


def suite_stationarity(seed: int = DEFAULT_SEED,
                       fault: Optional[str] = None) -> SuiteReport:
    """sum_n pi(n) (A1 f)(n) = 0 within 1e-9 for f(mu) = <phi, mu^k>,
    20 random phi with k <= 3, on two models."""
    tol = 1e-9
    max_err = 0.0
    cases = 0
    failure = None
    from .inclusion import measure_from_counts

    for m_idx, (N, L, theta) in enumerate(((3, 3, 1.5), (4, 3, 0.7))):
        model = InclusionModel(N, L, theta)
        enum = enumerate_stationary(model)
        for t in range(20):
            rng = make_rng(mix_seed(seed, 1000 * m_idx + t))
            k = int(rng.integers(1, 4))
            phi = _random_phi(rng, k)
            fvals = {cfg: eval_moment(phi, measure_from_counts(model, cfg))
                     for cfg, _ in enum.items()}
            total = 0.0
            for cfg, p in enum.items():
                acc = 0.0
                for i in range(1, L + 1):
                    if cfg[i - 1] == 0:
                        continue
                    for j in range(1, L + 1):
                        if i == j:
                            continue
                        nxt = list(cfg)
                        nxt[i - 1] -= 1
                        nxt[j - 1] += 1
                        acc += (jump_rate(model, cfg, i, j)
                                * (fvals[tuple(nxt)] - fvals[cfg]))
                total += p * acc
            err = abs(total)
            cases += 1
            if err > max_err:
                max_err = err
                if err > tol and failure is None:
                    failure = _fail("stationarity",
                                    {"model": [N, L, theta],
                                     "phi": phi.to_jsonable()},
                                    {"generator_mean": total}, tol)
    return SuiteReport("stationarity", max_err <= tol, cases, max_err,
                       failure=failure)


def _replay_stationarity(case: dict) -> dict:
    from .inclusion import measure_from_counts
    N, L, theta = case["model"]
    model = InclusionModel(int(N), int(L), float(theta))
    phi = ProductTestFunction.from_jsonable(case["phi"])
    enum = enumerate_stationary(model)
    fvals = {cfg: eval_moment(phi, measure_from_counts(model, cfg))
             for cfg, _ in enum.items()}
    total = 0.0
    for cfg, p in enum.items():
        acc = 0.0
        for i in range(1, L + 1):
            if cfg[i - 1] == 0:
                continue
            for j in range(1, L + 1):
                if i != j:
                    nxt = list(cfg)
                    nxt[i - 1] -= 1
                    nxt[j - 1] += 1
                    acc += (jump_rate(model, cfg, i, j)
                            * (fvals[tuple(nxt)] - fvals[cfg]))
        total += p * acc
    return {"generator_mean": total}


def suite_oracle_agreement(seed: int = DEFAULT_SEED,
                           fault: Optional[str] = None) -> SuiteReport:
    """Dual-recursion and partition-sum stationary moments agree to 1e-10
    relative: 50 random positive-coefficient phi with k <= 5 per theta,
    plus the hand value 7/24 for phi(x,y) = xy at theta = 1."""
    tol = 1e-10
    max_err = 0.0
    cases = 0
    failure = None
    hand = dp_moment_dual(1.0, ProductTestFunction.monomials([1, 1]))
    if abs(hand - 7.0 / 24.0) > 1e-12:
        failure = _fail("oracle-agreement", {"theta": 1.0, "phi": "xy"},
                        {"dual": hand, "expected": 7.0 / 24.0}, 1e-12)
        max_err = abs(hand - 7.0 / 24.0)
    cases += 1
    for theta in ORACLE_THETAS:
        for t in range(50):
            rng = make_rng(mix_seed(seed, int(theta * 1000) * 100 + t))
            k = int(rng.integers(1, 6))
            phi = _random_phi(rng, k, low=0.1, high=1.0)
            a = dp_moment_dual(theta, phi)
            b = dp_moment_partition_sum(theta, phi)
            err = abs(a - b) / max(abs(a), abs(b))
            cases += 1
            if err > max_err:
                max_err = err
                if err > tol and failure is None:
                    failure = _fail("oracle-agreement",
                                    {"theta": theta, "phi": phi.to_jsonable()},
                                    {"dual": a, "partition_sum": b}, tol)
    return SuiteReport("oracle-agreement", max_err <= tol, cases, max_err,
                       failure=failure)


def _replay_oracle_agreement(case: dict) -> dict:
    if case.get("phi") == "xy":
        return {"dual": dp_moment_dual(1.0, ProductTestFunction.monomials([1, 1]))}
    phi = ProductTestFunction.from_jsonable(case["phi"])
    theta = float(case["theta"])
    return {"dual": dp_moment_dual(theta, phi),
            "partition_sum": dp_moment_partition_sum(theta, phi)}


def suite_stein_residual(seed: int = DEFAULT_SEED,
                         fault: Optional[str] = None) -> SuiteReport:
    """|A2 f_h(mu) - (h(mu) - E h(Z))| < 1e-8 under the halved generator,
    200 random (phi, mu) per theta, k <= 3.  Also reports the residual under
    the generator with the 1/2 factors dropped (the normalization question):
    it equals h - E h(Z) and is far from zero."""
    tol = 1e-8
    max_err = 0.0
    max_unhalved = 0.0
    cases = 0
    failure = None
    for theta in ORACLE_THETAS:
        for t in range(200):
            rng = make_rng(mix_seed(seed, int(theta * 1000) * 1000 + t))
            k = int(rng.integers(1, 4))
            phi = _random_phi(rng, k)
            mu = _random_probability(rng)
            sol = SteinSolution(theta, phi)
            err = abs(sol.residual(mu, halved=True))
            max_unhalved = max(max_unhalved, abs(sol.residual(mu, halved=False)))
            cases += 1
            if err > max_err:
                max_err = err
                if err > tol and failure is None:
                    failure = _fail(
                        "stein-residual",
                        {"theta": theta, "phi": phi.to_jsonable(),
                         "mu": {"locations": list(mu.locations),
                                "weights": list(mu.weights)}},
                        {"residual": err}, tol)
    info = [f"max |unhalved-generator residual| = {max_unhalved:.3e} "
            "(equals |h - E h(Z)|; reported for the normalization comparison)"]
    return SuiteReport("stein-residual", max_err <= tol, cases, max_err,
                       info=info, failure=failure)


def _replay_stein_residual(case: dict) -> dict:
    phi = ProductTestFunction.from_jsonable(case["phi"])
    mu = AtomicMeasure.probability(tuple(case["mu"]["locations"]),
                                   tuple(case["mu"]["weights"]))
    sol = SteinSolution(float(case["theta"]), phi)
    return {"residual": abs(sol.residual(mu, halved=True))}


def suite_stein_factors(seed: int = DEFAULT_SEED, probes: int = 10_000,
                        fault: Optional[str] = None) -> SuiteReport:
    """No violation of the three derivative sup-norm bounds beyond 1e-9 over
    randomized probes with k <= 4."""
    tol = 1e-9
    max_excess = -math.inf
    cases = 0
    failure = None
    per_phi = 100
    n_phi = max(1, probes // per_phi)
    for c in range(n_phi):
        rng = make_rng(mix_seed(seed, 7_000_000 + c))
        k = int(rng.integers(1, 5))
        theta = float(ORACLE_THETAS[int(rng.integers(0, 3))])
        phi = _random_phi(rng, k)
        sol = SteinSolution(theta, phi)
        b1, b2, b3 = stein_factors(theta, k, phi.sup_norm_bound)
        for _ in range(per_phi):
            mu = _random_probability(rng)
            pts = rng.random(3)
            d1 = abs(sol.derivative(mu, (pts[0],)))
            d2 = abs(sol.derivative(mu, (pts[0], pts[1])))
            d3 = abs(sol.derivative(mu, tuple(pts)))
            cases += 1
            for order, (d, b) in enumerate(((d1, b1), (d2, b2), (d3, b3)), 1):
                excess = d - b
                if excess > max_excess:
                    max_excess = excess
                    if excess > tol and failure is None:
                        failure = _fail(
                            "stein-factors",
                            {"theta": theta, "phi": phi.to_jsonable(),
                             "mu": {"locations": list(mu.locations),
                                    "weights": list(mu.weights)},
                             "points": list(pts[:order]), "order": order},
                            {"derivative": d, "bound": b}, tol)
    return SuiteReport("stein-factors", max_excess <= tol, cases,
                       max(max_excess, 0.0), failure=failure)


def _replay_stein_factors(case: dict) -> dict:
    phi = ProductTestFunction.from_jsonable(case["phi"])
    mu = AtomicMeasure.probability(tuple(case["mu"]["locations"]),
                                   tuple(case["mu"]["weights"]))
    sol = SteinSolution(float(case["theta"]), phi)
    d = abs(sol.derivative(mu, tuple(case["points"])))
    b = stein_factors(float(case["theta"]), phi.k,
                      phi.sup_norm_bound)[int(case["order"]) - 1]
    return {"derivative": d, "bound": b}


SUITES: dict[str, Callable[..., SuiteReport]] = {
    "detailed-balance": suite_detailed_balance,
    "null-vector": suite_null_vector,
    "stationarity": suite_stationarity,
    "oracle-agreement": suite_oracle_agreement,
    "stein-residual": suite_stein_residual,
    "stein-factors": suite_stein_factors,
}

_REPLAYERS = {
    "detailed-balance": _replay_detailed_balance,
    "null-vector": _replay_null_vector,
    "stationarity": _replay_stationarity,
    "oracle-agreement": _replay_oracle_agreement,
    "stein-residual": _replay_stein_residual,
    "stein-factors": _replay_stein_factors,
}


def run_verification(suites: Optional[Sequence[str]] = None,
                     seed: int = DEFAULT_SEED, probes: int = 10_000,
                     out_dir: Optional[str | Path] = None,
                     fault: Optional[str] = None) -> tuple[int, list[SuiteReport]]:
    """Run the named suites (all by default).  Returns (exit_code, reports);
    exit code 0 iff every suite passed.  Failing cases are serialized to
    `failure_<suite>.json` under out_dir for replay."""
    names = list(suites) if suites else list(SUITES)
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}; "
                             f"known: {', '.join(SUITES)}")
    reports = []
    for name in names:
        fn = SUITES[name]
        kwargs = {"seed": seed, "fault": fault}
        if name == "stein-factors":
            kwargs["probes"] = probes
        reports.append(fn(**kwargs))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for rep in reports:
            if rep.failure is not None:
                with open(out / f"failure_{rep.name}.json", "w") as fh:
                    json.dump(rep.failure, fh, sort_keys=True, indent=1)
                    fh.write("\n")
    code = 0 if all(r.passed for r in reports) else 1
    return code, reports


def replay_case(payload: dict) -> dict:
    """Recompute the observations of a serialized failing case.  Pure and
    deterministic: repeated replays are bit-identical."""
    suite = payload["suite"]
    if suite not in _REPLAYERS:
        raise ValueError(f"no replay handler for suite {suite!r}")
    return _REPLAYERS[suite](payload["case"])
