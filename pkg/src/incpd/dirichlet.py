"""The limit law: GEM stick breaking, Dirichlet-process sampling, Chinese
restaurant process, the Ewens sampling formula, and exact moment measures
of the Dirichlet process via partition sums.

Throughout, the base law is uniform on [0,1] and the concentration
parameter is theta > 0.  Partition distributions are stored over integer
partitions (shapes): both partition laws handled here are exchangeable,
so collapsing set partitions to shapes preserves total variation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .combinat import (
    integer_partitions,
    log_rising_factorial,
    multiplicities,
    set_partition_count,
    set_partitions,
)
from .measures import AtomicMeasure, PolyFactor, ProductTestFunction

ESF_MAX_N = 30
PARTITION_SUM_MAX_K = 10

_GEM_BLOCK = 32


@dataclass(frozen=True)
class GemSample:
    """Size-biased stick-breaking weights truncated at small residual mass."""

    weights: tuple[float, ...]
    residual: float
    eps: float

    def __post_init__(self):
        if not all(0.0 <= w < 1.0 for w in self.weights):
            raise ValueError("stick weights must lie in [0,1)")
        if not (0.0 <= self.residual < self.eps):
            raise ValueError("residual must be below the truncation threshold")
        total = sum(self.weights) + self.residual
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights + residual sum to {total}, not 1")


def sample_gem(theta: float, eps: float, rng: np.random.Generator) -> GemSample:
    """Stick-breaking weights P_i = V_i prod_{j<i}(1-V_j), V_j iid Beta(1,theta).

    Generation stops once the undistributed stick mass drops below eps.
    """
    if theta <= 0.0:
        raise ValueError("theta must be positive")
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie in (0,1)")
    weights: list[float] = []
    residual = 1.0
    while residual >= eps:
        for v in rng.beta(1.0, theta, size=_GEM_BLOCK):
            w = residual * v
            weights.append(w)
            residual -= w
            if residual < eps:
                break
    return GemSample(tuple(weights), residual, eps)


def sample_dp(theta: float, eps: float, rng: np.random.Generator) -> AtomicMeasure:
    """One draw from the Dirichlet process with uniform base law on [0,1].

    Atoms get iid U[0,1] labels and GEM weights; the truncation residual is
    lumped into one extra uniform atom so the draw is a probability measure.
    """
    gem = sample_gem(theta, eps, rng)
    weights = list(gem.weights) + [gem.residual]
    locs = rng.random(len(weights))
    acc: dict[float, float] = {}
    for x, w in zip(locs.tolist(), weights):
        acc[x] = acc.get(x, 0.0) + w  # float label collision: merge (measure-zero event)
    total = sum(acc.values())
    return AtomicMeasure(tuple(acc), tuple(w / total for w in acc.values()), True)


def crp_sample(theta: float, n: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Partition shape of n customers seated by the Chinese restaurant process.

    Customer t joins an existing block of size s with probability
    s/(t-1+theta) and opens a new block with probability theta/(t-1+theta).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    sizes = [1]
    for t in range(1, n):
        u = rng.random() * (t + theta)
        acc = 0.0
        for b, s in enumerate(sizes):
            acc += s
            if u < acc:
                sizes[b] += 1
                break
        else:
            sizes.append(1)
    return tuple(sorted(sizes, reverse=True))


def crp_shape_counts(theta: float, n: int, draws: int,
                     rng: np.random.Generator,
                     chunk: int = 200_000) -> dict[tuple[int, ...], int]:
    """Shape histogram of `draws` CRP samples (vectorized over draws)."""
    out: dict[tuple[int, ...], int] = {}
    remaining = draws
    while remaining > 0:
        b = min(chunk, remaining)
        remaining -= b
        sizes = np.zeros((b, n), dtype=np.int64)
        sizes[:, 0] = 1
        rows = np.arange(b)
        for t in range(1, n):
            u = rng.random(b) * (t + theta)
            cum = np.cumsum(sizes[:, :t], axis=1)
            idx = (u[:, None] >= cum).sum(axis=1)
            nblocks = np.count_nonzero(sizes[:, :t], axis=1)
            idx = np.minimum(idx, nblocks)
            sizes[rows, idx] += 1
        shapes = np.sort(sizes, axis=1)[:, ::-1]
        uniq, counts = np.unique(shapes, axis=0, return_counts=True)
        for row, c in zip(uniq, counts):
            key = tuple(int(s) for s in row if s > 0)
            out[key] = out.get(key, 0) + int(c)
    return out


@dataclass(frozen=True)
class PartitionDistribution:
    """Probability distribution over integer partitions (shapes) of n."""

    n: int
    probs: dict[tuple[int, ...], float]

    def __post_init__(self):
        total = 0.0
        for shape, p in self.probs.items():
            if sum(shape) != self.n or any(s < 1 for s in shape):
                raise ValueError(f"{shape} is not a partition of {self.n}")
            if tuple(sorted(shape, reverse=True)) != tuple(shape):
                raise ValueError(f"shape {shape} is not in non-increasing order")
            if p < -1e-15:
                raise ValueError(f"negative probability {p} for {shape}")
            total += p
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total}, not 1")

    def prob(self, shape: Iterable[int]) -> float:
        return self.probs.get(tuple(sorted(shape, reverse=True)), 0.0)

    def to_jsonable(self) -> dict:
        return {
            "n": self.n,
            "probs": {"+".join(str(s) for s in shape): p
                      for shape, p in sorted(self.probs.items(), reverse=True)},
        }

    @staticmethod
    def from_jsonable(obj: dict) -> "PartitionDistribution":
        probs = {tuple(int(s) for s in key.split("+")): float(p)
                 for key, p in obj["probs"].items()}
        return PartitionDistribution(int(obj["n"]), probs)


def esf_distribution(theta: float, n: int) -> PartitionDistribution:
    """Ewens sampling formula over partition shapes of n.

    P(shape) = n! / (prod_s s^{m_s} m_s!) * theta^b / (theta^(n))
    with b blocks, m_s the multiplicity of size s, and theta^(n) the rising
    factorial.  Computed in log space.
    """
    if theta <= 0.0:
        raise ValueError("theta must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > ESF_MAX_N:
        raise ValueError(f"n={n} exceeds the partition enumeration cap {ESF_MAX_N}")
    log_norm = log_rising_factorial(theta, n)
    log_nfact = math.lgamma(n + 1)
    probs: dict[tuple[int, ...], float] = {}
    for shape in integer_partitions(n):
        logp = log_nfact + len(shape) * math.log(theta) - log_norm
        for s, m in multiplicities(shape).items():
            logp -= m * math.log(s) + math.lgamma(m + 1)
        probs[shape] = math.exp(logp)
    return PartitionDistribution(n, probs)


def tv_distance(p: PartitionDistribution, q: PartitionDistribution) -> float:
    """Total variation distance, half the l1 distance over the joint support."""
    if p.n != q.n:
        raise ValueError(f"partition sizes differ: {p.n} vs {q.n}")
    support = set(p.probs) | set(q.probs)
    return 0.5 * sum(abs(p.probs.get(s, 0.0) - q.probs.get(s, 0.0)) for s in support)


def dp_moment_partition_sum(theta: float, phi: ProductTestFunction) -> float:
    """E <phi, Z^k> for Z the Dirichlet process, via the exchangeable
    partition structure of a size-k sample.

    Sum over set partitions rho of {1..k} of
      P_ESF(rho) * prod_{blocks B} int_0^1 prod_{j in B} g_j(x) dx,
    with P_ESF(rho) = theta^{|rho|} prod_B (|B|-1)! / theta^(k).
    All block integrals are exact polynomial integrals.
    """
    k = phi.k
    if k > PARTITION_SUM_MAX_K:
        raise ValueError(f"k={k} exceeds the set-partition cap {PARTITION_SUM_MAX_K}")
    log_norm = log_rising_factorial(theta, k)
    total = 0.0
    for rho in set_partitions(range(k)):
        logw = len(rho) * math.log(theta) - log_norm
        for block in rho:
            logw += math.lgamma(len(block))
        term = math.exp(logw)
        for block in rho:
            g = phi.factors[block[0]]
            for j in block[1:]:
                g = g.multiply(phi.factors[j])
            term *= g.integral()
        total += term
    return total
