"""The discrete inclusion process on L complete-graph sites embedded at
lattice locations i/L in (0,1].

A particle moves from site i to site j at rate n_i (n_j + theta/L); the
per-site parameter is k_site = theta/L.  The reversible stationary law is
the product of Gamma(k_site + n_i)/(Gamma(k_site) n_i!) weights over
compositions of N, which this module exposes as an exact oracle together
with event-driven simulation, exact and rejection/MCMC samplers, and exact
moments and sampling-partition laws of the stationary random measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np

from .combinat import (
    composition_count,
    compositions,
    integer_partitions,
    set_partition_count,
    set_partitions,
)
from .dirichlet import PartitionDistribution
from .measures import AtomicMeasure, ProductTestFunction
from .seeding import make_rng, mix_seed

ENUMERATION_CAP = 10_000_000

Config = tuple[int, ...]


class EnumerationTooLargeError(ValueError):
    """Raised when a model is too large for exact enumeration."""


@dataclass(frozen=True)
class InclusionModel:
    """N particles on L sites with total diffusivity theta (k_site = theta/L)."""

    N: int
    L: int
    theta: float

    def __post_init__(self):
        if self.N < 1 or self.L < 1:
            raise ValueError("N and L must be positive integers")
        if not (self.theta > 0.0 and math.isfinite(self.theta)):
            raise ValueError("theta must be positive and finite")

    @property
    def k_site(self) -> float:
        return self.theta / self.L

    @cached_property
    def lattice(self) -> tuple[float, ...]:
        return tuple((i + 1) / self.L for i in range(self.L))

    @cached_property
    def lattice_array(self) -> np.ndarray:
        a = np.array(self.lattice)
        a.flags.writeable = False
        return a

    def balanced_start(self) -> Config:
        base, rem = divmod(self.N, self.L)
        return tuple(base + 1 if i < rem else base for i in range(self.L))

    def check_counts(self, counts: Sequence[int]) -> Config:
        counts = tuple(int(c) for c in counts)
        if len(counts) != self.L:
            raise ValueError(f"expected {self.L} sites, got {len(counts)}")
        if any(c < 0 for c in counts):
            raise ValueError("occupation counts must be nonnegative")
        if sum(counts) != self.N:
            raise ValueError(f"counts sum to {sum(counts)}, model has N={self.N}")
        return counts


def jump_rate(model: InclusionModel, counts: Sequence[int], i: int, j: int) -> float:
    """Rate n_i (n_j + theta/L) of moving one particle from site i to site j.

    Sites are 1-based.  Self-moves (i == j) are null events and carry rate 0.
    """
    if not (1 <= i <= model.L and 1 <= j <= model.L):
        raise ValueError(f"site indices ({i},{j}) outside 1..{model.L}")
    if i == j:
        return 0.0
    return counts[i - 1] * (counts[j - 1] + model.k_site)


def total_jump_rate(model: InclusionModel, counts: Sequence[int]) -> float:
    """sum_{i != j} n_i (n_j + k_site) = N^2 - sum n_i^2 + k_site N (L-1)."""
    sumsq = sum(c * c for c in counts)
    return (model.N * model.N - sumsq) + model.k_site * model.N * (model.L - 1)


class FenwickTree:
    """Dynamic cumulative-weight index over sites: O(log L) update and
    proportional sampling.  Weights live in tree[1..n] (Fenwick layout)."""

    __slots__ = ("n", "tree", "topbit")

    def __init__(self, weights: Sequence[float]):
        n = len(weights)
        self.n = n
        tree = [0.0] * (n + 1)
        for i, w in enumerate(weights, start=1):
            tree[i] += w
            j = i + (i & -i)
            if j <= n:
                tree[j] += tree[i]
        self.tree = tree
        top = 1
        while top * 2 <= n:
            top *= 2
        self.topbit = top

    def add(self, i: int, delta: float) -> None:
        """Add delta to the weight of 0-based site i."""
        t = self.tree
        n = self.n
        i += 1
        while i <= n:
            t[i] += delta
            i += i & -i

    def prefix_sum(self, i: int) -> float:
        """Sum of weights of sites 0..i-1."""
        t = self.tree
        s = 0.0
        while i > 0:
            s += t[i]
            i -= i & -i
        return s

    def total(self) -> float:
        return self.prefix_sum(self.n)

    def weight(self, i: int) -> float:
        return self.prefix_sum(i + 1) - self.prefix_sum(i)

    def find(self, u: float) -> int:
        """Smallest 0-based i with prefix_sum(i+1) > u (clamped to n-1)."""
        t = self.tree
        n = self.n
        idx = 0
        bit = self.topbit
        while bit:
            nxt = idx + bit
            if nxt <= n and t[nxt] <= u:
                u -= t[nxt]
                idx = nxt
            bit >>= 1
        return idx if idx < n else n - 1

    def max_drift(self, weights: Sequence[float]) -> float:
        """Largest relative mismatch between stored totals and a rebuild."""
        fresh = FenwickTree(weights)
        worst = 0.0
        for a, b in zip(self.tree[1:], fresh.tree[1:]):
            scale = max(abs(a), abs(b), 1.0)
            worst = max(worst, abs(a - b) / scale)
        return worst


_RNG_BUFFER = 16384


class InclusionSimulator:
    """Event-driven (Gillespie) simulation of one inclusion-process chain.

    Holding times are exponential at the exact total rate
    N^2 - sum n_i^2 + k_site N (L-1); the event (i, j) is drawn with the
    exact joint law proportional to n_i (n_j + k_site) over i != j, via two
    Fenwick trees: a source tree carrying the marginal weights
    n_i (N + theta - k_site - n_i) and a target tree carrying n_j + k_site
    from which the chosen source is temporarily excluded.

    Single-threaded; owns its counts and RNG.  Particle conservation holds
    by construction (every event moves exactly one particle); cheap O(1)
    assertions guard each event and a full audit runs at every periodic
    tree resync and at the end of each run.
    """

    def __init__(self, model: InclusionModel, start: Sequence[int],
                 rng: np.random.Generator, resync_every: int = 1 << 20):
        if model.L < 2:
            raise ValueError("simulation needs at least 2 sites")
        self.model = model
        self.counts = list(model.check_counts(start))
        self.rng = rng
        self.resync_every = int(resync_every)
        self.time = 0.0
        self.events_done = 0
        self._sumsq = sum(c * c for c in self.counts)
        self._build_trees()

    def _build_trees(self) -> None:
        m = self.model
        k = m.k_site
        C = m.N + m.theta - k
        self._C = C
        self.source_tree = FenwickTree([c * (C - c) for c in self.counts])
        self.target_tree = FenwickTree([c + k for c in self.counts])

    def resync(self) -> None:
        """Rebuild both trees from counts and audit conservation."""
        total = sum(self.counts)
        if total != self.model.N:
            raise AssertionError(
                f"particle conservation violated: {total} != {self.model.N}")
        self._sumsq = sum(c * c for c in self.counts)
        self._build_trees()

    def drift(self) -> float:
        """Relative drift of the incrementally maintained source tree."""
        C = self._C
        return self.source_tree.max_drift([c * (C - c) for c in self.counts])

    def run(self, events: Optional[int] = None, t_max: Optional[float] = None,
            sink: Optional[Callable[[int, float, int, int], None]] = None,
            buffer_hint: Optional[int] = None) -> Config:
        """Advance the chain by an event budget or to a time horizon.

        `sink`, when given, receives (event_index, time, source_site,
        target_site) after each event, with 1-based sites.  `buffer_hint`
        sizes the RNG pre-draw blocks for short horizon runs.  Returns the
        final configuration.  Deterministic for a given RNG state.
        """
        if (events is None) == (t_max is None):
            raise ValueError("exactly one of events= or t_max= is required")
        if events is not None and events <= 0:
            raise ValueError("event budget must be positive")
        if t_max is not None and t_max <= 0.0:
            raise ValueError("time horizon must be positive")
        m = self.model
        N, L, theta, k = m.N, m.L, m.theta, m.k_site
        if N >= 1 and L < 2:
            raise ValueError("total jump rate is zero: need L >= 2")

        counts = self.counts
        stree = self.source_tree.tree
        ttree = self.target_tree.tree
        topbit = self.source_tree.topbit
        C = self._C
        NT = N + theta
        NN = N * N
        kNL1 = k * N * (L - 1)
        sumsq = self._sumsq
        t = self.time
        rng = self.rng
        resync_every = self.resync_every
        since_resync = 0

        budget = events if events is not None else -1
        horizon = t_max if t_max is not None else math.inf
        done = 0
        ev_index = self.events_done

        if buffer_hint is not None:
            buf = max(64, min(_RNG_BUFFER, buffer_hint))
        elif budget > 0:
            buf = min(_RNG_BUFFER, budget + 16)
        else:
            buf = _RNG_BUFFER
        exps = rng.standard_exponential(buf).tolist()
        u1 = rng.random(buf).tolist()
        u2 = rng.random(buf).tolist()
        bi = 0

        while budget < 0 or done < budget:
            if bi >= buf:
                exps = rng.standard_exponential(buf).tolist()
                u1 = rng.random(buf).tolist()
                u2 = rng.random(buf).tolist()
                bi = 0
            if since_resync >= resync_every:
                self.counts = counts
                self._sumsq = sumsq
                self.resync()
                stree = self.source_tree.tree
                ttree = self.target_tree.tree
                since_resync = 0

            R = (NN - sumsq) + kNL1
            dt = exps[bi] / R
            if t + dt > horizon:
                t = horizon
                bi += 1
                break

            # source site: weight n_i (C - n_i), Fenwick descent inlined
            u = u1[bi] * R
            idx = 0
            bit = topbit
            while bit:
                nxt = idx + bit
                if nxt <= L:
                    w = stree[nxt]
                    if w <= u:
                        u -= w
                        idx = nxt
                bit >>= 1
            i = idx if idx < L else L - 1
            a = counts[i]
            if a <= 0:  # float drift landed on an empty site: rebuild, redraw
                self.counts = counts
                self._sumsq = sumsq
                self.resync()
                stree = self.source_tree.tree
                ttree = self.target_tree.tree
                bi += 1
                continue

            # target site: weight n_j + k over j != i (source excluded)
            wi = a + k
            ii = i + 1
            while ii <= L:
                ttree[ii] -= wi
                ii += ii & -ii
            u = u2[bi] * (NT - wi)
            idx = 0
            bit = topbit
            while bit:
                nxt = idx + bit
                if nxt <= L:
                    w = ttree[nxt]
                    if w <= u:
                        u -= w
                        idx = nxt
                bit >>= 1
            j = idx if idx < L else L - 1
            # restore the source weight minus the departing particle
            di = wi - 1.0
            ii = i + 1
            while ii <= L:
                ttree[ii] += di
                ii += ii & -ii
            if j == i:
                self.counts = counts
                self._sumsq = sumsq
                self.resync()
                stree = self.source_tree.tree
                ttree = self.target_tree.tree
                bi += 1
                continue

            t += dt
            b = counts[j]
            counts[i] = a - 1
            counts[j] = b + 1
            sumsq += 2 * (b - a + 1)
            ii = i + 1
            d = (a - 1) * (C - a + 1.0) - a * (C - a)
            while ii <= L:
                stree[ii] += d
                ii += ii & -ii
            jj = j + 1
            d = (b + 1) * (C - b - 1.0) - b * (C - b)
            while jj <= L:
                stree[jj] += d
                jj += jj & -jj
            jj = j + 1
            while jj <= L:
                ttree[jj] += 1.0
                jj += jj & -jj

            bi += 1
            done += 1
            ev_index += 1
            since_resync += 1
            if sink is not None:
                sink(ev_index, t, i + 1, j + 1)

        self.counts = counts
        self._sumsq = sumsq
        self.time = t
        self.events_done = ev_index
        self.resync()
        return tuple(counts)


def simulate(model: InclusionModel, start: Sequence[int], *,
             rng: np.random.Generator, events: Optional[int] = None,
             t_max: Optional[float] = None,
             sink: Optional[Callable[[int, float, int, int], None]] = None,
             buffer_hint: Optional[int] = None) -> Config:
    """Run one chain from `start` and return the final configuration."""
    sim = InclusionSimulator(model, start, rng)
    return sim.run(events=events, t_max=t_max, sink=sink, buffer_hint=buffer_hint)


# ---------------------------------------------------------------------------
# exact stationary law

def stationary_log_weight(model: InclusionModel, counts: Sequence[int]) -> float:
    """Unnormalized log stationary weight of a configuration:
    sum_i [lgamma(k_site + n_i) - lgamma(k_site) - log n_i!].

    In detailed balance with jump_rate; certified by the generator
    null-vector and detailed-balance verification suites.
    """
    k = model.k_site
    lgk = math.lgamma(k)
    return sum(math.lgamma(k + c) - lgk - math.lgamma(c + 1) for c in counts)


@dataclass(frozen=True)
class StationaryEnumeration:
    """All compositions of N into L sites with stationary probabilities."""

    model: InclusionModel
    configs: np.ndarray  # (M, L) int64
    probs: np.ndarray    # (M,)

    def __len__(self) -> int:
        return self.configs.shape[0]

    def items(self):
        for row, p in zip(self.configs, self.probs):
            yield tuple(int(c) for c in row), float(p)

    @cached_property
    def index(self) -> dict[Config, int]:
        return {tuple(int(c) for c in row): i for i, row in enumerate(self.configs)}

    @cached_property
    def weight_matrix(self) -> np.ndarray:
        """Configurations as probability weights on the lattice (M, L)."""
        return self.configs / self.model.N


def enumerate_stationary(model: InclusionModel,
                         cap: int = ENUMERATION_CAP) -> StationaryEnumeration:
    """Exact stationary distribution over all compositions of N into L parts."""
    count = composition_count(model.N, model.L)
    if count > cap:
        raise EnumerationTooLargeError(
            f"too large for exact enumeration: {count} compositions of "
            f"N={model.N} into L={model.L} parts exceeds cap {cap}")
    configs = np.array(list(compositions(model.N, model.L)), dtype=np.int64)
    k = model.k_site
    lgk = math.lgamma(k)
    table = np.array([math.lgamma(k + c) - lgk - math.lgamma(c + 1)
                      for c in range(model.N + 1)])
    logw = table[configs].sum(axis=1)
    logw -= logw.max()
    probs = np.exp(logw)
    probs /= probs.sum()
    return StationaryEnumeration(model, configs, probs)


def measure_from_counts(model: InclusionModel, counts: Sequence[int]) -> AtomicMeasure:
    """The atomic probability measure sum_i (n_i/N) delta_{i/L}."""
    counts = model.check_counts(counts)
    return AtomicMeasure(model.lattice, tuple(c / model.N for c in counts), True)


def moment_values(model: InclusionModel, configs: np.ndarray,
                  phi: ProductTestFunction) -> np.ndarray:
    """h(W) for each configuration row, vectorized: prod_j <g_j, W>."""
    weights = configs / model.N
    xs = model.lattice_array
    out = np.ones(configs.shape[0])
    for g in phi.factors:
        out *= weights @ g.eval_array(xs)
    return out


def exact_moment(model: InclusionModel, phi: ProductTestFunction,
                 enum: Optional[StationaryEnumeration] = None) -> float:
    """E h(W) over the exactly enumerated stationary law."""
    if enum is None:
        enum = enumerate_stationary(model)
    return float(enum.probs @ moment_values(model, enum.configs, phi))


# ---------------------------------------------------------------------------
# samplers

_REJECTION_CHUNK_ROWS = 1 << 16


def negative_binomial_params(model: InclusionModel) -> tuple[float, float]:
    """(r, p) for numpy's negative_binomial giving per-site mean N/L.

    Site counts are NB with shape k_site; numpy's success parameter is
    p = theta/(N+theta), which solves L * k_site * (1-p)/p = N.
    """
    return model.k_site, model.theta / (model.N + model.theta)


def predicted_acceptance(model: InclusionModel) -> float:
    """P(sum of L iid NB(k_site, p) counts equals N) for the rejection sampler."""
    _, p = negative_binomial_params(model)
    N, theta = model.N, model.theta
    logp = (math.lgamma(theta + N) - math.lgamma(theta) - math.lgamma(N + 1)
            + theta * math.log(p) + N * math.log1p(-p))
    return math.exp(logp)


def sample_stationary_exact_batch(model: InclusionModel, count: int,
                                  rng: np.random.Generator,
                                  max_attempts: Optional[int] = None) -> np.ndarray:
    """`count` independent exact stationary configurations, shape (count, L).

    Draws L independent negative-binomial(k_site) counts per attempt and
    accepts attempts whose total is exactly N; the conditional law is the
    stationary law.  Deterministic given the generator state (fixed chunked
    consumption order).
    """
    r, p = negative_binomial_params(model)
    if max_attempts is None:
        max_attempts = max(1_000_000, int(200 * count / predicted_acceptance(model)))
    rows: list[np.ndarray] = []
    got = 0
    attempts = 0
    while got < count:
        if attempts >= max_attempts:
            rate = got / attempts if attempts else 0.0
            raise RuntimeError(
                f"rejection sampler hit the attempt cap {max_attempts} with "
                f"{got}/{count} accepted (observed rate {rate:.3g}, predicted "
                f"{predicted_acceptance(model):.3g})")
        block = min(_REJECTION_CHUNK_ROWS, max_attempts - attempts)
        draws = rng.negative_binomial(r, p, size=(block, model.L))
        attempts += block
        accepted = draws[draws.sum(axis=1) == model.N]
        if accepted.shape[0]:
            rows.append(accepted)
            got += accepted.shape[0]
    return np.concatenate(rows)[:count].astype(np.int64)


def sample_stationary_exact(model: InclusionModel, rng: np.random.Generator,
                            max_attempts: Optional[int] = None) -> Config:
    """One exact stationary configuration via negative-binomial rejection."""
    return tuple(int(c) for c in
                 sample_stationary_exact_batch(model, 1, rng, max_attempts)[0])


def default_burn_in(model: InclusionModel) -> int:
    """Documented MCMC default budget: 20 N L expected events."""
    return 20 * model.N * model.L


def stationary_mean_total_rate(model: InclusionModel) -> float:
    """E_pi of the total jump rate, in closed form.

    The stationary site marginal is Beta-binomial(N; k_site, theta - k_site),
    so E_pi sum n_i^2 = N(L-1)(theta+N)/(L(theta+1)) + N^2/L.  Verified
    against enumeration in the test suite.
    """
    N, L, theta = model.N, model.L, model.theta
    e_sumsq = N * (L - 1) / L * (theta + N) / (theta + 1) + N * N / L
    return N * N + model.k_site * N * (L - 1) - e_sumsq


def sample_stationary_mcmc(model: InclusionModel, rng: np.random.Generator,
                           burn_in_events: Optional[int] = None) -> Config:
    """Approximate stationary configuration by burn-in from the balanced start.

    `burn_in_events` (default 20 N L) is an expected-event budget: the chain
    runs to the deterministic time horizon burn_in_events / E_pi[total rate].
    Stopping at a fixed time rather than a fixed event count matters: the
    configuration at the K-th jump converges to the rate-biased embedded
    law pi(n) * rate(n), not to pi.
    """
    if burn_in_events is None:
        burn_in_events = default_burn_in(model)
    if burn_in_events < 1:
        raise ValueError("burn_in_events must be >= 1")
    horizon = burn_in_events / stationary_mean_total_rate(model)
    return simulate(model, model.balanced_start(), rng=rng, t_max=horizon,
                    buffer_hint=2 * burn_in_events)


def _mcmc_rows_worker(args) -> tuple[int, np.ndarray]:
    model_args, burn_in, master_seed, lo, hi = args
    model = InclusionModel(*model_args)
    out = np.empty((hi - lo, model.L), dtype=np.int64)
    for r in range(lo, hi):
        rng = make_rng(mix_seed(master_seed, r))
        out[r - lo] = sample_stationary_mcmc(model, rng, burn_in)
    return lo, out


def mcmc_sample_counts(model: InclusionModel, replicas: int, master_seed: int,
                       burn_in_events: Optional[int] = None,
                       workers: int = 1) -> np.ndarray:
    """`replicas` independent MCMC stationary samples, shape (replicas, L).

    Replica r uses the derived seed mix_seed(master_seed, r), so the result
    is identical whether replicas run sequentially or fanned out over
    worker processes.
    """
    if burn_in_events is None:
        burn_in_events = default_burn_in(model)
    model_args = (model.N, model.L, model.theta)
    if workers <= 1 or replicas < 64:
        _, rows = _mcmc_rows_worker((model_args, burn_in_events, master_seed,
                                     0, replicas))
        return rows
    import concurrent.futures

    chunk = (replicas + workers * 4 - 1) // (workers * 4)
    jobs = [(model_args, burn_in_events, master_seed, lo, min(lo + chunk, replicas))
            for lo in range(0, replicas, chunk)]
    out = np.empty((replicas, model.L), dtype=np.int64)
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        for lo, rows in pool.map(_mcmc_rows_worker, jobs):
            out[lo:lo + rows.shape[0]] = rows
    return out


def empirical_moment(model: InclusionModel, phi: ProductTestFunction,
                     replicas: int, master_seed: int, *,
                     method: str = "auto",
                     burn_in_events: Optional[int] = None,
                     workers: int = 1) -> tuple[float, float]:
    """Monte-Carlo (mean, standard error) of h(W) over independent
    stationary samples.  Deterministic given the master seed."""
    if replicas < 2:
        raise ValueError("need at least 2 replicas for a standard error")
    if method == "auto":
        method = "rejection" if predicted_acceptance(model) >= 1e-6 else "mcmc"
    if method == "rejection":
        rng = make_rng(mix_seed(master_seed, 0))
        counts = sample_stationary_exact_batch(model, replicas, rng)
    elif method == "mcmc":
        counts = mcmc_sample_counts(model, replicas, master_seed,
                                    burn_in_events, workers)
    else:
        raise ValueError(f"unknown sampling method {method!r}")
    values = moment_values(model, counts, phi)
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(replicas))
    return mean, se


# ---------------------------------------------------------------------------
# sampling partitions of the stationary random measure

def sample_partition_from_W(model: InclusionModel, n: int,
                            rng: np.random.Generator, *,
                            method: str = "rejection",
                            burn_in_events: Optional[int] = None) -> tuple[int, ...]:
    """Shape of the partition of n iid samples from one stationary draw W,
    grouping sample points that land on the same site."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if method == "rejection":
        counts = sample_stationary_exact(model, rng)
    elif method == "mcmc":
        counts = sample_stationary_mcmc(model, rng, burn_in_events)
    else:
        raise ValueError(f"unknown sampling method {method!r}")
    weights = np.asarray(counts) / model.N
    sites = rng.choice(model.L, size=n, p=weights)
    sizes = np.bincount(sites)
    return tuple(sorted((int(s) for s in sizes if s > 0), reverse=True))


def _injection_sums(power_sums: dict[int, np.ndarray],
                    shape: Sequence[int]) -> np.ndarray:
    """sum over ordered tuples of distinct sites of prod_t W_{s_t}^{shape_t},
    per configuration, by Moebius inversion over collisions of blocks:
    sum_{sigma partition of blocks} prod_G (-1)^{|G|-1} (|G|-1)! m_{sum shape(G)}."""
    b = len(shape)
    total = None
    for sigma in set_partitions(range(b)):
        coef = 1.0
        term = None
        for group in sigma:
            coef *= ((-1) ** (len(group) - 1)) * math.factorial(len(group) - 1)
            ps = power_sums[sum(shape[t] for t in group)]
            term = ps if term is None else term * ps
        contrib = coef * term
        total = contrib if total is None else total + contrib
    return total


def exact_partition_distribution_W(model: InclusionModel, n: int,
                                   enum: Optional[StationaryEnumeration] = None
                                   ) -> PartitionDistribution:
    """Exact law of the sampling-partition shape of n points from W, averaged
    over the enumerated stationary law.

    P(shape) = (#set partitions of that shape) *
               E[ sum over distinct-site injections of prod W^{block size} ].
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > 8:
        raise ValueError("exact partition law is capped at n <= 8")
    if enum is None:
        enum = enumerate_stationary(model)
    W = enum.weight_matrix
    power_sums = {r: (W ** r).sum(axis=1) for r in range(1, n + 1)}
    probs: dict[tuple[int, ...], float] = {}
    for shape in integer_partitions(n):
        per_config = _injection_sums(power_sums, shape)
        p = set_partition_count(shape) * float(enum.probs @ per_config)
        probs[shape] = 0.0 if abs(p) < 1e-14 else p
    total = sum(probs.values())
    if abs(total - 1.0) > 1e-12:
        raise AssertionError(f"partition probabilities sum to {total}")
    return PartitionDistribution(n, probs)
