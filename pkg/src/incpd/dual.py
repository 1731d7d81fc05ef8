"""The dual jump chain on product-form test functions and the induced
Stein-equation machinery for the Dirichlet process.

A product function psi(x_1..x_m) = c * prod_i g_i(x_i) evolves by two moves:
any unordered pair of coordinates coalesces at rate 1 (the two factors are
merged into their pointwise polynomial product), and each coordinate
mutates at rate theta/2 (the factor is integrated out against the uniform
law, scaling c).  Dimension strictly decreases, the chain absorbs at a
constant, and the absorbed mean equals the stationary moment E <phi, Z^k>.

The Stein solution f_h for h(mu) = <phi, mu^k> decomposes over the states
the embedded chain can visit:

    f_h(mu) = - sum_states P(reach psi) * mean_holding(dim psi)
              * ( <psi, mu^dim> - absorbed_mean(psi) )

Each state subtracts its own conditional absorbed mean, which makes the
decomposition valid without centering h.  Since only <psi, mu^dim> =
c * prod <g_i, mu> depends on mu, and that is multilinear in added point
masses, all directional derivatives are exact finite sums.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .measures import (
    AtomicMeasure,
    PolyFactor,
    ProductTestFunction,
    eval_moment,
)

DUAL_MOMENT_MAX_K = 6
STEIN_SOLUTION_MAX_K = 4
STEIN_RESIDUAL_MAX_K = 3

Coeffs = tuple[float, ...]


def _trim(cs: list[float]) -> Coeffs:
    n = len(cs)
    while n > 1 and cs[n - 1] == 0.0:
        n -= 1
    return tuple(cs[:n])


def _pmul(a: Coeffs, b: Coeffs) -> Coeffs:
    out = [0.0] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                out[i + j] += ca * cb
    return _trim(out)


def _pint(a: Coeffs) -> float:
    return sum(c / (d + 1) for d, c in enumerate(a))


GroupsKey = tuple[Coeffs, ...]


def _groups_key(groups) -> GroupsKey:
    return tuple(sorted(groups))


@dataclass(frozen=True)
class DualChainLaw:
    """Embedded-chain law of the dual process at concentration theta.

    At dimension m: each of the m(m-1)/2 pairs coalesces at rate 1 and each
    of the m coordinates mutates at rate theta/2, so the total rate is
    m(m-1+theta)/2.  Works with Fraction theta for exact-arithmetic checks.
    """

    theta: object

    def total_rate(self, m: int):
        if m < 1:
            raise ValueError("dimension must be >= 1")
        return m * (m - 1 + self.theta) / 2

    def pair_probability(self, m: int):
        return 2 / (m * (m - 1 + self.theta))

    def mutation_probability(self, m: int):
        return self.theta / (m * (m - 1 + self.theta))

    def mean_holding_time(self, m: int):
        return 2 / (m * (m - 1 + self.theta))


def mean_holding_time(m: int, theta: float) -> float:
    """Mean sojourn 2/(m(m-1+theta)) of the dual chain at dimension m."""
    if m < 1:
        raise ValueError("the absorbed state (m=0) has no holding time")
    return 2.0 / (m * (m - 1 + theta))


@dataclass(frozen=True)
class DualFunctionState:
    """Product-form function c * prod_i g_i(x_i); the dual chain's state."""

    scalar: float
    groups: tuple[PolyFactor, ...]

    @property
    def dimension(self) -> int:
        return len(self.groups)

    @staticmethod
    def from_test_function(phi: ProductTestFunction) -> "DualFunctionState":
        return DualFunctionState(1.0, phi.factors)

    def coalesce(self, i: int, j: int) -> "DualFunctionState":
        """Merge coordinates i < j (1-based) into their pointwise product."""
        m = self.dimension
        if not (1 <= i < j <= m):
            raise ValueError(f"need 1 <= i < j <= {m}, got ({i},{j})")
        gs = list(self.groups)
        merged = gs[i - 1].multiply(gs[j - 1])
        del gs[j - 1]
        gs[i - 1] = merged
        return DualFunctionState(self.scalar, tuple(gs))

    def mutate(self, i: int) -> "DualFunctionState":
        """Integrate coordinate i (1-based) out against the uniform law."""
        m = self.dimension
        if not (1 <= i <= m):
            raise ValueError(f"need 1 <= i <= {m}, got {i}")
        gs = list(self.groups)
        g = gs.pop(i - 1)
        return DualFunctionState(self.scalar * g.integral(), tuple(gs))

    def evaluate(self, xs) -> float:
        if len(xs) != self.dimension:
            raise ValueError("need one coordinate per group")
        out = self.scalar
        for g, x in zip(self.groups, xs):
            out *= g(x)
        return out

    def pairing(self, mu: AtomicMeasure) -> float:
        """<psi, mu^m> = scalar * prod_i <g_i, mu>."""
        out = self.scalar
        for g in self.groups:
            out *= sum(w * g(x) for x, w in zip(mu.locations, mu.weights))
        return out


def _absorbed_mean(groups: GroupsKey, theta: float,
                   memo: dict[GroupsKey, float]) -> float:
    """Expected absorbed scalar of the embedded chain started from the
    product of `groups` with scalar 1."""
    if not groups:
        return 1.0
    cached = memo.get(groups)
    if cached is not None:
        return cached
    m = len(groups)
    denom = m * (m - 1 + theta)
    p_pair = 2.0 / denom
    p_mut = theta / denom
    total = 0.0
    for i in range(m):
        for j in range(i + 1, m):
            rest = groups[:i] + groups[i + 1:j] + groups[j + 1:]
            merged = _groups_key(rest + (_pmul(groups[i], groups[j]),))
            total += p_pair * _absorbed_mean(merged, theta, memo)
        rest = _groups_key(groups[:i] + groups[i + 1:])
        total += p_mut * _pint(groups[i]) * _absorbed_mean(rest, theta, memo)
    memo[groups] = total
    return total


def dp_moment_dual(theta: float, phi: ProductTestFunction) -> float:
    """E <phi, Z^k> as the absorbed mean of the dual chain started at phi."""
    if theta <= 0.0:
        raise ValueError("theta must be positive")
    if phi.k > DUAL_MOMENT_MAX_K:
        raise ValueError(f"k={phi.k} exceeds the dual recursion cap "
                         f"{DUAL_MOMENT_MAX_K}")
    key = _groups_key(g.coeffs for g in phi.factors)
    return _absorbed_mean(key, theta, {})


@dataclass(frozen=True)
class _ChainState:
    prob_reach: float
    holding: float
    scalar: float
    groups: tuple[PolyFactor, ...]
    centered_mean: float  # conditional absorbed mean from this state


class SteinSolution:
    """f_h for h(mu) = <phi, mu^k>, as a finite sum over reachable dual states.

    Exposes exact evaluation, exact directional (point-mass) derivatives up
    to third order, and application of the Fleming-Viot generator.
    """

    def __init__(self, theta: float, phi: ProductTestFunction):
        if theta <= 0.0:
            raise ValueError("theta must be positive")
        if phi.k > STEIN_SOLUTION_MAX_K:
            raise ValueError(f"k={phi.k} exceeds the Stein-solution cap "
                             f"{STEIN_SOLUTION_MAX_K}")
        self.theta = theta
        self.phi = phi
        memo: dict[GroupsKey, float] = {}
        start = _groups_key(g.coeffs for g in phi.factors)
        self.moment = _absorbed_mean(start, theta, memo)

        states: list[_ChainState] = []
        level: dict[tuple[float, GroupsKey], float] = {(1.0, start): 1.0}
        for m in range(phi.k, 0, -1):
            denom = m * (m - 1 + theta)
            p_pair = 2.0 / denom
            p_mut = theta / denom
            holding = 2.0 / denom
            nxt: dict[tuple[float, GroupsKey], float] = {}
            for (scalar, groups), prob in level.items():
                states.append(_ChainState(
                    prob, holding, scalar,
                    tuple(PolyFactor(g) for g in groups),
                    scalar * _absorbed_mean(groups, theta, memo)))
                for i in range(m):
                    for j in range(i + 1, m):
                        rest = groups[:i] + groups[i + 1:j] + groups[j + 1:]
                        key = (scalar,
                               _groups_key(rest + (_pmul(groups[i], groups[j]),)))
                        nxt[key] = nxt.get(key, 0.0) + prob * p_pair
                for i in range(m):
                    key = (scalar * _pint(groups[i]),
                           _groups_key(groups[:i] + groups[i + 1:]))
                    nxt[key] = nxt.get(key, 0.0) + prob * p_mut
            level = nxt
        self.states = states

    # -- evaluation -------------------------------------------------------

    def _group_pairings(self, state: _ChainState, mu: AtomicMeasure) -> list[float]:
        locs, ws = mu.locations, mu.weights
        return [sum(w * g(x) for x, w in zip(locs, ws)) for g in state.groups]

    def value(self, mu: AtomicMeasure) -> float:
        """f_h(mu); accepts any finite signed atomic measure."""
        total = 0.0
        for st in self.states:
            prod = st.scalar
            for g in st.groups:
                prod *= sum(w * g(x) for x, w in zip(mu.locations, mu.weights))
            total += st.prob_reach * st.holding * (prod - st.centered_mean)
        return -total

    def derivative(self, mu: AtomicMeasure, points) -> float:
        """Iterated point-mass derivative of f_h at mu in the directions
        delta_x for x in `points` (1 to 3 points; repeats allowed)."""
        order = len(points)
        if not (1 <= order <= 3):
            raise ValueError("between 1 and 3 derivative points required")
        total = 0.0
        for st in self.states:
            m = len(st.groups)
            if m < order:
                continue
            a = self._group_pairings(st, mu)
            gvals = [[g(x) for g in st.groups] for x in points]
            acc = 0.0
            for picks in itertools.permutations(range(m), order):
                term = 1.0
                for axis, p in enumerate(picks):
                    term *= gvals[axis][p]
                for q in range(m):
                    if q not in picks:
                        term *= a[q]
                acc += term
            total += st.prob_reach * st.holding * st.scalar * acc
        return -total

    def gradient_coeffs(self, mu: AtomicMeasure) -> np.ndarray:
        """Coefficients of x -> d_x f_h(mu), an exact polynomial in x."""
        out = [0.0]
        for st in self.states:
            a = self._group_pairings(st, mu)
            m = len(st.groups)
            for p in range(m):
                rest = st.scalar
                for q in range(m):
                    if q != p:
                        rest *= a[q]
                w = -st.prob_reach * st.holding * rest
                cs = st.groups[p].coeffs
                if len(cs) > len(out):
                    out.extend([0.0] * (len(cs) - len(out)))
                for d, c in enumerate(cs):
                    out[d] += w * c
        return np.array(out)

    def _second_matrix(self, mu: AtomicMeasure) -> np.ndarray:
        """D[s,t] = d^2_{x_s x_t} f_h(mu) over the atoms of mu."""
        locs = mu.loc_array
        n = len(mu.locations)
        D = np.zeros((n, n))
        for st in self.states:
            m = len(st.groups)
            if m < 2:
                continue
            a = self._group_pairings(st, mu)
            gl = [g.eval_array(locs) for g in st.groups]
            w = -st.prob_reach * st.holding * st.scalar
            for p in range(m):
                for q in range(m):
                    if p == q:
                        continue
                    rest = 1.0
                    for r in range(m):
                        if r != p and r != q:
                            rest *= a[r]
                    D += (w * rest) * np.outer(gl[p], gl[q])
        return D

    def generator_value(self, mu: AtomicMeasure, *, halved: bool = True) -> float:
        """The Fleming-Viot generator applied to f_h at an atomic probability
        measure.  halved=True uses the (theta/2, 1/2) normalization; False
        drops both halves (the time-rescaled variant)."""
        grad = self.gradient_coeffs(mu)
        int_grad = float(sum(c / (d + 1) for d, c in enumerate(grad)))
        grad_atoms = np.polynomial.polynomial.polyval(mu.loc_array, grad)
        ws = mu.weight_array
        mutation_part = int_grad - float(ws @ grad_atoms)
        D = self._second_matrix(mu)
        pair_part = float(np.diag(D) @ ws) - float(ws @ D @ ws)
        if halved:
            return 0.5 * self.theta * mutation_part + 0.5 * pair_part
        return self.theta * mutation_part + pair_part

    def residual(self, mu: AtomicMeasure, *, halved: bool = True) -> float:
        """A2 f_h(mu) - (h(mu) - E h(Z)); identically 0 (to rounding) under
        the halved normalization."""
        h = eval_moment(self.phi, mu, strict=False)
        return self.generator_value(mu, halved=halved) - (h - self.moment)


@lru_cache(maxsize=256)
def _solution(theta: float, phi: ProductTestFunction) -> SteinSolution:
    return SteinSolution(theta, phi)


def eval_fh(theta: float, phi: ProductTestFunction, mu: AtomicMeasure, *,
            strict: bool = True) -> float:
    """Exact value of the Stein solution f_h at an atomic measure.

    strict=True requires mu to be a probability measure (the derivative
    oracle evaluates perturbed, unnormalized measures with strict=False).
    """
    if strict and not mu.is_probability:
        raise ValueError("eval_fh requires a probability measure in strict mode")
    return _solution(theta, phi).value(mu)


def fh_derivative(theta: float, phi: ProductTestFunction, mu: AtomicMeasure,
                  points) -> float:
    """Iterated point-mass derivative of f_h (1 to 3 directions)."""
    return _solution(theta, phi).derivative(mu, tuple(points))


def stein_residual(theta: float, phi: ProductTestFunction, mu: AtomicMeasure,
                   *, halved: bool = True) -> float:
    """Residual of the Stein identity at mu.

    With halved=True this is A2 f_h(mu) - (h(mu) - E h(Z)) under the
    (theta/2, 1/2) generator and vanishes up to rounding (|.| < 1e-8 is the
    contract).  halved=False reports the same residual under the generator
    with both halves dropped, which equals h(mu) - E h(Z) identically; it is
    exposed for the normalization comparison, not as a conformance check.
    """
    if not mu.is_probability:
        raise ValueError("stein_residual requires a probability measure")
    if phi.k > STEIN_RESIDUAL_MAX_K:
        raise ValueError(f"k={phi.k} exceeds the residual cap "
                         f"{STEIN_RESIDUAL_MAX_K}")
    return _solution(theta, phi).residual(mu, halved=halved)
