"""Atomic measures on [0,1] and product-form polynomial test functions.

The test functions computed with throughout are h(mu) = <phi, mu^k> where
phi(x_1..x_k) = prod_j g_j(x_j) and each g_j is a polynomial on [0,1] in
the power basis.  For such phi the pairing factorizes,
<phi, mu^k> = prod_j <g_j, mu>, which keeps every downstream moment and
generator computation exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

MAX_FACTOR_DEGREE = 16

# Grid used by sup_norm_bound: 10^4 equispaced points on [0,1].
SUP_GRID_POINTS = 10_000


def _as_float_tuple(xs) -> tuple[float, ...]:
    return tuple(float(x) for x in xs)


@dataclass(frozen=True)
class PolyFactor:
    """Polynomial on [0,1], power basis, constant coefficient first."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        cs = _as_float_tuple(self.coeffs)
        if not cs:
            cs = (0.0,)
        if not all(math.isfinite(c) for c in cs):
            raise ValueError("polynomial coefficients must be finite")
        # canonical form: no trailing zero coefficients
        n = len(cs)
        while n > 1 and cs[n - 1] == 0.0:
            n -= 1
        object.__setattr__(self, "coeffs", cs[:n])

    @staticmethod
    def of(*coeffs: float) -> "PolyFactor":
        return PolyFactor(tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x: float) -> float:
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_array(self, xs: np.ndarray) -> np.ndarray:
        return np.polynomial.polynomial.polyval(xs, np.asarray(self.coeffs))

    def multiply(self, other: "PolyFactor") -> "PolyFactor":
        """Pointwise product (coefficient convolution)."""
        a, b = self.coeffs, other.coeffs
        out = [0.0] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            if ca == 0.0:
                continue
            for j, cb in enumerate(b):
                out[i + j] += ca * cb
        return PolyFactor(tuple(out))

    def integral(self) -> float:
        """Exact integral over [0,1]: sum_a c_a / (a+1)."""
        return sum(c / (a + 1) for a, c in enumerate(self.coeffs))

    def derivative_coeff_bound(self) -> float:
        """sum_a a*|c_a|, an upper bound for sup |g'| on [0,1]."""
        return sum(a * abs(c) for a, c in enumerate(self.coeffs))

    def second_derivative_coeff_bound(self) -> float:
        return sum(a * (a - 1) * abs(c) for a, c in enumerate(self.coeffs))

    @cached_property
    def sup_bound(self) -> float:
        return sup_norm_bound(self)


def integrate_uniform(g: PolyFactor) -> float:
    """Integral of g against the uniform law on [0,1], exact from coefficients."""
    return g.integral()


def sup_norm_bound(g: PolyFactor) -> float:
    """Upper bound for sup_{x in [0,1]} |g(x)|.

    Monomials are exact (|c|, attained at x=1).  Otherwise: max of |g| over
    the SUP_GRID_POINTS uniform grid plus a correction covering the gaps,
    the smaller of a Lipschitz term (spacing times a coefficient bound on
    |g'|) and a chord term (spacing^2/8 times a coefficient bound on |g''|).
    Both corrections are rigorous, so the result always dominates the true
    sup norm.
    """
    nonzero = [(a, c) for a, c in enumerate(g.coeffs) if c != 0.0]
    if not nonzero:
        return 0.0
    if len(nonzero) == 1:
        return abs(nonzero[0][1])
    grid = np.linspace(0.0, 1.0, SUP_GRID_POINTS)
    vals = g.eval_array(grid)
    gmax = float(np.max(np.abs(vals)))
    h = 1.0 / (SUP_GRID_POINTS - 1)
    corr = min(h * g.derivative_coeff_bound(),
               h * h / 8.0 * g.second_derivative_coeff_bound())
    return gmax + corr + 1e-12


@dataclass(frozen=True)
class ProductTestFunction:
    """h(mu) = <phi, mu^k> with phi a product of k polynomial factors."""

    k: int
    factors: tuple[PolyFactor, ...]

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("moment order k must be >= 1")
        if len(self.factors) != self.k:
            raise ValueError(f"expected {self.k} factors, got {len(self.factors)}")
        for g in self.factors:
            if g.degree > MAX_FACTOR_DEGREE:
                raise ValueError(
                    f"factor degree {g.degree} exceeds cap {MAX_FACTOR_DEGREE}")

    @staticmethod
    def from_factors(*factors: PolyFactor) -> "ProductTestFunction":
        return ProductTestFunction(len(factors), tuple(factors))

    @staticmethod
    def monomials(degrees: Sequence[int]) -> "ProductTestFunction":
        """phi(x_1..x_k) = prod x_j^{d_j}."""
        factors = tuple(PolyFactor((0.0,) * d + (1.0,)) for d in degrees)
        return ProductTestFunction(len(factors), factors)

    @cached_property
    def sup_norm_bound(self) -> float:
        out = 1.0
        for g in self.factors:
            out *= g.sup_bound
        return out

    def to_jsonable(self) -> dict:
        return {"k": self.k, "factors": [list(g.coeffs) for g in self.factors]}

    @staticmethod
    def from_jsonable(obj: dict) -> "ProductTestFunction":
        factors = tuple(PolyFactor(tuple(cs)) for cs in obj["factors"])
        return ProductTestFunction(int(obj["k"]), factors)


@dataclass(frozen=True)
class AtomicMeasure:
    """Finitely supported measure on [0,1]: distinct locations with weights.

    Weights may be signed for general (non-probability) measures; the
    directional derivatives used downstream perturb by adding point masses,
    which leaves the probability simplex.
    """

    locations: tuple[float, ...]
    weights: tuple[float, ...]
    is_probability: bool = False

    def __post_init__(self):
        locs = _as_float_tuple(self.locations)
        ws = _as_float_tuple(self.weights)
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "weights", ws)
        if len(locs) != len(ws):
            raise ValueError("locations and weights must have equal length")
        for x in locs:
            if not (0.0 <= x <= 1.0):
                raise ValueError(f"location {x} outside [0,1]")
        if len(set(locs)) != len(locs):
            raise ValueError("locations must be pairwise distinct")
        if not all(math.isfinite(w) for w in ws):
            raise ValueError("weights must be finite")
        if self.is_probability:
            if any(w < 0.0 for w in ws):
                raise ValueError("probability measure needs nonnegative weights")
            if abs(sum(ws) - 1.0) > 1e-12:
                raise ValueError(f"probability weights sum to {sum(ws)}, not 1")

    @staticmethod
    def probability(locations, weights) -> "AtomicMeasure":
        return AtomicMeasure(tuple(locations), tuple(weights), True)

    @staticmethod
    def point_mass(x: float) -> "AtomicMeasure":
        return AtomicMeasure((x,), (1.0,), True)

    @cached_property
    def loc_array(self) -> np.ndarray:
        a = np.array(self.locations, dtype=float)
        a.flags.writeable = False
        return a

    @cached_property
    def weight_array(self) -> np.ndarray:
        a = np.array(self.weights, dtype=float)
        a.flags.writeable = False
        return a

    def total_mass(self) -> float:
        return float(sum(self.weights))

    def add_point_mass(self, x: float, eps: float) -> "AtomicMeasure":
        """mu + eps*delta_x (unnormalized; result is not flagged probability)."""
        if x in self.locations:
            i = self.locations.index(x)
            ws = list(self.weights)
            ws[i] += eps
            return AtomicMeasure(self.locations, tuple(ws), False)
        return AtomicMeasure(self.locations + (x,), self.weights + (eps,), False)


def pair(g: PolyFactor, mu: AtomicMeasure) -> float:
    """<g, mu> = sum_i g(x_i) w_i."""
    if len(mu.locations) >= 8:
        return float(mu.weight_array @ g.eval_array(mu.loc_array))
    return sum(w * g(x) for x, w in zip(mu.locations, mu.weights))


def eval_moment(phi: ProductTestFunction, mu: AtomicMeasure, *,
                strict: bool = True) -> float:
    """<phi, mu^k> = prod_j <g_j, mu>, exact for product-form phi.

    With strict=True (the default) mu must be flagged as a probability
    measure; strict=False admits arbitrary finite signed measures.
    """
    if strict and not mu.is_probability:
        raise ValueError("eval_moment requires a probability measure in strict mode")
    out = 1.0
    for g in phi.factors:
        out *= pair(g, mu)
    return out
