"""Closed-form error bounds: moment approximation, sampling-partition total
variation, and the sup-norm bounds on derivatives of the Stein solution."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class BoundBreakdown:
    """The three additive terms of the approximation bound, with inputs echoed.

    term_riemann is the 1/L lattice-discretization contribution,
    term_mutation the 1/N second-order contribution, and term_third the 1/N
    third-order contribution.
    """

    term_riemann: float
    term_mutation: float
    term_third: float
    N: int
    L: int
    theta: float
    order: int  # moment order k, or sample size n for partition bounds
    sup_norm: float

    def __post_init__(self):
        for t in (self.term_riemann, self.term_mutation, self.term_third):
            if t < 0.0:
                raise ValueError("bound terms must be nonnegative")

    @property
    def total(self) -> float:
        return self.term_riemann + self.term_mutation + self.term_third

    def to_jsonable(self) -> dict:
        return {
            "term_riemann": self.term_riemann,
            "term_mutation": self.term_mutation,
            "term_third": self.term_third,
            "total": self.total,
            "inputs": {"N": self.N, "L": self.L, "theta": self.theta,
                       "order": self.order, "sup_norm": self.sup_norm},
        }


def moment_error_bound(N: int, L: int, theta: float, k: int,
                       sup_norm: float) -> BoundBreakdown:
    """Bound on |E h(W) - E h(Z)| for h(mu) = <phi, mu^k>:

        [ k(k-1)/(2L(theta+1)) + 2k(k-1)theta/(N(theta+1))
          + 8k(k-1)(k-2)/(9N(theta+2)) ] * ||phi||_inf
    """
    if N < 1 or L < 1 or k < 1:
        raise ValueError("N, L, k must be positive")
    if theta <= 0.0:
        raise ValueError("theta must be positive")
    if sup_norm < 0.0:
        raise ValueError("sup_norm must be nonnegative")
    kk = k * (k - 1)
    return BoundBreakdown(
        term_riemann=kk / (2 * L * (theta + 1)) * sup_norm,
        term_mutation=2 * kk * theta / (N * (theta + 1)) * sup_norm,
        term_third=8 * kk * (k - 2) / (9 * N * (theta + 2)) * sup_norm,
        N=N, L=L, theta=theta, order=k, sup_norm=sup_norm)


def partition_tv_bound(N: int, L: int, theta: float, n: int) -> BoundBreakdown:
    """Bound on d_TV between the sampling-partition laws of W and Z for a
    sample of size n; same three terms with k replaced by n and unit
    sup norm."""
    if n < 1:
        raise ValueError("n must be positive")
    return moment_error_bound(N, L, theta, n, 1.0)


def stein_factors(theta: float, k: int,
                  sup_norm: float) -> tuple[float, float, float]:
    """Sup-norm bounds on the first three point-mass derivatives of f_h:

        2k/theta, k(k-1)/(theta+1), 2k(k-1)(k-2)/(3(theta+2)),

    each scaled by ||phi||_inf.
    """
    if theta <= 0.0:
        raise ValueError("theta must be positive")
    if k < 1:
        raise ValueError("k must be positive")
    return (2 * k / theta * sup_norm,
            k * (k - 1) / (theta + 1) * sup_norm,
            2 * k * (k - 1) * (k - 2) / (3 * (theta + 2)) * sup_norm)
