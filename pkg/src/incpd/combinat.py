"""Integer-partition and set-partition enumeration helpers."""

from __future__ import annotations

import math
from typing import Iterator, Sequence


def integer_partitions(n: int) -> Iterator[tuple[int, ...]]:
    """All partitions of n as non-increasing tuples (accel_asc, Kelleher)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        yield ()
        return
    a = [0] * (n + 1)
    k = 1
    y = n - 1
    while k != 0:
        x = a[k - 1] + 1
        k -= 1
        while 2 * x <= y:
            a[k] = x
            y -= x
            k += 1
        l = k + 1
        while x <= y:
            a[k] = x
            a[l] = y
            yield tuple(sorted(a[: k + 2], reverse=True))
            x += 1
            y -= 1
        a[k] = x + y
        y = x + y - 1
        yield tuple(sorted(a[: k + 1], reverse=True))


def set_partitions(items: Sequence) -> Iterator[tuple[tuple, ...]]:
    """All set partitions of `items`, each a tuple of blocks."""
    items = list(items)
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for sub in set_partitions(rest):
        # first joins an existing block
        for i in range(len(sub)):
            yield sub[:i] + (((first,) + sub[i]),) + sub[i + 1:]
        # first opens its own block
        yield ((first,),) + sub


def shape_of(blocks: Sequence[Sequence]) -> tuple[int, ...]:
    """Non-increasing block sizes of a set partition."""
    return tuple(sorted((len(b) for b in blocks), reverse=True))


def multiplicities(shape: Sequence[int]) -> dict[int, int]:
    out: dict[int, int] = {}
    for s in shape:
        out[s] = out.get(s, 0) + 1
    return out


def set_partition_count(shape: Sequence[int]) -> int:
    """Number of set partitions of {1..n} with the given shape.

    n! / (prod_s (s!)^{m_s} * m_s!) with m_s the multiplicity of size s.
    """
    n = sum(shape)
    count = math.factorial(n)
    for s, m in multiplicities(shape).items():
        count //= math.factorial(s) ** m * math.factorial(m)
    return count


def log_rising_factorial(theta: float, n: int) -> float:
    """log( theta (theta+1) ... (theta+n-1) )."""
    return sum(math.log(theta + i) for i in range(n))


def compositions(n: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All ordered tuples of `parts` nonnegative integers summing to n."""
    if parts == 1:
        yield (n,)
        return
    for head in range(n + 1):
        for tail in compositions(n - head, parts - 1):
            yield (head,) + tail


def composition_count(n: int, parts: int) -> int:
    return math.comb(n + parts - 1, parts - 1)
