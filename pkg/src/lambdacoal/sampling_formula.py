"""Exact family-size distributions by recursion on the last event.

A sample of n individuals, grouped into mutation families, is summarized
by the partition vector a where a[j] counts families of size j.  Looking
one event back in time from the observed sample: either the most recent
event was a mutation that froze a singleton family (weight mu * n), or it
was a merger of k of the then n-k+1 lineages (weight C(n,k) * rate(n,k)
for each k), which turns some family of size j in the smaller sample into
a family of size j+k-1.  Normalizing by the total event weight

    mu * n + sum_k C(n, k) * rate(n, k)

gives a linear recursion that is solved here by dynamic programming over
sample sizes 1..n.  The binomially weighted total is forced by
normalization: the probabilities of "last event was a mutation" and "last
event merged some k-subset" must sum to one.

For the pure pair-merger measure (unit atom at 0) the recursion collapses
to the classical Ewens sampling formula with theta = 2 * mu, which is
implemented in closed form as an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import PartitionCapError, StuckChainError
from .measures import RateTable

__all__ = [
    "PartitionVector",
    "SamplingDistribution",
    "enumerate_partition_vectors",
    "solve",
    "solve_exact",
    "ewens",
    "DEFAULT_PARTITION_CAP",
]

DEFAULT_PARTITION_CAP = 40


@dataclass(frozen=True)
class PartitionVector:
    """Family-size multiplicities: counts[j-1] families of size j.

    Trailing zeros are trimmed on construction; the empty vector is not
    valid.  Text form: "1^a1 2^a2 ..." listing only nonzero entries,
    e.g. "1^2 5^1" for two singletons and one family of five.
    """

    counts: tuple[int, ...]

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be nonnegative")
        trimmed = _trim(self.counts)
        if not trimmed:
            raise ValueError("counts must contain a positive entry")
        if trimmed != self.counts:
            object.__setattr__(self, "counts", trimmed)

    @property
    def n(self) -> int:
        return sum((j + 1) * c for j, c in enumerate(self.counts))

    @property
    def num_families(self) -> int:
        return sum(self.counts)

    @classmethod
    def from_sizes(cls, sizes) -> "PartitionVector":
        sizes = list(sizes)
        if not sizes or any(s < 1 for s in sizes):
            raise ValueError("need positive family sizes")
        counts = [0] * max(sizes)
        for s in sizes:
            counts[s - 1] += 1
        return cls(tuple(counts))

    @classmethod
    def from_text(cls, text: str) -> "PartitionVector":
        entries = {}
        for item in text.split():
            size_s, _, count_s = item.partition("^")
            size, count = int(size_s), int(count_s)
            if size < 1 or count < 1 or size in entries:
                raise ValueError(f"bad partition text {text!r}")
            entries[size] = count
        if not entries:
            raise ValueError("empty partition text")
        counts = [0] * max(entries)
        for size, count in entries.items():
            counts[size - 1] = count
        return cls(tuple(counts))

    def to_text(self) -> str:
        return " ".join(
            f"{j + 1}^{c}" for j, c in enumerate(self.counts) if c > 0
        )

    def sizes(self) -> list[int]:
        out = []
        for j, c in enumerate(self.counts):
            out.extend([j + 1] * c)
        return out


def _trim(counts) -> tuple[int, ...]:
    counts = list(counts)
    while counts and counts[-1] == 0:
        counts.pop()
    return tuple(counts)


@lru_cache(maxsize=None)
def _partitions_desc(n: int, largest: int) -> tuple[tuple[int, ...], ...]:
    """Partitions of n into parts <= largest, as descending part tuples, in
    reverse lexicographic order (largest part first)."""
    if n == 0:
        return ((),)
    out = []
    for first in range(min(n, largest), 0, -1):
        for rest in _partitions_desc(n - first, first):
            out.append((first,) + rest)
    return tuple(out)


def enumerate_partition_vectors(
    n: int, cap: int = DEFAULT_PARTITION_CAP
) -> list[PartitionVector]:
    """All partition vectors of n, in reverse lexicographic order of the
    descending part lists (single block first, all singletons last)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > cap:
        raise PartitionCapError(f"partition cap exceeded: n={n} > cap={cap}")
    out = []
    for parts in _partitions_desc(n, n):
        counts = [0] * parts[0]
        for p in parts:
            counts[p - 1] += 1
        out.append(PartitionVector(tuple(counts)))
    return out


@dataclass(frozen=True, eq=False)
class SamplingDistribution:
    """Exact distribution over partition vectors of a fixed sample size."""

    n: int
    mu: float
    descriptor: str
    entries: dict  # trimmed counts tuple -> probability

    def prob(self, pv) -> float:
        key = pv.counts if isinstance(pv, PartitionVector) else _trim(pv)
        return self.entries.get(key, 0.0)

    def items_ordered(self):
        """(PartitionVector, prob) pairs in enumeration order."""
        for pv in enumerate_partition_vectors(self.n):
            yield pv, self.entries[pv.counts]

    def total(self):
        return math.fsum(self.entries.values())


def _solve_tables(rate, total, mu, n):
    """DP over sample sizes; generic over float and Fraction arithmetic.

    rate(b, k) and total(b) supply the merge rates; mu may be a float or a
    Fraction.  Returns a list tables[m] of dicts for m = 1..n.
    """
    zero = mu * 0
    tables = [None, {(1,): zero + 1}]
    for m in range(2, n + 1):
        denom = mu * m + total(m)
        if denom == 0:
            raise StuckChainError(
                f"no events possible with {m} lineages (mu and all rates vanish)"
            )
        table = {}
        prev_tables = tables
        for pv in enumerate_partition_vectors(m, cap=max(m, DEFAULT_PARTITION_CAP)):
            a = list(pv.counts) + [0] * (m - len(pv.counts))
            terms = []
            if a[0] >= 1:
                smaller = list(a)
                smaller[0] -= 1
                terms.append(mu * m * prev_tables[m - 1][_trim(smaller)])
            for k in range(2, m + 1):
                w = math.comb(m, k) * rate(m, k)
                if w == 0:
                    continue
                m_small = m - k + 1
                for j in range(1, m_small + 1):
                    t = j + k - 1
                    if a[t - 1] < 1:
                        continue
                    b = list(a)
                    b[j - 1] += 1
                    b[t - 1] -= 1
                    # b sums to m_small, so entries past m_small are zero
                    # and trimming yields a valid smaller-sample key
                    coeff = j * (a[j - 1] + 1)
                    terms.append(
                        w * coeff * prev_tables[m_small][_trim(b)] / m_small
                    )
            acc = math.fsum(terms) if isinstance(denom, float) else sum(terms)
            table[pv.counts] = acc / denom
        tables.append(table)
    return tables


def solve(rates: RateTable, mu: float, n: int) -> SamplingDistribution:
    """Exact family-size distribution for a sample of size n.

    Requires rates.n_max >= n and mu >= 0 with mu + total(m) > 0 for all
    2 <= m <= n.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if mu < 0.0:
        raise ValueError("mu must be nonnegative")
    if rates.n_max < n:
        raise ValueError(f"rate table covers n_max={rates.n_max} < n={n}")
    tables = _solve_tables(rates.rate, rates.total, float(mu), n)
    return SamplingDistribution(
        n=n, mu=float(mu), descriptor=rates.descriptor, entries=tables[n]
    )


def solve_exact(atoms, mu, n: int) -> dict:
    """Rational-arithmetic variant of solve for atomic measures.

    atoms is an iterable of (location, weight) pairs; locations, weights
    and mu must be Fraction-convertible.  Returns a dict mapping trimmed
    counts tuples to exact Fraction probabilities.
    """
    pairs = [(Fraction(x), Fraction(w)) for x, w in atoms]
    mu = Fraction(mu)

    def rate(b, k):
        return sum(w * x ** (k - 2) * (1 - x) ** (b - k) for x, w in pairs)

    def total(b):
        return sum(math.comb(b, k) * rate(b, k) for k in range(2, b + 1))

    tables = _solve_tables(rate, total, mu, n)
    return tables[n]


def ewens(theta: float, n: int) -> SamplingDistribution:
    """Closed-form family-size distribution of the pure pair-merger process
    with scaled mutation rate theta = 2 * mu."""
    if theta <= 0.0:
        raise ValueError("theta must be positive")
    if n < 1:
        raise ValueError("n must be at least 1")
    rising = math.fsum(math.log(theta + i) for i in range(n))
    entries = {}
    for pv in enumerate_partition_vectors(n):
        log_p = math.lgamma(n + 1) - rising
        for j, c in enumerate(pv.counts):
            if c == 0:
                continue
            size = j + 1
            log_p += c * (math.log(theta) - math.log(size)) - math.lgamma(c + 1)
        entries[pv.counts] = math.exp(log_p)
    return SamplingDistribution(
        n=n, mu=theta / 2.0, descriptor="ewens", entries=entries
    )
