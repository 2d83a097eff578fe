"""Coalescent simulators driven by a rate table.

Two processes share the same merge dynamics.  The plain coalescent merges
k-subsets of blocks until one block remains.  The frozen variant adds
mutation: each active block is hit by mutation at rate mu, and a hit
freezes the block as a completed family; the process ends when every
label sits in a frozen block, and the frozen block sizes are the family
sizes of the sample.  Only the embedded jump chain matters for family
sizes, so the fast sampler never draws holding times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import StuckChainError
from .measures import RateTable
from .paintbox import SetPartition
from .sampling_formula import PartitionVector

__all__ = [
    "FrozenState",
    "simulate_coalescent_path",
    "simulate_frozen_path",
    "simulate_frozen_coalescent",
]


def _merge_pick(rates: RateTable, b: int, rng: np.random.Generator) -> int:
    """Draw the merger size k with probability proportional to C(b,k)*rate."""
    weights = np.array(
        [math.comb(b, k) * rates.rates[b, k] for k in range(2, b + 1)]
    )
    total = weights.sum()
    if total <= 0.0:
        raise StuckChainError(f"no merge possible from {b} blocks")
    return 2 + int(np.searchsorted(np.cumsum(weights), rng.random() * total))


def simulate_coalescent_path(
    rates: RateTable, n: int, rng: np.random.Generator
) -> list[tuple[float, SetPartition]]:
    """Full merge path on labelled blocks, ending in the single-block state.

    Returns (time, partition) pairs starting with the singletons at time 0.
    """
    if not (2 <= n <= rates.n_max):
        raise ValueError(f"need 2 <= n <= {rates.n_max}")
    blocks = [[i] for i in range(1, n + 1)]
    t = 0.0
    path = [(0.0, SetPartition.from_blocks(blocks))]
    while len(blocks) > 1:
        b = len(blocks)
        total = rates.total(b)
        if total <= 0.0:
            raise StuckChainError(
                f"absorbing before coalescence: total rate 0 at {b} blocks"
            )
        t += rng.exponential(1.0 / total)
        k = _merge_pick(rates, b, rng)
        chosen = sorted(rng.choice(b, size=k, replace=False), reverse=True)
        merged = []
        for idx in chosen:
            merged.extend(blocks.pop(idx))
        blocks.append(merged)
        path.append((t, SetPartition.from_blocks(blocks)))
    return path


@dataclass(frozen=True)
class FrozenState:
    """One step of the freezing coalescent: which blocks are still active,
    which are frozen families, and the event time."""

    time: float
    active: tuple[tuple[int, ...], ...]
    frozen: tuple[tuple[int, ...], ...]


def simulate_frozen_path(
    rates: RateTable, mu: float, n: int, rng: np.random.Generator
) -> list[FrozenState]:
    """Labelled freezing path; the final state has no active blocks."""
    if mu < 0.0:
        raise ValueError("mu must be nonnegative")
    if not (1 <= n <= rates.n_max):
        raise ValueError(f"need 1 <= n <= {rates.n_max}")
    active = [[i] for i in range(1, n + 1)]
    frozen: list[tuple[int, ...]] = []
    t = 0.0

    def snap():
        return FrozenState(
            t,
            tuple(tuple(sorted(b)) for b in active),
            tuple(tuple(sorted(b)) for b in frozen),
        )

    path = [snap()]
    while active:
        b = len(active)
        total = mu * b + rates.total(b) if b >= 2 else mu * b
        if total <= 0.0:
            raise StuckChainError(f"stuck chain: no events from {b} active blocks")
        t += rng.exponential(1.0 / total)
        if rng.random() * total < mu * b:
            frozen.append(tuple(active.pop(int(rng.integers(b)))))
        else:
            k = _merge_pick(rates, b, rng)
            chosen = sorted(rng.choice(b, size=k, replace=False), reverse=True)
            merged = []
            for idx in chosen:
                merged.extend(active.pop(idx))
            active.append(merged)
        path.append(snap())
    return path


def simulate_frozen_coalescent(
    rates: RateTable,
    mu: float,
    n: int,
    rng: np.random.Generator,
    return_events: bool = False,
):
    """Family sizes of a sample of n under the freezing coalescent.

    Tracks only block weights (the embedded jump chain); with b active
    blocks the next event is a mutation with probability
    mu*b / (mu*b + total(b)), freezing a uniformly chosen block, and
    otherwise a k-merger of a uniform k-subset.  With return_events the
    event tags ('freeze' or k) are returned alongside.
    """
    if mu < 0.0:
        raise ValueError("mu must be nonnegative")
    if not (1 <= n <= rates.n_max):
        raise ValueError(f"need 1 <= n <= {rates.n_max}")
    weights = [1] * n
    families: list[int] = []
    events: list = []
    while weights:
        b = len(weights)
        merge_total = rates.total(b) if b >= 2 else 0.0
        total = mu * b + merge_total
        if total <= 0.0:
            raise StuckChainError(f"stuck chain: no events from {b} active blocks")
        if rng.random() * total < mu * b:
            families.append(weights.pop(int(rng.integers(b))))
            events.append("freeze")
        else:
            k = _merge_pick(rates, b, rng)
            chosen = sorted(rng.choice(b, size=k, replace=False), reverse=True)
            merged = 0
            for idx in chosen:
                merged += weights.pop(idx)
            weights.append(merged)
            events.append(k)
    pv = PartitionVector.from_sizes(families)
    if return_events:
        return pv, events
    return pv
