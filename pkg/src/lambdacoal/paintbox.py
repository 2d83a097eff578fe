"""Exchangeable partitions from mass partitions (paintbox sampling).

A mass partition is a nonincreasing list of atom sizes summing to at most
one; the deficit is dust.  Painting: lay the atoms out as consecutive
intervals of [0, 1] starting at 0, drop n i.i.d. uniforms, and group
labels whose uniforms land in the same atom interval.  Uniforms in the
dust remainder become singleton blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MassPartition",
    "SetPartition",
    "paint_partition",
    "empirical_block_frequencies",
]


@dataclass(frozen=True)
class MassPartition:
    """Nonincreasing positive atom sizes with total at most 1."""

    atoms: tuple[float, ...]

    def __post_init__(self):
        prev = float("inf")
        for a in self.atoms:
            if not (0.0 < a <= 1.0):
                raise ValueError(f"atom size {a} outside (0, 1]")
            if a > prev + 1e-15:
                raise ValueError("atom sizes must be nonincreasing")
            prev = a
        if math.fsum(self.atoms) > 1.0 + 1e-12:
            raise ValueError("atom sizes sum to more than 1")

    @property
    def dust(self) -> float:
        return max(0.0, 1.0 - math.fsum(self.atoms))


@dataclass(frozen=True)
class SetPartition:
    """Partition of {1..n}; blocks sorted internally and by least element."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen = set()
        for block in self.blocks:
            if not block or list(block) != sorted(block):
                raise ValueError("blocks must be nonempty and sorted")
            seen.update(block)
        labels = sorted(seen)
        n = len(labels)
        if sum(len(b) for b in self.blocks) != n or labels != list(range(1, n + 1)):
            raise ValueError("blocks must partition {1..n}")
        if list(self.blocks) != sorted(self.blocks, key=lambda b: b[0]):
            raise ValueError("blocks must be ordered by least element")

    @classmethod
    def from_blocks(cls, blocks) -> "SetPartition":
        canon = tuple(sorted((tuple(sorted(b)) for b in blocks), key=lambda b: b[0]))
        return cls(canon)

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    def restrict(self, m: int) -> "SetPartition":
        """Partition induced on the labels {1..m}."""
        kept = [[i for i in block if i <= m] for block in self.blocks]
        return SetPartition.from_blocks([b for b in kept if b])

    def block_sizes(self) -> list[int]:
        return sorted((len(b) for b in self.blocks), reverse=True)


def paint_partition(
    mass: MassPartition, n: int, rng: np.random.Generator
) -> SetPartition:
    """Group n labels by which atom interval their uniform hits.

    Exactly n uniforms are drawn, in label order, so painting n and then
    restricting to the first n-1 labels agrees with painting n-1 from the
    same generator state.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    u = rng.random(n)
    bounds = np.cumsum(mass.atoms) if mass.atoms else np.empty(0)
    hit = np.searchsorted(bounds, u, side="right")
    groups: dict[int, list[int]] = {}
    blocks: list[list[int]] = []
    for label in range(1, n + 1):
        atom = int(hit[label - 1])
        if atom >= len(bounds):
            blocks.append([label])  # dust: singleton
        else:
            groups.setdefault(atom, []).append(label)
    blocks.extend(groups.values())
    return SetPartition.from_blocks(blocks)


def empirical_block_frequencies(partition: SetPartition) -> MassPartition:
    """Mass-partition estimate from one set partition: block sizes over n,
    sorted nonincreasing.  Small blocks shrink toward dust as n grows."""
    n = partition.n
    sizes = partition.block_sizes()
    return MassPartition(tuple(s / n for s in sizes))
