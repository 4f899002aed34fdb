"""Blame-based bus factor by simulated developer departure.

For group sizes g = 1, 2, ... draw random g-subsets of the developers
owning lines at the analyzed revision; the bus factor is the first g
at which some drawn subset's departure abandons at least half of the
files (a file counts as abandoned once 90% of its lines belonged to
departed developers). An exhaustive mode enumerates every subset and
therefore yields the exact minimum g.
"""
from __future__ import annotations

import itertools
import random
import statistics
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .errors import EmptySnapshot
from .identity import DeveloperId, IdentityMap
from .records import BlameSnapshot

_Ownership = list[tuple[int, dict[DeveloperId, int]]]


@dataclass(frozen=True)
class RigConfig:
    max_group_size: int = 200
    samples_per_size: int = 1000
    seed: int = 0
    line_abandon_fraction: float = 0.90
    file_abandon_fraction: float = 0.50
    exhaustive: bool = False

    def __post_init__(self):
        if self.max_group_size < 1:
            raise ValueError("max_group_size must be >= 1")
        if self.samples_per_size < 1:
            raise ValueError("samples_per_size must be >= 1")
        for name in ("line_abandon_fraction", "file_abandon_fraction"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {value}")


@dataclass(frozen=True)
class RigResult:
    """Outcome of one run; bus_factor and bf_set are both None when no
    subset up to max_group_size abandoned enough files."""
    bus_factor: int | None
    bf_set: frozenset[DeveloperId] | None
    samples_evaluated: int
    abandoned_fraction_at_return: float

    def __post_init__(self):
        if (self.bus_factor is None) != (self.bf_set is None):
            raise ValueError("bus_factor and bf_set must be None together")


def _ownership(blame: BlameSnapshot, identity: IdentityMap) -> _Ownership:
    """Collapse a snapshot to per-file line counts per developer."""
    if not blame.files:
        raise EmptySnapshot("blame snapshot lists no files")
    files: _Ownership = []
    for path in sorted(blame.files):
        lines = blame.files[path]
        counts: dict[DeveloperId, int] = {}
        for author in lines:
            dev = identity.canonical(author)
            counts[dev] = counts.get(dev, 0) + 1
        files.append((len(lines), counts))
    return files


def _fraction(ownership: _Ownership, departed: frozenset[DeveloperId],
              line_threshold: float) -> float:
    abandoned = 0
    for total, counts in ownership:
        gone = sum(n for dev, n in counts.items() if dev in departed)
        if gone / total >= line_threshold:
            abandoned += 1
    return abandoned / len(ownership)


def abandoned_file_fraction(blame: BlameSnapshot, identity: IdentityMap,
                            departed: Iterable[DeveloperId],
                            line_abandon_fraction: float = 0.90) -> float:
    """Fraction of files whose line ownership is at least
    line_abandon_fraction held by the departed set."""
    ownership = _ownership(blame, identity)
    return _fraction(ownership, frozenset(departed), line_abandon_fraction)


def _randbelow(rng: random.Random, n: int) -> int:
    """Uniform draw from [0, n) by rejection on getrandbits, so the
    consumed bit stream is fully specified by this module."""
    bits = n.bit_length()
    value = rng.getrandbits(bits)
    while value >= n:
        value = rng.getrandbits(bits)
    return value


def _sample_indexes(rng: random.Random, population: int, g: int) -> tuple[int, ...]:
    """One uniform g-subset of range(population) via partial Fisher-Yates."""
    slots = list(range(population))
    for i in range(g):
        j = i + _randbelow(rng, population - i)
        slots[i], slots[j] = slots[j], slots[i]
    return tuple(slots[:g])


def rig_bus_factor(blame: BlameSnapshot, identity: IdentityMap,
                   config: RigConfig = RigConfig()) -> RigResult:
    """Smallest departing group found to abandon the project.

    Sampled mode draws samples_per_size subsets per group size;
    exhaustive mode checks every subset in lexicographic order and is
    exact. Group size is capped at the developer population.
    """
    ownership = _ownership(blame, identity)
    developers: set[DeveloperId] = set()
    for _, counts in ownership:
        developers.update(counts)
    population = sorted(developers, key=DeveloperId.sort_key)
    cap = min(config.max_group_size, len(population))

    rng = random.Random(config.seed)
    evaluated = 0
    for g in range(1, cap + 1):
        if config.exhaustive:
            candidates = itertools.combinations(range(len(population)), g)
        else:
            candidates = (_sample_indexes(rng, len(population), g)
                          for _ in range(config.samples_per_size))
        for indexes in candidates:
            departed = frozenset(population[i] for i in indexes)
            evaluated += 1
            fraction = _fraction(ownership, departed,
                                 config.line_abandon_fraction)
            if fraction >= config.file_abandon_fraction:
                return RigResult(
                    bus_factor=g,
                    bf_set=departed,
                    samples_evaluated=evaluated,
                    abandoned_fraction_at_return=fraction,
                )
    return RigResult(bus_factor=None, bf_set=None,
                     samples_evaluated=evaluated,
                     abandoned_fraction_at_return=0.0)


def rig_repeat(blame: BlameSnapshot, identity: IdentityMap,
               config: RigConfig, runs: int) -> list[RigResult]:
    """Repeat the estimate with seeds seed, seed+1, ... seed+runs-1."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    return [rig_bus_factor(blame, identity, replace(config, seed=config.seed + i))
            for i in range(runs)]


def summarize_runs(results: Sequence[RigResult]) -> dict[str, int | None]:
    """Min/max/mode of the bus factors over repeated runs; all None
    when no run found a feasible group."""
    values = [r.bus_factor for r in results if r.bus_factor is not None]
    if not values:
        return {"min": None, "max": None, "mode": None}
    return {
        "min": min(values),
        "max": max(values),
        "mode": min(statistics.multimode(values)),
    }
