"""Year-over-year bus factor series for a project or directory."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable

from .cst import CstConfig, TimeWindow, cst_bus_factor
from .errors import EmptyScope, EmptySpan, ZeroDevelopers
from .identity import IdentityMap
from .records import ChangeRecord


@dataclass(frozen=True)
class TrendPoint:
    """One year's bus factor, active developer count and BF share.

    Years without any in-scope activity are emitted as inactive
    zero points so a series never has gaps.
    """
    year: int
    bus_factor: int
    total_developers: int
    bf_percentage: float
    active: bool = True

    def __post_init__(self):
        if self.bus_factor > self.total_developers:
            raise ValueError("bus factor cannot exceed developer count")
        expected = (100.0 * self.bus_factor / self.total_developers
                    if self.total_developers else 0.0)
        if abs(self.bf_percentage - expected) > 1e-9:
            raise ValueError(
                f"bf_percentage {self.bf_percentage} inconsistent "
                f"with {self.bus_factor}/{self.total_developers}")


@dataclass(frozen=True)
class TrendSeries:
    scope: str
    config: CstConfig
    points: tuple[TrendPoint, ...]


def yearly_trend(records: Iterable[ChangeRecord], identity: IdentityMap,
                 base_config: CstConfig, first_year: int, last_year: int,
                 cumulative: bool = False) -> TrendSeries:
    """One TrendPoint per calendar year in [first_year, last_year].

    Each point runs the full commit-based pipeline restricted to its
    year (or, with cumulative=True, to all history through its year);
    total_developers is that window's developer count N. Years where
    the scope has no positive contribution become inactive points.
    """
    if first_year > last_year:
        raise EmptySpan(f"year span {first_year}..{last_year} is empty")
    pool = list(records)
    points = []
    for year in range(first_year, last_year + 1):
        window = (TimeWindow(None, None, year, None) if cumulative
                  else TimeWindow.year(year))
        config = replace(base_config, time_range=window)
        try:
            result = cst_bus_factor(pool, identity, config)
        except (EmptyScope, ZeroDevelopers):
            points.append(TrendPoint(year, 0, 0, 0.0, active=False))
            continue
        total = result.developer_count
        points.append(TrendPoint(
            year=year,
            bus_factor=result.bus_factor,
            total_developers=total,
            bf_percentage=100.0 * result.bus_factor / total,
        ))
    return TrendSeries(
        scope=base_config.scope or "",
        config=replace(base_config, time_range=None),
        points=tuple(points),
    )
