"""Backlog analytics per business-priority group.

Groups are the distinct ranks of the active rule, labelled like
``1-core/high`` (rank plus the classification of the cells mapped to it).
All percentages follow the one-decimal half-up reporting convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, timedelta

from debtmap.model import DebtType, Level, Portfolio, TechnicalDebtItem, UnlinkedDebt
from debtmap.rules import REACHABLE_CELLS, PriorityRule, business_priority
from debtmap.util import percentage


class EmptyRange(Exception):
    """The analysis window contains no days."""


class InsufficientPoints(Exception):
    """A trend fit needs at least two points."""


@dataclass(frozen=True)
class DateRange:
    start: date
    end: date

    def __post_init__(self):
        if self.start > self.end:
            raise EmptyRange(f"window start {self.start} is after end {self.end}")

    def days(self) -> list[date]:
        span = (self.end - self.start).days
        return [self.start + timedelta(days=offset) for offset in range(span + 1)]

    def __contains__(self, day: date) -> bool:
        return self.start <= day <= self.end


@dataclass
class DailySeries:
    group_key: str
    points: list[tuple[date, int]]
    period_split: date | None = None


@dataclass(frozen=True)
class TrendLine:
    slope: float
    intercept: float
    r_squared: float
    window: DateRange


@dataclass(frozen=True)
class PaymentStats:
    group_key: str
    open_start: int
    identified: int
    paid: int
    open_end: int
    pct_paid: float


@dataclass(frozen=True)
class DistributionRow:
    """One crosstab or effort row: counts plus row-normalized percentages."""

    group_key: str
    counts: dict[str, int]
    percentages: dict[str, float]
    total: int


@dataclass
class GroupedItems:
    by_rank: dict[int, list[TechnicalDebtItem]] = field(default_factory=dict)
    unlinked: list[tuple[str, str]] = field(default_factory=list)


ALL_GROUP = "all"


def group_label(rule: PriorityRule, rank: int) -> str:
    """``<rank>-<classification>`` of the cells the rule maps to the rank."""
    cells = [cell for cell in REACHABLE_CELLS if rule.cells.get(cell) == rank]
    shorts = {cell.short_label() for cell in cells}
    if len(shorts) == 1:
        return f"{rank}-{shorts.pop()}"
    return f"{rank}-" + "+".join(cell.key() for cell in cells)


def group_items(
    items: list[TechnicalDebtItem], rule: PriorityRule, portfolio: Portfolio
) -> GroupedItems:
    """Bucket items (paid included) by their business priority rank.

    Every rank the rule uses gets a group, possibly empty; unlinkable items
    go to the side report.
    """
    grouped = GroupedItems(by_rank={rank: [] for rank in rule.ranks()})
    for item in items:
        try:
            rank = business_priority(item, rule, portfolio)
        except UnlinkedDebt as exc:
            grouped.unlinked.append((item.id, str(exc)))
            continue
        grouped.by_rank[rank].append(item)
    grouped.unlinked.sort()
    return grouped


def _open_series(items: list[TechnicalDebtItem], window: DateRange) -> list[tuple[date, int]]:
    open_start = sum(
        1
        for item in items
        if item.created_date < window.start
        and (item.paid_date is None or item.paid_date >= window.start)
    )
    identified: dict[date, int] = {}
    paid: dict[date, int] = {}
    for item in items:
        if item.created_date in window:
            identified[item.created_date] = identified.get(item.created_date, 0) + 1
        if item.paid_date is not None and item.paid_date in window:
            paid[item.paid_date] = paid.get(item.paid_date, 0) + 1

    points = []
    open_count = open_start
    for day in window.days():
        open_count += identified.get(day, 0) - paid.get(day, 0)
        points.append((day, open_count))
    return points


def accumulation_series(
    items: list[TechnicalDebtItem],
    rule: PriorityRule,
    portfolio: Portfolio,
    window: DateRange,
    split_date: date | None = None,
) -> tuple[list[DailySeries], list[tuple[str, str]]]:
    """Daily open-item counts, one series per business-priority group.

    A day's count is the previous day's plus items identified that day
    minus items paid that day, keyed on identification and payment dates.
    Items predating the window seed the baseline.  An ``all`` series sums
    the groups (after dropping unlinkable items, reported separately).
    """
    grouped = group_items(items, rule, portfolio)
    series = []
    linked: list[TechnicalDebtItem] = []
    for rank in sorted(grouped.by_rank):
        members = grouped.by_rank[rank]
        linked.extend(members)
        series.append(DailySeries(
            group_key=group_label(rule, rank),
            points=_open_series(members, window),
            period_split=split_date,
        ))
    series.append(DailySeries(
        group_key=ALL_GROUP,
        points=_open_series(linked, window),
        period_split=split_date,
    ))
    return series, grouped.unlinked


def fit_trend(series: DailySeries, window: DateRange | None = None) -> TrendLine:
    """Ordinary least squares over the series points inside the window.

    x is the day offset from the window start; a perfect fit (including a
    constant series) reports r_squared 1.0.
    """
    points = series.points
    if window is not None:
        points = [(day, value) for day, value in points if day in window]
    if len(points) < 2:
        raise InsufficientPoints(f"trend fit needs >= 2 points, got {len(points)}")
    if window is None:
        window = DateRange(points[0][0], points[-1][0])

    xs = [(day - window.start).days for day, _ in points]
    ys = [float(value) for _, value in points]
    n = len(xs)
    x_mean = sum(xs) / n
    y_mean = sum(ys) / n
    sxx = sum((x - x_mean) ** 2 for x in xs)
    sxy = sum((x - x_mean) * (y - y_mean) for x, y in zip(xs, ys))
    slope = sxy / sxx if sxx else 0.0
    intercept = y_mean - slope * x_mean

    ss_res = sum((y - (intercept + slope * x)) ** 2 for x, y in zip(xs, ys))
    ss_tot = sum((y - y_mean) ** 2 for y in ys)
    if ss_res == 0.0:
        r_squared = 1.0
    elif ss_tot == 0.0:
        r_squared = 0.0
    else:
        r_squared = max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    return TrendLine(slope=slope, intercept=intercept, r_squared=r_squared, window=window)


def _stats_for(group_key: str, items: list[TechnicalDebtItem], window: DateRange) -> PaymentStats:
    open_start = sum(
        1
        for item in items
        if item.created_date < window.start
        and (item.paid_date is None or item.paid_date >= window.start)
    )
    identified = sum(1 for item in items if item.created_date in window)
    paid = sum(1 for item in items if item.paid_date is not None and item.paid_date in window)
    exposure = open_start + identified
    return PaymentStats(
        group_key=group_key,
        open_start=open_start,
        identified=identified,
        paid=paid,
        open_end=open_start + identified - paid,
        pct_paid=paid / exposure if exposure else 0.0,
    )


def payment_stats(
    items: list[TechnicalDebtItem],
    rule: PriorityRule,
    portfolio: Portfolio,
    window: DateRange,
) -> tuple[list[PaymentStats], list[tuple[str, str]]]:
    """Conservation-checked open/identified/paid counts per group.

    pct_paid = paid / (open_start + identified), the window's exposure;
    0.0 for an empty group.  The ``all`` row aggregates every linked item.
    """
    grouped = group_items(items, rule, portfolio)
    stats = []
    linked: list[TechnicalDebtItem] = []
    for rank in sorted(grouped.by_rank):
        members = grouped.by_rank[rank]
        linked.extend(members)
        stats.append(_stats_for(group_label(rule, rank), members, window))
    stats.append(_stats_for(ALL_GROUP, linked, window))
    return stats, grouped.unlinked


LEVELS = (Level.HIGH, Level.MEDIUM, Level.LOW)


def _distribution_row(group_key: str, items: list[TechnicalDebtItem], level_of) -> DistributionRow:
    counts = {level.value: 0 for level in LEVELS}
    for item in items:
        counts[level_of(item).value] += 1
    total = len(items)
    return DistributionRow(
        group_key=group_key,
        counts=counts,
        percentages={key: percentage(count, total) for key, count in counts.items()},
        total=total,
    )


def effort_distribution(
    items: list[TechnicalDebtItem],
    rule: PriorityRule,
    portfolio: Portfolio,
    window: DateRange,
) -> tuple[list[DistributionRow], list[tuple[str, str]]]:
    """Technical-effort split of the items paid inside the window, per group."""
    grouped = group_items(items, rule, portfolio)
    rows = []
    for rank in sorted(grouped.by_rank):
        paid_members = [
            item
            for item in grouped.by_rank[rank]
            if item.paid_date is not None and item.paid_date in window
        ]
        rows.append(_distribution_row(group_label(rule, rank), paid_members, lambda i: i.technical_effort))
    return rows, grouped.unlinked


def priority_crosstab(
    items: list[TechnicalDebtItem],
    rule: PriorityRule,
    portfolio: Portfolio,
) -> tuple[list[DistributionRow], list[tuple[str, str]]]:
    """Business-priority groups versus technical priority, counts and row %."""
    grouped = group_items(items, rule, portfolio)
    rows = []
    for rank in sorted(grouped.by_rank):
        rows.append(_distribution_row(
            group_label(rule, rank), grouped.by_rank[rank], lambda i: i.technical_priority,
        ))
    return rows, grouped.unlinked


def debt_type_distribution(items: list[TechnicalDebtItem]) -> list[tuple[DebtType, int, float]]:
    """(type, count, percentage) over the item set, most frequent first."""
    counts: dict[DebtType, int] = {}
    for item in items:
        counts[item.debt_type] = counts.get(item.debt_type, 0) + 1
    total = len(items)
    rows = [
        (debt_type, count, percentage(count, total))
        for debt_type, count in counts.items()
    ]
    rows.sort(key=lambda row: (-row[1], row[0].value))
    return rows
