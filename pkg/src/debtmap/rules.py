"""Priority rule engine.

A rule is a total map from the ten reachable canvas cells to ranks 1..10
(1 = most urgent).  A debt item's business priority is the best (minimum)
rank over the cells its links reach; ranks coarsen into four buckets for
side-by-side comparison with the technical priority.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from enum import Enum

from debtmap.model import (
    BusinessValue,
    LifecycleState,
    Portfolio,
    TechnicalDebtItem,
    UnlinkedDebt,
    Usage,
    Violation,
    ci_ancestors,
)
from debtmap.util import percentage

MIN_RANK = 1
MAX_RANK = 10


class RankOutOfRange(Exception):
    def __init__(self, rank: int):
        self.rank = rank
        super().__init__(f"rank {rank} outside {MIN_RANK}..{MAX_RANK}")


@dataclass(frozen=True, order=True)
class RuleCell:
    """One canvas cell: asset state x business value x usage.

    ``usage`` must be absent exactly when the state is to_be (a planned
    asset has no usage yet).  Construction is permissive so rule validation
    can report malformed cells instead of crashing on them.
    """

    asset_state: LifecycleState
    business_value: BusinessValue
    usage: Usage | None = None

    @property
    def is_reachable(self) -> bool:
        if self.asset_state == LifecycleState.TO_BE:
            return self.usage is None
        return self.usage is not None

    def key(self) -> str:
        parts = [self.asset_state.value, self.business_value.value]
        if self.usage is not None:
            parts.append(self.usage.value)
        return "/".join(parts)

    def short_label(self) -> str:
        if self.usage is None:
            return self.business_value.value
        return f"{self.business_value.value}/{self.usage.value}"


def parse_cell_key(key: str) -> RuleCell:
    parts = key.split("/")
    if len(parts) not in (2, 3):
        raise ValueError(f"malformed cell key {key!r}")
    state = LifecycleState(parts[0])
    value = BusinessValue(parts[1])
    usage = Usage(parts[2]) if len(parts) == 3 else None
    return RuleCell(state, value, usage)


def _reachable_cells() -> tuple[RuleCell, ...]:
    cells = []
    for state in (LifecycleState.OPERATIONAL, LifecycleState.TO_BE, LifecycleState.LEGACY):
        for value in BusinessValue:
            if state == LifecycleState.TO_BE:
                cells.append(RuleCell(state, value))
            else:
                for usage in Usage:
                    cells.append(RuleCell(state, value, usage))
    return tuple(cells)


REACHABLE_CELLS: tuple[RuleCell, ...] = _reachable_cells()


class Bucket(str, Enum):
    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"
    LOWEST = "lowest"


def bucket(rank: int) -> Bucket:
    """Coarsen a rank: 1-3 high, 4-6 medium, 7-9 low, 10 lowest."""
    if not isinstance(rank, int) or not MIN_RANK <= rank <= MAX_RANK:
        raise RankOutOfRange(rank)
    if rank <= 3:
        return Bucket.HIGH
    if rank <= 6:
        return Bucket.MEDIUM
    if rank <= 9:
        return Bucket.LOW
    return Bucket.LOWEST


@dataclass(frozen=True)
class PriorityRule:
    """Immutable named assignment of ranks to canvas cells.

    Duplicate ranks are allowed (cells may be grouped under one priority);
    edits are expected to create a new rule version rather than mutate.
    """

    id: str
    name: str
    cells: dict[RuleCell, int]
    author: str = ""
    created_date: date | None = None

    def rank_of(self, cell: RuleCell) -> int:
        return self.cells[cell]

    def ranks(self) -> list[int]:
        return sorted(set(self.cells.values()))


def example_rule(rule_id: str = "example", author: str = "") -> PriorityRule:
    """A simple fully-ordered rule: each cell gets its own rank 1..10.

    Operational core/high is the most urgent (1), legacy other/low the
    least (10), and to_be core sits at 5 regardless of usage.
    """
    order = [
        "operational/core/high",
        "operational/core/low",
        "operational/other/high",
        "operational/other/low",
        "to_be/core",
        "to_be/other",
        "legacy/core/high",
        "legacy/core/low",
        "legacy/other/high",
        "legacy/other/low",
    ]
    cells = {parse_cell_key(key): rank for rank, key in enumerate(order, start=1)}
    return PriorityRule(id=rule_id, name="example", cells=cells, author=author)


def validate_rule(rule: PriorityRule) -> list[Violation]:
    """Report missing cells, out-of-range ranks, and malformed cells."""
    violations: list[Violation] = []
    for cell in REACHABLE_CELLS:
        if cell not in rule.cells:
            violations.append(Violation(
                code="MissingCell",
                entity_id=cell.key(),
                message=f"rule {rule.id!r} does not map cell {cell.key()!r}",
            ))
    for cell, rank in rule.cells.items():
        if not isinstance(rank, int) or not MIN_RANK <= rank <= MAX_RANK:
            violations.append(Violation(
                code="RankOutOfRange",
                entity_id=cell.key(),
                message=f"rule {rule.id!r} maps {cell.key()!r} to rank {rank!r}",
            ))
        if not cell.is_reachable:
            code = "UsageOnToBeCell" if cell.asset_state == LifecycleState.TO_BE else "MissingUsage"
            violations.append(Violation(
                code=code,
                entity_id=cell.key(),
                message=f"rule {rule.id!r} contains unreachable cell {cell.key()!r}",
            ))
    return sorted(set(violations))


def effective_cells(item: TechnicalDebtItem, portfolio: Portfolio) -> frozenset[RuleCell]:
    """The canvas cells a debt item occupies.

    For every linked value source and every one of its assets whose CI set
    intersects the item's CI or a composition ancestor of it, emit
    (asset state, business value, usage); usage is dropped for to_be assets.
    Raises UnlinkedDebt when no pair is reachable.
    """
    cells: set[RuleCell] = set()
    if item.ci_id is not None:
        reachable_cis = ci_ancestors(item.ci_id, portfolio)
        for vs_id in item.value_source_ids:
            vs = portfolio.value_sources.get(vs_id)
            if vs is None:
                continue
            for asset_id in vs.asset_ids:
                asset = portfolio.assets.get(asset_id)
                if asset is None or not (asset.ci_ids & reachable_cis):
                    continue
                usage = None if asset.state == LifecycleState.TO_BE else vs.usage
                cells.add(RuleCell(asset.state, vs.business_value, usage))
    if not cells:
        raise UnlinkedDebt(item.id)
    return frozenset(cells)


def business_priority(item: TechnicalDebtItem, rule: PriorityRule, portfolio: Portfolio) -> int:
    """Best (minimum) rank over the item's effective cells."""
    return min(rule.cells[cell] for cell in effective_cells(item, portfolio))


@dataclass(frozen=True)
class BacklogEntry:
    item: TechnicalDebtItem
    rank: int
    bucket: Bucket


@dataclass
class BacklogResult:
    entries: list[BacklogEntry] = field(default_factory=list)
    unlinked: list[tuple[str, str]] = field(default_factory=list)


def rank_backlog(
    items: list[TechnicalDebtItem],
    rule: PriorityRule,
    portfolio: Portfolio,
    include_paid: bool = False,
) -> BacklogResult:
    """Order items by rank ascending, ties by created date then id.

    Unpaid items only unless ``include_paid``.  Items without a reachable
    asset/value-source pair go to the ``unlinked`` side report.
    """
    result = BacklogResult()
    for item in items:
        if item.is_paid and not include_paid:
            continue
        try:
            rank = business_priority(item, rule, portfolio)
        except UnlinkedDebt as exc:
            result.unlinked.append((item.id, str(exc)))
            continue
        result.entries.append(BacklogEntry(item=item, rank=rank, bucket=bucket(rank)))
    result.entries.sort(key=lambda e: (e.rank, e.item.created_date, e.item.id))
    result.unlinked.sort()
    return result


@dataclass(frozen=True)
class CellComparison:
    cell: RuleCell
    ranks: dict[str, int]
    buckets: dict[str, Bucket]
    unanimous: bool


@dataclass(frozen=True)
class RuleComparison:
    rule_ids: tuple[str, ...]
    cells: tuple[CellComparison, ...]

    def unanimous_cells(self) -> list[RuleCell]:
        return [c.cell for c in self.cells if c.unanimous]


def compare_rules(rules: list[PriorityRule]) -> RuleComparison:
    """Cell-by-cell rank matrix across rules with unanimity flags."""
    rows = []
    for cell in REACHABLE_CELLS:
        ranks = {rule.id: rule.cells[cell] for rule in rules}
        rows.append(CellComparison(
            cell=cell,
            ranks=ranks,
            buckets={rule_id: bucket(rank) for rule_id, rank in ranks.items()},
            unanimous=len(set(ranks.values())) <= 1,
        ))
    return RuleComparison(rule_ids=tuple(r.id for r in rules), cells=tuple(rows))


DECOMPOSE_VARIABLES = ("operational", "to_be", "legacy", "core", "other", "high", "low")

_DECOMPOSE_BANDS = {
    "high": range(1, 4),
    "medium": range(4, 7),
    "low_or_lowest": range(7, 11),
}


def _cell_variables(cell: RuleCell) -> set[str]:
    variables = {cell.asset_state.value, cell.business_value.value}
    if cell.usage is not None:
        variables.add(cell.usage.value)
    return variables


def decompose_rules(rules: list[PriorityRule]) -> dict[str, dict[str, float]]:
    """Per rank band, the share of (rule, cell) pairs containing each variable.

    For variable v and band B: percentage of pairs whose cell contains v
    and whose rank falls in B, over all pairs whose cell contains v.
    Percentages carry the one-decimal half-up reporting convention.
    """
    tables: dict[str, dict[str, float]] = {}
    for band_name, band in _DECOMPOSE_BANDS.items():
        table: dict[str, float] = {}
        for variable in DECOMPOSE_VARIABLES:
            total = 0
            matching = 0
            for rule in rules:
                for cell in REACHABLE_CELLS:
                    if variable not in _cell_variables(cell):
                        continue
                    total += 1
                    if rule.cells[cell] in band:
                        matching += 1
            table[variable] = percentage(matching, total)
        tables[band_name] = table
    return tables
