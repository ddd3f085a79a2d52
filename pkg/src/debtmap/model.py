"""Portfolio domain model: entities, lifecycle states, links and validation.

The traceability chain is: a technical debt item affects exactly one
configuration item (CI); CIs compose into larger CIs and support IT assets;
value sources draw business value from IT assets.  Walking that chain from a
debt item yields the (asset state, business value, usage) cells a priority
rule scores.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import date
from enum import Enum


class LifecycleState(str, Enum):
    """State of a configuration item or IT asset."""

    OPERATIONAL = "operational"
    TO_BE = "to_be"
    LEGACY = "legacy"


class BusinessValue(str, Enum):
    CORE = "core"
    OTHER = "other"


class Usage(str, Enum):
    HIGH = "high"
    LOW = "low"


class Level(str, Enum):
    """Three-point scale used for technical priority and technical effort."""

    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"


class DebtType(str, Enum):
    BUG = "bug"
    ARCHITECTURAL = "architectural"
    FEATURE = "feature"
    DATABASE = "database"
    TEST = "test"
    BUILD = "build"
    DOCUMENTATION = "documentation"
    REQUIREMENTS = "requirements"
    CODE = "code"
    INFRASTRUCTURE = "infrastructure"
    OTHER = "other"


class Horizon(str, Enum):
    IMMEDIATE = "immediate"
    SHORT_TERM = "short_term"
    LONG_TERM = "long_term"


class TargetKind(str, Enum):
    VALUE_SOURCE = "value_source"
    IT_ASSET = "it_asset"


@dataclass(frozen=True)
class ConfigurationItem:
    """A managed technical artifact a debt item can affect.

    ``parent_ids`` are composition links: this CI is a component of each
    parent.  ``depends_on`` records dependencies; dependencies do not
    transmit asset membership, only composition does.
    """

    id: str
    name: str
    state: LifecycleState
    parent_ids: frozenset[str] = frozenset()
    depends_on: frozenset[str] = frozenset()


@dataclass(frozen=True)
class ITAsset:
    """A product or service in the company portfolio, composed of CIs."""

    id: str
    name: str
    state: LifecycleState
    ci_ids: frozenset[str] = frozenset()


@dataclass(frozen=True)
class ValueSource:
    """Anything that creates business value from an IT asset.

    Classification is deliberately binary on both dimensions.
    """

    id: str
    name: str
    business_value: BusinessValue
    usage: Usage
    asset_ids: frozenset[str] = frozenset()


@dataclass(frozen=True)
class TechnicalDebtItem:
    """One unit of technical debt.

    ``ci_id`` and ``value_source_ids`` may be empty right after a tracker
    import; such items need human linking before they can be prioritized
    (see :meth:`needs_linking`).  ``paid_date_manual`` marks a payment date
    entered by a person, which tracker synchronization never overwrites.
    """

    id: str
    name: str
    created_date: date
    debt_type: DebtType
    description: str = ""
    paid_date: date | None = None
    paid_date_manual: bool = False
    technical_priority: Level = Level.MEDIUM
    technical_effort: Level = Level.MEDIUM
    ci_id: str | None = None
    value_source_ids: frozenset[str] = frozenset()
    tracker_issue_id: str | None = None
    factor_tags: frozenset[str] = frozenset()

    @property
    def needs_linking(self) -> bool:
        return self.ci_id is None or not self.value_source_ids

    @property
    def is_paid(self) -> bool:
        return self.paid_date is not None

    def pay(self, on: date, manual: bool = True) -> "TechnicalDebtItem":
        return replace(self, paid_date=on, paid_date_manual=manual)


@dataclass(frozen=True)
class BusinessMetric:
    """A business metric attached to a value source or IT asset."""

    id: str
    name: str
    target_kind: TargetKind
    target_id: str
    horizon: Horizon
    description: str = ""


@dataclass
class Portfolio:
    """Aggregate of all portfolio entities, keyed by id."""

    cis: dict[str, ConfigurationItem] = field(default_factory=dict)
    assets: dict[str, ITAsset] = field(default_factory=dict)
    value_sources: dict[str, ValueSource] = field(default_factory=dict)
    debt_items: dict[str, TechnicalDebtItem] = field(default_factory=dict)
    metrics: dict[str, BusinessMetric] = field(default_factory=dict)

    def copy(self) -> "Portfolio":
        return Portfolio(
            cis=dict(self.cis),
            assets=dict(self.assets),
            value_sources=dict(self.value_sources),
            debt_items=dict(self.debt_items),
            metrics=dict(self.metrics),
        )


@dataclass(frozen=True, order=True)
class Violation:
    """One broken portfolio invariant.  Violations are data, not failures."""

    code: str
    entity_id: str
    message: str


class UnlinkedDebt(Exception):
    """A debt item has no reachable (asset, value source) pair."""

    def __init__(self, item_id: str, message: str | None = None):
        self.item_id = item_id
        super().__init__(message or f"debt item {item_id!r} is not linked to any reachable asset/value-source pair")


def ci_ancestors(ci_id: str, portfolio: Portfolio) -> set[str]:
    """The CI itself plus all transitive composition parents.

    Tolerates cycles (validation reports them separately).
    """
    seen: set[str] = set()
    stack = [ci_id]
    while stack:
        current = stack.pop()
        if current in seen:
            continue
        seen.add(current)
        ci = portfolio.cis.get(current)
        if ci is not None:
            stack.extend(ci.parent_ids)
    return seen


def _composition_cycles(portfolio: Portfolio) -> list[str]:
    """Ids of CIs that sit on a composition cycle."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {ci_id: WHITE for ci_id in portfolio.cis}
    on_cycle: set[str] = set()

    def visit(node: str, path: list[str]) -> None:
        color[node] = GRAY
        path.append(node)
        for parent in sorted(portfolio.cis[node].parent_ids):
            if parent not in portfolio.cis:
                continue
            if color[parent] == GRAY:
                on_cycle.update(path[path.index(parent):])
            elif color[parent] == WHITE:
                visit(parent, path)
        path.pop()
        color[node] = BLACK

    for ci_id in sorted(portfolio.cis):
        if color[ci_id] == WHITE:
            visit(ci_id, [])
    return sorted(on_cycle)


def validate_portfolio(portfolio: Portfolio) -> list[Violation]:
    """Check every portfolio invariant and return one Violation per breach.

    Idempotent and independent of collection iteration order: the result is
    sorted canonically.  An empty list means the portfolio is consistent.
    """
    violations: list[Violation] = []

    def dangling(owner: str, ref: str, kind: str) -> None:
        violations.append(Violation(
            code="DanglingReference",
            entity_id=owner,
            message=f"{owner!r} references unknown {kind} {ref!r}",
        ))

    for ci in portfolio.cis.values():
        for parent in ci.parent_ids:
            if parent not in portfolio.cis:
                dangling(ci.id, parent, "configuration item")
        for dep in ci.depends_on:
            if dep not in portfolio.cis:
                dangling(ci.id, dep, "configuration item")

    for cyclic_id in _composition_cycles(portfolio):
        violations.append(Violation(
            code="CompositionCycle",
            entity_id=cyclic_id,
            message=f"configuration item {cyclic_id!r} is part of a composition cycle",
        ))

    for asset in portfolio.assets.values():
        linked_states = []
        for ci_id in asset.ci_ids:
            if ci_id not in portfolio.cis:
                dangling(asset.id, ci_id, "configuration item")
            else:
                linked_states.append(portfolio.cis[ci_id].state)
        if asset.state != LifecycleState.TO_BE and not asset.ci_ids:
            violations.append(Violation(
                code="AssetWithoutCIs",
                entity_id=asset.id,
                message=f"{asset.state.value} asset {asset.id!r} has no configuration items",
            ))
        if asset.state == LifecycleState.OPERATIONAL and LifecycleState.OPERATIONAL not in linked_states:
            violations.append(Violation(
                code="OperationalAssetWithoutOperationalCI",
                entity_id=asset.id,
                message=f"operational asset {asset.id!r} has no operational configuration item",
            ))

    for vs in portfolio.value_sources.values():
        for asset_id in vs.asset_ids:
            if asset_id not in portfolio.assets:
                dangling(vs.id, asset_id, "IT asset")

    used_vs = {vs_id for item in portfolio.debt_items.values() for vs_id in item.value_source_ids}
    for vs in portfolio.value_sources.values():
        if vs.id in used_vs and not vs.asset_ids:
            violations.append(Violation(
                code="ValueSourceWithoutAssets",
                entity_id=vs.id,
                message=f"value source {vs.id!r} is used by debt items but linked to no asset",
            ))

    for item in portfolio.debt_items.values():
        if item.ci_id is None:
            violations.append(Violation(
                code="DebtWithoutCI",
                entity_id=item.id,
                message=f"debt item {item.id!r} has no configuration item",
            ))
        elif item.ci_id not in portfolio.cis:
            dangling(item.id, item.ci_id, "configuration item")
        if not item.value_source_ids:
            violations.append(Violation(
                code="DebtWithoutValueSource",
                entity_id=item.id,
                message=f"debt item {item.id!r} is linked to no value source",
            ))
        for vs_id in item.value_source_ids:
            if vs_id not in portfolio.value_sources:
                dangling(item.id, vs_id, "value source")
        if item.paid_date is not None and item.paid_date < item.created_date:
            violations.append(Violation(
                code="PaidBeforeCreated",
                entity_id=item.id,
                message=f"debt item {item.id!r} paid {item.paid_date} before created {item.created_date}",
            ))

    for metric in portfolio.metrics.values():
        pool = portfolio.value_sources if metric.target_kind == TargetKind.VALUE_SOURCE else portfolio.assets
        if metric.target_id not in pool:
            dangling(metric.id, metric.target_id, metric.target_kind.value)

    return sorted(set(violations))
