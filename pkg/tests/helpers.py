"""Shared builders and independent oracles for the test suite.

The oracles deliberately avoid the production code paths: reachability is
a fixpoint closure (the engine walks a stack), aggregation re-enumerates
pairs with nested loops, daily counts are recounted from scratch.
"""

from __future__ import annotations

import random
from datetime import date, datetime, timedelta, timezone

from debtmap.agreement import Dimension, RatingEvent
from debtmap.model import (
    BusinessValue,
    ConfigurationItem,
    DebtType,
    ITAsset,
    Level,
    LifecycleState,
    Portfolio,
    TechnicalDebtItem,
    Usage,
    ValueSource,
)
from debtmap.rules import REACHABLE_CELLS, PriorityRule

D = date.fromisoformat


def mk_ci(ci_id, state="operational", parents=(), depends=()):
    return ConfigurationItem(
        id=ci_id, name=ci_id, state=LifecycleState(state),
        parent_ids=frozenset(parents), depends_on=frozenset(depends),
    )


def mk_asset(asset_id, state="operational", cis=()):
    return ITAsset(id=asset_id, name=asset_id, state=LifecycleState(state), ci_ids=frozenset(cis))


def mk_vs(vs_id, value="core", usage="high", assets=()):
    return ValueSource(
        id=vs_id, name=vs_id, business_value=BusinessValue(value),
        usage=Usage(usage), asset_ids=frozenset(assets),
    )


def mk_item(item_id, ci=None, vss=(), created="2020-04-01", paid=None,
            debt_type="bug", priority="medium", effort="medium"):
    return TechnicalDebtItem(
        id=item_id, name=item_id, created_date=D(created),
        paid_date=D(paid) if paid else None,
        debt_type=DebtType(debt_type),
        technical_priority=Level(priority), technical_effort=Level(effort),
        ci_id=ci, value_source_ids=frozenset(vss),
    )


def mk_portfolio(cis=(), assets=(), vss=(), items=()):
    return Portfolio(
        cis={c.id: c for c in cis},
        assets={a.id: a for a in assets},
        value_sources={v.id: v for v in vss},
        debt_items={i.id: i for i in items},
    )


def chain_portfolio():
    """Small portfolio covering all three asset states.

    shop (operational) <- ci-shop <- ci-pay; mobile (to_be) <- ci-mobile;
    old (legacy) <- ci-legacy.  reports is served by shop and old.
    """
    return mk_portfolio(
        cis=[
            mk_ci("ci-shop"),
            mk_ci("ci-pay", parents=["ci-shop"]),
            mk_ci("ci-mobile", state="to_be"),
            mk_ci("ci-legacy", state="legacy"),
        ],
        assets=[
            mk_asset("shop", cis=["ci-shop"]),
            mk_asset("mobile", state="to_be", cis=["ci-mobile"]),
            mk_asset("old", state="legacy", cis=["ci-legacy"]),
        ],
        vss=[
            mk_vs("showcase", "core", "high", assets=["shop"]),
            mk_vs("reports", "other", "low", assets=["shop", "old"]),
            mk_vs("mobile-checkout", "core", "high", assets=["mobile"]),
            mk_vs("archive", "other", "low", assets=["old"]),
        ],
    )


def rating(rater, subject, category, dimension=Dimension.BUSINESS_VALUE, ts="2020-06-01T00:00:00+00:00"):
    if isinstance(ts, str):
        ts = datetime.fromisoformat(ts)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return RatingEvent(rater_id=rater, value_source_id=subject,
                       dimension=dimension, category=category, timestamp=ts)


def ratings_from_table(table, dimension=Dimension.BUSINESS_VALUE):
    """table: {subject: {rater: category}} -> rating events."""
    events = []
    for subject, per_rater in table.items():
        for rater, category in per_rater.items():
            events.append(rating(rater, subject, category, dimension))
    return events


# -- random generation for property tests -------------------------------------

STATES = ["operational", "to_be", "legacy"]


def random_portfolio(rng: random.Random, max_entities: int = 20) -> Portfolio:
    n_cis = rng.randint(1, 5)
    cis = []
    for i in range(n_cis):
        parents = [f"ci{j}" for j in range(i) if rng.random() < 0.3]
        cis.append(mk_ci(f"ci{i}", state=rng.choice(STATES), parents=parents))

    n_assets = rng.randint(1, 4)
    assets = []
    for i in range(n_assets):
        linked = [c.id for c in cis if rng.random() < 0.5] or [rng.choice(cis).id]
        assets.append(mk_asset(f"a{i}", state=rng.choice(STATES), cis=linked))

    n_vs = rng.randint(1, 5)
    vss = []
    for i in range(n_vs):
        linked = [a.id for a in assets if rng.random() < 0.5]
        vss.append(mk_vs(
            f"vs{i}",
            value=rng.choice(["core", "other"]),
            usage=rng.choice(["high", "low"]),
            assets=linked,
        ))

    n_items = min(rng.randint(1, 6), max_entities - n_cis - n_assets - n_vs)
    items = []
    for i in range(max(n_items, 1)):
        created = date(2020, 4, 1) + timedelta(days=rng.randint(0, 120))
        paid = created + timedelta(days=rng.randint(0, 60)) if rng.random() < 0.4 else None
        items.append(TechnicalDebtItem(
            id=f"td{i}", name=f"td{i}", created_date=created, paid_date=paid,
            debt_type=rng.choice(list(DebtType)),
            technical_priority=rng.choice(list(Level)),
            technical_effort=rng.choice(list(Level)),
            ci_id=rng.choice(cis).id,
            value_source_ids=frozenset(v.id for v in vss if rng.random() < 0.5),
        ))
    return mk_portfolio(cis, assets, vss, items)


def random_rule(rng: random.Random, rule_id: str = "r") -> PriorityRule:
    return PriorityRule(
        id=rule_id, name=rule_id,
        cells={cell: rng.randint(1, 10) for cell in REACHABLE_CELLS},
    )


# -- independent oracles --------------------------------------------------------


def oracle_ancestors(ci_id: str, portfolio: Portfolio) -> set[str]:
    """Fixpoint closure over composition parents (plus the CI itself)."""
    closure = {ci_id}
    changed = True
    while changed:
        changed = False
        for member in list(closure):
            ci = portfolio.cis.get(member)
            if ci is None:
                continue
            for parent in ci.parent_ids:
                if parent not in closure:
                    closure.add(parent)
                    changed = True
    return closure


def oracle_cells(item: TechnicalDebtItem, portfolio: Portfolio) -> set[tuple]:
    """Brute-force (asset, value source) pair enumeration."""
    cells = set()
    if item.ci_id is None:
        return cells
    ancestors = oracle_ancestors(item.ci_id, portfolio)
    for vs_id in sorted(item.value_source_ids):
        vs = portfolio.value_sources.get(vs_id)
        if vs is None:
            continue
        for asset_id in sorted(vs.asset_ids):
            asset = portfolio.assets.get(asset_id)
            if asset is None:
                continue
            if any(ci in ancestors for ci in asset.ci_ids):
                if asset.state.value == "to_be":
                    cells.add(("to_be", vs.business_value.value, None))
                else:
                    cells.add((asset.state.value, vs.business_value.value, vs.usage.value))
    return cells


def oracle_priority(item: TechnicalDebtItem, rule: PriorityRule, portfolio: Portfolio) -> int | None:
    """Min rank by re-enumeration; None when the item is unlinked."""
    cells = oracle_cells(item, portfolio)
    if not cells:
        return None
    ranks = []
    for state, value, usage in cells:
        for cell, rank in rule.cells.items():
            usage_value = cell.usage.value if cell.usage else None
            if (cell.asset_state.value, cell.business_value.value, usage_value) == (state, value, usage):
                ranks.append(rank)
    return min(ranks)


def oracle_open_count(items, day: date) -> int:
    """Recount from scratch: created on or before the day, not yet paid."""
    return sum(
        1
        for item in items
        if item.created_date <= day and (item.paid_date is None or item.paid_date > day)
    )
