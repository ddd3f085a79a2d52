"""Wire formats: portfolio JSON document, rule JSON, ratings CSV.

One canonical encoding everywhere: arrays sorted by id, dates ISO-8601,
enums as their lower-snake string values, canonical JSON with sorted keys.
"""

from __future__ import annotations

import csv
import io
import json
from datetime import date

from debtmap.agreement import Dimension, RatingEvent
from debtmap.model import (
    BusinessMetric,
    BusinessValue,
    ConfigurationItem,
    DebtType,
    Horizon,
    ITAsset,
    Level,
    LifecycleState,
    Portfolio,
    TargetKind,
    TechnicalDebtItem,
    Usage,
    ValueSource,
)
from debtmap.rules import PriorityRule, parse_cell_key
from debtmap.util import format_timestamp, parse_timestamp


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _opt_date(value: date | None) -> str | None:
    return value.isoformat() if value is not None else None


def _parse_opt_date(value) -> date | None:
    return date.fromisoformat(value) if value else None


def ci_to_doc(ci: ConfigurationItem) -> dict:
    return {
        "id": ci.id,
        "name": ci.name,
        "state": ci.state.value,
        "parent_ids": sorted(ci.parent_ids),
        "depends_on": sorted(ci.depends_on),
    }


def ci_from_doc(doc: dict) -> ConfigurationItem:
    return ConfigurationItem(
        id=doc["id"],
        name=doc.get("name", doc["id"]),
        state=LifecycleState(doc["state"]),
        parent_ids=frozenset(doc.get("parent_ids", [])),
        depends_on=frozenset(doc.get("depends_on", [])),
    )


def asset_to_doc(asset: ITAsset) -> dict:
    return {
        "id": asset.id,
        "name": asset.name,
        "state": asset.state.value,
        "ci_ids": sorted(asset.ci_ids),
    }


def asset_from_doc(doc: dict) -> ITAsset:
    return ITAsset(
        id=doc["id"],
        name=doc.get("name", doc["id"]),
        state=LifecycleState(doc["state"]),
        ci_ids=frozenset(doc.get("ci_ids", [])),
    )


def value_source_to_doc(vs: ValueSource) -> dict:
    return {
        "id": vs.id,
        "name": vs.name,
        "business_value": vs.business_value.value,
        "usage": vs.usage.value,
        "asset_ids": sorted(vs.asset_ids),
    }


def value_source_from_doc(doc: dict) -> ValueSource:
    return ValueSource(
        id=doc["id"],
        name=doc.get("name", doc["id"]),
        business_value=BusinessValue(doc["business_value"]),
        usage=Usage(doc["usage"]),
        asset_ids=frozenset(doc.get("asset_ids", [])),
    )


def debt_item_to_doc(item: TechnicalDebtItem) -> dict:
    return {
        "id": item.id,
        "name": item.name,
        "description": item.description,
        "created_date": item.created_date.isoformat(),
        "paid_date": _opt_date(item.paid_date),
        "paid_date_manual": item.paid_date_manual,
        "debt_type": item.debt_type.value,
        "technical_priority": item.technical_priority.value,
        "technical_effort": item.technical_effort.value,
        "ci_id": item.ci_id,
        "value_source_ids": sorted(item.value_source_ids),
        "tracker_issue_id": item.tracker_issue_id,
        "factor_tags": sorted(item.factor_tags),
    }


def debt_item_from_doc(doc: dict) -> TechnicalDebtItem:
    return TechnicalDebtItem(
        id=doc["id"],
        name=doc.get("name", doc["id"]),
        description=doc.get("description", ""),
        created_date=date.fromisoformat(doc["created_date"]),
        paid_date=_parse_opt_date(doc.get("paid_date")),
        paid_date_manual=bool(doc.get("paid_date_manual", False)),
        debt_type=DebtType(doc["debt_type"]),
        technical_priority=Level(doc.get("technical_priority", "medium")),
        technical_effort=Level(doc.get("technical_effort", "medium")),
        ci_id=doc.get("ci_id"),
        value_source_ids=frozenset(doc.get("value_source_ids", [])),
        tracker_issue_id=doc.get("tracker_issue_id"),
        factor_tags=frozenset(doc.get("factor_tags", [])),
    )


def metric_to_doc(metric: BusinessMetric) -> dict:
    return {
        "id": metric.id,
        "name": metric.name,
        "target_kind": metric.target_kind.value,
        "target_id": metric.target_id,
        "horizon": metric.horizon.value,
        "description": metric.description,
    }


def metric_from_doc(doc: dict) -> BusinessMetric:
    return BusinessMetric(
        id=doc["id"],
        name=doc.get("name", doc["id"]),
        target_kind=TargetKind(doc["target_kind"]),
        target_id=doc["target_id"],
        horizon=Horizon(doc["horizon"]),
        description=doc.get("description", ""),
    )


def portfolio_to_doc(portfolio: Portfolio) -> dict:
    return {
        "configuration_items": [ci_to_doc(portfolio.cis[k]) for k in sorted(portfolio.cis)],
        "it_assets": [asset_to_doc(portfolio.assets[k]) for k in sorted(portfolio.assets)],
        "value_sources": [value_source_to_doc(portfolio.value_sources[k]) for k in sorted(portfolio.value_sources)],
        "debt_items": [debt_item_to_doc(portfolio.debt_items[k]) for k in sorted(portfolio.debt_items)],
        "metrics": [metric_to_doc(portfolio.metrics[k]) for k in sorted(portfolio.metrics)],
    }


def portfolio_from_doc(doc: dict) -> Portfolio:
    portfolio = Portfolio()
    for raw in doc.get("configuration_items", []):
        ci = ci_from_doc(raw)
        portfolio.cis[ci.id] = ci
    for raw in doc.get("it_assets", []):
        asset = asset_from_doc(raw)
        portfolio.assets[asset.id] = asset
    for raw in doc.get("value_sources", []):
        vs = value_source_from_doc(raw)
        portfolio.value_sources[vs.id] = vs
    for raw in doc.get("debt_items", []):
        item = debt_item_from_doc(raw)
        portfolio.debt_items[item.id] = item
    for raw in doc.get("metrics", []):
        metric = metric_from_doc(raw)
        portfolio.metrics[metric.id] = metric
    return portfolio


def rule_to_doc(rule: PriorityRule) -> dict:
    return {
        "id": rule.id,
        "name": rule.name,
        "author": rule.author,
        "created_date": _opt_date(rule.created_date),
        "cells": {cell.key(): rank for cell, rank in sorted(rule.cells.items())},
    }


def rule_from_doc(doc: dict) -> PriorityRule:
    """Build a rule from a full document or a bare cell-to-rank map."""
    if "cells" in doc:
        cells_doc = doc["cells"]
        rule_id = doc.get("id", "rule")
        name = doc.get("name", rule_id)
        author = doc.get("author", "")
        created = _parse_opt_date(doc.get("created_date"))
    else:
        cells_doc, rule_id, name, author, created = doc, "rule", "rule", "", None
    cells = {parse_cell_key(key): int(rank) for key, rank in cells_doc.items()}
    return PriorityRule(id=rule_id, name=name, author=author, created_date=created, cells=cells)


RATINGS_CSV_HEADER = ["rater_id", "value_source_id", "dimension", "category", "timestamp"]


def ratings_to_csv(ratings: list[RatingEvent]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(RATINGS_CSV_HEADER)
    for event in ratings:
        writer.writerow([
            event.rater_id,
            event.value_source_id,
            event.dimension.value,
            event.category,
            format_timestamp(event.timestamp),
        ])
    return buffer.getvalue()


def ratings_from_csv(text: str) -> list[RatingEvent]:
    reader = csv.DictReader(io.StringIO(text))
    missing = set(RATINGS_CSV_HEADER) - set(reader.fieldnames or [])
    if missing:
        raise ValueError(f"ratings CSV is missing columns: {sorted(missing)}")
    return [
        RatingEvent(
            rater_id=row["rater_id"],
            value_source_id=row["value_source_id"],
            dimension=Dimension(row["dimension"]),
            category=row["category"],
            timestamp=parse_timestamp(row["timestamp"]),
        )
        for row in reader
    ]


def rating_to_doc(event: RatingEvent) -> dict:
    return {
        "rater_id": event.rater_id,
        "value_source_id": event.value_source_id,
        "dimension": event.dimension.value,
        "category": event.category,
        "timestamp": format_timestamp(event.timestamp),
    }


def rating_from_doc(doc: dict) -> RatingEvent:
    return RatingEvent(
        rater_id=doc["rater_id"],
        value_source_id=doc["value_source_id"],
        dimension=Dimension(doc["dimension"]),
        category=doc["category"],
        timestamp=parse_timestamp(doc["timestamp"]),
    )
