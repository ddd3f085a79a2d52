"""Issue-tracker ingestion.

Issues flagged as technical debt in the team's tracker are imported as
debt items and kept in sync by external id.  The feed is a neutral JSON
document so all reconciliation logic runs on files; a thin HTTP client
fetches it from a tracker endpoint.  The tracker owns dates and subject
text only; human-entered classification and payment dates always win.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from datetime import date

import httpx

from debtmap.model import DebtType, Level, TechnicalDebtItem


class MalformedFeed(Exception):
    """The feed envelope is not the expected JSON document."""


@dataclass(frozen=True)
class TrackerIssue:
    external_id: str
    subject: str
    issue_type: str
    td_flag: bool
    created_on: date
    description: str = ""
    closed_on: date | None = None
    priority: str = ""


@dataclass
class SyncReport:
    imported: int = 0
    updated: int = 0
    skipped: int = 0
    unmapped_types: set[str] = field(default_factory=set)
    malformed: int = 0


@dataclass
class ParseResult:
    tracker: str
    issues: list[TrackerIssue] = field(default_factory=list)
    malformed: list[tuple[int, str]] = field(default_factory=list)


@dataclass
class ImportResult:
    new_items: list[TechnicalDebtItem] = field(default_factory=list)
    updated_items: list[TechnicalDebtItem] = field(default_factory=list)
    report: SyncReport = field(default_factory=SyncReport)


# Tracker vocabulary -> debt type.  Bugs reported by customers and bugs
# found by functional testing within the sprint both become bug debt.
DEFAULT_TYPE_MAP: dict[str, DebtType] = {
    "bug": DebtType.BUG,
    "bug-dev": DebtType.BUG,
    "documentation": DebtType.DOCUMENTATION,
    "requirements": DebtType.REQUIREMENTS,
    "development task": DebtType.CODE,
    "test": DebtType.TEST,
    "build": DebtType.BUILD,
}

DEFAULT_PRIORITY_MAP: dict[str, Level] = {level.value: level for level in Level}


@dataclass(frozen=True)
class SyncConfig:
    type_map: dict[str, DebtType] = field(default_factory=lambda: dict(DEFAULT_TYPE_MAP))
    priority_map: dict[str, Level] = field(default_factory=lambda: dict(DEFAULT_PRIORITY_MAP))

    @classmethod
    def from_doc(cls, doc: dict) -> "SyncConfig":
        type_map = dict(DEFAULT_TYPE_MAP)
        for issue_type, debt_type in doc.get("type_map", {}).items():
            type_map[str(issue_type)] = DebtType(debt_type)
        priority_map = dict(DEFAULT_PRIORITY_MAP)
        for tracker_priority, level in doc.get("priority_map", {}).items():
            priority_map[str(tracker_priority)] = Level(level)
        return cls(type_map=type_map, priority_map=priority_map)

    def to_doc(self) -> dict:
        return {
            "type_map": {k: v.value for k, v in self.type_map.items()},
            "priority_map": {k: v.value for k, v in self.priority_map.items()},
        }


def _parse_issue(raw: object) -> TrackerIssue:
    if not isinstance(raw, dict):
        raise ValueError("issue entry is not an object")
    external_id = raw.get("external_id")
    if not isinstance(external_id, str) or not external_id:
        raise ValueError("missing external_id")
    created_on = raw.get("created_on")
    if not isinstance(created_on, str):
        raise ValueError("missing created_on")
    closed_on = raw.get("closed_on")
    return TrackerIssue(
        external_id=external_id,
        subject=str(raw.get("subject", "")),
        description=str(raw.get("description", "")),
        issue_type=str(raw.get("issue_type", "")),
        td_flag=bool(raw.get("td_flag", False)),
        created_on=date.fromisoformat(created_on),
        closed_on=date.fromisoformat(closed_on) if isinstance(closed_on, str) else None,
        priority=str(raw.get("priority", "")),
    )


def parse_feed(document: dict | str) -> ParseResult:
    """Parse a feed document; bad entries are reported, not fatal."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise MalformedFeed(f"feed is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise MalformedFeed("feed must be a JSON object")
    tracker = document.get("tracker")
    issues = document.get("issues")
    if not isinstance(tracker, str) or not tracker:
        raise MalformedFeed("feed is missing the tracker name")
    if not isinstance(issues, list):
        raise MalformedFeed("feed is missing the issues array")

    result = ParseResult(tracker=tracker)
    for index, raw in enumerate(issues):
        try:
            result.issues.append(_parse_issue(raw))
        except ValueError as exc:
            result.malformed.append((index, str(exc)))
    return result


def imported_item_id(tracker: str, external_id: str,
                     existing: dict[str, TechnicalDebtItem] | None = None) -> str:
    """Deterministic id for an imported item, stepping over unrelated
    tool-native items that happen to use the same id."""
    base = f"{tracker}:{external_id}"
    candidate = base
    suffix = 2
    while existing and candidate in existing and existing[candidate].tracker_issue_id != external_id:
        candidate = f"{base}#{suffix}"
        suffix += 1
    return candidate


def _item_from_issue(issue: TrackerIssue, tracker: str, config: SyncConfig,
                     existing: dict[str, TechnicalDebtItem] | None = None) -> TechnicalDebtItem:
    return TechnicalDebtItem(
        id=imported_item_id(tracker, issue.external_id, existing),
        name=issue.subject,
        description=issue.description,
        created_date=issue.created_on,
        paid_date=issue.closed_on,
        paid_date_manual=False,
        debt_type=config.type_map.get(issue.issue_type, DebtType.OTHER),
        technical_priority=config.priority_map.get(issue.priority, Level.MEDIUM),
        technical_effort=Level.MEDIUM,
        tracker_issue_id=issue.external_id,
    )


def _reconcile_item(item: TechnicalDebtItem, issue: TrackerIssue) -> TechnicalDebtItem:
    # Tracker-owned fields only; classification and manual payments stay.
    updated = replace(
        item,
        name=issue.subject,
        description=issue.description,
        created_date=issue.created_on,
    )
    if not item.paid_date_manual:
        updated = replace(updated, paid_date=issue.closed_on, paid_date_manual=False)
    return updated


def import_debt(
    issues: list[TrackerIssue],
    existing: dict[str, TechnicalDebtItem],
    config: SyncConfig | None = None,
    tracker: str = "tracker",
) -> ImportResult:
    """Create or reconcile debt items from flagged issues, by external id.

    Idempotent: a second run over the same feed imports nothing.  New items
    arrive without CI or value-source links and need human linking.
    """
    config = config or SyncConfig()
    by_external = {
        item.tracker_issue_id: item
        for item in existing.values()
        if item.tracker_issue_id is not None
    }
    result = ImportResult()
    for issue in issues:
        if not issue.td_flag:
            result.report.skipped += 1
            continue
        if issue.issue_type not in config.type_map:
            result.report.unmapped_types.add(issue.issue_type)
        current = by_external.get(issue.external_id)
        if current is None:
            result.new_items.append(_item_from_issue(issue, tracker, config, existing))
            result.report.imported += 1
            continue
        reconciled = _reconcile_item(current, issue)
        if reconciled == current:
            result.report.skipped += 1
        else:
            result.updated_items.append(reconciled)
            result.report.updated += 1
    return result


def sync(
    items: dict[str, TechnicalDebtItem],
    feed: dict | str,
    config: SyncConfig | None = None,
) -> ImportResult:
    """Parse a feed and reconcile it against the current debt items."""
    parsed = parse_feed(feed)
    result = import_debt(parsed.issues, items, config=config, tracker=parsed.tracker)
    result.report.malformed = len(parsed.malformed)
    return result


@dataclass(frozen=True)
class TrackerConfig:
    url: str | None = None
    api_key: str | None = None
    poll_seconds: int = 300

    @classmethod
    def from_env(cls, environ: dict[str, str] | None = None) -> "TrackerConfig":
        env = os.environ if environ is None else environ
        return cls(
            url=env.get("DEBTMAP_TRACKER_URL") or None,
            api_key=env.get("DEBTMAP_TRACKER_API_KEY") or None,
            poll_seconds=int(env.get("DEBTMAP_TRACKER_POLL_SECONDS", "300")),
        )


def fetch_feed(config: TrackerConfig, client: httpx.Client | None = None) -> dict:
    """Fetch the feed document from the configured tracker endpoint."""
    if not config.url:
        raise MalformedFeed("no tracker URL configured")
    headers = {"X-Api-Key": config.api_key} if config.api_key else {}
    own_client = client is None
    client = client or httpx.Client(timeout=30.0)
    try:
        response = client.get(config.url, headers=headers)
        response.raise_for_status()
        document = response.json()
    finally:
        if own_client:
            client.close()
    if not isinstance(document, dict):
        raise MalformedFeed("tracker endpoint did not return a JSON object")
    return document
