"""Event-sourced persistence: append-only log plus replayable snapshots.

Every mutation is one durable event in a JSONL log; the live state is the
left fold of the log, and any historical state can be recovered by folding
a prefix.  The fold is deterministic, so the same log always reproduces the
same snapshot byte for byte under the canonical encoding.  A single writer
serializes appends; readers get the latest committed state object, which is
never mutated after the swap.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass, field, replace
from datetime import date, datetime, timezone
from enum import Enum
from pathlib import Path

from debtmap import interchange, tracker
from debtmap.agreement import RatingEvent
from debtmap.model import Portfolio
from debtmap.rules import PriorityRule, validate_rule
from debtmap.util import format_timestamp, parse_timestamp


class EventKind(str, Enum):
    ENTITY_UPSERT = "entity_upsert"
    ENTITY_DELETE = "entity_delete"
    RATING = "rating"
    RULE_CREATED = "rule_created"
    DEBT_PAID = "debt_paid"
    SYNC = "sync"


class ValidationFailed(Exception):
    def __init__(self, message: str, details: list | None = None):
        self.details = details or []
        super().__init__(message)


class StorageFailed(Exception):
    pass


class OutOfRange(Exception):
    pass


ENTITY_KINDS = {
    "configuration_item": (interchange.ci_from_doc, "cis"),
    "it_asset": (interchange.asset_from_doc, "assets"),
    "value_source": (interchange.value_source_from_doc, "value_sources"),
    "debt_item": (interchange.debt_item_from_doc, "debt_items"),
    "metric": (interchange.metric_from_doc, "metrics"),
}

# The active-rule pointer rides the upsert machinery as a tiny settings
# entity, keeping the event kind vocabulary closed.
ACTIVE_RULE_KIND = "active_rule"


@dataclass(frozen=True)
class EventRecord:
    seq: int
    timestamp: str
    actor: str
    kind: EventKind
    payload: dict

    def to_doc(self) -> dict:
        return {
            "seq": self.seq,
            "timestamp": self.timestamp,
            "actor": self.actor,
            "kind": self.kind.value,
            "payload": self.payload,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "EventRecord":
        return cls(
            seq=int(doc["seq"]),
            timestamp=doc["timestamp"],
            actor=doc.get("actor", ""),
            kind=EventKind(doc["kind"]),
            payload=doc["payload"],
        )


def _rating_key(event: RatingEvent) -> tuple[str, str, str]:
    return (event.rater_id, event.value_source_id, event.dimension.value)


@dataclass
class StoreState:
    portfolio: Portfolio = field(default_factory=Portfolio)
    rules: list[PriorityRule] = field(default_factory=list)
    active_rule_id: str | None = None
    ratings: dict[tuple[str, str, str], RatingEvent] = field(default_factory=dict)

    def rule_by_id(self, rule_id: str) -> PriorityRule | None:
        for rule in self.rules:
            if rule.id == rule_id:
                return rule
        return None

    def effective_ratings(self) -> list[RatingEvent]:
        return [self.ratings[key] for key in sorted(self.ratings)]


@dataclass(frozen=True)
class Snapshot:
    """State as of one log position; replaying events 1..as_of rebuilds it."""

    portfolio: Portfolio
    rules: tuple[PriorityRule, ...]
    active_rule_id: str | None
    ratings: tuple[RatingEvent, ...]
    as_of: int

    def to_doc(self) -> dict:
        return {
            "as_of": self.as_of,
            "portfolio": interchange.portfolio_to_doc(self.portfolio),
            "rules": [interchange.rule_to_doc(rule) for rule in self.rules],
            "active_rule_id": self.active_rule_id,
            "ratings": [interchange.rating_to_doc(event) for event in self.ratings],
        }

    def canonical(self) -> str:
        return interchange.canonical_json(self.to_doc())

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()


def validate_payload(kind: EventKind, payload: dict, state: StoreState) -> None:
    """Reject a payload that would not apply cleanly; the store stays unchanged."""
    try:
        if kind == EventKind.ENTITY_UPSERT:
            entity_kind = payload["entity_kind"]
            if entity_kind == ACTIVE_RULE_KIND:
                rule_id = payload["entity"]["rule_id"]
                if state.rule_by_id(rule_id) is None:
                    raise ValidationFailed(f"unknown rule {rule_id!r}")
                return
            if entity_kind not in ENTITY_KINDS:
                raise ValidationFailed(f"unknown entity kind {entity_kind!r}")
            parser, _ = ENTITY_KINDS[entity_kind]
            parser(payload["entity"])
        elif kind == EventKind.ENTITY_DELETE:
            if payload["entity_kind"] not in ENTITY_KINDS:
                raise ValidationFailed(f"unknown entity kind {payload['entity_kind']!r}")
            if not isinstance(payload["id"], str):
                raise ValidationFailed("entity id must be a string")
        elif kind == EventKind.RATING:
            interchange.rating_from_doc(payload)
        elif kind == EventKind.RULE_CREATED:
            rule = interchange.rule_from_doc(payload["rule"])
            if "id" not in payload["rule"]:
                raise ValidationFailed("rule document needs an id")
            if state.rule_by_id(rule.id) is not None:
                raise ValidationFailed(f"rule {rule.id!r} already exists; rules are immutable, create a new version")
            violations = validate_rule(rule)
            if violations:
                raise ValidationFailed(
                    f"rule {rule.id!r} is invalid",
                    details=[{"code": v.code, "entity_id": v.entity_id, "message": v.message} for v in violations],
                )
        elif kind == EventKind.DEBT_PAID:
            if payload["debt_id"] not in state.portfolio.debt_items:
                raise ValidationFailed(f"unknown debt item {payload['debt_id']!r}")
            date.fromisoformat(payload["paid_date"])
        elif kind == EventKind.SYNC:
            tracker.parse_feed(payload["feed"])
            if payload.get("config"):
                tracker.SyncConfig.from_doc(payload["config"])
    except ValidationFailed:
        raise
    except (KeyError, TypeError, ValueError, tracker.MalformedFeed) as exc:
        raise ValidationFailed(f"invalid {kind.value} payload: {exc}") from exc


def apply_event(state: StoreState, event: EventRecord) -> StoreState:
    """Pure-ish fold step: returns a new state, never mutates the old one."""
    kind, payload = event.kind, event.payload
    if kind == EventKind.ENTITY_UPSERT:
        entity_kind = payload["entity_kind"]
        if entity_kind == ACTIVE_RULE_KIND:
            return replace(state, active_rule_id=payload["entity"]["rule_id"])
        parser, collection_name = ENTITY_KINDS[entity_kind]
        entity = parser(payload["entity"])
        portfolio = state.portfolio.copy()
        getattr(portfolio, collection_name)[entity.id] = entity
        return replace(state, portfolio=portfolio)
    if kind == EventKind.ENTITY_DELETE:
        _, collection_name = ENTITY_KINDS[payload["entity_kind"]]
        portfolio = state.portfolio.copy()
        getattr(portfolio, collection_name).pop(payload["id"], None)
        return replace(state, portfolio=portfolio)
    if kind == EventKind.RATING:
        rating = interchange.rating_from_doc(payload)
        key = _rating_key(rating)
        current = state.ratings.get(key)
        if current is not None and rating.timestamp < current.timestamp:
            return state
        ratings = dict(state.ratings)
        ratings[key] = rating
        return replace(state, ratings=ratings)
    if kind == EventKind.RULE_CREATED:
        rule = interchange.rule_from_doc(payload["rule"])
        return replace(state, rules=[*state.rules, rule])
    if kind == EventKind.DEBT_PAID:
        item = state.portfolio.debt_items.get(payload["debt_id"])
        if item is None:
            return state
        portfolio = state.portfolio.copy()
        portfolio.debt_items[item.id] = item.pay(
            date.fromisoformat(payload["paid_date"]),
            manual=bool(payload.get("manual", True)),
        )
        return replace(state, portfolio=portfolio)
    if kind == EventKind.SYNC:
        config = tracker.SyncConfig.from_doc(payload["config"]) if payload.get("config") else None
        result = tracker.sync(state.portfolio.debt_items, payload["feed"], config)
        portfolio = state.portfolio.copy()
        for item in result.new_items + result.updated_items:
            portfolio.debt_items[item.id] = item
        return replace(state, portfolio=portfolio)
    raise StorageFailed(f"unknown event kind {kind!r}")


SNAPSHOT_EVERY = 500


class Store:
    """Single-writer event store with an optional file-backed log.

    With a data directory, events land in ``events.jsonl`` (fsync before
    acknowledge) and a snapshot cache speeds up reopening; without one the
    store is purely in-memory (tests, what-if sandboxes).
    """

    def __init__(self, data_dir: str | Path | None = None):
        self._lock = threading.RLock()
        self._events: list[EventRecord] = []
        self._state = StoreState()
        self._log_path: Path | None = None
        self._cache_path: Path | None = None
        if data_dir is not None:
            directory = Path(data_dir)
            directory.mkdir(parents=True, exist_ok=True)
            self._log_path = directory / "events.jsonl"
            self._cache_path = directory / "snapshot.json"
            self._load()

    def _load(self) -> None:
        assert self._log_path is not None
        if not self._log_path.exists():
            return
        try:
            with self._log_path.open("r", encoding="utf-8") as handle:
                for line in handle:
                    line = line.strip()
                    if not line:
                        continue
                    record = EventRecord.from_doc(json.loads(line))
                    self._events.append(record)
        except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
            raise StorageFailed(f"cannot read event log {self._log_path}: {exc}") from exc
        state, start = self._load_cache()
        for record in self._events[start:]:
            state = apply_event(state, record)
        self._state = state

    def _load_cache(self) -> tuple[StoreState, int]:
        """Resume from the snapshot cache when it matches the log; a stale
        or unreadable cache just means a full replay."""
        if self._cache_path is None or not self._cache_path.exists():
            return StoreState(), 0
        try:
            doc = json.loads(self._cache_path.read_text(encoding="utf-8"))
            as_of = int(doc["as_of"])
            if not 0 <= as_of <= len(self._events):
                return StoreState(), 0
            ratings = {}
            for raw in doc["ratings"]:
                event = interchange.rating_from_doc(raw)
                ratings[_rating_key(event)] = event
            state = StoreState(
                portfolio=interchange.portfolio_from_doc(doc["portfolio"]),
                rules=[interchange.rule_from_doc(raw) for raw in doc["rules"]],
                active_rule_id=doc.get("active_rule_id"),
                ratings=ratings,
            )
            return state, as_of
        except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError):
            return StoreState(), 0

    @property
    def last_seq(self) -> int:
        return len(self._events)

    def append(
        self,
        kind: EventKind,
        payload: dict,
        actor: str = "",
        timestamp: datetime | None = None,
    ) -> int:
        """Validate, persist and apply one event; returns its sequence number."""
        with self._lock:
            validate_payload(kind, payload, self._state)
            record = EventRecord(
                seq=self.last_seq + 1,
                timestamp=format_timestamp(timestamp or datetime.now(timezone.utc)),
                actor=actor,
                kind=kind,
                payload=payload,
            )
            new_state = apply_event(self._state, record)
            if self._log_path is not None:
                try:
                    with self._log_path.open("a", encoding="utf-8") as handle:
                        handle.write(interchange.canonical_json(record.to_doc()) + "\n")
                        handle.flush()
                        os.fsync(handle.fileno())
                except OSError as exc:
                    raise StorageFailed(f"cannot append to {self._log_path}: {exc}") from exc
            self._events.append(record)
            self._state = new_state
            if self._cache_path is not None and record.seq % SNAPSHOT_EVERY == 0:
                self._write_cache()
            return record.seq

    def _write_cache(self) -> None:
        assert self._cache_path is not None
        doc = self.snapshot().to_doc()
        tmp = self._cache_path.with_suffix(".json.tmp")
        tmp.write_text(interchange.canonical_json(doc), encoding="utf-8")
        tmp.replace(self._cache_path)

    def state(self) -> StoreState:
        return self._state

    def events(self) -> list[EventRecord]:
        with self._lock:
            return list(self._events)

    def _snapshot_from(self, state: StoreState, as_of: int) -> Snapshot:
        return Snapshot(
            portfolio=state.portfolio,
            rules=tuple(state.rules),
            active_rule_id=state.active_rule_id,
            ratings=tuple(state.effective_ratings()),
            as_of=as_of,
        )

    def snapshot(self) -> Snapshot:
        with self._lock:
            return self._snapshot_from(self._state, self.last_seq)

    def snapshot_as_of(self, seq: int | None = None, as_of_date: date | None = None) -> Snapshot:
        """Rebuild state by folding the log prefix; pure given the log."""
        with self._lock:
            events = list(self._events)
        if seq is None and as_of_date is not None:
            seq = 0
            for record in events:
                if parse_timestamp(record.timestamp).date() <= as_of_date:
                    seq = record.seq
        if seq is None:
            seq = len(events)
        if seq < 0 or seq > len(events):
            raise OutOfRange(f"seq {seq} outside 0..{len(events)}")
        state = StoreState()
        for record in events[:seq]:
            state = apply_event(state, record)
        return self._snapshot_from(state, seq)

    def digest(self) -> str:
        return self.snapshot().digest()
