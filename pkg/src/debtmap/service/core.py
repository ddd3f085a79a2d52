"""Application core: every CLI command and API route is a thin adapter
over one method here, so offline and server modes produce identical output.

All methods take and return JSON-shaped values (the wire formats from
``debtmap.interchange``); domain objects never cross this boundary.
"""

from __future__ import annotations

from datetime import date, datetime, timezone

from debtmap import agreement, analytics, interchange, rules as rules_mod, tracker
from debtmap.model import Portfolio, validate_portfolio
from debtmap.store import ACTIVE_RULE_KIND, ENTITY_KINDS, EventKind, Store
from debtmap.util import round_half_up


class ServiceError(Exception):
    """Error with a stable code and HTTP status, rendered as
    ``{code, message, details}``."""

    def __init__(self, code: str, message: str, status: int = 400, details: list | dict | None = None):
        self.code = code
        self.status = status
        self.details = details if details is not None else []
        super().__init__(message)

    def to_doc(self) -> dict:
        return {"code": self.code, "message": str(self), "details": self.details}


def _violations_doc(violations) -> list[dict]:
    return [{"code": v.code, "entity_id": v.entity_id, "message": v.message} for v in violations]


def _unlinked_doc(unlinked: list[tuple[str, str]]) -> list[dict]:
    return [{"id": item_id, "message": message} for item_id, message in unlinked]


class DebtService:
    def __init__(self, store: Store, tracker_config: tracker.TrackerConfig | None = None,
                 sync_config: tracker.SyncConfig | None = None):
        self.store = store
        self.tracker_config = tracker_config or tracker.TrackerConfig()
        self.sync_config = sync_config or tracker.SyncConfig()

    # -- portfolio ---------------------------------------------------------

    def get_portfolio(self) -> dict:
        return interchange.portfolio_to_doc(self.store.state().portfolio)

    def validate(self) -> dict:
        violations = validate_portfolio(self.store.state().portfolio)
        return {"violations": _violations_doc(violations), "valid": not violations}

    def put_portfolio(self, doc: dict, actor: str = "") -> dict:
        """Replace the portfolio wholesale: upsert everything present,
        delete everything absent.  Validation problems are reported, not
        rejected; the portfolio is allowed to be temporarily inconsistent."""
        try:
            incoming = interchange.portfolio_from_doc(doc)
        except (KeyError, TypeError, ValueError) as exc:
            raise ServiceError("InvalidDocument", f"malformed portfolio document: {exc}") from exc
        current = self.store.state().portfolio
        plan: list[tuple[EventKind, dict]] = []
        pairs = [
            ("configuration_item", current.cis, incoming.cis, interchange.ci_to_doc),
            ("it_asset", current.assets, incoming.assets, interchange.asset_to_doc),
            ("value_source", current.value_sources, incoming.value_sources, interchange.value_source_to_doc),
            ("debt_item", current.debt_items, incoming.debt_items, interchange.debt_item_to_doc),
            ("metric", current.metrics, incoming.metrics, interchange.metric_to_doc),
        ]
        for entity_kind, old, new, encode in pairs:
            for entity_id in sorted(new):
                if entity_id not in old or old[entity_id] != new[entity_id]:
                    plan.append((EventKind.ENTITY_UPSERT,
                                 {"entity_kind": entity_kind, "entity": encode(new[entity_id])}))
            for entity_id in sorted(set(old) - set(new)):
                plan.append((EventKind.ENTITY_DELETE, {"entity_kind": entity_kind, "id": entity_id}))
        for kind, payload in plan:
            self.store.append(kind, payload, actor=actor)
        report = self.validate()
        report["events"] = len(plan)
        report["counts"] = {
            "configuration_items": len(incoming.cis),
            "it_assets": len(incoming.assets),
            "value_sources": len(incoming.value_sources),
            "debt_items": len(incoming.debt_items),
            "metrics": len(incoming.metrics),
        }
        return report

    def upsert_entity(self, entity_kind: str, doc: dict, actor: str = "") -> dict:
        if entity_kind not in ENTITY_KINDS:
            raise ServiceError("NotFound", f"unknown entity kind {entity_kind!r}", status=404)
        self.store.append(EventKind.ENTITY_UPSERT, {"entity_kind": entity_kind, "entity": doc}, actor=actor)
        return {"entity_kind": entity_kind, "entity": doc}

    def delete_entity(self, entity_kind: str, entity_id: str, actor: str = "") -> dict:
        self.store.append(EventKind.ENTITY_DELETE, {"entity_kind": entity_kind, "id": entity_id}, actor=actor)
        return {"deleted": entity_id}

    # -- debt --------------------------------------------------------------

    def list_debt(self, unpaid: bool | None = None, needs_linking: bool | None = None) -> dict:
        items = self.store.state().portfolio.debt_items
        docs = []
        for item_id in sorted(items):
            item = items[item_id]
            if unpaid is not None and item.is_paid == unpaid:
                continue
            if needs_linking is not None and item.needs_linking != needs_linking:
                continue
            docs.append(interchange.debt_item_to_doc(item))
        return {"items": docs}

    def add_debt(self, doc: dict, actor: str = "") -> dict:
        return {"item": self.upsert_entity("debt_item", doc, actor=actor)["entity"]}

    def get_debt(self, item_id: str) -> dict:
        item = self.store.state().portfolio.debt_items.get(item_id)
        if item is None:
            raise ServiceError("NotFound", f"unknown debt item {item_id!r}", status=404)
        return {"item": interchange.debt_item_to_doc(item)}

    def pay_debt(self, item_id: str, paid_date: str | None = None, actor: str = "") -> dict:
        self.get_debt(item_id)
        on = paid_date or date.today().isoformat()
        self.store.append(
            EventKind.DEBT_PAID,
            {"debt_id": item_id, "paid_date": on, "manual": True},
            actor=actor,
        )
        return self.get_debt(item_id)

    # -- rules -------------------------------------------------------------

    def list_rules(self) -> dict:
        state = self.store.state()
        return {
            "rules": [interchange.rule_to_doc(rule) for rule in state.rules],
            "active_rule_id": state.active_rule_id,
        }

    def add_rule(self, doc: dict, activate: bool = False, actor: str = "") -> dict:
        self.store.append(EventKind.RULE_CREATED, {"rule": doc}, actor=actor)
        rule_id = doc["id"]
        if activate:
            self.activate_rule(rule_id, actor=actor)
        return {"rule": interchange.rule_to_doc(self.store.state().rule_by_id(rule_id))}

    def activate_rule(self, rule_id: str, actor: str = "") -> dict:
        self.store.append(
            EventKind.ENTITY_UPSERT,
            {"entity_kind": ACTIVE_RULE_KIND, "entity": {"rule_id": rule_id}},
            actor=actor,
        )
        return {"active_rule_id": rule_id}

    def _resolve_rules(self, rule_ids: list[str] | None) -> list[rules_mod.PriorityRule]:
        state = self.store.state()
        if rule_ids is None:
            return list(state.rules)
        resolved = []
        for rule_id in rule_ids:
            rule = state.rule_by_id(rule_id)
            if rule is None:
                raise ServiceError("NotFound", f"unknown rule {rule_id!r}", status=404)
            resolved.append(rule)
        return resolved

    def _active_rule(self, rule_id: str | None = None) -> rules_mod.PriorityRule:
        state = self.store.state()
        rule_id = rule_id or state.active_rule_id
        if rule_id is None:
            raise ServiceError("NoActiveRule", "no rule is active and none was given", status=409)
        rule = state.rule_by_id(rule_id)
        if rule is None:
            raise ServiceError("NotFound", f"unknown rule {rule_id!r}", status=404)
        return rule

    def compare_rules(self, rule_ids: list[str] | None = None) -> dict:
        selected = self._resolve_rules(rule_ids)
        if not selected:
            return {"rule_ids": [], "cells": []}
        comparison = rules_mod.compare_rules(selected)
        return {
            "rule_ids": list(comparison.rule_ids),
            "cells": [
                {
                    "cell": row.cell.key(),
                    "ranks": dict(row.ranks),
                    "buckets": {rid: b.value for rid, b in row.buckets.items()},
                    "unanimous": row.unanimous,
                }
                for row in comparison.cells
            ],
        }

    def decompose_rules(self, rule_ids: list[str] | None = None) -> dict:
        selected = self._resolve_rules(rule_ids)
        if not selected:
            raise ServiceError("NotFound", "no rules to decompose", status=404)
        return {
            "rule_ids": [rule.id for rule in selected],
            "bands": rules_mod.decompose_rules(selected),
        }

    # -- backlog and what-if ------------------------------------------------

    def _backlog_entries(self, rule: rules_mod.PriorityRule, portfolio: Portfolio,
                         include_paid: bool) -> tuple[list[dict], list[dict]]:
        items = [portfolio.debt_items[k] for k in sorted(portfolio.debt_items)]
        result = rules_mod.rank_backlog(items, rule, portfolio, include_paid=include_paid)
        entries = [
            {
                "id": entry.item.id,
                "name": entry.item.name,
                "rank": entry.rank,
                "bucket": entry.bucket.value,
                "created_date": entry.item.created_date.isoformat(),
                "paid_date": entry.item.paid_date.isoformat() if entry.item.paid_date else None,
                "debt_type": entry.item.debt_type.value,
                "technical_priority": entry.item.technical_priority.value,
                "technical_effort": entry.item.technical_effort.value,
            }
            for entry in result.entries
        ]
        return entries, _unlinked_doc(result.unlinked)

    def backlog(self, rule_id: str | None = None, include_paid: bool = False) -> dict:
        rule = self._active_rule(rule_id)
        entries, unlinked = self._backlog_entries(rule, self.store.state().portfolio, include_paid)
        return {"rule_id": rule.id, "entries": entries, "unlinked": unlinked}

    def what_if(self, candidate: dict | None = None, rule_id: str | None = None,
                as_of: int | None = None) -> dict:
        """Rank the backlog under a candidate rule and diff it against the
        active rule.  Read-only: the candidate is never persisted."""
        if candidate is not None:
            try:
                candidate_rule = interchange.rule_from_doc(candidate)
            except (KeyError, TypeError, ValueError) as exc:
                raise ServiceError("InvalidDocument", f"malformed rule document: {exc}") from exc
        elif rule_id is not None:
            candidate_rule = self._active_rule(rule_id)
        else:
            raise ServiceError("InvalidDocument", "what-if needs a rule document or rule_id")
        violations = rules_mod.validate_rule(candidate_rule)
        if violations:
            raise ServiceError("RuleInvalid", f"candidate rule {candidate_rule.id!r} is invalid",
                               details=_violations_doc(violations))

        snapshot = self.store.snapshot() if as_of is None else self.store.snapshot_as_of(seq=as_of)
        active_id = snapshot.active_rule_id
        if active_id is None:
            raise ServiceError("NoActiveRule", "no active rule to diff against", status=409)
        active_rule = next(rule for rule in snapshot.rules if rule.id == active_id)

        portfolio = snapshot.portfolio
        entries, unlinked = self._backlog_entries(candidate_rule, portfolio, include_paid=False)
        before = {
            entry["id"]: entry
            for entry in self._backlog_entries(active_rule, portfolio, include_paid=False)[0]
        }
        diff = []
        for entry in entries:
            previous = before.get(entry["id"])
            if previous is None:
                continue
            diff.append({
                "id": entry["id"],
                "rank_before": previous["rank"],
                "rank_after": entry["rank"],
                "rank_change": entry["rank"] - previous["rank"],
                "bucket_before": previous["bucket"],
                "bucket_after": entry["bucket"],
                "bucket_changed": previous["bucket"] != entry["bucket"],
            })
        diff.sort(key=lambda d: (d["rank_change"], d["id"]))
        return {
            "candidate_rule_id": candidate_rule.id,
            "active_rule_id": active_id,
            "as_of": snapshot.as_of,
            "backlog": entries,
            "diff": diff,
            "unlinked": unlinked,
        }

    # -- analytics -----------------------------------------------------------

    def _window(self, start: str | None, end: str | None,
                portfolio: Portfolio) -> analytics.DateRange | None:
        dates: list[date] = []
        for item in portfolio.debt_items.values():
            dates.append(item.created_date)
            if item.paid_date is not None:
                dates.append(item.paid_date)
        start_date = date.fromisoformat(start) if start else (min(dates) if dates else None)
        end_date = date.fromisoformat(end) if end else (max(dates) if dates else None)
        if start_date is None or end_date is None:
            return None
        try:
            return analytics.DateRange(start_date, end_date)
        except analytics.EmptyRange as exc:
            raise ServiceError("EmptyRange", str(exc)) from exc

    @staticmethod
    def _window_doc(window: analytics.DateRange | None) -> dict | None:
        if window is None:
            return None
        return {"start": window.start.isoformat(), "end": window.end.isoformat()}

    def analytics_crosstab(self, rule_id: str | None = None) -> dict:
        rule = self._active_rule(rule_id)
        portfolio = self.store.state().portfolio
        items = [portfolio.debt_items[k] for k in sorted(portfolio.debt_items)]
        rows, unlinked = analytics.priority_crosstab(items, rule, portfolio)
        return {
            "rule_id": rule.id,
            "columns": [level.value for level in analytics.LEVELS],
            "rows": [
                {"group": row.group_key, "counts": row.counts,
                 "percentages": row.percentages, "total": row.total}
                for row in rows
            ],
            "unlinked": _unlinked_doc(unlinked),
        }

    def analytics_payments(self, rule_id: str | None = None, start: str | None = None,
                           end: str | None = None) -> dict:
        rule = self._active_rule(rule_id)
        portfolio = self.store.state().portfolio
        items = [portfolio.debt_items[k] for k in sorted(portfolio.debt_items)]
        window = self._window(start, end, portfolio)
        if window is None:
            return {"rule_id": rule.id, "window": None, "groups": [], "unlinked": []}
        stats, unlinked = analytics.payment_stats(items, rule, portfolio, window)
        return {
            "rule_id": rule.id,
            "window": self._window_doc(window),
            "groups": [
                {
                    "group": s.group_key,
                    "open_start": s.open_start,
                    "identified": s.identified,
                    "paid": s.paid,
                    "open_end": s.open_end,
                    "pct_paid": s.pct_paid,
                    "pct_paid_display": round_half_up(s.pct_paid * 100.0),
                }
                for s in stats
            ],
            "unlinked": _unlinked_doc(unlinked),
        }

    def analytics_series(self, rule_id: str | None = None, start: str | None = None,
                         end: str | None = None, split: str | None = None) -> dict:
        rule = self._active_rule(rule_id)
        portfolio = self.store.state().portfolio
        items = [portfolio.debt_items[k] for k in sorted(portfolio.debt_items)]
        window = self._window(start, end, portfolio)
        if window is None:
            return {"rule_id": rule.id, "window": None, "split": split, "series": [], "unlinked": []}
        split_date = date.fromisoformat(split) if split else None
        series, unlinked = analytics.accumulation_series(items, rule, portfolio, window, split_date)

        def trend_doc(s: analytics.DailySeries, sub: analytics.DateRange) -> dict | None:
            try:
                fit = analytics.fit_trend(s, sub)
            except analytics.InsufficientPoints:
                return None
            return {
                "slope": fit.slope,
                "intercept": fit.intercept,
                "r_squared": fit.r_squared,
                "window": self._window_doc(fit.window),
            }

        docs = []
        for s in series:
            trends: dict[str, dict | None] = {}
            if split_date is not None and window.start <= split_date <= window.end:
                trends["before_split"] = trend_doc(s, analytics.DateRange(window.start, split_date))
                trends["after_split"] = trend_doc(s, analytics.DateRange(split_date, window.end))
            else:
                trends["overall"] = trend_doc(s, window)
            docs.append({
                "group": s.group_key,
                "points": [{"date": day.isoformat(), "open": count} for day, count in s.points],
                "split": split,
                "trends": trends,
            })
        return {
            "rule_id": rule.id,
            "window": self._window_doc(window),
            "split": split,
            "series": docs,
            "unlinked": _unlinked_doc(unlinked),
        }

    def analytics_effort(self, rule_id: str | None = None, start: str | None = None,
                         end: str | None = None) -> dict:
        rule = self._active_rule(rule_id)
        portfolio = self.store.state().portfolio
        items = [portfolio.debt_items[k] for k in sorted(portfolio.debt_items)]
        window = self._window(start, end, portfolio)
        if window is None:
            return {"rule_id": rule.id, "window": None, "rows": [], "unlinked": []}
        rows, unlinked = analytics.effort_distribution(items, rule, portfolio, window)
        return {
            "rule_id": rule.id,
            "window": self._window_doc(window),
            "columns": [level.value for level in analytics.LEVELS],
            "rows": [
                {"group": row.group_key, "counts": row.counts,
                 "percentages": row.percentages, "total": row.total}
                for row in rows
            ],
            "unlinked": _unlinked_doc(unlinked),
        }

    def analytics_types(self) -> dict:
        portfolio = self.store.state().portfolio
        items = [portfolio.debt_items[k] for k in sorted(portfolio.debt_items)]
        rows = analytics.debt_type_distribution(items)
        return {
            "total": len(items),
            "types": [
                {"type": debt_type.value, "count": count, "pct": pct}
                for debt_type, count, pct in rows
            ],
        }

    # -- ratings and agreement ------------------------------------------------

    def list_ratings(self, dimension: str | None = None, rater: str | None = None) -> dict:
        events = self.store.state().effective_ratings()
        docs = []
        for event in events:
            if dimension is not None and event.dimension.value != dimension:
                continue
            if rater is not None and event.rater_id != rater:
                continue
            docs.append(interchange.rating_to_doc(event))
        return {"ratings": docs}

    def add_rating(self, doc: dict, actor: str = "") -> dict:
        payload = dict(doc)
        if not payload.get("timestamp"):
            payload["timestamp"] = datetime.now(timezone.utc).isoformat()
        self.store.append(EventKind.RATING, payload, actor=actor or payload.get("rater_id", ""))
        return {"rating": payload}

    def add_ratings_csv(self, text: str, actor: str = "") -> dict:
        try:
            events = interchange.ratings_from_csv(text)
        except (KeyError, TypeError, ValueError) as exc:
            raise ServiceError("InvalidDocument", f"malformed ratings CSV: {exc}") from exc
        for event in events:
            self.store.append(EventKind.RATING, interchange.rating_to_doc(event), actor=actor)
        return {"recorded": len(events)}

    @staticmethod
    def _dimension(raw: str) -> agreement.Dimension:
        try:
            return agreement.Dimension(raw)
        except ValueError as exc:
            raise ServiceError("InvalidDocument", f"unknown dimension {raw!r}") from exc

    @staticmethod
    def _score_doc(score: agreement.AgreementScore) -> dict:
        return {
            "kappa": score.kappa,
            "method": score.method,
            "n_subjects": score.n_subjects,
            "n_raters": score.n_raters,
            "n_categories": score.n_categories,
            "observed_agreement": score.observed_agreement,
            "expected_agreement": score.expected_agreement,
            "excluded_subjects": score.excluded_subjects,
            "degenerate": score.degenerate,
        }

    def agreement_report(self, dimension: str, raters: list[str] | None = None,
                         pairs: bool = False) -> dict:
        """Agreement scores keyed by rater pair or ``all`` (full panel)."""
        dim = self._dimension(dimension)
        events = self.store.state().effective_ratings()
        report: dict[str, dict] = {}
        if raters:
            if len(raters) != 2:
                raise ServiceError("InvalidDocument", "raters must name exactly two raters")
            pair = (raters[0], raters[1])
            try:
                score = agreement.cohen_kappa(events, dim, pair)
            except agreement.NoCommonSubjects as exc:
                raise ServiceError("NoCommonSubjects", str(exc), status=409) from exc
            report[",".join(sorted(pair))] = self._score_doc(score)
            return {"dimension": dim.value, "scores": report}
        try:
            report["all"] = self._score_doc(agreement.fleiss_kappa(events, dim))
        except agreement.NoCompleteSubjects as exc:
            raise ServiceError("NoCompleteSubjects", str(exc), status=409) from exc
        if pairs:
            for pair, score in agreement.pairwise_scores(events, dim).items():
                key = ",".join(pair)
                report[key] = self._score_doc(score) if score else {"error": "NoCommonSubjects"}
        return {"dimension": dim.value, "scores": report}

    def disagreement_report(self, dimension: str) -> dict:
        dim = self._dimension(dimension)
        events = self.store.state().effective_ratings()
        return {
            "dimension": dim.value,
            "entries": [
                {"value_source_id": d.value_source_id, "ratings": d.ratings, "dissent": d.dissent}
                for d in agreement.disagreements(events, dim)
            ],
        }

    # -- sync ------------------------------------------------------------------

    def sync(self, feed: dict | None = None, config: dict | None = None, actor: str = "") -> dict:
        if feed is None:
            try:
                feed = tracker.fetch_feed(self.tracker_config)
            except tracker.MalformedFeed as exc:
                raise ServiceError("MalformedFeed", str(exc)) from exc
        config_doc = config if config is not None else self.sync_config.to_doc()
        # Compute the report against the pre-append state; the event applies
        # the same reconciliation when folded.
        try:
            result = tracker.sync(
                self.store.state().portfolio.debt_items, feed,
                tracker.SyncConfig.from_doc(config_doc),
            )
        except tracker.MalformedFeed as exc:
            raise ServiceError("MalformedFeed", str(exc)) from exc
        self.store.append(EventKind.SYNC, {"feed": feed, "config": config_doc}, actor=actor)
        report = result.report
        return {
            "imported": report.imported,
            "updated": report.updated,
            "skipped": report.skipped,
            "unmapped_types": sorted(report.unmapped_types),
            "malformed": report.malformed,
        }

    # -- business impact ---------------------------------------------------------

    def list_metrics(self) -> dict:
        portfolio = self.store.state().portfolio
        docs = [interchange.metric_to_doc(portfolio.metrics[k]) for k in sorted(portfolio.metrics)]
        by_horizon: dict[str, list[dict]] = {"immediate": [], "short_term": [], "long_term": []}
        for doc in docs:
            by_horizon[doc["horizon"]].append(doc)
        return {"metrics": docs, "by_horizon": by_horizon}

    def add_metric(self, doc: dict, actor: str = "") -> dict:
        return {"metric": self.upsert_entity("metric", doc, actor=actor)["entity"]}

    # -- introspection -------------------------------------------------------------

    def info(self) -> dict:
        return {"status": "ok", "seq": self.store.last_seq, "digest": self.store.digest()}
