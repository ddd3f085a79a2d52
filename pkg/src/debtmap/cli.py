"""Scriptable front door.

Every command is a thin client over the application core: offline mode
(``--data-dir``) opens the event store directly, server mode (``--server``)
speaks the HTTP API.  Both produce identical documents.  ``--format json``
emits exactly one canonical JSON document on stdout.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import click
import httpx

from debtmap import tracker
from debtmap.interchange import canonical_json, portfolio_from_doc
from debtmap.model import UnlinkedDebt
from debtmap.rules import effective_cells
from debtmap.service.app import ServiceConfig, create_app
from debtmap.service.core import DebtService, ServiceError
from debtmap.store import Store

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONNECTIVITY = 3
EXIT_IO = 4


class BackendError(Exception):
    def __init__(self, code: str, message: str, details=None):
        self.code = code
        self.details = details or []
        super().__init__(message)

    def to_doc(self) -> dict:
        return {"code": self.code, "message": str(self), "details": self.details}


class LocalBackend:
    """Direct calls into the application core over a local data directory."""

    def __init__(self, data_dir: str):
        config = ServiceConfig.from_env()
        self.service = DebtService(
            Store(data_dir), tracker_config=config.tracker, sync_config=config.sync,
        )

    def __getattr__(self, name):
        method = getattr(self.service, name)

        def call(*args, **kwargs):
            try:
                return method(*args, **kwargs)
            except ServiceError as exc:
                raise BackendError(exc.code, str(exc), exc.details) from exc
            except Exception as exc:
                raise BackendError(type(exc).__name__, str(exc), getattr(exc, "details", [])) from exc

        return call


def make_http_client(server: str, token: str | None) -> httpx.Client:
    headers = {"X-Api-Token": token} if token else {}
    return httpx.Client(base_url=server, headers=headers, timeout=30.0)


class HttpBackend:
    """The same operations via the HTTP API."""

    def __init__(self, server: str, token: str | None = None, client: httpx.Client | None = None):
        self.client = client or make_http_client(server, token)

    def _call(self, method: str, path: str, params: dict | None = None, body: dict | None = None) -> dict:
        params = {k: v for k, v in (params or {}).items() if v is not None}
        response = self.client.request(method, path, params=params, json=body)
        if response.status_code >= 400:
            try:
                doc = response.json()
            except ValueError:
                doc = {"code": f"HTTP{response.status_code}", "message": response.text, "details": []}
            raise BackendError(doc.get("code", "Error"), doc.get("message", ""), doc.get("details"))
        return response.json()

    def get_portfolio(self):
        return self._call("GET", "/portfolio")

    def put_portfolio(self, doc):
        return self._call("PUT", "/portfolio", body=doc)

    def validate(self):
        return self._call("GET", "/portfolio/violations")

    def list_debt(self, unpaid=None, needs_linking=None):
        return self._call("GET", "/debt", params={"unpaid": unpaid, "needs_linking": needs_linking})

    def add_debt(self, doc):
        return self._call("POST", "/debt", body=doc)

    def get_debt(self, item_id):
        return self._call("GET", f"/debt/{item_id}")

    def pay_debt(self, item_id, paid_date=None):
        return self._call("POST", f"/debt/{item_id}/pay", body={"paid_date": paid_date})

    def list_rules(self):
        return self._call("GET", "/rules")

    def add_rule(self, doc, activate=False):
        return self._call("POST", "/rules", body={**doc, "activate": activate})

    def activate_rule(self, rule_id):
        return self._call("POST", "/rules/active", body={"rule_id": rule_id})

    def compare_rules(self, rule_ids=None):
        return self._call("GET", "/rules/compare", params={"ids": ",".join(rule_ids) if rule_ids else None})

    def decompose_rules(self, rule_ids=None):
        return self._call("GET", "/rules/decompose", params={"ids": ",".join(rule_ids) if rule_ids else None})

    def backlog(self, rule_id=None, include_paid=False):
        return self._call("GET", "/backlog", params={"rule": rule_id, "include_paid": include_paid})

    def what_if(self, candidate=None, rule_id=None, as_of=None):
        return self._call("POST", "/whatif", body={"rule": candidate, "rule_id": rule_id, "as_of": as_of})

    def analytics_crosstab(self, rule_id=None):
        return self._call("GET", "/analytics/crosstab", params={"rule": rule_id})

    def analytics_payments(self, rule_id=None, start=None, end=None):
        return self._call("GET", "/analytics/payments", params={"rule": rule_id, "start": start, "end": end})

    def analytics_series(self, rule_id=None, start=None, end=None, split=None):
        return self._call("GET", "/analytics/series",
                          params={"rule": rule_id, "start": start, "end": end, "split": split})

    def analytics_effort(self, rule_id=None, start=None, end=None):
        return self._call("GET", "/analytics/effort", params={"rule": rule_id, "start": start, "end": end})

    def analytics_types(self):
        return self._call("GET", "/analytics/types")

    def list_ratings(self, dimension=None, rater=None):
        return self._call("GET", "/ratings", params={"dimension": dimension, "rater": rater})

    def add_rating(self, doc):
        return self._call("POST", "/ratings", body=doc)

    def add_ratings_csv(self, text):
        return self._call("POST", "/ratings/csv", body={"csv": text})

    def agreement_report(self, dimension, raters=None, pairs=False):
        return self._call("GET", "/agreement",
                          params={"dimension": dimension, "raters": ",".join(raters) if raters else None,
                                  "pairs": pairs})

    def disagreement_report(self, dimension):
        return self._call("GET", "/disagreements", params={"dimension": dimension})

    def sync(self, feed=None, config=None):
        return self._call("POST", "/sync", body={"feed": feed, "config": config})

    def list_metrics(self):
        return self._call("GET", "/metrics")

    def add_metric(self, doc):
        return self._call("POST", "/metrics", body=doc)

    def info(self):
        return self._call("GET", "/healthz")


def get_backend(ctx: click.Context):
    options = ctx.obj
    if options["server"]:
        return HttpBackend(options["server"], options["token"])
    if options["data_dir"]:
        return LocalBackend(options["data_dir"])
    raise click.UsageError("need --data-dir for offline mode or --server for server mode")


def render_table(headers: list[str], rows: list[list]) -> str:
    cells = [[str(value) for value in row] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in cells)) if cells else len(h) for i, h in enumerate(headers)]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
        "  ".join("-" * widths[i] for i in range(len(headers))),
    ]
    for row in cells:
        lines.append("  ".join(row[i].ljust(widths[i]) for i in range(len(headers))))
    return "\n".join(lines)


def render_csv(headers: list[str], rows: list[list]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(headers)
    writer.writerows(rows)
    return buffer.getvalue().rstrip("\n")


def emit(ctx: click.Context, doc: dict, tabular: tuple[list[str], list[list]] | None = None) -> None:
    fmt = ctx.obj["format"]
    if fmt == "json" or tabular is None and fmt != "table":
        click.echo(canonical_json(doc))
    elif fmt == "csv" and tabular is not None:
        click.echo(render_csv(*tabular))
    elif tabular is not None:
        click.echo(render_table(*tabular))
    else:
        click.echo(canonical_json(doc))


def run(ctx: click.Context, action):
    try:
        return action()
    except BackendError as exc:
        click.echo(canonical_json(exc.to_doc()), err=True)
        ctx.exit(EXIT_ERROR)
    except httpx.TransportError as exc:
        click.echo(f"cannot reach server: {exc}", err=True)
        ctx.exit(EXIT_CONNECTIVITY)
    except OSError as exc:
        click.echo(f"io error: {exc}", err=True)
        ctx.exit(EXIT_IO)


def read_json_file(ctx: click.Context, path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        click.echo(f"{path}: not valid JSON: {exc}", err=True)
        ctx.exit(EXIT_ERROR)
    except OSError as exc:
        click.echo(f"io error: {exc}", err=True)
        ctx.exit(EXIT_IO)


@click.group()
@click.option("--data-dir", envvar="DEBTMAP_DATA_DIR", type=click.Path(), help="Offline mode: event store directory.")
@click.option("--server", envvar="DEBTMAP_SERVER", help="Server mode: base URL of a running service.")
@click.option("--token", envvar="DEBTMAP_API_TOKEN", help="API token for server mode.")
@click.option("--format", "output_format", type=click.Choice(["table", "json", "csv"]), default="table")
@click.pass_context
def main(ctx, data_dir, server, token, output_format):
    """Prioritize technical debt by business impact."""
    ctx.obj = {"data_dir": data_dir, "server": server, "token": token, "format": output_format}


@main.command()
@click.argument("workshop_file", type=click.Path(exists=True))
@click.pass_context
def onboard(ctx, workshop_file):
    """Load a workshop portfolio document, link and validate it.

    For each debt item the onboarding loop checks: its CI is registered,
    the CI reaches an IT asset, and the item is linked to a value source.
    Exits nonzero when any violation remains.
    """
    doc = read_json_file(ctx, workshop_file)
    backend = get_backend(ctx)

    def action():
        report = backend.put_portfolio(doc)
        portfolio = portfolio_from_doc(backend.get_portfolio())
        unlinked = []
        for item_id in sorted(portfolio.debt_items):
            try:
                effective_cells(portfolio.debt_items[item_id], portfolio)
            except UnlinkedDebt as exc:
                unlinked.append({"id": item_id, "code": "UnlinkedDebt", "message": str(exc)})
        result = {
            "counts": report.get("counts", {}),
            "violations": report.get("violations", []),
            "unlinked": unlinked,
            "valid": report.get("valid", False) and not unlinked,
        }
        rows = [[v["code"], v.get("entity_id", v.get("id", "")), v["message"]]
                for v in result["violations"]]
        rows += [[u["code"], u["id"], u["message"]] for u in unlinked]
        emit(ctx, result, (["code", "entity", "message"], rows))
        if not result["valid"]:
            ctx.exit(EXIT_ERROR)

    run(ctx, action)


def _splice_entity(backend, section: str, doc: dict) -> dict:
    portfolio = backend.get_portfolio()
    entries = [entry for entry in portfolio.get(section, []) if entry["id"] != doc["id"]]
    entries.append(doc)
    portfolio[section] = entries
    return backend.put_portfolio(portfolio)


@main.group()
def ci():
    """Configuration items."""


@ci.command("add")
@click.option("--id", "ci_id", required=True)
@click.option("--name", default="")
@click.option("--state", type=click.Choice(["operational", "to_be", "legacy"]), required=True)
@click.option("--parent", "parents", multiple=True)
@click.option("--depends-on", "depends", multiple=True)
@click.pass_context
def ci_add(ctx, ci_id, name, state, parents, depends):
    backend = get_backend(ctx)
    doc = {"id": ci_id, "name": name or ci_id, "state": state,
           "parent_ids": sorted(parents), "depends_on": sorted(depends)}
    run(ctx, lambda: emit(ctx, _splice_entity(backend, "configuration_items", doc)))


@main.group()
def asset():
    """IT assets."""


@asset.command("add")
@click.option("--id", "asset_id", required=True)
@click.option("--name", default="")
@click.option("--state", type=click.Choice(["operational", "to_be", "legacy"]), required=True)
@click.option("--ci", "cis", multiple=True)
@click.pass_context
def asset_add(ctx, asset_id, name, state, cis):
    backend = get_backend(ctx)
    doc = {"id": asset_id, "name": name or asset_id, "state": state, "ci_ids": sorted(cis)}
    run(ctx, lambda: emit(ctx, _splice_entity(backend, "it_assets", doc)))


@main.group()
def vs():
    """Value sources."""


@vs.command("add")
@click.option("--id", "vs_id", required=True)
@click.option("--name", default="")
@click.option("--value", "business_value", type=click.Choice(["core", "other"]), required=True)
@click.option("--usage", type=click.Choice(["high", "low"]), required=True)
@click.option("--asset", "assets", multiple=True)
@click.pass_context
def vs_add(ctx, vs_id, name, business_value, usage, assets):
    backend = get_backend(ctx)
    doc = {"id": vs_id, "name": name or vs_id, "business_value": business_value,
           "usage": usage, "asset_ids": sorted(assets)}
    run(ctx, lambda: emit(ctx, _splice_entity(backend, "value_sources", doc)))


@vs.command("classify")
@click.argument("vs_id")
@click.option("--value", "business_value", type=click.Choice(["core", "other"]))
@click.option("--usage", type=click.Choice(["high", "low"]))
@click.option("--rater", help="Also record a rating event for this rater.")
@click.option("--timestamp", help="RFC-3339 timestamp for the rating event.")
@click.pass_context
def vs_classify(ctx, vs_id, business_value, usage, rater, timestamp):
    """Reclassify a value source; optionally record who said so."""
    if business_value is None and usage is None:
        raise click.UsageError("nothing to change: give --value and/or --usage")
    backend = get_backend(ctx)

    def action():
        portfolio = backend.get_portfolio()
        target = next((entry for entry in portfolio["value_sources"] if entry["id"] == vs_id), None)
        if target is None:
            raise BackendError("NotFound", f"unknown value source {vs_id!r}")
        if business_value:
            target["business_value"] = business_value
        if usage:
            target["usage"] = usage
        report = backend.put_portfolio(portfolio)
        if rater:
            for dimension, category in (("business_value", business_value), ("usage", usage)):
                if category:
                    backend.add_rating({
                        "rater_id": rater, "value_source_id": vs_id,
                        "dimension": dimension, "category": category,
                        "timestamp": timestamp,
                    })
        emit(ctx, {"value_source": target, "violations": report.get("violations", [])})

    run(ctx, action)


@main.group()
def debt():
    """Technical debt items."""


@debt.command("add")
@click.option("--id", "item_id", required=True)
@click.option("--name", default="")
@click.option("--description", default="")
@click.option("--created", "created_date", required=True, help="Identification date (YYYY-MM-DD).")
@click.option("--type", "debt_type", required=True)
@click.option("--priority", "technical_priority", type=click.Choice(["high", "medium", "low"]), default="medium")
@click.option("--effort", "technical_effort", type=click.Choice(["high", "medium", "low"]), default="medium")
@click.option("--ci", "ci_id", default=None)
@click.option("--vs", "vs_ids", multiple=True)
@click.option("--tag", "tags", multiple=True, help="Free-form business factor tags.")
@click.pass_context
def debt_add(ctx, item_id, name, description, created_date, debt_type,
             technical_priority, technical_effort, ci_id, vs_ids, tags):
    backend = get_backend(ctx)
    doc = {
        "id": item_id, "name": name or item_id, "description": description,
        "created_date": created_date, "debt_type": debt_type,
        "technical_priority": technical_priority, "technical_effort": technical_effort,
        "ci_id": ci_id, "value_source_ids": sorted(vs_ids), "factor_tags": sorted(tags),
    }
    run(ctx, lambda: emit(ctx, backend.add_debt(doc)))


@debt.command("list")
@click.option("--all", "show_all", is_flag=True, help="Include paid items.")
@click.option("--needs-linking", is_flag=True)
@click.pass_context
def debt_list(ctx, show_all, needs_linking):
    backend = get_backend(ctx)

    def action():
        doc = backend.list_debt(unpaid=None if show_all else True,
                                needs_linking=True if needs_linking else None)
        rows = [[i["id"], i["name"], i["debt_type"], i["created_date"],
                 i["paid_date"] or "", i["ci_id"] or ""] for i in doc["items"]]
        emit(ctx, doc, (["id", "name", "type", "created", "paid", "ci"], rows))

    run(ctx, action)


@debt.command("pay")
@click.argument("item_id")
@click.option("--date", "paid_date", default=None, help="Payment date, default today.")
@click.pass_context
def debt_pay(ctx, item_id, paid_date):
    backend = get_backend(ctx)
    run(ctx, lambda: emit(ctx, backend.pay_debt(item_id, paid_date)))


@debt.command("link")
@click.argument("item_id")
@click.option("--ci", "ci_id", default=None)
@click.option("--vs", "vs_ids", multiple=True)
@click.pass_context
def debt_link(ctx, item_id, ci_id, vs_ids):
    """Complete the CI / value-source links of an imported item."""
    backend = get_backend(ctx)

    def action():
        item = backend.get_debt(item_id)["item"]
        if ci_id:
            item["ci_id"] = ci_id
        if vs_ids:
            item["value_source_ids"] = sorted(set(item["value_source_ids"]) | set(vs_ids))
        emit(ctx, backend.add_debt(item))

    run(ctx, action)


@main.group()
def rule():
    """Priority rules."""


@rule.command("add")
@click.argument("rule_file", type=click.Path(exists=True))
@click.option("--id", "rule_id", default=None)
@click.option("--name", default=None)
@click.option("--author", default=None)
@click.option("--activate", is_flag=True)
@click.pass_context
def rule_add(ctx, rule_file, rule_id, name, author, activate):
    """Create a rule from a JSON file (full document or bare cell map)."""
    doc = read_json_file(ctx, rule_file)
    if "cells" not in doc:
        doc = {"cells": doc}
    if rule_id:
        doc["id"] = rule_id
    if name:
        doc["name"] = name
    if author:
        doc["author"] = author
    doc.setdefault("id", Path(rule_file).stem)
    doc.setdefault("name", doc["id"])
    backend = get_backend(ctx)
    run(ctx, lambda: emit(ctx, backend.add_rule(doc, activate=activate)))


@rule.command("activate")
@click.argument("rule_id")
@click.pass_context
def rule_activate(ctx, rule_id):
    backend = get_backend(ctx)
    run(ctx, lambda: emit(ctx, backend.activate_rule(rule_id)))


@rule.command("list")
@click.pass_context
def rule_list(ctx):
    backend = get_backend(ctx)

    def action():
        doc = backend.list_rules()
        rows = [[r["id"], r["name"], r["author"],
                 "active" if r["id"] == doc["active_rule_id"] else ""] for r in doc["rules"]]
        emit(ctx, doc, (["id", "name", "author", ""], rows))

    run(ctx, action)


@rule.command("compare")
@click.argument("rule_ids", nargs=-1)
@click.pass_context
def rule_compare(ctx, rule_ids):
    backend = get_backend(ctx)

    def action():
        doc = backend.compare_rules(list(rule_ids) or None)
        headers = ["cell", *doc["rule_ids"], "unanimous"]
        rows = [[row["cell"], *[row["ranks"][rid] for rid in doc["rule_ids"]],
                 "yes" if row["unanimous"] else ""] for row in doc["cells"]]
        emit(ctx, doc, (headers, rows))

    run(ctx, action)


@rule.command("whatif")
@click.argument("rule_file", type=click.Path(exists=True), required=False)
@click.option("--rule-id", default=None, help="Evaluate a stored rule instead of a file.")
@click.option("--as-of", type=int, default=None, help="Evaluate against a historical sequence number.")
@click.pass_context
def rule_whatif(ctx, rule_file, rule_id, as_of):
    """Rank the backlog under a candidate rule; nothing is persisted."""
    if rule_file is None and rule_id is None:
        raise click.UsageError("give a rule file or --rule-id")
    candidate = None
    if rule_file is not None:
        candidate = read_json_file(ctx, rule_file)
        if "cells" not in candidate:
            candidate = {"cells": candidate}
        candidate.setdefault("id", Path(rule_file).stem)
        candidate.setdefault("name", candidate["id"])
    backend = get_backend(ctx)

    def action():
        doc = backend.what_if(candidate=candidate, rule_id=rule_id, as_of=as_of)
        rows = [[d["id"], d["rank_before"], d["rank_after"], d["rank_change"],
                 d["bucket_before"], d["bucket_after"]] for d in doc["diff"]]
        emit(ctx, doc, (["id", "before", "after", "change", "bucket before", "bucket after"], rows))

    run(ctx, action)


@main.command()
@click.option("--rater", "rater_id")
@click.option("--vs", "value_source_id")
@click.option("--dimension", type=click.Choice(["business_value", "usage"]))
@click.option("--category")
@click.option("--timestamp", default=None)
@click.option("--csv", "csv_file", type=click.Path(exists=True), help="Bulk-load a ratings CSV.")
@click.pass_context
def rate(ctx, rater_id, value_source_id, dimension, category, timestamp, csv_file):
    """Record rating events (single, or bulk from CSV)."""
    backend = get_backend(ctx)
    if csv_file:
        def action():
            text = Path(csv_file).read_text(encoding="utf-8")
            emit(ctx, backend.add_ratings_csv(text))
    else:
        if not all([rater_id, value_source_id, dimension, category]):
            raise click.UsageError("need --rater, --vs, --dimension and --category (or --csv)")

        def action():
            emit(ctx, backend.add_rating({
                "rater_id": rater_id, "value_source_id": value_source_id,
                "dimension": dimension, "category": category, "timestamp": timestamp,
            }))
    run(ctx, action)


@main.command()
@click.option("--dimension", type=click.Choice(["business_value", "usage"]), required=True)
@click.option("--raters", default=None, help="Two rater ids, comma separated.")
@click.option("--pairs", is_flag=True, help="Include every rater pair.")
@click.pass_context
def agreement(ctx, dimension, raters, pairs):
    """Kappa agreement scores (two-rater or full panel)."""
    backend = get_backend(ctx)

    def action():
        doc = backend.agreement_report(dimension, raters=raters.split(",") if raters else None, pairs=pairs)
        rows = [
            [key, f"{score.get('kappa', ''):.4f}" if "kappa" in score else score.get("error", ""),
             score.get("method", ""), score.get("n_subjects", ""), score.get("excluded_subjects", "")]
            for key, score in sorted(doc["scores"].items())
        ]
        emit(ctx, doc, (["raters", "kappa", "method", "subjects", "excluded"], rows))

    run(ctx, action)


@main.command()
@click.option("--dimension", type=click.Choice(["business_value", "usage"]), required=True)
@click.pass_context
def disagreements(ctx, dimension):
    """Value sources whose raters disagree, most contested first."""
    backend = get_backend(ctx)

    def action():
        doc = backend.disagreement_report(dimension)
        rows = [[e["value_source_id"], e["dissent"],
                 ", ".join(f"{r}={c}" for r, c in sorted(e["ratings"].items()))]
                for e in doc["entries"]]
        emit(ctx, doc, (["value source", "dissent", "ratings"], rows))

    run(ctx, action)


def _load_sync_config(ctx, type_map_file):
    if not type_map_file:
        return None
    return read_json_file(ctx, type_map_file)


@main.command("import")
@click.argument("feed_file", type=click.Path(exists=True))
@click.option("--type-map", "type_map_file", type=click.Path(exists=True), default=None)
@click.pass_context
def import_cmd(ctx, feed_file, type_map_file):
    """Import technical-debt-flagged issues from a tracker feed file."""
    feed = read_json_file(ctx, feed_file)
    config = _load_sync_config(ctx, type_map_file)
    backend = get_backend(ctx)
    run(ctx, lambda: emit(ctx, backend.sync(feed=feed, config=config)))


@main.command()
@click.argument("feed_file", type=click.Path(exists=True), required=False)
@click.option("--type-map", "type_map_file", type=click.Path(exists=True), default=None)
@click.pass_context
def sync(ctx, feed_file, type_map_file):
    """Reconcile with the tracker (feed file, or the configured endpoint)."""
    feed = read_json_file(ctx, feed_file) if feed_file else None
    config = _load_sync_config(ctx, type_map_file)
    backend = get_backend(ctx)
    run(ctx, lambda: emit(ctx, backend.sync(feed=feed, config=config)))


@main.command()
@click.option("--rule", "rule_id", default=None)
@click.option("--include-paid", is_flag=True)
@click.pass_context
def backlog(ctx, rule_id, include_paid):
    """The prioritized backlog under the active (or given) rule."""
    backend = get_backend(ctx)

    def action():
        doc = backend.backlog(rule_id=rule_id, include_paid=include_paid)
        rows = [[e["rank"], e["bucket"], e["id"], e["name"], e["created_date"]] for e in doc["entries"]]
        emit(ctx, doc, (["rank", "bucket", "id", "name", "created"], rows))

    run(ctx, action)


@main.command()
@click.argument("kind", type=click.Choice(["crosstab", "payments", "series", "effort", "types", "decompose"]))
@click.option("--rule", "rule_id", default=None)
@click.option("--start", default=None)
@click.option("--end", default=None)
@click.option("--split", default=None, help="Period split date for series.")
@click.option("--rules", "rule_ids", default=None, help="Rule ids for decompose, comma separated.")
@click.pass_context
def report(ctx, kind, rule_id, start, end, split, rule_ids):
    """Analytics tables: crosstab, payments, series, effort, types, decompose."""
    backend = get_backend(ctx)

    def action():
        if kind == "crosstab":
            doc = backend.analytics_crosstab(rule_id=rule_id)
            headers = ["group", "total", *doc["columns"], *[f"pct_{c}" for c in doc["columns"]]]
            rows = [[r["group"], r["total"], *[r["counts"][c] for c in doc["columns"]],
                     *[r["percentages"][c] for c in doc["columns"]]] for r in doc["rows"]]
        elif kind == "payments":
            doc = backend.analytics_payments(rule_id=rule_id, start=start, end=end)
            headers = ["group", "open_start", "identified", "paid", "open_end", "pct_paid"]
            rows = [[g["group"], g["open_start"], g["identified"], g["paid"], g["open_end"],
                     g["pct_paid_display"]] for g in doc["groups"]]
        elif kind == "series":
            doc = backend.analytics_series(rule_id=rule_id, start=start, end=end, split=split)
            headers = ["group", "date", "open"]
            rows = [[s["group"], p["date"], p["open"]] for s in doc["series"] for p in s["points"]]
        elif kind == "effort":
            doc = backend.analytics_effort(rule_id=rule_id, start=start, end=end)
            headers = ["group", "total", *doc["columns"], *[f"pct_{c}" for c in doc["columns"]]]
            rows = [[r["group"], r["total"], *[r["counts"][c] for c in doc["columns"]],
                     *[r["percentages"][c] for c in doc["columns"]]] for r in doc["rows"]]
        elif kind == "types":
            doc = backend.analytics_types()
            headers = ["type", "count", "pct"]
            rows = [[t["type"], t["count"], t["pct"]] for t in doc["types"]]
        else:
            doc = backend.decompose_rules(rule_ids.split(",") if rule_ids else None)
            headers = ["band", "variable", "pct"]
            rows = [[band, variable, pct]
                    for band, table in doc["bands"].items()
                    for variable, pct in table.items()]
        emit(ctx, doc, (headers, rows))

    run(ctx, action)


@main.command()
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.pass_context
def serve(ctx, host, port):
    """Run the HTTP service (uses --data-dir or DEBTMAP_DATA_DIR)."""
    import uvicorn

    config = ServiceConfig.from_env()
    if ctx.obj["data_dir"]:
        config.data_dir = ctx.obj["data_dir"]
    if host:
        config.host = host
    if port:
        config.port = port
    if config.data_dir is None:
        raise click.UsageError("need --data-dir or DEBTMAP_DATA_DIR to serve")
    uvicorn.run(create_app(config), host=config.host, port=config.port)


if __name__ == "__main__":
    main()
