"""FastAPI wiring: routes are thin adapters over the application core."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import Depends, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from debtmap import tracker
from debtmap.analytics import EmptyRange, InsufficientPoints
from debtmap.model import UnlinkedDebt
from debtmap.rules import RankOutOfRange
from debtmap.service import schemas
from debtmap.service.core import DebtService, ServiceError
from debtmap.store import OutOfRange, StorageFailed, Store, ValidationFailed


@dataclass
class ServiceConfig:
    data_dir: str | None = None
    host: str = "127.0.0.1"
    port: int = 8402
    api_token: str | None = None
    static_dir: str | None = None
    sync: tracker.SyncConfig = field(default_factory=tracker.SyncConfig)
    tracker: tracker.TrackerConfig = field(default_factory=tracker.TrackerConfig)

    @classmethod
    def from_env(cls, environ: dict[str, str] | None = None) -> "ServiceConfig":
        env = os.environ if environ is None else environ
        config = cls(
            data_dir=env.get("DEBTMAP_DATA_DIR") or None,
            host=env.get("DEBTMAP_HOST", "127.0.0.1"),
            port=int(env.get("DEBTMAP_PORT", "8402")),
            api_token=env.get("DEBTMAP_API_TOKEN") or None,
            static_dir=env.get("DEBTMAP_STATIC_DIR") or None,
            tracker=tracker.TrackerConfig.from_env(env),
        )
        config_file = env.get("DEBTMAP_CONFIG")
        if config_file:
            doc = json.loads(Path(config_file).read_text(encoding="utf-8"))
            config.data_dir = doc.get("data_dir", config.data_dir)
            config.host = doc.get("host", config.host)
            config.port = int(doc.get("port", config.port))
            config.api_token = doc.get("api_token", config.api_token)
            config.static_dir = doc.get("static_dir", config.static_dir)
            if doc.get("tracker_url"):
                config.tracker = tracker.TrackerConfig(
                    url=doc["tracker_url"],
                    api_key=doc.get("tracker_api_key"),
                    poll_seconds=int(doc.get("tracker_poll_seconds", 300)),
                )
            config.sync = tracker.SyncConfig.from_doc(doc)
        return config


_ERROR_STATUS = {
    ValidationFailed: (400, "ValidationFailed"),
    StorageFailed: (500, "StorageFailed"),
    OutOfRange: (404, "OutOfRange"),
    EmptyRange: (400, "EmptyRange"),
    InsufficientPoints: (400, "InsufficientPoints"),
    RankOutOfRange: (400, "RankOutOfRange"),
    UnlinkedDebt: (400, "UnlinkedDebt"),
    tracker.MalformedFeed: (400, "MalformedFeed"),
    KeyError: (404, "NotFound"),
}


def create_app(config: ServiceConfig | None = None, store: Store | None = None) -> FastAPI:
    config = config or ServiceConfig.from_env()
    store = store or Store(config.data_dir)
    service = DebtService(store, tracker_config=config.tracker, sync_config=config.sync)

    app = FastAPI(title="debtmap", version="0.1.0")
    app.state.service = service
    app.state.config = config

    def require_token(request: Request) -> None:
        if config.api_token and request.url.path != "/healthz":
            if request.headers.get("X-Api-Token") != config.api_token:
                raise ServiceError("Unauthorized", "missing or wrong API token", status=401)

    guard = [Depends(require_token)]

    @app.exception_handler(ServiceError)
    async def service_error_handler(request: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status, content=exc.to_doc())

    @app.exception_handler(RequestValidationError)
    async def request_validation_handler(request: Request, exc: RequestValidationError):
        details = [
            {"loc": list(map(str, err.get("loc", []))), "message": err.get("msg", "")}
            for err in exc.errors()
        ]
        return JSONResponse(
            status_code=422,
            content={"code": "InvalidDocument", "message": "request body failed validation",
                     "details": details},
        )

    for exc_type, (status, code) in _ERROR_STATUS.items():
        def make_handler(status=status, code=code):
            async def handler(request: Request, exc: Exception):
                details = getattr(exc, "details", [])
                return JSONResponse(
                    status_code=status,
                    content={"code": code, "message": str(exc), "details": details},
                )
            return handler
        app.add_exception_handler(exc_type, make_handler())

    @app.get("/healthz")
    def healthz():
        return service.info()

    # -- portfolio --

    @app.get("/portfolio", dependencies=guard, response_model=schemas.PortfolioModel)
    def get_portfolio():
        return service.get_portfolio()

    @app.put("/portfolio", dependencies=guard, response_model=schemas.ValidationReport)
    def put_portfolio(doc: schemas.PortfolioModel):
        return service.put_portfolio(doc.model_dump())

    @app.get("/portfolio/violations", dependencies=guard, response_model=schemas.ValidationReport)
    def get_violations():
        return service.validate()

    # -- debt --

    @app.get("/debt", dependencies=guard)
    def list_debt(unpaid: bool | None = None, needs_linking: bool | None = None):
        return service.list_debt(unpaid=unpaid, needs_linking=needs_linking)

    @app.post("/debt", dependencies=guard, status_code=201)
    def add_debt(doc: schemas.DebtItemModel):
        return service.add_debt(doc.model_dump())

    @app.get("/debt/{item_id}", dependencies=guard)
    def get_debt(item_id: str):
        return service.get_debt(item_id)

    @app.post("/debt/{item_id}/pay", dependencies=guard)
    def pay_debt(item_id: str, body: schemas.PayRequest | None = None):
        paid_date = body.paid_date if body else None
        return service.pay_debt(item_id, paid_date)

    # -- rules --

    @app.get("/rules", dependencies=guard)
    def list_rules():
        return service.list_rules()

    @app.post("/rules", dependencies=guard, status_code=201)
    def add_rule(body: schemas.RuleCreateRequest):
        doc = body.model_dump(exclude={"activate"})
        return service.add_rule(doc, activate=body.activate)

    @app.post("/rules/active", dependencies=guard)
    def activate_rule(body: schemas.ActivateRequest):
        return service.activate_rule(body.rule_id)

    @app.get("/rules/compare", dependencies=guard)
    def compare_rules(ids: str | None = None):
        rule_ids = ids.split(",") if ids else None
        return service.compare_rules(rule_ids)

    @app.get("/rules/decompose", dependencies=guard)
    def decompose_rules(ids: str | None = None):
        rule_ids = ids.split(",") if ids else None
        return service.decompose_rules(rule_ids)

    # -- backlog / what-if --

    @app.get("/backlog", dependencies=guard, response_model=schemas.BacklogResponse)
    def backlog(rule: str | None = None, include_paid: bool = False):
        return service.backlog(rule_id=rule, include_paid=include_paid)

    @app.post("/whatif", dependencies=guard, response_model=schemas.WhatIfResponse)
    def what_if(body: schemas.WhatIfRequest):
        candidate = body.rule.model_dump() if body.rule else None
        return service.what_if(candidate=candidate, rule_id=body.rule_id, as_of=body.as_of)

    # -- analytics --

    @app.get("/analytics/crosstab", dependencies=guard)
    def analytics_crosstab(rule: str | None = None):
        return service.analytics_crosstab(rule_id=rule)

    @app.get("/analytics/payments", dependencies=guard)
    def analytics_payments(rule: str | None = None, start: str | None = None, end: str | None = None):
        return service.analytics_payments(rule_id=rule, start=start, end=end)

    @app.get("/analytics/series", dependencies=guard)
    def analytics_series(rule: str | None = None, start: str | None = None,
                         end: str | None = None, split: str | None = None):
        return service.analytics_series(rule_id=rule, start=start, end=end, split=split)

    @app.get("/analytics/effort", dependencies=guard)
    def analytics_effort(rule: str | None = None, start: str | None = None, end: str | None = None):
        return service.analytics_effort(rule_id=rule, start=start, end=end)

    @app.get("/analytics/types", dependencies=guard)
    def analytics_types():
        return service.analytics_types()

    # -- ratings / agreement --

    @app.get("/ratings", dependencies=guard)
    def list_ratings(dimension: str | None = None, rater: str | None = None):
        return service.list_ratings(dimension=dimension, rater=rater)

    @app.post("/ratings", dependencies=guard, status_code=201)
    def add_rating(body: schemas.RatingRequest):
        return service.add_rating(body.model_dump())

    @app.post("/ratings/csv", dependencies=guard, status_code=201)
    def add_ratings_csv(body: schemas.RatingsCsvRequest):
        return service.add_ratings_csv(body.csv)

    @app.get("/agreement", dependencies=guard)
    def agreement_report(dimension: str, raters: str | None = None, pairs: bool = False):
        rater_list = raters.split(",") if raters else None
        return service.agreement_report(dimension, raters=rater_list, pairs=pairs)

    @app.get("/disagreements", dependencies=guard)
    def disagreement_report(dimension: str):
        return service.disagreement_report(dimension)

    # -- sync --

    @app.post("/sync", dependencies=guard, response_model=schemas.SyncReportModel)
    def sync(body: schemas.SyncRequest | None = None):
        feed = body.feed if body else None
        config_doc = body.config if body else None
        return service.sync(feed=feed, config=config_doc)

    # -- business impact --

    @app.get("/metrics", dependencies=guard)
    def list_metrics():
        return service.list_metrics()

    @app.post("/metrics", dependencies=guard, status_code=201)
    def add_metric(body: schemas.MetricModel):
        return service.add_metric(body.model_dump())

    static_dir = config.static_dir
    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
