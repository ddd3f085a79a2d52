"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from pydantic import BaseModel, Field

from debtmap.agreement import Dimension
from debtmap.model import BusinessValue, DebtType, Horizon, Level, LifecycleState, TargetKind, Usage


class ConfigurationItemModel(BaseModel):
    id: str
    name: str = ""
    state: LifecycleState
    parent_ids: list[str] = Field(default_factory=list)
    depends_on: list[str] = Field(default_factory=list)


class ITAssetModel(BaseModel):
    id: str
    name: str = ""
    state: LifecycleState
    ci_ids: list[str] = Field(default_factory=list)


class ValueSourceModel(BaseModel):
    id: str
    name: str = ""
    business_value: BusinessValue
    usage: Usage
    asset_ids: list[str] = Field(default_factory=list)


class DebtItemModel(BaseModel):
    id: str
    name: str = ""
    description: str = ""
    created_date: str
    paid_date: str | None = None
    paid_date_manual: bool = False
    debt_type: DebtType
    technical_priority: Level = Level.MEDIUM
    technical_effort: Level = Level.MEDIUM
    ci_id: str | None = None
    value_source_ids: list[str] = Field(default_factory=list)
    tracker_issue_id: str | None = None
    factor_tags: list[str] = Field(default_factory=list)


class MetricModel(BaseModel):
    id: str
    name: str = ""
    target_kind: TargetKind
    target_id: str
    horizon: Horizon
    description: str = ""


class PortfolioModel(BaseModel):
    configuration_items: list[ConfigurationItemModel] = Field(default_factory=list)
    it_assets: list[ITAssetModel] = Field(default_factory=list)
    value_sources: list[ValueSourceModel] = Field(default_factory=list)
    debt_items: list[DebtItemModel] = Field(default_factory=list)
    metrics: list[MetricModel] = Field(default_factory=list)


class ViolationModel(BaseModel):
    code: str
    entity_id: str
    message: str


class ValidationReport(BaseModel):
    violations: list[ViolationModel]
    valid: bool
    events: int | None = None
    counts: dict[str, int] | None = None


class PayRequest(BaseModel):
    paid_date: str | None = None


class RuleModel(BaseModel):
    id: str
    name: str = ""
    author: str = ""
    created_date: str | None = None
    cells: dict[str, int]


class RuleCreateRequest(RuleModel):
    activate: bool = False


class ActivateRequest(BaseModel):
    rule_id: str


class WhatIfRequest(BaseModel):
    rule: RuleModel | None = None
    rule_id: str | None = None
    as_of: int | None = None


class RatingRequest(BaseModel):
    rater_id: str
    value_source_id: str
    dimension: Dimension
    category: str
    timestamp: str | None = None


class RatingsCsvRequest(BaseModel):
    csv: str


class SyncRequest(BaseModel):
    feed: dict | None = None
    config: dict | None = None


class SyncReportModel(BaseModel):
    imported: int
    updated: int
    skipped: int
    unmapped_types: list[str]
    malformed: int


class AgreementScoreModel(BaseModel):
    kappa: float
    method: str
    n_subjects: int
    n_raters: int
    n_categories: int
    observed_agreement: float
    expected_agreement: float
    excluded_subjects: int
    degenerate: bool


class BacklogEntryModel(BaseModel):
    id: str
    name: str
    rank: int
    bucket: str
    created_date: str
    paid_date: str | None
    debt_type: str
    technical_priority: str
    technical_effort: str


class UnlinkedModel(BaseModel):
    id: str
    message: str


class BacklogResponse(BaseModel):
    rule_id: str
    entries: list[BacklogEntryModel]
    unlinked: list[UnlinkedModel]


class WhatIfResponse(BaseModel):
    candidate_rule_id: str
    active_rule_id: str
    as_of: int
    backlog: list[BacklogEntryModel]
    diff: list[dict]
    unlinked: list[UnlinkedModel]


class ErrorModel(BaseModel):
    code: str
    message: str
    details: list | dict = Field(default_factory=list)
