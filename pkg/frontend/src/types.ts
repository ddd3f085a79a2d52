/** Wire-format types for the debtmap HTTP API. */

export type AssetState = "operational" | "to_be" | "legacy";
export type BusinessValue = "core" | "other";
export type Usage = "high" | "low";
export type Dimension = "business_value" | "usage";

export interface ValueSourceDoc {
  id: string;
  name: string;
  business_value: BusinessValue;
  usage: Usage;
  asset_ids: string[];
}

export interface AssetDoc {
  id: string;
  name: string;
  state: AssetState;
  ci_ids: string[];
}

export interface PortfolioDoc {
  configuration_items: { id: string; name: string; state: AssetState }[];
  it_assets: AssetDoc[];
  value_sources: ValueSourceDoc[];
  debt_items: Record<string, unknown>[];
  metrics: MetricDoc[];
}

export interface RuleDoc {
  id: string;
  name: string;
  author: string;
  created_date: string | null;
  cells: Record<string, number>;
}

export interface RulesDoc {
  rules: RuleDoc[];
  active_rule_id: string | null;
}

export interface BacklogEntryDoc {
  id: string;
  name: string;
  rank: number;
  bucket: string;
  created_date: string;
}

export interface BacklogDoc {
  rule_id: string;
  entries: BacklogEntryDoc[];
  unlinked: { id: string; message: string }[];
}

export interface WhatIfDiffDoc {
  id: string;
  rank_before: number;
  rank_after: number;
  rank_change: number;
  bucket_before: string;
  bucket_after: string;
  bucket_changed: boolean;
}

export interface WhatIfDoc {
  candidate_rule_id: string;
  active_rule_id: string;
  as_of: number;
  backlog: BacklogEntryDoc[];
  diff: WhatIfDiffDoc[];
}

export interface CompareCellDoc {
  cell: string;
  ranks: Record<string, number>;
  buckets: Record<string, string>;
  unanimous: boolean;
}

export interface CompareDoc {
  rule_ids: string[];
  cells: CompareCellDoc[];
}

export interface AgreementScoreDoc {
  kappa?: number;
  method?: string;
  n_subjects?: number;
  n_raters?: number;
  error?: string;
}

export interface AgreementDoc {
  dimension: Dimension;
  scores: Record<string, AgreementScoreDoc>;
}

export interface DisagreementDoc {
  value_source_id: string;
  ratings: Record<string, string>;
  dissent: number;
}

export interface MetricDoc {
  id: string;
  name: string;
  target_kind: "value_source" | "it_asset";
  target_id: string;
  horizon: "immediate" | "short_term" | "long_term";
  description: string;
}

export interface MetricsDoc {
  metrics: MetricDoc[];
  by_horizon: Record<string, MetricDoc[]>;
}

export interface RatingDoc {
  rater_id: string;
  value_source_id: string;
  dimension: Dimension;
  category: string;
  timestamp?: string | null;
}
