/** Thin typed client over the service HTTP API. The UI owns no state the
 * server doesn't; everything renders from these responses. */

import type {
  AgreementDoc,
  BacklogDoc,
  CompareDoc,
  Dimension,
  DisagreementDoc,
  MetricDoc,
  MetricsDoc,
  PortfolioDoc,
  RatingDoc,
  RuleDoc,
  RulesDoc,
  WhatIfDoc,
} from "./types.js";

export class ApiError extends Error {
  code: string;
  status: number;

  constructor(code: string, message: string, status: number) {
    super(message);
    this.code = code;
    this.status = status;
  }
}

export class ApiClient {
  constructor(private base: string = "", private token: string | null = null) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.token) headers["X-Api-Token"] = this.token;
    const response = await fetch(this.base + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let code = `HTTP${response.status}`;
      let message = response.statusText;
      try {
        const doc = await response.json();
        code = doc.code ?? code;
        message = doc.message ?? message;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(code, message, response.status);
    }
    return (await response.json()) as T;
  }

  getPortfolio(): Promise<PortfolioDoc> {
    return this.request("GET", "/portfolio");
  }

  putPortfolio(doc: PortfolioDoc): Promise<unknown> {
    return this.request("PUT", "/portfolio", doc);
  }

  getRules(): Promise<RulesDoc> {
    return this.request("GET", "/rules");
  }

  addRule(rule: RuleDoc, activate = false): Promise<{ rule: RuleDoc }> {
    return this.request("POST", "/rules", { ...rule, activate });
  }

  activateRule(ruleId: string): Promise<{ active_rule_id: string }> {
    return this.request("POST", "/rules/active", { rule_id: ruleId });
  }

  compareRules(ids?: string[]): Promise<CompareDoc> {
    const query = ids && ids.length ? `?ids=${ids.join(",")}` : "";
    return this.request("GET", `/rules/compare${query}`);
  }

  getBacklog(ruleId?: string): Promise<BacklogDoc> {
    const query = ruleId ? `?rule=${encodeURIComponent(ruleId)}` : "";
    return this.request("GET", `/backlog${query}`);
  }

  whatIf(rule: RuleDoc): Promise<WhatIfDoc> {
    return this.request("POST", "/whatif", { rule });
  }

  getCrosstab(): Promise<unknown> {
    return this.request("GET", "/analytics/crosstab");
  }

  addRating(rating: RatingDoc): Promise<unknown> {
    return this.request("POST", "/ratings", rating);
  }

  getAgreement(dimension: Dimension, pairs = true): Promise<AgreementDoc> {
    return this.request("GET", `/agreement?dimension=${dimension}&pairs=${pairs}`);
  }

  getDisagreements(dimension: Dimension): Promise<{ entries: DisagreementDoc[] }> {
    return this.request("GET", `/disagreements?dimension=${dimension}`);
  }

  getMetrics(): Promise<MetricsDoc> {
    return this.request("GET", "/metrics");
  }

  addMetric(metric: MetricDoc): Promise<unknown> {
    return this.request("POST", "/metrics", metric);
  }

  health(): Promise<{ status: string; seq: number; digest: string }> {
    return this.request("GET", "/healthz");
  }
}
