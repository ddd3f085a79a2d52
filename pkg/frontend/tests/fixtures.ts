import type { PortfolioDoc, RuleDoc } from "../src/types.js";

export function samplePortfolio(): PortfolioDoc {
  return {
    configuration_items: [
      { id: "shop", name: "web shop", state: "operational" },
      { id: "mobile", name: "mobile app", state: "to_be" },
      { id: "billing", name: "old billing", state: "legacy" },
    ],
    it_assets: [
      { id: "a-shop", name: "Shop", state: "operational", ci_ids: ["shop"] },
      { id: "a-mobile", name: "Mobile", state: "to_be", ci_ids: ["mobile"] },
      { id: "a-billing", name: "Billing", state: "legacy", ci_ids: ["billing"] },
    ],
    value_sources: [
      {
        id: "showcase", name: "product showcase",
        business_value: "core", usage: "high", asset_ids: ["a-shop"],
      },
      {
        id: "reports", name: "sales reports",
        business_value: "other", usage: "low", asset_ids: ["a-shop", "a-billing"],
      },
      {
        id: "m-checkout", name: "mobile checkout",
        business_value: "core", usage: "high", asset_ids: ["a-mobile"],
      },
    ],
    debt_items: [
      {
        id: "td-shop", name: "auth architecture", description: "",
        created_date: "2020-04-10", paid_date: null, paid_date_manual: false,
        debt_type: "architectural", technical_priority: "low", technical_effort: "high",
        ci_id: "shop", value_source_ids: ["showcase"], tracker_issue_id: null, factor_tags: [],
      },
      {
        id: "td-mobile", name: "mobile test gap", description: "",
        created_date: "2020-05-15", paid_date: null, paid_date_manual: false,
        debt_type: "test", technical_priority: "medium", technical_effort: "medium",
        ci_id: "mobile", value_source_ids: ["m-checkout"], tracker_issue_id: null, factor_tags: [],
      },
    ],
    metrics: [],
  };
}

export function exampleRule(id = "base"): RuleDoc {
  return {
    id,
    name: id,
    author: "",
    created_date: null,
    cells: {
      "operational/core/high": 1,
      "operational/core/low": 2,
      "operational/other/high": 3,
      "operational/other/low": 4,
      "to_be/core": 5,
      "to_be/other": 6,
      "legacy/core/high": 7,
      "legacy/core/low": 8,
      "legacy/other/high": 9,
      "legacy/other/low": 10,
    },
  };
}
