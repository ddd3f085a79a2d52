/** Integration acceptance: drives the real backend service through the
 * same client the browser uses. */

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { buildBoard, cardPositions, reclassifyFor } from "../src/board.js";
import { optimistic } from "../src/optimistic.js";
import { renderCompare } from "../src/render.js";
import type { PortfolioDoc, RuleDoc } from "../src/types.js";
import { draftRuleDoc, editCell, startDraft } from "../src/whatif.js";
import { exampleRule, samplePortfolio } from "./fixtures.js";
import { startServer, TestServer } from "./server.js";

/** Key-sorted stringify so response digests compare structurally. */
function canonical(value: unknown): string {
  if (Array.isArray(value)) return `[${value.map(canonical).join(",")}]`;
  if (value !== null && typeof value === "object") {
    const entries = Object.entries(value as Record<string, unknown>).sort(([a], [b]) =>
      a < b ? -1 : 1,
    );
    return `{${entries.map(([k, v]) => `${JSON.stringify(k)}:${canonical(v)}`).join(",")}}`;
  }
  return JSON.stringify(value);
}

let server: TestServer;
let api: ApiClient;

beforeAll(async () => {
  server = await startServer();
  api = new ApiClient(server.base);
  await api.putPortfolio(samplePortfolio());
  await api.addRule(exampleRule("base"), true);
});

afterAll(async () => {
  await server?.stop();
});

async function boardFromServer() {
  const [portfolio, rules, disagreements] = await Promise.all([
    api.getPortfolio(),
    api.getRules(),
    api.getDisagreements("business_value"),
  ]);
  const active = rules.rules.find((r) => r.id === rules.active_rule_id) ?? null;
  return {
    portfolio,
    active,
    board: buildBoard(portfolio, active, disagreements.entries),
  };
}

describe("canvas round-trip", () => {
  it("drag-reclassify survives a hard refresh bit-for-bit", async () => {
    const { portfolio, active, board } = await boardFromServer();
    expect(cardPositions(board, "showcase")).toEqual(["operational/core/high"]);

    const vs = portfolio.value_sources.find((v) => v.id === "showcase")!;
    const change = reclassifyFor(vs, { value: "other", usage: "low" })!;
    expect(change).toEqual({ business_value: "other", usage: "low" });

    let reverted = false;
    await optimistic({
      apply: () => {
        const before = { ...vs };
        vs.business_value = change.business_value;
        vs.usage = change.usage;
        return before;
      },
      remote: async () => {
        await api.putPortfolio(portfolio);
        await api.addRating({
          rater_id: "po", value_source_id: vs.id,
          dimension: "business_value", category: change.business_value,
          timestamp: "2020-06-01T10:00:00+00:00",
        });
        await api.addRating({
          rater_id: "po", value_source_id: vs.id,
          dimension: "usage", category: change.usage,
          timestamp: "2020-06-01T10:00:00+00:00",
        });
      },
      revert: (snapshot) => {
        reverted = true;
        vs.business_value = snapshot.business_value;
        vs.usage = snapshot.usage;
      },
    });
    expect(reverted).toBe(false);

    // hard refresh: rebuild the whole board from server data only
    const refreshed = await boardFromServer();
    expect(cardPositions(refreshed.board, "showcase")).toEqual(["operational/other/low"]);
    const localBoard = buildBoard(portfolio, active, []);
    expect(cardPositions(localBoard, "showcase")).toEqual(
      cardPositions(refreshed.board, "showcase"),
    );
    expect(canonical(refreshed.portfolio)).toBe(canonical(portfolio));
  });

  it("drop on the same classification stays a no-op", async () => {
    const { portfolio } = await boardFromServer();
    const vs = portfolio.value_sources.find((v) => v.id === "m-checkout")!;
    expect(reclassifyFor(vs, { value: "core", usage: null })).toBeNull();
  });

  it("reverts the card when the remote call fails", async () => {
    const { portfolio } = await boardFromServer();
    const vs = portfolio.value_sources.find((v) => v.id === "reports")!;
    const originalValue = vs.business_value;
    let failed: Error | null = null;
    await optimistic({
      apply: () => {
        const before = { ...vs };
        vs.business_value = "core";
        return before;
      },
      remote: async () => {
        throw new Error("network down");
      },
      revert: (snapshot) => {
        vs.business_value = snapshot.business_value;
      },
      onError: (error) => {
        failed = error;
      },
    });
    expect(failed).not.toBeNull();
    expect(vs.business_value).toBe(originalValue);
    const fresh = await api.getPortfolio();
    expect(fresh.value_sources.find((v) => v.id === "reports")!.business_value).toBe(originalValue);
  });
});

describe("what-if draft isolation", () => {
  it("changes the backlog panel but not the crosstab digest until activation", async () => {
    const rules = await api.getRules();
    const active = rules.rules.find((r) => r.id === rules.active_rule_id)!;
    const activeBacklog = await api.getBacklog();

    const crosstabBefore = canonical(await api.getCrosstab());

    const draft = startDraft(active);
    expect(editCell(draft, "to_be/core", 2)).toBeNull();
    const whatIf = await api.whatIf(draftRuleDoc(draft, "draft-preview"));

    const draftRanks = new Map(whatIf.backlog.map((e) => [e.id, e.rank]));
    const activeRanks = new Map(activeBacklog.entries.map((e) => [e.id, e.rank]));
    expect(draftRanks.get("td-mobile")).toBe(2);
    expect(activeRanks.get("td-mobile")).toBe(5);
    expect(whatIf.diff.find((d) => d.id === "td-mobile")!.rank_change).toBe(-3);

    const crosstabAfterDraft = canonical(await api.getCrosstab());
    expect(crosstabAfterDraft).toBe(crosstabBefore);

    // rules list untouched by the preview
    const rulesAfter = await api.getRules();
    expect(rulesAfter.rules.map((r) => r.id)).toEqual(rules.rules.map((r) => r.id));

    // activation is the moment analytics change
    await api.addRule(draftRuleDoc(draft, "draft-activated"), true);
    const crosstabAfterActivate = canonical(await api.getCrosstab());
    expect(crosstabAfterActivate).not.toBe(crosstabBefore);
    expect((await api.getBacklog()).entries.find((e) => e.id === "td-mobile")!.rank).toBe(2);
  });
});

describe("compare panel", () => {
  it("highlights operational/core/high as unanimous when every rule ranks it 1", async () => {
    const variants: RuleDoc[] = [];
    for (const [suffix, toBeRank] of [
      ["p1", 4],
      ["p2", 5],
      ["p3", 3],
    ] as const) {
      const rule = exampleRule(`stakeholder-${suffix}`);
      rule.cells["to_be/core"] = toBeRank;
      variants.push(rule);
      await api.addRule(rule, false);
    }
    const doc = await api.compareRules(variants.map((r) => r.id));
    const byCell = new Map(doc.cells.map((row) => [row.cell, row]));
    expect(byCell.get("operational/core/high")!.unanimous).toBe(true);
    expect(byCell.get("operational/core/high")!.ranks).toEqual({
      "stakeholder-p1": 1, "stakeholder-p2": 1, "stakeholder-p3": 1,
    });
    expect(byCell.get("to_be/core")!.unanimous).toBe(false);

    const html = renderCompare(doc);
    const unanimousRow = html
      .split("<tr")
      .find((chunk) => chunk.includes("operational/core/high"))!;
    expect(unanimousRow).toContain('class="unanimous"');
  });
});

describe("portfolio seeding guard", () => {
  it("rejects drafts with out-of-range ranks before any network call", async () => {
    const rules = await api.getRules();
    const active = rules.rules.find((r) => r.id === rules.active_rule_id)!;
    const draft = startDraft(active);
    expect(editCell(draft, "operational/core/high", 42)).toMatch(/1\.\.10/);
  });
});
