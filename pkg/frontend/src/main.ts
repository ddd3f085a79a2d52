/** Browser wiring: tabs, data loading, drag-to-reclassify, draft editing.
 * All state of record lives on the server; this module only holds the
 * in-flight draft rule and the rater name. */

import { ApiClient } from "./api.js";
import { BoardState, buildBoard, cellKey, reclassifyFor } from "./board.js";
import { optimistic } from "./optimistic.js";
import { renderAgreement, renderBacklog, renderBoard, renderCompare, renderDiff, renderImpact } from "./render.js";
import type { PortfolioDoc, RuleDoc, ValueSourceDoc } from "./types.js";
import { DraftRule, draftRuleDoc, editCell, isDirty, startDraft } from "./whatif.js";

const api = new ApiClient("");

interface AppState {
  portfolio: PortfolioDoc | null;
  activeRule: RuleDoc | null;
  board: BoardState | null;
  draft: DraftRule | null;
}

const state: AppState = { portfolio: null, activeRule: null, board: null, draft: null };

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

function raterName(): string {
  return (el("rater") as HTMLInputElement).value.trim() || "anonymous";
}

function banner(message: string, kind: "error" | "info" = "error"): void {
  const node = el("banner");
  node.textContent = message;
  node.className = `banner ${kind}`;
  node.hidden = false;
  window.setTimeout(() => {
    node.hidden = true;
  }, 4000);
}

async function refreshBoard(): Promise<void> {
  try {
    const [portfolio, rules, disagreementsBv] = await Promise.all([
      api.getPortfolio(),
      api.getRules(),
      api.getDisagreements("business_value").catch(() => ({ entries: [] })),
    ]);
    state.portfolio = portfolio;
    state.activeRule = rules.rules.find((r) => r.id === rules.active_rule_id) ?? null;
    state.board = buildBoard(portfolio, state.activeRule, disagreementsBv.entries);
    el("canvas").innerHTML = renderBoard(state.board, true);
    wireDragAndDrop();
  } catch (error) {
    banner(`cannot reach the service: ${(error as Error).message}`);
  }
}

async function refreshBacklog(): Promise<void> {
  try {
    const backlog = await api.getBacklog();
    el("backlog").innerHTML = renderBacklog(backlog.entries, `Backlog under ${backlog.rule_id}`);
  } catch (error) {
    el("backlog").innerHTML = `<p class="empty">${(error as Error).message}</p>`;
  }
}

function wireDragAndDrop(): void {
  const canvas = el("canvas");
  canvas.querySelectorAll<HTMLElement>(".card").forEach((card) => {
    card.addEventListener("dragstart", (event) => {
      (event as DragEvent).dataTransfer?.setData("text/vs-id", card.dataset.vs ?? "");
    });
  });
  canvas.querySelectorAll<HTMLElement>(".cell").forEach((cell) => {
    cell.addEventListener("dragover", (event) => event.preventDefault());
    cell.addEventListener("drop", (event) => {
      event.preventDefault();
      const vsId = (event as DragEvent).dataTransfer?.getData("text/vs-id");
      if (vsId) void dropCard(vsId, cell);
    });
  });
}

async function dropCard(vsId: string, cellNode: HTMLElement): Promise<void> {
  const portfolio = state.portfolio;
  if (!portfolio) return;
  const vs = portfolio.value_sources.find((v) => v.id === vsId);
  if (!vs) return;
  const target = {
    value: (cellNode.dataset.value ?? "core") as ValueSourceDoc["business_value"],
    usage: (cellNode.dataset.usage || null) as ValueSourceDoc["usage"] | null,
  };
  const change = reclassifyFor(vs, target);
  if (change === null) return; // same classification: no-op, no event

  const before: ValueSourceDoc = { ...vs };
  await optimistic({
    apply: () => {
      vs.business_value = change.business_value;
      vs.usage = change.usage;
      state.board = buildBoard(portfolio, state.activeRule, []);
      el("canvas").innerHTML = renderBoard(state.board, true);
      wireDragAndDrop();
      return before;
    },
    remote: async () => {
      await api.putPortfolio(portfolio);
      const rater = raterName();
      if (before.business_value !== change.business_value) {
        await api.addRating({
          rater_id: rater, value_source_id: vsId,
          dimension: "business_value", category: change.business_value,
        });
      }
      if (before.usage !== change.usage) {
        await api.addRating({
          rater_id: rater, value_source_id: vsId,
          dimension: "usage", category: change.usage,
        });
      }
    },
    revert: (snapshot) => {
      vs.business_value = snapshot.business_value;
      vs.usage = snapshot.usage;
      state.board = buildBoard(portfolio, state.activeRule, []);
      el("canvas").innerHTML = renderBoard(state.board, true);
      wireDragAndDrop();
      banner("reclassification failed; card reverted");
    },
    onSettled: () => {
      void refreshBoard();
      void refreshBacklog();
    },
  });
}

function renderDraftEditor(): void {
  const host = el("draft-cells");
  if (!state.draft) {
    host.innerHTML = "<p class=\"empty\">No active rule to draft from.</p>";
    return;
  }
  const rows = Object.entries(state.draft.cells)
    .map(
      ([key, rank]) =>
        `<label class="draft-cell${state.draft!.edited.has(key) ? " edited" : ""}">
           <span>${key}</span>
           <input type="number" min="1" max="10" value="${rank}" data-cell="${key}">
         </label>`,
    )
    .join("");
  host.innerHTML = rows;
  host.querySelectorAll<HTMLInputElement>("input").forEach((input) => {
    input.addEventListener("change", () => {
      const error = editCell(state.draft!, input.dataset.cell!, Number(input.value));
      if (error) {
        banner(error);
        input.value = String(state.draft!.cells[input.dataset.cell!]);
        return;
      }
      void previewDraft();
    });
  });
}

async function previewDraft(): Promise<void> {
  if (!state.draft || !isDirty(state.draft)) return;
  try {
    const result = await api.whatIf(draftRuleDoc(state.draft));
    el("whatif-backlog").innerHTML = renderBacklog(result.backlog, "Backlog under draft");
    el("whatif-diff").innerHTML = renderDiff(result.diff);
  } catch (error) {
    banner((error as Error).message);
  }
}

async function activateDraft(): Promise<void> {
  if (!state.draft || !isDirty(state.draft)) {
    banner("nothing to activate", "info");
    return;
  }
  const doc = draftRuleDoc(state.draft, `${state.draft.baseRuleId}-v${Date.now()}`);
  try {
    await api.addRule(doc, true);
    banner(`rule ${doc.id} activated`, "info");
    state.draft = null;
    await refreshAll();
  } catch (error) {
    banner((error as Error).message);
  }
}

async function refreshCompare(): Promise<void> {
  try {
    el("compare").innerHTML = renderCompare(await api.compareRules());
  } catch (error) {
    el("compare").innerHTML = `<p class="empty">${(error as Error).message}</p>`;
  }
}

async function refreshAgreement(): Promise<void> {
  try {
    const [bv, usage] = await Promise.all([
      api.getAgreement("business_value"),
      api.getAgreement("usage"),
    ]);
    el("agreement-bv").innerHTML = renderAgreement(bv);
    el("agreement-usage").innerHTML = renderAgreement(usage);
  } catch (error) {
    el("agreement-bv").innerHTML = `<p class="empty">${(error as Error).message}</p>`;
    el("agreement-usage").innerHTML = "";
  }
}

async function refreshImpact(): Promise<void> {
  try {
    el("impact").innerHTML = renderImpact(await api.getMetrics());
  } catch (error) {
    el("impact").innerHTML = `<p class="empty">${(error as Error).message}</p>`;
  }
}

async function refreshAll(): Promise<void> {
  await refreshBoard();
  await refreshBacklog();
  const rules = await api.getRules().catch(() => null);
  const active = rules?.rules.find((r) => r.id === rules.active_rule_id) ?? null;
  state.draft = active ? startDraft(active) : null;
  renderDraftEditor();
  await Promise.all([refreshCompare(), refreshAgreement(), refreshImpact()]);
}

function wireTabs(): void {
  document.querySelectorAll<HTMLElement>(".tab").forEach((tab) => {
    tab.addEventListener("click", () => {
      document.querySelectorAll(".tab").forEach((t) => t.classList.remove("active"));
      document.querySelectorAll(".pane").forEach((p) => ((p as HTMLElement).hidden = true));
      tab.classList.add("active");
      el(tab.dataset.pane!).hidden = false;
    });
  });
}

export function start(): void {
  wireTabs();
  el("activate-draft").addEventListener("click", () => void activateDraft());
  el("refresh").addEventListener("click", () => void refreshAll());
  void refreshAll();
}

if (typeof document !== "undefined") {
  start();
}
