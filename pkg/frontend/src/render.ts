/** Pure HTML renderers. Everything here is a function of server documents
 * (plus client-side draft state), so a hard refresh reproduces the exact
 * same markup from the API alone. */

import type { BoardState } from "./board.js";
import type {
  AgreementDoc,
  BacklogEntryDoc,
  CompareDoc,
  MetricsDoc,
  WhatIfDiffDoc,
} from "./types.js";

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const STATE_LABELS: Record<string, string> = {
  operational: "Operational",
  to_be: "To-be operational",
  legacy: "Legacy",
};

export function renderBoard(board: BoardState, showRanks: boolean): string {
  if (board.empty) {
    return `<div class="onboarding-hint">No value sources yet. Onboard a portfolio
      (CLI: <code>debtmap onboard workshop.json</code>) or add assets and value
      sources, then come back to classify them together.</div>`;
  }
  const columns = board.columns
    .map((column) => {
      const cells = column.cells
        .map((cell) => {
          const badge =
            showRanks && cell.rank !== null
              ? `<span class="rank-badge" title="priority rank">${cell.rank}</span>`
              : "";
          const label = cell.usage === null ? cell.value : `${cell.value}/${cell.usage}`;
          const cards = cell.cards
            .map(
              (card) =>
                `<div class="card${card.disagreement ? " disagreement" : ""}"
                      draggable="true" data-vs="${esc(card.vsId)}">
                   ${esc(card.name)}${card.disagreement ? '<span class="badge" title="raters disagree">!</span>' : ""}
                 </div>`,
            )
            .join("");
          return `<div class="cell" data-cell="${esc(cell.key)}" data-value="${cell.value}"
                       data-usage="${cell.usage ?? ""}">
                    <div class="cell-head">${esc(label)}${badge}</div>
                    <div class="cell-cards">${cards}</div>
                  </div>`;
        })
        .join("");
      return `<div class="column column-${column.state}">
                <h3>${STATE_LABELS[column.state]}</h3>${cells}
              </div>`;
    })
    .join("");
  return `<div class="board">${columns}</div>`;
}

export function renderBacklog(entries: BacklogEntryDoc[], title: string): string {
  const rows = entries
    .map(
      (entry) =>
        `<tr><td>${entry.rank}</td><td class="bucket-${entry.bucket}">${entry.bucket}</td>
         <td>${esc(entry.name)}</td><td>${entry.created_date}</td></tr>`,
    )
    .join("");
  return `<h3>${esc(title)}</h3>
    <table class="backlog"><thead><tr><th>rank</th><th>bucket</th><th>item</th><th>identified</th></tr></thead>
    <tbody>${rows}</tbody></table>`;
}

export function renderDiff(diff: WhatIfDiffDoc[]): string {
  const moved = diff.filter((d) => d.rank_change !== 0);
  if (moved.length === 0) {
    return `<p class="diff-empty">No item changes rank under this draft.</p>`;
  }
  const rows = moved
    .map((d) => {
      const direction = d.rank_change < 0 ? "rises" : "drops";
      return `<tr class="${direction}"><td>${esc(d.id)}</td>
        <td>${d.rank_before} &rarr; ${d.rank_after}</td>
        <td>${d.bucket_changed ? `${d.bucket_before} &rarr; ${d.bucket_after}` : d.bucket_after}</td></tr>`;
    })
    .join("");
  return `<table class="diff"><thead><tr><th>item</th><th>rank</th><th>bucket</th></tr></thead>
    <tbody>${rows}</tbody></table>`;
}

export function renderCompare(doc: CompareDoc): string {
  const heads = doc.rule_ids.map((id) => `<th>${esc(id)}</th>`).join("");
  const rows = doc.cells
    .map((row) => {
      const ranks = doc.rule_ids.map((id) => `<td>${row.ranks[id]}</td>`).join("");
      return `<tr class="${row.unanimous ? "unanimous" : "contested"}">
        <td class="cell-name">${esc(row.cell)}</td>${ranks}
        <td>${row.unanimous ? "&#10003;" : ""}</td></tr>`;
    })
    .join("");
  return `<table class="compare"><thead><tr><th>cell</th>${heads}<th>unanimous</th></tr></thead>
    <tbody>${rows}</tbody></table>`;
}

export function renderAgreement(doc: AgreementDoc): string {
  const rows = Object.entries(doc.scores)
    .sort(([a], [b]) => (a === "all" ? -1 : b === "all" ? 1 : a.localeCompare(b)))
    .map(([key, score]) => {
      const kappa =
        score.kappa !== undefined ? score.kappa.toFixed(2) : esc(score.error ?? "n/a");
      return `<tr><td>${esc(key)}</td><td class="kappa">${kappa}</td>
        <td>${score.method ?? ""}</td><td>${score.n_subjects ?? ""}</td></tr>`;
    })
    .join("");
  return `<table class="agreement"><thead><tr><th>raters</th><th>kappa</th><th>method</th><th>subjects</th></tr></thead>
    <tbody>${rows}</tbody></table>`;
}

export function renderImpact(doc: MetricsDoc): string {
  const horizons: [string, string][] = [
    ["immediate", "Immediate"],
    ["short_term", "Short term"],
    ["long_term", "Long term"],
  ];
  const columns = horizons
    .map(([key, label]) => {
      const metrics = (doc.by_horizon[key] ?? [])
        .map(
          (m) =>
            `<div class="metric"><strong>${esc(m.name)}</strong>
             <span class="target">${m.target_kind === "value_source" ? "VS" : "asset"}: ${esc(m.target_id)}</span>
             ${m.description ? `<p>${esc(m.description)}</p>` : ""}</div>`,
        )
        .join("");
      return `<div class="impact-column"><h3>${label}</h3>${metrics || "<p class=\"empty\">none</p>"}</div>`;
    })
    .join("");
  return `<div class="impact">${columns}</div>`;
}
