/** Pure board state: the canvas grid derived from server documents.
 *
 * Columns are asset states; rows are the value-source classifications.
 * The to_be column has no usage split, so the grid always shows exactly
 * the ten cells a priority rule maps. Cards are value sources, placed in
 * every state column where they have a supporting asset.
 */

import type {
  AssetState,
  BusinessValue,
  DisagreementDoc,
  PortfolioDoc,
  RuleDoc,
  Usage,
  ValueSourceDoc,
} from "./types.js";

export interface Card {
  vsId: string;
  name: string;
  disagreement: boolean;
}

export interface BoardCell {
  key: string;
  state: AssetState;
  value: BusinessValue;
  usage: Usage | null;
  rank: number | null;
  cards: Card[];
}

export interface BoardColumn {
  state: AssetState;
  cells: BoardCell[];
}

export interface BoardState {
  columns: BoardColumn[];
  empty: boolean;
}

export const STATES: AssetState[] = ["operational", "to_be", "legacy"];
const VALUES: BusinessValue[] = ["core", "other"];
const USAGES: Usage[] = ["high", "low"];

export function cellKey(state: AssetState, value: BusinessValue, usage: Usage | null): string {
  return usage === null ? `${state}/${value}` : `${state}/${value}/${usage}`;
}

function emptyColumns(rule: RuleDoc | null): BoardColumn[] {
  return STATES.map((state) => {
    const cells: BoardCell[] = [];
    for (const value of VALUES) {
      if (state === "to_be") {
        cells.push(makeCell(state, value, null, rule));
      } else {
        for (const usage of USAGES) {
          cells.push(makeCell(state, value, usage, rule));
        }
      }
    }
    return { state, cells };
  });
}

function makeCell(
  state: AssetState,
  value: BusinessValue,
  usage: Usage | null,
  rule: RuleDoc | null,
): BoardCell {
  const key = cellKey(state, value, usage);
  return { key, state, value, usage, rank: rule ? rule.cells[key] ?? null : null, cards: [] };
}

export function buildBoard(
  portfolio: PortfolioDoc,
  rule: RuleDoc | null,
  disagreements: DisagreementDoc[] = [],
): BoardState {
  const columns = emptyColumns(rule);
  const contested = new Set(disagreements.map((d) => d.value_source_id));
  const assetState = new Map(portfolio.it_assets.map((a) => [a.id, a.state]));

  for (const vs of portfolio.value_sources) {
    const states = new Set<AssetState>();
    for (const assetId of vs.asset_ids) {
      const state = assetState.get(assetId);
      if (state) states.add(state);
    }
    for (const state of states) {
      const usage = state === "to_be" ? null : vs.usage;
      const key = cellKey(state, vs.business_value, usage);
      const column = columns.find((c) => c.state === state)!;
      const cell = column.cells.find((c) => c.key === key)!;
      cell.cards.push({ vsId: vs.id, name: vs.name, disagreement: contested.has(vs.id) });
    }
  }
  for (const column of columns) {
    for (const cell of column.cells) {
      cell.cards.sort((a, b) => a.vsId.localeCompare(b.vsId));
    }
  }
  const empty = portfolio.value_sources.length === 0;
  return { columns, empty };
}

/** The classification a drop on `target` implies for a dragged card.
 *
 * A drop changes business value always, and usage only when the target
 * cell carries one (the to_be column has no usage to offer). Returns null
 * for a no-op drop (classification unchanged).
 */
export function reclassifyFor(
  vs: ValueSourceDoc,
  target: Pick<BoardCell, "value" | "usage">,
): { business_value: BusinessValue; usage: Usage } | null {
  const next = {
    business_value: target.value,
    usage: target.usage ?? vs.usage,
  };
  if (next.business_value === vs.business_value && next.usage === vs.usage) {
    return null;
  }
  return next;
}

/** Cells of the board a value source currently occupies (for assertions
 * and for revert bookkeeping). */
export function cardPositions(board: BoardState, vsId: string): string[] {
  const keys: string[] = [];
  for (const column of board.columns) {
    for (const cell of column.cells) {
      if (cell.cards.some((card) => card.vsId === vsId)) keys.push(cell.key);
    }
  }
  return keys.sort();
}
