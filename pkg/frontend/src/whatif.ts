/** Draft-rule state for what-if exploration.
 *
 * Edits accumulate client-side only; nothing touches the server until the
 * draft is explicitly activated (create rule + set active).
 */

import type { RuleDoc } from "./types.js";

export const MIN_RANK = 1;
export const MAX_RANK = 10;

export interface DraftRule {
  baseRuleId: string;
  cells: Record<string, number>;
  edited: Set<string>;
}

export function startDraft(base: RuleDoc): DraftRule {
  return { baseRuleId: base.id, cells: { ...base.cells }, edited: new Set() };
}

/** Apply one cell edit; returns an error string for out-of-range ranks
 * (rejected inline, draft unchanged). */
export function editCell(draft: DraftRule, cellKey: string, rank: number): string | null {
  if (!Number.isInteger(rank) || rank < MIN_RANK || rank > MAX_RANK) {
    return `rank must be an integer in ${MIN_RANK}..${MAX_RANK}`;
  }
  if (!(cellKey in draft.cells)) {
    return `unknown cell ${cellKey}`;
  }
  draft.cells[cellKey] = rank;
  draft.edited.add(cellKey);
  return null;
}

export function isDirty(draft: DraftRule): boolean {
  return draft.edited.size > 0;
}

let draftCounter = 0;

/** The candidate document sent to POST /whatif (and later POST /rules). */
export function draftRuleDoc(draft: DraftRule, id?: string): RuleDoc {
  draftCounter += 1;
  const draftId = id ?? `${draft.baseRuleId}-draft-${draftCounter}`;
  return {
    id: draftId,
    name: `draft of ${draft.baseRuleId}`,
    author: "",
    created_date: null,
    cells: { ...draft.cells },
  };
}
