/** Line-level diff with token-level highlighting inside changed line pairs. */

export type DiffType = "same" | "del" | "add";

export interface DiffRow {
  type: DiffType;
  text: string;
  /** spans of the line that differ, for token-level emphasis */
  spans: Array<{ text: string; changed: boolean }>;
}

function lcsTable<T>(a: T[], b: T[]): number[][] {
  const table: number[][] = Array.from({ length: a.length + 1 }, () =>
    new Array<number>(b.length + 1).fill(0),
  );
  for (let i = a.length - 1; i >= 0; i--) {
    for (let j = b.length - 1; j >= 0; j--) {
      table[i][j] =
        a[i] === b[j] ? table[i + 1][j + 1] + 1 : Math.max(table[i + 1][j], table[i][j + 1]);
    }
  }
  return table;
}

function diffSequences<T>(a: T[], b: T[]): Array<{ type: DiffType; value: T }> {
  const table = lcsTable(a, b);
  const out: Array<{ type: DiffType; value: T }> = [];
  let i = 0;
  let j = 0;
  while (i < a.length && j < b.length) {
    if (a[i] === b[j]) {
      out.push({ type: "same", value: a[i] });
      i++;
      j++;
    } else if (table[i + 1][j] >= table[i][j + 1]) {
      out.push({ type: "del", value: a[i] });
      i++;
    } else {
      out.push({ type: "add", value: b[j] });
      j++;
    }
  }
  while (i < a.length) out.push({ type: "del", value: a[i++] });
  while (j < b.length) out.push({ type: "add", value: b[j++] });
  return out;
}

const TOKEN_SPLIT = /([A-Za-z_][A-Za-z0-9_]*|\d+|\s+|.)/g;

function tokens(line: string): string[] {
  return line.match(TOKEN_SPLIT) ?? [];
}

function highlight(line: string, other: string): Array<{ text: string; changed: boolean }> {
  const rows = diffSequences(tokens(line), tokens(other));
  const spans: Array<{ text: string; changed: boolean }> = [];
  for (const row of rows) {
    if (row.type === "add") continue; // belongs to the other line
    const changed = row.type === "del";
    const last = spans[spans.length - 1];
    if (last && last.changed === changed) {
      last.text += row.value;
    } else {
      spans.push({ text: row.value, changed });
    }
  }
  return spans;
}

/** Diff two code texts into display rows; deletions carry the old line,
 * additions the new one. Paired del/add lines get token-level spans. */
export function diffCode(before: string, after: string): DiffRow[] {
  const rows = diffSequences(before.split("\n"), after.split("\n"));
  const out: DiffRow[] = [];
  for (let k = 0; k < rows.length; k++) {
    const row = rows[k];
    if (row.type === "same") {
      out.push({ type: "same", text: row.value, spans: [{ text: row.value, changed: false }] });
      continue;
    }
    const partner = rows[k + 1];
    if (row.type === "del" && partner?.type === "add") {
      out.push({ type: "del", text: row.value, spans: highlight(row.value, partner.value) });
      out.push({ type: "add", text: partner.value, spans: highlight(partner.value, row.value) });
      k++;
      continue;
    }
    out.push({ type: row.type, text: row.value, spans: [{ text: row.value, changed: true }] });
  }
  return out;
}
