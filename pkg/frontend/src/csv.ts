/** Parsing and serialization of the versioned aoinet CSV schemas. */

export const SWEEP_SCHEMA = "aoinet-sweep v1";
export const CDF_SCHEMA = "aoinet-cdf v1";

export type Row = Record<string, string>;

export interface Table {
  schema: string;
  columns: string[];
  rows: Row[];
}

export class SchemaError extends Error {}

/** Split one CSV line; the aoinet writers never emit quoted fields. */
function splitLine(line: string): string[] {
  return line.split(",");
}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("empty CSV: no schema comment or header found");
  }
  let schema = "";
  if (lines[0].startsWith("#")) {
    schema = lines[0].replace(/^#\s*/, "").trim();
    lines.shift();
  }
  if (lines.length === 0) {
    throw new SchemaError("CSV has a schema comment but no header row");
  }
  const columns = splitLine(lines[0]);
  const rows: Row[] = [];
  for (const line of lines.slice(1)) {
    const parts = splitLine(line);
    const row: Row = {};
    columns.forEach((c, i) => {
      row[c] = parts[i] ?? "";
    });
    rows.push(row);
  }
  return { schema, columns, rows };
}

export function writeCsv(table: Table): string {
  const head = table.schema ? `# ${table.schema}\n` : "";
  const body = [table.columns.join(",")]
    .concat(table.rows.map((r) => table.columns.map((c) => r[c] ?? "").join(",")))
    .join("\r\n");
  return head + body + "\r\n";
}

/** Assert the table carries the expected schema tag and columns. */
export function requireColumns(table: Table, schema: string,
                               needed: string[]): void {
  if (table.schema !== schema) {
    throw new SchemaError(
      `expected schema '${schema}', found '${table.schema || "(none)"}'`);
  }
  const missing = needed.filter((c) => !table.columns.includes(c));
  if (missing.length > 0) {
    throw new SchemaError(`missing columns: ${missing.join(", ")}`);
  }
  if (table.rows.length === 0) {
    throw new SchemaError("CSV contains no data rows");
  }
}

export function num(row: Row, column: string): number {
  const raw = row[column];
  if (raw === undefined || raw === "") return NaN;
  return Number(raw);
}

/** Distinct values of a key column, in first-appearance order. */
export function distinct(rows: Row[], column: string): string[] {
  const seen = new Set<string>();
  const out: string[] = [];
  for (const row of rows) {
    const v = row[column] ?? "";
    if (!seen.has(v)) {
      seen.add(v);
      out.push(v);
    }
  }
  return out;
}
