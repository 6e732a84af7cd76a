/** Minimal CSV reader for the solver's comma-separated outputs. */

export interface Table {
  columns: string[];
  rows: number[][];
}

export class SchemaError extends Error {}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((ln) => ln.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("empty CSV");
  }
  const columns = lines[0].split(",").map((c) => c.trim());
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== columns.length) {
      throw new SchemaError(
        `row ${i} has ${cells.length} cells, expected ${columns.length}`,
      );
    }
    rows.push(cells.map((c) => (c.trim() === "" ? NaN : Number(c))));
  }
  return { columns, rows };
}

/** Column by name; missing columns are schema errors naming the file. */
export function column(table: Table, name: string, source = "csv"): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(
      `${source}: missing column '${name}' (has: ${table.columns.join(", ")})`,
    );
  }
  return table.rows.map((r) => r[idx]);
}
