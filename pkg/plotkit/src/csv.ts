/**
 * Minimal CSV reading for the experiment output schemas.
 *
 * The upstream writer never quotes or escapes, so a plain split is exact.
 * All schema problems raise SchemaError with the offending columns named,
 * which the CLI surfaces verbatim.
 */

export class SchemaError extends Error {
  override name = "SchemaError";
}

export interface Table {
  /** Identifies the table in diagnostics and legends (basename, no extension). */
  name: string;
  columns: string[];
  rows: string[][];
}

export function tableName(path: string): string {
  const base = path.split("/").pop() ?? path;
  return base.replace(/\.[^.]+$/, "");
}

export function parseCsv(text: string, name: string): Table {
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${name}: file is empty`);
  }
  const columns = lines[0]!.split(",");
  const rows: string[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i]!.split(",");
    if (cells.length !== columns.length) {
      throw new SchemaError(
        `${name}: row ${i} has ${cells.length} cells, header has ${columns.length}`,
      );
    }
    rows.push(cells);
  }
  return { name, columns, rows };
}

export function requireColumns(table: Table, required: string[]): void {
  const missing = required.filter((c) => !table.columns.includes(c));
  if (missing.length > 0) {
    throw new SchemaError(
      `${table.name}: missing column(s) ${missing.join(", ")}; ` +
        `found ${table.columns.join(", ")}`,
    );
  }
}

export function requireRows(table: Table): void {
  if (table.rows.length === 0) {
    throw new SchemaError(`${table.name}: no data rows`);
  }
}

export function column(table: Table, name: string): string[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(`${table.name}: missing column(s) ${name}; found ${table.columns.join(", ")}`);
  }
  return table.rows.map((row) => row[idx]!);
}

export function numericColumn(table: Table, name: string): number[] {
  return column(table, name).map((cell, i) => {
    const v = Number(cell);
    if (Number.isNaN(v) && cell.trim().toLowerCase() !== "nan") {
      throw new SchemaError(`${table.name}: column ${name}, row ${i + 1}: not a number (${cell})`);
    }
    return v;
  });
}
