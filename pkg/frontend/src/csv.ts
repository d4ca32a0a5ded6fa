import { readFileSync } from "node:fs";

export type Column = number[] | string[];

export interface Table {
  names: string[];
  columns: Record<string, Column>;
  rows: number;
}

export function readCsv(path: string): Table {
  const text = readFileSync(path, "utf8");
  const lines = text.split("\n").filter((l) => l.trim().length > 0);
  if (lines.length === 0) throw new Error(`${path}: empty CSV`);
  const names = lines[0].split(",");
  const raw: string[][] = names.map(() => []);
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== names.length) {
      throw new Error(`${path}: row ${i} has ${parts.length} fields, ` +
        `expected ${names.length}`);
    }
    parts.forEach((v, j) => raw[j].push(v));
  }
  const columns: Record<string, Column> = {};
  names.forEach((name, j) => {
    const vals = raw[j];
    const nums = vals.map(Number);
    columns[name] = nums.some(Number.isNaN) &&
      !vals.every((v) => v.trim() === "nan")
      ? vals
      : nums;
  });
  return { names, columns, rows: lines.length - 1 };
}

export function numeric(table: Table, name: string): number[] {
  const col = table.columns[name];
  if (!col) throw new Error(`missing CSV column ${name}`);
  if (typeof col[0] === "string") {
    throw new Error(`CSV column ${name} is not numeric`);
  }
  return col as number[];
}
