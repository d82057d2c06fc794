import * as fs from "fs";
import * as path from "path";

// String(n) is the shortest round-trip decimal form, so readers get back
// the exact double that was written
function formatValue(v: number): string {
  if (!Number.isFinite(v)) throw new Error(`non-finite value ${v} cannot be written`);
  return String(v);
}

export function writeMatrixCsv(file: string, ids: string[], rows: number[][]): void {
  if (ids.length !== rows.length) throw new Error("one id per row is required");
  const width = rows[0]?.length ?? 0;
  const header = ["id", ...Array.from({ length: width }, (_, j) => `n_${j + 1}`)];
  const lines = [header.join(",")];
  rows.forEach((row, i) => {
    if (row.length !== width) throw new Error(`row ${i} has ${row.length} values, expected ${width}`);
    lines.push([ids[i], ...row.map(formatValue)].join(","));
  });
  fs.mkdirSync(path.dirname(file), { recursive: true });
  fs.writeFileSync(file, lines.join("\n") + "\n");
}

export function writePairsCsv(
  file: string,
  header: [string, string],
  pairs: [string, string][],
): void {
  const lines = [header.join(","), ...pairs.map((p) => p.join(","))];
  fs.mkdirSync(path.dirname(file), { recursive: true });
  fs.writeFileSync(file, lines.join("\n") + "\n");
}

/** Minimal reader for the files this package writes (no quoting involved). */
export function readCsv(file: string): string[][] {
  return fs
    .readFileSync(file, "utf-8")
    .split("\n")
    .filter((line) => line.length > 0)
    .map((line) => line.split(","));
}
