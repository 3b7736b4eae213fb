/**
 * Reader for the simulator's metrics CSV.
 *
 * Schema: time,window_tasks,atst,entropy_mean,entropy_std,tasks_completed_total
 * The atst field is blank for windows that completed no tasks.
 */

import * as fs from "fs";

export interface MetricsRow {
  time: number;
  windowTasks: number;
  atst: number | null;
  entropyMean: number;
  entropyStd: number;
  tasksCompletedTotal: number;
}

export const REQUIRED_COLUMNS = [
  "time",
  "window_tasks",
  "atst",
  "entropy_mean",
  "entropy_std",
  "tasks_completed_total",
] as const;

export class CsvSchemaError extends Error {}
export class EmptySeriesError extends Error {}

export function parseMetricsCsv(text: string, source: string): MetricsRow[] {
  const lines = text.split(/\r?\n/).filter((line) => line.trim().length > 0);
  if (lines.length === 0) {
    throw new CsvSchemaError(`${source}: empty file`);
  }
  const header = lines[0].split(",").map((h) => h.trim());
  for (const column of REQUIRED_COLUMNS) {
    if (!header.includes(column)) {
      throw new CsvSchemaError(`${source}: metrics CSV missing column: ${column}`);
    }
  }
  const index = new Map(header.map((name, i) => [name, i]));
  const rows: MetricsRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    const field = (name: string) => parts[index.get(name)!] ?? "";
    const atstText = field("atst").trim();
    rows.push({
      time: Number(field("time")),
      windowTasks: Number(field("window_tasks")),
      atst: atstText === "" ? null : Number(atstText),
      entropyMean: Number(field("entropy_mean")),
      entropyStd: Number(field("entropy_std")),
      tasksCompletedTotal: Number(field("tasks_completed_total")),
    });
  }
  if (rows.length === 0) {
    throw new EmptySeriesError(`${source}: empty series`);
  }
  return rows;
}

export function loadMetricsCsv(path: string): MetricsRow[] {
  return parseMetricsCsv(fs.readFileSync(path, "utf-8"), path);
}
