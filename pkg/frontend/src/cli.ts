#!/usr/bin/env node
/**
 * plot - render figures from simulator metrics CSVs.
 *
 *   plot --series atst|entropy --in FILE:LABEL [--in FILE:LABEL ...]
 *        --out FILE [--t-max N] [--log-y]
 *
 * PNG output by default; a .svg output path writes the vector form.
 * Exit codes: 0 success, 1 bad arguments or bad input data, 2 I/O failure.
 */

import * as fs from "fs";
import * as path from "path";

import { CsvSchemaError, EmptySeriesError, loadMetricsCsv } from "./csv";
import { ChartOptions, LabeledRun, renderChartSvg, SeriesKind } from "./chart";

export interface PlotSpec {
  series: SeriesKind;
  inputs: { path: string; label: string }[];
  out: string;
  tMax?: number;
  logY: boolean;
}

export class UsageError extends Error {}

export function parseArgs(argv: string[]): PlotSpec {
  const spec: Partial<PlotSpec> & { inputs: { path: string; label: string }[] } = {
    inputs: [],
    logY: false,
  };
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      if (i + 1 >= argv.length) throw new UsageError(`${arg} expects a value`);
      return argv[++i];
    };
    switch (arg) {
      case "--series": {
        const v = next();
        if (v !== "atst" && v !== "entropy") {
          throw new UsageError(`--series must be atst or entropy, got ${v}`);
        }
        spec.series = v;
        break;
      }
      case "--in": {
        const v = next();
        const colon = v.lastIndexOf(":");
        if (colon > 0 && colon < v.length - 1) {
          spec.inputs.push({ path: v.slice(0, colon), label: v.slice(colon + 1) });
        } else {
          spec.inputs.push({ path: v, label: path.basename(v, path.extname(v)) });
        }
        break;
      }
      case "--out":
        spec.out = next();
        break;
      case "--t-max": {
        const v = Number(next());
        if (!Number.isFinite(v) || v <= 0) throw new UsageError(`--t-max must be > 0`);
        spec.tMax = v;
        break;
      }
      case "--log-y":
        spec.logY = true;
        break;
      default:
        throw new UsageError(`unknown argument: ${arg}`);
    }
  }
  if (!spec.series) throw new UsageError("--series is required (atst or entropy)");
  if (spec.inputs.length === 0) throw new UsageError("at least one --in FILE:LABEL is required");
  if (!spec.out) throw new UsageError("--out is required");
  return spec as PlotSpec;
}

export async function renderSpec(spec: PlotSpec): Promise<void> {
  const runs: LabeledRun[] = spec.inputs.map((input) => ({
    label: input.label,
    rows: loadMetricsCsv(input.path),
  }));
  const options: ChartOptions = { series: spec.series, tMax: spec.tMax, logY: spec.logY };
  const svg = renderChartSvg(runs, options);
  if (spec.out.toLowerCase().endsWith(".svg")) {
    fs.writeFileSync(spec.out, svg, "utf-8");
    return;
  }
  const sharp = (await import("sharp")).default;
  await sharp(Buffer.from(svg)).png().toFile(spec.out);
}

export async function main(argv: string[]): Promise<number> {
  let spec: PlotSpec;
  try {
    spec = parseArgs(argv);
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`usage error: ${err.message}`);
      return 1;
    }
    throw err;
  }
  try {
    await renderSpec(spec);
  } catch (err) {
    if (err instanceof CsvSchemaError || err instanceof EmptySeriesError || err instanceof UsageError) {
      console.error(String(err instanceof Error ? err.message : err));
      return 1;
    }
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 2;
  }
  console.log(`wrote ${spec.out}`);
  return 0;
}

if (require.main === module) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
