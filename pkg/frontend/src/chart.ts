/**
 * SVG chart builder for run-metric time series.
 *
 * Two figure kinds: "atst" draws one curve per input run (blank windows
 * leave gaps); "entropy" draws each run's mean entropy with a shaded
 * +/- one standard deviation band. Output is a plain SVG string built
 * deterministically from the data, so identical inputs give identical bytes.
 * Every row in the selected time range is rendered; nothing is decimated.
 */

import { MetricsRow, EmptySeriesError } from "./csv";

export type SeriesKind = "atst" | "entropy";

export interface LabeledRun {
  label: string;
  rows: MetricsRow[];
}

export interface ChartOptions {
  series: SeriesKind;
  tMax?: number;
  logY?: boolean;
  width?: number;
  height?: number;
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

const MARGIN = { top: 40, right: 30, bottom: 55, left: 75 };

function fmt(x: number): string {
  return Number(x.toFixed(3)).toString();
}

/** Tick positions covering [lo, hi] at a 1/2/5 step. */
export function niceTicks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) {
    hi = lo + 1;
  }
  const rawStep = (hi - lo) / Math.max(count - 1, 1);
  const power = Math.pow(10, Math.floor(Math.log10(rawStep)));
  let step = power;
  for (const mult of [1, 2, 5, 10]) {
    step = mult * power;
    if (step >= rawStep) break;
  }
  const first = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = first; v <= hi + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

interface Point {
  t: number;
  y: number;
  std: number; // 0 for atst series
}

/** Contiguous segments of plottable windows; blank windows break the line. */
function segments(run: LabeledRun, kind: SeriesKind, tMax: number): Point[][] {
  const out: Point[][] = [];
  let current: Point[] = [];
  for (const row of run.rows) {
    if (row.time > tMax) continue;
    const y = kind === "atst" ? row.atst : row.entropyMean;
    if (y === null || Number.isNaN(y)) {
      if (current.length > 0) out.push(current);
      current = [];
    } else {
      current.push({ t: row.time, y, std: kind === "entropy" ? row.entropyStd : 0 });
    }
  }
  if (current.length > 0) out.push(current);
  return out;
}

export function renderChartSvg(runs: LabeledRun[], options: ChartOptions): string {
  if (runs.length === 0) {
    throw new EmptySeriesError("empty series: no inputs");
  }
  const kind = options.series;
  const width = options.width ?? 960;
  const height = options.height ?? 540;
  const logY = options.logY ?? false;
  const tMax =
    options.tMax ?? Math.max(...runs.map((r) => Math.max(...r.rows.map((x) => x.time))));

  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  const segmentsByRun = runs.map((run) => segments(run, kind, tMax));

  let yLo = Infinity;
  let yHi = -Infinity;
  let anyPoint = false;
  for (const segs of segmentsByRun) {
    for (const seg of segs) {
      for (const p of seg) {
        anyPoint = true;
        yLo = Math.min(yLo, p.y - p.std);
        yHi = Math.max(yHi, p.y + p.std);
      }
    }
  }
  if (!anyPoint) {
    throw new EmptySeriesError(`empty series: no plottable ${kind} values below t=${tMax}`);
  }
  if (logY) {
    if (yLo <= 0) {
      let minPositive = Infinity;
      for (const segs of segmentsByRun)
        for (const seg of segs)
          for (const p of seg) if (p.y > 0) minPositive = Math.min(minPositive, p.y);
      yLo = minPositive / 2;
    }
    yHi = yHi * 1.05;
  } else {
    yLo = Math.min(yLo, 0);
    yHi = yHi * 1.05 || 1;
  }

  const x = (t: number) => MARGIN.left + (t / tMax) * plotW;
  const y = logY
    ? (v: number) =>
        MARGIN.top +
        plotH -
        ((Math.log10(v) - Math.log10(yLo)) / (Math.log10(yHi) - Math.log10(yLo))) * plotH
    : (v: number) => MARGIN.top + plotH - ((v - yLo) / (yHi - yLo)) * plotH;
  const yClamped = (v: number) => y(logY ? Math.max(v, yLo) : v);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);

  // grid, ticks, frame
  const xTicks = niceTicks(0, tMax, 7).filter((t) => t <= tMax);
  const yTicks = logY ? logTicks(yLo, yHi) : niceTicks(yLo, yHi, 6).filter((v) => v <= yHi);
  for (const t of xTicks) {
    const px = x(t);
    parts.push(
      `<line x1="${fmt(px)}" y1="${MARGIN.top}" x2="${fmt(px)}" y2="${MARGIN.top + plotH}" stroke="#dddddd"/>`
    );
    parts.push(
      `<text x="${fmt(px)}" y="${MARGIN.top + plotH + 20}" text-anchor="middle" font-size="12">${tickLabel(t)}</text>`
    );
  }
  for (const v of yTicks) {
    const py = y(v);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${fmt(py)}" x2="${MARGIN.left + plotW}" y2="${fmt(py)}" stroke="#dddddd"/>`
    );
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${fmt(py + 4)}" text-anchor="end" font-size="12">${tickLabel(v)}</text>`
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#333333"/>`
  );

  // series: bands first so no line is hidden
  if (kind === "entropy") {
    segmentsByRun.forEach((segs, i) => {
      const color = PALETTE[i % PALETTE.length];
      for (const seg of segs) {
        if (seg.length < 2) continue;
        const upper = seg.map((p) => `${fmt(x(p.t))},${fmt(yClamped(p.y + p.std))}`);
        const lower = seg
          .slice()
          .reverse()
          .map((p) => `${fmt(x(p.t))},${fmt(yClamped(p.y - p.std))}`);
        parts.push(
          `<polygon points="${upper.join(" ")} ${lower.join(" ")}" fill="${color}" fill-opacity="0.18" stroke="none" class="std-band"/>`
        );
      }
    });
  }
  segmentsByRun.forEach((segs, i) => {
    const color = PALETTE[i % PALETTE.length];
    for (const seg of segs) {
      if (seg.length === 1) {
        const p = seg[0];
        parts.push(
          `<circle cx="${fmt(x(p.t))}" cy="${fmt(y(p.y))}" r="2" fill="${color}" class="series-point"/>`
        );
        continue;
      }
      const pts = seg.map((p) => `${fmt(x(p.t))},${fmt(y(p.y))}`).join(" ");
      parts.push(
        `<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="1.6" class="series-line"/>`
      );
    }
  });

  // titles and legend
  const yTitle = kind === "atst" ? "ATST (time units)" : "policy entropy (bits)";
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${height - 14}" text-anchor="middle" font-size="14">time</text>`
  );
  parts.push(
    `<text x="20" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="14" ` +
      `transform="rotate(-90 20 ${MARGIN.top + plotH / 2})">${yTitle}</text>`
  );
  runs.forEach((run, i) => {
    const color = PALETTE[i % PALETTE.length];
    const lx = MARGIN.left + plotW - 170;
    const ly = MARGIN.top + 14 + i * 20;
    parts.push(`<rect x="${lx}" y="${ly - 10}" width="14" height="14" fill="${color}"/>`);
    parts.push(
      `<text x="${lx + 20}" y="${ly + 2}" font-size="13" class="legend-label">${escapeXml(run.label)}</text>`
    );
  });

  parts.push("</svg>");
  return parts.join("\n");
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.floor(Math.log10(lo)); e <= Math.ceil(Math.log10(hi)); e++) {
    const v = Math.pow(10, e);
    if (v >= lo && v <= hi) ticks.push(v);
  }
  return ticks.length >= 2 ? ticks : [lo, hi];
}

function tickLabel(v: number): string {
  if (Math.abs(v) >= 10000) {
    return `${Number((v / 1000).toFixed(1))}k`;
  }
  return Number(v.toFixed(4)).toString();
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
