/**
 * Figure renderers: experiment CSVs in, deterministic SVG out.
 *
 * Four kinds:
 *   selection_prob   summary.csv        probability vs forcing, per indicator
 *   roc              roc_*.csv          ROC curves with the diagonal reference
 *   gini_radius      radius_sweep.csv   Gini vs localization radius
 *   local_cme_strip  two series_*.csv   per-gridpoint mean local-evidence gap
 *
 * Rendering is pure string assembly; inputs are read once and never
 * touched again, so re-rendering the same spec is byte-identical.
 */

import { readFileSync, writeFileSync } from "node:fs";

import {
  SchemaError,
  Table,
  numericColumn,
  column,
  parseCsv,
  requireColumns,
  requireRows,
  tableName,
} from "./csv.js";
import { Svg, divergingColor, frame, legend, px, seriesColor, tickLabel } from "./svg.js";

export const FIGURE_KINDS = ["selection_prob", "roc", "gini_radius", "local_cme_strip"] as const;
export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface FigureSpec {
  kind: FigureKind;
  inputs: string[];
  output: string;
}

const WIDTH = 640;
const HEIGHT = 420;
const MARGINS = { top: 40, right: 150, bottom: 55, left: 65 };

interface Series {
  name: string;
  points: Array<[number, number]>;
}

function drawSeries(
  title: string,
  xLabel: string,
  yLabel: string,
  xDomain: [number, number],
  yDomain: [number, number],
  series: Series[],
): string {
  const svg = new Svg(WIDTH, HEIGHT);
  const f = frame(svg, MARGINS, xDomain, yDomain, xLabel, yLabel, title);
  series.forEach((s, i) => {
    const color = seriesColor(s.name, i);
    svg.polyline(
      s.points.map(([vx, vy]) => [f.x(vx), f.y(vy)]),
      `stroke="${color}" stroke-width="2"`,
    );
    for (const [vx, vy] of s.points) {
      svg.circle(f.x(vx), f.y(vy), 3, `fill="${color}"`);
    }
  });
  legend(
    f,
    series.map((s, i) => [s.name, seriesColor(s.name, i)]),
  );
  return svg.render();
}

function padDomain(values: number[]): [number, number] {
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const pad = (hi - lo || 1) * 0.05;
  return [lo - pad, hi + pad];
}

/** Group summary-style rows into per-key series sorted by x. */
function groupSeries(
  rows: Array<{ key: string; x: number; y: number }>,
): Series[] {
  const byKey = new Map<string, Array<[number, number]>>();
  for (const r of rows) {
    if (!byKey.has(r.key)) byKey.set(r.key, []);
    byKey.get(r.key)!.push([r.x, r.y]);
  }
  const names = [...byKey.keys()].sort();
  return names.map((name) => ({
    name,
    points: byKey.get(name)!.sort((a, b) => a[0] - b[0]),
  }));
}

const SUMMARY_COLUMNS = ["indicator", "F0", "K", "N", "rho_loc", "selection_probability", "gini"];

function summaryRows(tables: Table[], valueColumn: string, xColumn: string) {
  const rows: Array<{ indicator: string; K: string; x: number; y: number }> = [];
  for (const t of tables) {
    requireColumns(t, SUMMARY_COLUMNS);
    requireRows(t);
    const ind = column(t, "indicator");
    const ks = column(t, "K");
    const xs = numericColumn(t, xColumn);
    const ys = numericColumn(t, valueColumn);
    for (let i = 0; i < t.rows.length; i++) {
      rows.push({ indicator: ind[i]!, K: ks[i]!, x: xs[i]!, y: ys[i]! });
    }
  }
  return rows;
}

export function renderSelectionProb(tables: Table[]): string {
  const raw = summaryRows(tables, "selection_probability", "F0");
  const manyK = new Set(raw.map((r) => r.K)).size > 1;
  const series = groupSeries(
    raw.map((r) => ({ key: manyK ? `${r.indicator} K=${r.K}` : r.indicator, x: r.x, y: r.y })),
  );
  const xs = raw.map((r) => r.x);
  const ys = raw.map((r) => r.y);
  return drawSeries(
    "probability of selecting the correct version",
    "incorrect-version forcing F0",
    "selection probability",
    padDomain(xs),
    [Math.min(0, ...ys), 1],
    series,
  );
}

export function renderGiniRadius(tables: Table[]): string {
  const raw = summaryRows(tables, "gini", "rho_loc");
  const manyK = new Set(raw.map((r) => r.K)).size > 1;
  const series = groupSeries(
    raw.map((r) => ({ key: manyK ? `${r.indicator} K=${r.K}` : r.indicator, x: r.x, y: r.y })),
  );
  const xs = raw.map((r) => r.x);
  const ys = raw.map((r) => r.y);
  return drawSeries(
    "Gini score vs localization radius",
    "localization radius rho_loc",
    "Gini score",
    padDomain(xs),
    [Math.min(0, ...ys), 1],
    series,
  );
}

export function renderRoc(tables: Table[]): string {
  const svg = new Svg(WIDTH, HEIGHT);
  const f = frame(
    svg,
    MARGINS,
    [0, 1],
    [0, 1],
    "false positive rate",
    "true positive rate",
    "ROC",
  );
  // Random-classifier reference.
  svg.line(
    f.x(0),
    f.y(0),
    f.x(1),
    f.y(1),
    `stroke="#999" stroke-width="1" stroke-dasharray="5,4" class="diagonal"`,
  );
  const entries: Array<[string, string]> = [];
  tables.forEach((t, i) => {
    requireColumns(t, ["threshold", "FPR", "TPR"]);
    requireRows(t);
    const fpr = numericColumn(t, "FPR");
    const tpr = numericColumn(t, "TPR");
    const color = seriesColor(t.name, i);
    svg.polyline(
      fpr.map((vx, k) => [f.x(vx), f.y(tpr[k]!)]),
      `stroke="${color}" stroke-width="2"`,
    );
    // A curve that touches the perfect-classifier corner gets a marker there.
    if (fpr.some((vx, k) => vx === 0 && tpr[k] === 1)) {
      svg.circle(f.x(0), f.y(1), 5, `fill="none" stroke="${color}" stroke-width="2" class="corner-marker"`);
    }
    entries.push([t.name, color]);
  });
  legend(f, entries);
  return svg.render();
}

export function renderLocalCmeStrip(tables: Table[]): string {
  if (tables.length !== 2) {
    throw new SchemaError(
      `local_cme_strip needs exactly 2 series files (correct first), got ${tables.length}`,
    );
  }
  const locals = tables.map((t) => {
    requireRows(t);
    const cols = t.columns.filter((c) => c.startsWith("log_local_"));
    if (cols.length === 0) {
      throw new SchemaError(
        `${t.name}: missing per-gridpoint columns log_local_*; ` +
          `rerun the experiment with local evidence output enabled`,
      );
    }
    cols.sort((a, b) => Number(a.slice("log_local_".length)) - Number(b.slice("log_local_".length)));
    return cols.map((c) => {
      const vals = numericColumn(t, c);
      return vals.reduce((a, b) => a + b, 0) / vals.length;
    });
  });
  const [first, second] = locals as [number[], number[]];
  if (first.length !== second.length) {
    throw new SchemaError(
      `grid sizes differ: ${tables[0]!.name} has ${first.length} gridpoints, ` +
        `${tables[1]!.name} has ${second.length}`,
    );
  }
  const diff = first.map((v, i) => v - second[i]!);
  const vmax = Math.max(...diff.map(Math.abs)) || 1;
  const tags = tables.map((t) => {
    const tagCol = t.columns.includes("model_tag") ? column(t, "model_tag") : [t.name];
    return tagCol[0] ?? t.name;
  });

  const svg = new Svg(WIDTH, 220);
  const left = 40;
  const right = WIDTH - 40;
  const top = 60;
  const cellH = 48;
  const m = diff.length;
  const cellW = (right - left) / m;
  svg.text(
    (left + right) / 2,
    28,
    `time-mean local log evidence, ${tags[0]} minus ${tags[1]}`,
    `text-anchor="middle" font-size="14" fill="#222"`,
  );
  diff.forEach((v, i) => {
    svg.rect(
      left + i * cellW,
      top,
      cellW,
      cellH,
      `fill="${divergingColor(v / vmax)}" stroke="#444" stroke-width="0.5"`,
    );
  });
  for (let i = 0; i < m; i += Math.max(1, Math.floor(m / 8))) {
    svg.text(left + (i + 0.5) * cellW, top + cellH + 16, String(i), `text-anchor="middle" font-size="10" fill="#222"`);
  }
  svg.text((left + right) / 2, top + cellH + 34, "gridpoint", `text-anchor="middle" font-size="12" fill="#222"`);
  // Scale bar: negative (second wins) to positive (first wins).
  const barY = top + cellH + 52;
  for (let i = 0; i < 40; i++) {
    svg.rect(left + i * 6, barY, 6, 10, `fill="${divergingColor((i / 39) * 2 - 1)}"`);
  }
  svg.text(left, barY + 24, tickLabel(-vmax), `text-anchor="start" font-size="10" fill="#222"`);
  svg.text(left + 120, barY + 24, "0", `text-anchor="middle" font-size="10" fill="#222"`);
  svg.text(left + 240, barY + 24, tickLabel(vmax), `text-anchor="end" font-size="10" fill="#222"`);
  return svg.render();
}

export function renderFigure(kind: FigureKind, tables: Table[]): string {
  if (tables.length === 0) {
    throw new SchemaError("no input files given");
  }
  switch (kind) {
    case "selection_prob":
      return renderSelectionProb(tables);
    case "roc":
      return renderRoc(tables);
    case "gini_radius":
      return renderGiniRadius(tables);
    case "local_cme_strip":
      return renderLocalCmeStrip(tables);
  }
}

/** Read every input table, render the figure, and only then write the output file. */
export function render(spec: FigureSpec): void {
  const tables = spec.inputs.map((path) => parseCsv(readFileSync(path, "utf8"), tableName(path)));
  const svg = renderFigure(spec.kind, tables);
  writeFileSync(spec.output, svg);
}
