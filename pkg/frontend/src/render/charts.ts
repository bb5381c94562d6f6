/** SVG charts rendered as plain strings: a size curve for metaparameter
 * sweeps (with published-figure annotations as labeled points) and a
 * log-x scaling chart for communication/computation/total times.
 *
 * Coordinate mapping is presentation only; every labeled value is taken
 * verbatim from the API response (or from a published annotation, which is
 * always marked as such).
 */

import { escapeHtml, PUBLISHED_MARKER } from "../format.js";
import type { ChartAnnotation, ScaleResponse, SweepResponse } from "../types.js";

const W = 640;
const H = 360;
const PAD = 52;

function x_of(v: number, lo: number, hi: number): string {
  const span = hi - lo || 1;
  return (PAD + ((v - lo) / span) * (W - 2 * PAD)).toFixed(2);
}

function y_of(v: number, lo: number, hi: number): string {
  const span = hi - lo || 1;
  return (H - PAD - ((v - lo) / span) * (H - 2 * PAD)).toFixed(2);
}

function svgOpen(title: string): string {
  return `<svg class="chart" viewBox="0 0 ${W} ${H}" role="img" aria-label="${escapeHtml(title)}">`
    + `<text class="title" x="${W / 2}" y="18" text-anchor="middle">${escapeHtml(title)}</text>`;
}

const EMPTY = '<div class="chart chart-empty">no data</div>';

export function renderSweepChart(sweep: SweepResponse,
                                 annotations: ChartAnnotation[] = []): string {
  if (sweep.points.length === 0) return EMPTY;
  const xs = sweep.points.map((p) => p.value_float);
  const ys = sweep.points.map((p) => p.param_bytes);
  const [xlo, xhi] = [Math.min(...xs), Math.max(...xs)];
  const [ylo, yhi] = [0, Math.max(...ys)];

  const parts: string[] = [svgOpen(`model size vs ${sweep.vary}`)];
  parts.push(`<line class="axis" x1="${PAD}" y1="${H - PAD}" x2="${W - PAD}" y2="${H - PAD}"/>`);
  parts.push(`<line class="axis" x1="${PAD}" y1="${PAD}" x2="${PAD}" y2="${H - PAD}"/>`);
  if (sweep.points.length > 1) {
    const path = sweep.points
      .map((p) => `${x_of(p.value_float, xlo, xhi)},${y_of(p.param_bytes, ylo, yhi)}`)
      .join(" ");
    parts.push(`<polyline class="series size" points="${path}"/>`);
  }
  for (const p of sweep.points) {
    const cx = x_of(p.value_float, xlo, xhi);
    const cy = y_of(p.param_bytes, ylo, yhi);
    parts.push(`<circle class="pt" cx="${cx}" cy="${cy}" r="4"/>`);
    parts.push(`<text class="pt-label" x="${cx}" y="${(Number(cy) - 9).toFixed(2)}" `
      + `text-anchor="middle">${escapeHtml(p.formatted.param_bytes)}</text>`);
    parts.push(`<text class="tick" x="${cx}" y="${H - PAD + 16}" text-anchor="middle">`
      + `${escapeHtml(p.value)}</text>`);
  }
  for (const a of annotations) {
    const cx = x_of(a.at, xlo, xhi);
    parts.push(`<text class="annotation" x="${cx}" y="${PAD + 12}" text-anchor="middle">`
      + `${escapeHtml(a.label)} (${PUBLISHED_MARKER})</text>`);
  }
  parts.push("</svg>");
  return parts.join("\n");
}

export function renderScalingChart(scale: ScaleResponse): string {
  if (scale.curve.length === 0) return EMPTY;
  // log-x: positions by log2 of the worker count
  const xs = scale.curve.map((p) => Math.log2(p.workers));
  const ys = scale.curve.flatMap((p) => [p.comm_s, p.compute_s, p.total_s]);
  const [xlo, xhi] = [Math.min(...xs), Math.max(...xs)];
  const [ylo, yhi] = [0, Math.max(...ys)];

  const series: ["comm" | "compute" | "total", (p: ScaleResponse["curve"][number]) => number][] = [
    ["comm", (p) => p.comm_s],
    ["compute", (p) => p.compute_s],
    ["total", (p) => p.total_s],
  ];
  const parts: string[] = [svgOpen(`per-iteration time vs workers: ${scale.architecture}`)];
  parts.push(`<line class="axis" x1="${PAD}" y1="${H - PAD}" x2="${W - PAD}" y2="${H - PAD}"/>`);
  parts.push(`<line class="axis" x1="${PAD}" y1="${PAD}" x2="${PAD}" y2="${H - PAD}"/>`);
  for (const [label, pick] of series) {
    const path = scale.curve
      .map((p) => `${x_of(Math.log2(p.workers), xlo, xhi)},${y_of(pick(p), ylo, yhi)}`)
      .join(" ");
    parts.push(`<polyline class="series ${label}" points="${path}"/>`);
  }
  for (const p of scale.curve) {
    const cx = x_of(Math.log2(p.workers), xlo, xhi);
    parts.push(`<text class="tick" x="${cx}" y="${H - PAD + 16}" text-anchor="middle">`
      + `${p.workers}</text>`);
  }
  parts.push(`<text class="legend comm" x="${W - PAD}" y="${PAD + 14}" text-anchor="end">comm</text>`);
  parts.push(`<text class="legend compute" x="${W - PAD}" y="${PAD + 30}" text-anchor="end">compute</text>`);
  parts.push(`<text class="legend total" x="${W - PAD}" y="${PAD + 46}" text-anchor="end">total</text>`);
  parts.push(`<text class="note" x="${W - PAD}" y="${H - PAD - 8}" text-anchor="end">`
    + `best speedup at p=${scale.best_workers}</text>`);
  parts.push("</svg>");
  return parts.join("\n");
}
