/** Architecture table view: one row per layer with the derived dimensions
 * and quantities, a totals row, and (when a diff is active) per-layer
 * delta columns with changed rows highlighted.
 */

import { escapeHtml } from "../format.js";
import type { AnalysisResponse, DiffResponse, DeltaRow } from "../types.js";

function deltaFor(diff: DiffResponse | null, layer: string): DeltaRow | null {
  if (!diff) return null;
  return diff.rows.find((r) => r.name === layer) ?? null;
}

function deltaCells(row: DeltaRow | null): string {
  if (row === null) {
    // empty modification stack: everything is unchanged by definition
    return '<td class="mult">1x</td><td class="mult">1x</td><td class="mult">1x</td>';
  }
  if (row.status !== "both") {
    const tag = row.status === "baseline-only" ? "removed" : "added";
    return `<td class="mult ${tag}" colspan="3">${tag}</td>`;
  }
  const cell = (m: { text: string } | null) =>
    `<td class="mult${m && m.text !== "1.0x" ? " changed" : ""}">${m ? escapeHtml(m.text) : "-"}</td>`;
  return cell(row.output_mult) + cell(row.params_mult) + cell(row.flops_mult);
}

function rowShapeChanged(row: DeltaRow | null): boolean {
  if (!row) return false;
  if (row.status !== "both") return true;
  return row.baseline_shape !== row.modified_shape;
}

export function renderTable(analysis: AnalysisResponse, diff: DiffResponse | null = null): string {
  const lines: string[] = [];
  lines.push('<table class="arch-table">');
  lines.push("<thead><tr>"
    + "<th>layer</th><th>out ch</th><th>out H×W</th>"
    + "<th>output</th><th>params</th><th>flops</th>"
    + "<th>Δ output</th><th>Δ params</th><th>Δ flops</th>"
    + "</tr></thead>");
  lines.push("<tbody>");
  for (const row of analysis.rows) {
    const delta = deltaFor(diff, row.name);
    const classes = ["layer-row"];
    if (rowShapeChanged(delta)) classes.push("shape-changed");
    lines.push(
      `<tr class="${classes.join(" ")}">`
      + `<td class="name">${escapeHtml(row.name)}</td>`
      + `<td class="num">${row.out_channels}</td>`
      + `<td class="num">${escapeHtml(row.out_hw)}</td>`
      + `<td class="num">${escapeHtml(row.formatted.activation_bytes)}</td>`
      + `<td class="num">${escapeHtml(row.formatted.param_bytes)}</td>`
      + `<td class="num">${escapeHtml(row.formatted.forward_flops)}</td>`
      + deltaCells(delta)
      + "</tr>",
    );
  }
  lines.push("</tbody>");
  const t = analysis.totals.formatted;
  const dTotals = diff
    ? `<td class="mult">${escapeHtml(diff.totals.activations_mult.text)}</td>`
      + `<td class="mult">${escapeHtml(diff.totals.params_mult.text)}</td>`
      + `<td class="mult">${escapeHtml(diff.totals.flops_mult.text)}</td>`
    : '<td class="mult">1x</td><td class="mult">1x</td><td class="mult">1x</td>';
  lines.push("<tfoot>");
  lines.push(
    '<tr class="totals">'
    + `<td class="name">total</td><td></td><td></td>`
    + `<td class="num">${escapeHtml(t.data_volume_bytes)}</td>`
    + `<td class="num">${escapeHtml(t.param_bytes)}</td>`
    + `<td class="num">${escapeHtml(t.forward_flops)}</td>`
    + dTotals
    + "</tr>",
  );
  lines.push(
    '<tr class="totals-aux"><td class="name">all layer outputs</td><td></td><td></td>'
    + `<td class="num">${escapeHtml(t.activation_bytes)}</td>`
    + `<td colspan="5" class="note">batch ${analysis.batch}; `
    + `forward+backward ${escapeHtml(t.train_flops_per_batch)}`
    + (analysis.data_weight_ratio
      ? `; data/weight ratio ${escapeHtml(analysis.data_weight_ratio)}`
      : "")
    + "</td></tr>",
  );
  lines.push("</tfoot></table>");
  return lines.join("\n");
}
