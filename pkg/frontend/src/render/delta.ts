/** What-if result view: classification badge, edit list, per-layer
 * multipliers, and totals.
 */

import { describeMod, escapeHtml } from "../format.js";
import type { DiffResponse } from "../types.js";

export function renderDeltaView(diff: DiffResponse): string {
  const lines: string[] = [];
  lines.push('<div class="delta-view">');
  lines.push(
    `<div class="delta-head"><span class="badge badge-${diff.classification}">`
    + `${diff.classification} change</span>`
    + `<span class="baseline">vs ${escapeHtml(diff.baseline)} @ batch ${diff.batch}</span></div>`,
  );
  lines.push('<ol class="edit-stack">');
  for (const mod of diff.mods) {
    lines.push(`<li>${escapeHtml(describeMod(mod))}</li>`);
  }
  lines.push("</ol>");

  lines.push('<table class="delta-table">');
  lines.push("<thead><tr><th>layer</th><th>shape</th>"
    + "<th>Δ output</th><th>Δ params</th><th>Δ flops</th></tr></thead><tbody>");
  for (const row of diff.rows) {
    const changed = row.status !== "both" || row.baseline_shape !== row.modified_shape;
    const shape = row.status === "baseline-only"
      ? `removed (was ${escapeHtml(row.baseline_shape ?? "")})`
      : escapeHtml(row.modified_shape ?? "");
    const cell = (m: { text: string } | null) => escapeHtml(m ? m.text : "-");
    lines.push(
      `<tr class="${changed ? "shape-changed" : ""}">`
      + `<td class="name">${escapeHtml(row.name)}</td>`
      + `<td class="num">${shape}</td>`
      + `<td class="mult">${cell(row.output_mult)}</td>`
      + `<td class="mult">${cell(row.params_mult)}</td>`
      + `<td class="mult">${cell(row.flops_mult)}</td>`
      + "</tr>",
    );
  }
  lines.push("</tbody><tfoot>");
  const m = diff.modified_totals.formatted;
  lines.push(
    '<tr class="totals"><td class="name">total</td><td></td>'
    + `<td class="mult">${escapeHtml(diff.totals.activations_mult.text)}`
    + ` (${escapeHtml(m.data_volume_bytes)})</td>`
    + `<td class="mult">${escapeHtml(diff.totals.params_mult.text)}`
    + ` (${escapeHtml(m.param_bytes)})</td>`
    + `<td class="mult">${escapeHtml(diff.totals.flops_mult.text)}`
    + ` (${escapeHtml(m.forward_flops)})</td></tr>`,
  );
  lines.push("</tfoot></table></div>");
  return lines.join("\n");
}
