/** DOM glue: wires the pure renderers to the API client and browser storage.
 * All analysis happens server-side; this file only moves JSON around and
 * injects rendered strings into the page.
 */

import { ApiClient, ApiError } from "./api.js";
import { debounce } from "./debounce.js";
import { describeMod } from "./format.js";
import { renderDeltaView } from "./render/delta.js";
import { renderScalingChart, renderSweepChart } from "./render/charts.js";
import { renderTable } from "./render/table.js";
import {
  SessionState,
  defaultSession,
  diffRequest,
  loadSession,
  popEdit,
  pushEdit,
  saveSession,
} from "./session.js";
import type { ChartAnnotation, DiffResponse, ModSpec } from "./types.js";

const api = new ApiClient("");
let session: SessionState = defaultSession();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setError(id: string, message: string | null): void {
  const node = el(id);
  node.textContent = message ?? "";
  node.classList.toggle("visible", message !== null);
}

function persist(): void {
  saveSession(window.localStorage, session);
}

async function refreshTable(): Promise<void> {
  const analysis = await api.analysis(session.architecture, session.batch);
  el("table-host").innerHTML = renderTable(analysis, session.lastDiff);
  const annotations = analysis.annotations ?? {};
  el("annotations").textContent = Object.keys(annotations).length
    ? Object.entries(annotations).map(([k, v]) => `${k}: ${v}`).join(" · ")
    : "";
}

function renderStack(): void {
  const host = el("stack-host");
  if (session.stack.length === 0) {
    host.innerHTML = '<p class="hint">no pending edits</p>';
    return;
  }
  host.innerHTML = "<ol>"
    + session.stack.map((m) => `<li>${describeMod(m)}</li>`).join("")
    + "</ol>";
}

let inflightDiff: AbortController | null = null;

const requestDiff = debounce(async () => {
  inflightDiff?.abort();
  if (session.stack.length === 0) {
    session.lastDiff = null;
    persist();
    el("delta-host").innerHTML = "";
    await refreshTable();
    return;
  }
  inflightDiff = new AbortController();
  try {
    const diff: DiffResponse = await api.diff(diffRequest(session), inflightDiff.signal);
    session.lastDiff = diff;
    persist();
    setError("whatif-error", null);
    el("delta-host").innerHTML = renderDeltaView(diff);
    await refreshTable();
  } catch (e) {
    if (e instanceof DOMException && e.name === "AbortError") {
      return;  // superseded by a newer edit
    }
    if (e instanceof ApiError) {
      setError("whatif-error", e.field ? `${e.field}: ${e.message}` : e.message);
      session.stack = session.stack.slice(0, -1);  // reject the bad edit
      persist();
      renderStack();
    } else {
      throw e;
    }
  } finally {
    inflightDiff = null;
  }
}, 250);

function readEdit(): ModSpec | null {
  const kind = el<HTMLSelectElement>("edit-kind").value;
  const layer = el<HTMLInputElement>("edit-layer").value.trim();
  const value = el<HTMLInputElement>("edit-value").value.trim();
  switch (kind) {
    case "scale_filters":
      return layer && value ? { kind, layer, factor: value } : null;
    case "remove_layer":
      return layer ? { kind, layer } : null;
    case "scale_input_channels":
    case "scale_categories":
      return value ? { kind, factor: value } : null;
    case "scale_input_resolution": {
      const [h, w] = value.split("x");
      return h && w ? { kind, factor_h: h, factor_w: w } : null;
    }
    case "set_filter_size": {
      const m = value.match(/^(\d+)x(\d+)(?::(\d+)x(\d+))?$/);
      if (!layer || !m) return null;
      return {
        kind,
        layer,
        filter: [Number(m[1]), Number(m[2])],
        pad: [Number(m[3] ?? 0), Number(m[4] ?? 0)],
      };
    }
    default:
      return null;
  }
}

async function runSweep(): Promise<void> {
  const vary = el<HTMLSelectElement>("sweep-vary").value;
  const values = el<HTMLInputElement>("sweep-values").value.split(",").map((v) => v.trim());
  try {
    const sweep = await api.sweep({
      meta: { base_e: 128, incr_e: 128, freq: 2, pct_3x3: 0.5, sr: "1/8" },
      vary,
      values,
    });
    // published sizes for the generated family, marked as reported figures
    const annotations: ChartAnnotation[] = vary === "sr"
      ? [{ at: 0.125, label: "reported 4.8 MB / 80.3% top-5" }]
      : [];
    el("sweep-host").innerHTML = renderSweepChart(sweep, annotations);
    setError("sweep-error", null);
  } catch (e) {
    if (e instanceof ApiError) setError("sweep-error", e.message);
    else throw e;
  }
}

async function runScale(): Promise<void> {
  const workers = el<HTMLInputElement>("scale-workers").value
    .split(",").map((v) => Number(v.trim())).filter((v) => v >= 1);
  session.cluster = {
    workers,
    bandwidth: el<HTMLInputElement>("scale-bw").value.trim(),
    topology: el<HTMLSelectElement>("scale-topology").value,
  };
  persist();
  try {
    const scale = await api.scale({
      arch: session.architecture,
      batch: session.batch,
      cluster: session.cluster,
    });
    el("scale-host").innerHTML = renderScalingChart(scale);
    setError("scale-error", null);
  } catch (e) {
    if (e instanceof ApiError) setError("scale-error", e.message);
    else throw e;
  }
}

async function boot(): Promise<void> {
  session = loadSession(window.localStorage);
  const listing = await api.architectures();
  const selector = el<HTMLSelectElement>("arch-select");
  selector.innerHTML = listing.architectures
    .map((a) => `<option value="${a.name}">${a.name}</option>`)
    .join("");
  selector.value = session.architecture;
  el<HTMLInputElement>("batch-input").value = String(session.batch);

  selector.addEventListener("change", async () => {
    session = { ...session, architecture: selector.value, stack: [], lastDiff: null };
    persist();
    renderStack();
    el("delta-host").innerHTML = "";
    await refreshTable();
  });
  el<HTMLInputElement>("batch-input").addEventListener("change", async (ev) => {
    const batch = Number((ev.target as HTMLInputElement).value);
    if (batch >= 1) {
      session = { ...session, batch, lastDiff: null };
      persist();
      requestDiff();
      await refreshTable();
    }
  });
  el("edit-add").addEventListener("click", () => {
    const mod = readEdit();
    if (!mod) {
      setError("whatif-error", "fill in the edit fields first");
      return;
    }
    session = pushEdit(session, mod);
    persist();
    renderStack();
    requestDiff();
  });
  el("edit-undo").addEventListener("click", () => {
    session = popEdit(session);
    persist();
    renderStack();
    requestDiff();
  });
  el("sweep-run").addEventListener("click", () => void runSweep());
  el("scale-run").addEventListener("click", () => void runScale());

  renderStack();
  if (session.lastDiff) el("delta-host").innerHTML = renderDeltaView(session.lastDiff);
  await refreshTable();
  if (session.stack.length > 0 && !session.lastDiff) requestDiff();
}

window.addEventListener("DOMContentLoaded", () => {
  boot().catch((e) => {
    el("table-host").innerHTML = `<div class="error-banner visible">failed to load: ${String(e)}</div>`;
  });
});
