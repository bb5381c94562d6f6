import { describe, expect, it } from "vitest";

import { renderDeltaView } from "../src/render/delta.js";
import type { DiffResponse } from "../src/types.js";
import { fixture, matchGolden } from "./helpers.js";

const removePool3 = fixture<DiffResponse>("diff-remove-pool3");
const edit1 = fixture<DiffResponse>("diff-stack-edit1");

describe("what-if delta view", () => {
  it("renders the remove-pool3 view byte-identically across runs", () => {
    const first = renderDeltaView(removePool3);
    expect(renderDeltaView(removePool3)).toBe(first);
    matchGolden("remove-pool3-delta.html", first);
  });

  it("badges the classification", () => {
    expect(renderDeltaView(removePool3)).toContain("badge-global");
    expect(renderDeltaView(edit1)).toContain("badge-local");
  });

  it("lists the edit stack in order", () => {
    const html = renderDeltaView(removePool3);
    expect(html).toContain("remove pool3");
  });

  it("shows removed layers explicitly", () => {
    const html = renderDeltaView(removePool3);
    expect(html).toMatch(/removed \(was 1024x96x27x27\)/);
  });

  it("totals carry the multiplier text and absolute values from the response", () => {
    const html = renderDeltaView(removePool3);
    expect(html).toContain(removePool3.totals.flops_mult.text);
    expect(html).toContain(removePool3.modified_totals.formatted.forward_flops);
  });
});
