/** Presentation helpers. The UI never derives quantities: every number it
 * shows arrives pre-computed (and usually pre-formatted) in an API response.
 */

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Human line for one modification, mirroring the wire form. */
export function describeMod(mod: {
  kind: string;
  layer?: string;
  factor?: string;
  filter?: [number, number];
  pad?: [number, number];
  factor_h?: string;
  factor_w?: string;
}): string {
  switch (mod.kind) {
    case "scale_input_channels":
      return `input channels ×${mod.factor}`;
    case "scale_filters":
      return `${mod.layer} filters ×${mod.factor}`;
    case "set_filter_size":
      return `${mod.layer} filter ${mod.filter?.[0]}×${mod.filter?.[1]} pad ${mod.pad?.[0]}×${mod.pad?.[1]}`;
    case "scale_categories":
      return `categories ×${mod.factor}`;
    case "remove_layer":
      return `remove ${mod.layer}`;
    case "scale_input_resolution":
      return `input resolution ×${mod.factor_h}×${mod.factor_w}`;
    default:
      return mod.kind;
  }
}

export const PUBLISHED_MARKER = "published result, not computed";
