/** Shapes of the JSON the workbench API serves. The API is the only contract
 * between this app and the analysis engine; nothing here imports server code.
 */

export interface FormattedTotals {
  param_bytes: string;
  activation_bytes: string;
  data_volume_bytes: string;
  forward_flops: string;
  train_flops_per_batch: string;
}

export interface AnalysisRow {
  name: string;
  kind: string;
  out_channels: number;
  out_hw: string;
  param_bytes: number;
  activation_bytes: number;
  forward_flops: number;
  consumed_bytes: number;
  formatted: {
    param_bytes: string;
    activation_bytes: string;
    forward_flops: string;
  };
}

export interface AnalysisResponse {
  architecture: string;
  batch: number;
  bytes_per_value: number;
  rows: AnalysisRow[];
  totals: {
    param_bytes: number;
    activation_bytes: number;
    data_volume_bytes: number;
    forward_flops: number;
    train_flops_per_batch: number;
    formatted: FormattedTotals;
  };
  data_weight_ratio: string | null;
  annotations?: Record<string, string>;
}

export interface Multiplier {
  text: string;
  decimal: string;
  num: string;
  den: string;
}

export interface DeltaRow {
  name: string;
  status: "both" | "baseline-only" | "modified-only";
  baseline_shape: string | null;
  modified_shape: string | null;
  output_mult: Multiplier | null;
  params_mult: Multiplier | null;
  flops_mult: Multiplier | null;
}

export interface DiffResponse {
  baseline: string;
  modified: string;
  batch: number;
  mods: ModSpec[];
  classification: "local" | "global";
  rows: DeltaRow[];
  totals: {
    flops_mult: Multiplier;
    params_mult: Multiplier;
    activations_mult: Multiplier;
    output_sum_mult: Multiplier;
  };
  baseline_totals: AnalysisResponse["totals"];
  modified_totals: AnalysisResponse["totals"];
}

export type ModSpec =
  | { kind: "scale_input_channels"; factor: string }
  | { kind: "scale_filters"; layer: string; factor: string }
  | { kind: "set_filter_size"; layer: string; filter: [number, number]; pad: [number, number] }
  | { kind: "scale_categories"; factor: string }
  | { kind: "remove_layer"; layer: string }
  | { kind: "scale_input_resolution"; factor_h: string; factor_w: string };

export interface SweepPoint {
  value: string;
  value_float: number;
  architecture: string;
  param_bytes: number;
  forward_flops: number;
  activation_bytes: number;
  formatted: { param_bytes: string };
}

export interface SweepResponse {
  vary: string;
  points: SweepPoint[];
  csv: string;
}

export interface ScalePoint {
  workers: number;
  comm_s: number;
  compute_s: number;
  total_s: number;
  speedup: number;
  ratio: number | null;
  batch_smaller_than_workers: boolean;
}

export interface ScaleResponse {
  architecture: string;
  grad_bytes: number;
  curve: ScalePoint[];
  best_workers: number;
  csv: string;
}

export interface ArchitectureListing {
  architectures: {
    name: string;
    source: "builtin" | "workspace";
    layers: number;
    annotations: Record<string, string>;
  }[];
}

/** A labeled published figure pinned to one x-position of a chart. */
export interface ChartAnnotation {
  at: number;
  label: string;
}
