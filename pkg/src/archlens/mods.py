"""Declarative architecture modifications and delta reports.

A ModSpec describes one edit (scale a layer's filter count, resize a filter,
remove a layer, ...). `apply_mod` returns a new architecture; `diff` compares
two architectures layer by layer and classifies the change as local (the
dimension change damps out) or global (it propagates down the network).

The classification is structural, not keyed on modification kind: a change is
global when it alters the spatial size flowing out of the input layer or out
of any striding layer, or when a striding layer itself appears/disappears.
Anything else is local, including filter-count or channel changes and spatial
wiggles that the next downsampling layer reabsorbs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Union

from .arch import Architecture, ArchitectureError, LayerKind, LayerSpec
from .accounting import AccountingReport, analyze

__all__ = [
    "ScaleInputChannels", "ScaleFilters", "SetFilterSize", "ScaleCategories",
    "RemoveLayer", "ScaleInputResolution", "ModSpec",
    "DeltaRow", "DeltaReport", "apply_mod", "diff",
    "mod_from_dict", "mod_to_dict", "parse_inline_mod",
]


def _as_fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


def _scaled_count(value: int, factor: Fraction, what: str) -> tuple[int, bool]:
    """Scale a count; round half-up to the nearest positive integer.

    Returns (new value, rounding occurred).
    """
    exact = value * factor
    rounded = int((exact + Fraction(1, 2)).__floor__())
    if rounded < 1:
        raise ArchitectureError(f"{what}: factor {factor} yields a non-positive dimension")
    return rounded, rounded != exact


@dataclass(frozen=True)
class ScaleInputChannels:
    factor: Fraction

    def __post_init__(self):
        object.__setattr__(self, "factor", _as_fraction(self.factor))
        if self.factor <= 0:
            raise ArchitectureError("factor must be positive")


@dataclass(frozen=True)
class ScaleFilters:
    layer: str
    factor: Fraction

    def __post_init__(self):
        object.__setattr__(self, "factor", _as_fraction(self.factor))
        if self.factor <= 0:
            raise ArchitectureError("factor must be positive")


@dataclass(frozen=True)
class SetFilterSize:
    layer: str
    new_h: int
    new_w: int
    new_pad_h: int
    new_pad_w: int

    def __post_init__(self):
        if self.new_h < 1 or self.new_w < 1:
            raise ArchitectureError("filter size must be positive")
        if self.new_pad_h < 0 or self.new_pad_w < 0:
            raise ArchitectureError("padding must be non-negative")


@dataclass(frozen=True)
class ScaleCategories:
    factor: Fraction

    def __post_init__(self):
        object.__setattr__(self, "factor", _as_fraction(self.factor))
        if self.factor <= 0:
            raise ArchitectureError("factor must be positive")


@dataclass(frozen=True)
class RemoveLayer:
    layer: str


@dataclass(frozen=True)
class ScaleInputResolution:
    factor_h: Fraction
    factor_w: Fraction

    def __post_init__(self):
        object.__setattr__(self, "factor_h", _as_fraction(self.factor_h))
        object.__setattr__(self, "factor_w", _as_fraction(self.factor_w))
        if self.factor_h <= 0 or self.factor_w <= 0:
            raise ArchitectureError("resolution factors must be positive")


ModSpec = Union[ScaleInputChannels, ScaleFilters, SetFilterSize,
                ScaleCategories, RemoveLayer, ScaleInputResolution]


def _require_layer(arch: Architecture, name: str) -> LayerSpec:
    if name not in arch:
        raise ArchitectureError(f"{arch.name}: no layer named {name!r}")
    return arch.layer(name)


def _final_filtered_layer(arch: Architecture) -> LayerSpec:
    """Last parameterized layer on the path to the output: the classifier,
    whose filter count equals the number of categories."""
    last = None
    for layer in arch.topo_order:
        if layer.is_parameterized:
            last = layer
    if last is None:
        raise ArchitectureError(f"{arch.name}: no parameterized layer to rewrite")
    return last


ROUNDING_FLAG = "dimension_rounding"


def _flag_rounding(arch: Architecture, notes: list[str]) -> Architecture:
    """Record inexact dimension scaling in the architecture's metadata."""
    if not notes:
        return arch
    merged = dict(arch.metadata)
    existing = merged.get(ROUNDING_FLAG)
    merged[ROUNDING_FLAG] = "; ".join(([existing] if existing else []) + notes)
    return Architecture(arch.name, arch.input_shape, arch.layers, merged)


def _note(rounded: bool, what: str, exact: Fraction, value: int) -> list[str]:
    return [f"{what}: {exact} rounded to {value}"] if rounded else []


def apply_mod(arch: Architecture, mod: ModSpec) -> Architecture:
    """Apply one modification, returning a new architecture (input untouched).

    Fractional factors that force rounding leave a note under the
    `dimension_rounding` metadata key of the result.
    """
    if isinstance(mod, ScaleInputChannels):
        new_ch, rounded = _scaled_count(arch.input_shape.channels, mod.factor, "input channels")
        out = arch.with_layers(arch.layers,
                               input_shape=replace(arch.input_shape, channels=new_ch))
        return _flag_rounding(out, _note(rounded, "input channels",
                                         arch.input_shape.channels * mod.factor, new_ch))

    if isinstance(mod, ScaleInputResolution):
        new_h, r1 = _scaled_count(arch.input_shape.height, mod.factor_h, "input height")
        new_w, r2 = _scaled_count(arch.input_shape.width, mod.factor_w, "input width")
        out = arch.with_layers(arch.layers,
                               input_shape=replace(arch.input_shape, height=new_h, width=new_w))
        notes = _note(r1, "input height", arch.input_shape.height * mod.factor_h, new_h) + \
            _note(r2, "input width", arch.input_shape.width * mod.factor_w, new_w)
        return _flag_rounding(out, notes)

    if isinstance(mod, ScaleFilters):
        target = _require_layer(arch, mod.layer)
        if not target.is_parameterized:
            raise ArchitectureError(f"{mod.layer}: cannot scale filters of a {target.kind.value} layer")
        new_filters, rounded = _scaled_count(target.num_filters, mod.factor, mod.layer)  # type: ignore[arg-type]
        new_layers = tuple(
            replace(l, num_filters=new_filters) if l.name == mod.layer else l
            for l in arch.layers
        )
        out = arch.with_layers(new_layers)
        return _flag_rounding(out, _note(rounded, f"{mod.layer} filters",
                                         target.num_filters * mod.factor, new_filters))

    if isinstance(mod, SetFilterSize):
        target = _require_layer(arch, mod.layer)
        if target.kind is not LayerKind.CONVOLUTION:
            raise ArchitectureError(f"{mod.layer}: filter size can only be set on a convolution")
        new_layers = tuple(
            replace(l, filter_h=mod.new_h, filter_w=mod.new_w,
                    pad_h=mod.new_pad_h, pad_w=mod.new_pad_w)
            if l.name == mod.layer else l
            for l in arch.layers
        )
        return arch.with_layers(new_layers)

    if isinstance(mod, ScaleCategories):
        target = _final_filtered_layer(arch)
        return apply_mod(arch, ScaleFilters(target.name, mod.factor))

    if isinstance(mod, RemoveLayer):
        target = _require_layer(arch, mod.layer)
        if target.kind is LayerKind.INPUT:
            raise ArchitectureError(f"{mod.layer}: cannot remove the input layer")
        if len(target.predecessors) != 1:
            raise ArchitectureError(f"{mod.layer}: can only remove layers with exactly one predecessor")
        if arch.final_layer().name == mod.layer:
            raise ArchitectureError(f"{mod.layer}: cannot remove the final layer")
        source = target.predecessors[0]
        new_layers = tuple(
            replace(l, predecessors=tuple(source if p == mod.layer else p for p in l.predecessors))
            for l in arch.layers
            if l.name != mod.layer
        )
        return arch.with_layers(new_layers)

    raise ArchitectureError(f"unknown modification: {mod!r}")


# ---------------------------------------------------------------------------
# Delta report


def _ratio(modified: int, baseline: int) -> Fraction | None:
    if baseline == 0 and modified == 0:
        return None
    if baseline == 0:
        return None
    return Fraction(modified, baseline)


@dataclass(frozen=True)
class DeltaRow:
    name: str
    status: str  # both | baseline-only | modified-only
    output_mult: Fraction | None
    params_mult: Fraction | None
    flops_mult: Fraction | None
    baseline_shape: str | None
    modified_shape: str | None


@dataclass(frozen=True)
class DeltaReport:
    baseline: AccountingReport
    modified: AccountingReport
    rows: tuple[DeltaRow, ...]
    classification: str  # local | global

    @property
    def params_mult(self) -> Fraction:
        return Fraction(self.modified.param_bytes, self.baseline.param_bytes)

    @property
    def flops_mult(self) -> Fraction:
        return Fraction(self.modified.forward_flops, self.baseline.forward_flops)

    @property
    def activations_mult(self) -> Fraction:
        """Ratio of data volumes (activations consumed by parameterized layers)."""
        return Fraction(self.modified.data_volume_bytes, self.baseline.data_volume_bytes)

    @property
    def output_sum_mult(self) -> Fraction:
        """Ratio of summed layer-output bytes (all layers)."""
        return Fraction(self.modified.activation_bytes, self.baseline.activation_bytes)


def _spatial_changed(a, b) -> bool:
    return (a.height, a.width) != (b.height, b.width)


def classify(baseline: Architecture, modified: Architecture,
             base_report: AccountingReport, mod_report: AccountingReport) -> str:
    """Structural local/global classification (see module docstring)."""
    base_shapes = base_report.shapes()
    mod_shapes = mod_report.shapes()
    base_layers = {l.name: l for l in baseline.layers}
    mod_layers = {l.name: l for l in modified.layers}

    for name in base_layers.keys() | mod_layers.keys():
        b, m = base_layers.get(name), mod_layers.get(name)
        if b is None or m is None:
            if (b or m).downsamples:  # type: ignore[union-attr]
                return "global"
            continue
        if b.kind is LayerKind.INPUT or b.downsamples or m.downsamples:
            if _spatial_changed(base_shapes[name], mod_shapes[name]):
                return "global"
    return "local"


def diff(baseline: Architecture, modified: Architecture, batch: int,
         bytes_per_value: int = 4, include_bias: bool = True) -> DeltaReport:
    """Per-layer multiplier table comparing `modified` against `baseline`."""
    base_report = analyze(baseline, batch, bytes_per_value, include_bias)
    mod_report = analyze(modified, batch, bytes_per_value, include_bias)
    base_rows = {r.name: r for r in base_report.rows}
    mod_rows = {r.name: r for r in mod_report.rows}

    rows: list[DeltaRow] = []
    seen: set[str] = set()
    for source in (base_report.rows, mod_report.rows):
        for r in source:
            if r.name in seen:
                continue
            seen.add(r.name)
            b, m = base_rows.get(r.name), mod_rows.get(r.name)
            if b is not None and m is not None:
                rows.append(DeltaRow(
                    name=r.name, status="both",
                    output_mult=_ratio(m.activation_bytes, b.activation_bytes),
                    params_mult=_ratio(m.param_bytes, b.param_bytes),
                    flops_mult=_ratio(m.forward_flops, b.forward_flops),
                    baseline_shape=str(b.out_shape), modified_shape=str(m.out_shape),
                ))
            elif b is not None:
                rows.append(DeltaRow(r.name, "baseline-only", None, None, None,
                                     str(b.out_shape), None))
            else:
                rows.append(DeltaRow(r.name, "modified-only", None, None, None,
                                     None, str(m.out_shape)))  # type: ignore[union-attr]

    return DeltaReport(
        baseline=base_report,
        modified=mod_report,
        rows=tuple(rows),
        classification=classify(baseline, modified, base_report, mod_report),
    )


# ---------------------------------------------------------------------------
# Wire / CLI forms


_MOD_KINDS = {
    "scale_input_channels": ScaleInputChannels,
    "scale_filters": ScaleFilters,
    "set_filter_size": SetFilterSize,
    "scale_categories": ScaleCategories,
    "remove_layer": RemoveLayer,
    "scale_input_resolution": ScaleInputResolution,
}


def mod_to_dict(mod: ModSpec) -> dict:
    if isinstance(mod, ScaleInputChannels):
        return {"kind": "scale_input_channels", "factor": str(mod.factor)}
    if isinstance(mod, ScaleFilters):
        return {"kind": "scale_filters", "layer": mod.layer, "factor": str(mod.factor)}
    if isinstance(mod, SetFilterSize):
        return {"kind": "set_filter_size", "layer": mod.layer,
                "filter": [mod.new_h, mod.new_w], "pad": [mod.new_pad_h, mod.new_pad_w]}
    if isinstance(mod, ScaleCategories):
        return {"kind": "scale_categories", "factor": str(mod.factor)}
    if isinstance(mod, RemoveLayer):
        return {"kind": "remove_layer", "layer": mod.layer}
    if isinstance(mod, ScaleInputResolution):
        return {"kind": "scale_input_resolution",
                "factor_h": str(mod.factor_h), "factor_w": str(mod.factor_w)}
    raise ArchitectureError(f"unknown modification: {mod!r}")


def _parse_factor(value, where: str) -> Fraction:
    try:
        if isinstance(value, str):
            return Fraction(value)
        return _as_fraction(value)
    except (ValueError, ZeroDivisionError, TypeError):
        raise ArchitectureError(f"{where}: not a valid factor: {value!r}") from None


def mod_from_dict(doc: dict) -> ModSpec:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ArchitectureError("modification must be an object with a 'kind' field")
    kind = doc["kind"]
    if kind not in _MOD_KINDS:
        raise ArchitectureError(
            f"unknown modification kind {kind!r}; expected one of {', '.join(sorted(_MOD_KINDS))}"
        )
    try:
        if kind == "scale_input_channels":
            return ScaleInputChannels(_parse_factor(doc["factor"], kind))
        if kind == "scale_filters":
            return ScaleFilters(str(doc["layer"]), _parse_factor(doc["factor"], kind))
        if kind == "set_filter_size":
            filt = doc["filter"]
            pad = doc.get("pad", [0, 0])
            return SetFilterSize(str(doc["layer"]), int(filt[0]), int(filt[1]),
                                 int(pad[0]), int(pad[1]))
        if kind == "scale_categories":
            return ScaleCategories(_parse_factor(doc["factor"], kind))
        if kind == "remove_layer":
            return RemoveLayer(str(doc["layer"]))
        return ScaleInputResolution(_parse_factor(doc["factor_h"], kind),
                                    _parse_factor(doc["factor_w"], kind))
    except KeyError as e:
        raise ArchitectureError(f"{kind}: missing field {e.args[0]!r}") from None
    except (TypeError, IndexError):
        raise ArchitectureError(f"{kind}: malformed fields in {doc!r}") from None


def parse_inline_mod(text: str) -> ModSpec:
    """Compact CLI form, e.g. 'remove:pool3', 'scale-filters:conv8:4',
    'filter-size:conv7:6x6:2x2', 'input-channels:4', 'categories:4',
    'input-resolution:2x2'."""
    parts = text.split(":")
    tag = parts[0]
    try:
        if tag in ("remove", "remove-layer") and len(parts) == 2:
            return RemoveLayer(parts[1])
        if tag in ("scale-filters", "filters") and len(parts) == 3:
            return ScaleFilters(parts[1], _parse_factor(parts[2], text))
        if tag in ("filter-size", "set-filter-size") and len(parts) in (3, 4):
            h, w = parts[2].split("x")
            ph, pw = parts[3].split("x") if len(parts) == 4 else ("0", "0")
            return SetFilterSize(parts[1], int(h), int(w), int(ph), int(pw))
        if tag in ("input-channels", "scale-input-channels") and len(parts) == 2:
            return ScaleInputChannels(_parse_factor(parts[1], text))
        if tag in ("categories", "scale-categories") and len(parts) == 2:
            return ScaleCategories(_parse_factor(parts[1], text))
        if tag in ("input-resolution", "scale-input-resolution") and len(parts) == 2:
            fh, fw = parts[1].split("x")
            return ScaleInputResolution(_parse_factor(fh, text), _parse_factor(fw, text))
    except (ValueError, ArchitectureError) as e:
        raise ArchitectureError(f"cannot parse modification {text!r}: {e}") from None
    raise ArchitectureError(
        f"cannot parse modification {text!r}; expected forms like remove:pool3, "
        "scale-filters:conv8:4, filter-size:conv7:6x6:2x2, input-channels:4, "
        "categories:4, input-resolution:2x2"
    )
