"""Fire-module construction and metaparameter-driven architecture generation.

A Fire module is a 1x1 squeeze convolution feeding two parallel expand
convolutions (1x1, and 3x3 with pad 1) whose outputs concatenate along the
channel axis. A family of networks is generated from six metaparameters;
the defaults reproduce the published SqueezeNet dimensions exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction

from .arch import (
    Architecture,
    ArchitectureError,
    LayerKind,
    LayerSpec,
    TensorShape,
    concat,
    conv,
    elementwise_add,
    global_avg_pool,
    input_layer,
    pool_max,
)
from .accounting import AccountingReport, analyze

__all__ = [
    "FireSpec",
    "FireMeta",
    "HeadTailConfig",
    "BypassVariant",
    "SweepPoint",
    "generate",
    "fire_layers",
    "sweep",
    "with_bypass",
    "count_design_space",
    "DESIGN_SPACE_NOTE",
    "sweep_csv",
]


def _round_half_up(x: Fraction) -> int:
    return int((x + Fraction(1, 2)).__floor__())


@dataclass(frozen=True)
class FireSpec:
    """Filter counts of one Fire module.

    The design rule keeps squeeze strictly below the expand total so the
    squeeze layer bottlenecks the 3x3 inputs; equality is tolerated because
    the published squeeze-ratio sweep runs all the way to SR = 1.0.
    """

    s1x1: int
    e1x1: int
    e3x3: int

    def __post_init__(self) -> None:
        if self.s1x1 < 1:
            raise ArchitectureError(f"squeeze filters must be >= 1, got {self.s1x1}")
        if self.e1x1 < 0 or self.e3x3 < 0:
            raise ArchitectureError("expand filter counts must be >= 0")
        if self.s1x1 > self.e1x1 + self.e3x3:
            raise ArchitectureError(
                f"squeeze filters ({self.s1x1}) must not exceed expand filters "
                f"({self.e1x1}+{self.e3x3})"
            )

    @property
    def out_channels(self) -> int:
        return self.e1x1 + self.e3x3


@dataclass(frozen=True)
class FireMeta:
    """Metaparameters that determine every Fire module's dimensions.

    Module i (0-based) gets e_i = base_e + incr_e * floor(i / freq) expand
    filters, split e3x3 = round(e_i * pct_3x3), e1x1 = e_i - e3x3, with
    s = round(sr * e_i) squeeze filters. Fractional products round half-up.
    """

    base_e: int
    incr_e: int
    freq: int
    pct_3x3: Fraction
    sr: Fraction
    num_modules: int = 8

    def __post_init__(self) -> None:
        object.__setattr__(self, "pct_3x3", Fraction(self.pct_3x3))
        object.__setattr__(self, "sr", Fraction(self.sr))
        if self.base_e < 1:
            raise ArchitectureError("base_e must be >= 1")
        if self.incr_e < 0:
            raise ArchitectureError("incr_e must be >= 0")
        if self.freq < 1:
            raise ArchitectureError("freq must be >= 1")
        if not 0 <= self.pct_3x3 <= 1:
            raise ArchitectureError("pct_3x3 must be in [0, 1]")
        if not 0 < self.sr <= 1:
            raise ArchitectureError("sr must be in (0, 1]")
        if self.num_modules < 1:
            raise ArchitectureError("num_modules must be >= 1")

    @classmethod
    def squeezenet_defaults(cls) -> "FireMeta":
        return cls(base_e=128, incr_e=128, freq=2,
                   pct_3x3=Fraction(1, 2), sr=Fraction(1, 8), num_modules=8)

    def expand_filters(self, i: int) -> int:
        return self.base_e + self.incr_e * (i // self.freq)

    def module(self, i: int) -> FireSpec:
        if not 0 <= i < self.num_modules:
            raise IndexError(f"module index {i} out of range [0, {self.num_modules})")
        e = self.expand_filters(i)
        e3 = _round_half_up(e * self.pct_3x3)
        e1 = e - e3
        s = _round_half_up(self.sr * e)
        if s == 0:
            raise ArchitectureError(f"module {i}: squeeze ratio {self.sr} rounds to zero squeeze filters")
        return FireSpec(s1x1=s, e1x1=e1, e3x3=e3)

    def modules(self) -> tuple[FireSpec, ...]:
        return tuple(self.module(i) for i in range(self.num_modules))


@dataclass(frozen=True)
class HeadTailConfig:
    """Layers around the Fire-module stack. Defaults are the SqueezeNet head
    (7x7/2 conv, 96 filters, 227x227 RGB input, 3x3/2 max-pools after conv1
    and after the 3rd and 7th modules) and tail (1x1 classifier conv over
    `num_categories`, then global average pooling)."""

    input_channels: int = 3
    input_height: int = 227
    input_width: int = 227
    conv1_filters: int = 96
    conv1_kernel: int = 7
    conv1_stride: int = 2
    num_categories: int = 1000
    pool_after_modules: tuple[int, ...] = (2, 6)  # 0-based module indices
    dropout_after_last_module: bool = True


class BypassVariant(str, Enum):
    VANILLA = "vanilla"
    SIMPLE = "simple"
    COMPLEX = "complex"


def fire_layers(module_name: str, prev: str, spec: FireSpec) -> tuple[list[LayerSpec], str]:
    """Expand one Fire module into concrete layers; returns (layers, output name)."""
    squeeze = conv(f"{module_name}_squeeze", prev, spec.s1x1, 1)
    e1 = conv(f"{module_name}_expand1x1", squeeze.name, spec.e1x1, 1)
    e3 = conv(f"{module_name}_expand3x3", squeeze.name, spec.e3x3, 3, pad=1)
    out = concat(f"{module_name}_concat", (e1.name, e3.name))
    return [squeeze, e1, e3, out], out.name


def generate(meta: FireMeta, head_tail: HeadTailConfig | None = None,
             name: str | None = None) -> Architecture:
    """Build the full architecture for a metaparameter setting.

    With `FireMeta.squeezenet_defaults()` the result is structurally equal to
    the catalog's squeezenet entry.
    """
    cfg = head_tail or HeadTailConfig()
    layers: list[LayerSpec] = [input_layer("data")]
    layers.append(conv("conv1", "data", cfg.conv1_filters, cfg.conv1_kernel,
                       stride=cfg.conv1_stride))
    layers.append(pool_max("pool1", "conv1", 3, 2))
    prev = "pool1"
    specs = meta.modules()
    for i, spec in enumerate(specs):
        module_name = f"fire{i + 2}"
        fire, prev = fire_layers(module_name, prev, spec)
        layers.extend(fire)
        if i in cfg.pool_after_modules and i != meta.num_modules - 1:
            pool = pool_max(f"pool{i + 2}", prev, 3, 2)
            layers.append(pool)
            prev = pool.name
    if cfg.dropout_after_last_module:
        drop = LayerSpec(name="drop_final", kind=LayerKind.DROPOUT, predecessors=(prev,))
        layers.append(drop)
        prev = drop.name
    tail_conv = conv("conv10", prev, cfg.num_categories, 1)
    layers.append(tail_conv)
    layers.append(global_avg_pool("pool10", tail_conv.name))
    arch_name = name or f"fire-net-{meta.num_modules}m"
    return Architecture(
        arch_name,
        TensorShape(1, cfg.input_channels, cfg.input_height, cfg.input_width),
        tuple(layers),
    )


def _module_names(arch: Architecture) -> list[str]:
    order = {l.name: i for i, l in enumerate(arch.topo_order)}
    names = sorted(
        (l.name[: -len("_concat")] for l in arch.layers if l.name.endswith("_concat")),
        key=lambda n: order[f"{n}_concat"],
    )
    if not names:
        raise ArchitectureError(f"{arch.name}: no Fire modules found; bypass requires a Fire-module chain")
    return names


def _module_io(arch: Architecture, module: str) -> tuple[str, str]:
    """(input layer name feeding the module's squeeze, module output name)."""
    squeeze = arch.layer(f"{module}_squeeze")
    return squeeze.predecessors[0], f"{module}_concat"


def with_bypass(arch: Architecture, variant: BypassVariant,
                simple_around: tuple[str, ...] | None = None,
                complex_around: tuple[str, ...] | None = None) -> Architecture:
    """Add bypass connections around Fire modules.

    simple: parameter-free elementwise addition around modules whose input
    and output channel counts match (defaults to every such module: fire3/5/
    7/9 in SqueezeNet). complex: a 1x1 convolution on the bypass path sized
    to the module's output channels (defaults to the channel-changing
    modules: fire2/4/6/8).
    """
    variant = BypassVariant(variant)
    if variant is BypassVariant.VANILLA:
        return arch

    shapes = analyze(arch, batch=1).shapes()
    modules = _module_names(arch)
    matching: list[str] = []
    mismatching: list[str] = []
    for m in modules:
        src, out = _module_io(arch, m)
        if shapes[src].channels == shapes[out].channels:
            matching.append(m)
        else:
            mismatching.append(m)

    if variant is BypassVariant.SIMPLE:
        targets = simple_around if simple_around is not None else tuple(matching)
        bad = [m for m in targets if m not in matching]
        if bad:
            raise ArchitectureError(
                f"simple bypass requires matching input/output channels; mismatched at: {', '.join(bad)}"
            )
        plan = {m: "simple" for m in targets}
    else:
        simple_targets = simple_around if simple_around is not None else tuple(matching)
        complex_targets = complex_around if complex_around is not None else tuple(mismatching)
        bad = [m for m in simple_targets if m not in matching]
        if bad:
            raise ArchitectureError(
                f"simple bypass requires matching input/output channels; mismatched at: {', '.join(bad)}"
            )
        plan = {m: "simple" for m in simple_targets}
        plan.update({m: "complex" for m in complex_targets})

    new_layers: list[LayerSpec] = []
    rename: dict[str, str] = {}  # module output -> bypass add output
    for layer in arch.layers:
        if layer.predecessors:
            preds = tuple(rename.get(p, p) for p in layer.predecessors)
            layer = replace(layer, predecessors=preds)
        new_layers.append(layer)
        module = layer.name[: -len("_concat")] if layer.name.endswith("_concat") else None
        if module and module in plan:
            src, out = _module_io(arch, module)
            src = rename.get(src, src)
            if plan[module] == "simple":
                add = elementwise_add(f"{module}_bypass_add", (src, layer.name))
                new_layers.append(add)
            else:
                out_ch = shapes[out].channels
                bconv = conv(f"{module}_bypass_conv", src, out_ch, 1)
                add = elementwise_add(f"{module}_bypass_add", (bconv.name, layer.name))
                new_layers.extend([bconv, add])
            rename[out] = add.name
    return arch.with_layers(tuple(new_layers), name=f"{arch.name}+{variant.value}-bypass")


@dataclass(frozen=True)
class SweepPoint:
    value: Fraction | int
    architecture: Architecture
    report: AccountingReport

    @property
    def param_bytes(self) -> int:
        return self.report.param_bytes


_SWEEPABLE = ("sr", "pct_3x3", "base_e", "incr_e", "freq", "num_modules")


def sweep(meta: FireMeta, vary: str, values: list, head_tail: HeadTailConfig | None = None,
          batch: int = 1, bytes_per_value: int = 4) -> list[SweepPoint]:
    """Generate and analyze one architecture per value of one metaparameter."""
    if vary not in _SWEEPABLE:
        raise ArchitectureError(f"cannot sweep {vary!r}; choose one of {', '.join(_SWEEPABLE)}")
    points: list[SweepPoint] = []
    for v in values:
        value = Fraction(v) if vary in ("sr", "pct_3x3") else int(v)
        m = replace(meta, **{vary: value})
        arch = generate(m, head_tail, name=f"fire-net[{vary}={value}]")
        points.append(SweepPoint(value=value, architecture=arch,
                                 report=analyze(arch, batch=batch, bytes_per_value=bytes_per_value)))
    return points


def sweep_csv(vary: str, points: list[SweepPoint]) -> str:
    lines = [f"{vary},param_bytes,flops,activation_bytes"]
    for p in points:
        value = str(float(p.value)) if isinstance(p.value, Fraction) else str(p.value)
        lines.append(
            f"{value},{p.report.param_bytes},{p.report.forward_flops},{p.report.activation_bytes}"
        )
    return "\n".join(lines) + "\n"


DESIGN_SPACE_NOTE = (
    "5^16 = 152,587,890,625 (~153 billion); the often-quoted '~30 billion' "
    "matches 5^15 = 30,517,578,125."
)


def count_design_space(num_slots: int, options_per_slot: int) -> int:
    """Exact options_per_slot ** num_slots (arbitrary precision)."""
    if num_slots < 0 or options_per_slot < 0:
        raise ValueError("num_slots and options_per_slot must be non-negative")
    return options_per_slot ** num_slots
