"""Architecture intermediate representation and shape propagation.

An Architecture is a named DAG of layer specifications with a declared input
shape. Layers are immutable values; every function here is pure, so the types
are safe to share across threads and to analyze concurrently.

Dimension conventions for convolution/pooling output size:

    out = round((in + 2*pad - filter) / stride) + 1

where `round` is floor for convolution and ceil for pooling under the default
rounding mode (the framework convention the reference dimensions follow); a
per-layer `rounding` override is available for either.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

__all__ = [
    "ArchitectureError",
    "LayerKind",
    "Rounding",
    "TensorShape",
    "LayerSpec",
    "Architecture",
    "conv",
    "pool_max",
    "pool_avg",
    "global_avg_pool",
    "fully_connected",
    "concat",
    "elementwise_add",
    "input_layer",
    "propagate_shape",
]


class ArchitectureError(ValueError):
    """Invalid architecture or layer specification."""


class LayerKind(str, Enum):
    INPUT = "input"
    CONVOLUTION = "convolution"
    MAX_POOL = "max-pool"
    AVG_POOL = "avg-pool"
    GLOBAL_AVG_POOL = "global-avg-pool"
    FULLY_CONNECTED = "fully-connected"
    CONCAT = "concat"
    ELEMENTWISE_ADD = "elementwise-add"
    RELU = "relu"
    DROPOUT = "dropout"


# Layers that own filters (and therefore parameters). Fully-connected layers
# are convolutions whose filter spans the whole input spatial extent.
PARAMETERIZED_KINDS = frozenset({LayerKind.CONVOLUTION, LayerKind.FULLY_CONNECTED})
WINDOWED_KINDS = frozenset(
    {LayerKind.CONVOLUTION, LayerKind.MAX_POOL, LayerKind.AVG_POOL}
)


class Rounding(str, Enum):
    DEFAULT = "default"  # floor for convolution, ceil for pooling
    FLOOR = "floor"
    CEIL = "ceil"


@dataclass(frozen=True, order=True)
class TensorShape:
    """(batch, channels, height, width) of an activation tensor."""

    batch: int
    channels: int
    height: int
    width: int

    def __post_init__(self) -> None:
        for name in ("batch", "channels", "height", "width"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ArchitectureError(f"TensorShape.{name} must be a positive integer, got {v!r}")

    @property
    def values(self) -> int:
        return self.batch * self.channels * self.height * self.width

    def byte_size(self, bytes_per_value: int = 4) -> int:
        return self.values * bytes_per_value

    def with_batch(self, batch: int) -> "TensorShape":
        return replace(self, batch=batch)

    def __str__(self) -> str:
        return f"{self.batch}x{self.channels}x{self.height}x{self.width}"


@dataclass(frozen=True)
class LayerSpec:
    """One layer of an architecture.

    Only the fields meaningful for `kind` may be set; construction validates
    this so an invalid spec cannot exist. `predecessors` lists producing layer
    names in order (order matters for concat).
    """

    name: str
    kind: LayerKind
    num_filters: int | None = None
    filter_h: int | None = None
    filter_w: int | None = None
    stride: int = 1
    pad_h: int = 0
    pad_w: int = 0
    groups: int = 1
    rounding: Rounding = Rounding.DEFAULT
    predecessors: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.name:
            raise ArchitectureError("layer name must be non-empty")
        kind = LayerKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "rounding", Rounding(self.rounding))
        object.__setattr__(self, "predecessors", tuple(self.predecessors))
        self._check_fields()

    def _check_fields(self) -> None:
        k = self.kind
        needs_filters = k in (LayerKind.CONVOLUTION, LayerKind.FULLY_CONNECTED)
        if needs_filters:
            if not (isinstance(self.num_filters, int) and self.num_filters >= 1):
                raise ArchitectureError(f"{self.name}: {k.value} requires positive num_filters")
        elif self.num_filters is not None:
            raise ArchitectureError(f"{self.name}: num_filters not allowed on {k.value}")

        needs_window = k in (LayerKind.CONVOLUTION, LayerKind.MAX_POOL, LayerKind.AVG_POOL)
        if needs_window:
            if not (isinstance(self.filter_h, int) and self.filter_h >= 1):
                raise ArchitectureError(f"{self.name}: {k.value} requires positive filter_h")
            if not (isinstance(self.filter_w, int) and self.filter_w >= 1):
                raise ArchitectureError(f"{self.name}: {k.value} requires positive filter_w")
        elif self.filter_h is not None or self.filter_w is not None:
            raise ArchitectureError(f"{self.name}: filter size not allowed on {k.value}")

        if self.stride < 1:
            raise ArchitectureError(f"{self.name}: stride must be >= 1")
        if self.pad_h < 0 or self.pad_w < 0:
            raise ArchitectureError(f"{self.name}: padding must be >= 0")
        if self.groups < 1:
            raise ArchitectureError(f"{self.name}: groups must be >= 1")
        if self.groups > 1 and k is not LayerKind.CONVOLUTION:
            raise ArchitectureError(f"{self.name}: groups only allowed on convolution")

        n = len(self.predecessors)
        if k is LayerKind.INPUT:
            if n != 0:
                raise ArchitectureError(f"{self.name}: input layer takes no predecessors")
        elif k in (LayerKind.CONCAT, LayerKind.ELEMENTWISE_ADD):
            if n < 2:
                raise ArchitectureError(f"{self.name}: {k.value} requires >= 2 predecessors")
        elif n != 1:
            raise ArchitectureError(f"{self.name}: {k.value} requires exactly 1 predecessor, got {n}")

    @property
    def is_parameterized(self) -> bool:
        return self.kind in PARAMETERIZED_KINDS

    @property
    def downsamples(self) -> bool:
        """Ability to change spatial resolution (stride > 1)."""
        return self.stride > 1


def _toposort(layers: tuple[LayerSpec, ...]) -> tuple[LayerSpec, ...]:
    by_name = {l.name: l for l in layers}
    indegree = {l.name: len(l.predecessors) for l in layers}
    successors: dict[str, list[str]] = {l.name: [] for l in layers}
    for l in layers:
        for p in l.predecessors:
            if p not in by_name:
                raise ArchitectureError(f"{l.name}: unknown predecessor {p!r}")
            successors[p].append(l.name)
    # Kahn's algorithm, preserving declaration order among ready layers.
    order: list[LayerSpec] = []
    ready = [l.name for l in layers if indegree[l.name] == 0]
    while ready:
        name = ready.pop(0)
        order.append(by_name[name])
        for s in successors[name]:
            indegree[s] -= 1
            if indegree[s] == 0:
                ready.append(s)
    if len(order) != len(layers):
        cycle = sorted(name for name, deg in indegree.items() if deg > 0)
        raise ArchitectureError(f"architecture contains a cycle through: {', '.join(cycle)}")
    return tuple(order)


@dataclass(frozen=True)
class Architecture:
    """A named DAG of layers plus the declared input shape.

    Invariants enforced at construction: unique layer names, exactly one
    input layer, acyclic graph, every non-input layer reachable from the
    input. `metadata` carries free-form string annotations (e.g. published
    accuracy figures) that never participate in any computation.
    """

    name: str
    input_shape: TensorShape
    layers: tuple[LayerSpec, ...]
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "layers", tuple(self.layers))
        names = [l.name for l in self.layers]
        seen: set[str] = set()
        for n in names:
            if n in seen:
                raise ArchitectureError(f"duplicate layer name: {n!r}")
            seen.add(n)
        inputs = [l for l in self.layers if l.kind is LayerKind.INPUT]
        if len(inputs) != 1:
            raise ArchitectureError(f"architecture must have exactly one input layer, found {len(inputs)}")
        ordered = _toposort(self.layers)
        object.__setattr__(self, "_topo_order", ordered)
        reachable = {inputs[0].name}
        for l in ordered:
            if l.kind is not LayerKind.INPUT and any(p in reachable for p in l.predecessors):
                reachable.add(l.name)
        unreachable = [n for n in names if n not in reachable]
        if unreachable:
            raise ArchitectureError(f"layers unreachable from input: {', '.join(unreachable)}")

    @property
    def topo_order(self) -> tuple[LayerSpec, ...]:
        return self._topo_order  # type: ignore[attr-defined]

    @property
    def input_layer(self) -> LayerSpec:
        return next(l for l in self.layers if l.kind is LayerKind.INPUT)

    def layer(self, name: str) -> LayerSpec:
        for l in self.layers:
            if l.name == name:
                return l
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(l.name == name for l in self.layers)

    def successors_of(self, name: str) -> tuple[str, ...]:
        return tuple(l.name for l in self.layers if name in l.predecessors)

    def final_layer(self) -> LayerSpec:
        """The unique sink of the DAG (last layer with no successors)."""
        sinks = [l for l in self.layers if not self.successors_of(l.name)]
        if len(sinks) != 1:
            raise ArchitectureError(
                f"{self.name}: expected a single output layer, found {[s.name for s in sinks]}"
            )
        return sinks[0]

    def with_layers(self, layers: tuple[LayerSpec, ...], name: str | None = None,
                    input_shape: TensorShape | None = None) -> "Architecture":
        return Architecture(
            name=name if name is not None else self.name,
            input_shape=input_shape if input_shape is not None else self.input_shape,
            layers=layers,
            metadata=dict(self.metadata),
        )


def _window_out(in_size: int, pad: int, filt: int, stride: int, ceil_mode: bool) -> int:
    span = in_size + 2 * pad - filt
    if span < 0:
        raise ArchitectureError(
            f"filter {filt} larger than padded input {in_size}+2*{pad}"
        )
    if ceil_mode:
        return -(-span // stride) + 1
    return span // stride + 1


def propagate_shape(layer: LayerSpec, inputs: list[TensorShape]) -> TensorShape:
    """Output shape of `layer` given its input shapes (one per predecessor)."""
    k = layer.kind
    if k is LayerKind.INPUT:
        raise ArchitectureError("input layer shape comes from the architecture, not propagation")
    expected = len(layer.predecessors)
    if len(inputs) != expected:
        raise ArchitectureError(
            f"{layer.name}: expected {expected} input shape(s), got {len(inputs)}"
        )

    if k is LayerKind.CONCAT:
        first = inputs[0]
        for s in inputs[1:]:
            if (s.batch, s.height, s.width) != (first.batch, first.height, first.width):
                raise ArchitectureError(
                    f"{layer.name}: concat inputs must share batch/height/width, got {first} vs {s}"
                )
        return TensorShape(first.batch, sum(s.channels for s in inputs), first.height, first.width)

    if k is LayerKind.ELEMENTWISE_ADD:
        first = inputs[0]
        for s in inputs[1:]:
            if s != first:
                raise ArchitectureError(
                    f"{layer.name}: elementwise-add inputs must have identical shapes, got {first} vs {s}"
                )
        return first

    src = inputs[0]
    if k in (LayerKind.RELU, LayerKind.DROPOUT):
        return src
    if k is LayerKind.GLOBAL_AVG_POOL:
        return TensorShape(src.batch, src.channels, 1, 1)
    if k is LayerKind.FULLY_CONNECTED:
        # Convolution whose filter equals the input spatial extent.
        return TensorShape(src.batch, layer.num_filters, 1, 1)  # type: ignore[arg-type]

    assert k in (LayerKind.CONVOLUTION, LayerKind.MAX_POOL, LayerKind.AVG_POOL)
    if layer.rounding is Rounding.DEFAULT:
        ceil_mode = k is not LayerKind.CONVOLUTION
    else:
        ceil_mode = layer.rounding is Rounding.CEIL
    try:
        out_h = _window_out(src.height, layer.pad_h, layer.filter_h, layer.stride, ceil_mode)  # type: ignore[arg-type]
        out_w = _window_out(src.width, layer.pad_w, layer.filter_w, layer.stride, ceil_mode)  # type: ignore[arg-type]
    except ArchitectureError as e:
        raise ArchitectureError(f"{layer.name}: {e}") from None
    if k is LayerKind.CONVOLUTION:
        if src.channels % layer.groups != 0:
            raise ArchitectureError(
                f"{layer.name}: input channels {src.channels} not divisible by groups {layer.groups}"
            )
        out_c = layer.num_filters
    else:
        out_c = src.channels
    return TensorShape(src.batch, out_c, out_h, out_w)  # type: ignore[arg-type]


# ---------------------------------------------------------------------------
# Constructors: terse builders for the common layer kinds.

def input_layer(name: str = "data") -> LayerSpec:
    return LayerSpec(name=name, kind=LayerKind.INPUT)


def conv(name: str, prev: str, filters: int, kernel: int | tuple[int, int],
         stride: int = 1, pad: int | tuple[int, int] = 0, groups: int = 1,
         rounding: Rounding = Rounding.DEFAULT) -> LayerSpec:
    kh, kw = (kernel, kernel) if isinstance(kernel, int) else kernel
    ph, pw = (pad, pad) if isinstance(pad, int) else pad
    return LayerSpec(name=name, kind=LayerKind.CONVOLUTION, num_filters=filters,
                     filter_h=kh, filter_w=kw, stride=stride, pad_h=ph, pad_w=pw,
                     groups=groups, rounding=rounding, predecessors=(prev,))


def pool_max(name: str, prev: str, kernel: int, stride: int,
             pad: int = 0, rounding: Rounding = Rounding.DEFAULT) -> LayerSpec:
    return LayerSpec(name=name, kind=LayerKind.MAX_POOL, filter_h=kernel, filter_w=kernel,
                     stride=stride, pad_h=pad, pad_w=pad, rounding=rounding, predecessors=(prev,))


def pool_avg(name: str, prev: str, kernel: int, stride: int,
             pad: int = 0, rounding: Rounding = Rounding.DEFAULT) -> LayerSpec:
    return LayerSpec(name=name, kind=LayerKind.AVG_POOL, filter_h=kernel, filter_w=kernel,
                     stride=stride, pad_h=pad, pad_w=pad, rounding=rounding, predecessors=(prev,))


def global_avg_pool(name: str, prev: str) -> LayerSpec:
    return LayerSpec(name=name, kind=LayerKind.GLOBAL_AVG_POOL, predecessors=(prev,))


def fully_connected(name: str, prev: str, filters: int) -> LayerSpec:
    return LayerSpec(name=name, kind=LayerKind.FULLY_CONNECTED, num_filters=filters,
                     predecessors=(prev,))


def concat(name: str, prevs: tuple[str, ...]) -> LayerSpec:
    return LayerSpec(name=name, kind=LayerKind.CONCAT, predecessors=prevs)


def elementwise_add(name: str, prevs: tuple[str, ...]) -> LayerSpec:
    return LayerSpec(name=name, kind=LayerKind.ELEMENTWISE_ADD, predecessors=prevs)
