"""Exact accounting of parameters, activations, and forward FLOPs.

All quantities are exact integers. Conventions (chosen to reproduce the
published per-layer tables this tool is validated against):

* Convolution / fully-connected FLOPs count 2 ops per multiply-add:
  (in_ch/groups) * filters * fh * fw * out_h * out_w * 2 * batch.
* Max pooling costs 1 op per window element, average pooling (incl. global)
  2 ops per window element; ReLU / dropout / concat / elementwise-add cost 0
  (they are well under 1% of any real network's total).
* Weight bytes per parameterized layer are (in_ch/groups)*filters*fh*fw*bpv;
  `analyze` additionally counts one bias value per filter by default, which
  is what trained-model checkpoints actually store.
* Two activation totals exist and both are reported: `activation_bytes`
  (sum of every layer's output tensor) and `data_volume_bytes` (activations
  read by parameterized layers: the measure that matters for comparing data
  volume against weight volume, and the one the published totals use).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .arch import (
    Architecture,
    ArchitectureError,
    LayerKind,
    LayerSpec,
    TensorShape,
    propagate_shape,
)

__all__ = [
    "LayerRow",
    "AccountingReport",
    "layer_params_bytes",
    "layer_bias_bytes",
    "layer_forward_flops",
    "layer_activation_bytes",
    "analyze",
    "data_weight_ratio",
]

TRAIN_FLOPS_FACTOR = 3  # forward + weight gradients + data gradients


def _effective_filter(layer: LayerSpec, in_spatial: tuple[int, int] | None) -> tuple[int, int]:
    if layer.kind is LayerKind.FULLY_CONNECTED:
        if in_spatial is None:
            raise ArchitectureError(
                f"{layer.name}: fully-connected accounting needs the input spatial size"
            )
        return in_spatial
    return layer.filter_h, layer.filter_w  # type: ignore[return-value]


def layer_params_bytes(layer: LayerSpec, in_channels: int, bytes_per_value: int = 4,
                       in_spatial: tuple[int, int] | None = None) -> int:
    """Weight bytes of one layer; zero for non-parameterized kinds.

    Bias values are excluded here (see `layer_bias_bytes`).
    """
    if not layer.is_parameterized:
        return 0
    fh, fw = _effective_filter(layer, in_spatial)
    if in_channels % layer.groups != 0:
        raise ArchitectureError(
            f"{layer.name}: input channels {in_channels} not divisible by groups {layer.groups}"
        )
    return (in_channels // layer.groups) * layer.num_filters * fh * fw * bytes_per_value  # type: ignore[operator]


def layer_bias_bytes(layer: LayerSpec, bytes_per_value: int = 4) -> int:
    """One bias value per filter on parameterized layers."""
    if not layer.is_parameterized:
        return 0
    return layer.num_filters * bytes_per_value  # type: ignore[operator]


def layer_forward_flops(layer: LayerSpec, in_channels: int, out_shape: TensorShape,
                        in_spatial: tuple[int, int] | None = None) -> int:
    """Forward-pass arithmetic ops of one layer at out_shape's batch size."""
    k = layer.kind
    if k in (LayerKind.CONVOLUTION, LayerKind.FULLY_CONNECTED):
        fh, fw = _effective_filter(layer, in_spatial)
        per_output = (in_channels // layer.groups) * fh * fw * 2
        return per_output * layer.num_filters * out_shape.height * out_shape.width * out_shape.batch  # type: ignore[operator]
    if k is LayerKind.MAX_POOL:
        window = layer.filter_h * layer.filter_w  # type: ignore[operator]
        return out_shape.channels * out_shape.height * out_shape.width * window * out_shape.batch
    if k is LayerKind.AVG_POOL:
        window = layer.filter_h * layer.filter_w  # type: ignore[operator]
        return out_shape.channels * out_shape.height * out_shape.width * window * 2 * out_shape.batch
    if k is LayerKind.GLOBAL_AVG_POOL:
        if in_spatial is None:
            raise ArchitectureError(f"{layer.name}: global pooling accounting needs the input spatial size")
        window = in_spatial[0] * in_spatial[1]
        return out_shape.channels * window * 2 * out_shape.batch
    return 0


def layer_activation_bytes(out_shape: TensorShape, bytes_per_value: int = 4) -> int:
    return out_shape.byte_size(bytes_per_value)


@dataclass(frozen=True)
class LayerRow:
    """Per-layer accounting: shapes and exact byte/FLOP counts.

    `consumed_bytes` is the size of the input activations a parameterized
    layer reads (zero elsewhere); summed over the network it gives the
    data-volume measure paired with the weight volume.
    """

    name: str
    kind: LayerKind
    out_shape: TensorShape
    param_bytes: int
    activation_bytes: int
    forward_flops: int
    consumed_bytes: int


@dataclass(frozen=True)
class AccountingReport:
    architecture: str
    batch: int
    bytes_per_value: int
    include_bias: bool
    rows: tuple[LayerRow, ...]

    @property
    def param_bytes(self) -> int:
        return sum(r.param_bytes for r in self.rows)

    @property
    def activation_bytes(self) -> int:
        """Sum of every layer's output tensor bytes."""
        return sum(r.activation_bytes for r in self.rows)

    @property
    def data_volume_bytes(self) -> int:
        """Activations consumed by parameterized layers; pairs with |W|."""
        return sum(r.consumed_bytes for r in self.rows)

    @property
    def forward_flops(self) -> int:
        return sum(r.forward_flops for r in self.rows)

    @property
    def train_flops_per_batch(self) -> int:
        return TRAIN_FLOPS_FACTOR * self.forward_flops

    @property
    def forward_flops_per_frame(self) -> int:
        flops = self.forward_flops
        if flops % self.batch:
            raise AssertionError("forward FLOPs not divisible by batch")  # linearity guarantees this
        return flops // self.batch

    def row(self, name: str) -> LayerRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def shapes(self) -> dict[str, TensorShape]:
        return {r.name: r.out_shape for r in self.rows}


def analyze(arch: Architecture, batch: int, bytes_per_value: int = 4,
            include_bias: bool = True) -> AccountingReport:
    """Topological walk applying the per-layer accounting operations.

    Deterministic: identical inputs yield identical reports. Raises with the
    offending layer named if shape propagation fails anywhere.
    """
    if batch < 1:
        raise ArchitectureError(f"batch must be >= 1, got {batch}")
    if bytes_per_value < 1:
        raise ArchitectureError(f"bytes_per_value must be >= 1, got {bytes_per_value}")

    shapes: dict[str, TensorShape] = {}
    rows: list[LayerRow] = []
    for layer in arch.topo_order:
        if layer.kind is LayerKind.INPUT:
            out = arch.input_shape.with_batch(batch)
            in_channels = 0
            in_spatial = None
            consumed = 0
        else:
            inputs = [shapes[p] for p in layer.predecessors]
            out = propagate_shape(layer, inputs)
            in_channels = inputs[0].channels
            in_spatial = (inputs[0].height, inputs[0].width)
            consumed = (
                sum(s.byte_size(bytes_per_value) for s in inputs)
                if layer.is_parameterized
                else 0
            )
        shapes[layer.name] = out
        params = layer_params_bytes(layer, in_channels, bytes_per_value, in_spatial)
        if include_bias:
            params += layer_bias_bytes(layer, bytes_per_value)
        rows.append(
            LayerRow(
                name=layer.name,
                kind=layer.kind,
                out_shape=out,
                param_bytes=params,
                activation_bytes=layer_activation_bytes(out, bytes_per_value),
                forward_flops=layer_forward_flops(layer, in_channels, out, in_spatial),
                consumed_bytes=consumed,
            )
        )
    return AccountingReport(
        architecture=arch.name,
        batch=batch,
        bytes_per_value=bytes_per_value,
        include_bias=include_bias,
        rows=tuple(rows),
    )


def data_weight_ratio(report: AccountingReport) -> Fraction:
    """Data volume over weight volume at the report's batch size."""
    params = report.param_bytes
    if params <= 0:
        raise ArchitectureError(
            f"{report.architecture}: data/weight ratio undefined for a zero-parameter architecture"
        )
    return Fraction(report.data_volume_bytes, params)
