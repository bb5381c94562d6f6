"""Design-space exploration workbench for convolutional network architectures.

Exact per-layer and end-to-end accounting of parameters, activations, and
FLOPs; what-if modification deltas; distributed data-parallel training cost
models; and Fire-module architecture generation from metaparameters.
"""

from .arch import (
    Architecture,
    ArchitectureError,
    LayerKind,
    LayerSpec,
    Rounding,
    TensorShape,
    propagate_shape,
)
from .accounting import (
    AccountingReport,
    LayerRow,
    analyze,
    data_weight_ratio,
    layer_activation_bytes,
    layer_forward_flops,
    layer_params_bytes,
)
from .catalog import CatalogEntry, CatalogError, builtin, builtin_names, load, save
from .firegen import (
    BypassVariant,
    FireMeta,
    FireSpec,
    HeadTailConfig,
    count_design_space,
    generate,
    sweep,
    with_bypass,
)
from .mods import (
    DeltaReport,
    ModSpec,
    RemoveLayer,
    ScaleCategories,
    ScaleFilters,
    ScaleInputChannels,
    ScaleInputResolution,
    SetFilterSize,
    apply_mod,
    diff,
)
from .scaling import (
    ClusterSpec,
    CostEstimate,
    TrainPlan,
    Topology,
    comm_time,
    iteration_time,
    scaling_curve,
    total_training_ops,
)

__version__ = "0.1.0"

__all__ = [
    "Architecture", "ArchitectureError", "LayerKind", "LayerSpec", "Rounding",
    "TensorShape", "propagate_shape",
    "AccountingReport", "LayerRow", "analyze", "data_weight_ratio",
    "layer_activation_bytes", "layer_forward_flops", "layer_params_bytes",
    "CatalogEntry", "CatalogError", "builtin", "builtin_names", "load", "save",
    "BypassVariant", "FireMeta", "FireSpec", "HeadTailConfig",
    "count_design_space", "generate", "sweep", "with_bypass",
    "DeltaReport", "ModSpec", "RemoveLayer", "ScaleCategories", "ScaleFilters",
    "ScaleInputChannels", "ScaleInputResolution", "SetFilterSize", "apply_mod", "diff",
    "ClusterSpec", "CostEstimate", "TrainPlan", "Topology",
    "comm_time", "iteration_time", "scaling_curve", "total_training_ops",
]
