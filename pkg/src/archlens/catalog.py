"""Built-in reference architectures and the portable `.cnn.json` file format.

Every builtin carries an expected-shape table and is self-checked against it
at construction time, so a regression in shape propagation cannot silently
ship a wrong reference entry. Annotations carry published figures (accuracy,
reported model size); they are never fed into any computation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import firegen
from .arch import (
    Architecture,
    ArchitectureError,
    LayerKind,
    LayerSpec,
    Rounding,
    TensorShape,
    conv,
    fully_connected,
    global_avg_pool,
    input_layer,
    pool_max,
)
from .accounting import analyze

__all__ = ["CatalogEntry", "CatalogError", "builtin", "builtin_names", "load", "save", "loads", "dumps"]

FILE_EXTENSION = ".cnn.json"


class CatalogError(ValueError):
    """Malformed architecture description file."""


@dataclass(frozen=True)
class CatalogEntry:
    architecture: Architecture
    annotations: dict[str, str] = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.architecture.name


# ---------------------------------------------------------------------------
# Built-in entries


def _nin() -> CatalogEntry:
    """Network-in-Network: 12 convolutions, three max-pools, global avg-pool.

    Pads are the ones that reproduce the published output sizes (5x5 conv
    pad 2, 3x3 convs pad 1, 1x1 convs and pools pad 0).
    """
    layers = [
        input_layer("data"),
        conv("conv1", "data", 96, 11, stride=4, pad=0),
        conv("conv2", "conv1", 96, 1),
        conv("conv3", "conv2", 96, 1),
        pool_max("pool3", "conv3", 3, 2),
        conv("conv4", "pool3", 256, 5, pad=2),
        conv("conv5", "conv4", 256, 1),
        conv("conv6", "conv5", 256, 1),
        pool_max("pool6", "conv6", 3, 2),
        conv("conv7", "pool6", 384, 3, pad=1),
        conv("conv8", "conv7", 384, 1),
        conv("conv9", "conv8", 384, 1),
        pool_max("pool9", "conv9", 3, 2),
        conv("conv10", "pool9", 1024, 3, pad=1),
        conv("conv11", "conv10", 1024, 1),
        conv("conv12", "conv11", 1000, 1),
        global_avg_pool("pool12", "conv12"),
    ]
    arch = Architecture("nin", TensorShape(1, 3, 227, 227), tuple(layers))
    expected = {
        "data": (227, 227), "conv1": (55, 55), "conv2": (55, 55), "conv3": (55, 55),
        "pool3": (27, 27), "conv4": (27, 27), "conv5": (27, 27), "conv6": (27, 27),
        "pool6": (13, 13), "conv7": (13, 13), "conv8": (13, 13), "conv9": (13, 13),
        "pool9": (6, 6), "conv10": (6, 6), "conv11": (6, 6), "conv12": (6, 6),
        "pool12": (1, 1),
    }
    _check_shapes(arch, expected)
    return CatalogEntry(arch, annotations={
        "top1_accuracy": "58.9%",
        "accuracy_note": "published figure, not computed by this tool",
    })


def _alexnet(groups: int) -> CatalogEntry:
    """AlexNet at 227x227. groups=1 is the single-tower variant whose weight
    and FLOP volumes match the published data-volume table; groups=2
    reproduces the original two-GPU filter grouping in conv2/4/5."""
    layers = [
        input_layer("data"),
        conv("conv1", "data", 96, 11, stride=4),
        pool_max("pool1", "conv1", 3, 2),
        conv("conv2", "pool1", 256, 5, pad=2, groups=groups),
        pool_max("pool2", "conv2", 3, 2),
        conv("conv3", "pool2", 384, 3, pad=1),
        conv("conv4", "conv3", 384, 3, pad=1, groups=groups),
        conv("conv5", "conv4", 256, 3, pad=1, groups=groups),
        pool_max("pool5", "conv5", 3, 2),
        fully_connected("fc6", "pool5", 4096),
        fully_connected("fc7", "fc6", 4096),
        fully_connected("fc8", "fc7", 1000),
    ]
    name = "alexnet" if groups == 1 else "alexnet-grouped"
    arch = Architecture(name, TensorShape(1, 3, 227, 227), tuple(layers))
    expected = {
        "data": (227, 227), "conv1": (55, 55), "pool1": (27, 27), "conv2": (27, 27),
        "pool2": (13, 13), "conv3": (13, 13), "conv4": (13, 13), "conv5": (13, 13),
        "pool5": (6, 6), "fc6": (1, 1), "fc7": (1, 1), "fc8": (1, 1),
    }
    _check_shapes(arch, expected)
    return CatalogEntry(arch, annotations={
        "top1_accuracy": "57.2%",
        "top5_accuracy": "80.3%",
        "reported_model_size": "240-249MB",
        "accuracy_note": "published figure, not computed by this tool",
    })


def _vgg19() -> CatalogEntry:
    """VGG-19: sixteen 3x3 convolutions (pad 1) in five blocks + three FC."""
    widths = [(64, 2), (128, 2), (256, 4), (512, 4), (512, 4)]
    layers: list[LayerSpec] = [input_layer("data")]
    prev = "data"
    for b, (w, reps) in enumerate(widths, start=1):
        for r in range(1, reps + 1):
            name = f"conv{b}_{r}"
            layers.append(conv(name, prev, w, 3, pad=1))
            prev = name
        layers.append(pool_max(f"pool{b}", prev, 2, 2))
        prev = f"pool{b}"
    layers += [
        fully_connected("fc6", prev, 4096),
        fully_connected("fc7", "fc6", 4096),
        fully_connected("fc8", "fc7", 1000),
    ]
    arch = Architecture("vgg19", TensorShape(1, 3, 224, 224), tuple(layers))
    expected = {"pool1": (112, 112), "pool2": (56, 56), "pool3": (28, 28),
                "pool4": (14, 14), "pool5": (7, 7), "fc8": (1, 1)}
    _check_shapes(arch, expected)
    return CatalogEntry(arch, annotations={
        "reported_model_size": "575MB",
        "accuracy_note": "published figure, not computed by this tool",
    })


# LeNet's published structure: two 5x5 convs with 2x2/2 pools bring 28x28
# down to 4x4 ahead of the first fully-connected layer. The filter/FC widths
# below are calibrated so the forward FLOP count lands on the published
# per-frame figures (5.74 MF at 28x28; ~2.7 GF for the 224 variant).
_LENET_CONV1, _LENET_CONV2, _LENET_FC1 = 20, 70, 320


def _lenet() -> CatalogEntry:
    layers = [
        input_layer("data"),
        conv("conv1", "data", _LENET_CONV1, 5),
        pool_max("pool1", "conv1", 2, 2),
        conv("conv2", "pool1", _LENET_CONV2, 5),
        pool_max("pool2", "conv2", 2, 2),
        fully_connected("fc1", "pool2", _LENET_FC1),
        fully_connected("fc2", "fc1", 10),
    ]
    arch = Architecture("lenet", TensorShape(1, 1, 28, 28), tuple(layers))
    expected = {"conv1": (24, 24), "pool1": (12, 12), "conv2": (8, 8),
                "pool2": (4, 4), "fc1": (1, 1), "fc2": (1, 1)}
    _check_shapes(arch, expected)
    return CatalogEntry(arch)


def _lenet_224() -> CatalogEntry:
    """LeNet adapted to 224x224 input: the first FC layer becomes a 4x4
    convolution whose output is global-average-pooled down to 1x1."""
    layers = [
        input_layer("data"),
        conv("conv1", "data", _LENET_CONV1, 5),
        pool_max("pool1", "conv1", 2, 2),
        conv("conv2", "pool1", _LENET_CONV2, 5),
        pool_max("pool2", "conv2", 2, 2),
        conv("fc1_conv", "pool2", _LENET_FC1, 4),
        global_avg_pool("fc1_pool", "fc1_conv"),
        fully_connected("fc2", "fc1_pool", 10),
    ]
    arch = Architecture("lenet-224", TensorShape(1, 1, 224, 224), tuple(layers))
    expected = {"conv1": (220, 220), "pool1": (110, 110), "conv2": (106, 106),
                "pool2": (53, 53), "fc1_conv": (50, 50), "fc1_pool": (1, 1), "fc2": (1, 1)}
    _check_shapes(arch, expected)
    return CatalogEntry(arch)


_SQUEEZENET_EXPECTED = {
    "data": (227, 227), "conv1": (111, 111), "pool1": (55, 55),
    "fire2_concat": (55, 55), "fire3_concat": (55, 55), "fire4_concat": (55, 55),
    "pool4": (27, 27), "fire5_concat": (27, 27), "fire6_concat": (27, 27),
    "fire7_concat": (27, 27), "fire8_concat": (27, 27), "pool8": (13, 13),
    "fire9_concat": (13, 13), "conv10": (13, 13), "pool10": (1, 1),
}

# (squeeze, expand 1x1, expand 3x3) per module, as published.
_SQUEEZENET_FIRE_DIMS = (
    (16, 64, 64), (16, 64, 64), (32, 128, 128), (32, 128, 128),
    (48, 192, 192), (48, 192, 192), (64, 256, 256), (64, 256, 256),
)

_SQUEEZENET_ANNOTATIONS = {
    "vanilla": {"top1_accuracy": "57.5%", "top5_accuracy": "80.3%",
                "reported_model_size": "4.8MB"},
    "simple": {"top1_accuracy": "60.4%", "top5_accuracy": "82.5%",
               "reported_model_size": "4.8MB"},
    "complex": {"top1_accuracy": "58.8%", "top5_accuracy": "82.0%",
                "reported_model_size": "7.7MB"},
}


def _squeezenet(variant: str) -> CatalogEntry:
    arch = firegen.generate(firegen.FireMeta.squeezenet_defaults())
    if variant == "simple":
        arch = firegen.with_bypass(arch, firegen.BypassVariant.SIMPLE)
    elif variant == "complex":
        arch = firegen.with_bypass(arch, firegen.BypassVariant.COMPLEX)
    name = "squeezenet" if variant == "vanilla" else f"squeezenet-{variant}-bypass"
    arch = arch.with_layers(arch.layers, name=name)
    _check_shapes(arch, _SQUEEZENET_EXPECTED)
    fire_dims = tuple(
        (arch.layer(f"fire{i}_squeeze").num_filters,
         arch.layer(f"fire{i}_expand1x1").num_filters,
         arch.layer(f"fire{i}_expand3x3").num_filters)
        for i in range(2, 10)
    )
    if fire_dims != _SQUEEZENET_FIRE_DIMS:
        raise ArchitectureError(f"{name}: fire dims {fire_dims} deviate from the published table")
    annotations = dict(_SQUEEZENET_ANNOTATIONS[variant])
    annotations["accuracy_note"] = "published figure, not computed by this tool"
    return CatalogEntry(arch, annotations=annotations)


def _check_shapes(arch: Architecture, expected: dict[str, tuple[int, int]]) -> None:
    shapes = analyze(arch, batch=1).shapes()
    for layer, (h, w) in expected.items():
        got = shapes[layer]
        if (got.height, got.width) != (h, w):
            raise ArchitectureError(
                f"{arch.name}: self-check failed at {layer}: expected {h}x{w}, got {got.height}x{got.width}"
            )


_BUILTINS = {
    "nin": _nin,
    "squeezenet": lambda: _squeezenet("vanilla"),
    "squeezenet-simple-bypass": lambda: _squeezenet("simple"),
    "squeezenet-complex-bypass": lambda: _squeezenet("complex"),
    "alexnet": lambda: _alexnet(groups=1),
    "alexnet-grouped": lambda: _alexnet(groups=2),
    "vgg19": _vgg19,
    "lenet": _lenet,
    "lenet-224": _lenet_224,
}


def builtin_names() -> tuple[str, ...]:
    return tuple(sorted(_BUILTINS))


def builtin(name: str) -> CatalogEntry:
    try:
        factory = _BUILTINS[name]
    except KeyError:
        known = ", ".join(builtin_names())
        raise KeyError(f"unknown builtin architecture {name!r}; known: {known}") from None
    return factory()


# ---------------------------------------------------------------------------
# File format: one JSON document per architecture.
#
# {"name": ..., "input": {"channels": C, "height": H, "width": W},
#  "layers": [{"name": ..., "kind": ..., "filters"?, "filter": [h, w]?,
#              "stride"?, "pad": [h, w]?, "groups"?, "rounding"?,
#              "inputs": [...]}, ...],
#  "metadata": {...}}
#
# Batch size is supplied at analysis time, never stored. A layer may omit
# "inputs" to mean "the previous layer in the list" (the input tensor is
# addressed by the reserved name in "input.name", default "data").


def dumps(entry: CatalogEntry) -> str:
    """Serialize deterministically (canonical key order, 2-space indent).

    Annotations and architecture-level metadata share the file's `metadata`
    object; architecture keys carry an `arch:` prefix so a load restores each
    to its holder exactly.
    """
    arch = entry.architecture
    merged = {**{f"arch:{k}": v for k, v in arch.metadata.items()}, **entry.annotations}
    doc: dict = {
        "name": arch.name,
        "input": {
            "name": arch.input_layer.name,
            "channels": arch.input_shape.channels,
            "height": arch.input_shape.height,
            "width": arch.input_shape.width,
        },
        "layers": [],
        "metadata": dict(sorted(merged.items())),
    }
    for layer in arch.layers:
        if layer.kind is LayerKind.INPUT:
            continue
        item: dict = {"name": layer.name, "kind": layer.kind.value}
        if layer.num_filters is not None:
            item["filters"] = layer.num_filters
        if layer.filter_h is not None:
            item["filter"] = [layer.filter_h, layer.filter_w]
        if layer.stride != 1:
            item["stride"] = layer.stride
        if layer.pad_h or layer.pad_w:
            item["pad"] = [layer.pad_h, layer.pad_w]
        if layer.groups != 1:
            item["groups"] = layer.groups
        if layer.rounding is not Rounding.DEFAULT:
            item["rounding"] = layer.rounding.value
        item["inputs"] = list(layer.predecessors)
        doc["layers"].append(item)
    return json.dumps(doc, indent=2) + "\n"


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise CatalogError(msg)


def loads(text: str) -> CatalogEntry:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise CatalogError(f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None
    _require(isinstance(doc, dict), "top level must be an object")
    _require(isinstance(doc.get("name"), str) and doc["name"], "field 'name' must be a non-empty string")
    inp = doc.get("input")
    _require(isinstance(inp, dict), "field 'input' must be an object")
    for f in ("channels", "height", "width"):
        _require(isinstance(inp.get(f), int) and inp[f] >= 1,
                 f"field 'input.{f}' must be a positive integer")
    input_name = inp.get("name", "data")
    _require(isinstance(input_name, str) and input_name, "field 'input.name' must be a non-empty string")

    raw_layers = doc.get("layers")
    _require(isinstance(raw_layers, list), "field 'layers' must be a list")
    layers: list[LayerSpec] = [input_layer(input_name)]
    prev = input_name
    for i, item in enumerate(raw_layers):
        where = f"layers[{i}]"
        _require(isinstance(item, dict), f"{where} must be an object")
        _require(isinstance(item.get("name"), str) and item["name"], f"{where}.name must be a non-empty string")
        _require(isinstance(item.get("kind"), str), f"{where}.kind must be a string")
        try:
            kind = LayerKind(item["kind"])
        except ValueError:
            raise CatalogError(
                f"{where}.kind: unknown kind {item['kind']!r}; expected one of "
                f"{', '.join(k.value for k in LayerKind if k is not LayerKind.INPUT)}"
            ) from None
        filt = item.get("filter")
        if filt is not None:
            _require(isinstance(filt, list) and len(filt) == 2 and all(isinstance(v, int) for v in filt),
                     f"{where}.filter must be [height, width]")
        pad = item.get("pad", [0, 0])
        _require(isinstance(pad, list) and len(pad) == 2 and all(isinstance(v, int) for v in pad),
                 f"{where}.pad must be [pad_h, pad_w]")
        inputs = item.get("inputs", [prev])
        _require(isinstance(inputs, list) and all(isinstance(v, str) for v in inputs),
                 f"{where}.inputs must be a list of layer names")
        try:
            layers.append(LayerSpec(
                name=item["name"],
                kind=kind,
                num_filters=item.get("filters"),
                filter_h=filt[0] if filt else None,
                filter_w=filt[1] if filt else None,
                stride=item.get("stride", 1),
                pad_h=pad[0],
                pad_w=pad[1],
                groups=item.get("groups", 1),
                rounding=Rounding(item.get("rounding", "default")),
                predecessors=tuple(inputs),
            ))
        except (ArchitectureError, ValueError) as e:
            raise CatalogError(f"{where} ({item['name']}): {e}") from None
        prev = item["name"]

    metadata = doc.get("metadata", {})
    _require(isinstance(metadata, dict) and all(
        isinstance(k, str) and isinstance(v, str) for k, v in metadata.items()),
        "field 'metadata' must map strings to strings")
    arch_meta = {k[len("arch:"):]: v for k, v in metadata.items() if k.startswith("arch:")}
    annotations = {k: v for k, v in metadata.items() if not k.startswith("arch:")}
    try:
        arch = Architecture(
            name=doc["name"],
            input_shape=TensorShape(1, inp["channels"], inp["height"], inp["width"]),
            layers=tuple(layers),
            metadata=arch_meta,
        )
    except ArchitectureError as e:
        raise CatalogError(str(e)) from None
    return CatalogEntry(arch, annotations=annotations)


def save(entry: CatalogEntry, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(dumps(entry), encoding="utf-8")
    return path


def load(path: str | Path) -> CatalogEntry:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise CatalogError(f"cannot read {path}: {e}") from None
    try:
        return loads(text)
    except CatalogError as e:
        raise CatalogError(f"{path}: {e}") from None
