"""Random small-architecture generator for oracle-equivalence testing."""

from __future__ import annotations

import random

from archlens.arch import (
    Architecture,
    LayerKind,
    LayerSpec,
    Rounding,
    TensorShape,
    concat,
    conv,
    elementwise_add,
    fully_connected,
    global_avg_pool,
    input_layer,
    pool_avg,
    pool_max,
)

MAX_DIM = 8
MAX_LAYERS = 5


def random_architecture(rng: random.Random) -> Architecture:
    channels = rng.randint(1, MAX_DIM)
    height = rng.randint(1, MAX_DIM)
    width = rng.randint(1, MAX_DIM)
    layers: list[LayerSpec] = [input_layer("in")]
    cur = "in"
    shape = TensorShape(1, channels, height, width)
    n = rng.randint(1, MAX_LAYERS)
    i = 0
    while i < n:
        choice = rng.random()
        name = f"l{i}"
        if choice < 0.12 and n - i >= 3:
            # fork two shape-preserving branches, merge with elementwise add
            a = LayerSpec(name=f"{name}a", kind=LayerKind.RELU, predecessors=(cur,))
            b = LayerSpec(name=f"{name}b", kind=LayerKind.DROPOUT, predecessors=(cur,))
            m = elementwise_add(f"{name}m", (a.name, b.name))
            layers += [a, b, m]
            cur = m.name
            i += 3
            continue
        if choice < 0.24 and n - i >= 3:
            # fork a 1x1 conv branch, merge channel-wise
            filters = rng.randint(1, MAX_DIM)
            a = conv(f"{name}a", cur, filters, 1)
            b = LayerSpec(name=f"{name}b", kind=LayerKind.RELU, predecessors=(cur,))
            m = concat(f"{name}m", (a.name, b.name))
            layers += [a, b, m]
            shape = TensorShape(1, filters + shape.channels, shape.height, shape.width)
            cur = m.name
            i += 3
            continue
        kind = rng.choice(["conv", "conv", "max", "avg", "relu", "drop", "gap", "fc"])
        if kind == "conv":
            pad = rng.randint(0, 1)
            kmax = min(3, shape.height + 2 * pad, shape.width + 2 * pad)
            k = rng.randint(1, kmax)
            filters = rng.randint(1, MAX_DIM)
            groups = 1
            divisors = [g for g in (1, 2, 4) if shape.channels % g == 0 and filters % g == 0]
            if len(divisors) > 1 and rng.random() < 0.3:
                groups = rng.choice(divisors)
            layer = conv(name, cur, filters, k, stride=rng.randint(1, 2), pad=pad,
                         groups=groups,
                         rounding=rng.choice([Rounding.DEFAULT, Rounding.FLOOR, Rounding.CEIL]))
        elif kind in ("max", "avg"):
            k = rng.randint(1, min(3, shape.height, shape.width))
            builder = pool_max if kind == "max" else pool_avg
            layer = builder(name, cur, k, stride=rng.randint(1, 2),
                            rounding=rng.choice([Rounding.DEFAULT, Rounding.FLOOR, Rounding.CEIL]))
        elif kind == "relu":
            layer = LayerSpec(name=name, kind=LayerKind.RELU, predecessors=(cur,))
        elif kind == "drop":
            layer = LayerSpec(name=name, kind=LayerKind.DROPOUT, predecessors=(cur,))
        elif kind == "gap":
            layer = global_avg_pool(name, cur)
        else:
            layer = fully_connected(name, cur, rng.randint(1, MAX_DIM))
        layers.append(layer)
        from archlens.arch import propagate_shape

        shape = propagate_shape(layer, [shape])
        cur = name
        i += 1
    return Architecture(f"random-{rng.random():.6f}", TensorShape(1, channels, height, width),
                        tuple(layers))
