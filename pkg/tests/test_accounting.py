from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from archlens.arch import (
    Architecture,
    ArchitectureError,
    LayerKind,
    LayerSpec,
    TensorShape,
    conv,
    fully_connected,
    global_avg_pool,
    input_layer,
    pool_avg,
    pool_max,
)
from archlens.accounting import (
    analyze,
    data_weight_ratio,
    layer_activation_bytes,
    layer_forward_flops,
    layer_params_bytes,
)
from archlens.catalog import builtin


def shp(c, h, w, batch=1):
    return TensorShape(batch, c, h, w)


class TestLayerParamsBytes:
    def test_first_conv(self):
        # 96 filters of 11x11 over 3 channels at 4 bytes/value
        assert layer_params_bytes(conv("c", "in", 96, 11, stride=4), 3) == 139_392

    def test_mid_conv(self):
        assert layer_params_bytes(conv("c", "in", 256, 5, pad=2), 96) == 2_457_600

    def test_minimal(self):
        assert layer_params_bytes(conv("c", "in", 1, 1), 1, bytes_per_value=4) == 4

    def test_pool_has_none(self):
        assert layer_params_bytes(pool_max("p", "in", 3, 2), 96) == 0

    def test_grouped_divides_input_channels(self):
        plain = layer_params_bytes(conv("c", "in", 256, 5), 96)
        grouped = layer_params_bytes(conv("c", "in", 256, 5, groups=2), 96)
        assert plain == 2 * grouped

    def test_fully_connected_uses_input_extent(self):
        layer = fully_connected("f", "in", 4096)
        assert layer_params_bytes(layer, 256, in_spatial=(6, 6)) == 256 * 4096 * 36 * 4

    def test_bytes_per_value(self):
        layer = conv("c", "in", 96, 11)
        assert layer_params_bytes(layer, 3, bytes_per_value=2) == 139_392 // 2


class TestLayerForwardFlops:
    def test_first_conv_at_batch(self):
        out = shp(96, 55, 55, batch=1024)
        layer = conv("c", "in", 96, 11, stride=4)
        assert layer_forward_flops(layer, 3, out) == 215_890_329_600

    def test_max_pool_one_op_per_window_cell(self):
        out = shp(96, 27, 27, batch=1024)
        assert layer_forward_flops(pool_max("p", "in", 3, 2), 96, out) == 644_972_544

    def test_avg_pool_two_ops_per_window_cell(self):
        out = shp(1000, 1, 1, batch=1024)
        assert layer_forward_flops(pool_avg("p", "in", 6, 1), 1000, out) == 73_728_000

    def test_global_avg_pool(self):
        out = shp(1000, 1, 1, batch=1024)
        layer = global_avg_pool("g", "in")
        assert layer_forward_flops(layer, 1000, out, in_spatial=(6, 6)) == 73_728_000

    def test_zero_cost_kinds(self):
        out = shp(8, 5, 5, batch=7)
        for kind in (LayerKind.RELU, LayerKind.DROPOUT):
            layer = LayerSpec(name="z", kind=kind, predecessors=("x",))
            assert layer_forward_flops(layer, 8, out) == 0
        cat = LayerSpec(name="c", kind=LayerKind.CONCAT, predecessors=("x", "y"))
        assert layer_forward_flops(cat, 4, out) == 0
        add = LayerSpec(name="a", kind=LayerKind.ELEMENTWISE_ADD, predecessors=("x", "y"))
        assert layer_forward_flops(add, 8, out) == 0


class TestLayerActivationBytes:
    def test_values(self):
        assert layer_activation_bytes(shp(96, 55, 55, batch=1024)) == 1_189_478_400
        assert layer_activation_bytes(shp(3, 227, 227, batch=1024)) == 633_188_352
        assert layer_activation_bytes(shp(1, 1, 1, batch=1)) == 4
        assert layer_activation_bytes(shp(1, 1, 1, batch=1), bytes_per_value=1) == 1


def tiny_arch() -> Architecture:
    return Architecture("tiny", shp(3, 8, 8), (
        input_layer("in"),
        conv("c1", "in", 4, 3, pad=1),
        pool_max("p1", "c1", 2, 2),
        conv("c2", "p1", 6, 1),
        global_avg_pool("g", "c2"),
    ))


class TestAnalyze:
    def test_input_only(self):
        arch = Architecture("just-input", shp(3, 10, 10), (input_layer("in"),))
        r = analyze(arch, batch=2)
        assert r.param_bytes == 0
        assert r.forward_flops == 0
        assert r.activation_bytes == 2 * 3 * 10 * 10 * 4
        assert r.data_volume_bytes == 0

    def test_totals_are_row_sums(self):
        r = analyze(builtin("nin").architecture, batch=64)
        assert r.param_bytes == sum(row.param_bytes for row in r.rows)
        assert r.activation_bytes == sum(row.activation_bytes for row in r.rows)
        assert r.forward_flops == sum(row.forward_flops for row in r.rows)
        assert r.train_flops_per_batch == 3 * r.forward_flops

    def test_deterministic(self):
        a = analyze(builtin("nin").architecture, batch=128)
        b = analyze(builtin("nin").architecture, batch=128)
        assert a == b

    def test_error_names_offending_layer(self):
        arch = Architecture("bad", shp(3, 5, 5), (
            input_layer("in"),
            conv("huge", "in", 4, 7),
        ))
        with pytest.raises(ArchitectureError, match="huge"):
            analyze(arch, batch=1)

    def test_bias_accounting(self):
        arch = tiny_arch()
        with_bias = analyze(arch, batch=1, include_bias=True)
        without = analyze(arch, batch=1, include_bias=False)
        # one bias value per filter in c1 (4) and c2 (6)
        assert with_bias.param_bytes - without.param_bytes == (4 + 6) * 4
        assert with_bias.forward_flops == without.forward_flops
        assert with_bias.activation_bytes == without.activation_bytes

    @given(batch=st.integers(1, 512))
    @settings(max_examples=25, deadline=None)
    def test_batch_homogeneity(self, batch):
        arch = tiny_arch()
        unit = analyze(arch, batch=1)
        scaled = analyze(arch, batch=batch)
        assert scaled.param_bytes == unit.param_bytes  # batch-invariant
        assert scaled.activation_bytes == batch * unit.activation_bytes
        assert scaled.forward_flops == batch * unit.forward_flops
        assert scaled.data_volume_bytes == batch * unit.data_volume_bytes

    def test_splitting_a_concat_preserves_totals(self):
        # concat([a, b, c]) vs concat([concat([a, b]), c]): identical totals
        from archlens.arch import concat

        def branchy(split: bool) -> Architecture:
            layers = [
                input_layer("in"),
                conv("a", "in", 3, 1),
                conv("b", "in", 4, 1),
                conv("c", "in", 5, 1),
            ]
            if split:
                layers += [concat("ab", ("a", "b")), concat("m", ("ab", "c"))]
            else:
                layers += [concat("m", ("a", "b", "c"))]
            layers += [conv("out", "m", 2, 1)]
            return Architecture("branchy", shp(3, 6, 6), tuple(layers))

        flat = analyze(branchy(False), batch=3)
        split = analyze(branchy(True), batch=3)
        assert flat.param_bytes == split.param_bytes
        assert flat.forward_flops == split.forward_flops
        assert flat.data_volume_bytes == split.data_volume_bytes
        # the extra intermediate tensor shows up only in the all-outputs sum
        assert split.activation_bytes - flat.activation_bytes == \
            split.row("ab").activation_bytes

    def test_bytes_per_value_scales_bytes_not_flops(self):
        arch = tiny_arch()
        four = analyze(arch, batch=2, bytes_per_value=4)
        one = analyze(arch, batch=2, bytes_per_value=1)
        assert four.param_bytes == 4 * one.param_bytes
        assert four.activation_bytes == 4 * one.activation_bytes
        assert four.forward_flops == one.forward_flops


class TestDataWeightRatio:
    def test_symmetric_fc(self):
        # One FC layer whose weights and activations occupy identical bytes:
        # weights C*F*H*W*bpv; consumed input C*H*W*batch*bpv; equal when F == batch.
        arch = Architecture("sym", shp(8, 4, 4), (
            input_layer("in"),
            fully_connected("f", "in", 16),
        ))
        r = analyze(arch, batch=16, include_bias=False)
        assert data_weight_ratio(r) == Fraction(1)

    def test_zero_parameter_error(self):
        arch = Architecture("nop", shp(3, 4, 4), (
            input_layer("in"),
            pool_max("p", "in", 2, 2),
        ))
        with pytest.raises(ArchitectureError, match="zero-parameter"):
            data_weight_ratio(analyze(arch, batch=1))

    def test_nin_landmark(self):
        r = analyze(builtin("nin").architecture, batch=1024)
        assert abs(data_weight_ratio(r) - 195) / 195 < Fraction(1, 100)
