import pytest
from hypothesis import given, strategies as st

from archlens.arch import (
    Architecture,
    ArchitectureError,
    LayerKind,
    LayerSpec,
    Rounding,
    TensorShape,
    conv,
    elementwise_add,
    fully_connected,
    global_avg_pool,
    input_layer,
    pool_max,
    propagate_shape,
)

from oracle import window_positions


def shp(c, h, w, batch=1):
    return TensorShape(batch, c, h, w)


class TestTensorShape:
    def test_rejects_nonpositive(self):
        with pytest.raises(ArchitectureError):
            TensorShape(0, 3, 2, 2)
        with pytest.raises(ArchitectureError):
            TensorShape(1, 3, -1, 2)

    def test_wide_byte_size(self):
        # batch 2^20 and dims 2^16 must not overflow
        s = TensorShape(2**20, 3, 2**16, 2**16)
        assert s.byte_size(4) == 2**20 * 3 * 2**16 * 2**16 * 4


class TestPropagation:
    def test_conv_ceil_worked_example(self):
        # 50x50 input, 3x3 filter, stride 2, no padding, ceil -> 25x25
        layer = conv("c", "in", 100, 3, stride=2, rounding=Rounding.CEIL)
        out = propagate_shape(layer, [shp(10, 50, 50, batch=200)])
        assert (out.height, out.width, out.channels, out.batch) == (25, 25, 100, 200)

    def test_conv_floor_default(self):
        layer = conv("c", "in", 96, 11, stride=4)
        out = propagate_shape(layer, [shp(3, 227, 227)])
        assert (out.height, out.width) == (55, 55)
        out = propagate_shape(layer, [shp(3, 454, 454)])
        assert (out.height, out.width) == (111, 111)  # floor; ceil would give 112

    def test_pool_identity(self):
        layer = pool_max("p", "in", 1, 1)
        out = propagate_shape(layer, [shp(5, 1, 1)])
        assert (out.height, out.width, out.channels) == (1, 1, 5)

    def test_pool_ceil_default(self):
        # 12x12 input, 3x3 window, stride 2: ceil -> 6, floor -> 5
        out = propagate_shape(pool_max("p", "in", 3, 2), [shp(4, 12, 12)])
        assert (out.height, out.width) == (6, 6)
        out = propagate_shape(pool_max("p", "in", 3, 2, rounding=Rounding.FLOOR), [shp(4, 12, 12)])
        assert (out.height, out.width) == (5, 5)

    def test_same_padding_preserves_size(self):
        for k in (1, 3, 5, 7):
            layer = conv("c", "in", 8, k, stride=1, pad=(k - 1) // 2)
            out = propagate_shape(layer, [shp(3, 19, 23)])
            assert (out.height, out.width) == (19, 23)

    def test_filter_larger_than_padded_input(self):
        with pytest.raises(ArchitectureError, match="larger than padded input"):
            propagate_shape(conv("c", "in", 8, 7), [shp(3, 5, 5)])
        # padding can rescue it
        out = propagate_shape(conv("c", "in", 8, 7, pad=1), [shp(3, 5, 5)])
        assert (out.height, out.width) == (1, 1)

    def test_concat_sums_channels(self):
        layer = LayerSpec(name="c", kind=LayerKind.CONCAT, predecessors=("a", "b", "d"))
        out = propagate_shape(layer, [shp(4, 9, 9), shp(6, 9, 9), shp(1, 9, 9)])
        assert out.channels == 11

    def test_concat_spatial_mismatch(self):
        layer = LayerSpec(name="c", kind=LayerKind.CONCAT, predecessors=("a", "b"))
        with pytest.raises(ArchitectureError, match="concat"):
            propagate_shape(layer, [shp(4, 9, 9), shp(4, 8, 9)])

    def test_add_requires_identical_shapes(self):
        layer = elementwise_add("s", ("a", "b"))
        assert propagate_shape(layer, [shp(4, 9, 9), shp(4, 9, 9)]) == shp(4, 9, 9)
        with pytest.raises(ArchitectureError, match="identical"):
            propagate_shape(layer, [shp(4, 9, 9), shp(5, 9, 9)])

    def test_arity_mismatch(self):
        with pytest.raises(ArchitectureError, match="expected 1 input"):
            propagate_shape(conv("c", "in", 8, 1), [shp(3, 5, 5), shp(3, 5, 5)])

    def test_global_avg_pool(self):
        out = propagate_shape(global_avg_pool("g", "in"), [shp(384, 13, 13)])
        assert out == shp(384, 1, 1)

    def test_fully_connected(self):
        out = propagate_shape(fully_connected("f", "in", 4096), [shp(256, 6, 6)])
        assert out == shp(4096, 1, 1)

    @given(
        in_size=st.integers(1, 64),
        pad=st.integers(0, 3),
        filt=st.integers(1, 7),
        stride=st.integers(1, 4),
        ceil_mode=st.booleans(),
    )
    def test_window_formula_matches_sliding_reference(self, in_size, pad, filt, stride, ceil_mode):
        if filt > in_size + 2 * pad:
            return
        rounding = Rounding.CEIL if ceil_mode else Rounding.FLOOR
        layer = conv("c", "in", 4, (filt, filt), stride=stride, pad=pad, rounding=rounding)
        out = propagate_shape(layer, [shp(2, in_size, in_size)])
        assert out.height == len(window_positions(in_size, pad, filt, stride, ceil_mode))


class TestLayerSpecValidation:
    def test_kind_specific_fields(self):
        with pytest.raises(ArchitectureError, match="num_filters"):
            LayerSpec(name="p", kind=LayerKind.MAX_POOL, num_filters=4,
                      filter_h=2, filter_w=2, predecessors=("x",))
        with pytest.raises(ArchitectureError, match="requires positive num_filters"):
            LayerSpec(name="c", kind=LayerKind.CONVOLUTION, filter_h=3, filter_w=3,
                      predecessors=("x",))
        with pytest.raises(ArchitectureError, match="filter size not allowed"):
            LayerSpec(name="r", kind=LayerKind.RELU, filter_h=3, filter_w=3,
                      predecessors=("x",))

    def test_predecessor_arity(self):
        with pytest.raises(ArchitectureError, match=">= 2 predecessors"):
            LayerSpec(name="c", kind=LayerKind.CONCAT, predecessors=("x",))
        with pytest.raises(ArchitectureError, match="no predecessors"):
            LayerSpec(name="i", kind=LayerKind.INPUT, predecessors=("x",))

    def test_groups_only_on_convolution(self):
        with pytest.raises(ArchitectureError, match="groups"):
            LayerSpec(name="p", kind=LayerKind.MAX_POOL, filter_h=2, filter_w=2,
                      groups=2, predecessors=("x",))


class TestArchitectureValidation:
    def test_duplicate_names(self):
        with pytest.raises(ArchitectureError, match="duplicate layer name: 'c1'"):
            Architecture("a", shp(3, 8, 8), (
                input_layer("in"), conv("c1", "in", 4, 1), conv("c1", "c1", 4, 1),
            ))

    def test_cycle_detection_names_cycle(self):
        layers = (
            input_layer("in"),
            conv("a", "b", 4, 1),
            conv("b", "a", 4, 1),
        )
        with pytest.raises(ArchitectureError, match="cycle through: a, b"):
            Architecture("a", shp(3, 8, 8), layers)

    def test_unreachable_layer(self):
        # b's only path goes through itself: unreachable from in
        layers = (
            input_layer("in"),
            conv("a", "in", 4, 1),
            LayerSpec(name="x", kind=LayerKind.RELU, predecessors=("y",)),
            LayerSpec(name="y", kind=LayerKind.RELU, predecessors=("x",)),
        )
        with pytest.raises(ArchitectureError, match="cycle|unreachable"):
            Architecture("a", shp(3, 8, 8), layers)

    def test_exactly_one_input(self):
        with pytest.raises(ArchitectureError, match="exactly one input"):
            Architecture("a", shp(3, 8, 8), (input_layer("i1"), input_layer("i2")))

    def test_unknown_predecessor(self):
        with pytest.raises(ArchitectureError, match="unknown predecessor"):
            Architecture("a", shp(3, 8, 8), (input_layer("in"), conv("c", "nope", 4, 1)))
