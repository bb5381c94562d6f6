"""Modification toolkit: the six worked examples, classification, and the
no-mutation / identity properties."""

from fractions import Fraction

import pytest

from archlens.arch import ArchitectureError, TensorShape
from archlens.catalog import builtin
from archlens.mods import (
    RemoveLayer,
    ScaleCategories,
    ScaleFilters,
    ScaleInputChannels,
    ScaleInputResolution,
    SetFilterSize,
    apply_mod,
    diff,
    mod_from_dict,
    mod_to_dict,
    parse_inline_mod,
)
from archlens.units import format_multiplier


@pytest.fixture(scope="module")
def nin():
    return builtin("nin").architecture


def mult2(x: Fraction) -> str:
    return format_multiplier(x)


class TestApply:
    def test_scale_input_channels(self, nin):
        out = apply_mod(nin, ScaleInputChannels(4))
        assert out.input_shape.channels == 12
        assert nin.input_shape.channels == 3  # original untouched

    def test_scale_filters(self, nin):
        out = apply_mod(nin, ScaleFilters("conv8", 4))
        assert out.layer("conv8").num_filters == 1536
        assert nin.layer("conv8").num_filters == 384

    def test_identity_factor_is_noop(self, nin):
        assert apply_mod(nin, ScaleFilters("conv8", 1)) == nin
        assert apply_mod(nin, ScaleInputChannels(1)) == nin
        assert apply_mod(nin, ScaleInputResolution(1, 1)) == nin

    def test_set_filter_size(self, nin):
        out = apply_mod(nin, SetFilterSize("conv7", 6, 6, 2, 2))
        layer = out.layer("conv7")
        assert (layer.filter_h, layer.filter_w, layer.pad_h, layer.pad_w) == (6, 6, 2, 2)

    def test_scale_categories_rewrites_last_filtered_layer(self, nin):
        out = apply_mod(nin, ScaleCategories(4))
        assert out.layer("conv12").num_filters == 4000
        assert out.layer("conv11").num_filters == 1024

    def test_remove_layer_splices(self, nin):
        out = apply_mod(nin, RemoveLayer("pool3"))
        assert "pool3" not in out
        assert out.layer("conv4").predecessors == ("conv3",)

    def test_remove_layer_guards(self, nin):
        with pytest.raises(ArchitectureError, match="input"):
            apply_mod(nin, RemoveLayer("data"))
        with pytest.raises(ArchitectureError, match="final"):
            apply_mod(nin, RemoveLayer("pool12"))
        with pytest.raises(ArchitectureError, match="no layer named"):
            apply_mod(nin, RemoveLayer("conv99"))

    def test_fractional_scaling_rounds_half_up(self, nin):
        out = apply_mod(nin, ScaleFilters("conv8", Fraction(3, 2)))
        assert out.layer("conv8").num_filters == 576
        out = apply_mod(nin, ScaleFilters("conv12", Fraction(1, 512)))
        assert out.layer("conv12").num_filters == 2  # 1000/512 = 1.95 -> 2

    def test_rounding_is_flagged(self, nin):
        from archlens.mods import ROUNDING_FLAG
        exact = apply_mod(nin, ScaleFilters("conv8", Fraction(3, 2)))  # 384*1.5 = 576
        assert ROUNDING_FLAG not in exact.metadata
        rounded = apply_mod(nin, ScaleFilters("conv12", Fraction(1, 512)))
        assert "conv12 filters" in rounded.metadata[ROUNDING_FLAG]
        assert "rounded to 2" in rounded.metadata[ROUNDING_FLAG]
        res = apply_mod(nin, ScaleInputResolution(Fraction(3, 2), 1))  # 227*1.5 = 340.5
        assert "input height" in res.metadata[ROUNDING_FLAG]

    def test_nonpositive_result_rejected(self, nin):
        with pytest.raises(ArchitectureError, match="non-positive"):
            apply_mod(nin, ScaleFilters("conv8", Fraction(1, 10000)))


# expected: (mod, flops_mult, params_mult, flops_total, classification)
WORKED_EXAMPLES = [
    (ScaleInputChannels(4), "1.3x", "1.0x", 2.92e12, "local"),
    (ScaleFilters("conv8", 4), "1.1x", "1.1x", 2.57e12, "local"),
    (SetFilterSize("conv7", 6, 6, 2, 2), "1.3x", "1.3x", 2.99e12, "local"),
    (ScaleCategories(4), "1.1x", "1.4x", 2.49e12, "local"),
    (RemoveLayer("pool3"), "3.8x", "1.0x", 8.65e12, "global"),
    (ScaleInputResolution(2, 2), "4.3x", "1.0x", 9.67e12, "global"),
]


class TestWorkedExamples:
    @pytest.mark.parametrize("mod,flops_mult,params_mult,flops_total,classification",
                             WORKED_EXAMPLES)
    def test_totals(self, nin, mod, flops_mult, params_mult, flops_total, classification):
        delta = diff(nin, apply_mod(nin, mod), batch=1024)
        assert mult2(delta.flops_mult) == flops_mult
        assert mult2(delta.params_mult) == params_mult
        assert abs(delta.modified.forward_flops - flops_total) / flops_total < 0.005
        assert delta.classification == classification

    def test_scale_filters_row_multipliers(self, nin):
        delta = diff(nin, apply_mod(nin, ScaleFilters("conv8", 4)), batch=1024)
        rows = {r.name: r for r in delta.rows}
        assert rows["conv8"].flops_mult == 4
        assert rows["conv9"].flops_mult == 4
        assert mult2(rows["conv8"].params_mult) == "4.0x"
        assert mult2(rows["conv9"].params_mult) == "4.0x"
        assert rows["conv7"].flops_mult == 1
        assert rows["conv10"].flops_mult == 1
        # absolute totals from the published table
        assert abs(delta.modified.param_bytes - 33.9e6) / 33.9e6 < 0.005
        assert abs(delta.modified.data_volume_bytes - 6.69e9) / 6.69e9 < 0.005

    def test_filter_size_shrinks_downstream_rows(self, nin):
        delta = diff(nin, apply_mod(nin, SetFilterSize("conv7", 6, 6, 2, 2)), batch=1024)
        rows = {r.name: r for r in delta.rows}
        assert rows["conv8"].modified_shape == "1024x384x12x12"
        assert rows["conv9"].modified_shape == "1024x384x12x12"
        assert rows["conv8"].flops_mult == Fraction(144, 169)  # prints as 0.9x at 1 decimal
        assert rows["pool9"].modified_shape == "1024x384x6x6"  # ceil reabsorbs the shrink
        assert abs(delta.modified.param_bytes - 41.0e6) / 41.0e6 < 0.005

    def test_scale_categories_absolutes(self, nin):
        delta = diff(nin, apply_mod(nin, ScaleCategories(4)), batch=1024)
        assert abs(delta.modified.param_bytes - 42.6e6) / 42.6e6 < 0.005

    def test_remove_pool3_details(self, nin):
        modified = apply_mod(nin, RemoveLayer("pool3"))
        delta = diff(nin, modified, batch=1024)
        rows = {r.name: r for r in delta.rows}
        assert rows["conv4"].modified_shape == "1024x256x55x55"
        assert rows["pool3"].status == "baseline-only"
        assert delta.params_mult == 1
        assert mult2(delta.activations_mult) == "2.6x"
        assert abs(delta.modified.data_volume_bytes - 15.3e9) / 15.3e9 < 0.005

    def test_input_resolution_details(self, nin):
        delta = diff(nin, apply_mod(nin, ScaleInputResolution(2, 2)), batch=1024)
        rows = {r.name: r for r in delta.rows}
        assert rows["conv1"].modified_shape == "1024x96x111x111"
        assert delta.params_mult == 1
        assert mult2(delta.activations_mult) == "4.2x"
        assert abs(delta.modified.data_volume_bytes - 24.5e9) / 24.5e9 < 0.005


class TestLocalChangeTheorem:
    @pytest.mark.parametrize("mod", [
        ScaleInputChannels(4),
        ScaleFilters("conv8", 4),
        ScaleCategories(4),
        SetFilterSize("conv7", 5, 5, 2, 2),  # shape-preserving filter change
    ])
    def test_local_changes_touch_at_most_two_layers(self, nin, mod):
        modified = apply_mod(nin, mod)
        delta = diff(nin, modified, batch=8)
        changed_flops = [r.name for r in delta.rows
                         if r.status == "both" and r.flops_mult not in (None, 1)]
        changed_params = [r.name for r in delta.rows
                          if r.status == "both" and r.params_mult not in (None, 1)]
        assert len(set(changed_flops) | set(changed_params)) <= 2
        # spatial dims unchanged everywhere for a shape-preserving local change
        if not isinstance(mod, ScaleInputChannels):
            for r in delta.rows:
                if r.status == "both":
                    base_hw = r.baseline_shape.split("x")[2:]
                    mod_hw = r.modified_shape.split("x")[2:]
                    assert base_hw == mod_hw, r.name

    def test_global_changes_shift_downstream_spatial(self, nin):
        for mod in (RemoveLayer("pool3"), ScaleInputResolution(2, 2)):
            delta = diff(nin, apply_mod(nin, mod), batch=8)
            spatial_changed = [
                r.name for r in delta.rows
                if r.status == "both"
                and r.baseline_shape.split("x")[2:] != r.modified_shape.split("x")[2:]
            ]
            assert len(spatial_changed) >= 8


class TestClassificationIsStructural:
    def test_user_composed_local_equivalent(self, nin):
        # hand-built variant equivalent to scaling conv8's filters: no ModSpec kind involved
        from dataclasses import replace
        layers = tuple(
            replace(l, num_filters=1536) if l.name == "conv8" else l for l in nin.layers
        )
        variant = nin.with_layers(layers, name="hand-edited")
        assert diff(nin, variant, batch=8).classification == "local"

    def test_user_composed_global_equivalent(self, nin):
        # hand-built variant equivalent to removing pool9
        from dataclasses import replace
        layers = tuple(
            replace(l, predecessors=tuple("conv9" if p == "pool9" else p for p in l.predecessors))
            for l in nin.layers if l.name != "pool9"
        )
        variant = nin.with_layers(layers, name="hand-edited")
        assert diff(nin, variant, batch=8).classification == "global"

    def test_input_resolution_without_any_pooling_is_global(self):
        from archlens.arch import Architecture, conv, input_layer
        base = Architecture("flat", TensorShape(1, 3, 16, 16), (
            input_layer("in"), conv("c1", "in", 4, 3, pad=1), conv("c2", "c1", 4, 3, pad=1),
        ))
        grown = apply_mod(base, ScaleInputResolution(2, 2))
        assert diff(base, grown, batch=2).classification == "global"


class TestWireFormat:
    @pytest.mark.parametrize("mod", [m for m, *_ in WORKED_EXAMPLES])
    def test_round_trip(self, mod):
        assert mod_from_dict(mod_to_dict(mod)) == mod

    def test_unknown_kind(self):
        with pytest.raises(ArchitectureError, match="unknown modification kind"):
            mod_from_dict({"kind": "quantize"})

    def test_inline_forms(self):
        assert parse_inline_mod("remove:pool3") == RemoveLayer("pool3")
        assert parse_inline_mod("scale-filters:conv8:4") == ScaleFilters("conv8", 4)
        assert parse_inline_mod("filter-size:conv7:6x6:2x2") == SetFilterSize("conv7", 6, 6, 2, 2)
        assert parse_inline_mod("input-channels:4") == ScaleInputChannels(4)
        assert parse_inline_mod("categories:4") == ScaleCategories(4)
        assert parse_inline_mod("input-resolution:2x2") == ScaleInputResolution(2, 2)
        assert parse_inline_mod("scale-filters:conv8:3/2") == ScaleFilters("conv8", Fraction(3, 2))

    def test_inline_rejects_garbage(self):
        with pytest.raises(ArchitectureError, match="cannot parse"):
            parse_inline_mod("explode:now")
