from fractions import Fraction

from archlens.units import (
    format_bytes,
    format_flops,
    format_multiplier,
    multiplier_decimal_string,
    round_sig,
)


def test_format_bytes_landmarks():
    assert format_bytes(30_380_704) == "30.4 MB"
    assert format_bytes(5_895_073_792) == "5.90 GB"
    assert format_bytes(1_189_478_400) == "1.19 GB"
    assert format_bytes(633_188_352) == "633 MB"
    assert format_bytes(139_776) == "140 KB"
    assert format_bytes(4) == "4.00 B"
    assert format_bytes(0) == "0 B"


def test_format_bytes_carries_across_unit_boundary():
    assert format_bytes(999_600_000) == "1.00 GB"  # 999.6 MB rounds up a unit


def test_format_flops_landmarks():
    assert format_flops(2_266_325_286_912) == "2.27 TF"
    assert format_flops(215_890_329_600) == "216 GF"
    assert format_flops(644_972_544) == "645 MF"
    assert format_flops(73_728_000) == "73.7 MF"


def test_format_multiplier_two_sig_figs():
    assert format_multiplier(Fraction(2_913_996_275_712, 2_266_325_286_912)) == "1.3x"
    assert format_multiplier(Fraction(38, 10)) == "3.8x"
    assert format_multiplier(Fraction(1)) == "1.0x"
    assert format_multiplier(Fraction(144, 169)) == "0.85x"
    assert format_multiplier(Fraction(427, 100)) == "4.3x"
    assert format_multiplier(None) == "-"
    assert format_multiplier(Fraction(101, 100)) == "1.0x"


def test_round_sig_half_up():
    assert str(round_sig(Fraction(5_895_073_792, 10**9), 3)) == "5.90"
    assert str(round_sig(0.0645, 2)) == "0.065"
    assert str(round_sig(2.265, 3)) == "2.27"  # half away from zero, not banker's


def test_multiplier_decimal_string():
    assert multiplier_decimal_string(Fraction(1, 3)) == "0.333333"
    assert multiplier_decimal_string(Fraction(4)) == "4.000000"
    assert multiplier_decimal_string(None) is None
