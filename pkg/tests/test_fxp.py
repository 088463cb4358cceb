import itertools

import pytest
from hypothesis import given, strategies as st

from cordicdct import fxp
from cordicdct.fxp import FxpFormat, FxpFormatError, FxpOverflowError, FxpValue, Overflow

W8 = FxpFormat(8)
W4 = FxpFormat(4)


def v(raw, fmt=W8):
    return FxpValue(raw, fmt)


class TestFormat:
    def test_range(self):
        assert (W8.min_raw, W8.max_raw) == (-128, 127)
        assert FxpFormat(12, 3).ulp == 0.125

    @pytest.mark.parametrize("width,frac", [(1, 0), (8, 8), (8, -1)])
    def test_invalid(self, width, frac):
        with pytest.raises(ValueError):
            FxpFormat(width, frac)

    def test_real_value(self):
        assert FxpValue(-12, FxpFormat(8, 2)).value == -3.0

    def test_out_of_range_value(self):
        with pytest.raises(ValueError):
            FxpValue(128, W8)

    def test_from_real_floors(self):
        assert FxpValue.from_real(-0.3, FxpFormat(8, 2)).raw == -2


class TestAdd:
    def test_examples(self):
        assert fxp.add(v(3), v(5)).raw == 8
        assert fxp.add(v(3), v(5), carry_in=1).raw == 9
        assert fxp.add(v(127), v(1)).raw == -128

    def test_mismatch(self):
        with pytest.raises(FxpFormatError):
            fxp.add(v(1), FxpValue(1, FxpFormat(8, 1)))

    def test_trap(self):
        f = W8.with_overflow("trap")
        with pytest.raises(FxpOverflowError):
            fxp.add(v(127, f), v(1, f))

    def test_saturate(self):
        f = W8.with_overflow(Overflow.SATURATE)
        assert fxp.add(v(127, f), v(1, f)).raw == 127
        assert fxp.add(v(-128, f), v(-1, f)).raw == -128

    def test_commutative_associative_exhaustive_w5(self):
        f = FxpFormat(5)
        vals = [FxpValue(r, f) for r in range(f.min_raw, f.max_raw + 1)]
        for a, b in itertools.product(vals, repeat=2):
            assert fxp.add(a, b) == fxp.add(b, a)
            for c in vals:
                assert fxp.add(fxp.add(a, b), c) == fxp.add(a, fxp.add(b, c))

    def test_commutative_exhaustive_w8(self):
        lo, hi = W8.min_raw, W8.max_raw
        for a in range(lo, hi + 1, 3):
            for b in range(lo, hi + 1):
                assert fxp.add(v(a), v(b)).raw == fxp.add(v(b), v(a)).raw

    @given(st.integers(-128, 127), st.integers(-128, 127), st.integers(-128, 127))
    def test_associative_w8(self, a, b, c):
        assert fxp.add(fxp.add(v(a), v(b)), v(c)) == fxp.add(v(a), fxp.add(v(b), v(c)))


class TestShift:
    @pytest.mark.parametrize("raw,k,out", [(12, 2, 3), (-8, 2, -2), (-7, 1, -4)])
    def test_examples(self, raw, k, out):
        assert fxp.asr(v(raw), k).raw == out

    def test_too_far(self):
        with pytest.raises(ValueError):
            fxp.asr(v(1), 8)

    def test_compose_exhaustive(self):
        for raw in range(-128, 128):
            for j in range(8):
                for k in range(8 - j):
                    assert fxp.asr(v(raw), j + k) == fxp.asr(fxp.asr(v(raw), j), k)


class TestNot:
    def test_examples(self):
        assert fxp.bitnot(v(3, W4)).raw == -4
        assert fxp.bitnot(v(0)).raw == -1
        assert fxp.bitnot(v(-1)).raw == 0

    def test_bit_pattern(self):
        # 0b0011 -> 0b1100
        r = fxp.bitnot(v(3, W4)).raw
        assert r & 0xF == 0b1100

    @pytest.mark.parametrize("width", [2, 4, 8, 12, 16])
    def test_not_plus_one_is_negation_exhaustive(self, width):
        f = FxpFormat(width)
        span = 1 << width
        for raw in range(f.min_raw, f.max_raw + 1):
            one = FxpValue(0, f)
            got = fxp.add(fxp.bitnot(FxpValue(raw, f)), one, carry_in=1).raw
            assert (got - (-raw)) % span == 0


class TestNegate:
    def test_examples(self):
        out = fxp.negate(v(3, W4))
        assert out.raw == -3
        assert out.raw & 0xF == 0b1101
        assert fxp.negate(v(0)).raw == 0
        assert fxp.negate(v(-128)).raw == -128

    @pytest.mark.parametrize("policy", ["trap", "saturate"])
    def test_most_negative(self, policy):
        f = W8.with_overflow(policy)
        with pytest.raises(FxpOverflowError):
            fxp.negate(v(-128, f))

    def test_sub(self):
        assert fxp.sub(v(10), v(3)).raw == 7
        assert fxp.sub(v(-128), v(1)).raw == 127


class TestResize:
    def test_widen_exact(self):
        out = fxp.resize(v(-5), FxpFormat(16, 4))
        assert out.raw == -80 and out.value == -5.0

    def test_narrow_floors(self):
        assert fxp.resize(FxpValue(-3, FxpFormat(16, 1)), FxpFormat(12, 0)).raw == -2
