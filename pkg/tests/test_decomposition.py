import math

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings, strategies as st

from pylpmatch.decomposition import (
    MAX_TABLE_SIZE,
    DecompParams,
    F,
    FixedPoint,
    LevelKernel,
    build_level_kernel,
    f,
    g,
    g_hat,
    kernel_values,
    lp_power,
    mod_norm,
    reduce_numerators,
    reduce_symbol,
    round_down,
    telescope_check,
    to_numerators,
)
from pylpmatch.errors import InvalidArgumentError, RangeError

U_BITS = 8
U = 1 << U_BITS

symbols = st.integers(0, U - 1)
alphabets = st.sampled_from([8, 16, 32, 64, 256])
exponents_ge1 = st.sampled_from([1.0, 1.5, 2.0, 3.0])


def params_for(p, M, U=U, scaled=False):
    return DecompParams.build(p, 0.5, U, 1.0 / M, scaled=scaled)


class TestFixedPoint:
    def test_of(self):
        assert FixedPoint.of(5.75, 2) == FixedPoint(23, 2)
        assert FixedPoint(23, 2).value == 5.75

    def test_off_grid(self):
        with pytest.raises(InvalidArgumentError):
            FixedPoint.of(0.3, 4)

    def test_negative(self):
        with pytest.raises(InvalidArgumentError):
            FixedPoint(-1, 2)


class TestDecompParams:
    def test_eta_rounded_down_to_power_of_two(self):
        assert params_for(1.0, 10).M == 16
        assert DecompParams.build(1.0, 0.5, U, 0.5).M == 8
        assert DecompParams.build(1.0, 0.1, U, 0.1 / 128).M == 2048

    def test_level_range(self):
        params = params_for(1.0, 8)
        assert (params.level_lo, params.level_hi) == (-U_BITS, U_BITS)
        scaled = params_for(0.5, 8, scaled=True)
        assert scaled.level_hi == U_BITS + 4
        assert list(params.levels)[0] == -U_BITS

    def test_modulus(self):
        params = params_for(1.0, 8)
        assert params.modulus(0).value == 8
        assert params.modulus(-2).value == 2

    @pytest.mark.parametrize("U_bad", [0, 1, 6, 100])
    def test_rejects_non_power_of_two(self, U_bad):
        with pytest.raises(InvalidArgumentError):
            DecompParams.build(1.0, 0.5, U_bad, 1 / 8)

    def test_rejects_huge_alphabet(self):
        with pytest.raises(RangeError):
            DecompParams.build(1.0, 0.5, 1 << 40, 1 / 8)

    def test_direct_construction_validates_eta(self):
        with pytest.raises(InvalidArgumentError):
            DecompParams(1.0, 0.5, 0.25, U, U_BITS, -U_BITS, U_BITS)

    def test_level_out_of_range(self):
        params = params_for(1.0, 8)
        with pytest.raises(InvalidArgumentError):
            g_hat(U_BITS + 1, 1, 2, params)
        with pytest.raises(InvalidArgumentError):
            build_level_kernel(-U_BITS - 1, params)


class TestRounding:
    def test_examples(self):
        assert round_down(FixedPoint(5, 0), 0).value == 5
        assert round_down(FixedPoint(5, 0), 1).value == 4
        assert round_down(FixedPoint(23, 2), -1).value == 5.5

    def test_too_fine(self):
        with pytest.raises(InvalidArgumentError):
            round_down(FixedPoint(5, 0), -1)

    @given(st.integers(0, 1 << 20), st.integers(-6, 10))
    def test_idempotent_and_nested(self, numerator, i):
        x = FixedPoint(numerator, 6)
        once = round_down(x, i)
        assert round_down(once, i) == once
        assert once.value <= x.value < once.value + 2.0 ** i
        assert round_down(x, i + 1) == round_down(once, i + 1)


class TestModNorm:
    @pytest.mark.parametrize("r, c, expected", [(7, 5, 2), (10, 5, 0), (3, 8, 3)])
    def test_examples(self, r, c, expected):
        assert mod_norm(r, c).value == expected

    def test_non_positive_modulus(self):
        with pytest.raises(InvalidArgumentError):
            mod_norm(3, 0)

    @given(st.integers(0, 10 ** 6), st.integers(1, 10 ** 4))
    def test_periodic_and_bounded(self, r, c):
        value = mod_norm(r, c).value
        assert 0 <= value <= c / 2
        assert mod_norm(r + c, c) == mod_norm(r, c)

    @given(symbols, symbols, st.integers(1, 512))
    def test_symmetric_on_differences(self, x, y, c):
        assert mod_norm(abs(x - y), c) == mod_norm(abs(y - x), c)


class TestLevelFunctions:
    def test_F_examples(self):
        assert F(0, 5, 2, 1) == 2
        assert F(2, 5, 2, 2) == 0
        for i in range(-3, 4):
            assert F(i, 7, 7, 1.5) == 0

    def test_g_examples(self):
        assert g(0, 4, 4, 2) == 0
        assert g(0, 5, 2, 1) == 2

    def test_g_rejects_level_below_grid(self):
        with pytest.raises(InvalidArgumentError):
            g(-3, FixedPoint(5, 2), FixedPoint(2, 2), 1)

    def test_g_hat_example(self):
        params = DecompParams.build(1.0, 0.5, 8, 1 / 8)
        assert g_hat(0, 5, 2, params) == 2
        assert g_hat(0, 5, 2, params) == g(0, 5, 2, 1)
        assert g_hat(0, 3, 3, params) == 0

    def test_reduce_symbol_examples(self):
        params = DecompParams.build(1.0, 0.5, 16, 1 / 8)
        assert reduce_symbol(0, 0, params) == 0
        assert reduce_symbol(13, 0, params) == 5
        assert reduce_symbol(13, 1, params) == 6

    def test_reduce_numerators_matches_scalar(self):
        params = params_for(1.0, 16)
        xs = np.arange(U)
        numerators = to_numerators(xs, params)
        for i in (-3, 0, 2, 5):
            reduced = reduce_numerators(numerators, i, params)
            assert list(reduced) == [reduce_symbol(int(x), i, params) for x in xs]

    @given(symbols, symbols, st.integers(0, U_BITS + 2), st.floats(0.1, 3.0))
    def test_F_monotone_in_level(self, x, y, i, p):
        assert F(i + 1, x, y, p) <= F(i, x, y, p)

    def test_lp_power_conventions(self):
        assert list(lp_power([0.0, 2.0], 0)) == [0.0, 1.0]
        assert list(lp_power([0.0, 4.0], 0.5)) == [0.0, 2.0]


class TestLevelInequalities:
    @given(symbols, symbols, st.integers(-U_BITS, U_BITS), alphabets, st.floats(0.05, 3.0))
    @settings(max_examples=500, suppress_health_check=[HealthCheck.filter_too_much])
    def test_vanish_below_level(self, x, y, i, M, p):
        assume(abs(x - y) <= 2.0 ** i)
        assert g(i, x, y, p) == 0
        assert g_hat(i, x, y, params_for(p, M)) == 0

    @given(symbols, symbols, st.integers(-U_BITS, U_BITS), alphabets, st.floats(0.05, 3.0))
    @settings(max_examples=500, suppress_health_check=[HealthCheck.filter_too_much])
    def test_modular_equals_plain_in_middle_levels(self, x, y, i, M, p):
        d = abs(x - y)
        assume(d > 2.0 ** i >= 4 * d / M)
        assert g_hat(i, x, y, params_for(p, M)) == g(i, x, y, p)

    @given(symbols, symbols, st.integers(-U_BITS, U_BITS), alphabets, exponents_ge1)
    @settings(max_examples=500, suppress_health_check=[HealthCheck.filter_too_much])
    def test_low_levels_bounded(self, x, y, i, M, p):
        d = abs(x - y)
        assume(d > 0 and 4 * d / M > 2.0 ** i)
        bound = 2 * p * 2.0 ** i * d ** (p - 1) + 1e-9 * d ** p
        assert abs(g(i, x, y, p)) <= bound
        assert abs(g_hat(i, x, y, params_for(p, M))) <= bound

    @given(symbols, symbols, alphabets, exponents_ge1)
    @settings(max_examples=300, deadline=None)
    def test_level_sum_within_additive_bound(self, x, y, M, p):
        params = params_for(p, M)
        total = math.fsum(g_hat(i, x, y, params) for i in params.levels)
        d = abs(x - y)
        assert abs(total - F(-U_BITS, x, y, p)) <= (32 * p * params.eta + 1e-9) * d ** p + 1e-9

    @given(symbols, symbols, st.floats(0.05, 3.0))
    def test_finest_level_close_to_power(self, x, y, p):
        assume(x != y)
        D = abs(x - y) ** p
        value = F(-U_BITS, x, y, p)
        assert D * (1 - 2 * math.log(2) * p / U) <= value <= D


class TestTelescope:
    def test_equal_inputs(self):
        assert telescope_check(9, 9, params_for(1.0, 8)) == (0.0, 0.0)

    @given(symbols, symbols)
    def test_integer_inputs_p1(self, x, y):
        assume(x != y)
        f_sum, g_sum = telescope_check(x, y, params_for(1.0, 8))
        expected = abs(x - y) - 2.0 ** -U_BITS
        assert f_sum == pytest.approx(expected, abs=1e-9)
        assert g_sum == pytest.approx(expected, abs=1e-9)

    @given(st.integers(0, U << U_BITS), st.integers(0, U << U_BITS), st.sampled_from([0.5, 1.0, 1.5, 2.0]))
    @settings(max_examples=300, deadline=None)
    def test_fixed_point_inputs(self, x_num, y_num, p):
        x, y = FixedPoint(x_num, U_BITS), FixedPoint(y_num, U_BITS)
        params = DecompParams.build(p, 0.5, U, 1 / 8, scaled=True)
        f_sum, g_sum = telescope_check(x, y, params)
        expected = F(-U_BITS, x, y, p)
        assert f_sum == pytest.approx(expected, rel=1e-9, abs=1e-9)
        assert g_sum == pytest.approx(expected, rel=1e-9, abs=1e-9)

    def test_f_is_difference_of_F(self):
        assert f(0, 5, 2, 1) == F(0, 5, 2, 1) - F(1, 5, 2, 1)


class TestKernels:
    def test_table_examples(self):
        kernel = build_level_kernel(0, DecompParams.build(1.0, 0.5, 8, 1 / 8))
        assert kernel.table[5, 2] == 2
        assert np.all(np.diag(kernel.table) == 0)
        assert np.array_equal(kernel.table, kernel.table.T)
        assert not kernel.table.flags.writeable

    def test_refuses_large_table(self):
        kernel = LevelKernel(0, MAX_TABLE_SIZE * 2, 1.0)
        with pytest.raises(RangeError):
            kernel.table
        assert kernel.lookup(3, 1) == kernel_values(3, 1, 0, 1.0, MAX_TABLE_SIZE * 2)

    @pytest.mark.parametrize("i", [-3, 0, 2, 5])
    @pytest.mark.parametrize("p", [0.5, 1.0, 2.0])
    def test_table_matches_g_hat(self, i, p):
        params = params_for(p, 16)
        kernel = build_level_kernel(i, params)
        rng = np.random.default_rng(i + 10)
        for _ in range(200):
            x, y = (int(v) for v in rng.integers(0, U, size=2))
            a, b = reduce_symbol(x, i, params), reduce_symbol(y, i, params)
            assert kernel.table[a, b] == pytest.approx(g_hat(i, x, y, params), rel=1e-12, abs=1e-12)

    @given(
        st.integers(0, U << U_BITS),
        st.integers(0, U << U_BITS),
        st.integers(-U_BITS, U_BITS + 4),
        st.integers(0, 5),
        st.integers(0, 5),
        st.integers(0, 1 << 20),
        st.integers(0, 1 << 20),
        alphabets,
    )
    @settings(max_examples=300)
    def test_effective_alphabet(self, x_num, y_num, i, kx, ky, ox, oy, M):
        params = params_for(0.7, M, scaled=True)
        block = 1 << (i + U_BITS)
        period = M * block

        def shifted(num, k, offset):
            return FixedPoint((num // block) * block + k * period + offset % block, U_BITS)

        x, y = FixedPoint(x_num, U_BITS), FixedPoint(y_num, U_BITS)
        x2, y2 = shifted(x_num, kx, ox), shifted(y_num, ky, oy)
        assert reduce_symbol(x2, i, params) == reduce_symbol(x, i, params)
        assert reduce_symbol(y2, i, params) == reduce_symbol(y, i, params)
        assert g_hat(i, x2, y2, params) == g_hat(i, x, y, params)


def level_g(x, y, i, p):
    """g_i over arrays of values on the 2**-u grid."""

    def G(k):
        unit = 2.0 ** k
        xs, ys = np.floor(x / unit) * unit, np.floor(y / unit) * unit
        return lp_power(np.maximum(np.abs(xs - ys) - unit, 0.0), p)

    return G(i) - G(i + 1)


def level_g_hat(x, y, i, params):
    """ghat_i over arrays of integer symbols."""
    a = reduce_numerators(to_numerators(x, params), i, params)
    b = reduce_numerators(to_numerators(y, params), i, params)
    return kernel_values(a, b, i, params.p, params.M)


def pairs_at_distance(rng, lo, hi, size):
    """Integer pairs in [0, U) with |x - y| drawn uniformly from [lo, hi]."""
    d = rng.integers(lo, hi + 1, size=size)
    x = rng.integers(0, U - d)
    y = x + d
    swap = rng.random(size) < 0.5
    return np.where(swap, y, x), np.where(swap, x, y), d


SWEEP_EXPONENTS = (0.5, 1.0, 1.5, 2.0, 3.0)
SWEEP_ALPHABETS = (8, 64, 256)
SWEEP_LEVELS = range(-U_BITS, U_BITS + 1)


def test_vectorized_levels_match_scalar():
    rng = np.random.default_rng(0)
    x = rng.integers(0, U, size=200)
    y = rng.integers(0, U, size=200)
    for p in (0.5, 2.0):
        params = params_for(p, 16)
        for i in (-3, 0, 4):
            plain = level_g(x, y, i, p)
            modular = level_g_hat(x, y, i, params)
            for k in range(x.size):
                xk, yk = int(x[k]), int(y[k])
                assert plain[k] == pytest.approx(g(i, xk, yk, p), rel=1e-12, abs=1e-12)
                assert modular[k] == pytest.approx(g_hat(i, xk, yk, params), rel=1e-12, abs=1e-12)


@pytest.mark.slow
class TestLevelInequalitySweeps:
    def test_vanish_below_level(self):
        rng = np.random.default_rng(1)
        checked = 0
        for p in SWEEP_EXPONENTS:
            for M in SWEEP_ALPHABETS:
                params = params_for(p, M)
                for i in SWEEP_LEVELS:
                    reach = int(2.0 ** i) if i >= 0 else 0
                    x = rng.integers(0, U, size=400)
                    y = np.clip(x + rng.integers(-reach, reach + 1, size=400), 0, U - 1)
                    assert np.all(level_g(x, y, i, p) == 0)
                    assert np.all(level_g_hat(x, y, i, params) == 0)
                    checked += x.size
        assert checked >= 10 ** 5

    def test_modular_equals_plain_in_middle_levels(self):
        rng = np.random.default_rng(2)
        checked = 0
        for p in SWEEP_EXPONENTS:
            for M in SWEEP_ALPHABETS:
                params = params_for(p, M)
                for i in SWEEP_LEVELS:
                    lo = int(math.floor(2.0 ** i)) + 1
                    hi = min(U - 1, int(math.floor(M * 2.0 ** i / 4)))
                    if lo > hi:
                        continue
                    x, y, _ = pairs_at_distance(rng, lo, hi, 1000)
                    np.testing.assert_allclose(
                        level_g_hat(x, y, i, params), level_g(x, y, i, p), rtol=1e-12, atol=0
                    )
                    checked += x.size
        assert checked >= 10 ** 5

    def test_low_levels_bounded(self):
        rng = np.random.default_rng(3)
        checked = 0
        for p in (1.0, 1.5, 2.0, 3.0):
            for M in SWEEP_ALPHABETS:
                params = params_for(p, M)
                for i in SWEEP_LEVELS:
                    lo = max(1, int(math.floor(M * 2.0 ** i / 4)) + 1)
                    if lo > U - 1:
                        continue
                    x, y, d = pairs_at_distance(rng, lo, U - 1, 1000)
                    d = d.astype(np.float64)
                    bound = 2 * p * 2.0 ** i * d ** (p - 1) + 1e-9 * d ** p
                    assert np.all(np.abs(level_g(x, y, i, p)) <= bound)
                    assert np.all(np.abs(level_g_hat(x, y, i, params)) <= bound)
                    checked += x.size
        assert checked >= 10 ** 5

    def test_level_sum_within_additive_bound(self):
        rng = np.random.default_rng(4)
        checked = 0
        for p in (1.0, 1.5, 2.0, 3.0):
            for M in SWEEP_ALPHABETS:
                params = params_for(p, M)
                x = rng.integers(0, U, size=10 ** 4)
                y = rng.integers(0, U, size=10 ** 4)
                d = np.abs(x - y).astype(np.float64)
                total = sum(level_g_hat(x, y, i, params) for i in params.levels)
                finest = lp_power(np.maximum(d - 2.0 ** -U_BITS, 0.0), p)
                bound = (32 * p * params.eta + 1e-9) * d ** p + 1e-9
                assert np.all(np.abs(total - finest) <= bound)
                checked += x.size
        assert checked >= 10 ** 5

    def test_finest_level_close_to_power(self):
        rng = np.random.default_rng(5)
        checked = 0
        for p in (0.05, 0.5, 1.0, 2.0, 3.0):
            x = rng.integers(0, U, size=21000)
            y = rng.integers(0, U, size=21000)
            d = np.abs(x - y)[x != y].astype(np.float64)
            D = d ** p
            value = lp_power(d - 2.0 ** -U_BITS, p)
            assert np.all(D * (1 - 2 * math.log(2) * p / U) <= value)
            assert np.all(value <= D)
            checked += d.size
        assert checked >= 10 ** 5


@pytest.mark.slow
@pytest.mark.parametrize("p", [0.5, 1.0, 2.0])
def test_telescope_sweep(p):
    rng = np.random.default_rng(int(p * 10))
    params = DecompParams.build(p, 0.5, U, 1 / 8, scaled=True)
    for x_num, y_num in rng.integers(0, U << U_BITS, size=(10 ** 4, 2)):
        x, y = FixedPoint(int(x_num), U_BITS), FixedPoint(int(y_num), U_BITS)
        f_sum, g_sum = telescope_check(x, y, params)
        expected = F(-U_BITS, x, y, p)
        assert abs(f_sum - expected) <= 1e-9
        assert abs(g_sum - expected) <= 1e-9
