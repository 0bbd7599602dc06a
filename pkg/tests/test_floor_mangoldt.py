import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expsumlab import floor_mangoldt as fm
from expsumlab.arith_core import mangoldt_point, sieve_mangoldt
from expsumlab.errors import CapacityError, DegenerateFitError
from expsumlab.seeding import DetRand


def test_direct_hand_values():
    assert fm.s_lambda_direct(1) == 0.0
    assert fm.s_lambda_direct(4) == pytest.approx(2.0 * math.log(2.0), abs=1e-12)
    assert fm.s_lambda_direct(10) == pytest.approx(math.log(60.0), abs=1e-12)


def test_blocked_matches_direct():
    xs = [10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6]
    rng = DetRand(17)
    xs += [rng.integer(10, 10 ** 5) for _ in range(20)]
    for x in xs:
        a = fm.s_lambda_direct(x)
        b = fm.s_lambda_blocked(x)
        assert abs(a - b) <= 1e-6 * (1 + abs(a)), x


def test_blocked_worker_invariance():
    x = 10 ** 5 + 7
    assert fm.s_lambda_blocked(x, workers=1) == fm.s_lambda_blocked(x, workers=4)


@given(st.integers(1, 10 ** 7))
@settings(max_examples=300)
def test_block_count_budget(x):
    assert fm.blocked_block_count(x) <= 2 * (math.isqrt(x - 1) + 1) + 2 if x > 1 \
        else fm.blocked_block_count(x) <= 4


def test_capacity_guards():
    with pytest.raises(CapacityError, match="blocked"):
        fm.s_lambda_direct(fm.DIRECT_LIMIT + 1)
    with pytest.raises(CapacityError):
        fm.s_lambda_blocked(fm.BLOCKED_LIMIT + 1)
    with pytest.raises(ValueError):
        fm.s_lambda_direct(0)
    with pytest.raises(ValueError):
        fm.s_lambda_blocked(12.5)


def test_main_constant_hand_values():
    assert fm.main_constant(2).value == pytest.approx(math.log(2.0) / 6.0, abs=1e-15)
    want4 = math.log(2.0) / 6.0 + math.log(3.0) / 12.0 + math.log(2.0) / 20.0
    assert fm.main_constant(4).value == pytest.approx(want4, abs=1e-15)


def test_main_constant_monotone_with_certified_tail():
    prev = None
    for T in (2, 4, 8, 16, 100, 1000, 10 ** 4):
        c = fm.main_constant(T)
        assert c.tail_bound == fm.tail_bound(T)
        if prev is not None:
            assert c.value >= prev.value  # Lambda >= 0
            assert c.value - prev.value <= fm.tail_bound(prev.T)
        prev = c


def test_tail_bound_validation():
    assert fm.tail_bound(100) == pytest.approx((math.log(100.0) + 1.0) / 100.0)
    with pytest.raises(ValueError):
        fm.tail_bound(1)
    with pytest.raises(ValueError):
        fm.main_constant(1)
    with pytest.raises(ValueError):
        fm.main_constant(2.5)


def test_best_constant_cached():
    a = fm.best_constant(10 ** 4)
    b = fm.best_constant(10 ** 4)
    assert a is b
    assert a.value == fm.main_constant(10 ** 4).value


def test_frak_s_hand_value():
    # window (5, 10]: Lambda lives on 7, 8, 9; psi(100/8) = psi(12.5) = 0
    want = (math.log(7.0) * (2.0 / 7.0 - 0.5)
            + math.log(3.0) * (1.0 / 9.0 - 0.5))
    assert fm.frak_s(100.0, 5) == pytest.approx(want, abs=1e-12)


def test_frak_s_within_half_chebyshev():
    for D in (50, 500):
        lam = sieve_mangoldt(2 * D).values
        half = 0.5 * float(np.sum(lam[D:2 * D]))
        for delta in (0.0, 0.5, 2.0):
            assert abs(fm.frak_s(12345.678, D, delta)) <= half + 1e-9


def test_frak_s_validation():
    with pytest.raises(ValueError):
        fm.frak_s(2.0, 5)
    with pytest.raises(ValueError):
        fm.frak_s(100.0, 0)
    with pytest.raises(ValueError):
        fm.frak_s(100.0, 5, delta=-1.0)


def test_r_delta_empty_window():
    assert fm.r_delta(100.0, 10.0) == 0.0
    assert fm.r_delta(100.0, 11.0) == 0.0
    assert fm.r_delta_dyadic(100.0, 10.0) == 0.0


def test_r_delta_brute_oracle():
    x, E, delta = 1000.5, 5.0, 0.7
    lo, hi = 5, int(x / E)
    want = math.fsum(
        mangoldt_point(d) * (((x / (d + delta)) % 1.0) - 0.5)
        for d in range(lo + 1, hi + 1)
    )
    assert fm.r_delta(x, E, delta) == pytest.approx(want, abs=1e-10)


def test_r_delta_validation():
    with pytest.raises(ValueError):
        fm.r_delta(100.0, 0.5)
    with pytest.raises(ValueError):
        fm.r_delta(100.0, 2.0, delta=-0.1)


def test_dyadic_recombination():
    x = 10 ** 5
    E = x ** (8.0 / 17.0)
    for delta in (0.0, 1.0):
        a = fm.r_delta(x, E, delta)
        b = fm.r_delta_dyadic(x, E, delta)
        assert abs(a - b) <= 1e-9 * (1 + abs(a))


def test_error_curve_invariants():
    const = fm.main_constant(10 ** 4)
    curve = fm.error_curve((10 ** 4, 10 ** 5), constant=const)
    assert curve.xs == (10 ** 4, 10 ** 5)
    assert np.allclose(curve.e_values,
                       curve.s_values - const.value * np.array(curve.xs))
    assert np.allclose(curve.band, const.tail_bound * np.array(curve.xs))
    assert curve.methods == ("blocked", "blocked")


def test_geometric_grid():
    grid = fm.geometric_grid(10 ** 4, 10 ** 9, 12)
    assert grid[0] == 10 ** 4 and grid[-1] == 10 ** 9
    assert all(a < b for a, b in zip(grid, grid[1:]))
    assert len(grid) == 12
    with pytest.raises(ValueError):
        fm.geometric_grid(10, 10, 5)
    with pytest.raises(ValueError):
        fm.geometric_grid(10, 100, 1)


def _synthetic_curve(power, xs=(10 ** 4, 10 ** 5, 10 ** 6, 10 ** 7)):
    xs_arr = np.array(xs, dtype=np.float64)
    e = xs_arr ** power
    const = fm.MainConstant(T=2, value=0.0, tail_bound=0.0)
    return fm.ErrorCurve(xs=tuple(xs), s_values=e.copy(), e_values=e,
                         band=np.zeros(len(xs)), methods=("blocked",) * len(xs),
                         constant=const)


def test_fit_recovers_synthetic_slope():
    fit = fm.fit_error_slope(_synthetic_curve(0.5))
    assert fit.slope == pytest.approx(0.5, abs=1e-9)
    assert fit.slope_stderr == pytest.approx(0.0, abs=1e-9)
    assert fit.used == 4 and fit.excluded == 0


def test_fit_floor_exclusion():
    curve = _synthetic_curve(0.5)
    # a floor above the smallest |E| = 100 drops exactly that point
    fit = fm.fit_error_slope(curve, floor=200.0)
    assert fit.used == 3 and fit.excluded == 1
    assert fit.slope == pytest.approx(0.5, abs=1e-9)


def test_fit_band_exclusion():
    curve = _synthetic_curve(0.5)
    big_band = fm.ErrorCurve(xs=curve.xs, s_values=curve.s_values,
                             e_values=curve.e_values,
                             band=np.full(len(curve.xs), 1e12),
                             methods=curve.methods, constant=curve.constant)
    with pytest.raises(DegenerateFitError):
        fm.fit_error_slope(big_band)


def test_fit_needs_points():
    with pytest.raises(DegenerateFitError, match="usable points"):
        fm.fit_error_slope(_synthetic_curve(0.5, xs=(10 ** 4, 10 ** 5)))
