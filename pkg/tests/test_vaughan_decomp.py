import math

import numpy as np
import pytest

from expsumlab import floor_mangoldt as fm
from expsumlab.arith_core import sieve_mangoldt, sieve_mobius
from expsumlab.vaughan_decomp import (
    alpha_tables,
    direct_lambda_sum,
    frak_s_decomposed,
    vaughan_cut,
    vaughan_split,
)


def _wavy(freq):
    def g(d):
        d = d.astype(np.float64)
        return np.cos(2.0 * np.pi * freq * d) + 0.2
    return g


def test_vaughan_cut_values():
    assert vaughan_cut(1000) == 10
    assert vaughan_cut(999) == 9
    assert vaughan_cut(101) == 4
    assert vaughan_cut(10 ** 6) == 100


@pytest.mark.parametrize("D", [101, 1000])
@pytest.mark.parametrize("g", [lambda d: np.ones(len(d)), _wavy(0.371)],
                         ids=["ones", "wavy"])
def test_identity_exact(D, g):
    split = vaughan_split(D, g)
    direct = direct_lambda_sum(D, g)
    assert abs(split.total - direct) <= 1e-9 * (1 + abs(direct))


def test_table_contents_brute_force():
    D = 2000
    t = alpha_tables(D)
    cut = t.cut
    assert cut == 12
    assert t.rough_hi == (2 * D) // (cut + 1)
    mu = sieve_mobius(cut)
    lam_tab = sieve_mangoldt(t.rough_hi)

    def lam(n):
        return float(lam_tab.values[n - 1])

    for m in range(1, cut + 1):
        assert t.alpha(1, m) == pytest.approx(mu[m] * math.log(m), abs=1e-12)
        assert t.alpha(2, m) == float(mu[m])
    for k in range(cut + 1, t.rough_hi + 1):
        conv = -sum(mu[a] * lam(b)
                    for a in range(1, cut + 1)
                    for b in range(1, cut + 1) if a * b == k)
        assert t.alpha(3, k) == pytest.approx(conv, abs=1e-12), k
        assert t.alpha(4, k) == 1.0
        divs = -sum(mu[a] for a in range(1, cut + 1) if k % a == 0)
        assert t.alpha(5, k) == pytest.approx(float(divs), abs=1e-12), k
        assert t.alpha(6, k) == pytest.approx(lam(k), abs=1e-12)


def test_alpha_support_and_validation():
    t = alpha_tables(101)
    assert t.cut == 4 and t.rough_hi == 40
    assert t.alpha(3, 4) == 0.0  # below rough support
    assert t.alpha(3, 41) == 0.0  # above rough support
    assert t.alpha(1, 5) == 0.0  # above smooth support
    with pytest.raises(ValueError):
        t.alpha(0, 3)
    with pytest.raises(ValueError):
        t.alpha(7, 3)


def test_coefficient_growth():
    # each table obeys |alpha_k(n)| <= d(n) log(2n) for n >= 2
    D = 2000
    t = alpha_tables(D)

    def divisors(n):
        return sum(1 for a in range(1, n + 1) if n % a == 0)

    for k in (1, 2):
        for m in range(2, t.cut + 1):
            assert abs(t.alpha(k, m)) <= divisors(m) * math.log(2 * m) + 1e-12
    for k in (3, 4, 5, 6):
        for n in range(t.cut + 1, t.rough_hi + 1):
            assert abs(t.alpha(k, n)) <= divisors(n) * math.log(2 * n) + 1e-12, (k, n)


def test_tables_reuse_and_mismatch():
    t = alpha_tables(101)
    g = _wavy(0.13)
    a = vaughan_split(101, g, tables=t)
    b = vaughan_split(101, g)
    assert a.total == b.total
    with pytest.raises(ValueError):
        vaughan_split(1000, g, tables=t)


def test_small_d_rejected():
    with pytest.raises(ValueError):
        alpha_tables(100)
    with pytest.raises(ValueError):
        vaughan_split(50, lambda d: np.ones(len(d)))


def test_frak_s_decomposition_matches_direct():
    for delta in (0.0, 1.0):
        x = 12.5 * 1000
        split = frak_s_decomposed(x, 1000, delta)
        direct = fm.frak_s(x, 1000, delta)
        assert abs(split.total - direct) <= 1e-9 * (1 + abs(direct))


def test_frak_s_decomposed_validation():
    with pytest.raises(ValueError):
        frak_s_decomposed(2.0, 1000, 0.0)
    with pytest.raises(ValueError):
        frak_s_decomposed(500.0, 1000, -0.5)
