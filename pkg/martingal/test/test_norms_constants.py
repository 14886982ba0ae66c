"""
Tests for norms_constants.py

should run with py.test

"""

import math
from fractions import Fraction

import numpy as np
from numpy.testing import assert_allclose, assert_equal, assert_raises
from scipy.special import gammaln

from ..exact_measure import uniform_grid
from ..exceptions import DomainError, TrivialSystem
from ..md_system import (from_atoms, from_haar_coeffs, from_rademacher_coeffs, rademacher_system,
                         random_md)
from ..norms_constants import (LUXEMBURG_BOUND, bound_check, classical_ratio, haar_bound,
                               khintchine_constant, log_gamma, luxemburg_norm, mgf_ratio,
                               pnorm_sum, rademacher_pnorm, tail_check, u_ratio, verify_khintchine)

F = Fraction


def thirds_system():
    return from_atoms(uniform_grid(3).breakpoints, [[0, 1, 2]], [[2, -1, -1]])


def test_pnorm_sum():

    assert_allclose(pnorm_sum(from_haar_coeffs([0, 1]), 3.7), 1.0)
    assert_allclose(pnorm_sum(from_rademacher_coeffs([1, 1]), 4), 8 ** 0.25)
    assert_allclose(pnorm_sum(thirds_system(), 3), (10 / 3) ** (1 / 3))

    assert_raises(DomainError, pnorm_sum, thirds_system(), 0.5)


def test_u_ratio():

    for p in (1, 2.5, 4, 9):
        assert_allclose(u_ratio(from_rademacher_coeffs([F(3, 7)]), p).ratio, 1.0)

    assert_allclose(u_ratio(from_rademacher_coeffs([1, 1]), 4).ratio, 2 ** 0.25)
    assert_allclose(u_ratio(from_rademacher_coeffs([5, 5]), 4).ratio, 2 ** 0.25)

    result = u_ratio(thirds_system(), 3)
    assert_allclose(result.sup_square, 2.0)
    assert_allclose(result.ratio, (10 / 3) ** (1 / 3) / 2)

    assert_raises(TrivialSystem, u_ratio, from_haar_coeffs([0, 0]), 3)


def test_classical_ratio():

    # the classical square function of the thirds example has sup 2 as well
    assert_allclose(classical_ratio(thirds_system(), 3).ratio, u_ratio(thirds_system(), 3).ratio)
    assert_allclose(classical_ratio(thirds_system(), 3).sup_square, 2.0)

    d = from_haar_coeffs([0, 1, F(1, 2), F(-1, 2)])
    assert_allclose(classical_ratio(d, 5).ratio, u_ratio(d, 5).ratio)


def test_rademacher_pnorm():

    for p in (1, 2.5, 3, 10):
        assert_allclose(rademacher_pnorm(1, p), 1.0)

    p = 2.5
    assert_allclose(rademacher_pnorm(2, p) ** p, 2 ** (p / 2) / 2)
    assert_allclose(rademacher_pnorm(3, p) ** p, 3 ** (p / 2) / 4 + 3 / (4 * 3 ** (p / 2)))

    # p = 2 is the isometry
    for n in range(1, 8):
        assert_allclose(rademacher_pnorm(n, 2), 1.0)

    assert_raises(DomainError, rademacher_pnorm, 0, 3)
    assert_raises(DomainError, rademacher_pnorm, 2, 0)


def test_rademacher_pnorm_increases_to_limit_for_p_above_3():

    for p in (3, 4, 6):
        values = [rademacher_pnorm(n, p) for n in range(1, 51)]
        assert np.all(np.diff(values) >= -1e-12)
        assert values[-1] <= khintchine_constant(p) + 1e-12


def test_log_gamma():

    assert_allclose(log_gamma(1), 0.0, atol=1e-14)
    assert_allclose(log_gamma(2.5), math.log(3 * math.sqrt(math.pi) / 4), rtol=1e-13)
    assert_allclose(log_gamma(10), math.log(362880), rtol=1e-13)

    x = np.linspace(0.05, 60, 200)
    assert_allclose([log_gamma(t) for t in x], gammaln(x), rtol=1e-12, atol=1e-13)

    assert_raises(DomainError, log_gamma, 0)


def test_khintchine_constant():

    assert_allclose(khintchine_constant(4), 3 ** 0.25, rtol=1e-13)
    assert_allclose(khintchine_constant(3), math.sqrt(2) * math.pi ** (-1 / 6), rtol=1e-13)

    # even moments of the Gaussian: E g^6 = 15
    assert_allclose(khintchine_constant(6), 15 ** (1 / 6), rtol=1e-13)

    assert_raises(DomainError, khintchine_constant, 2)


def test_mgf_ratio():

    check = mgf_ratio(from_rademacher_coeffs([1]), 0.4)
    assert_allclose(check.lhs, math.exp(0.4))
    assert_allclose(check.rhs, 1 / math.sqrt(0.2))
    assert check.holds

    check = mgf_ratio(from_rademacher_coeffs([1, 1]), 0.45)
    # outcomes +-2 with mass 1/4 each and 0 with mass 1/2, normalized by sqrt(2)
    assert_allclose(check.lhs, 0.5 * math.exp(0.45 * 2) + 0.5)
    assert check.holds

    check = mgf_ratio(random_md(3, 3, 5, 11), 1e-6)
    assert_allclose(check.lhs, 1.0, atol=1e-3)
    assert_allclose(check.rhs, 1.0, atol=1e-3)

    assert_raises(DomainError, mgf_ratio, from_rademacher_coeffs([1]), 0.5)


def test_luxemburg_norm():

    check = luxemburg_norm(from_rademacher_coeffs([1]))
    assert_allclose(check.lhs, 1 / math.sqrt(math.log(2)), rtol=1e-9)
    assert_allclose(check.rhs, LUXEMBURG_BOUND)
    assert_allclose(LUXEMBURG_BOUND, 1.632993161855452)
    assert check.holds

    check = luxemburg_norm(from_rademacher_coeffs([3, 3]))
    assert check.lhs <= LUXEMBURG_BOUND * math.sqrt(18)
    assert check.holds

    assert_raises(TrivialSystem, luxemburg_norm, from_haar_coeffs([0, 0]))


def test_tail_check():

    h2 = from_haar_coeffs([0, 1])

    check = tail_check(h2, 0.5)
    assert_equal(check.details['exact_lhs'], F(1, 2))
    assert_allclose(check.rhs, math.exp(-1 / 8))
    assert check.holds

    check = tail_check(h2, 2)
    assert_equal(check.lhs, 0.0)
    assert check.holds

    check = tail_check(thirds_system(), 1, mode='homogeneous')
    assert_equal(check.details['exact_lhs'], F(1, 3))
    assert_equal(check.details['alpha'], F(1, 3))
    assert_allclose(check.rhs, math.exp(-1 / 12))
    assert check.holds

    # lambda on an atom value of the sum: the tail is strict
    d = from_rademacher_coeffs([F(3, 10)])
    assert_equal(tail_check(d, 0.3).details["exact_lhs"], 0)
    assert_equal(tail_check(d, F(3, 10)).details["exact_lhs"], 0)
    assert_equal(tail_check(d, 0.2).details["exact_lhs"], F(1, 2))
    check = tail_check(from_rademacher_coeffs([F(1, 10), F(1, 5)]), 0.1, mode="homogeneous")
    # sums 3/10, -1/10, 1/10, -3/10: only 3/10 lies strictly above 1/10
    assert_equal(check.details["exact_lhs"], F(1, 4))

    assert_raises(DomainError, tail_check, h2, 0)
    assert_raises(ValueError, tail_check, h2, 1, mode='gaussian')


def test_verify_khintchine():

    # equality for d_k = r_k / sqrt(n)
    check = verify_khintchine(rademacher_system(3), 3)
    assert_allclose(check.lhs, check.rhs, rtol=1e-12)
    assert check.holds

    check = verify_khintchine(from_rademacher_coeffs([1]), 5)
    assert_allclose(check.lhs, 1.0)
    assert_allclose(check.rhs, 1.0)
    assert check.holds

    for seed in range(5):
        check = verify_khintchine(random_md(4, 3, 5, seed), 4)
        assert check.holds
        assert check.details['weak_holds']

    assert_raises(DomainError, verify_khintchine, rademacher_system(3), 2.5)


def test_haar_bound():

    check = haar_bound([0, 1], 3)
    assert_allclose(check.lhs, 1.0)
    assert_allclose(check.rhs, khintchine_constant(3))
    assert check.holds

    assert haar_bound([7, 1, F(1, 2), F(-1, 2), 2, 0, 1, -1], 4).holds

    assert_raises(TrivialSystem, haar_bound, [3, 0], 3)
    assert_raises(DomainError, haar_bound, [0, 1], 2.5)


def test_bound_check():

    check = bound_check(1.0, 2.0)
    assert check.holds
    assert_equal(check.slack, 1.0)

    assert not bound_check(2.0, 1.0).holds
    assert bound_check(1.0 + 1e-12, 1.0).holds


def test_rademacher_pnorm_close_to_limit_for_large_n():

    for p in (3, 4, 6):
        assert abs(rademacher_pnorm(2000, p) - khintchine_constant(p)) <= 5e-3
        assert rademacher_pnorm(2000, p) <= khintchine_constant(p) + 1e-12
