"""
Tests for extremal_search.py

should run with py.test

"""

from numpy.testing import assert_allclose, assert_equal, assert_raises

from ..exceptions import DomainError, Infeasible
from ..extremal_search import (HaarCandidate, candidate_to_md, estimate_A, p_grid, path_sums,
                               pscan)
from ..md_system import is_dyadic, validate
from ..norms_constants import rademacher_pnorm, u_ratio


def test_haar_candidate():

    c = HaarCandidate.from_levels([1, 0.5])
    assert_equal(c.n, 2)
    assert_equal(c.coefficients, [1, 0.5, 0.5])
    assert_allclose(path_sums(c), [1.25] * 4)

    assert_raises(ValueError, HaarCandidate, 2, [1, 1])


def test_candidate_to_md():

    d = candidate_to_md(HaarCandidate.from_levels([0.5, 0.5]))
    assert validate(d).valid
    assert is_dyadic(d)
    assert_allclose(u_ratio(d, 4).ratio, 2 ** 0.25)

    # a deeper level left at zero is still a valid system
    d = candidate_to_md(HaarCandidate.from_levels([1.0, 0.0]))
    assert validate(d).valid
    assert_allclose(u_ratio(d, 3).ratio, 1.0)

    assert_raises(Infeasible, candidate_to_md, HaarCandidate(1, [2.0]))
    assert_raises(Infeasible, candidate_to_md, HaarCandidate(2, [0.5, -0.5, 0.5]))


def test_estimate_A_reaches_rademacher_value():

    result = estimate_A(4, 2, budget=400, seed=0)

    assert_allclose(result.best_value, 2 ** 0.25, rtol=1e-9)
    assert_allclose(result.ceiling, rademacher_pnorm(2, 4))
    assert not result.lower_bound_only
    assert validate(result.witness).valid
    assert result.evaluations > 0
    assert result.trace


def test_estimate_A_methods():

    for method in ('coordinate', 'random-restart'):
        result = estimate_A(3, 3, budget=300, seed=1, method=method)
        assert_allclose(result.best_value, rademacher_pnorm(3, 3), rtol=1e-9)

    result = estimate_A(3, 2, budget=50, seed=1, method='random-restart')
    assert_equal(result.evaluations, 50)

    assert_raises(ValueError, estimate_A, 3, 2, 10, 0, 'simulated-annealing')
    assert_raises(DomainError, estimate_A, 2, 2)
    assert_raises(DomainError, estimate_A, 3, 0)
    assert_raises(DomainError, estimate_A, 3, 2, 0)


def test_estimate_A_below_three():

    p = 2.5
    result = estimate_A(p, 3, budget=300, seed=2)

    assert result.lower_bound_only
    # the shallow start with two equal levels is always tried
    assert result.best_value >= rademacher_pnorm(2, p) - 1e-9
    assert rademacher_pnorm(2, p) > rademacher_pnorm(3, p)


def test_estimate_A_is_deterministic():

    a = estimate_A(4, 2, budget=200, seed=5, method='random-restart')
    b = estimate_A(4, 2, budget=200, seed=5, method='random-restart')

    assert_equal(a.best_value, b.best_value)
    assert_equal(a.trace, b.trace)


def test_p_grid():

    assert_allclose(p_grid(2.0, 3.0, 0.25), [2.0, 2.25, 2.5, 2.75, 3.0])
    assert_allclose(p_grid(2.5, 2.6, 0.1), [2.5, 2.6])


def test_pscan():

    table = pscan(2.5, 2.6, 0.1, 3)
    assert_equal(len(table), 6)
    assert_equal(table.colnames, ['p', 'n', 'value', 'decrease'])

    rows = {(round(row['p'], 3), int(row['n'])): row for row in table}
    assert rows[(2.5, 3)]['decrease']
    assert not rows[(2.5, 2)]['decrease']
    assert not rows[(2.5, 1)]['decrease']
    assert_allclose(rows[(2.5, 2)]['value'], rademacher_pnorm(2, 2.5))

    # no decrease anywhere for p >= 3
    table = pscan(3.0, 4.0, 0.5, 8)
    assert not any(table['decrease'])

    assert_raises(DomainError, pscan, 1.5, 3.0, 0.1, 3)
    assert_raises(DomainError, pscan, 3.0, 3.0, 0.1, 3)
    assert_raises(DomainError, pscan, 2.0, 3.0, 0, 3)
