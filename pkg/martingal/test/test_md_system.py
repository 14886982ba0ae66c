"""
Tests for md_system.py

should run with py.test

"""

from fractions import Fraction

from numpy.testing import assert_equal, assert_raises

from ..exact_measure import uniform_grid
from ..exceptions import (BadCoefficientCount, InvalidSystem, LevelOutOfRange, NotDyadic,
                          NotProbability, NotSymmetric, UnknownCell)
from ..md_system import (MDSystem, children, compact, from_atoms, from_haar_coeffs,
                         from_independent_symmetric, from_rademacher_coeffs, is_dyadic, is_ip,
                         is_k_dyadic, is_m_rademacher, is_trivial, parent_cell, random_md,
                         rademacher_system, summation, validate)

F = Fraction


def thirds_system():
    return from_atoms(uniform_grid(3).breakpoints, [[0, 1, 2]], [[2, -1, -1]])


def test_validate():

    # 1. Haar and the thirds example are MD-systems
    assert validate(from_haar_coeffs([0, 1, F(1, 2), F(-1, 2)])).valid
    assert validate(thirds_system()).valid

    # 2. d_1 = (1, -2) on halves is not mean zero
    report = validate(from_atoms(uniform_grid(2).breakpoints, [[0, 1]], [[1, -2]]))
    assert not report.valid
    assert_equal([v.kind for v in report.violations], ['mean-zero'])
    assert_equal(report.violations[0].level, 1)


def test_validate_reports_every_violation():

    # level 2 cells straddle level 1 cells, and d_2 is not constant on a cell
    d = from_atoms(uniform_grid(4).breakpoints,
                   [[0, 0, 1, 1], [0, 1, 1, 2]],
                   [[1, 1, -1, -1], [1, -1, 0, 0]])
    kinds = set(v.kind for v in validate(d).violations)

    assert 'refinement' in kinds
    assert 'measurability' in kinds


def test_constructor_shapes():

    grid = uniform_grid(2)
    assert_raises(InvalidSystem, MDSystem, grid, [[0, 1]], [])
    assert_raises(InvalidSystem, MDSystem, grid, [[0, 1, 2]], [[1, -1]])


def test_parent_and_children():

    d = from_haar_coeffs([0, 1, 1, 1])

    assert_equal(parent_cell(d, 2, 0), 0)
    assert_equal(parent_cell(d, 2, 3), 1)
    assert_equal(parent_cell(d, 1, 1), 0)
    assert_equal(children(d, 2, 1), [2, 3])

    assert_equal(parent_cell(thirds_system(), 1, 2), 0)
    assert_equal(children(thirds_system(), 1, 0), [0, 1, 2])

    assert_raises(UnknownCell, parent_cell, d, 2, 4)
    assert_raises(LevelOutOfRange, children, d, 3, 0)


def test_is_k_dyadic():

    haar = from_haar_coeffs([0, 1, F(1, 2), F(-1, 2)])
    assert all(is_k_dyadic(haar, k) for k in range(3))
    assert is_dyadic(haar)

    # thirds at level 1, two halves at level 2
    d = from_atoms(uniform_grid(6).breakpoints,
                   [[0, 0, 1, 1, 2, 2], [0, 1, 2, 3, 4, 5]],
                   [[2, 2, -1, -1, -1, -1], [1, -1, 1, -1, 1, -1]])
    assert validate(d).valid
    assert not is_k_dyadic(d, 2)
    assert not is_dyadic(d)

    # d_1 two-valued on sets of measure 1/2, though the root has five children
    d = from_atoms([0, F(1, 3), F(5, 12), F(2, 3), F(3, 4), 1],
                   [[0, 1, 2, 3, 4]], [[2, 2, -2, 2, -2]])
    assert validate(d).valid
    assert is_k_dyadic(d, 1)
    assert not is_dyadic(d)


def test_is_ip():

    d = from_rademacher_coeffs([1, 2, 3])
    assert all(is_ip(d, k) for k in range(1, 4))

    assert not is_ip(thirds_system(), 1)


def test_is_m_rademacher():

    assert is_m_rademacher(rademacher_system(3), 1)

    d = from_atoms(uniform_grid(4).breakpoints,
                   [[0, 0, 1, 1], [0, 1, 2, 3]],
                   [[1, 1, -1, -1], [1, -1, 2, -2]])
    assert is_m_rademacher(d, 2)
    assert not is_m_rademacher(d, 1)

    assert_raises(NotDyadic, is_m_rademacher, thirds_system(), 1)


def test_from_haar_coeffs():

    d = from_haar_coeffs([0, 1])
    assert_equal(d.n, 1)
    assert_equal(d.difference(1).values, (F(1), F(-1)))

    d = from_haar_coeffs([0, 1, F(1, 2), F(-1, 2)])
    assert_equal(d.n, 2)
    assert_equal(d.difference(2).values, (F(1, 2), F(-1, 2), F(-1, 2), F(1, 2)))

    # the constant term is not a difference
    assert_equal(from_haar_coeffs([5, 1]), from_haar_coeffs([0, 1]))

    zero = from_haar_coeffs([0, 0, 0, 0])
    assert validate(zero).valid
    assert is_trivial(zero)

    assert_raises(BadCoefficientCount, from_haar_coeffs, [0, 1, 2])


def test_from_rademacher_coeffs():

    d = from_rademacher_coeffs([1])
    assert_equal(d.difference(1).values, (F(1), F(-1)))

    d = from_rademacher_coeffs([1, 1])
    assert_equal(summation(d).values, (F(2), F(0), F(0), F(-2)))

    assert_raises(BadCoefficientCount, from_rademacher_coeffs, [])


def test_from_independent_symmetric():

    d = from_independent_symmetric([[(1, "1/2"), (-1, "1/2")]])
    assert_equal(d.difference(1).values, (F(-1), F(1)))
    assert validate(d).valid

    d = from_independent_symmetric([[(2, F(1, 2)), (-2, F(1, 2))],
                                    [(1, F(1, 4)), (-1, F(1, 4)), (3, F(1, 4)), (-3, F(1, 4))]])
    assert validate(d).valid
    assert_equal(d.n, 2)
    assert_equal(d.grid.n_atoms, 8)

    assert_raises(NotSymmetric, from_independent_symmetric, [[(1, F(1, 2)), (-2, F(1, 2))]])
    assert_raises(NotProbability, from_independent_symmetric, [[(1, F(1, 4)), (-1, F(1, 4))]])


def test_random_md():

    d = random_md(3, 4, 10, 42)
    assert validate(d).valid
    assert_equal(d.n, 3)

    # same seed, same system
    assert_equal(random_md(3, 4, 10, 42), d)

    for seed in range(5):
        d = random_md(1, 2, 1, seed)
        assert_equal(len(set(d.difference(1).values)), 2)

    d = random_md(3, 3, 5, 7, dyadic_levels=2)
    assert validate(d).valid
    assert is_k_dyadic(d, 2)


def test_compact():

    haar = from_haar_coeffs([0, 1, F(1, 2), F(-1, 2)])
    assert_equal(compact(haar), haar)

    # the finest cell {0, 2} becomes one interval
    d = from_atoms(uniform_grid(4).breakpoints, [[0, 1, 0, 1]], [[1, -1, 1, -1]])
    c = compact(d)
    assert_equal(c.grid, uniform_grid(2))
    assert_equal(c.difference(1).values, (F(1), F(-1)))
