"""
Tests for transforms.py

should run with py.test

"""

from fractions import Fraction

import pytest
from numpy.testing import assert_allclose, assert_equal, assert_raises

from ..exact_measure import StepFunction, make_grid, uniform_grid
from ..exceptions import (DomainError, InvalidSystem, LevelOutOfRange, NotDyadic, NotIP,
                          NotKMinus1Dyadic, NotMRademacher, NotPrepared)
from ..md_system import (from_atoms, from_haar_coeffs, from_rademacher_coeffs, is_dyadic, is_ip,
                         is_m_rademacher, random_md, validate)
from ..norms_constants import rademacher_pnorm, u_ratio
from ..square_functions import square_cww
from ..suites import _random_haar_coeffs, trial_rng
from ..transforms import (dyadize, pointwise_relation, procedure1, procedure2, r1_transform,
                          r2_transform, rademacherize, run_transform)

F = Fraction


def thirds_system():
    return from_atoms(uniform_grid(3).breakpoints, [[0, 1, 2]], [[2, -1, -1]])


def haar_system():
    return from_haar_coeffs([0, 1, F(1, 2), F(-1, 2)])


def procedure1_example():
    """ d_1 = +-1 on halves, d_2 = +-2 on [0,1/2) and +-1 on [1/2,1). """
    return from_atoms(uniform_grid(4).breakpoints,
                      [[0, 0, 1, 1], [0, 1, 2, 3]],
                      [[1, 1, -1, -1], [2, -2, 1, -1]])


def test_pointwise_relation():

    halves = uniform_grid(2)
    quarters = uniform_grid(4)
    before = StepFunction(halves, [4, 1])

    assert_equal(pointwise_relation(before, StepFunction(quarters, [4, 4, 1, 1])), 'equal')
    assert_equal(pointwise_relation(before, StepFunction(quarters, [4, 3, 1, 0])), 'decreased')
    assert_equal(pointwise_relation(before, StepFunction(halves, [3, 2])), 'incomparable')


def test_r1_thirds():

    d = thirds_system()
    output, report = r1_transform(d, 1, 3)

    # the +2 cell is kept whole, each -1 cell is split a quarter to +2
    assert_equal(output.grid.breakpoints, (F(0), F(1, 3), F(5, 12), F(2, 3), F(3, 4), F(1)))
    assert_equal(output.difference(1).values, (F(2), F(2), F(-2), F(2), F(-2)))
    plus = sum(m for m, v in zip(output.grid.measures, output.difference(1).values) if v > 0)
    assert_equal(plus, F(1, 2))

    assert validate(output).valid
    assert is_ip(output, 1)
    assert report.passed
    assert_equal(report.cww_pointwise_relation, 'equal')
    assert report.pnorm_delta >= 0


def test_r1_keeps_dyadic_input():

    d = haar_system()
    for k in (1, 2):
        output, report = r1_transform(d, k, 4)
        assert_equal(output, d)
        assert report.passed
        assert_allclose(report.after.u, report.before.u)


def test_r1_random():

    for seed in range(4):
        d = random_md(2, 3, 5, seed)
        output, report = r1_transform(d, 1, 4)
        assert report.passed, report.failed_certificates()
        assert is_ip(output, 1)
        assert_equal(square_cww(output).sup_sq, square_cww(d).sup_sq)


def test_r1_needs_dyadic_prefix():

    d = from_atoms(uniform_grid(6).breakpoints,
                   [[0, 0, 1, 1, 2, 2], [0, 1, 2, 3, 4, 5]],
                   [[2, 2, -1, -1, -1, -1], [1, -1, 1, -1, 1, -1]])

    assert_raises(NotKMinus1Dyadic, r1_transform, d, 2, 3)
    assert_raises(LevelOutOfRange, r1_transform, d, 3, 3)

    bad = from_atoms(uniform_grid(2).breakpoints, [[0, 1]], [[1, -2]])
    assert_raises(InvalidSystem, r1_transform, bad, 1, 3)


def test_r2_after_r1_thirds():

    ip_system, _ = r1_transform(thirds_system(), 1, 3)
    output, report = r2_transform(ip_system, 1, 3)

    # five level-1 cells collapse into the two sign classes
    assert_equal(output.grid, uniform_grid(2))
    assert_equal(output.difference(1).values, (F(2), F(-2)))
    assert is_dyadic(output)
    assert report.passed
    assert_allclose(report.after.u, 1.0)


def test_r2_keeps_dyadic_input():

    d = haar_system()
    for k in (1, 2):
        output, report = r2_transform(d, k, 4)
        assert_equal(output, d)
        assert report.passed


def test_r2_copies_the_maximizing_cell():

    # level 1: +1 on [0,1/4) and on [1/4,1/2), -1 on [1/2,1)
    # level 2: +-3 inside the first cell, +-1 inside the others
    d = from_atoms([0, F(1, 8), F(1, 4), F(3, 8), F(1, 2), F(3, 4), 1],
                   [[0, 0, 1, 1, 2, 2], [0, 1, 2, 3, 4, 5]],
                   [[1, 1, 1, 1, -1, -1], [3, -3, 1, -1, 1, -1]])
    assert validate(d).valid
    assert is_ip(d, 1)

    output, report = r2_transform(d, 1, 4)

    assert_equal(output.grid, uniform_grid(4))
    assert_equal(output.difference(1).values, (F(1), F(1), F(-1), F(-1)))
    assert_equal(output.difference(2).values, (F(3), F(-3), F(1), F(-1)))
    assert is_dyadic(output)

    assert report.passed
    assert_allclose(report.before.pnorm, 40 ** 0.25)
    assert_allclose(report.after.pnorm, 72 ** 0.25)
    assert_equal(report.after.sup_cww_sq, F(10))


def test_r2_needs_ip():

    assert_raises(NotIP, r2_transform, thirds_system(), 1, 3)


def test_r2_zero_level():

    # d_2 vanishes on the right half; its two equal children serve as the sides
    d = from_atoms(uniform_grid(4).breakpoints,
                   [[0, 0, 1, 1], [0, 1, 2, 3]],
                   [[1, 1, -1, -1], [1, -1, 0, 0]])
    output, report = r2_transform(d, 2, 3)

    assert report.passed
    assert_equal(report.notes['halved_cells'], [])
    assert is_dyadic(output)


def test_procedure1_example():

    d = procedure1_example()
    output, report = procedure1(d, 2, 4)

    assert_equal(output.difference(2).values, (F(2), F(-2), F(2), F(-2)))
    assert_equal(output.difference(1), d.difference(1))
    assert_equal(report.before.sup_cww_sq, F(5))
    assert_equal(report.after.sup_cww_sq, F(5))
    assert report.passed
    assert report.pnorm_delta > 0


def test_procedure1_noop_and_zero_continuation():

    d = from_rademacher_coeffs([1, 2])
    output, report = procedure1(d, 2, 4)
    assert_equal(output, d)
    assert report.passed

    zero = from_atoms(uniform_grid(4).breakpoints,
                      [[0, 0, 1, 1], [0, 1, 2, 3]],
                      [[1, 1, -1, -1], [2, -2, 0, 0]])
    output, report = procedure1(zero, 2, 4)
    assert_equal(output, zero)
    assert_equal(report.notes['skipped_cells'], [0])


def test_procedure1_preconditions():

    assert_raises(NotMRademacher, procedure1, from_rademacher_coeffs([1, 1, 2]), 2, 4)
    assert_raises(LevelOutOfRange, procedure1, procedure1_example(), 1, 4)

    thirds_then_halves = from_atoms(uniform_grid(6).breakpoints,
                                    [[0, 0, 1, 1, 2, 2], [0, 1, 2, 3, 4, 5]],
                                    [[2, 2, -1, -1, -1, -1], [1, -1, 1, -1, 1, -1]])
    assert_raises(NotDyadic, procedure1, thirds_then_halves, 2, 3)


def test_procedure2_example():

    d = from_atoms(uniform_grid(4).breakpoints,
                   [[0, 0, 1, 1], [0, 1, 2, 3]],
                   [[1, 1, -1, -1], [2, -2, 2, -2]])
    output, report = procedure2(d, 2, 4)

    assert_equal(report.notes['target_moduli_sq'], {0: F(5, 2)})
    moduli = set(abs(v) for f in output.differences for v in f.values)
    assert_equal(len(moduli), 1)
    assert_allclose(float(moduli.pop()) ** 2, 2.5, rtol=1e-15)

    assert is_m_rademacher(output, 1)
    assert report.passed
    assert report.notes['approximation_bound'] < 1e-15


def test_procedure2_fills_vanishing_levels():

    d = from_atoms(uniform_grid(4).breakpoints,
                   [[0, 0, 1, 1], [0, 1, 2, 3]],
                   [[1, 1, -1, -1], [2, -2, 0, 0]])
    output, report = procedure2(d, 2, 4)

    assert validate(output).valid
    assert is_m_rademacher(output, 1)
    assert report.passed

    second = output.difference(2).values
    assert second[0] > 0 and second[2] > 0
    assert second[1] < 0 and second[3] < 0


def test_procedure2_noop_on_rademacher():

    d = from_rademacher_coeffs([1, 1, 1])
    for m in (2, 3):
        output, report = procedure2(d, m, 3)
        assert_equal(output, d)
        assert report.passed


def test_procedure2_needs_prepared_input():

    assert_raises(NotPrepared, procedure2, procedure1_example(), 2, 4)


def test_dyadize():

    d = haar_system()
    output, report = dyadize(d, 4)
    assert_equal(output, d)
    assert report.passed

    output, report = dyadize(thirds_system(), 3)
    assert_equal(output.grid, make_grid([0, F(1, 2), 1]))
    assert_equal(output.difference(1).values, (F(2), F(-2)))
    assert report.after.u >= (10 / 3) ** (1 / 3) / 2
    assert_equal(len(report.steps), 2)

    assert_raises(DomainError, dyadize, d, 2)


def test_dyadize_random():

    for seed in (3, 5):
        d = random_md(3, 4, 5, seed)
        output, report = dyadize(d, 4)
        assert is_dyadic(output)
        assert report.passed, report.failed_certificates()
        assert report.after.u >= report.before.u - 1e-9


def test_rademacherize():

    d = from_rademacher_coeffs([1, 1])
    output, report = rademacherize(d, 4)
    assert_equal(output, d)
    assert report.passed

    d = procedure1_example()
    output, report = rademacherize(d, 4)
    assert is_m_rademacher(output, 1)
    assert report.passed
    assert report.after.u >= report.before.u
    assert_allclose(report.after.u, rademacher_pnorm(2, 4), rtol=1e-9)

    assert_raises(DomainError, rademacherize, d, 2.5)


def test_rademacherize_haar():

    for trial, rng in enumerate(trial_rng(9, 6)):
        coeffs = _random_haar_coeffs(rng, 3, 3)
        d = from_haar_coeffs(coeffs)
        output, report = rademacherize(d, 4)
        assert report.passed, (trial, report.failed_certificates())
        assert report.after.u >= u_ratio(d, 4).ratio - 1e-9
        assert report.after.u <= rademacher_pnorm(d.n, 4) + 1e-9


def test_run_transform():

    d = procedure1_example()
    output, report = run_transform('proc1', d, 4, level=2)
    assert_equal(report.kind, 'proc1')

    output, report = run_transform('dyadize', thirds_system(), 3)
    assert_equal(report.kind, 'dyadize')

    assert_raises(LevelOutOfRange, run_transform, 'r1', d, 3)
    assert_raises(ValueError, run_transform, 'r3', d, 3, 1)


def random_dyadic(rng):
    """ A seeded Haar system with at least two levels. """
    coeffs = _random_haar_coeffs(rng, 3, 3)
    while len(coeffs) < 4:
        coeffs = _random_haar_coeffs(rng, 3, 3)
    return from_haar_coeffs(coeffs)


@pytest.mark.parametrize('p', [3, 3.5, 6])
def test_r2_random(p):

    for trial in range(4):
        d = random_md(2, 3, 5, 100 + trial)
        for k in (1, 2):
            d, report = r1_transform(d, k, p)
            assert report.passed, (trial, k, report.failed_certificates())
            output, report = r2_transform(d, k, p)
            assert report.passed, (trial, k, report.failed_certificates())
            assert report.after.pnorm >= report.before.pnorm - 1e-9
            d = output
        assert is_dyadic(d)


@pytest.mark.parametrize('p', [3, 3.5, 6])
def test_procedures_random(p):

    for trial, rng in enumerate(trial_rng(21, 6)):
        d = random_dyadic(rng)
        m = d.n

        prepared, report = procedure1(d, m, p)
        assert report.passed, (trial, report.failed_certificates())
        assert_equal(square_cww(prepared).sup_sq, square_cww(d).sup_sq)
        assert report.after.pnorm >= report.before.pnorm - 1e-9

        output, report = procedure2(prepared, m, p)
        assert report.passed, (trial, report.failed_certificates())
        assert is_m_rademacher(output, m - 1)
        assert report.after.pnorm >= report.before.pnorm - 1e-9
