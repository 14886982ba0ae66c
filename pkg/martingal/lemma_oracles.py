"""
Numerical oracles for the auxiliary inequalities behind the Rademacher
constant, and brute-force evaluation of Rademacher moments.

Each check evaluates a function on a grid (or on random trials) and reports
whether the claimed monotonicity / maximality holds. Parameters outside the
range where the claim is proven (p <= 3) are still evaluated, flagged with
in_hypothesis = False and only logged.

"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from astropy.table import Table

from .exact_measure import ZERO, integrate
from .exceptions import DomainError, NotMeanZero, SizeLimit, TrivialSystem
from . import config

log = logging.getLogger(__name__)


@dataclass
class MonotoneCheck:
    grid: np.ndarray
    values: np.ndarray
    monotone: bool
    worst_violation: float
    in_hypothesis: bool = True


@dataclass
class ArgmaxCheck:
    grid: np.ndarray
    values: np.ndarray
    argmax: float
    at_boundary: bool
    monotone: bool
    worst_violation: float
    in_hypothesis: bool = True

    @property
    def holds(self):
        return self.at_boundary and self.monotone


@dataclass
class CoefficientCheck:
    equal_value: float
    best_random: float
    worst_excess: float
    violations: int
    trials: int
    zero_coefficient_value: float
    in_hypothesis: bool = True

    @property
    def holds(self):
        return self.violations == 0


def _worst_drop(values):
    """ Largest relative decrease between consecutive values (0 if nondecreasing). """
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        return 0.0
    drops = (values[:-1] - values[1:]) / np.maximum(1.0, np.abs(values[:-1]))
    return float(max(0.0, np.max(drops)))


def _monotone_check(grid, values, in_hypothesis, name, tolerance=None):
    if tolerance is None:
        tolerance = config.monotone_tolerance
    worst = _worst_drop(values)
    monotone = worst <= tolerance
    if not monotone:
        if in_hypothesis:
            log.warning("%s not monotone: worst relative drop %g", name, worst)
        else:
            log.info("%s (outside proven range) not monotone: worst relative drop %g", name, worst)
    return MonotoneCheck(grid=np.asarray(grid, dtype=float), values=np.asarray(values),
                         monotone=monotone, worst_violation=worst, in_hypothesis=in_hypothesis)


def _signed_power(x, q):
    return np.sign(x) * np.abs(x) ** q


def _u(t, xi, p):
    return (_signed_power(t + xi, p - 1) + _signed_power(t - xi, p - 1)) / t


def lemma_u(t, xi, p):
    """ u(t) = (|t+xi|^{p-1} sign(t+xi) + |t-xi|^{p-1} sign(t-xi)) / t, increasing in t > 0 for p > 3. """

    if not t > 0:
        raise DomainError("t must be positive, got {0}".format(t))
    if not xi > 0:
        raise DomainError("xi must be positive, got {0}".format(xi))
    if not p > 3:
        raise DomainError("u(t) is only claimed increasing for p > 3, got {0}".format(p))
    return float(_u(float(t), float(xi), float(p)))


def check_L3(xi, p, t_grid=None):

    if t_grid is None:
        t_grid = np.linspace(0.01, 100, 10000)
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid <= 0):
        raise DomainError("t grid must be positive")
    return _monotone_check(t_grid, _u(t_grid, xi, p), p > 3, "u(t), xi={0}, p={1}".format(xi, p))


def lemma_sum(x, y, xi, p):
    """ |x+y+xi|^p + |x+y-xi|^p + |y-x+xi|^p + |y-x-xi|^p """

    return (np.abs(x + y + xi) ** p + np.abs(x + y - xi) ** p +
            np.abs(y - x + xi) ** p + np.abs(y - x - xi) ** p)


def check_L4(xi, p, r, grid_size=10000):
    """
    On the quarter circle x^2 + y^2 = r^2, 0 < x <= r/sqrt(2), the sum
    should increase in x and peak at x = r/sqrt(2).

    """

    if not r > 0:
        raise DomainError("r must be positive, got {0}".format(r))
    top = r / math.sqrt(2)
    x = np.linspace(top / grid_size, top, grid_size)
    y = np.sqrt(np.maximum(r * r - x * x, 0.0))
    values = lemma_sum(x, y, xi, p)

    in_hypothesis = p > 3
    check = _monotone_check(x, values, in_hypothesis, "lemma_sum, xi={0}, p={1}, r={2}".format(xi, p, r))
    best = int(np.argmax(values))
    return ArgmaxCheck(grid=x, values=values, argmax=float(x[best]), at_boundary=best == grid_size - 1,
                       monotone=check.monotone, worst_violation=check.worst_violation,
                       in_hypothesis=in_hypothesis)


def _sign_matrix(n):
    """ All 2^n sign vectors as rows. """
    bits = (np.arange(2 ** n)[:, None] >> np.arange(n)) & 1
    return 1 - 2 * bits


def _shifted_rademacher_norm(signs, coeffs, xi, p):
    return float(np.mean(np.abs(xi + signs @ coeffs) ** p)) ** (1 / p)


def check_L6(n, r, xi, p, trials=500, seed=0):
    """
    ||xi + sum a_k r_k||_p over coefficient vectors with sum a_k^2 = r^2 is
    largest for |a_k| = r/sqrt(n). Random vectors are drawn on the sphere
    and compared with the equal one by enumerating all sign vectors.

    """

    if n > config.max_enumeration_n:
        raise SizeLimit("sign enumeration limited to n <= {0}".format(config.max_enumeration_n))
    if n < 1:
        raise DomainError("n must be >= 1, got {0}".format(n))

    signs = _sign_matrix(n)
    equal = _shifted_rademacher_norm(signs, np.full(n, r / math.sqrt(n)), xi, p)

    rng = np.random.default_rng(seed)
    limit = equal + config.monotone_tolerance * max(1.0, equal)
    best = -np.inf
    violations = 0
    for _ in range(trials):
        a = rng.normal(size=n)
        a *= r / np.linalg.norm(a)
        value = _shifted_rademacher_norm(signs, a, xi, p)
        best = max(best, value)
        if value > limit:
            violations += 1

    if n >= 2:
        zeroed = np.full(n, r / math.sqrt(n - 1))
        zeroed[-1] = 0.0
        zero_value = _shifted_rademacher_norm(signs, zeroed, xi, p)
    else:
        zero_value = float('nan')

    in_hypothesis = p > 3
    if violations:
        (log.warning if in_hypothesis else log.info)(
            "equal coefficients beaten %d times (n=%d, xi=%g, p=%g)", violations, n, xi, p)
    return CoefficientCheck(equal_value=equal, best_random=float(best), worst_excess=float(best - equal),
                            violations=violations, trials=trials, zero_coefficient_value=zero_value,
                            in_hypothesis=in_hypothesis)


def check_L8(g, xi, p, x_grid=None):
    """ h(x) = integral of |xi + x g|^p, for g with integral zero, is increasing on x > 0. """

    if integrate(g) != ZERO:
        raise NotMeanZero("g has integral {0}".format(integrate(g)))
    if all(v == ZERO for v in g.values):
        raise TrivialSystem("g vanishes identically")
    if not p >= 1:
        raise DomainError("p must be >= 1, got {0}".format(p))
    if x_grid is None:
        x_grid = np.linspace(0.1, 10, 1000)
    x_grid = np.asarray(x_grid, dtype=float)

    values = lemma_h(g, xi, p, x_grid)
    return _monotone_check(x_grid, values, True, "h(x), xi={0}, p={1}".format(xi, p))


def lemma_h(g, xi, p, x):
    """ h(x) = sum over atoms of |xi + x g|^p times the atom measure; x may be an array. """

    x = np.asarray(x, dtype=float)
    gv = g.as_floats()
    mu = g.grid.float_measures()
    return np.sum(np.abs(xi + np.multiply.outer(x, gv)) ** p * mu, axis=-1)


def brute_rademacher_pnorm(n, p):
    """ ||n^{-1/2} sum r_k||_p by enumerating all 2^n sign vectors. """

    if n > config.max_enumeration_n:
        raise SizeLimit("sign enumeration limited to n <= {0}, got {1}".format(config.max_enumeration_n, n))
    if n < 1:
        raise DomainError("n must be >= 1, got {0}".format(n))

    index = np.arange(2 ** n, dtype=np.int64)
    minus = np.zeros_like(index)
    for b in range(n):
        minus += (index >> b) & 1
    sums = np.abs(n - 2 * minus).astype(float)
    return float(np.mean(sums ** p) / n ** (p / 2)) ** (1 / p)


def gaussian_moment(k):
    """ E g^{2k} = (2k)! / (2^k k!) for a standard Gaussian g. """

    return math.factorial(2 * k) // (2 ** k * math.factorial(k))


def rademacher_moment(n, k):
    """ E (n^{-1/2} sum r_j)^{2k} as an exact rational. """

    total = sum(math.comb(n, j) * (n - 2 * j) ** (2 * k) for j in range(n + 1))
    return Fraction(total, 2 ** n * n ** k)


def check_moment_domination(n, k_max):
    """
    Even moments of normalized Rademacher sums against Gaussian moments,
    k = 1..k_max. Returns a Table with columns k, rademacher, gaussian, holds.

    """

    rows = []
    for k in range(1, k_max + 1):
        moment = rademacher_moment(n, k)
        gauss = gaussian_moment(k)
        rows.append((k, float(moment), gauss, moment <= gauss))
    return Table(rows=rows, names=('k', 'rademacher', 'gaussian', 'holds'))


def mgf_series(lam, terms=400):
    """
    sum_k (2k)! / (2^k (k!)^2) lam^k, which equals (1 - 2 lam)^{-1/2} for
    0 <= lam < 1/2.

    """

    if not 0 <= lam < 0.5:
        raise DomainError("the series converges for 0 <= lambda < 1/2, got {0}".format(lam))
    return float(sum(math.comb(2 * k, k) * (lam / 2) ** k for k in range(terms)))
