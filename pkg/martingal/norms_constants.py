"""
p-norms of martingale sums, the ratio U(d) = ||sum d_k||_p / ||CWW(d)||_inf,
the sharp Khintchine constants, and the sub-Gaussian bounds built on them.

Constants
---------
rademacher_pnorm(n, p)  = || n^{-1/2} (r_1 + ... + r_n) ||_p     (best constant for fixed n, p >= 3)
khintchine_constant(p)  = 2^{1/2} (Gamma((p+1)/2) / sqrt(pi))^{1/p}   (its limit, p > 2)

Bounds checked on a given system
--------------------------------
verify_khintchine  ||sum d||_p <= rademacher_pnorm(n, p) ||CWW||_inf,        p >= 3
mgf_ratio          E exp(lam (sum d / ||CWW||_inf)^2) <= (1 - 2 lam)^{-1/2},  0 < lam < 1/2
luxemburg_norm     ||sum d||_psi <= sqrt(8/3) ||CWW||_inf,   psi(t) = exp(t^2) - 1
tail_check         mu{sum d > lam} <= exp(-lam^2 / 2 ||CWW||^2)         (cww)
                   mu{sum d > lam} <= exp(-alpha lam^2 / ||S||^2)      (homogeneous)

"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect
from scipy.stats import binom

from .exact_measure import decimal_rational, integrate_abs_pow
from .exceptions import DomainError, TrivialSystem
from .md_system import from_haar_coeffs, summation
from .square_functions import homogeneity, square_classical, square_cww
from . import config

log = logging.getLogger(__name__)

# g = 607/128, 14 terms; relative error below 1e-15 for x > 0
LANCZOS_SHIFT = 671 / 128
LANCZOS_SERIES_0 = 0.999999999999997092
LANCZOS_COEFFICIENTS = (57.1562356658629235, -59.5979603554754912,
                        14.1360979747417471, -0.491913816097620199,
                        .339946499848118887e-4, .465236289270485756e-4,
                        -.983744753048795646e-4, .158088703224912494e-3,
                        -.210264441724104883e-3, .217439618115212643e-3,
                        -.164318106536763890e-3, .844182239838527433e-4,
                        -.261908384015814087e-4, .368991826595316234e-5)
SQRT_TWO_PI = 2.5066282746310005

LUXEMBURG_BOUND = math.sqrt(8 / 3)


@dataclass(frozen=True)
class RatioResult:
    pnorm: float
    sup_square: float  # sup of the square function in the denominator (CWW or classical S)
    ratio: float


@dataclass(frozen=True)
class BoundCheck:
    lhs: float
    rhs: float
    holds: bool
    slack: float
    details: dict = field(default_factory=dict)


def bound_check(lhs, rhs, tolerance=None, **details):
    if tolerance is None:
        tolerance = config.tolerance
    return BoundCheck(lhs=float(lhs), rhs=float(rhs), holds=bool(lhs <= rhs + tolerance),
                      slack=float(rhs - lhs), details=details)


def _nontrivial_sup_sq(d):
    sup_sq = square_cww(d).sup_sq
    if sup_sq == 0:
        raise TrivialSystem("all differences vanish; the square function is zero")
    return sup_sq


def pnorm_sum(d, p):
    """ ||d_1 + ... + d_n||_p, the sum taken exactly. """

    if not p >= 1:
        raise DomainError("p must be >= 1, got {0}".format(p))
    return integrate_abs_pow(summation(d), p) ** (1 / p)


def u_ratio(d, p):
    """ U(d) = ||sum d_k||_p / ||CWW(d)||_inf. """

    sup_cww = math.sqrt(_nontrivial_sup_sq(d))
    pnorm = pnorm_sum(d, p)
    return RatioResult(pnorm=pnorm, sup_square=sup_cww, ratio=pnorm / sup_cww)


def classical_ratio(d, p):
    """ ||sum d_k||_p / ||S(d)||_inf; equals U(d) on dyadic systems. """

    sup_sq = square_classical(d).sup_sq
    if sup_sq == 0:
        raise TrivialSystem("all differences vanish; the square function is zero")
    sup_s = math.sqrt(sup_sq)
    pnorm = pnorm_sum(d, p)
    return RatioResult(pnorm=pnorm, sup_square=sup_s, ratio=pnorm / sup_s)


def rademacher_pnorm(n, p):
    """
    || n^{-1/2} sum_{k<=n} r_k ||_p, from the binomial law of the number of minus signs.

    """

    if n < 1:
        raise DomainError("n must be >= 1, got {0}".format(n))
    if not p > 0:
        raise DomainError("p must be positive, got {0}".format(p))

    j = np.arange(n + 1)
    weights = binom.pmf(j, n, 0.5)
    heights = np.abs(n - 2 * j) / math.sqrt(n)
    return float(np.sum(weights * heights ** p)) ** (1 / p)


def log_gamma(x):
    """ ln Gamma(x) for x > 0 by a Lanczos approximation. """

    x = float(x)
    if not x > 0:
        raise DomainError("log_gamma needs x > 0, got {0}".format(x))

    shift = x + LANCZOS_SHIFT
    head = (x + 0.5) * math.log(shift) - shift
    series = LANCZOS_SERIES_0
    for j, c in enumerate(LANCZOS_COEFFICIENTS, start=1):
        series += c / (x + j)
    return head + math.log(SQRT_TWO_PI * series / x)


def khintchine_constant(p):
    """ 2^{1/2} (Gamma((p+1)/2) / sqrt(pi))^{1/p}, the Rademacher constant for p > 2. """

    if not p > 2:
        raise DomainError("the closed form holds for p > 2, got {0}".format(p))
    return math.sqrt(2) * math.exp((log_gamma((p + 1) / 2) - 0.5 * math.log(math.pi)) / p)


def _normalized_sum(d):
    """ sum d_k / ||CWW||_inf as floats, and the atom measures. """
    sup_sq = _nontrivial_sup_sq(d)
    return summation(d).as_floats() / math.sqrt(sup_sq), d.grid.float_measures()


def mgf_ratio(d, lam, tolerance=None):
    """ E exp(lam (sum d / ||CWW||_inf)^2) against (1 - 2 lam)^{-1/2}. """

    if not 0 < lam < 0.5:
        raise DomainError("lambda must lie in (0, 1/2), got {0}".format(lam))
    f, mu = _normalized_sum(d)
    lhs = float(np.sum(np.exp(lam * f ** 2) * mu))
    rhs = 1 / math.sqrt(1 - 2 * lam)
    return bound_check(lhs, rhs, tolerance, lam=lam)


def _psi_excess(f, mu):
    """ u -> E[exp((f/u)^2)] - 2, decreasing in u; the norm is its zero. """
    def excess(u):
        exponent = np.minimum((f / u) ** 2, 700.0)
        return float(np.sum(np.exp(exponent) * mu)) - 2.0
    return excess


def luxemburg_norm(d, tolerance=None):
    """
    ||sum d_k||_psi = inf{u > 0 : E[psi(sum d / u)] <= 1}, psi(t) = exp(t^2) - 1,
    against sqrt(8/3) ||CWW||_inf.

    """

    sup_cww = math.sqrt(_nontrivial_sup_sq(d))
    f = summation(d).as_floats()
    mu = d.grid.float_measures()
    excess = _psi_excess(f, mu)

    lo, hi = (c * sup_cww for c in config.luxemburg_bracket)
    while excess(hi) > 0:
        log.warning("Luxemburg bracket too small at u=%g, doubling", hi)
        hi *= 2
    if excess(lo) <= 0:
        u = lo
    else:
        u = bisect(excess, lo, hi, xtol=config.luxemburg_xtol, maxiter=config.luxemburg_iterations)

    return bound_check(u, LUXEMBURG_BOUND * sup_cww, tolerance, sup_cww=sup_cww)


def tail_check(d, lam, mode='cww', tolerance=None):
    """
    Exact mu{sum d_k > lam} against the CWW sub-Gaussian tail (mode 'cww')
    or the alpha-homogeneous tail with the classical square function
    (mode 'homogeneous').

    """

    if not lam > 0:
        raise DomainError("lambda must be positive, got {0}".format(lam))
    threshold = decimal_rational(lam)
    sup_cww_sq = _nontrivial_sup_sq(d)

    total = summation(d)
    exact = sum((m for v, m in zip(total.values, d.grid.measures) if v > threshold), 0 * threshold)

    lam = float(lam)
    if mode == 'cww':
        rhs = math.exp(-lam ** 2 / (2 * float(sup_cww_sq)))
        return bound_check(float(exact), rhs, tolerance, exact_lhs=exact, lam=lam, mode=mode)
    elif mode == 'homogeneous':
        alpha = homogeneity(d)
        sup_s_sq = square_classical(d).sup_sq
        rhs = math.exp(-float(alpha) * lam ** 2 / float(sup_s_sq))
        return bound_check(float(exact), rhs, tolerance, exact_lhs=exact, lam=lam, mode=mode, alpha=alpha)
    raise ValueError("unknown tail mode {0!r}; use 'cww' or 'homogeneous'".format(mode))


def verify_khintchine(d, p, tolerance=None):
    """
    ||sum d||_p <= rademacher_pnorm(n, p) ||CWW||_inf, p >= 3.

    details['weak_rhs'] carries the n-free bound khintchine_constant(p) ||CWW||_inf.

    """

    if not p >= 3:
        raise DomainError("the martingale Khintchine bound is proven for p >= 3, got {0}".format(p))
    sup_cww = math.sqrt(_nontrivial_sup_sq(d))
    lhs = pnorm_sum(d, p)
    rhs = rademacher_pnorm(d.n, p) * sup_cww
    weak_rhs = khintchine_constant(p) * sup_cww
    return bound_check(lhs, rhs, tolerance, p=p, n=d.n, weak_rhs=weak_rhs,
                       weak_holds=bool(lhs <= weak_rhs + (config.tolerance if tolerance is None else tolerance)))


def haar_bound(coeffs, p, tolerance=None):
    """
    Haar form of the bound: ||sum a_m h_m||_p <= khintchine_constant(p) ||(sum a_m^2 h_m^2)^{1/2}||_inf.

    The constant h_1 is excluded, as in from_haar_coeffs.

    """

    if not p >= 3:
        raise DomainError("the Haar bound is proven for p >= 3, got {0}".format(p))
    d = from_haar_coeffs(coeffs)
    sup_sq = square_classical(d).sup_sq
    if sup_sq == 0:
        raise TrivialSystem("all Haar coefficients beyond h_1 vanish")
    lhs = pnorm_sum(d, p)
    rhs = khintchine_constant(p) * math.sqrt(sup_sq)
    return bound_check(lhs, rhs, tolerance, p=p)
