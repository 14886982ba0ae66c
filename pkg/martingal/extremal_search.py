"""
Search for extremal dyadic martingales, i.e. lower bounds for

    A_{p,n} = sup ||sum d_k||_p / ||CWW(d)||_inf

over n-level systems, and the scan of Rademacher constants over p.

Dyadic systems suffice, so a candidate is a full binary tree of depth n
holding the modulus of d_k on every cell of D_{k-1}; signs are + on the left
child and - on the right one. Coefficients are stored in heap order: the
nodes of level k are 2^{k-1}-1 ... 2^k-2.

"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from astropy.table import Table
from scipy.optimize import minimize

from .exact_measure import to_rational, uniform_grid
from .exceptions import CeilingViolation, DomainError, Infeasible
from .md_system import from_atoms
from .norms_constants import rademacher_pnorm, u_ratio
from .serialization import timed
from . import config

log = logging.getLogger(__name__)

METHODS = ('nelder-mead', 'coordinate', 'random-restart')


@dataclass
class HaarCandidate:
    n: int
    coefficients: np.ndarray

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        if len(self.coefficients) != 2 ** self.n - 1:
            raise ValueError("depth {0} needs {1} coefficients, got {2}".format(
                self.n, 2 ** self.n - 1, len(self.coefficients)))

    @classmethod
    def from_levels(cls, level_values):
        """ One modulus per level, repeated on every node of that level. """
        n = len(level_values)
        return cls(n, np.concatenate([np.full(2 ** (k - 1), v, dtype=float)
                                      for k, v in enumerate(level_values, start=1)]))


@dataclass
class SearchResult:
    best_value: float
    witness: object
    evaluations: int
    trace: list = field(default_factory=list)
    coefficients: np.ndarray = None
    method: str = config.default_method
    p: float = None
    n: int = None
    ceiling: float = None
    lower_bound_only: bool = False


def _path_matrices(n):
    """
    signed[i, node] = +-1 when node lies on the path of atom i (with the sign
    of that atom's side), 0 otherwise; unsigned is its absolute value.

    """

    size = 2 ** n
    signed = np.zeros((size, size - 1))
    atoms = np.arange(size)
    for k in range(1, n + 1):
        nodes = 2 ** (k - 1) - 1 + (atoms >> (n - k + 1))
        signs = 1 - 2 * ((atoms >> (n - k)) & 1)
        signed[atoms, nodes] = signs
    return signed, np.abs(signed)


def path_sums(c):
    """ Sum of squared coefficients along every root-to-leaf path (the leaf values of CWW^2). """

    _, unsigned = _path_matrices(c.n)
    return unsigned @ (c.coefficients ** 2)


def candidate_to_md(c, tolerance=None):
    """ The dyadic MD-system of a feasible candidate, coefficients converted exactly. """

    if tolerance is None:
        tolerance = config.pnorm_tolerance
    if np.any(c.coefficients < 0):
        raise Infeasible("candidate moduli must be nonnegative")
    worst = float(np.max(path_sums(c)))
    if worst > 1 + tolerance:
        raise Infeasible("path sum of squares {0} exceeds 1".format(worst))

    n = c.n
    size = 2 ** n
    coeffs = [to_rational(float(x)) for x in c.coefficients]
    labels = []
    values = []
    for k in range(1, n + 1):
        labels.append([i >> (n - k) for i in range(size)])
        offset = 2 ** (k - 1) - 1
        values.append([coeffs[offset + (i >> (n - k + 1))] * (1 if (i >> (n - k)) % 2 == 0 else -1)
                       for i in range(size)])
    return from_atoms(uniform_grid(size).breakpoints, labels, values)


class _Objective(object):
    """ U of the candidate |x|, counting evaluations and logging improvements. """

    def __init__(self, n, p):
        self.p = p
        self.signed, self.unsigned = _path_matrices(n)
        self.evaluations = 0
        self.best_value = -np.inf
        self.best_x = None
        self.trace = []

    def project(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        top = float(np.max(self.unsigned @ (x * x)))
        if top == 0:
            return None
        return x / math.sqrt(top)

    def value(self, x):
        self.evaluations += 1
        y = self.project(x)
        if y is None:
            return 0.0
        u = float(np.mean(np.abs(self.signed @ y) ** self.p)) ** (1 / self.p)
        if u > self.best_value:
            self.best_value = u
            self.best_x = y
            self.trace.append((self.evaluations, u))
        return u

    def __call__(self, x):
        return -self.value(x)


def _starts(n, count, rng):
    """ Shallow Rademacher candidates (levels 1..m equal, deeper ones zero) first, then random ones. """

    dim = 2 ** n - 1
    starts = [HaarCandidate.from_levels([1.0] * m + [0.0] * (n - m)).coefficients for m in range(n, 0, -1)]
    while len(starts) < max(count, n):
        starts.append(rng.uniform(0.05, 1.0, size=dim))
    return starts


def _nelder_mead(objective, starts, budget, rng):
    per_start = max(1, budget // len(starts))
    for x0 in starts:
        if objective.evaluations >= budget:
            break
        minimize(objective, x0, method='Nelder-Mead',
                 options={'maxfev': min(per_start, budget - objective.evaluations),
                          'xatol': 1e-12, 'fatol': 1e-15})


def _coordinate(objective, starts, budget, rng):
    per_start = max(1, budget // len(starts))
    for x0 in starts:
        stop = min(budget, objective.evaluations + per_start)
        x = np.array(x0, dtype=float)
        current = objective.value(x)
        step = 0.25
        while objective.evaluations < stop and step > 1e-12:
            improved = False
            for i in range(len(x)):
                for delta in (step, -step):
                    if objective.evaluations >= stop:
                        break
                    trial = x.copy()
                    trial[i] = abs(trial[i] + delta)
                    value = objective.value(trial)
                    if value > current:
                        x, current, improved = trial, value, True
                        break
            if not improved:
                step /= 2


def _random_restart(objective, starts, budget, rng):
    dim = len(starts[0])
    for x0 in starts[:budget]:
        objective.value(x0)
    sigma = 0.5
    while objective.evaluations < budget:
        if rng.uniform() < 0.2 or objective.best_x is None:
            objective.value(rng.uniform(0.0, 1.0, size=dim))
        else:
            before = objective.best_value
            objective.value(objective.best_x + rng.normal(scale=sigma, size=dim))
            if objective.best_value <= before:
                sigma = max(sigma * 0.995, 1e-9)


SEARCHES = {'nelder-mead': _nelder_mead,
            'coordinate': _coordinate,
            'random-restart': _random_restart}


@timed
def estimate_A(p, n, budget=None, seed=0, method=None, restarts=None):
    """
    Best U found over depth-n dyadic candidates within `budget` objective
    evaluations. For p >= 3 the answer is known (rademacher_pnorm(n, p)) and
    exceeding it raises CeilingViolation; for 2 < p < 3 the value is only a
    lower bound for A_{p,n}.

    """

    if not p > 2:
        raise DomainError("the search is meant for p > 2, got {0}".format(p))
    if n < 1:
        raise DomainError("n must be >= 1, got {0}".format(n))
    if budget is None:
        budget = config.default_budget
    if budget < 1:
        raise DomainError("budget must be >= 1, got {0}".format(budget))
    if method is None:
        method = config.default_method
    if method not in SEARCHES:
        raise ValueError("unknown method {0!r}; choose from {1}".format(method, ", ".join(METHODS)))
    if restarts is None:
        restarts = config.default_restarts

    rng = np.random.default_rng(seed)
    objective = _Objective(n, p)
    starts = _starts(n, restarts, rng)
    SEARCHES[method](objective, starts, budget, rng)

    witness = candidate_to_md(HaarCandidate(n, objective.best_x))
    value = u_ratio(witness, p).ratio
    ceiling = rademacher_pnorm(n, p)
    log.info("%s search, p=%g, n=%d: %.12g after %d evaluations (Rademacher value %.12g)",
             method, p, n, value, objective.evaluations, ceiling)

    if p >= 3 and value > ceiling + config.tolerance:
        error = CeilingViolation("p={0}, n={1}: found {2!r} above {3!r}".format(p, n, value, ceiling))
        error.witness, error.value = witness, value
        raise error
    if p < 3 and value > ceiling + config.tolerance:
        log.warning("p=%g, n=%d: Haar candidate beats the Rademacher value by %g", p, n, value - ceiling)

    return SearchResult(best_value=value, witness=witness, evaluations=objective.evaluations,
                        trace=objective.trace, coefficients=objective.best_x, method=method, p=p, n=n,
                        ceiling=ceiling, lower_bound_only=p < 3)


def p_grid(p_min, p_max, step):
    count = int(round((p_max - p_min) / step))
    return [round(p_min + i * step, 10) for i in range(count + 1)]


def pscan(p_min, p_max, step, n_max):
    """
    rademacher_pnorm(n, p) for every p of the grid and n = 1..n_max, with a
    flag where the value decreases from n-1 to n.

    """

    if not 2 <= p_min < p_max:
        raise DomainError("need 2 <= p_min < p_max, got {0}, {1}".format(p_min, p_max))
    if not step > 0:
        raise DomainError("step must be positive, got {0}".format(step))
    if n_max < 1:
        raise DomainError("n_max must be >= 1, got {0}".format(n_max))

    rows = []
    for p in p_grid(p_min, p_max, step):
        previous = None
        for n in range(1, n_max + 1):
            value = rademacher_pnorm(n, p)
            decrease = previous is not None and value < previous - config.monotone_tolerance * max(1.0, previous)
            if decrease:
                log.debug("p=%g: decrease from n=%d to n=%d", p, n - 1, n)
            rows.append((p, n, value, decrease))
            previous = value

    return Table(rows=rows, names=('p', 'n', 'value', 'decrease'))
