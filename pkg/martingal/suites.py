"""
Verification suites: run one bound over many seeded random systems.

    c1    ||sum d||_p <= rademacher_pnorm(n, p) ||CWW||_inf        (p >= 3)
    c3    E exp(lam (sum d / ||CWW||)^2) <= (1 - 2 lam)^{-1/2}     (lambda grid)
    c4    Luxemburg norm <= sqrt(8/3) ||CWW||_inf
    cww   mu{sum d > lam} <= exp(-lam^2 / 2 ||CWW||^2)              (lambda grid)
    ot2   mu{sum d > lam} <= exp(-alpha lam^2 / ||S||^2)            (lambda grid)
    haar  Haar form of c1 with the limiting constant               (p >= 3)
    transforms  U(d) <= U(dyadize(d)) <= U(rademacherize(...))     (p > 2; the last step for p >= 3)

Trial i draws its system from the i-th child of SeedSequence(seed), so any
trial can be replayed alone. A failing trial writes its system and record
to disk before the suite reports.

"""

import logging
from dataclasses import dataclass, field, asdict
from fractions import Fraction

import numpy as np
from astropy.table import Table

from .exceptions import DomainError
from .md_system import from_haar_coeffs, random_md
from .norms_constants import (BoundCheck, haar_bound, luxemburg_norm, mgf_ratio, rademacher_pnorm,
                              tail_check, u_ratio, verify_khintchine)
from .lemma_oracles import check_L3, check_L4, check_L6, check_L8
from .exact_measure import StepFunction, uniform_grid
from .serialization import save_replay, timed
from .transforms import dyadize, rademacherize
from . import config

log = logging.getLogger(__name__)

SUITES = ('c1', 'c3', 'c4', 'cww', 'ot2', 'haar', 'transforms')


@dataclass
class SuiteRecord:
    suite: str
    p: float
    n: int
    seed: int
    trial: int
    lhs: float
    rhs: float
    slack: float
    holds: bool
    details: dict = field(default_factory=dict)


def trial_rng(seed, trials):
    """ One independent generator per trial index. """

    return [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(trials)]


def _worst(checks):
    """ The check with the smallest slack. """
    return min(checks, key=lambda check: check.slack)


def _random_haar_coeffs(rng, n_max, bound):
    n = int(rng.integers(1, n_max + 1))
    scale = 4
    top = int(bound * scale)
    coeffs = [Fraction(int(a), scale) for a in rng.integers(-top, top + 1, size=2 ** n)]
    if all(a == 0 for a in coeffs[1:]):
        coeffs[1] = Fraction(1)
    return coeffs


def _check_transforms(d, p, tolerance):
    """
    dyadize, then rademacherize for p >= 3; every step must pass its
    certificates, U must not drop and, for p >= 3, must end at the
    Rademacher value of the same depth.

    """

    before = u_ratio(d, p).ratio
    dyadic, report = dyadize(d, p)
    reports = [report]
    if p >= 3:
        _, report = rademacherize(dyadic, p)
        reports.append(report)
    after = reports[-1].after.u

    failed = {r.kind: r.failed_certificates() for r in reports if not r.passed}
    holds = not failed and after >= before - tolerance * max(1.0, before)
    details = {'failed': failed, 'u_dyadic': reports[0].after.u}
    if p >= 3:
        ceiling = rademacher_pnorm(d.n, p)
        holds = holds and abs(after - ceiling) <= tolerance * max(1.0, ceiling)
        details['ceiling'] = ceiling
    return BoundCheck(lhs=before, rhs=after, holds=bool(holds), slack=after - before, details=details)


def _check_system(suite, d, p, tolerance):
    if suite == 'c1':
        return verify_khintchine(d, p, tolerance)
    if suite == 'c3':
        return _worst([mgf_ratio(d, lam, tolerance) for lam in config.mgf_lambda_grid])
    if suite == 'c4':
        return luxemburg_norm(d, tolerance)
    if suite == 'cww':
        return _worst([tail_check(d, lam, 'cww', tolerance) for lam in config.tail_lambda_grid])
    if suite == 'ot2':
        return _worst([tail_check(d, lam, 'homogeneous', tolerance) for lam in config.tail_lambda_grid])
    if suite == 'transforms':
        return _check_transforms(d, p, tolerance)
    raise ValueError("unknown suite {0!r}; choose from {1}".format(suite, ", ".join(SUITES)))


@timed
def run_suite(suite, p=None, trials=None, seed=0, n_max=None, tolerance=None,
              max_children=None, value_bound=None, savepath=None):
    """ Runs `trials` seeded trials of `suite` and returns their SuiteRecords in trial order. """

    if suite not in SUITES:
        raise ValueError("unknown suite {0!r}; choose from {1}".format(suite, ", ".join(SUITES)))
    if suite in ('c1', 'haar') and (p is None or not p >= 3):
        raise DomainError("suite {0} needs p >= 3, got {1}".format(suite, p))
    if suite == 'transforms' and (p is None or not p > 2):
        raise DomainError("suite transforms needs p > 2, got {0}".format(p))
    if trials is None:
        trials = config.default_trials
    if n_max is None:
        n_max = config.default_n_max
    if tolerance is None:
        tolerance = config.tolerance
    if max_children is None:
        max_children = config.default_max_children
    if value_bound is None:
        value_bound = config.default_value_bound

    records = []
    for trial, rng in enumerate(trial_rng(seed, trials)):
        if suite == 'haar':
            coeffs = _random_haar_coeffs(rng, n_max, value_bound)
            d = from_haar_coeffs(coeffs)
            check = haar_bound(coeffs, p, tolerance)
        else:
            n = int(rng.integers(1, n_max + 1))
            d = random_md(n, max_children, value_bound, int(rng.integers(2 ** 63)))
            check = _check_system(suite, d, p, tolerance)

        record = SuiteRecord(suite=suite, p=p, n=d.n, seed=seed, trial=trial, lhs=check.lhs, rhs=check.rhs,
                             slack=check.slack, holds=check.holds, details=check.details)
        records.append(record)
        log.debug("%s trial %d: lhs %.12g rhs %.12g", suite, trial, check.lhs, check.rhs)

        if not check.holds:
            log.warning("%s trial %d violates the bound by %g", suite, trial, -check.slack)
            save_replay(d, record, suite=suite, p=p, seed=seed, trial=trial, savepath=savepath)

    failures = sum(1 for r in records if not r.holds)
    log.info("%s: %d trials, %d failures, smallest slack %g", suite, len(records), failures,
             min(r.slack for r in records) if records else float('nan'))
    return records


def records_table(records):
    """ SuiteRecords as an astropy Table, one row per trial. """

    names = ('suite', 'p', 'n', 'seed', 'trial', 'lhs', 'rhs', 'slack', 'holds')
    rows = []
    for r in records:
        row = asdict(r)
        if row['p'] is None:
            row['p'] = np.nan
        rows.append(tuple(row[name] for name in names))
    if not rows:
        return Table(names=names, dtype=(str, float, int, int, int, float, float, float, bool))
    return Table(rows=rows, names=names)


LEMMA_STEP_FUNCTIONS = {
    'halves': StepFunction(uniform_grid(2), [1, -1]),
    'thirds': StepFunction(uniform_grid(3), [2, -1, -1]),
    'quarters': StepFunction(uniform_grid(4), [3, -1, -1, -1]),
}


@timed
def run_lemma_checks(seed=0, trials=500):
    """
    The in-range sweeps of the four auxiliary lemmas plus a few checks with
    p <= 3. Returns one dict per check; the p <= 3 ones carry in_hypothesis False.

    """

    results = []

    def record(lemma, params, holds, worst, in_hypothesis):
        results.append({'lemma': lemma, 'params': params, 'holds': bool(holds),
                        'worst_violation': float(worst), 'in_hypothesis': bool(in_hypothesis)})

    for xi in (1, 5):
        for p in (3.5, 4, 6, 2.5):
            check = check_L3(xi, p)
            record('L3', {'xi': xi, 'p': p}, check.monotone, check.worst_violation, check.in_hypothesis)

    for xi in (0, 1, 2):
        for p in (3.5, 4, 5, 3):
            for r in (1, 2):
                check = check_L4(xi, p, r)
                record('L4', {'xi': xi, 'p': p, 'r': r}, check.holds, check.worst_violation, check.in_hypothesis)

    for name, g in LEMMA_STEP_FUNCTIONS.items():
        for xi in (0.5, 2):
            for p in (1, 3, 4):
                check = check_L8(g, xi, p)
                record('L8', {'g': name, 'xi': xi, 'p': p}, check.monotone, check.worst_violation, True)

    for n in range(2, 7):
        for xi, p in ((0, 4), (1, 5), (0.5, 3.5), (1, 2.5)):
            check = check_L6(n, 1.0, xi, p, trials=trials, seed=seed + n)
            record('L6', {'n': n, 'xi': xi, 'p': p}, check.holds, max(0.0, check.worst_excess), check.in_hypothesis)

    failed = [r for r in results if r['in_hypothesis'] and not r['holds']]
    log.info("lemma checks: %d run, %d failures in the proven range", len(results), len(failed))
    return results
