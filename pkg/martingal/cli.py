"""
Command line entry point: python -m martingal <subcommand> ...

Exit codes: 0 success, 1 a failed bound/certificate or any other domain
error, 2 unreadable or malformed input.

"""

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass
from typing import Optional

from astropy.table import Table

from .exceptions import CeilingViolation, DomainError, MartingalError, ParseError, TrivialSystem
from .extremal_search import METHODS, estimate_A, pscan
from .md_system import is_dyadic, is_ip, is_k_dyadic, is_trivial, validate
from .norms_constants import classical_ratio, khintchine_constant, pnorm_sum, rademacher_pnorm, u_ratio
from .serialization import jsonable, load_system, save_replay, save_system, system_to_dict, write_table
from .square_functions import homogeneity, square_classical, square_cww
from .suites import SUITES, records_table, run_lemma_checks, run_suite
from .transforms import PIPELINES, TRANSFORMS, run_transform
from . import config

log = logging.getLogger(__name__)

FORMATS = ('json', 'csv')


@dataclass
class RunConfig:
    subcommand: str
    p: Optional[float] = None
    n: Optional[int] = None
    seed: int = 0
    trials: int = config.default_trials
    tolerance: float = config.tolerance
    input: Optional[str] = None
    output: Optional[str] = None
    format: Optional[str] = None
    kind: Optional[str] = None
    suite: Optional[str] = None
    level: Optional[int] = None
    budget: int = config.default_budget
    method: str = config.default_method
    p_min: Optional[float] = None
    p_max: Optional[float] = None
    step: Optional[float] = None
    report: Optional[str] = None
    replay_dir: Optional[str] = None

    @classmethod
    def from_args(cls, args):
        values = {name: getattr(args, name) for name in cls.__dataclass_fields__ if hasattr(args, name)}
        if getattr(args, 'k', None) is not None:
            values['level'] = args.k
        if getattr(args, 'm', None) is not None:
            values['level'] = args.m
        return cls(**{key: value for key, value in values.items() if value is not None})

    def validate(self):
        if self.trials < 1:
            raise DomainError("--trials must be >= 1, got {0}".format(self.trials))
        if not self.tolerance >= 0:
            raise DomainError("--tolerance must be >= 0, got {0}".format(self.tolerance))
        if self.budget < 1:
            raise DomainError("--budget must be >= 1, got {0}".format(self.budget))
        if self.format is not None and self.format not in FORMATS:
            raise DomainError("--format must be one of {0}".format(", ".join(FORMATS)))
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise DomainError("--seed must fit in 64 unsigned bits, got {0}".format(self.seed))
        return self


def _emit(text, output=None):
    if output is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(output, 'w') as f:
            f.write(text)


def _dumps(obj):
    return json.dumps(jsonable(obj), indent=1)


def cmd_validate(run):
    d = load_system(run.input)
    report = validate(d)
    _emit(_dumps({'valid': report.valid,
                  'violations': [v._asdict() for v in report.violations]}), run.output)
    return 0 if report.valid else 1


def cmd_norms(run):
    d = load_system(run.input)
    p = run.p if run.p is not None else 3.0
    cww = square_cww(d)
    classical = square_classical(d)

    summary = {'n': d.n, 'atoms': d.grid.n_atoms, 'p': p,
               'valid': validate(d).valid, 'trivial': is_trivial(d), 'dyadic': is_dyadic(d),
               'k_dyadic': [k for k in range(d.n + 1) if is_k_dyadic(d, k)],
               'ip': [k for k in range(1, d.n + 1) if is_ip(d, k)],
               'pnorm': pnorm_sum(d, p),
               'sup_cww_sq': cww.sup_sq, 'sup_cww': math.sqrt(cww.sup_sq),
               'sup_classical_sq': classical.sup_sq, 'sup_classical': math.sqrt(classical.sup_sq),
               'homogeneity': homogeneity(d)}
    try:
        summary['u'] = u_ratio(d, p).ratio
        summary['classical_ratio'] = classical_ratio(d, p).ratio
    except TrivialSystem:
        summary['u'] = summary['classical_ratio'] = None
    if p >= 3 and not summary['trivial']:
        summary['rademacher_pnorm'] = rademacher_pnorm(d.n, p)

    _emit(_dumps(summary), run.output)
    return 0


def cmd_transform(run):
    d = load_system(run.input)
    p = run.p if run.p is not None else 3.0
    output, report = run_transform(run.kind, d, p, run.level)

    if run.output is not None:
        save_system(output, run.output)
    _emit(_dumps(report), run.report)

    if not report.passed:
        log.error("%s: certificates failed: %s", run.kind, ", ".join(report.failed_certificates()) or "in a step")
        return 1
    return 0


def cmd_constants(run):
    p = run.p if run.p is not None else 4.0
    n_max = run.n if run.n is not None else 10
    if not p > 0:
        raise DomainError("p must be positive, got {0}".format(p))
    limit = khintchine_constant(p) if p > 2 else float('nan')
    rows = [(p, n, rademacher_pnorm(n, p), limit) for n in range(1, n_max + 1)]
    table = Table(rows=rows, names=('p', 'n', 'rademacher_pnorm', 'khintchine_constant'))
    _emit(write_table(table, format=run.format or 'csv'), run.output)
    return 0


def cmd_verify(run):
    records = run_suite(run.suite, p=run.p, trials=run.trials, seed=run.seed, n_max=run.n,
                        tolerance=run.tolerance, savepath=run.replay_dir)
    if (run.format or 'json') == 'csv':
        _emit(write_table(records_table(records), format='csv'), run.output)
    else:
        _emit("".join(json.dumps(jsonable(r)) + "\n" for r in records), run.output)
    return 0 if all(r.holds for r in records) else 1


def cmd_lemmas(run):
    results = run_lemma_checks(seed=run.seed, trials=min(run.trials, 500))
    _emit(_dumps(results), run.output)
    return 0 if all(r['holds'] for r in results if r['in_hypothesis']) else 1


def cmd_search(run):
    p = run.p if run.p is not None else 4.0
    n = run.n if run.n is not None else 2
    try:
        result = estimate_A(p, n, budget=run.budget, seed=run.seed, method=run.method)
    except CeilingViolation as e:
        save_replay(e.witness, {'p': p, 'n': n, 'value': e.value}, suite='search', p=p, seed=run.seed,
                    trial=0, savepath=run.replay_dir)
        raise

    _emit(_dumps({'p': p, 'n': n, 'method': result.method, 'best_value': result.best_value,
                  'ceiling': result.ceiling, 'lower_bound_only': result.lower_bound_only,
                  'evaluations': result.evaluations, 'trace': result.trace,
                  'coefficients': list(result.coefficients), 'witness': system_to_dict(result.witness)}),
          run.output)
    return 0


def cmd_scan(run):
    table = pscan(run.p_min, run.p_max, run.step, run.n if run.n is not None else 6)
    _emit(write_table(table, format=run.format or 'csv'), run.output)
    return 0


COMMANDS = {'validate': cmd_validate,
            'norms': cmd_norms,
            'transform': cmd_transform,
            'constants': cmd_constants,
            'verify': cmd_verify,
            'lemmas': cmd_lemmas,
            'search': cmd_search,
            'scan': cmd_scan}


def build_parser():

    parser = argparse.ArgumentParser(prog='martingal',
                                     description="Martingale Khintchine constants, square functions and transforms.")
    parser.add_argument('-v', '--verbose', action='count', default=0, help="more log output (repeatable)")
    parser.add_argument('-q', '--quiet', action='store_true', help="only log errors")
    sub = parser.add_subparsers(dest='subcommand', required=True)

    def add_output(p, formats=False):
        p.add_argument('-o', '--output', help="write the result here instead of standard output")
        if formats:
            p.add_argument('--format', choices=FORMATS)

    p = sub.add_parser('validate', help="check the martingale conditions of a system file")
    p.add_argument('input')
    add_output(p)

    p = sub.add_parser('norms', help="norms, square functions and structural flags of a system file")
    p.add_argument('input')
    p.add_argument('--p', type=float)
    add_output(p)

    p = sub.add_parser('transform', help="apply r1, r2, proc1, proc2, dyadize or rademacherize")
    p.add_argument('kind', choices=sorted(TRANSFORMS) + sorted(PIPELINES))
    p.add_argument('input')
    p.add_argument('--k', type=int, help="level of r1 / r2")
    p.add_argument('--m', type=int, help="level of proc1 / proc2")
    p.add_argument('--p', type=float)
    p.add_argument('--report', help="write the certificate report here instead of standard output")
    p.add_argument('-o', '--output', help="write the transformed system here")

    p = sub.add_parser('constants', help="Rademacher constants for n = 1..N and their limit")
    p.add_argument('--p', type=float)
    p.add_argument('--n', type=int, help="largest n")
    add_output(p, formats=True)

    p = sub.add_parser('verify', help="run a verification suite over seeded random systems")
    p.add_argument('suite', choices=SUITES)
    p.add_argument('--p', type=float)
    p.add_argument('--n', type=int, help="largest number of levels")
    p.add_argument('--trials', type=int)
    p.add_argument('--seed', type=int)
    p.add_argument('--tolerance', type=float)
    p.add_argument('--replay-dir', dest='replay_dir', help="directory for replay files of failed trials")
    add_output(p, formats=True)

    p = sub.add_parser('lemmas', help="numerical checks of the auxiliary lemmas")
    p.add_argument('--seed', type=int)
    p.add_argument('--trials', type=int)
    add_output(p)

    p = sub.add_parser('search', help="search for extremal dyadic systems")
    p.add_argument('--p', type=float)
    p.add_argument('--n', type=int)
    p.add_argument('--budget', type=int)
    p.add_argument('--seed', type=int)
    p.add_argument('--method', choices=METHODS)
    p.add_argument('--replay-dir', dest='replay_dir')
    add_output(p)

    p = sub.add_parser('scan', help="Rademacher constants over a p grid, flagging decreases in n")
    p.add_argument('--p-min', dest='p_min', type=float, default=2.0)
    p.add_argument('--p-max', dest='p_max', type=float, default=3.0)
    p.add_argument('--step', type=float, default=0.05)
    p.add_argument('--n', type=int, help="largest n")
    add_output(p, formats=True)

    return parser


def configure_logging(verbose=0, quiet=False):
    if quiet:
        level = logging.ERROR
    elif verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv=None):

    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)

    try:
        run = RunConfig.from_args(args).validate()
        return COMMANDS[run.subcommand](run)
    except (ParseError, OSError) as e:
        log.error("%s: %s", type(e).__name__, e)
        return 2
    except MartingalError as e:
        log.error("%s: %s", type(e).__name__, e)
        return 1
