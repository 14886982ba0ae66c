"""
Transforms that push an MD-system towards an extremal one without
decreasing U(d) = ||sum d_k||_p / ||CWW(d)||_inf.

r1_transform    (k-1)-dyadic  ->  IP at level k   (CWW pointwise unchanged)
r2_transform    IP at level k ->  k-dyadic        (CWW not increased)
procedure1      m-Rademacher: equalize the continuation moduli of sibling cells
procedure2      ... then equalize them with level m-1, giving (m-1)-Rademacher
dyadize         r1, r2 for k = 1..n
rademacherize   procedure1, procedure2 for m = n..2

Every transform returns (output, TransformReport). Certificates are checked
on the refined grid before the output is compacted (compact()).

"""

import bisect
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .exact_measure import ZERO, ONE, HALF, StepFunction, refine, split_atoms, subdivide, rational_sqrt
from .exceptions import (DomainError, EmptySignClass, InvalidSystem, LevelOutOfRange, NotDyadic,
                         NotIP, NotKMinus1Dyadic, NotMRademacher, NotPrepared, TrivialSystem,
                         ZeroEnvelopeCell)
from .md_system import (MDSystem, children, compact, is_dyadic, is_ip, is_k_dyadic,
                        is_m_rademacher, is_trivial, summation, validate)
from .norms_constants import pnorm_sum, rademacher_pnorm
from .serialization import timed
from .square_functions import envelope, square_cww
from . import config

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SystemSummary:
    n: int
    atoms: int
    pnorm: float
    sup_cww_sq: Fraction
    u: Optional[float]
    valid: bool
    dyadic: bool


@dataclass
class TransformReport:
    kind: str
    level: Optional[int]
    p: float
    before: SystemSummary
    after: SystemSummary
    cww_pointwise_relation: str
    pnorm_delta: float
    certificates: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)
    steps: list = field(default_factory=list)

    @property
    def passed(self):
        return all(self.certificates.values()) and all(step.passed for step in self.steps)

    def failed_certificates(self):
        return [name for name, ok in self.certificates.items() if not ok]


def summarize(d, p):
    sup_sq = square_cww(d).sup_sq
    pnorm = pnorm_sum(d, p)
    u = pnorm / math.sqrt(sup_sq) if sup_sq > 0 else None
    return SystemSummary(n=d.n, atoms=d.grid.n_atoms, pnorm=pnorm, sup_cww_sq=sup_sq, u=u,
                         valid=validate(d).valid, dyadic=is_dyadic(d))


def pointwise_relation(before, after):
    """
    Compares two squared square functions atom by atom on the common
    refinement of their grids: 'equal', 'decreased' (after <= before
    everywhere, somewhere strictly) or 'incomparable'.

    """

    common, map_before, map_after = refine(before.grid, after.grid)
    drop = before.pullback(common, map_before) - after.pullback(common, map_after)
    if drop.sup_norm() == 0:
        return 'equal'
    if drop.min() >= 0:
        return 'decreased'
    return 'incomparable'


def _pnorm_not_decreased(before, after):
    return after >= before - config.pnorm_tolerance * max(1.0, before)


def _u_not_decreased(before, after):
    return after >= before - config.tolerance * max(1.0, before)


def _require_valid(d):
    report = validate(d)
    if not report.valid:
        first = report.violations[0]
        raise InvalidSystem("input is not an MD-system: {0} at level {1}, cell {2} ({3})".format(*first))


def _require_level(d, k, lowest=1):
    if not lowest <= k <= d.n:
        raise LevelOutOfRange("level {0} not in {1}..{2}".format(k, lowest, d.n))


def _rebuild(grid, origin, d, overrides):
    """
    Pulls every level of `d` back along `origin`; `overrides` maps a level
    to a (labels, values) pair replacing the pulled-back one.

    """

    partitions = []
    differences = []
    for j in range(1, d.n + 1):
        if j in overrides:
            labels, values = overrides[j]
        else:
            old_labels = d.labeling(j).labels
            old_values = d.difference(j).values
            labels = [old_labels[o] for o in origin]
            values = [old_values[o] for o in origin]
        partitions.append(labels)
        differences.append(StepFunction(grid, values))
    return MDSystem(grid, partitions, differences)


def _report(kind, level, p, d, refined, output, before_sq, certificates, notes=None):
    before = summarize(d, p)
    after = summarize(output, p)
    return TransformReport(kind=kind, level=level, p=p, before=before, after=after,
                           cww_pointwise_relation=pointwise_relation(before_sq, square_cww(refined).pointwise),
                           pnorm_delta=after.pnorm - before.pnorm,
                           certificates=certificates, notes=notes or {})


def r1_transform(d, k, p):
    """
    Makes |d_k| equal to its envelope on every cell of D_{k-1}.

    Each atom with d_k = xi under envelope M is cut at
    lambda = (1 + xi/M) / 2; the left part gets +M, the right part -M, so
    the integral of d_k over every finest cell is kept. Every cell of
    levels k..n is split into the two sides, every later level is copied
    proportionally.

    """

    _require_valid(d)
    _require_level(d, k)
    if not p >= 1:
        raise DomainError("p must be >= 1, got {0}".format(p))
    if not is_k_dyadic(d, k - 1):
        raise NotKMinus1Dyadic("r1_transform at level {0} needs a {1}-dyadic system".format(k, k - 1))

    xi = d.difference(k).values
    top = envelope(d, k).values

    ratios = []
    for x, m in zip(xi, top):
        if m == ZERO:
            if x != ZERO:
                raise ZeroEnvelopeCell("d_{0} = {1} under a zero envelope".format(k, x))
            ratios.append(ONE)
        else:
            ratios.append((1 + x / m) / 2)

    grid, origin, side = split_atoms(d.grid, ratios)

    overrides = {}
    for j in range(k, d.n + 1):
        old_labels = d.labeling(j).labels
        labels = [(old_labels[o], s) for o, s in zip(origin, side)]
        if j == k:
            values = [s * top[o] for o, s in zip(origin, side)]
        else:
            old_values = d.difference(j).values
            values = [old_values[o] for o in origin]
        overrides[j] = (labels, values)
    refined = _rebuild(grid, origin, d, overrides)

    before_sq = square_cww(d).pointwise
    after_sq = square_cww(refined).pointwise

    new_dk = refined.difference(k).values
    kept = {}
    finest = d.labeling(d.n).labels
    for i, o in enumerate(origin):
        cell = finest[o]
        kept[cell] = kept.get(cell, ZERO) + new_dk[i] * grid.measures[i]
    original = {}
    for o, (x, mu) in enumerate(zip(xi, d.grid.measures)):
        original[finest[o]] = original.get(finest[o], ZERO) + x * mu

    pnorm_before = pnorm_sum(d, p)
    certificates = {
        'valid': validate(refined).valid,
        'ip': is_ip(refined, k),
        'cww_equal': after_sq.values == tuple(before_sq.values[o] for o in origin),
        'integrals_kept': kept == original,
        'pnorm_nondecreasing': _pnorm_not_decreased(pnorm_before, pnorm_sum(refined, p)),
    }

    output = compact(refined)
    log.debug("r1 at level %d: %d atoms -> %d", k, d.grid.n_atoms, output.grid.n_atoms)
    return output, _report('r1', k, p, d, refined, output, before_sq, certificates)


def _sign_classes(d, k):
    """
    Assigns every atom the side sigma = +-1 of its cell V of D_{k-1}.

    Where d_k is nonzero the side is its sign. Where d_k vanishes on V, two
    equal children of V serve as the sides; failing that, every atom of V
    is halved first. Returns (system, origin, sigma, halved cells).

    """

    values = d.difference(k).values
    parents = d.labeling(k - 1).labels
    kids = d.labeling(k).labels

    sigma = [0] * d.grid.n_atoms
    halve = set()
    for v, atoms in enumerate(d.cells(k - 1)):
        if any(values[i] != ZERO for i in atoms):
            for i in atoms:
                sigma[i] = 1 if values[i] > 0 else -1
            continue
        pair = children(d, k, v)
        half = d.cell_measure(k - 1, v) * HALF
        if len(pair) == 2 and all(d.cell_measure(k, c) == half for c in pair):
            for i in atoms:
                sigma[i] = 1 if kids[i] == pair[0] else -1
        else:
            halve.add(v)

    if not halve:
        return d, tuple(range(d.grid.n_atoms)), sigma, ()

    ratios = [HALF if parents[i] in halve else ONE for i in range(d.grid.n_atoms)]
    grid, origin, side = split_atoms(d.grid, ratios)
    overrides = {}
    for j in range(k, d.n + 1):
        old_labels = d.labeling(j).labels
        old_values = d.difference(j).values
        overrides[j] = ([(old_labels[o], s) for o, s in zip(origin, side)],
                        [old_values[o] for o in origin])
    halved = _rebuild(grid, origin, d, overrides)
    new_sigma = [s if parents[o] in halve else sigma[o] for o, s in zip(origin, side)]
    return halved, origin, new_sigma, tuple(sorted(halve))


def r2_transform(d, k, p):
    """
    Makes every cell V of D_{k-1} split into exactly two halves at level k.

    With the IP property V splits into V+ = {d_k = +M} and V- = {d_k = -M}.
    Inside each side, the D_k cell J with the largest p-mean of |sum d| is
    kept and its structure below level k is dilated onto every other cell
    of that side (ties go to the leftmost cell).

    """

    _require_valid(d)
    _require_level(d, k)
    if not p >= 1:
        raise DomainError("p must be >= 1, got {0}".format(p))
    if not is_ip(d, k):
        raise NotIP("r2_transform at level {0} needs the IP property".format(k))

    base, base_origin, sigma, halved = _sign_classes(d, k)
    if halved:
        log.info("r2 at level %d: d_%d vanishes on cells %s, halving them", k, k, list(halved))

    measures = base.grid.measures
    parents = base.labeling(k - 1).labels
    kids = base.labeling(k).labels

    # classes (V, sigma) -> their D_k cells, left to right; cells -> atoms
    classes = {}
    cell_atoms = {}
    for i in range(base.grid.n_atoms):
        key = (parents[i], sigma[i])
        members = classes.setdefault(key, [])
        if kids[i] not in cell_atoms:
            cell_atoms[kids[i]] = []
            members.append(kids[i])
        cell_atoms[kids[i]].append(i)

    for v in range(len(base.cells(k - 1))):
        half = base.cell_measure(k - 1, v) * HALF
        for s in (1, -1):
            mass = sum((base.cell_measure(k, c) for c in classes.get((v, s), ())), ZERO)
            if mass != half:
                raise EmptySignClass("side {0:+d} of cell {1} at level {2} has measure {3}, expected {4}".format(
                    s, v, k - 1, mass, half))

    weights = np.abs(summation(base).as_floats()) ** p * base.grid.float_measures()
    source = {}
    for key, members in classes.items():
        best = None
        best_mean = None
        for c in members:
            mean = float(np.sum(weights[list(cell_atoms[c])])) / float(base.cell_measure(k, c))
            if best is None or mean > best_mean + config.pnorm_tolerance * max(1.0, best_mean):
                best, best_mean = c, mean
        source[key] = best

    # position of each atom inside its D_k cell, as a fraction of the cell
    span = {}
    for c, atoms in cell_atoms.items():
        total = base.cell_measure(k, c)
        position = ZERO
        for i in atoms:
            span[i] = (position, position + measures[i] / total)
            position = span[i][1]

    cuts = {}
    for i in range(base.grid.n_atoms):
        key = (parents[i], sigma[i])
        if source[key] == kids[i]:
            continue
        lo, hi = span[i]
        inner = [span[s][0] for s in cell_atoms[source[key]] if lo < span[s][0] < hi]
        if inner:
            cuts[i] = [(u - lo) / (hi - lo) for u in inner]

    grid, origin, pieces = subdivide(base.grid, cuts)

    corr = []
    for o, (s, t) in zip(origin, pieces):
        key = (parents[o], sigma[o])
        lo, hi = span[o]
        start = lo + s * (hi - lo)
        src_atoms = cell_atoms[source[key]]
        starts = [span[a][0] for a in src_atoms]
        corr.append(src_atoms[bisect.bisect_right(starts, start) - 1])

    overrides = {k: ([(parents[o], sigma[o]) for o in origin],
                     [base.difference(k).values[o] for o in origin])}
    for j in range(k + 1, base.n + 1):
        labels = base.labeling(j).labels
        values = base.difference(j).values
        overrides[j] = ([labels[c] for c in corr], [values[c] for c in corr])
    refined = _rebuild(grid, origin, base, overrides)

    base_sq = square_cww(base)
    after = square_cww(refined)
    pnorm_before = pnorm_sum(d, p)
    certificates = {
        'valid': validate(refined).valid,
        'k_dyadic': is_k_dyadic(refined, k),
        'cww_copied': after.pointwise.values == tuple(base_sq.pointwise.values[c] for c in corr),
        'cww_sup_nonincreasing': after.sup_sq <= base_sq.sup_sq,
        'pnorm_nondecreasing': _pnorm_not_decreased(pnorm_before, pnorm_sum(refined, p)),
    }
    notes = {'halved_cells': list(halved),
             'sources': {"{0}{1:+d}".format(v, s): c for (v, s), c in sorted(source.items())}}

    output = compact(refined)
    log.debug("r2 at level %d: %d atoms -> %d", k, d.grid.n_atoms, output.grid.n_atoms)
    return output, _report('r2', k, p, d, refined, output, square_cww(d).pointwise, certificates, notes)


def _continuation_modulus(d, m, atoms):
    """ The common |d_j|, j >= m, on `atoms`, or None when it is not common. """

    moduli = set(abs(d.difference(j).values[i]) for j in range(m, d.n + 1) for i in atoms)
    if len(moduli) == 1:
        return moduli.pop()
    return None


def procedure1(d, m, p):
    """
    On every cell W of D_{m-2}, rescales levels m..n on the child with the
    smaller continuation modulus up to the larger one. A child whose
    continuation vanishes is left alone and listed in the notes.

    """

    _require_valid(d)
    _require_level(d, m, lowest=2)
    if not p >= 1:
        raise DomainError("p must be >= 1, got {0}".format(p))
    if not is_dyadic(d):
        raise NotDyadic("procedure1 needs a dyadic system")
    if not is_m_rademacher(d, m):
        raise NotMRademacher("procedure1 at level {0} needs the {0}-Rademacher property".format(m))

    cells = d.cells(m - 1)
    moduli = [_continuation_modulus(d, m, atoms) for atoms in cells]
    scale = [ONE] * len(cells)
    skipped = []
    for w in range(len(d.cells(m - 2))):
        pair = children(d, m - 1, w)
        top = max(moduli[v] for v in pair)
        low = min(moduli[v] for v in pair)
        if top == low:
            continue
        if low == ZERO:
            log.warning("procedure1 at level %d: continuation vanishes on a child of cell %d, skipped", m, w)
            skipped.append(w)
            continue
        for v in pair:
            scale[v] = top / moduli[v]

    labels = d.labeling(m - 1).labels
    differences = list(d.differences[:m - 1])
    for j in range(m, d.n + 1):
        differences.append(StepFunction(d.grid, [x * scale[labels[i]] for i, x in enumerate(d.difference(j).values)]))
    refined = MDSystem(d.grid, d.partitions, differences)

    before = square_cww(d)
    after = square_cww(refined)
    certificates = {
        'valid': validate(refined).valid,
        'cww_sup_kept': after.sup_sq == before.sup_sq,
        'pnorm_nondecreasing': _pnorm_not_decreased(pnorm_sum(d, p), pnorm_sum(refined, p)),
    }

    output = compact(refined)
    return output, _report('proc1', m, p, d, refined, output, before.pointwise, certificates,
                           {'skipped_cells': skipped})


def _first_children(d, j):
    """ For each cell of D_{j-1}, its child with the smallest left end. """
    return [children(d, j, u)[0] for u in range(len(d.cells(j - 1)))]


def procedure2(d, m, p, bits=None):
    """
    On every cell W of D_{m-2}, gives levels m-1..n one common modulus c'
    with (n-m+2) c'^2 = c_{m-1}^2 + (n-m+1) c_W^2, keeping the sum of
    squares. Each level is rescaled by a constant; a level that vanishes is
    refilled with +c' on the left child and -c' on the right child of each
    of its cells. c' is floored to `bits` binary digits when irrational.

    """

    _require_valid(d)
    _require_level(d, m, lowest=2)
    if not p >= 1:
        raise DomainError("p must be >= 1, got {0}".format(p))
    if not is_dyadic(d):
        raise NotDyadic("procedure2 needs a dyadic system")

    n = d.n
    levels = n - m + 2
    cells = d.cells(m - 1)
    upper = d.labeling(m - 2).labels
    prev_values = d.difference(m - 1).values

    continuation = [_continuation_modulus(d, m, atoms) for atoms in cells]
    if any(c is None for c in continuation):
        raise NotPrepared("procedure2 at level {0}: continuation moduli differ inside a cell of D_{1}".format(m, m - 1))

    modulus = {}
    targets = {}
    shortfall = ZERO
    for w, atoms in enumerate(d.cells(m - 2)):
        pair = children(d, m - 1, w)
        top = max(continuation[v] for v in pair)
        if any(continuation[v] not in (ZERO, top) for v in pair):
            raise NotPrepared("procedure2 at level {0}: sibling moduli of cell {1} differ".format(m, w))
        previous = set(abs(prev_values[i]) for i in atoms)
        if len(previous) != 1:
            raise NotPrepared("procedure2 at level {0}: |d_{1}| not constant on cell {2}".format(m, m - 1, w))
        c_prev = previous.pop()

        target = (c_prev ** 2 + (n - m + 1) * top ** 2) / levels
        c_new = rational_sqrt(target, bits)
        modulus[w] = (c_prev, c_new)
        targets[w] = target
        shortfall = max(shortfall, levels * (target - c_new ** 2))

    cell_of = d.labeling(m - 1).labels
    differences = list(d.differences[:m - 2])
    for j in range(m - 1, n + 1):
        values = d.difference(j).values
        parent_labels = d.labeling(j - 1).labels
        labels = d.labeling(j).labels
        first = _first_children(d, j)
        new = []
        for i, x in enumerate(values):
            c_prev, c_new = modulus[upper[i]]
            old = c_prev if j == m - 1 else continuation[cell_of[i]]
            if old != ZERO:
                new.append(x * c_new / old)
            elif labels[i] == first[parent_labels[i]]:
                new.append(c_new)
            else:
                new.append(-c_new)
        differences.append(StepFunction(d.grid, new))
    refined = MDSystem(d.grid, d.partitions, differences)

    before = square_cww(d)
    after = square_cww(refined)
    certificates = {
        'valid': validate(refined).valid,
        'rademacher': is_m_rademacher(refined, m - 1),
        'cww_sup_kept': ZERO <= before.sup_sq - after.sup_sq <= shortfall,
    }
    notes = {'approximation_bound': float(shortfall),
             'target_moduli_sq': {w: t for w, t in targets.items()}}
    if p >= 3:
        certificates['pnorm_nondecreasing'] = _pnorm_not_decreased(pnorm_sum(d, p), pnorm_sum(refined, p))
    else:
        notes['pnorm'] = "not certified for p < 3"

    output = compact(refined)
    return output, _report('proc2', m, p, d, refined, output, before.pointwise, certificates, notes)


def _pipeline_report(kind, p, d, output, steps, certificates):
    before = summarize(d, p)
    after = summarize(output, p)
    certificates = dict(certificates)
    certificates['valid'] = after.valid
    certificates['u_nondecreasing'] = _u_not_decreased(before.u, after.u)
    return TransformReport(kind=kind, level=None, p=p, before=before, after=after,
                           cww_pointwise_relation=pointwise_relation(square_cww(d).pointwise,
                                                                     square_cww(output).pointwise),
                           pnorm_delta=after.pnorm - before.pnorm,
                           certificates=certificates, steps=steps)


def _require_nontrivial(d):
    if is_trivial(d):
        raise TrivialSystem("all differences vanish")


@timed
def dyadize(d, p):
    """ r1 then r2 at every level; the result is dyadic and U(d) has not decreased. """

    if not p > 2:
        raise DomainError("dyadize needs p > 2, got {0}".format(p))
    _require_valid(d)
    _require_nontrivial(d)

    current = d
    steps = []
    for k in range(1, d.n + 1):
        for transform in (r1_transform, r2_transform):
            current, report = transform(current, k, p)
            steps.append(report)
            log.info("%s at level %d: U %.12g -> %.12g", report.kind, k, report.before.u, report.after.u)

    return current, _pipeline_report('dyadize', p, d, current, steps, {'dyadic': is_dyadic(current)})


@timed
def rademacherize(d, p, bits=None):
    """
    procedure1 then procedure2 for m = n, ..., 2. The result is
    1-Rademacher, so U equals rademacher_pnorm(n, p).

    """

    if not p >= 3:
        raise DomainError("rademacherize needs p >= 3, got {0}".format(p))
    _require_valid(d)
    _require_nontrivial(d)
    if not is_dyadic(d):
        raise NotDyadic("rademacherize needs a dyadic system")

    current = d
    steps = []
    for m in range(d.n, 1, -1):
        current, report = procedure1(current, m, p)
        steps.append(report)
        current, report = procedure2(current, m, p, bits)
        steps.append(report)
        log.info("procedures at level %d: U %.12g", m, report.after.u)

    ceiling = rademacher_pnorm(d.n, p)
    u = summarize(current, p).u
    certificates = {'rademacher': is_m_rademacher(current, 1),
                    'u_matches_ceiling': abs(u - ceiling) <= config.tolerance * max(1.0, ceiling)}
    return current, _pipeline_report('rademacherize', p, d, current, steps, certificates)


TRANSFORMS = {'r1': r1_transform,
              'r2': r2_transform,
              'proc1': procedure1,
              'proc2': procedure2}

PIPELINES = {'dyadize': dyadize,
             'rademacherize': rademacherize}


def run_transform(kind, d, p, level=None):
    """ Dispatches by name; single-step transforms need `level` (k or m). """

    if kind in PIPELINES:
        return PIPELINES[kind](d, p)
    if kind in TRANSFORMS:
        if level is None:
            raise LevelOutOfRange("transform {0!r} needs a level (--k or --m)".format(kind))
        return TRANSFORMS[kind](d, level, p)
    raise ValueError("unknown transform {0!r}; choose from {1}".format(
        kind, ", ".join(sorted(TRANSFORMS) + sorted(PIPELINES))))
