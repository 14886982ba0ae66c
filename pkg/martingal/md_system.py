"""
MD-systems: martingale differences d_1, ..., d_n together with their
partitions D_1, ..., D_n of [0,1).

Level 0 is implicit (one cell, the whole interval). An MDSystem is a grid,
one CellLabeling per level and one StepFunction per level; validate() checks
that the three together really form a martingale-difference system.

"""

import itertools
import logging
from collections import namedtuple
from fractions import Fraction

import numpy as np

from .exact_measure import (ZERO, ONE, HALF, AtomGrid, CellLabeling, StepFunction,
                            integrate_over, rational_sqrt, to_rational,
                            uniform_grid)
from .exceptions import (BadCoefficientCount, DomainError, InvalidSystem, LevelOutOfRange,
                         NotDyadic, NotProbability, NotSymmetric, UnknownCell)

log = logging.getLogger(__name__)

Violation = namedtuple('Violation', ['kind', 'level', 'cell', 'detail'])


class ValidationReport(object):

    __slots__ = ('violations',)

    def __init__(self, violations):
        self.violations = tuple(violations)

    @property
    def valid(self):
        return not self.violations

    def __bool__(self):
        return self.valid

    def __repr__(self):
        return "ValidationReport(valid={0}, violations={1})".format(self.valid, len(self.violations))


class MDSystem(object):
    """
    d = {d_1, ..., d_n | D_1, ..., D_n} on a common AtomGrid.

    The constructor only checks shapes; use validate() for the martingale
    conditions.

    """

    __slots__ = ('grid', 'partitions', 'differences', '_root')

    def __init__(self, grid, partitions, differences):
        partitions = tuple(p if isinstance(p, CellLabeling) else CellLabeling(p) for p in partitions)
        differences = tuple(f if isinstance(f, StepFunction) else StepFunction(grid, f) for f in differences)

        if len(partitions) < 1 or len(partitions) != len(differences):
            raise InvalidSystem("need n >= 1 partitions and as many differences, got {0} and {1}".format(
                len(partitions), len(differences)))
        for k, (labeling, f) in enumerate(zip(partitions, differences), start=1):
            if len(labeling) != grid.n_atoms:
                raise InvalidSystem("partition of level {0} labels {1} atoms, grid has {2}".format(
                    k, len(labeling), grid.n_atoms))
            if f.grid != grid:
                raise InvalidSystem("difference d_{0} lives on another grid".format(k))

        self.grid = grid
        self.partitions = partitions
        self.differences = differences
        self._root = CellLabeling([0] * grid.n_atoms)

    @property
    def n(self):
        return len(self.differences)

    def labeling(self, k):
        """ Partition of level k, 0 <= k <= n. """
        if not 0 <= k <= self.n:
            raise LevelOutOfRange("level {0} not in 0..{1}".format(k, self.n))
        if k == 0:
            return self._root
        return self.partitions[k - 1]

    def cells(self, k):
        return self.labeling(k).cells()

    def difference(self, k):
        if not 1 <= k <= self.n:
            raise LevelOutOfRange("difference level {0} not in 1..{1}".format(k, self.n))
        return self.differences[k - 1]

    def cell_measure(self, k, cell):
        measures = self.grid.measures
        return sum((measures[i] for i in self.cells(k)[cell]), ZERO)

    def __eq__(self, other):
        return (isinstance(other, MDSystem) and self.grid == other.grid and
                self.partitions == other.partitions and self.differences == other.differences)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self.grid, self.partitions, self.differences))

    def __repr__(self):
        return "MDSystem(n={0}, atoms={1})".format(self.n, self.grid.n_atoms)


def from_atoms(breakpoints, labels, values):
    """
    Builds a system from per-atom data.

    `labels[k-1][i]` is any hashable cell key of atom i at level k,
    `values[k-1][i]` the value of d_k on atom i.

    """

    grid = AtomGrid(breakpoints)
    return MDSystem(grid, [CellLabeling(level) for level in labels],
                    [StepFunction(grid, level) for level in values])


def summation(d):
    """ The step function sum_k d_k. """

    total = [ZERO] * d.grid.n_atoms
    for f in d.differences:
        total = [a + b for a, b in zip(total, f.values)]
    return StepFunction(d.grid, total)


def is_trivial(d):
    return all(v == ZERO for f in d.differences for v in f.values)


def validate(d):
    """
    Checks the refinement chain, measurability of each d_k with respect to
    D_k and the mean-zero condition on every cell of D_{k-1}. Every
    violation is reported.

    """

    violations = []

    for k in range(1, d.n):
        coarse = d.labeling(k).labels
        for cell, atoms in enumerate(d.cells(k + 1)):
            parents = set(coarse[i] for i in atoms)
            if len(parents) != 1:
                violations.append(Violation('refinement', k + 1, cell,
                                            "cell meets level-{0} cells {1}".format(k, sorted(parents))))

    for k in range(1, d.n + 1):
        values = d.difference(k).values
        for cell, atoms in enumerate(d.cells(k)):
            seen = set(values[i] for i in atoms)
            if len(seen) != 1:
                violations.append(Violation('measurability', k, cell,
                                            "d_{0} takes values {1}".format(k, sorted(str(v) for v in seen))))

    for k in range(1, d.n + 1):
        f = d.difference(k)
        for cell, atoms in enumerate(d.cells(k - 1)):
            mean = integrate_over(f, atoms)
            if mean != ZERO:
                violations.append(Violation('mean-zero', k, cell,
                                            "integral of d_{0} over level-{1} cell is {2}".format(k, k - 1, mean)))

    return ValidationReport(violations)


def parent_cell(d, k, cell):
    """ The cell of level k-1 containing `cell` of level k (level 0 is the root, id 0). """

    if not 1 <= k <= d.n:
        raise LevelOutOfRange("level {0} not in 1..{1}".format(k, d.n))
    cells = d.cells(k)
    if not 0 <= cell < len(cells):
        raise UnknownCell("no cell {0} at level {1}".format(cell, k))
    return d.labeling(k - 1).labels[cells[cell][0]]


def children(d, k, cell):
    """ Cells of level k inside `cell` of level k-1, ordered by left end. """

    if not 1 <= k <= d.n:
        raise LevelOutOfRange("level {0} not in 1..{1}".format(k, d.n))
    parents = d.cells(k - 1)
    if not 0 <= cell < len(parents):
        raise UnknownCell("no cell {0} at level {1}".format(cell, k - 1))
    labels = d.labeling(k).labels
    return sorted(set(labels[i] for i in parents[cell]))


def _halves_children(d, j):
    """ Every cell of level j has exactly two children of half its measure. """

    for cell in range(len(d.cells(j))):
        kids = children(d, j + 1, cell)
        if len(kids) != 2:
            return False
        half = d.cell_measure(j, cell) * HALF
        if any(d.cell_measure(j + 1, c) != half for c in kids):
            return False
    return True


def _first_level_dyadic(d):
    if _halves_children(d, 0):
        return True
    f = d.difference(1)
    masses = {}
    for v, m in zip(f.values, d.grid.measures):
        masses[v] = masses.get(v, ZERO) + m
    return len(masses) == 2 and all(m == HALF for m in masses.values())


def is_k_dyadic(d, k):
    """
    k-dyadic: the first level splits [0,1) into two halves (either the root
    has two equal children or d_1 takes two values on sets of measure 1/2),
    and every cell of D_j, 1 <= j < k, has exactly two children of equal
    measure. 0-dyadic holds vacuously.

    """

    if not 0 <= k <= d.n:
        raise LevelOutOfRange("level {0} not in 0..{1}".format(k, d.n))
    if k == 0:
        return True
    if not _first_level_dyadic(d):
        return False
    return all(_halves_children(d, j) for j in range(1, k))


def is_dyadic(d):
    """ Every cell of levels 0..n-1 has exactly two children of equal measure. """

    return all(_halves_children(d, j) for j in range(d.n))


def _modulus_on(values, atoms):
    """ The common |value| on atoms, or None when it is not constant. """

    moduli = set(abs(values[i]) for i in atoms)
    if len(moduli) == 1:
        return moduli.pop()
    return None


def is_ip(d, k):
    """ (k-1)-dyadic and |d_k| equals its sup on every cell of D_{k-1}. """

    if not 1 <= k <= d.n:
        raise LevelOutOfRange("level {0} not in 1..{1}".format(k, d.n))
    if not is_k_dyadic(d, k - 1):
        return False
    values = d.difference(k).values
    return all(_modulus_on(values, atoms) is not None for atoms in d.cells(k - 1))


def is_m_rademacher(d, m):
    """
    On every cell V of D_{m-1} the moduli |d_m|, ..., |d_n| share one
    constant c(V). Defined for dyadic systems only.

    """

    if not 1 <= m <= d.n:
        raise LevelOutOfRange("level {0} not in 1..{1}".format(m, d.n))
    if not is_dyadic(d):
        raise NotDyadic("the m-Rademacher property is defined for dyadic systems")

    for atoms in d.cells(m - 1):
        moduli = set(abs(d.difference(j).values[i]) for j in range(m, d.n + 1) for i in atoms)
        if len(moduli) != 1:
            return False
    return True


def compact(d):
    """
    Measure-preserving relayout: each finest cell becomes a single interval.

    Finest cells are ordered depth first through the filtration, so systems
    whose finest cells already are consecutive intervals come back unchanged.
    Norms, square functions and all structural predicates are invariant.

    """

    finest = d.cells(d.n)
    keys = []
    for cell, atoms in enumerate(finest):
        first = atoms[0]
        keys.append((tuple(d.labeling(k).labels[first] for k in range(1, d.n + 1)), cell))
    keys.sort()

    breakpoints = [ZERO]
    labels = [[] for _ in range(d.n)]
    values = [[] for _ in range(d.n)]
    measures = d.grid.measures
    for path, cell in keys:
        atoms = finest[cell]
        breakpoints.append(breakpoints[-1] + sum((measures[i] for i in atoms), ZERO))
        for k in range(d.n):
            labels[k].append(path[k])
            values[k].append(d.differences[k].values[atoms[0]])

    return from_atoms(breakpoints, labels, values)


def _rademacher_sign(atom, n, k):
    """ Sign of r_k on atom `atom` of the uniform 2^n grid: + on even dyadic intervals of length 2^-k. """
    return 1 if (atom >> (n - k)) % 2 == 0 else -1


def from_rademacher_coeffs(a):
    """ d_k = a_k r_k on the uniform grid of 2^n atoms, D_k the dyadic intervals of length 2^-k. """

    coeffs = [to_rational(c) for c in a]
    n = len(coeffs)
    if n < 1:
        raise BadCoefficientCount("need at least one coefficient")

    size = 2 ** n
    labels = [[i >> (n - k) for i in range(size)] for k in range(1, n + 1)]
    values = [[coeffs[k - 1] * _rademacher_sign(i, n, k) for i in range(size)] for k in range(1, n + 1)]
    return from_atoms(uniform_grid(size).breakpoints, labels, values)


def rademacher_system(n, bits=None):
    """ The equality witness d_k = r_k / sqrt(n), with 1/sqrt(n) floored to `bits` bits. """

    c = rational_sqrt(Fraction(1, n), bits)
    return from_rademacher_coeffs([c] * n)


def from_haar_coeffs(a):
    """
    Haar expansion with coefficients a_1, ..., a_{2^n}.

    a_1 (the constant h_1) is not a difference and is ignored; level k
    carries the whole Haar scale sum_{j=2^{k-1}+1}^{2^k} a_j h_j.

    """

    coeffs = [to_rational(c) for c in a]
    size = len(coeffs)
    if size < 2 or size & (size - 1):
        raise BadCoefficientCount("need 2^n >= 2 Haar coefficients, got {0}".format(size))
    n = size.bit_length() - 1

    labels = []
    values = []
    for k in range(1, n + 1):
        labels.append([i >> (n - k) for i in range(size)])
        level = []
        for i in range(size):
            q = i >> (n - k + 1)                      # support of h_m, m = 2^{k-1} + q + 1
            level.append(coeffs[2 ** (k - 1) + q] * _rademacher_sign(i, n, k))
        values.append(level)

    d = from_atoms(uniform_grid(size).breakpoints, labels, values)
    if is_trivial(d):
        log.info("Haar coefficients %s give the trivial system", [str(c) for c in coeffs])
    return d


def from_independent_symmetric(variables):
    """
    Realizes independent symmetric discrete variables X_1, ..., X_n as an
    MD-system of nested intervals.

    `variables` is a sequence of sequences of (value, probability) pairs.
    Cell order inside a parent follows increasing value.

    """

    laws = []
    for k, pairs in enumerate(variables, start=1):
        law = {}
        for value, prob in pairs:
            value, prob = to_rational(value), to_rational(prob)
            if prob < 0:
                raise NotProbability("X_{0} has negative probability {1}".format(k, prob))
            if prob > 0:
                law[value] = law.get(value, ZERO) + prob
        if sum(law.values(), ZERO) != ONE:
            raise NotProbability("probabilities of X_{0} sum to {1}".format(k, sum(law.values(), ZERO)))
        for value, prob in law.items():
            if law.get(-value, ZERO) != prob:
                raise NotSymmetric("X_{0} has P(X={1}) = {2} but P(X={3}) = {4}".format(
                    k, value, prob, -value, law.get(-value, ZERO)))
        laws.append(sorted(law.items()))

    if not laws:
        raise BadCoefficientCount("need at least one variable")

    n = len(laws)
    breakpoints = [ZERO]
    labels = [[] for _ in range(n)]
    values = [[] for _ in range(n)]
    for choice in itertools.product(*[range(len(law)) for law in laws]):
        mass = ONE
        for k, c in enumerate(choice):
            mass *= laws[k][c][1]
            labels[k].append(choice[:k + 1])
            values[k].append(laws[k][c][0])
        breakpoints.append(breakpoints[-1] + mass)

    return from_atoms(breakpoints, labels, values)


def _random_rational(rng, bound):
    """ Nonzero rational of absolute value <= bound (at least 1/q) with denominator q <= 4. """
    q = int(rng.integers(1, 5))
    top = max(1, int(bound * q))
    magnitude = int(rng.integers(1, top + 1))
    sign = 1 if rng.integers(0, 2) == 0 else -1
    return Fraction(sign * magnitude, q)


def random_md(n, max_children, value_bound, seed, dyadic_levels=0):
    """
    Random valid MD-system, deterministic in `seed`.

    Every cell gets between 2 and `max_children` interval children cut at
    random rational points; all but the last child draw a nonzero value in
    [-value_bound, value_bound], the last one solves the mean-zero equation.
    The first `dyadic_levels` levels are dyadic (two halves, values +-c), so
    the result is dyadic_levels-dyadic.

    """

    if n < 1:
        raise DomainError("n must be >= 1, got {0}".format(n))
    if max_children < 2:
        raise DomainError("max_children must be >= 2, got {0}".format(max_children))
    if not value_bound > 0:
        raise DomainError("value_bound must be positive, got {0}".format(value_bound))

    rng = np.random.default_rng(seed)
    bound = to_rational(value_bound)

    # each node: (a, b, path of ancestor ids, values along the path)
    nodes = [(ZERO, ONE, (), ())]
    for k in range(1, n + 1):
        next_nodes = []
        for a, b, path, vals in nodes:
            width = b - a
            if k <= dyadic_levels:
                c = abs(_random_rational(rng, bound))
                cuts = [HALF]
                kid_values = [c, -c]
            else:
                count = int(rng.integers(2, max_children + 1))
                den = int(rng.integers(count, 2 * max_children + 1))
                cuts = sorted(Fraction(int(t), den) for t in rng.choice(np.arange(1, den), size=count - 1, replace=False))
                kid_values = [_random_rational(rng, bound) for _ in range(count - 1)]
            positions = [ZERO] + cuts + [ONE]
            masses = [t - s for s, t in zip(positions[:-1], positions[1:])]
            if len(kid_values) < len(masses):
                partial = sum((m * v for m, v in zip(masses, kid_values)), ZERO)
                kid_values.append(-partial / masses[-1])
            for j, (s, t) in enumerate(zip(positions[:-1], positions[1:])):
                next_nodes.append((a + s * width, a + t * width, path + (j,), vals + (kid_values[j],)))
        nodes = next_nodes

    breakpoints = [ZERO] + [b for _, b, _, _ in nodes]
    labels = [[path[:k] for _, _, path, _ in nodes] for k in range(1, n + 1)]
    values = [[vals[k - 1] for _, _, _, vals in nodes] for k in range(1, n + 1)]
    return from_atoms(breakpoints, labels, values)
