"""
Exact measure on [0,1): rational breakpoints, atoms, cell labelings and
step functions.

Everything in martingal is piecewise constant on an AtomGrid, the finest
decomposition of [0,1) into half-open intervals [t_{i-1}, t_i). Breakpoints,
values and measures are Fractions, so integrals of step functions are exact.
Only p-th powers for real p are evaluated in floating point.

"""

import bisect
import math
from fractions import Fraction

import numpy as np

from .exceptions import (AtomIndexOutOfRange, BadEndpoints, DomainError,
                         NonMonotoneBreakpoints, ParseError)
from . import config

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)


def to_rational(x):
    """
    Converts ints, Fractions, "num/den" strings and floats to a Fraction.

    Floats are converted exactly (their binary expansion), never rounded.

    """

    if isinstance(x, Fraction):
        return x
    if isinstance(x, (bool, np.bool_)):
        raise TypeError("booleans are not rationals")
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise DomainError("cannot convert {0!r} to a rational".format(x))
        return Fraction(float(x))
    raise TypeError("cannot convert {0!r} to a rational".format(type(x)))


def decimal_rational(x):
    """
    Like to_rational, but a float is read through its shortest decimal repr,
    so 0.3 becomes 3/10. Used for user-facing thresholds.

    """

    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise DomainError("cannot convert {0!r} to a rational".format(x))
        return Fraction(repr(float(x)))
    return to_rational(x)


def parse_rational(text):
    """ Parses "num/den" (or a bare integer) into a Fraction. """

    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError, AttributeError) as e:
        raise ParseError("malformed rational {0!r}: {1}".format(text, e))


def format_rational(q):
    """ Always "num/den", e.g. "-2/1". """

    q = to_rational(q)
    return "{0}/{1}".format(q.numerator, q.denominator)


def rational_sqrt(q, bits=None):
    """
    Square root of a nonnegative rational.

    Exact when numerator and denominator are perfect squares, otherwise the
    floor of sqrt(q) to `bits` binary digits, so 0 <= sqrt(q) - result < 2**-bits.

    """

    if bits is None:
        bits = config.sqrt_precision_bits
    q = to_rational(q)
    if q < 0:
        raise DomainError("square root of negative rational {0}".format(q))

    num_root = math.isqrt(q.numerator)
    den_root = math.isqrt(q.denominator)
    if num_root * num_root == q.numerator and den_root * den_root == q.denominator:
        return Fraction(num_root, den_root)

    scale = 1 << bits
    return Fraction(math.isqrt((q.numerator * scale * scale) // q.denominator), scale)


class AtomGrid(object):
    """
    Strictly increasing breakpoints 0 = t_0 < ... < t_m = 1.

    Construct through make_grid() when the breakpoints are untrusted.

    """

    __slots__ = ('breakpoints', 'measures')

    def __init__(self, breakpoints):
        self.breakpoints = tuple(breakpoints)
        self.measures = tuple(b - a for a, b in zip(self.breakpoints[:-1], self.breakpoints[1:]))

    @property
    def n_atoms(self):
        return len(self.measures)

    def __len__(self):
        return len(self.measures)

    def atom(self, i):
        """ Endpoints (a, b) of atom i. """
        if not 0 <= i < self.n_atoms:
            raise AtomIndexOutOfRange("atom {0} not in grid of {1} atoms".format(i, self.n_atoms))
        return self.breakpoints[i], self.breakpoints[i + 1]

    def float_measures(self):
        return np.array([float(m) for m in self.measures])

    def locate(self, x):
        """ Index of the atom containing the point x. """
        x = to_rational(x)
        if not ZERO <= x < ONE:
            raise AtomIndexOutOfRange("point {0} outside [0,1)".format(x))
        return bisect.bisect_right(self.breakpoints, x) - 1

    def __eq__(self, other):
        return isinstance(other, AtomGrid) and self.breakpoints == other.breakpoints

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self.breakpoints)

    def __repr__(self):
        return "AtomGrid([{0}])".format(", ".join(str(t) for t in self.breakpoints))


def make_grid(breakpoints):
    """ Validates breakpoints and returns the AtomGrid they define. """

    points = [to_rational(t) for t in breakpoints]

    if len(points) < 2 or points[0] != ZERO or points[-1] != ONE:
        raise BadEndpoints("breakpoints must start at 0 and end at 1, got {0}".format(
            [str(t) for t in points]))

    for a, b in zip(points[:-1], points[1:]):
        if not a < b:
            raise NonMonotoneBreakpoints("breakpoints not strictly increasing at {0}, {1}".format(a, b))

    return AtomGrid(points)


def uniform_grid(m):
    """ Grid of m atoms of measure 1/m. """

    return AtomGrid(Fraction(i, m) for i in range(m + 1))


def refine(a, b):
    """
    Common refinement of two grids.

    Returns (grid, map_a, map_b) where map_a[i] is the atom of `a` containing
    atom i of the common grid (likewise map_b). Both maps are surjective and
    order-preserving.

    """

    points = sorted(set(a.breakpoints) | set(b.breakpoints))
    common = AtomGrid(points)

    map_a = tuple(bisect.bisect_right(a.breakpoints, t) - 1 for t in points[:-1])
    map_b = tuple(bisect.bisect_right(b.breakpoints, t) - 1 for t in points[:-1])

    return common, map_a, map_b


def subdivide(g, relative_cuts):
    """
    Cuts atoms of `g` at relative positions.

    `relative_cuts` maps an atom index to an iterable of Fractions in (0,1);
    position s inside atom [a,b) is the point (1-s)a + sb.

    Returns (grid, origin, pieces): origin[i] is the atom of `g` containing
    new atom i, pieces[i] = (s, t) its relative extent inside that atom.

    """

    points = [ZERO]
    origin = []
    pieces = []

    for i, (a, b) in enumerate(zip(g.breakpoints[:-1], g.breakpoints[1:])):
        cuts = sorted(set(to_rational(s) for s in relative_cuts.get(i, ())))
        if cuts and not (ZERO < cuts[0] and cuts[-1] < ONE):
            raise DomainError("relative cuts of atom {0} must lie in (0,1)".format(i))
        positions = [ZERO] + cuts + [ONE]
        for s, t in zip(positions[:-1], positions[1:]):
            points.append((1 - t) * a + t * b)
            origin.append(i)
            pieces.append((s, t))

    return AtomGrid(points), tuple(origin), tuple(pieces)


def split_atom(g, atom, ratio):
    """
    Splits atom [a,b) at c = (1-ratio)a + ratio*b.

    Degenerate ratios 0 and 1 return the grid unchanged.

    """

    ratio = to_rational(ratio)
    if not ZERO <= ratio <= ONE:
        raise DomainError("split ratio {0} outside [0,1]".format(ratio))
    if not 0 <= atom < g.n_atoms:
        raise AtomIndexOutOfRange("atom {0} not in grid of {1} atoms".format(atom, g.n_atoms))

    if ratio in (ZERO, ONE):
        return g

    new_grid, _, _ = subdivide(g, {atom: [ratio]})
    return new_grid


def split_atoms(g, ratios):
    """
    Splits every atom i at its own ratio λ_i into a left part [a,c) and right part [c,b).

    Returns (grid, origin, side) with side[i] = +1 for left parts and -1 for
    right parts. An atom with λ = 1 survives whole as a left part, λ = 0 as a
    right part.

    """

    cuts = {}
    for i, ratio in enumerate(ratios):
        if not ZERO <= ratio <= ONE:
            raise DomainError("split ratio {0} outside [0,1]".format(ratio))
        if ZERO < ratio < ONE:
            cuts[i] = [ratio]

    new_grid, origin, pieces = subdivide(g, cuts)

    side = []
    for i, (s, t) in zip(origin, pieces):
        if ratios[i] == ZERO:
            side.append(-1)
        elif s == ZERO:
            side.append(+1)
        else:
            side.append(-1)

    return new_grid, origin, tuple(side)


class CellLabeling(object):
    """
    Assigns every atom of a grid to a cell.

    Labels may be any hashable keys; they are renumbered 0, 1, ... in order
    of first appearance, so cell ids increase with the left end of the cell.
    Cells are unions of atoms and need not be intervals.

    """

    __slots__ = ('labels', 'n_cells', '_cells')

    def __init__(self, labels):
        ids = {}
        canonical = []
        for key in labels:
            if key not in ids:
                ids[key] = len(ids)
            canonical.append(ids[key])
        self.labels = tuple(canonical)
        self.n_cells = len(ids)
        self._cells = None

    def __len__(self):
        return len(self.labels)

    def cells(self):
        """ Tuple of atom-index tuples, indexed by cell id. """
        if self._cells is None:
            members = [[] for _ in range(self.n_cells)]
            for atom, c in enumerate(self.labels):
                members[c].append(atom)
            self._cells = tuple(tuple(m) for m in members)
        return self._cells

    def cell_of(self, atom):
        return self.labels[atom]

    def __eq__(self, other):
        return isinstance(other, CellLabeling) and self.labels == other.labels

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self.labels)

    def __repr__(self):
        return "CellLabeling({0})".format(list(self.labels))


class StepFunction(object):
    """ One Fraction per atom of `grid`. """

    __slots__ = ('grid', 'values')

    def __init__(self, grid, values):
        values = tuple(to_rational(v) for v in values)
        if len(values) != grid.n_atoms:
            raise ValueError("{0} values for a grid of {1} atoms".format(len(values), grid.n_atoms))
        self.grid = grid
        self.values = values

    @classmethod
    def constant(cls, grid, c):
        return cls(grid, [to_rational(c)] * grid.n_atoms)

    def _coerce(self, other):
        if isinstance(other, StepFunction):
            if other.grid != self.grid:
                raise ValueError("step functions live on different grids; refine() first")
            return other.values
        c = to_rational(other)
        return [c] * self.grid.n_atoms

    def __add__(self, other):
        return StepFunction(self.grid, [a + b for a, b in zip(self.values, self._coerce(other))])

    __radd__ = __add__

    def __sub__(self, other):
        return StepFunction(self.grid, [a - b for a, b in zip(self.values, self._coerce(other))])

    def __rsub__(self, other):
        return StepFunction(self.grid, [b - a for a, b in zip(self.values, self._coerce(other))])

    def __mul__(self, other):
        return StepFunction(self.grid, [a * b for a, b in zip(self.values, self._coerce(other))])

    __rmul__ = __mul__

    def __neg__(self):
        return StepFunction(self.grid, [-a for a in self.values])

    def __abs__(self):
        return StepFunction(self.grid, [abs(a) for a in self.values])

    def square(self):
        return StepFunction(self.grid, [a * a for a in self.values])

    def sup_norm(self):
        return max(abs(a) for a in self.values)

    def max(self):
        return max(self.values)

    def min(self):
        return min(self.values)

    def as_floats(self):
        return np.array([float(a) for a in self.values])

    def pullback(self, grid, index_map):
        """ The same function read on a finer grid through index_map (new atom -> own atom). """
        return StepFunction(grid, [self.values[i] for i in index_map])

    def __eq__(self, other):
        return isinstance(other, StepFunction) and self.grid == other.grid and self.values == other.values

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self.grid, self.values))

    def __repr__(self):
        return "StepFunction([{0}])".format(", ".join(str(v) for v in self.values))


def integrate(f):
    """ Exact Lebesgue integral over [0,1). """

    return sum((v * m for v, m in zip(f.values, f.grid.measures)), ZERO)


def integrate_over(f, atoms):
    """ Exact integral of f over a union of atoms. """

    return sum((f.values[i] * f.grid.measures[i] for i in atoms), ZERO)


def integrate_abs_pow(f, p):
    """
    The p-th power of the L^p norm, sum of |value|^p * measure.

    Evaluated in floating point; take the p-th root yourself.

    """

    if not p > 0:
        raise DomainError("p must be positive, got {0}".format(p))

    return float(np.sum(np.abs(f.as_floats()) ** p * f.grid.float_measures()))
