"""
The Chang-Wilson-Wolff square function, the classical square function and
the homogeneity constant of a filtration.

Square functions are kept squared, so they stay exact rationals:

    CWW(d)^2 (x) = sum_k D_k(x)^2,  D_k = sup of |d_k| over the cell of D_{k-1} containing x
    S(d)^2 (x)   = sum_k d_k(x)^2

"""

from collections import namedtuple

from .exact_measure import ZERO, StepFunction

SquareFunctionResult = namedtuple('SquareFunctionResult', ['pointwise', 'sup_sq'])


def envelope(d, k):
    """ D_k: on each cell V of D_{k-1}, the sup of |d_k| over V. """

    values = d.difference(k).values
    result = [ZERO] * d.grid.n_atoms
    for atoms in d.cells(k - 1):
        top = max(abs(values[i]) for i in atoms)
        for i in atoms:
            result[i] = top
    return StepFunction(d.grid, result)


def _sum_of_squares(grid, functions):
    total = [ZERO] * grid.n_atoms
    for f in functions:
        total = [t + v * v for t, v in zip(total, f.values)]
    return StepFunction(grid, total)


def square_cww(d):
    """ Squared CWW square function and its sup. """

    pointwise = _sum_of_squares(d.grid, [envelope(d, k) for k in range(1, d.n + 1)])
    return SquareFunctionResult(pointwise, pointwise.max())


def square_classical(d):
    """ Squared classical square function and its sup. """

    pointwise = _sum_of_squares(d.grid, d.differences)
    return SquareFunctionResult(pointwise, pointwise.max())


def homogeneity(d):
    """
    The largest alpha with mu(U) >= alpha mu(V) for every child U of every
    cell V, i.e. the smallest child-to-parent measure ratio.

    """

    alpha = None
    for k in range(1, d.n + 1):
        parent_labels = d.labeling(k - 1).labels
        for cell, atoms in enumerate(d.cells(k)):
            parent = parent_labels[atoms[0]]
            ratio = d.cell_measure(k, cell) / d.cell_measure(k - 1, parent)
            if alpha is None or ratio < alpha:
                alpha = ratio
    return alpha
