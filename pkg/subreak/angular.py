"""Angular-momentum coupling for two equal sublattice spins.

The Lieb-Mattis tower of states is built from the total-spin states
``|S, M=0>`` of two sublattice spins of length ``s``. Two independent routes
are provided: exact Racah sums for small spins, used by the
exact-diagonalization oracle, and the m=0 block of ``S_A . S_B``, which is
tridiagonal and stays accurate for sublattice spins in the thousands.
"""
from fractions import Fraction
from math import factorial

import numpy as np
from scipy.linalg import eigh_tridiagonal

from subreak.errors import InvalidArgumentError


def _doubled(value, name):
    """Returns ``2 * value`` as an int, checking that ``value`` is an integer
    or half-integer."""
    twice = 2 * Fraction(value)
    if twice.denominator != 1:
        raise InvalidArgumentError(
            f'{name}={value} is not an integer or half-integer')
    return int(twice)


def clebsch_gordan(j1, m1, j2, m2, j, m):
    """Calculates the Clebsch-Gordan coefficient
    ``<j1, m1; j2, m2 | j, m>`` in the Condon-Shortley phase convention.

    The Racah sum is evaluated in exact rational arithmetic, so the result is
    accurate to double precision for any spins whose factorials fit in
    memory.

    Parameters
    ----------
    j1, m1, j2, m2, j, m : int, float or Fraction
        Angular momenta and projections. Must be integer or half-integer.

    Returns
    -------
    cg : float
        The coupling coefficient. Zero when the selection rules forbid the
        coupling.

    """
    tj1, tm1 = _doubled(j1, 'j1'), _doubled(m1, 'm1')
    tj2, tm2 = _doubled(j2, 'j2'), _doubled(m2, 'm2')
    tj, tm = _doubled(j, 'j'), _doubled(m, 'm')

    if tm1 + tm2 != tm:
        return 0.0
    if tj > tj1 + tj2 or tj < abs(tj1 - tj2):
        return 0.0
    if abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tm) > tj:
        return 0.0
    if (tj1 - tm1) % 2 or (tj2 - tm2) % 2 or (tj - tm) % 2 \
            or (tj1 + tj2 + tj) % 2:
        return 0.0

    a = (tj1 + tj2 - tj) // 2
    b = (tj1 - tm1) // 2
    c = (tj2 + tm2) // 2
    d = (tj - tj2 + tm1) // 2
    e = (tj - tj1 - tm2) // 2

    under_root = Fraction(
        (tj + 1)
        * factorial((tj + tj1 - tj2) // 2)
        * factorial((tj - tj1 + tj2) // 2)
        * factorial(a),
        factorial((tj1 + tj2 + tj) // 2 + 1))
    under_root *= (factorial((tj + tm) // 2) * factorial((tj - tm) // 2)
                   * factorial(b) * factorial((tj1 + tm1) // 2)
                   * factorial((tj2 - tm2) // 2) * factorial(c))

    racah_sum = Fraction(0)
    for k in range(max(0, -d, -e), min(a, b, c) + 1):
        racah_sum += Fraction(
            (-1) ** k,
            factorial(k) * factorial(a - k) * factorial(b - k)
            * factorial(c - k) * factorial(d + k) * factorial(e + k))

    return float(racah_sum) * float(under_root) ** 0.5


def projection_grid(s):
    """Returns the projections ``m = -s, ..., s`` of a spin ``s`` in
    ascending order."""
    two_s = _doubled(s, 's')
    if two_s < 0:
        raise InvalidArgumentError(f's={s} must be non-negative')
    return -two_s / 2 + np.arange(two_s + 1)


def coupled_zero_states(s, n_states):
    """Computes the lowest ``n_states`` total-spin states ``|S, 0>`` of two
    spins of length ``s`` in the product basis ``|m, -m>``.

    The m=0 block of ``S_A . S_B`` is tridiagonal with eigenvalues
    ``S(S+1)/2 - s(s+1)``, increasing in ``S``, so its lowest eigenvectors are
    the states ``S = 0, ..., n_states - 1``. Signs follow Condon-Shortley:
    the coefficient at ``m = +s`` is positive.

    Parameters
    ----------
    s : int or float
        Sublattice spin length.
    n_states : int
        Number of total-spin states to return, at most ``2s + 1``.

    Returns
    -------
    m : numpy.ndarray
        Projections of sublattice A, ascending.
    coefficients : numpy.ndarray
        Array of shape ``(2s + 1, n_states)``. Column ``S`` holds
        ``<s, m; s, -m | S, 0>``.

    """
    m = projection_grid(s)
    if not 1 <= n_states <= len(m):
        raise InvalidArgumentError(
            f'n_states={n_states} must lie in [1, {len(m)}] for s={s}')
    s = float(s)
    diagonal = -m ** 2
    off_diagonal = 0.5 * (s * (s + 1) - m[:-1] * (m[:-1] + 1))
    if len(m) == 1:
        return m, np.ones((1, 1))
    _, vectors = eigh_tridiagonal(diagonal, off_diagonal,
                                  select='i',
                                  select_range=(0, n_states - 1))
    vectors *= np.sign(vectors[-1, :])
    return m, vectors


def staggered_elements(s, n_states):
    """Matrix elements ``<S+1, 0| S_A^z - S_B^z |S, 0>`` for
    ``S = 0, ..., n_states - 2``, computed from the coupled states of
    :func:`coupled_zero_states`.

    Returns
    -------
    elements : numpy.ndarray
        Array of length ``n_states - 1``.

    """
    m, coefficients = coupled_zero_states(s, n_states)
    weighted = (2 * m)[:, None] * coefficients
    return np.einsum('mi,mi->i', coefficients[:, 1:], weighted[:, :-1])


def staggered_reduced_element(s, total_spin):
    """Closed form of ``|<S-1, 0| S_A^z - S_B^z |S, 0>|`` for two spins of
    length ``s``.

    Parameters
    ----------
    s : int or float
        Sublattice spin length.
    total_spin : int or numpy.ndarray
        Upper total spin ``S >= 1``.

    """
    total_spin = np.asarray(total_spin, dtype=float)
    return total_spin * np.sqrt(((2 * s + 1) ** 2 - total_spin ** 2)
                                / (4 * total_spin ** 2 - 1))


__all__ = ['clebsch_gordan',
           'projection_grid',
           'coupled_zero_states',
           'staggered_elements',
           'staggered_reduced_element']
