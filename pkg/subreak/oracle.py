"""Full-Hilbert-space reference for small infinite-range antiferromagnets.

The product basis index ``i`` of ``N`` spins-1/2 stores site ``k`` in bit
``k``; a set bit is spin up. Sublattice A holds the even sites, sublattice B
the odd ones. The Hamiltonian is
``(2J/N) S_A . S_B + b (S_A^z - S_B^z)``.
"""
import logging
from dataclasses import dataclass
from math import comb

import numpy as np
import scipy.sparse
from scipy.linalg import eigh
from scipy.sparse.linalg import expm_multiply

from subreak.angular import clebsch_gordan
from subreak.dynamics import PropagatorConfig, evolve_trajectory
from subreak.errors import InvalidArgumentError
from subreak.thin_spectrum import (ModelKind, QuantumState,
                                   ThinSpectrumModel,
                                   build_lieb_mattis_model,
                                   symmetric_ground_state)

logger = logging.getLogger(__name__)

MAX_SPINS = 12
SECTOR_TOLERANCE = 1e-10


def _site_spins(n_spins):
    """``S^z`` of every site in every basis state, shape ``(2^N, N)``."""
    index = np.arange(2 ** n_spins)
    bits = (index[:, None] >> np.arange(n_spins)) & 1
    return bits - 0.5


def _sublattices(n_spins):
    sites = np.arange(n_spins)
    return sites[sites % 2 == 0], sites[sites % 2 == 1]


def spin_dot(n_spins, sites_x, sites_y):
    """Sparse matrix of ``S_X . S_Y`` for two sets of sites.

    Parameters
    ----------
    n_spins : int
        Number of spins.
    sites_x, sites_y : array_like of int
        Site indices of the two spin sums. They may overlap.

    Returns
    -------
    operator : scipy.sparse.csr_matrix

    """
    dim = 2 ** n_spins
    spins = _site_spins(n_spins)
    index = np.arange(dim)
    diagonal = np.zeros(dim)
    rows, cols = [], []
    for a in sites_x:
        for b in sites_y:
            if a == b:
                diagonal += 0.75
                continue
            diagonal += spins[:, a] * spins[:, b]
            flippable = index[spins[:, a] != spins[:, b]]
            rows.append(flippable)
            cols.append(flippable ^ ((1 << int(a)) | (1 << int(b))))
    operator = scipy.sparse.diags(diagonal, format='csr')
    if rows:
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        operator = operator + scipy.sparse.csr_matrix(
            (np.full(len(rows), 0.5), (rows, cols)), shape=(dim, dim))
    return operator


@dataclass(frozen=True, eq=False)
class FullSpinSystem:
    """Dense product-basis matrices of a small antiferromagnet.

    Attributes
    ----------
    n_spins : int
        Number of spins N, even and at most 12.
    coupling_j : float
        Exchange coupling J.
    field_b : float
        Staggered field b.
    hamiltonian : numpy.ndarray
        ``(2J/N) S_A . S_B + b (S_A^z - S_B^z)``.
    staggered_diagonal : numpy.ndarray
        Diagonal of ``S_A^z - S_B^z``.
    total_sz_diagonal : numpy.ndarray
        Diagonal of the total ``S^z``.

    """
    n_spins: int
    coupling_j: float
    field_b: float
    hamiltonian: np.ndarray
    staggered_diagonal: np.ndarray
    total_sz_diagonal: np.ndarray

    @property
    def dimension(self):
        return 2 ** self.n_spins

    @property
    def staggered_op(self):
        """Staggered magnetization ``S_A^z - S_B^z`` as a sparse diagonal
        matrix."""
        return scipy.sparse.diags(self.staggered_diagonal, format='csr')

    def commutator_norm(self):
        """Frobenius norm of ``[H, S^z_total]``."""
        sz = self.total_sz_diagonal
        return float(np.linalg.norm(self.hamiltonian
                                    * (sz[None, :] - sz[:, None])))

    def lowest_states(self, count=2):
        """Lowest ``count`` eigenpairs of the Hamiltonian."""
        return eigh(self.hamiltonian, subset_by_index=[0, count - 1])

    def total_spin_squared(self, vector):
        """``<S^2>`` of a product-basis vector."""
        sites = np.arange(self.n_spins)
        return float(np.real(np.vdot(
            vector, spin_dot(self.n_spins, sites, sites) @ vector)))


def build_full_system(n_spins, coupling_j=1.0, field_b=0.0):
    """Builds the full-Hilbert-space antiferromagnet.

    Parameters
    ----------
    n_spins : int
        Number of spins, even and at most 12.
    coupling_j : float
        Exchange coupling J.
    field_b : float
        Staggered field b.

    Returns
    -------
    system : FullSpinSystem

    """
    if n_spins > MAX_SPINS:
        raise InvalidArgumentError(
            f'n_spins={n_spins} exceeds the dense limit of {MAX_SPINS}')
    if n_spins < 2 or n_spins % 2:
        raise InvalidArgumentError(
            f'n_spins={n_spins} must be even and at least 2')
    sites_a, sites_b = _sublattices(n_spins)
    spins = _site_spins(n_spins)
    staggered = spins[:, sites_a].sum(axis=1) - spins[:, sites_b].sum(axis=1)
    exchange = spin_dot(n_spins, sites_a, sites_b)
    hamiltonian = (2 * coupling_j / n_spins) * exchange.toarray() \
        + field_b * np.diag(staggered)
    return FullSpinSystem(n_spins=n_spins,
                          coupling_j=coupling_j,
                          field_b=field_b,
                          hamiltonian=hamiltonian,
                          staggered_diagonal=staggered,
                          total_sz_diagonal=spins.sum(axis=1))


def sector_basis(n_spins, cutoff=None):
    """Product-basis vectors of the total-spin states ``|S, 0>`` with
    maximal sublattice spins ``S_A = S_B = N/4``.

    Each sublattice spin state ``|s, m>`` is a normalized symmetric (Dicke)
    sum of configurations; the two are coupled with Clebsch-Gordan
    coefficients.

    Parameters
    ----------
    n_spins : int
        Number of spins, divisible by 4.
    cutoff : int, optional
        Number of total-spin states, ``S = 0 .. cutoff - 1``. Defaults to
        the full sector ``N/2 + 1``.

    Returns
    -------
    basis : numpy.ndarray
        Array of shape ``(2^N, cutoff)`` with orthonormal columns.

    """
    if n_spins % 4:
        raise InvalidArgumentError(
            f'n_spins={n_spins} must be divisible by 4')
    sector_size = n_spins // 2 + 1
    cutoff = sector_size if cutoff is None else cutoff
    if not 1 <= cutoff <= sector_size:
        raise InvalidArgumentError(
            f'cutoff={cutoff} must lie in [1, {sector_size}]')
    half = n_spins // 2
    s = n_spins // 4
    sites_a, sites_b = _sublattices(n_spins)
    spins = _site_spins(n_spins)
    up_a = (spins[:, sites_a] > 0).sum(axis=1)
    up_b = (spins[:, sites_b] > 0).sum(axis=1)
    m_a = up_a - s
    in_sector = (up_a + up_b) == half

    basis = np.zeros((2 ** n_spins, cutoff))
    for total in range(cutoff):
        for m in range(-s, s + 1):
            states = in_sector & (m_a == m)
            dicke = np.sqrt(comb(half, s + m) * comb(half, s - m))
            basis[states, total] = clebsch_gordan(s, m, s, -m, total, 0) \
                / dicke
    return basis


def sector_projector(system, cutoff=None):
    """Orthogonal projector onto the retained thin sector."""
    basis = sector_basis(system.n_spins, cutoff)
    return basis @ basis.T


def thin_sector_projection(system, cutoff=None):
    """Projects the full Hamiltonian and the staggered magnetization onto
    the thin sector ``S_A = S_B = N/4``, ``M = 0``, ``S = 0 .. cutoff-1``.

    Parameters
    ----------
    system : FullSpinSystem
        System built at zero field.
    cutoff : int, optional
        Number of retained total-spin levels, default the whole sector.

    Returns
    -------
    model : ThinSpectrumModel
        Energies relative to the singlet and the projected order parameter.

    """
    if system.field_b != 0:
        raise InvalidArgumentError(
            f'field_b={system.field_b} must be 0 for a sector projection')
    basis = sector_basis(system.n_spins, cutoff)
    projected = basis.T @ system.hamiltonian @ basis
    energies = np.diag(projected).copy()
    off_diagonal = np.max(np.abs(projected - np.diag(energies)))
    if off_diagonal > SECTOR_TOLERANCE:
        logger.warning('projected Hamiltonian has off-diagonal elements up '
                       'to %.3g', off_diagonal)
    order = basis.T @ (system.staggered_diagonal[:, None] * basis)
    order = (order + order.T) / 2
    return ThinSpectrumModel(n_particles=system.n_spins,
                             cutoff=basis.shape[1],
                             energies=energies - energies[0],
                             order_param=order,
                             kind=ModelKind.LIEB_MATTIS,
                             coupling_j=system.coupling_j)


def full_evolution_check(system, thin_model, o, t_grid, initial):
    """Evolves a sector state in the full Hilbert space and compares the
    staggered magnetization with the thin-model trajectory.

    Parameters
    ----------
    system : FullSpinSystem
        System built at zero field.
    thin_model : ThinSpectrumModel
        Thin model of the same system, e.g. from
        :func:`thin_sector_projection`.
    o : float
        Field strength of the non-unitary term ``-i o (S_A^z - S_B^z)``.
    t_grid : array_like
        Strictly increasing times starting at 0.
    initial : QuantumState or array_like
        Initial state, either in the thin basis or as a product-basis vector
        inside the sector.

    Returns
    -------
    deviation : float
        Largest absolute difference of ``<S_A^z - S_B^z>`` over the grid.

    """
    if system.field_b != 0:
        raise InvalidArgumentError(
            f'field_b={system.field_b} must be 0 for an evolution check')
    basis = sector_basis(system.n_spins, thin_model.cutoff)
    amplitudes = initial.amplitudes if isinstance(initial, QuantumState) \
        else np.asarray(initial, dtype=complex)
    if len(amplitudes) == system.dimension:
        thin = basis.T @ amplitudes
        outside = np.linalg.norm(amplitudes) ** 2 - np.linalg.norm(thin) ** 2
        if outside > SECTOR_TOLERANCE:
            raise InvalidArgumentError(
                f'initial state has weight {outside:.3g} outside the sector')
        thin_state = QuantumState.from_vector(thin)
    elif len(amplitudes) == thin_model.cutoff:
        thin_state = QuantumState.from_vector(amplitudes)
    else:
        raise InvalidArgumentError(
            f'initial state has dimension {len(amplitudes)}')

    t_grid = np.asarray(t_grid, dtype=float)
    step = float(np.min(np.diff(t_grid))) if len(t_grid) > 1 else 1.0
    record = evolve_trajectory(
        thin_state, thin_model,
        PropagatorConfig(field_strength_o=o, time_step=step), t_grid)

    generator = scipy.sparse.csr_matrix(system.hamiltonian) \
        - 1j * o * system.staggered_op
    vector = basis @ thin_state.amplitudes
    staggered = system.staggered_diagonal
    full = np.empty(len(t_grid))
    for i, t in enumerate(t_grid):
        if i > 0:
            vector = expm_multiply(-1j * (t - t_grid[i - 1]) * generator,
                                   vector)
            vector = vector / np.linalg.norm(vector)
        full[i] = float(np.real(np.vdot(vector, staggered * vector)))
    return float(np.max(np.abs(full - record.order_param)))


@dataclass(frozen=True)
class OracleReport:
    """Comparison of the reduced Lieb-Mattis model with the full system."""
    n_spins: int
    energy_max_error: float
    order_max_error: float
    trajectory_max_deviation: float
    commutator_norm: float
    singlet_gap: float
    ground_state_total_spin: float

    def as_row(self):
        return {'n_spins': self.n_spins,
                'energy_max_error': self.energy_max_error,
                'order_max_error': self.order_max_error,
                'trajectory_max_deviation': self.trajectory_max_deviation,
                'commutator_norm': self.commutator_norm,
                'singlet_gap': self.singlet_gap,
                'ground_state_total_spin': self.ground_state_total_spin}


def oracle_check(n_spins, o, horizon=2.0, n_times=41, coupling_j=1.0):
    """Validates :func:`~subreak.thin_spectrum.build_lieb_mattis_model`
    against the full system.

    The non-unitary trajectory starts in the singlet and runs to
    ``horizon / (N o)``.

    Returns
    -------
    report : OracleReport

    """
    system = build_full_system(n_spins, coupling_j)
    projected = thin_sector_projection(system)
    reduced = build_lieb_mattis_model(n_spins, projected.cutoff, coupling_j)
    values, vectors = system.lowest_states(2)
    t_grid = np.linspace(0, horizon / (n_spins * o), n_times)
    deviation = full_evolution_check(system, projected, o, t_grid,
                                     symmetric_ground_state(projected))
    report = OracleReport(
        n_spins=n_spins,
        energy_max_error=float(np.max(np.abs(projected.energies
                                             - reduced.energies))),
        order_max_error=float(np.max(np.abs(projected.order_param
                                            - reduced.order_param))),
        trajectory_max_deviation=deviation,
        commutator_norm=system.commutator_norm(),
        singlet_gap=float(values[1] - values[0]),
        ground_state_total_spin=system.total_spin_squared(vectors[:, 0]))
    logger.info('oracle N=%d: energy error %.3g, order error %.3g, '
                'trajectory deviation %.3g', n_spins,
                report.energy_max_error, report.order_max_error, deviation)
    return report


__all__ = ['MAX_SPINS',
           'spin_dot',
           'FullSpinSystem',
           'build_full_system',
           'sector_basis',
           'sector_projector',
           'thin_sector_projection',
           'full_evolution_check',
           'OracleReport',
           'oracle_check']
