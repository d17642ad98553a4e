"""Thin-spectrum models of an ordered many-body system.

A model holds the truncated tower of near-degenerate global excitations
(energies scaling as 1/N) and the matrix of the order parameter in that
basis. The symmetry-breaking field enters as ``+b * O`` with ``b >= 0``, so
the favoured branch has a negative order parameter.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import eigh

from subreak.angular import staggered_elements
from subreak.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

LEAKAGE_FRACTION = 0.1
LEAKAGE_TOLERANCE = 1e-6
NORM_TOLERANCE = 1e-12
DEFAULT_CUTOFF = 64
DEFAULT_REFERENCE_FIELD = 300.0


class ModelKind(Enum):
    LADDER = 'ladder'
    LIEB_MATTIS = 'lieb_mattis'
    CUSTOM = 'custom'


def _frozen(array, dtype):
    array = np.array(array, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ThinSpectrumModel:
    """Truncated thin-spectrum model.

    Attributes
    ----------
    n_particles : int
        Number of microscopic spins N.
    cutoff : int
        Number of retained levels, basis indices ``n = 0 .. cutoff - 1``.
    energies : numpy.ndarray
        Diagonal of the symmetric Hamiltonian in the thin-spectrum basis
        (units of J), non-decreasing.
    order_param : numpy.ndarray
        Real symmetric matrix of the order parameter in the same basis.
    kind : ModelKind
        Which construction produced the model.
    coupling_j : float
        Exchange coupling J.

    """
    n_particles: int
    cutoff: int
    energies: np.ndarray
    order_param: np.ndarray
    kind: ModelKind
    coupling_j: float = 1.0

    def __post_init__(self):
        if self.cutoff < 2:
            raise InvalidArgumentError(
                f'cutoff={self.cutoff} must be at least 2')
        if self.n_particles < 2:
            raise InvalidArgumentError(
                f'n_particles={self.n_particles} must be at least 2')
        energies = _frozen(self.energies, float)
        order_param = _frozen(self.order_param, float)
        if energies.shape != (self.cutoff,):
            raise InvalidArgumentError(
                f'energies has shape {energies.shape}, '
                f'expected ({self.cutoff},)')
        if order_param.shape != (self.cutoff, self.cutoff):
            raise InvalidArgumentError(
                f'order_param has shape {order_param.shape}, '
                f'expected ({self.cutoff}, {self.cutoff})')
        if np.any(np.diff(energies) < 0):
            raise InvalidArgumentError('energies must be non-decreasing')
        if not np.array_equal(order_param, order_param.T):
            raise InvalidArgumentError('order_param must be symmetric')
        object.__setattr__(self, 'energies', energies)
        object.__setattr__(self, 'order_param', order_param)

    @property
    def hamiltonian(self):
        """Dense symmetric Hamiltonian ``diag(E_n)``."""
        return np.diag(self.energies)

    @property
    def field_scale(self):
        """Staggered-magnetization scale N/4."""
        return self.n_particles / 4

    @property
    def level_spacing(self):
        """Lowest thin-spectrum excitation energy ``E_1 - E_0``."""
        return self.energies[1] - self.energies[0]

    @property
    def order_bound(self):
        """Largest absolute matrix element of the order parameter."""
        return float(np.max(np.abs(self.order_param)))


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Unit-norm complex amplitude vector over the thin-spectrum basis."""
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = _frozen(self.amplitudes, complex)
        if amplitudes.ndim != 1:
            raise InvalidArgumentError('amplitudes must be a vector')
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1) > NORM_TOLERANCE:
            raise InvalidArgumentError(
                f'amplitudes have norm {norm!r}, expected 1')
        object.__setattr__(self, 'amplitudes', amplitudes)

    @classmethod
    def from_vector(cls, vector):
        """Builds a state from an arbitrary non-zero vector by normalizing
        it."""
        vector = np.asarray(vector, dtype=complex)
        norm = np.linalg.norm(vector)
        if not np.isfinite(norm) or norm == 0:
            raise InvalidArgumentError(
                'cannot normalize a zero or non-finite vector')
        return cls(vector / norm)

    @classmethod
    def basis(cls, dimension, index=0):
        vector = np.zeros(dimension, dtype=complex)
        vector[index] = 1
        return cls(vector)

    @property
    def dimension(self):
        return len(self.amplitudes)

    def overlap(self, other):
        """Inner product ``<self|other>``."""
        _check_dimension(self.dimension, other.dimension)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def probability(self, other):
        """Squared overlap ``|<self|other>|^2``."""
        return abs(self.overlap(other)) ** 2


@dataclass(frozen=True, eq=False)
class EquilibriumResult:
    """Lowest eigenpair of ``H0 + b O``.

    ``truncation_warning`` is set when more than 1e-6 of the wavepacket
    weight sits on the top tenth of the retained levels, in which case
    ``leakage`` holds that weight.
    """
    state: QuantumState
    energy: float
    order_expectation: float
    field_b: float
    truncation_warning: bool = False
    leakage: float = 0.0


@dataclass(frozen=True, eq=False)
class BranchPair:
    """The two oppositely ordered equilibrium wavepackets.

    ``favoured`` is the ground state of ``H0 + b O`` (negative order
    parameter), ``unfavoured`` the ground state of ``H0 - b O``.
    """
    favoured: QuantumState
    unfavoured: QuantumState
    field_b: float
    reference_field: float
    overlap: float
    truncation_warning: bool = False


def _check_dimension(expected, actual):
    if expected != actual:
        raise InvalidArgumentError(
            f'dimension mismatch: expected {expected}, got {actual}')


def build_ladder_model(n_particles, cutoff=DEFAULT_CUTOFF, coupling_j=1.0):
    """Builds the minimal thin-spectrum ladder.

    The energies are ``E_n = J n(n+1)/N`` and the order parameter couples
    neighbouring levels with the constant element N/4.

    Parameters
    ----------
    n_particles : int
        Number of microscopic spins N, at least 2.
    cutoff : int
        Number of retained levels, at least 2.
    coupling_j : float
        Exchange coupling J, positive.

    Returns
    -------
    model : ThinSpectrumModel

    """
    _check_builder_args(n_particles, cutoff, coupling_j)
    n = np.arange(cutoff)
    energies = coupling_j * n * (n + 1) / n_particles
    order_param = _tridiagonal(np.full(cutoff - 1, n_particles / 4))
    return ThinSpectrumModel(n_particles, cutoff, energies, order_param,
                             ModelKind.LADDER, coupling_j)


def build_lieb_mattis_model(n_particles, cutoff=DEFAULT_CUTOFF,
                            coupling_j=1.0):
    """Builds the thin spectrum of the infinite-range antiferromagnet
    ``(2J/N) S_A . S_B`` in the sector of maximal sublattice spins
    ``S_A = S_B = N/4`` and zero magnetization.

    Level ``n`` is the total-spin state ``|S=n, M=0>``; its energy relative
    to the singlet is ``(J/N) n(n+1)``. The order parameter is the staggered
    magnetization ``S_A^z - S_B^z``, whose elements follow from the coupled
    m=0 states.

    Parameters
    ----------
    n_particles : int
        Number of spins N, divisible by 4.
    cutoff : int
        Number of retained total-spin levels, at most ``N/2 + 1``.
    coupling_j : float
        Exchange coupling J, positive.

    Returns
    -------
    model : ThinSpectrumModel

    """
    _check_builder_args(n_particles, cutoff, coupling_j)
    if n_particles % 4:
        raise InvalidArgumentError(
            f'n_particles={n_particles} must be divisible by 4')
    sector_size = n_particles // 2 + 1
    if cutoff > sector_size:
        raise InvalidArgumentError(
            f'cutoff={cutoff} exceeds the sector size {sector_size}')
    n = np.arange(cutoff)
    energies = coupling_j * n * (n + 1) / n_particles
    elements = staggered_elements(n_particles // 4, cutoff)
    return ThinSpectrumModel(n_particles, cutoff, energies,
                             _tridiagonal(elements), ModelKind.LIEB_MATTIS,
                             coupling_j)


def build_custom_model(n_particles, energies, order_param, coupling_j=1.0):
    """Wraps user-supplied energies and order-parameter matrix."""
    energies = np.asarray(energies, dtype=float)
    return ThinSpectrumModel(n_particles, len(energies), energies,
                             order_param, ModelKind.CUSTOM, coupling_j)


def build_model(kind, n_particles, cutoff=DEFAULT_CUTOFF, coupling_j=1.0):
    """Dispatches to the builder of a built-in model kind."""
    kind = ModelKind(kind)
    if kind is ModelKind.LADDER:
        return build_ladder_model(n_particles, cutoff, coupling_j)
    elif kind is ModelKind.LIEB_MATTIS:
        return build_lieb_mattis_model(n_particles, cutoff, coupling_j)
    raise InvalidArgumentError(f'model_kind={kind.value} has no builder')


def _check_builder_args(n_particles, cutoff, coupling_j):
    if cutoff < 2:
        raise InvalidArgumentError(f'cutoff={cutoff} must be at least 2')
    if n_particles < 2:
        raise InvalidArgumentError(
            f'n_particles={n_particles} must be at least 2')
    if not coupling_j > 0:
        raise InvalidArgumentError(
            f'coupling_j={coupling_j} must be positive')


def _tridiagonal(off_diagonal):
    return np.diag(off_diagonal, 1) + np.diag(off_diagonal, -1)


def symmetric_ground_state(model):
    """The symmetric (singlet) ground state: the n = 0 basis vector."""
    return QuantumState.basis(model.cutoff, 0)


def order_parameter_expectation(model, state):
    """Expectation value ``<psi|O|psi>`` of the order parameter.

    Raises
    ------
    InvalidArgumentError
        If the state dimension differs from the model cutoff.

    """
    return _real_expectation(model.order_param, model, state)


def energy_expectation(model, state):
    """Expectation value ``<psi|H0|psi>``."""
    _check_dimension(model.cutoff, state.dimension)
    return float(np.sum(model.energies * np.abs(state.amplitudes) ** 2))


def _real_expectation(matrix, model, state):
    _check_dimension(model.cutoff, state.dimension)
    psi = state.amplitudes
    value = np.vdot(psi, matrix @ psi)
    scale = max(1.0, float(np.max(np.abs(matrix))))
    if abs(value.imag) > NORM_TOLERANCE * scale:
        raise InvalidArgumentError(
            f'expectation has imaginary part {value.imag!r}')
    return float(value.real)


def fix_phase(vector):
    """Makes the n = 0 amplitude real and non-negative, or, when it
    vanishes, the largest amplitude real and positive."""
    pivot = vector[0]
    if abs(pivot) <= NORM_TOLERANCE:
        pivot = vector[np.argmax(np.abs(vector))]
    return vector * (abs(pivot) / pivot)


def _lowest_state(model, field_b):
    """Lowest eigenpair of the real symmetric matrix ``H0 + b O``."""
    matrix = model.hamiltonian + field_b * model.order_param
    n_lowest = min(model.cutoff, 4)
    values, vectors = eigh(matrix, subset_by_index=[0, n_lowest - 1])
    scale = max(1.0, abs(values[0]))
    degenerate = np.abs(values - values[0]) <= 1e-12 * scale
    if np.count_nonzero(degenerate) > 1:
        space = vectors[:, degenerate]
        vector = space @ space[0, :]
        if np.linalg.norm(vector) <= NORM_TOLERANCE:
            vector = space[:, 0]
        logger.debug('degenerate lowest level at b=%g resolved towards n=0',
                     field_b)
    else:
        vector = vectors[:, 0]
    vector = fix_phase(vector.astype(complex) / np.linalg.norm(vector))
    return QuantumState(vector), float(values[0])


def truncation_leakage(state):
    """Weight of a state on the top tenth of the retained levels."""
    top = math.ceil(LEAKAGE_FRACTION * state.dimension)
    return float(np.sum(np.abs(state.amplitudes[-top:]) ** 2))


def broken_ground_state(model, field_b):
    """Ground state of the symmetry-breaking Hamiltonian ``H0 + b O``.

    Parameters
    ----------
    model : ThinSpectrumModel
        Thin-spectrum model.
    field_b : float
        Field strength, non-negative.

    Returns
    -------
    result : EquilibriumResult
        Ground state with the n = 0 amplitude real and non-negative, its
        energy and order parameter. ``truncation_warning`` flags a
        wavepacket that leaks onto the top of the retained tower.

    """
    if field_b < 0:
        raise InvalidArgumentError(f'field_b={field_b} must be non-negative')
    state, energy = _lowest_state(model, field_b)
    leakage = truncation_leakage(state)
    warn = leakage > LEAKAGE_TOLERANCE
    if warn:
        logger.warning('wavepacket at b=%g leaks %.3g of its weight onto '
                       'the top levels; increase cutoff=%d',
                       field_b, leakage, model.cutoff)
    return EquilibriumResult(state=state,
                             energy=energy,
                             order_expectation=order_parameter_expectation(
                                 model, state),
                             field_b=float(field_b),
                             truncation_warning=warn,
                             leakage=leakage)


def participation_ratio(state):
    """Inverse participation ratio ``1 / sum |c_n|^4``: the number of levels
    a wavepacket effectively occupies."""
    return float(1 / np.sum(np.abs(state.amplitudes) ** 4))


def dimensionless_field(model, field_b):
    """Field strength in units of level spacing per unit order parameter,
    ``b (N/4) / (E_1 - E_0)``. For both built-in kinds this equals
    ``b N^2 / 8`` at J = 1."""
    return field_b * model.field_scale / model.level_spacing


def field_from_dimensionless(model, value):
    """Inverse of :func:`dimensionless_field`."""
    return value * model.level_spacing / model.field_scale


def branch_pair(model, reference_field=DEFAULT_REFERENCE_FIELD,
                max_overlap=1e-6, max_doublings=30):
    """Prepares the two oppositely ordered branch wavepackets.

    The branches are the ground states of ``H0 + b O`` and ``H0 - b O`` at
    the dimensionless reference field. The field is doubled until the
    branches are distinguishable, ``|<L|R>|^2 < max_overlap``.

    Parameters
    ----------
    model : ThinSpectrumModel
        Thin-spectrum model.
    reference_field : float
        Starting dimensionless field, see :func:`dimensionless_field`.
    max_overlap : float
        Upper bound on the squared branch overlap.
    max_doublings : int
        How often the field may be doubled.

    Returns
    -------
    pair : BranchPair

    """
    if not reference_field > 0:
        raise InvalidArgumentError(
            f'reference_field={reference_field} must be positive')
    value = float(reference_field)
    for _ in range(max_doublings + 1):
        field_b = field_from_dimensionless(model, value)
        favoured = broken_ground_state(model, field_b)
        unfavoured, _ = _lowest_state(model, -field_b)
        overlap = favoured.state.probability(unfavoured)
        if overlap < max_overlap:
            warn = favoured.truncation_warning or \
                truncation_leakage(unfavoured) > LEAKAGE_TOLERANCE
            return BranchPair(favoured=favoured.state,
                              unfavoured=unfavoured,
                              field_b=field_b,
                              overlap=overlap,
                              reference_field=value,
                              truncation_warning=warn)
        logger.debug('branch overlap %.3g at field %g, doubling',
                     overlap, value)
        value *= 2
    raise InvalidArgumentError(
        f'reference_field={reference_field} cannot separate the branches '
        f'below overlap {max_overlap} with cutoff={model.cutoff}')


def cat_state(pair):
    """Equal-weight superposition of the two branches."""
    return weighted_superposition(pair, 0.5)


def weighted_superposition(pair, weight_l):
    """Superposition ``sqrt(w) L + sqrt(1 - w) R``, renormalized."""
    if not 0 <= weight_l <= 1:
        raise InvalidArgumentError(f'weight_l={weight_l} must lie in [0, 1]')
    vector = math.sqrt(weight_l) * pair.favoured.amplitudes \
        + math.sqrt(1 - weight_l) * pair.unfavoured.amplitudes
    return QuantumState.from_vector(vector)


def orthogonal_complement(pair):
    """The unfavoured branch with its favoured-branch component removed:
    the state of span{L, R} that has no overlap with L."""
    favoured = pair.favoured.amplitudes
    unfavoured = pair.unfavoured.amplitudes
    vector = unfavoured - np.vdot(favoured, unfavoured) * favoured
    state = QuantumState.from_vector(vector)
    # one re-orthogonalization pass
    vector = state.amplitudes - np.vdot(favoured, state.amplitudes) * favoured
    return QuantumState.from_vector(vector)


def branch_weights(amplitudes, pair):
    """Squared overlaps of one or many states with the two branches.

    Parameters
    ----------
    amplitudes : numpy.ndarray
        State vector, or matrix whose columns are state vectors.
    pair : BranchPair

    Returns
    -------
    weight_l, weight_r : float or numpy.ndarray
        ``|<L|psi>|^2`` and ``|<R|psi>|^2``.

    """
    weight_l = np.abs(pair.favoured.amplitudes.conj() @ amplitudes) ** 2
    weight_r = np.abs(pair.unfavoured.amplitudes.conj() @ amplitudes) ** 2
    return weight_l, weight_r


def relative_weight(amplitudes, pair):
    """Favoured-branch weight relative to the branch subspace,
    ``w_L / (w_L + w_R)``."""
    weight_l, weight_r = branch_weights(amplitudes, pair)
    return weight_l / (weight_l + weight_r)


__all__ = ['ModelKind',
           'ThinSpectrumModel',
           'QuantumState',
           'EquilibriumResult',
           'BranchPair',
           'build_ladder_model',
           'build_lieb_mattis_model',
           'build_custom_model',
           'build_model',
           'symmetric_ground_state',
           'fix_phase',
           'order_parameter_expectation',
           'energy_expectation',
           'broken_ground_state',
           'truncation_leakage',
           'participation_ratio',
           'dimensionless_field',
           'field_from_dimensionless',
           'branch_pair',
           'cat_state',
           'weighted_superposition',
           'orthogonal_complement',
           'branch_weights',
           'relative_weight']
