"""Non-unitary time evolution under ``K = H0 - i o O``.

The physical state at time ``t`` is ``U(t) psi / ||U(t) psi||`` with
``U(t) = exp(-i t K)`` (hbar = 1, times in units of hbar/J). Raw norms are
carried as logarithms wherever a trajectory is involved.
"""
import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import eig

from subreak.abc import raw_norm_from_log
from subreak.eigen_propagator import DenseEigenPropagator
from subreak.expm_propagator import ScalingSquaringPropagator
from subreak.stepped_propagator import SteppedIntegrationPropagator
from subreak.errors import (DegenerateModeError, InvalidArgumentError,
                            SubreakError)
from subreak.thin_spectrum import (QuantumState, energy_expectation,
                                   fix_phase, order_parameter_expectation)

logger = logging.getLogger(__name__)

DEGENERACY_TOLERANCE = 1e-9
DEFAULT_HORIZON_FACTOR = 1e3
BISECTION_PRECISION = 1e-6
REFINE_POINTS = 16


class Backend(Enum):
    DENSE_EIGEN = 'dense_eigen'
    SCALING_SQUARING = 'scaling_squaring'
    STEPPED_INTEGRATION = 'stepped_integration'


_PROPAGATORS = {Backend.DENSE_EIGEN: DenseEigenPropagator,
                Backend.SCALING_SQUARING: ScalingSquaringPropagator,
                Backend.STEPPED_INTEGRATION: SteppedIntegrationPropagator}


@dataclass(frozen=True)
class PropagatorConfig:
    """Settings of a non-unitary propagation.

    Attributes
    ----------
    field_strength_o : float
        Strength o of the unitarity-breaking field (units of J).
    time_step : float
        Step length (units of hbar/J). Used as the stepped-integration step,
        the trajectory chunk and the first collapse-time probe.
    rel_tolerance : float
        Relative error bound on the propagated vector, in (0, 1e-4].
    backend : Backend
        Propagator implementation.

    """
    field_strength_o: float
    time_step: float = 0.01
    rel_tolerance: float = 1e-10
    backend: Backend = Backend.SCALING_SQUARING

    def __post_init__(self):
        if not self.field_strength_o >= 0:
            raise InvalidArgumentError(
                f'field_strength_o={self.field_strength_o} must be '
                'non-negative')
        if not self.time_step > 0:
            raise InvalidArgumentError(
                f'time_step={self.time_step} must be positive')
        if not 0 < self.rel_tolerance <= 1e-4:
            raise InvalidArgumentError(
                f'rel_tolerance={self.rel_tolerance} must lie in (0, 1e-4]')
        object.__setattr__(self, 'backend', Backend(self.backend))


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    """Observables along a renormalized trajectory.

    Attributes
    ----------
    times : numpy.ndarray
        Grid times.
    log_raw_norm : numpy.ndarray
        Accumulated ``log ||U(t) psi_0||``.
    energy : numpy.ndarray
        ``<H0>`` on the renormalized state.
    order_param : numpy.ndarray
        ``<O>`` on the renormalized state.
    branch_overlaps : tuple of numpy.ndarray or None
        Squared overlaps with the two designated branch states.

    """
    times: np.ndarray
    log_raw_norm: np.ndarray
    energy: np.ndarray
    order_param: np.ndarray
    branch_overlaps: tuple = None

    @property
    def raw_norm(self):
        """``||U(t) psi_0||``; infinite where it exceeds the float range."""
        with np.errstate(over='ignore'):
            return np.exp(self.log_raw_norm)

    def as_columns(self):
        """Observables as an ordered mapping of column name to array."""
        columns = {'t': self.times,
                   'log_raw_norm': self.log_raw_norm,
                   'raw_norm': self.raw_norm,
                   'energy': self.energy,
                   'order_param': self.order_param}
        if self.branch_overlaps is not None:
            columns['overlap_favoured'] = self.branch_overlaps[0]
            columns['overlap_unfavoured'] = self.branch_overlaps[1]
        return columns


def generator(model, o):
    """Non-Hermitian generator ``K = H0 - i o O``.

    The result is complex-symmetric: ``K^T = K``.

    Parameters
    ----------
    model : ThinSpectrumModel
        Thin-spectrum model.
    o : float
        Field strength, non-negative.

    Returns
    -------
    k : numpy.ndarray
        Complex matrix of dimension ``model.cutoff``.

    """
    if not o >= 0:
        raise InvalidArgumentError(f'o={o} must be non-negative')
    return model.hamiltonian - 1j * o * model.order_param


def create_propagator(matrix, config):
    """Instantiates the propagator backend selected in ``config`` for the
    generator ``matrix``."""
    propagator = _PROPAGATORS[config.backend]
    return propagator(matrix,
                      rel_tolerance=config.rel_tolerance,
                      time_step=config.time_step)


def model_propagator(model, config):
    return create_propagator(generator(model, config.field_strength_o),
                             config)


def _check_state(state, model):
    if state.dimension != model.cutoff:
        raise InvalidArgumentError(
            f'state dimension {state.dimension} does not match '
            f'cutoff={model.cutoff}')


def propagate(state, model, config, t):
    """Applies ``exp(-i t K)`` to a state in one shot and renormalizes.

    Parameters
    ----------
    state : QuantumState
        Initial state.
    model : ThinSpectrumModel
        Thin-spectrum model.
    config : PropagatorConfig
        Field strength and backend.
    t : float
        Non-negative time.

    Returns
    -------
    state : QuantumState
        Renormalized propagated state.
    raw_norm : float
        ``||exp(-i t K) psi||``.

    Raises
    ------
    PropagationOverflowError
        If the raw norm is not representable, or ``o t max|O|`` exceeds the
        single-shot limit of the dense_eigen and scaling_squaring backends.

    """
    _check_state(state, model)
    if t < 0:
        raise InvalidArgumentError(f't={t} must be non-negative')
    if t == 0:
        return state, 1.0
    propagator = model_propagator(model, config)
    vector, log_norm = propagator.evolve(state.amplitudes, t)
    return QuantumState.from_vector(vector), raw_norm_from_log(log_norm, t)


def evolve_trajectory(state, model, config, t_grid, branches=None):
    """Evolves a state along a time grid, recording observables.

    Each grid interval is evaluated with per-step renormalization, so long
    horizons never overflow; the raw norm is accumulated as a logarithm.

    Parameters
    ----------
    state : QuantumState
        Initial state.
    model : ThinSpectrumModel
        Thin-spectrum model.
    config : PropagatorConfig
        Field strength and backend.
    t_grid : array_like
        Strictly increasing times starting at 0.
    branches : pair of QuantumState, optional
        Branch states whose squared overlaps are recorded.

    Returns
    -------
    record : TrajectoryRecord

    """
    _check_state(state, model)
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) == 0 or t_grid[0] != 0:
        raise InvalidArgumentError('t_grid must be a vector starting at 0')
    if np.any(np.diff(t_grid) <= 0):
        raise InvalidArgumentError('t_grid must be strictly increasing')

    n_times = len(t_grid)
    log_raw_norm = np.zeros(n_times)
    energy = np.empty(n_times)
    order = np.empty(n_times)
    overlaps = None if branches is None else np.empty((2, n_times))

    propagator = model_propagator(model, config) if n_times > 1 else None
    vector = state.amplitudes
    for i, t in enumerate(t_grid):
        if i > 0:
            try:
                vector, log_step = propagator.evolve_stepped(
                    vector, t - t_grid[i - 1])
            except SubreakError as err:
                raise type(err)(f'{err} (trajectory grid time t={t})') \
                    from err
            log_raw_norm[i] = log_raw_norm[i - 1] + log_step
        current = QuantumState.from_vector(vector)
        vector = current.amplitudes
        energy[i] = energy_expectation(model, current)
        order[i] = order_parameter_expectation(model, current)
        if overlaps is not None:
            overlaps[0, i] = branches[0].probability(current)
            overlaps[1, i] = branches[1].probability(current)

    return TrajectoryRecord(times=t_grid,
                            log_raw_norm=log_raw_norm,
                            energy=energy,
                            order_param=order,
                            branch_overlaps=None if overlaps is None
                            else (overlaps[0], overlaps[1]))


def dominant_mode_of(matrix):
    """Eigenvector of a complex generator with the largest amplitude growth
    rate.

    For an amplitude factor ``exp(-i lambda t)`` the modulus grows as
    ``exp(Im(lambda) t)``, so the growth rate of an eigenvalue is
    ``Im(lambda)``.

    Returns
    -------
    mode : QuantumState
        Unit-norm eigenvector, phase fixed like a broken ground state.
    growth_rate : float
        Largest ``Im(lambda)`` (units of J/hbar).

    Raises
    ------
    DegenerateModeError
        If the two largest growth rates agree within 1e-9 relative.

    """
    values, vectors = eig(np.asarray(matrix, dtype=complex))
    rates = values.imag
    ranking = np.argsort(rates)[::-1]
    if len(rates) > 1:
        top, second = rates[ranking[0]], rates[ranking[1]]
        scale = max(abs(top), abs(second), np.finfo(float).tiny)
        if top - second <= DEGENERACY_TOLERANCE * scale:
            raise DegenerateModeError(
                f'growth rates {top!r} and {second!r} coincide within '
                f'{DEGENERACY_TOLERANCE:g}; perturb o')
    vector = vectors[:, ranking[0]]
    return QuantumState.from_vector(fix_phase(vector)), \
        float(rates[ranking[0]])


def dominant_mode(model, o):
    """Dominant mode of ``K = H0 - i o O``; see :func:`dominant_mode_of`.

    Parameters
    ----------
    model : ThinSpectrumModel
        Thin-spectrum model.
    o : float
        Field strength, positive.

    """
    if not o > 0:
        raise InvalidArgumentError(f'o={o} must be positive')
    return dominant_mode_of(generator(model, o))


def project_perturbation(perturbation, model):
    """Decomposes a perturbation as ``P = o_parallel O + R`` with ``R``
    orthogonal to ``O`` in the entrywise inner product.

    Only ``o_parallel`` is amplified by the system size; the remainder acts
    at microscopic strength.

    Parameters
    ----------
    perturbation : numpy.ndarray
        Real symmetric matrix of dimension ``model.cutoff``.
    model : ThinSpectrumModel
        Thin-spectrum model.

    Returns
    -------
    o_parallel : float
        ``<P, O> / <O, O>``.
    remainder : numpy.ndarray
        ``P - o_parallel O``.

    """
    perturbation = np.asarray(perturbation, dtype=float)
    if perturbation.shape != model.order_param.shape:
        raise InvalidArgumentError(
            f'perturbation has shape {perturbation.shape}, expected '
            f'{model.order_param.shape}')
    order = model.order_param
    norm_squared = np.sum(order * order)
    if norm_squared == 0:
        raise InvalidArgumentError('order_param is identically zero')
    o_parallel = float(np.sum(perturbation * order) / norm_squared)
    return o_parallel, perturbation - o_parallel * order


def default_horizon(model, o):
    """Collapse-time horizon ``10^3 hbar / (N o)``."""
    return DEFAULT_HORIZON_FACTOR / (model.n_particles * o)


def collapse_time(state, model, config, target, threshold=0.99,
                  horizon=None):
    """First time at which the squared overlap with ``target`` exceeds
    ``threshold``.

    The state is probed at ``time_step, 2 time_step, 4 time_step, ...`` up to
    the horizon. The first bracket that crosses is scanned on a uniform
    sub-grid and the first crossing is bisected to relative precision 1e-6.

    Parameters
    ----------
    state : QuantumState
        Initial state.
    model : ThinSpectrumModel
        Thin-spectrum model.
    config : PropagatorConfig
        Field strength, backend and first probe time.
    target : QuantumState
        Unit-norm target state.
    threshold : float, optional
        Squared-overlap threshold in (0.5, 1).
    horizon : float, optional
        Latest time considered. Defaults to ``10^3 / (N o)``; mandatory when
        ``o = 0``.

    Returns
    -------
    tau : float or None
        Collapse time, or None if the threshold is not reached.

    """
    _check_state(state, model)
    _check_state(target, model)
    if not 0.5 < threshold < 1:
        raise InvalidArgumentError(
            f'threshold={threshold} must lie in (0.5, 1)')
    o = config.field_strength_o
    if horizon is None:
        if o == 0:
            raise InvalidArgumentError(
                'horizon is mandatory when field_strength_o = 0')
        horizon = default_horizon(model, o)
    if not horizon > 0:
        raise InvalidArgumentError(f'horizon={horizon} must be positive')

    def reached(vector):
        return abs(np.vdot(target.amplitudes, vector)) ** 2 > threshold

    tau = first_crossing_time(state, model_propagator(model, config),
                              reached, config.time_step, horizon)
    if tau is None:
        logger.info('no collapse before horizon t=%g (N=%d, o=%g)',
                    horizon, model.n_particles, o)
    return tau


def first_crossing_time(state, propagator, reached, time_step, horizon):
    """First time at which ``reached(vector)`` becomes true along the
    renormalized trajectory of ``state``.

    Probes at ``time_step`` times powers of two bracket the first crossing,
    a uniform sub-grid of the bracket finds the first sub-interval that
    crosses, and bisection narrows it to relative precision 1e-6.

    Parameters
    ----------
    state : QuantumState
        Initial state.
    propagator : Propagator
        Propagator of the generator.
    reached : callable
        Predicate on a unit state vector.
    time_step : float
        First probe time.
    horizon : float
        Latest time considered.

    Returns
    -------
    t : float or None
        Crossing time, 0 if the initial state already satisfies ``reached``,
        None if the horizon passes first.

    """
    if reached(state.amplitudes):
        return 0.0

    def advance(vector, dt):
        return propagator.evolve_stepped(vector, dt)[0]

    t_low, v_low = 0.0, state.amplitudes
    t_high = min(time_step, horizon)
    while True:
        v_high = advance(v_low, t_high - t_low)
        if reached(v_high):
            break
        if t_high >= horizon:
            return None
        t_low, v_low = t_high, v_high
        t_high = min(2 * t_high, horizon)

    step = (t_high - t_low) / REFINE_POINTS
    for k in range(1, REFINE_POINTS + 1):
        t_next = t_high if k == REFINE_POINTS else t_low + step
        v_next = advance(v_low, t_next - t_low)
        if reached(v_next):
            t_high = t_next
            break
        t_low, v_low = t_next, v_next

    while t_high - t_low > BISECTION_PRECISION * t_high:
        t_mid = 0.5 * (t_low + t_high)
        v_mid = advance(v_low, t_mid - t_low)
        if reached(v_mid):
            t_high = t_mid
        else:
            t_low, v_low = t_mid, v_mid
    return t_high


__all__ = ['Backend',
           'PropagatorConfig',
           'TrajectoryRecord',
           'generator',
           'create_propagator',
           'model_propagator',
           'propagate',
           'evolve_trajectory',
           'dominant_mode',
           'dominant_mode_of',
           'project_perturbation',
           'default_horizon',
           'collapse_time',
           'first_crossing_time']
