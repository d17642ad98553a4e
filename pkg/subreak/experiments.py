"""Experiment drivers: collapse-time scaling, selection regimes, energy
drift, equilibrium order, perturbation independence and cat stability.

Every driver is a pure function of its arguments (and seed, where random
numbers are drawn). Grid points are independent and may be fanned out over
threads; results are always collected in grid order.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from subreak.dynamics import (PropagatorConfig, collapse_time,
                              dominant_mode_of, evolve_trajectory,
                              first_crossing_time, generator,
                              model_propagator, project_perturbation)
from subreak.errors import ExperimentError, InvalidArgumentError
from subreak.thin_spectrum import (DEFAULT_CUTOFF, DEFAULT_REFERENCE_FIELD,
                                   branch_pair,
                                   broken_ground_state, build_model,
                                   cat_state, dimensionless_field,
                                   orthogonal_complement, relative_weight,
                                   weighted_superposition)

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20091030
DEFAULT_STEP_FACTOR = 0.1
REGIME_REFERENCE_FIELD = 20.0
#: Largest dimensionless field ``o N^2 / 8`` at which zero-overlap delays
#: still grow with N; beyond it the field amplifies rounding residue.
ZERO_TREND_FIELD = 5.0
ORTHOGONALITY_TOLERANCE = 1e-12


def map_grid(function, items, threads=1):
    """Applies ``function`` to every grid item, optionally on a thread
    pool, and returns the results in grid order."""
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [function(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(function, items))


@dataclass(frozen=True, eq=False)
class PowerLawFit:
    """Least-squares line through ``(log x, log y)``."""
    slope: float
    intercept: float
    r_squared: float
    residuals: np.ndarray

    def summary(self, prefix='fit'):
        return {f'{prefix}_slope': self.slope,
                f'{prefix}_intercept': self.intercept,
                f'{prefix}_r_squared': self.r_squared,
                f'{prefix}_max_residual': float(np.max(np.abs(
                    self.residuals)))}


def fit_power_law(x, y):
    """Fits ``log y = slope log x + intercept``.

    Parameters
    ----------
    x, y : array_like
        Positive samples, at least two.

    Returns
    -------
    fit : PowerLawFit
        Slope, intercept, coefficient of determination and the residuals of
        the log-log fit.

    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2 or len(x) != len(y):
        raise InvalidArgumentError('a power-law fit needs at least two '
                                   'paired samples')
    if np.any(x <= 0) or np.any(y <= 0):
        raise InvalidArgumentError('a power-law fit needs positive samples')
    log_x, log_y = np.log(x), np.log(y)
    design = np.column_stack([log_x, np.ones_like(log_x)])
    coefficients, *_ = np.linalg.lstsq(design, log_y, rcond=None)
    residuals = log_y - design @ coefficients
    total = np.sum((log_y - np.mean(log_y)) ** 2)
    r_squared = 1 - np.sum(residuals ** 2) / total if total > 0 else 1.0
    return PowerLawFit(slope=float(coefficients[0]),
                       intercept=float(coefficients[1]),
                       r_squared=float(r_squared),
                       residuals=residuals)


def _nan_fit_summary(prefix):
    return {f'{prefix}_slope': float('nan'),
            f'{prefix}_intercept': float('nan'),
            f'{prefix}_r_squared': float('nan'),
            f'{prefix}_max_residual': float('nan')}


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    """Serializable outcome of one experiment run.

    Attributes
    ----------
    name : str
        Experiment (subcommand) name.
    tables : dict of str to dict
        Result tables.

        ``key``
            Table name.
        ``value``
            Mapping of column name to column values, in column order.
    summary : dict of str to scalar
        Fit statistics and other scalar outputs.
    seed : int
        Seed the run used.
    config_hash : str
        SHA-256 digest of the canonical run configuration.

    """
    name: str
    tables: dict
    summary: dict
    seed: int
    config_hash: str


def _scan_config(n_particles, o, step_factor=DEFAULT_STEP_FACTOR):
    return PropagatorConfig(field_strength_o=o,
                            time_step=step_factor / (n_particles * o))


def _check_grid(n_values, name='n_values'):
    n_values = np.asarray(n_values, dtype=int)
    if n_values.ndim != 1 or len(n_values) < 4:
        raise InvalidArgumentError(f'{name} needs at least 4 entries')
    if n_values.max() < 4 * n_values.min():
        raise InvalidArgumentError(f'{name} must span at least 2 octaves')
    return n_values


def _check_strength(o):
    if not o > 0:
        raise InvalidArgumentError(f'field_strength={o} must be positive')


def cat_collapse_time(n_particles, o, model_kind='ladder',
                      cutoff=DEFAULT_CUTOFF, threshold=0.99,
                      reference_field=DEFAULT_REFERENCE_FIELD,
                      coupling_j=1.0):
    """Collapse time of the equal-weight cat state onto the favoured
    branch.

    Raises
    ------
    ExperimentError
        If the favoured branch is not reached before ``10^3 / (N o)``.

    """
    model = build_model(model_kind, n_particles, cutoff, coupling_j)
    pair = branch_pair(model, reference_field)
    tau = collapse_time(cat_state(pair), model,
                        _scan_config(n_particles, o), pair.favoured,
                        threshold)
    if tau is None:
        raise ExperimentError(
            f'no collapse for N={n_particles}, o={o:g} within the horizon; '
            'o N^2 is too small for the field to dominate')
    logger.info('N=%d o=%g: tau=%.6g', n_particles, o, tau)
    return tau


@dataclass(frozen=True, eq=False)
class ScalingScanResult:
    """Collapse times over a grid of system sizes at fixed field strength,
    and over a grid of field strengths at fixed size.

    Attributes
    ----------
    n_values : numpy.ndarray
        System sizes N.
    collapse_times : numpy.ndarray
        Collapse time per N.
    fit : PowerLawFit
        Fit of log tau against log N.
    field_strength : float
        Field strength o of the N scan.
    dual_n : int
        System size of the o scan.
    o_values : numpy.ndarray
        Field strengths of the o scan.
    o_collapse_times : numpy.ndarray
        Collapse time per o.
    o_fit : PowerLawFit
        Fit of log tau against log o.

    """
    n_values: np.ndarray
    collapse_times: np.ndarray
    fit: PowerLawFit
    field_strength: float
    dual_n: int
    o_values: np.ndarray
    o_collapse_times: np.ndarray
    o_fit: PowerLawFit

    @property
    def fit_slope(self):
        return self.fit.slope

    @property
    def fit_intercept(self):
        return self.fit.intercept

    @property
    def fit_r_squared(self):
        return self.fit.r_squared

    def tables(self):
        n = self.n_values
        o = self.o_values
        return {'n_scan': {'n': n,
                           'tau': self.collapse_times,
                           'log_n': np.log(n),
                           'log_tau': np.log(self.collapse_times),
                           'tau_n_o': self.collapse_times * n
                           * self.field_strength},
                'o_scan': {'o': o,
                           'tau': self.o_collapse_times,
                           'log_o': np.log(o),
                           'log_tau': np.log(self.o_collapse_times),
                           'tau_n_o': self.o_collapse_times * o
                           * self.dual_n}}

    def summary(self):
        summary = {'field_strength': self.field_strength,
                   'dual_n': int(self.dual_n)}
        summary.update(self.fit.summary('fit'))
        summary.update(self.o_fit.summary('o_fit'))
        return summary


def scaling_scan(n_values, o, model_kind='ladder', cutoff=DEFAULT_CUTOFF,
                 threshold=0.99, dual_n=None, o_values=None,
                 reference_field=DEFAULT_REFERENCE_FIELD, coupling_j=1.0,
                 threads=1):
    """Measures the collapse time of the cat state against the system size
    and, dually, against the field strength.

    Parameters
    ----------
    n_values : array_like of int
        System sizes, at least 4 spanning at least 2 octaves.
    o : float
        Field strength of the N scan.
    model_kind : str
        ``ladder`` or ``lieb_mattis``.
    cutoff : int
        Retained thin-spectrum levels.
    threshold : float
        Squared overlap with the favoured branch that defines collapse.
    dual_n : int, optional
        System size of the o scan. Defaults to the middle of ``n_values``.
    o_values : array_like of float, optional
        Field strengths of the o scan. Defaults to ``o * 2^k``,
        ``k = -2 .. 2``.
    reference_field : float
        Dimensionless field defining the branch wavepackets.
    coupling_j : float
        Exchange coupling J.
    threads : int
        Worker threads for the grid.

    Returns
    -------
    result : ScalingScanResult

    """
    _check_strength(o)
    n_values = _check_grid(n_values)
    if dual_n is None:
        dual_n = int(np.sort(n_values)[len(n_values) // 2])
    o_values = o * 2.0 ** np.arange(-2, 3) if o_values is None \
        else np.asarray(o_values, dtype=float)
    if len(o_values) < 2 or np.any(o_values <= 0):
        raise InvalidArgumentError(
            'o_values needs at least two positive entries')

    def at_size(n):
        return cat_collapse_time(int(n), o, model_kind, cutoff, threshold,
                                 reference_field, coupling_j)

    def at_strength(strength):
        return cat_collapse_time(dual_n, float(strength), model_kind, cutoff,
                                 threshold, reference_field, coupling_j)

    times = np.array(map_grid(at_size, n_values, threads))
    o_times = np.array(map_grid(at_strength, o_values, threads))
    return ScalingScanResult(n_values=n_values,
                             collapse_times=times,
                             fit=fit_power_law(n_values, times),
                             field_strength=float(o),
                             dual_n=int(dual_n),
                             o_values=o_values,
                             o_collapse_times=o_times,
                             o_fit=fit_power_law(o_values, o_times))


class OverlapClass(Enum):
    FINITE_OVERLAP = 'finite_overlap'
    ZERO_OVERLAP = 'zero_overlap'


@dataclass(frozen=True, eq=False)
class RegimeStudyResult:
    """Selection delays for one class of initial states.

    The selection delay is the first time the favoured branch carries more
    than half of the branch weight, ``w_L / (w_L + w_R) > 0.5``.
    ``field_parameters`` holds the dimensionless field ``o N^2 / 8`` of
    every grid point.
    """
    n_values: np.ndarray
    selection_delays: np.ndarray
    overlap_class: OverlapClass
    field_parameters: np.ndarray


def selection_delay(state, model, o, pair, horizon_factor=1e3,
                    step_factor=DEFAULT_STEP_FACTOR):
    """Time until the favoured branch dominates the branch subspace.

    Returns
    -------
    delay : float or None
        None if the horizon ``horizon_factor / (N o)`` passes first.

    """
    config = _scan_config(model.n_particles, o, step_factor)
    horizon = horizon_factor / (model.n_particles * o)

    def reached(vector):
        return relative_weight(vector, pair) > 0.5

    return first_crossing_time(state, model_propagator(model, config),
                               reached, config.time_step, horizon)


def regime_study(n_values, o, model_kind='ladder', cutoff=DEFAULT_CUTOFF,
                 initial_weight=0.25, reference_field=REGIME_REFERENCE_FIELD,
                 horizon_factor=1e3, coupling_j=1.0, threads=1):
    """Compares state selection from finite and from zero overlap with the
    favoured branch.

    Class (a) starts from ``sqrt(w) L + sqrt(1 - w) R``; class (b) from the
    component of R orthogonal to L, which the non-unitary field alone cannot
    amplify: the unitary thin-spectrum dynamics must first build up overlap.

    Class (b) delays grow with N only while the dimensionless field
    ``o N^2 / 8`` stays below ``ZERO_TREND_FIELD``. At stronger fields the
    rounding-level overlap left in the initial state is amplified at a rate
    that grows like ``N o``, so the delay is capped near
    ``log(1e16) / (gap in growth rates)`` and falls like 1/N while staying
    above the class (a) delay. A warning is logged for every such decrease.

    Parameters
    ----------
    n_values : array_like of int
        System sizes.
    o : float
        Field strength.
    initial_weight : float
        Favoured-branch weight w of class (a), in (0, 0.5).
    reference_field : float
        Dimensionless field defining the branches.
    horizon_factor : float
        Horizon in units of ``1 / (N o)``.

    Returns
    -------
    finite, zero : RegimeStudyResult
        Delays of class (a) and class (b).

    """
    _check_strength(o)
    if not 0 < initial_weight < 0.5:
        raise InvalidArgumentError(
            f'initial_weight={initial_weight} must lie in (0, 0.5)')
    n_values = np.asarray(n_values, dtype=int)

    def at_size(n):
        model = build_model(model_kind, int(n), cutoff, coupling_j)
        pair = branch_pair(model, reference_field)
        finite = weighted_superposition(pair, initial_weight)
        zero = orthogonal_complement(pair)
        residual = pair.favoured.probability(zero)
        if residual > ORTHOGONALITY_TOLERANCE:
            raise ExperimentError(
                f'zero-overlap state keeps overlap {residual:.3g} with the '
                f'favoured branch at N={n}')
        delays = []
        for label, state in (('finite', finite), ('zero', zero)):
            delay = selection_delay(state, model, o, pair, horizon_factor)
            if delay is None:
                raise ExperimentError(
                    f'no selection of the favoured branch from the {label}-'
                    f'overlap state for N={n}, o={o:g} within the horizon')
            delays.append(delay)
        logger.info('N=%d: selection delays %.6g (finite), %.6g (zero)',
                    n, *delays)
        return delays + [dimensionless_field(model, o)]

    rows = np.array(map_grid(at_size, n_values, threads))
    delays, fields = rows[:, :2], rows[:, 2]
    for i in np.flatnonzero(np.diff(delays[:, 1]) < 0):
        logger.warning('zero-overlap delay falls from %.6g at N=%d to %.6g '
                       'at N=%d (o N^2 / 8 = %.3g): selection is seeded by '
                       'rounding residue', delays[i, 1], n_values[i],
                       delays[i + 1, 1], n_values[i + 1], fields[i + 1])
    return (RegimeStudyResult(n_values, delays[:, 0],
                              OverlapClass.FINITE_OVERLAP, fields),
            RegimeStudyResult(n_values, delays[:, 1],
                              OverlapClass.ZERO_OVERLAP, fields))


def zero_overlap_non_decreasing(zero, max_field=ZERO_TREND_FIELD):
    """Whether the zero-overlap delays are non-decreasing in N over the grid
    points whose dimensionless field is at most ``max_field``."""
    window = zero.selection_delays[zero.field_parameters <= max_field]
    return bool(np.all(np.diff(window) >= 0))


def regime_tables(finite, zero):
    """Result table of a regime study."""
    return {'delays': {'n': finite.n_values,
                       'field_parameter': finite.field_parameters,
                       'delay_finite': finite.selection_delays,
                       'delay_zero': zero.selection_delays}}


@dataclass(frozen=True, eq=False)
class EnergyDriftResult:
    """Largest drift of ``<H0>`` over a horizon tied to the collapse time.

    ``collapse_times`` is NaN when o = 0, in which case the horizon is an
    absolute time. ``fit`` is None when a drift vanishes.
    """
    n_values: np.ndarray
    collapse_times: np.ndarray
    horizons: np.ndarray
    max_drift: np.ndarray
    spectral_range: np.ndarray
    fit: PowerLawFit = None

    def tables(self):
        return {'drift': {'n': self.n_values,
                          'tau': self.collapse_times,
                          'horizon': self.horizons,
                          'max_drift': self.max_drift,
                          'spectral_range': self.spectral_range}}

    def summary(self):
        if self.fit is None:
            return _nan_fit_summary('fit')
        return self.fit.summary('fit')


def energy_drift_scan(n_values, o, model_kind='ladder', cutoff=DEFAULT_CUTOFF,
                      horizon=3.0, n_samples=200,
                      reference_field=DEFAULT_REFERENCE_FIELD,
                      coupling_j=1.0, threads=1):
    """Largest drift of the symmetric-Hamiltonian energy of the cat state
    along its non-unitary trajectory.

    Parameters
    ----------
    n_values : array_like of int
        System sizes.
    o : float
        Field strength, non-negative.
    horizon : float
        Multiple of the measured collapse time tau(N) when ``o > 0``;
        absolute time (units of hbar/J) when ``o = 0``.
    n_samples : int
        Number of trajectory intervals.

    Returns
    -------
    result : EnergyDriftResult

    """
    if not o >= 0:
        raise InvalidArgumentError(f'field_strength={o} must be non-negative')
    if not horizon > 0:
        raise InvalidArgumentError(f'horizon={horizon} must be positive')
    n_values = np.asarray(n_values, dtype=int)

    def at_size(n):
        n = int(n)
        model = build_model(model_kind, n, cutoff, coupling_j)
        pair = branch_pair(model, reference_field)
        state = cat_state(pair)
        if o > 0:
            tau = collapse_time(state, model, _scan_config(n, o),
                                pair.favoured)
            if tau is None:
                raise ExperimentError(
                    f'no collapse for N={n}, o={o:g} within the horizon')
            span = horizon * tau
            config = _scan_config(n, o)
        else:
            tau = float('nan')
            span = horizon
            config = PropagatorConfig(field_strength_o=0.0,
                                      time_step=horizon / n_samples)
        t_grid = np.linspace(0, span, n_samples + 1)
        record = evolve_trajectory(state, model, config, t_grid)
        drift = float(np.max(np.abs(record.energy - record.energy[0])))
        logger.info('N=%d: max energy drift %.6g over t=%.6g', n, drift,
                    span)
        return tau, span, drift, model.energies[-1] - model.energies[0]

    rows = np.array(map_grid(at_size, n_values, threads))
    drifts = rows[:, 2]
    fit = fit_power_law(n_values, drifts) \
        if o > 0 and np.all(drifts > 0) and len(n_values) > 1 else None
    return EnergyDriftResult(n_values=n_values,
                             collapse_times=rows[:, 0],
                             horizons=rows[:, 1],
                             max_drift=drifts,
                             spectral_range=rows[:, 3],
                             fit=fit)


@dataclass(frozen=True, eq=False)
class EquilibriumScanResult:
    """Normalized equilibrium order parameter over a grid of fields and
    system sizes.

    ``max_spread`` is the largest vertical distance between the curves of
    different N when plotted against the dimensionless field, evaluated on
    their common range.
    """
    n: np.ndarray
    field_b: np.ndarray
    n_times_b: np.ndarray
    scaled_field: np.ndarray
    order_normalized: np.ndarray
    truncation_warning: np.ndarray
    max_spread: float

    def tables(self):
        return {'order': {'n': self.n,
                          'b': self.field_b,
                          'n_times_b': self.n_times_b,
                          'scaled_field': self.scaled_field,
                          'order_normalized': self.order_normalized,
                          'truncation_warning': self.truncation_warning}}

    def summary(self):
        return {'max_spread': self.max_spread,
                'truncated_points': int(np.sum(self.truncation_warning))}


def _curve_spread(curves, n_points=400):
    """Largest vertical spread between curves ``(x, y)`` on the common
    range of their positive abscissae, interpolating linearly in log x."""
    curves = [(x[x > 0], y[x > 0]) for x, y in curves]
    curves = [(x, y) for x, y in curves if len(x) > 1]
    if len(curves) < 2:
        return 0.0
    low = max(x.min() for x, _ in curves)
    high = min(x.max() for x, _ in curves)
    if not low < high:
        logger.warning('order curves share no common field range')
        return float('nan')
    grid = np.log(np.geomspace(low, high, n_points))
    values = np.array([np.interp(grid, np.log(x), y) for x, y in curves])
    return float(np.max(values.max(axis=0) - values.min(axis=0)))


def equilibrium_order_scan(n_values, b_values, model_kind='ladder',
                           cutoff=DEFAULT_CUTOFF, coupling_j=1.0, threads=1):
    """Normalized order parameter ``|<O>| / (N/4)`` of the broken ground
    state over a grid of field strengths.

    Parameters
    ----------
    n_values : int or array_like of int
        System size(s).
    b_values : array_like of float
        Non-negative, increasing field strengths.

    Returns
    -------
    result : EquilibriumScanResult
        One row per (N, b); truncation warnings are surfaced per row.

    """
    n_values = np.atleast_1d(np.asarray(n_values, dtype=int))
    b_values = np.asarray(b_values, dtype=float)
    if np.any(b_values < 0) or np.any(np.diff(b_values) <= 0):
        raise InvalidArgumentError(
            'b_values must be non-negative and increasing')

    def at_size(n):
        model = build_model(model_kind, int(n), cutoff, coupling_j)
        rows = []
        for b in b_values:
            result = broken_ground_state(model, b)
            rows.append((n, b, n * b, dimensionless_field(model, b),
                         abs(result.order_expectation) / model.field_scale,
                         result.truncation_warning))
        return rows

    rows = [row for block in map_grid(at_size, n_values, threads)
            for row in block]
    columns = list(zip(*rows))
    n = np.array(columns[0], dtype=int)
    scaled = np.array(columns[3], dtype=float)
    order = np.array(columns[4], dtype=float)
    spread = _curve_spread([(scaled[n == size], order[n == size])
                            for size in n_values])
    return EquilibriumScanResult(n=n,
                                 field_b=np.array(columns[1], dtype=float),
                                 n_times_b=np.array(columns[2], dtype=float),
                                 scaled_field=scaled,
                                 order_normalized=order,
                                 truncation_warning=np.array(columns[5],
                                                             dtype=bool),
                                 max_spread=spread)


@dataclass(frozen=True, eq=False)
class PerturbationStudyResult:
    """Dominant-mode overlaps for random perturbations ``o O + eps R``."""
    o_parallel: np.ndarray
    remainder_norm: np.ndarray
    overlaps: np.ndarray
    threshold: float = 0.99

    @property
    def fraction_above(self):
        return float(np.mean(self.overlaps >= self.threshold))

    def tables(self):
        return {'samples': {'sample': np.arange(len(self.overlaps)),
                            'o_parallel': self.o_parallel,
                            'remainder_norm': self.remainder_norm,
                            'overlap': self.overlaps}}

    def summary(self):
        return {'fraction_above_threshold': self.fraction_above,
                'min_overlap': float(np.min(self.overlaps)),
                'threshold': self.threshold}


def perturbation_study(n_particles, o, epsilon_ratio=0.1, samples=100,
                       model_kind='ladder', cutoff=DEFAULT_CUTOFF,
                       seed=DEFAULT_SEED, coupling_j=1.0, threads=1):
    """Checks that the dominant mode does not depend on the details of the
    non-unitary perturbation.

    Each sample draws a real symmetric R of unit spectral norm from the
    stream ``(seed, sample)`` and compares the dominant mode of
    ``H0 - i (o O + eps R)``, ``eps = epsilon_ratio * o``, with that of
    ``H0 - i o O``. R has matrix elements of order one while those of O
    scale with N, so only the projection of the perturbation on O is
    amplified.

    Returns
    -------
    result : PerturbationStudyResult

    """
    _check_strength(o)
    model = build_model(model_kind, n_particles, cutoff, coupling_j)
    reference, _ = dominant_mode_of(generator(model, o))
    epsilon = epsilon_ratio * o

    def sample(index):
        rng = np.random.default_rng([seed, index])
        noise = rng.standard_normal((cutoff, cutoff))
        noise = (noise + noise.T) / 2
        noise /= np.linalg.norm(noise, 2)
        perturbation = o * model.order_param + epsilon * noise
        o_parallel, remainder = project_perturbation(perturbation, model)
        mode, _ = dominant_mode_of(model.hamiltonian - 1j * perturbation)
        return (o_parallel, np.linalg.norm(remainder, 2),
                reference.probability(mode))

    rows = np.array(map_grid(sample, range(samples), threads))
    return PerturbationStudyResult(o_parallel=rows[:, 0],
                                   remainder_norm=rows[:, 1],
                                   overlaps=rows[:, 2])


@dataclass(frozen=True, eq=False)
class CatStabilityResult:
    """Branch weights of the cat state after a fixed observation window.

    A size counts as ``selected`` when one branch carries at least 99% of
    the branch weight while the branches still hold at least half of the
    state.
    """
    n_values: np.ndarray
    dominant_weight: np.ndarray
    coverage: np.ndarray
    selected: np.ndarray
    observation_time: float

    def tables(self):
        return {'cat': {'n': self.n_values,
                        'dominant_weight': self.dominant_weight,
                        'coverage': self.coverage,
                        'selected': self.selected}}

    def summary(self):
        return {'observation_time': self.observation_time,
                'selected_count': int(np.sum(self.selected))}


def cat_stability_scan(n_values, o, observation_time, model_kind='ladder',
                       cutoff=DEFAULT_CUTOFF,
                       reference_field=DEFAULT_REFERENCE_FIELD,
                       coupling_j=1.0, threads=1):
    """Evolves the cat state of each system size for a fixed observation
    time: microscopic systems stay in superposition, macroscopic ones select
    a single branch.

    Returns
    -------
    result : CatStabilityResult

    """
    _check_strength(o)
    if not observation_time > 0:
        raise InvalidArgumentError(
            f'observation_time={observation_time} must be positive')
    n_values = np.asarray(n_values, dtype=int)

    def at_size(n):
        model = build_model(model_kind, int(n), cutoff, coupling_j)
        pair = branch_pair(model, reference_field)
        record = evolve_trajectory(
            cat_state(pair), model, _scan_config(int(n), o),
            [0.0, observation_time], (pair.favoured, pair.unfavoured))
        weight_l = record.branch_overlaps[0][-1]
        weight_r = record.branch_overlaps[1][-1]
        coverage = weight_l + weight_r
        dominant = max(weight_l, weight_r) / coverage
        return dominant, coverage

    rows = np.array(map_grid(at_size, n_values, threads))
    selected = (rows[:, 0] >= 0.99) & (rows[:, 1] >= 0.5)
    return CatStabilityResult(n_values=n_values,
                              dominant_weight=rows[:, 0],
                              coverage=rows[:, 1],
                              selected=selected,
                              observation_time=float(observation_time))


__all__ = ['DEFAULT_SEED',
           'map_grid',
           'PowerLawFit',
           'fit_power_law',
           'ExperimentResult',
           'ScalingScanResult',
           'cat_collapse_time',
           'scaling_scan',
           'OverlapClass',
           'RegimeStudyResult',
           'selection_delay',
           'regime_study',
           'regime_tables',
           'zero_overlap_non_decreasing',
           'ZERO_TREND_FIELD',
           'EnergyDriftResult',
           'energy_drift_scan',
           'EquilibriumScanResult',
           'equilibrium_order_scan',
           'PerturbationStudyResult',
           'perturbation_study',
           'CatStabilityResult',
           'cat_stability_scan']
