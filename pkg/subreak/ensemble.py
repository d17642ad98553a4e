"""Outcome statistics of a fluctuating unitarity-breaking field.

Every trial starts in ``sqrt(w) L + sqrt(1 - w) R`` and is evolved under a
piecewise-constant field whose sign is redrawn every ``dt``: the ``+`` sign
amplifies the favoured branch L, the ``-`` sign the branch R. A trial ends
when the relative branch weight ``q = w_L / (w_L + w_R)`` leaves
``[0.001, 0.999]``.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from subreak.dynamics import generator
from subreak.errors import ExperimentError, InvalidArgumentError
from subreak.experiments import DEFAULT_SEED, DEFAULT_STEP_FACTOR
from subreak.expm_propagator import ScalingSquaringPropagator
from subreak.thin_spectrum import (DEFAULT_REFERENCE_FIELD, branch_pair,
                                   build_model, relative_weight,
                                   weighted_superposition)

logger = logging.getLogger(__name__)

MIN_TRIALS = 1000
MAX_NON_ABSORBED_FRACTION = 0.01
DEFAULT_ABSORPTION = 0.999
DEFAULT_BORN_CUTOFF = 48


class Strategy(Enum):
    """How the field sign is redrawn.

    ``MARTINGALE_BIAS`` favours L with the probability that keeps the
    expected relative weight unchanged over one step, which makes ``q`` a
    bounded martingale: outcomes then follow the initial weights.
    ``SYMMETRIC_FLIP`` favours either branch with probability 1/2.
    ``WEIGHT_PROPORTIONAL`` favours L with probability ``q``.
    """
    MARTINGALE_BIAS = 'martingale_bias'
    SYMMETRIC_FLIP = 'symmetric_flip'
    WEIGHT_PROPORTIONAL = 'weight_proportional'


@dataclass(frozen=True)
class BornEnsembleResult:
    """Outcome frequencies of one ensemble.

    Attributes
    ----------
    trials : int
        Number of trials run.
    weight_initial : float
        Initial squared weight on branch L.
    frequency_l : float
        Fraction of absorbed trials that ended on L.
    ci_halfwidth : float
        Three-sigma binomial half-width of ``frequency_l``.
    strategy : Strategy
        Field-sign strategy.
    non_absorbed : int
        Trials still undecided after ``max_steps``.
    mean_steps : float
        Mean number of field steps until absorption.
    clipped_steps : int
        Martingale steps whose bias fell outside [0, 1] and was clipped.

    """
    trials: int
    weight_initial: float
    frequency_l: float
    ci_halfwidth: float
    strategy: Strategy
    non_absorbed: int = 0
    mean_steps: float = 0.0
    clipped_steps: int = 0

    @property
    def within_ci(self):
        return abs(self.frequency_l - self.weight_initial) \
            <= self.ci_halfwidth

    def as_row(self):
        return {'weight_initial': self.weight_initial,
                'strategy': self.strategy.value,
                'trials': self.trials,
                'frequency_l': self.frequency_l,
                'ci_halfwidth': self.ci_halfwidth,
                'within_ci': self.within_ci,
                'non_absorbed': self.non_absorbed,
                'mean_steps': self.mean_steps,
                'clipped_steps': self.clipped_steps}


class _TrialStreams:
    """Uniform variates drawn in blocks from one generator per trial, seeded
    by ``(seed, trial_index)``: the k-th draw of a trial does not depend on
    how many trials run or in which order."""

    def __init__(self, seed, trials, block_size=256):
        self._generators = [np.random.default_rng([seed, index])
                            for index in range(trials)]
        self._block = np.empty((trials, block_size))
        self._block_size = block_size
        self._position = block_size

    def draw(self, active):
        if self._position == self._block_size:
            for index in active:
                self._block[index] = self._generators[index].random(
                    self._block_size)
            self._position = 0
        draws = self._block[active, self._position]
        self._position += 1
        return draws


def _column_normalize(matrix):
    return matrix / np.linalg.norm(matrix, axis=0)


def born_ensemble(weight_initial, trials, o, model_kind='ladder',
                  n_particles=1024, strategy=Strategy.MARTINGALE_BIAS,
                  seed=DEFAULT_SEED, cutoff=DEFAULT_BORN_CUTOFF,
                  reference_field=DEFAULT_REFERENCE_FIELD,
                  step_factor=DEFAULT_STEP_FACTOR, max_steps=20000,
                  absorption=DEFAULT_ABSORPTION, coupling_j=1.0):
    """Runs an ensemble of trials under a fluctuating field and counts the
    outcomes.

    Parameters
    ----------
    weight_initial : float
        Initial squared weight on the favoured branch L, in [0, 1].
    trials : int
        Number of trials, at least 1000.
    o : float
        Field strength, positive.
    model_kind : str
        ``ladder`` or ``lieb_mattis``.
    n_particles : int
        System size N.
    strategy : Strategy or str
        Field-sign strategy.
    seed : int
        Root seed of the per-trial random streams.
    cutoff : int
        Retained thin-spectrum levels.
    reference_field : float
        Dimensionless field defining the branches.
    step_factor : float
        Field resampling interval in units of ``1 / (N o)``.
    max_steps : int
        Steps after which an undecided trial counts as non-absorbed.
    absorption : float
        Relative weight that decides a trial.

    Returns
    -------
    result : BornEnsembleResult

    Raises
    ------
    ExperimentError
        If more than 1% of the trials are still undecided at
        ``max_steps``.

    """
    strategy = Strategy(strategy)
    if not 0 <= weight_initial <= 1:
        raise InvalidArgumentError(
            f'weight_initial={weight_initial} must lie in [0, 1]')
    if trials < MIN_TRIALS:
        raise InvalidArgumentError(
            f'trials={trials} must be at least {MIN_TRIALS}')
    if not o > 0:
        raise InvalidArgumentError(f'field_strength={o} must be positive')
    if not 0.5 < absorption < 1:
        raise InvalidArgumentError(
            f'absorption={absorption} must lie in (0.5, 1)')

    model = build_model(model_kind, n_particles, cutoff, coupling_j)
    pair = branch_pair(model, reference_field)
    initial = weighted_superposition(pair, weight_initial).amplitudes
    dt = step_factor / (n_particles * o)
    favour_l = ScalingSquaringPropagator(generator(model, o)).matrix(dt)
    favour_r = ScalingSquaringPropagator(
        model.hamiltonian + 1j * o * model.order_param).matrix(dt)

    states = np.repeat(initial[:, None], trials, axis=1)
    weights = np.full(trials, relative_weight(initial, pair))
    outcome = np.zeros(trials, dtype=int)
    steps = np.zeros(trials, dtype=int)
    active = np.arange(trials)
    streams = _TrialStreams(seed, trials)
    clipped = 0

    def absorb(indices, current):
        decided_l = current > absorption
        decided_r = current < 1 - absorption
        outcome[indices[decided_l]] = 1
        outcome[indices[decided_r]] = -1
        return ~(decided_l | decided_r)

    keep = absorb(active, weights)
    active = active[keep]
    for step in range(1, max_steps + 1):
        if len(active) == 0:
            break
        block = states[:, active]
        towards_l = _column_normalize(favour_l @ block)
        towards_r = _column_normalize(favour_r @ block)
        weight_l = relative_weight(towards_l, pair)
        weight_r = relative_weight(towards_r, pair)
        current = weights[active]
        if strategy is Strategy.MARTINGALE_BIAS:
            spread = weight_l - weight_r
            with np.errstate(divide='ignore', invalid='ignore'):
                bias = np.where(spread > 1e-15,
                                (current - weight_r) / spread, 0.5)
            outside = (bias < 0) | (bias > 1)
            clipped += int(np.count_nonzero(outside))
            bias = np.clip(bias, 0, 1)
        elif strategy is Strategy.SYMMETRIC_FLIP:
            bias = np.full(len(active), 0.5)
        else:
            bias = current
        choose_l = streams.draw(active) < bias
        states[:, active] = np.where(choose_l, towards_l, towards_r)
        weights[active] = np.where(choose_l, weight_l, weight_r)
        steps[active] = step
        keep = absorb(active, weights[active])
        active = active[keep]

    non_absorbed = len(active)
    if non_absorbed > MAX_NON_ABSORBED_FRACTION * trials:
        raise ExperimentError(
            f'{non_absorbed} of {trials} trials undecided after {max_steps} '
            f'steps (N={n_particles}, o={o:g})')
    if clipped:
        logger.warning('%d martingale steps clipped to [0, 1]', clipped)
    absorbed = trials - non_absorbed
    frequency = float(np.count_nonzero(outcome == 1) / absorbed)
    decided = outcome != 0
    return BornEnsembleResult(
        trials=trials,
        weight_initial=float(weight_initial),
        frequency_l=frequency,
        ci_halfwidth=3 * math.sqrt(frequency * (1 - frequency) / absorbed),
        strategy=strategy,
        non_absorbed=non_absorbed,
        mean_steps=float(np.mean(steps[decided])) if absorbed else 0.0,
        clipped_steps=clipped)


__all__ = ['Strategy',
           'BornEnsembleResult',
           'born_ensemble']
