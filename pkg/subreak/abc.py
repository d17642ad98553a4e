from abc import ABC, abstractmethod
import math

import numpy as np
from scipy.linalg import eigvalsh

from subreak.errors import InvalidArgumentError, PropagationOverflowError

LOG_FLOAT_MAX = math.log(np.finfo(float).max)


class Propagator(ABC):
    """Abstract class for evaluating the action of the non-unitary
    propagator ``exp(-i t K)`` of a complex generator ``K`` on a state
    vector.

    Every backend factors out the growth bound ``mu``, the largest
    eigenvalue of the anti-Hermitian part ``(K - K^H) / 2i``, so that the
    exponentials it evaluates are non-expanding. Norms are therefore carried
    as logarithms and never overflow inside a backend.

    Attributes
    ----------
    generator : numpy.ndarray
        Complex generator ``K``.
    growth_bound : float
        Upper bound ``mu`` on the amplitude growth rate of any state.
    non_unitary_scale : float
        Largest absolute entry of the anti-Hermitian part, ``o max|O|`` for
        ``K = H0 - i o O``.

    """

    #: Largest ``o t max|O|`` evaluated in one shot.
    single_shot_limit = 500.0
    #: Whether the backend renormalizes internally, lifting the
    #: single-shot limit.
    stepped = False

    def __init__(self, generator, rel_tolerance=1e-10, time_step=None):
        """Initializes the Propagator object.

        Parameters
        ----------
        generator : numpy.ndarray
            Square complex generator ``K``.
        rel_tolerance : float, optional
            Relative error bound on the propagated vector.
        time_step : float, optional
            Step length used by stepped evaluation.

        """
        generator = np.asarray(generator, dtype=complex)
        if generator.ndim != 2 or generator.shape[0] != generator.shape[1]:
            raise InvalidArgumentError(
                f'generator has shape {generator.shape}, expected square')
        self.generator = generator
        self.rel_tolerance = rel_tolerance
        self.time_step = time_step
        anti_hermitian = (generator - generator.conj().T) / 2j
        self.non_unitary_scale = float(np.max(np.abs(anti_hermitian)))
        self.growth_bound = float(eigvalsh(anti_hermitian)[-1]) \
            if self.non_unitary_scale > 0 else 0.0

    @property
    def dimension(self):
        return self.generator.shape[0]

    @property
    def max_single_shot(self):
        """Longest time span that may be evaluated in one shot."""
        if self.non_unitary_scale == 0:
            return math.inf
        return self.single_shot_limit / self.non_unitary_scale

    @abstractmethod
    def _evolve(self, vector, t):
        """Applies the propagator over time ``t``.

        Parameters
        ----------
        vector : numpy.ndarray
            Complex state vector.
        t : float
            Non-negative time span.

        Returns
        -------
        scaled : numpy.ndarray
            Vector ``w`` such that ``exp(-i t K) vector = exp(log_scale) w``.
        log_scale : float
            Logarithmic scale factor.

        """

    def evolve(self, vector, t):
        """Single-shot evaluation of ``exp(-i t K) vector``.

        Returns
        -------
        unit : numpy.ndarray
            Renormalized propagated vector.
        log_norm : float
            Logarithm of the raw norm ``||exp(-i t K) vector||``.

        Raises
        ------
        PropagationOverflowError
            If ``t`` exceeds the single-shot limit of a non-stepped backend.

        """
        if t < 0:
            raise InvalidArgumentError(f't={t} must be non-negative')
        if t == 0:
            norm = np.linalg.norm(vector)
            return vector / norm, math.log(norm)
        if not self.stepped and t > self.max_single_shot * (1 + 1e-12):
            raise PropagationOverflowError(
                f'single-shot propagation over t={t} exceeds the limit '
                f'o*t*max|O| <= {self.single_shot_limit:g}; use a shorter t '
                'or the stepped_integration backend')
        scaled, log_scale = self._evolve(vector, t)
        return self._renormalize(scaled, log_scale, t)

    def evolve_stepped(self, vector, t):
        """Evaluates ``exp(-i t K) vector`` in chunks that respect the
        single-shot limit, renormalizing after every chunk. Same returns as
        :meth:`evolve`."""
        if self.stepped or t <= self.max_single_shot:
            return self.evolve(vector, t)
        n_chunks = math.ceil(t / self.max_single_shot)
        chunk = t / n_chunks
        log_norm = 0.0
        for _ in range(n_chunks):
            vector, log_step = self.evolve(vector, chunk)
            log_norm += log_step
        return vector, log_norm

    @staticmethod
    def _renormalize(scaled, log_scale, t):
        norm = np.linalg.norm(scaled)
        if not np.isfinite(norm) or norm == 0:
            raise PropagationOverflowError(
                f'propagated norm left the representable range at t={t}; '
                'use a shorter t or stepped evaluation')
        return scaled / norm, log_scale + math.log(norm)


def raw_norm_from_log(log_norm, t):
    """Converts an accumulated log-norm to a float, raising when the raw
    norm is not representable."""
    if log_norm > LOG_FLOAT_MAX:
        raise PropagationOverflowError(
            f'raw norm exp({log_norm:.6g}) at t={t} exceeds the float range; '
            'use a shorter t or stepped evaluation with log norms')
    return math.exp(log_norm)


__all__ = ['Propagator',
           'raw_norm_from_log']
